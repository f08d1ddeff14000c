//! Exact Gaussian rationals and dense exact matrices over them.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational.
pub type Q = BigRational;

/// `re + im·i` with both parts exact rationals.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: Q,
    pub im: Q,
}

pub type C = GaussianRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

impl GaussianRational {
    pub fn new(re: Q, im: Q) -> Self {
        Self { re, im }
    }

    pub fn real(re: Q) -> Self {
        Self { re, im: Q::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(Q::from_integer(n.into()))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Self::real(q(n, d))
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        Self::new(Q::zero(), Q::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// `re² + im²`.
    pub fn norm_sqr(&self) -> Q {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        let n = rhs.norm_sqr();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let num = self * &rhs.conj();
        Ok(Self::new(num.re / &n, num.im / n))
    }

    pub fn inv(&self) -> Result<Self> {
        Self::one().checked_div(self)
    }

    pub fn scale(&self, r: &Q) -> Self {
        Self::new(&self.re * r, &self.im * r)
    }

    /// Multiplies by `i^k`.
    pub fn mul_i_pow(&self, k: u32) -> Self {
        match k % 4 {
            0 => self.clone(),
            1 => Self::new(-self.im.clone(), self.re.clone()),
            2 => -self.clone(),
            _ => Self::new(self.im.clone(), -self.re.clone()),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }
}

/// Binary field operation selector used by [`field_arithmetic`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Conjugates `a`; `b` is ignored.
    Conj,
}

pub fn field_arithmetic(a: &C, b: &C, op: FieldOp) -> Result<C> {
    Ok(match op {
        FieldOp::Add => a + b,
        FieldOp::Sub => a - b,
        FieldOp::Mul => a * b,
        FieldOp::Div => a.checked_div(b)?,
        FieldOp::Conj => a.conj(),
    })
}

macro_rules! forward_binop {
    ($tr:ident, $f:ident, $body:expr) => {
        impl<'a, 'b> $tr<&'b C> for &'a C {
            type Output = C;
            fn $f(self, rhs: &'b C) -> C {
                let g: fn(&C, &C) -> C = $body;
                g(self, rhs)
            }
        }
        impl $tr<C> for C {
            type Output = C;
            fn $f(self, rhs: C) -> C {
                (&self).$f(&rhs)
            }
        }
        impl<'b> $tr<&'b C> for C {
            type Output = C;
            fn $f(self, rhs: &'b C) -> C {
                (&self).$f(rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| C::new(&a.re + &b.re, &a.im + &b.im));
forward_binop!(Sub, sub, |a, b| C::new(&a.re - &b.re, &a.im - &b.im));
forward_binop!(Mul, mul, |a, b| {
    if a.im.is_zero() && b.im.is_zero() {
        return C::real(&a.re * &b.re);
    }
    C::new(
        &a.re * &b.re - &a.im * &b.im,
        &a.re * &b.im + &a.im * &b.re,
    )
});

impl AddAssign<&C> for C {
    fn add_assign(&mut self, rhs: &C) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&C> for C {
    fn sub_assign(&mut self, rhs: &C) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&C> for C {
    fn mul_assign(&mut self, rhs: &C) {
        *self = &*self * rhs;
    }
}

impl Neg for C {
    type Output = C;
    fn neg(self) -> C {
        C::new(-self.re, -self.im)
    }
}

impl Neg for &C {
    type Output = C;
    fn neg(self) -> C {
        C::new(-self.re.clone(), -self.im.clone())
    }
}

impl From<i64> for C {
    fn from(n: i64) -> Self {
        C::from_int(n)
    }
}

impl From<Q> for C {
    fn from(r: Q) -> Self {
        C::real(r)
    }
}

impl fmt::Display for GaussianRational {
    /// Writes `p/q+r/si`, dropping zero parts and unit denominators.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "{}{}i", self.re, self.im)
                } else {
                    write!(f, "{}+{}i", self.re, self.im)
                }
            }
        }
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_rational(s: &str) -> Option<Q> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n, d))
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

impl FromStr for GaussianRational {
    type Err = Error;

    /// Accepts `a`, `bi`, `a+bi`, `a-bi` with rational `a`, `b`; a bare `i`/`-i` means ±1.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad scalar {s:?}"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(bad());
        }
        let Some(body) = t.strip_suffix('i') else {
            return parse_rational(&t).map(C::real).ok_or_else(bad);
        };
        // The imaginary part starts at the last sign past position 0.
        let split = body
            .char_indices()
            .rev()
            .find(|&(k, c)| k > 0 && (c == '+' || c == '-'))
            .map(|(k, _)| k);
        let (re_s, im_s) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let re = if re_s.is_empty() {
            Q::zero()
        } else {
            parse_rational(re_s).ok_or_else(bad)?
        };
        let im = match im_s {
            "" | "+" => Q::one(),
            "-" => -Q::one(),
            x => parse_rational(x.strip_prefix('+').unwrap_or(x)).ok_or_else(bad)?,
        };
        Ok(C::new(re, im))
    }
}

impl serde::Serialize for GaussianRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for GaussianRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            I(i64),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::I(n) => Ok(C::from_int(n)),
        }
    }
}

/// Coordinate-vector helpers.
pub mod vec {
    use super::C;

    pub fn zeros(n: usize) -> Vec<C> {
        vec![C::zero(); n]
    }

    pub fn unit(n: usize, k: usize) -> Vec<C> {
        let mut v = zeros(n);
        v[k] = C::one();
        v
    }

    pub fn add(a: &[C], b: &[C]) -> Vec<C> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn sub(a: &[C], b: &[C]) -> Vec<C> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    pub fn scale(a: &[C], s: &C) -> Vec<C> {
        a.iter().map(|x| x * s).collect()
    }

    pub fn axpy(acc: &mut [C], s: &C, x: &[C]) {
        if s.is_zero() {
            return;
        }
        for (a, b) in acc.iter_mut().zip(x) {
            if !b.is_zero() {
                *a += &(s * b);
            }
        }
    }

    pub fn is_zero(a: &[C]) -> bool {
        a.iter().all(C::is_zero)
    }

    pub fn conj(a: &[C]) -> Vec<C> {
        a.iter().map(C::conj).collect()
    }

    /// `[c1, c2, ...]` in scalar syntax.
    pub fn show(a: &[C]) -> String {
        let parts: Vec<String> = a.iter().map(ToString::to_string).collect();
        format!("[{}]", parts.join(", "))
    }
}

/// Dense row-major matrix of Gaussian rationals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C>,
}

/// Outcome of [`ExactMatrix::psd_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsdVerdict {
    PositiveSemidefinite,
    /// `witness† M witness < 0`.
    Indefinite { witness: Vec<C> },
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m.set(k, k, C::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(d: &[C]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (k, x) in d.iter().enumerate() {
            m.set(k, k, x.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &C {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[C] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<C>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(C::is_zero)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (i..self.cols).all(|j| *self.get(i, j) == self.get(j, i).conj()))
    }

    pub fn scale(&self, s: &C) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        out.data[i * o.cols + j] += &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C]) -> Result<Vec<C>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!("vector length {} vs {} columns", v.len(), self.cols)));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = C::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += &(a * b);
                    }
                }
                acc
            })
            .collect())
    }

    /// `u† M v`.
    pub fn form(&self, u: &[C], v: &[C]) -> Result<C> {
        let mv = self.mul_vec(v)?;
        Ok(u.iter().zip(&mv).fold(C::zero(), |acc, (a, b)| acc + a.conj() * b))
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(Error::Dimension(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        Ok(())
    }

    /// Row-reduces `[self | rhs]`; returns the rank of `self` and the pivot columns.
    fn eliminate(a: &mut Self, b: &mut Self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            let Some(p) = (r..a.rows).find(|&i| !a.get(i, c).is_zero()) else { continue };
            if p != r {
                for j in 0..a.cols {
                    a.data.swap(p * a.cols + j, r * a.cols + j);
                }
                for j in 0..b.cols {
                    b.data.swap(p * b.cols + j, r * b.cols + j);
                }
            }
            let inv = a.get(r, c).inv().expect("nonzero pivot");
            for j in 0..a.cols {
                let v = a.get(r, j) * &inv;
                a.set(r, j, v);
            }
            for j in 0..b.cols {
                let v = b.get(r, j) * &inv;
                b.set(r, j, v);
            }
            for i in 0..a.rows {
                if i == r {
                    continue;
                }
                let f = a.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..a.cols {
                    let v = a.get(i, j) - &(&f * a.get(r, j));
                    a.set(i, j, v);
                }
                for j in 0..b.cols {
                    let v = b.get(i, j) - &(&f * b.get(r, j));
                    b.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
            if r == a.rows {
                break;
            }
        }
        pivots
    }

    /// Exact solution of `self · X = rhs`.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(Error::Dimension(format!(
                "solve needs square lhs matching rhs rows, got {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut a = self.clone();
        let mut b = rhs.clone();
        let pivots = Self::eliminate(&mut a, &mut b);
        if pivots.len() < self.rows {
            return Err(Error::Singular { rank: pivots.len(), size: self.rows });
        }
        Ok(b)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.rows))
    }

    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut b = Self::zeros(self.rows, 0);
        Self::eliminate(&mut a, &mut b).len()
    }

    /// Some `x` with `self·x = b` (free variables set to zero), or `None` if inconsistent.
    pub fn solve_vec(&self, b: &[C]) -> Option<Vec<C>> {
        let mut a = self.clone();
        let mut rhs = Self::from_fn(self.rows, 1, |i, _| b[i].clone());
        let pivots = Self::eliminate(&mut a, &mut rhs);
        if (pivots.len()..self.rows).any(|i| !rhs.get(i, 0).is_zero()) {
            return None;
        }
        let mut x = vec![C::zero(); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = rhs.get(r, 0).clone();
        }
        Some(x)
    }

    /// Indices of a maximal linearly independent set of columns, greedy from the left.
    pub fn independent_columns(&self) -> Vec<usize> {
        let mut a = self.clone();
        let mut b = Self::zeros(self.rows, 0);
        Self::eliminate(&mut a, &mut b)
    }

    /// Basis of the right null space `{x : self·x = 0}` as column vectors.
    pub fn null_space(&self) -> Vec<Vec<C>> {
        let mut a = self.clone();
        let mut b = Self::zeros(self.rows, 0);
        let pivots = Self::eliminate(&mut a, &mut b);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut x = vec![C::zero(); self.cols];
                x[fc] = C::one();
                for (r, &pc) in pivots.iter().enumerate() {
                    x[pc] = -a.get(r, fc);
                }
                x
            })
            .collect()
    }

    /// Exact PSD test by symmetric pivoting. Diagonal entries of a hermitian matrix are real,
    /// so every pivot is a rational.
    pub fn psd_check(&self) -> Result<PsdVerdict> {
        if !self.is_hermitian() {
            return Err(Error::NotHermitian);
        }
        let n = self.rows;
        let mut r = self.clone();
        let mut alive: Vec<usize> = (0..n).collect();
        // (pivot index, coefficients M_pj / M_pp for the indices alive after it)
        let mut steps: Vec<(usize, Vec<(usize, C)>)> = Vec::new();
        let witness_from = |y: Vec<C>, steps: &[(usize, Vec<(usize, C)>)]| {
            let mut x = y;
            for (p, coeffs) in steps.iter().rev() {
                let mut s = C::zero();
                for (j, c) in coeffs {
                    s += &(c * &x[*j]);
                }
                x[*p] = -s;
            }
            x
        };
        while !alive.is_empty() {
            if let Some(&k) = alive.iter().find(|&&k| r.get(k, k).re.is_negative()) {
                let mut y = vec![C::zero(); n];
                y[k] = C::one();
                return Ok(PsdVerdict::Indefinite { witness: witness_from(y, &steps) });
            }
            let Some(&p) = alive.iter().find(|&&k| !r.get(k, k).is_zero()) else {
                for &i in &alive {
                    for &j in &alive {
                        if i != j && !r.get(i, j).is_zero() {
                            let mut y = vec![C::zero(); n];
                            y[i] = C::one();
                            y[j] = -r.get(i, j).conj();
                            return Ok(PsdVerdict::Indefinite { witness: witness_from(y, &steps) });
                        }
                    }
                }
                return Ok(PsdVerdict::PositiveSemidefinite);
            };
            alive.retain(|&k| k != p);
            let d = r.get(p, p).clone();
            let coeffs: Vec<(usize, C)> = alive
                .iter()
                .map(|&j| (j, r.get(p, j).checked_div(&d).expect("nonzero pivot")))
                .collect();
            for &i in &alive {
                let rip = r.get(i, p).clone();
                if rip.is_zero() {
                    continue;
                }
                for (j, c) in &coeffs {
                    let v = r.get(i, *j) - &(&rip * c);
                    r.set(i, *j, v);
                }
            }
            steps.push((p, coeffs));
        }
        Ok(PsdVerdict::PositiveSemidefinite)
    }
}

/// Exact solution of `m · X = b`.
pub fn solve_linear(m: &ExactMatrix, b: &ExactMatrix) -> Result<ExactMatrix> {
    m.solve(b)
}

pub fn psd_check(m: &ExactMatrix) -> Result<PsdVerdict> {
    m.psd_check()
}

impl serde::Serialize for ExactMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for ExactMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<C>>::deserialize(d)?;
        ExactMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> C {
        s.parse().unwrap()
    }

    #[test]
    fn conjugate_product_is_norm() {
        let a = c("1/2+1i");
        let r = field_arithmetic(&a, &a.conj(), FieldOp::Mul).unwrap();
        assert_eq!(r, C::frac(5, 4));
    }

    #[test]
    fn conj_minus_self_is_imaginary() {
        let a = c("3/7+2i");
        let r = a.clone() - a.conj();
        assert_eq!(r, c("4i"));
    }

    #[test]
    fn division_by_zero_errors() {
        assert!(matches!(
            field_arithmetic(&C::one(), &C::zero(), FieldOp::Div),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn scalar_text_round_trip() {
        for s in ["0", "3/2+1/2i", "-1i", "1i", "-7/3", "2-5/4i", "-1/2-1i"] {
            let x = c(s);
            assert_eq!(c(&x.to_string()), x, "{s}");
        }
        assert_eq!(c("-i"), c("-1i"));
        assert_eq!(c("i"), C::i());
        assert_eq!(c("3/2+1/2i").to_string(), "3/2+1/2i");
        assert!("1/0".parse::<C>().is_err());
        assert!("x".parse::<C>().is_err());
    }

    #[test]
    fn unipotent_inverse() {
        let m = ExactMatrix::from_rows(vec![vec![1.into(), 1.into()], vec![0.into(), 1.into()]]).unwrap();
        let inv = solve_linear(&m, &ExactMatrix::identity(2)).unwrap();
        assert_eq!(inv.to_rows(), vec![vec![C::one(), C::from_int(-1)], vec![C::zero(), C::one()]]);
    }

    #[test]
    fn singular_reports_rank() {
        let m = ExactMatrix::from_rows(vec![vec![1.into(), 2.into()], vec![2.into(), 4.into()]]).unwrap();
        assert!(matches!(m.inverse(), Err(Error::Singular { rank: 1, size: 2 })));
    }

    #[test]
    fn psd_examples() {
        assert_eq!(ExactMatrix::identity(3).psd_check().unwrap(), PsdVerdict::PositiveSemidefinite);
        let m = ExactMatrix::diag(&[C::one(), C::from_int(-1)]);
        match m.psd_check().unwrap() {
            PsdVerdict::Indefinite { witness } => {
                assert_eq!(witness, vec![C::zero(), C::one()]);
            }
            v => panic!("{v:?}"),
        }
        let off = ExactMatrix::from_rows(vec![vec![0.into(), C::i()], vec![-C::i(), 0.into()]]).unwrap();
        let PsdVerdict::Indefinite { witness } = off.psd_check().unwrap() else { panic!() };
        assert!(off.form(&witness, &witness).unwrap().re.is_negative());
        let nh = ExactMatrix::from_rows(vec![vec![0.into(), 1.into()], vec![0.into(), 0.into()]]).unwrap();
        assert!(matches!(nh.psd_check(), Err(Error::NotHermitian)));
    }

    #[test]
    fn null_space_is_annihilated() {
        let m = ExactMatrix::from_rows(vec![
            vec![1.into(), 2.into(), 3.into()],
            vec![2.into(), 4.into(), 6.into()],
        ])
        .unwrap();
        let ns = m.null_space();
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(m.mul_vec(&v).unwrap().iter().all(C::is_zero));
        }
    }
}
