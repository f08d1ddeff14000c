//! Fermionic functionals on a finite configuration space: linear forms on ΛV stored as
//! antisymmetric coefficients on ascending index tuples.
//!
//! A basis vector of V is labelled by `(point, component)` with flat index
//! `point * rank + component`; an ascending tuple of flat indices is a bitmask.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{merge_sign, signed, size, GrassmannElement, GrassmannHom, Subset, MAX_GENERATORS};
use crate::scalar::{vec, C};
use crate::verdict::Verdict;

/// Largest supported `dim V`; ΛV elements are represented as Grassmann elements.
pub const MAX_DIMENSION: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfigurationSpace {
    pub points: usize,
    pub rank: usize,
}

impl ConfigurationSpace {
    pub fn new(points: usize, rank: usize) -> Result<Self> {
        let d = points * rank;
        if d == 0 || d > MAX_DIMENSION {
            return Err(Error::Dimension(format!("configuration space dimension {d} outside 1..={MAX_DIMENSION}")));
        }
        Ok(Self { points, rank })
    }

    pub fn dim(&self) -> usize {
        self.points * self.rank
    }

    pub fn index(&self, point: usize, component: usize) -> usize {
        point * self.rank + component
    }

    pub fn label(&self, idx: usize) -> (usize, usize) {
        (idx / self.rank, idx % self.rank)
    }

    /// Points where some component of `v` is nonzero.
    pub fn support(&self, v: &[C]) -> Vec<usize> {
        (0..self.points).filter(|&x| (0..self.rank).any(|c| !v[self.index(x, c)].is_zero())).collect()
    }

    fn check_vec(&self, v: &[C]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::Dimension(format!("vector of length {} on a space of dimension {}", v.len(), self.dim())));
        }
        Ok(())
    }

    /// `v₁ ∧ … ∧ v_k` in ΛV, with η_{b+1} standing for basis vector `b`.
    pub fn wedge(&self, vs: &[Vec<C>]) -> Result<GrassmannElement> {
        let d = self.dim();
        let mut acc = GrassmannElement::one(d);
        for v in vs {
            self.check_vec(v)?;
            acc = acc.mul(&self.as_odd(v));
        }
        Ok(acc)
    }

    fn as_odd(&self, v: &[C]) -> GrassmannElement {
        let mut e = GrassmannElement::zero(self.dim());
        for (b, c) in v.iter().enumerate() {
            e.add_term(1 << b, c.clone());
        }
        e
    }
}

/// Values a functional can take: scalars, or elements of a parameter Grassmann algebra.
pub trait FunctionalValue: Clone + PartialEq + fmt::Debug + fmt::Display {
    fn is_zero(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn scaled(&self, c: &C) -> Self;
    fn to_grassmann(&self) -> GrassmannElement;
}

impl FunctionalValue for C {
    fn is_zero(&self) -> bool {
        C::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn scaled(&self, c: &C) -> Self {
        self * c
    }
    fn to_grassmann(&self) -> GrassmannElement {
        GrassmannElement::scalar(0, self.clone())
    }
}

impl FunctionalValue for GrassmannElement {
    fn is_zero(&self) -> bool {
        GrassmannElement::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn scaled(&self, c: &C) -> Self {
        self.scale(c)
    }
    fn to_grassmann(&self) -> GrassmannElement {
        self.clone()
    }
}

/// `F = (F_n)_{n ≤ N}`; `entries[S]` is `F_{|S|}(e_{s₁}, …, e_{s_k})` for ascending `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional<V: FunctionalValue> {
    space: ConfigurationSpace,
    max_degree: usize,
    entries: BTreeMap<Subset, V>,
    zero: V,
}

pub type FermionicFunctional = Functional<C>;
/// Functional with values in a Grassmann algebra, as produced by [`Functional::shift`].
pub type ShiftedFunctional = Functional<GrassmannElement>;

impl<V: FunctionalValue> Functional<V> {
    pub fn zero_with(space: ConfigurationSpace, max_degree: usize, zero: V) -> Self {
        Self { space, max_degree, entries: BTreeMap::new(), zero }
    }

    pub fn space(&self) -> ConfigurationSpace {
        self.space
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn zero_value(&self) -> &V {
        &self.zero
    }

    pub fn entries(&self) -> impl Iterator<Item = (Subset, &V)> {
        self.entries.iter().map(|(s, v)| (*s, v))
    }

    /// Value on the ascending basis tuple `s`.
    pub fn entry(&self, s: Subset) -> V {
        self.entries.get(&s).cloned().unwrap_or_else(|| self.zero.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    fn add_entry(&mut self, s: Subset, v: V) {
        if size(s) > self.max_degree || v.is_zero() {
            return;
        }
        let next = match self.entries.remove(&s) {
            Some(old) => old.plus(&v),
            None => v,
        };
        if !next.is_zero() {
            self.entries.insert(s, next);
        }
    }

    /// Sets `F(e_{idx₀} ∧ …)`, reordering `idx` to ascending with its sign.
    pub fn set(&mut self, idx: &[usize], value: V) -> Result<()> {
        let s = self.tuple(idx)?;
        let sign = permutation_sign(idx);
        self.entries.remove(&s);
        self.add_entry(s, value.scaled(&C::from_int(sign as i64)));
        Ok(())
    }

    fn tuple(&self, idx: &[usize]) -> Result<Subset> {
        let mut s: Subset = 0;
        for &i in idx {
            if i >= self.space.dim() {
                return Err(Error::Dimension(format!("basis index {i} outside 0..{}", self.space.dim())));
            }
            if s >> i & 1 == 1 {
                return Err(Error::Invalid(format!("repeated basis index {i}")));
            }
            s |= 1 << i;
        }
        if idx.len() > self.max_degree {
            return Err(Error::Invalid(format!("degree {} exceeds the maximal degree {}", idx.len(), self.max_degree)));
        }
        Ok(s)
    }

    /// The part of degree `n`.
    pub fn component(&self, n: usize) -> Self {
        let mut out = Self::zero_with(self.space, self.max_degree, self.zero.clone());
        for (s, v) in self.entries() {
            if size(s) == n {
                out.entries.insert(s, v.clone());
            }
        }
        out
    }

    /// `F(ω)` for ω ∈ ΛV; degrees above N contribute 0.
    pub fn apply(&self, omega: &GrassmannElement) -> V {
        let mut acc = self.zero.clone();
        for (s, c) in omega.terms() {
            if let Some(v) = self.entries.get(&s) {
                acc = acc.plus(&v.scaled(c));
            }
        }
        acc
    }

    /// `F_k(v₁, …, v_k)`.
    pub fn evaluate(&self, vs: &[Vec<C>]) -> Result<V> {
        if vs.len() > self.max_degree {
            return Ok(self.zero.clone());
        }
        Ok(self.apply(&self.space.wedge(vs)?))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_space(o)?;
        let mut out = self.clone();
        out.max_degree = self.max_degree.max(o.max_degree);
        for (s, v) in o.entries() {
            out.add_entry(s, v.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero_with(self.space, self.max_degree, self.zero.clone());
        for (s, v) in self.entries() {
            out.add_entry(s, v.scaled(c));
        }
        out
    }

    fn same_space(&self, o: &Self) -> Result<()> {
        if self.space != o.space {
            return Err(Error::Dimension(format!("configuration spaces {:?} and {:?}", self.space, o.space)));
        }
        Ok(())
    }

    /// `(F·G)_n = Σ_σ sign σ Σ_k F_k G_{n−k} / (k!(n−k)!)`, which on ascending tuples is the
    /// signed sum over splittings `S = A ⊔ B` of `F(e_A) G(e_B)`. Values multiply as `F·G`.
    pub fn pointwise_product(&self, g: &Self) -> Result<Self> {
        self.same_space(g)?;
        let mut out = Self::zero_with(self.space, self.max_degree + g.max_degree, self.zero.clone());
        for (a, x) in self.entries() {
            for (b, y) in g.entries() {
                if a & b != 0 {
                    continue;
                }
                let v = x.times(y);
                out.add_entry(a | b, v.scaled(&C::from_int(merge_sign(a, b) as i64)));
            }
        }
        Ok(out)
    }

    /// Points `x` such that some entry with a first-slot basis vector at `x` is nonzero.
    pub fn support(&self) -> Vec<usize> {
        let mut pts = vec![false; self.space.points];
        for (s, _) in self.entries() {
            for b in 0..self.space.dim() {
                if s >> b & 1 == 1 {
                    pts[self.space.label(b).0] = true;
                }
            }
        }
        (0..self.space.points).filter(|&x| pts[x]).collect()
    }

    /// `⟨h⃗, F⁽¹⁾(h)⟩ = F(h⃗ ∧ h)` with `h = h₁ ∧ … ∧ h_k`.
    pub fn left_derivative(&self, dir: &[C], at: &[Vec<C>]) -> Result<V> {
        let mut args = vec![dir.to_vec()];
        args.extend(at.iter().cloned());
        self.evaluate(&args)
    }

    /// `F(h ∧ h⃗)`.
    pub fn right_derivative(&self, dir: &[C], at: &[Vec<C>]) -> Result<V> {
        let mut args = at.to_vec();
        args.push(dir.to_vec());
        self.evaluate(&args)
    }

    /// Coordinates of `F⁽¹⁾(h)`: component `b` is `F(e_b ∧ h)`.
    pub fn derivative_vector(&self, at: &[Vec<C>]) -> Result<Vec<V>> {
        (0..self.space.dim()).map(|b| self.left_derivative(&vec::unit(self.space.dim(), b), at)).collect()
    }

    /// The functional `h ↦ F(h⃗ ∧ h)`.
    pub fn left_derivative_functional(&self, dir: &[C]) -> Result<Self> {
        self.derivative_functional(dir, true)
    }

    /// The functional `h ↦ F(h ∧ h⃗)`.
    pub fn right_derivative_functional(&self, dir: &[C]) -> Result<Self> {
        self.derivative_functional(dir, false)
    }

    fn derivative_functional(&self, dir: &[C], left: bool) -> Result<Self> {
        self.space.check_vec(dir)?;
        let mut out = Self::zero_with(self.space, self.max_degree.saturating_sub(1), self.zero.clone());
        for (s, v) in self.entries() {
            for b in 0..self.space.dim() {
                if s >> b & 1 == 0 || dir[b].is_zero() {
                    continue;
                }
                let rest = s & !(1 << b);
                let sign = if left { merge_sign(1 << b, rest) } else { merge_sign(rest, 1 << b) };
                out.add_entry(rest, v.scaled(&signed(&dir[b], sign)));
            }
        }
        Ok(out)
    }

    /// `F_G(exp Σ vⁱηᵢ) = Σ_n Σ_{i₁<…<i_n} F_n(v^{i₁}, …, v^{i_n}) η_{i_n}⋯η_{i₁}`.
    pub fn extend_and_evaluate(&self, vs: &[Vec<C>], etas: &[GrassmannElement]) -> Result<GrassmannElement> {
        if vs.len() != etas.len() {
            return Err(Error::Dimension(format!("{} vectors and {} parameters", vs.len(), etas.len())));
        }
        for (i, e) in etas.iter().enumerate() {
            if !e.is_odd() {
                return Err(Error::Parity(format!("parameter {} is not odd: {e}", i + 1)));
            }
        }
        let m = etas.iter().map(GrassmannElement::n).chain([self.zero.to_grassmann().n()]).max().unwrap_or(0);
        let mut acc = GrassmannElement::zero(m);
        let k = vs.len();
        for pick in 0..1u32 << k {
            if size(pick) > self.max_degree {
                continue;
            }
            let chosen: Vec<usize> = (0..k).filter(|i| pick >> i & 1 == 1).collect();
            let args: Vec<Vec<C>> = chosen.iter().map(|&i| vs[i].clone()).collect();
            let value = self.evaluate(&args)?.to_grassmann();
            if value.is_zero() {
                continue;
            }
            let mut prod = GrassmannElement::one(m);
            for &i in chosen.iter().rev() {
                prod = prod.mul(&etas[i]);
            }
            acc = acc.add(&value.mul(&prod));
        }
        Ok(acc)
    }

    /// `F^w_n(v) = Σ_k Σ_{j₁<…<j_k} F_{k+n}(v, w^{j₁}, …, w^{j_k}) θ_{j_k}⋯θ_{j₁}`.
    pub fn shift(&self, ws: &[Vec<C>], thetas: &[GrassmannElement]) -> Result<ShiftedFunctional> {
        if ws.len() != thetas.len() {
            return Err(Error::Dimension(format!("{} shift vectors and {} parameters", ws.len(), thetas.len())));
        }
        for (j, t) in thetas.iter().enumerate() {
            if !t.is_odd() {
                return Err(Error::Parity(format!("shift parameter {} is not odd: {t}", j + 1)));
            }
        }
        let m = thetas.iter().map(GrassmannElement::n).chain([self.zero.to_grassmann().n()]).max().unwrap_or(0);
        if m > MAX_GENERATORS {
            return Err(Error::TooManyGenerators(m));
        }
        let mut out = ShiftedFunctional::zero_with(self.space, self.max_degree, GrassmannElement::zero(m));
        let k = ws.len();
        for pick in 0..1u32 << k {
            let chosen: Vec<usize> = (0..k).filter(|j| pick >> j & 1 == 1).collect();
            if chosen.len() > self.max_degree {
                continue;
            }
            let w_args: Vec<Vec<C>> = chosen.iter().map(|&j| ws[j].clone()).collect();
            let omega = self.space.wedge(&w_args)?;
            let mut theta = GrassmannElement::one(m);
            for &j in chosen.iter().rev() {
                theta = theta.mul(&thetas[j]);
            }
            // F(e_S ∧ ω) = Σ_U sign(S,U) F(e_{S∪U}) ω_U.
            for (s, v) in self.entries() {
                let vg = v.to_grassmann();
                for (u, c) in omega.terms() {
                    if u & !s != 0 {
                        continue;
                    }
                    let rest = s & !u;
                    let val = vg.scale(&signed(c, merge_sign(rest, u))).mul(&theta);
                    out.add_entry(rest, val);
                }
            }
        }
        Ok(out)
    }
}

impl FermionicFunctional {
    pub fn zero(space: ConfigurationSpace, max_degree: usize) -> Self {
        Self::zero_with(space, max_degree, C::zero())
    }

    pub fn constant(space: ConfigurationSpace, c: C) -> Self {
        let mut f = Self::zero(space, 0);
        f.add_entry(0, c);
        f
    }

    /// Degree-`n` component from a full coefficient tensor; rejects tensors that are not
    /// exactly antisymmetric.
    pub fn from_tensor(space: ConfigurationSpace, n: usize, tensor: impl Fn(&[usize]) -> C) -> Result<Self> {
        let d = space.dim();
        let mut f = Self::zero(space, n);
        let mut idx = vec![0usize; n];
        loop {
            let t = tensor(&idx);
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            let repeated = sorted.windows(2).any(|w| w[0] == w[1]);
            if repeated {
                if !t.is_zero() {
                    return Err(Error::Invalid(format!("tensor entry {idx:?} with a repeated index is {t}")));
                }
            } else {
                let want = signed(&tensor(&sorted), permutation_sign(&idx));
                if t != want {
                    return Err(Error::Invalid(format!("tensor is not antisymmetric at {idx:?}: {t} vs {want}")));
                }
                if idx == sorted {
                    f.add_entry(sorted.iter().fold(0, |m, &i| m | 1 << i), t);
                }
            }
            let mut p = 0;
            loop {
                if p == n {
                    return Ok(f);
                }
                idx[p] += 1;
                if idx[p] < d {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
        }
    }

    /// Verifies `F(v+w+z) = F(v+w) − F(v) + F(v+z)` for disjointly supported `w`, `z`:
    /// exhaustively over basis-vector slot assignments when `3^N · #tuples` is small, and on
    /// `trials` random integer tuples.
    pub fn additivity_check(&self, trials: usize, rng: &mut impl Rng) -> Result<Verdict> {
        let mut v = Verdict::new();
        let d = self.space.dim();
        let mut cases: Vec<(Vec<Vec<C>>, Vec<Vec<C>>, Vec<Vec<C>>)> = Vec::new();
        let budget = 200_000usize;
        let mut count = 0usize;
        for n in 1..=self.max_degree.min(d) {
            count += binomial(d, n) * 3usize.pow(n as u32);
        }
        if count <= budget {
            for s in 1..1u32 << d {
                let n = size(s);
                if n > self.max_degree {
                    continue;
                }
                let basis: Vec<usize> = (0..d).filter(|b| s >> b & 1 == 1).collect();
                for code in 0..3usize.pow(n as u32) {
                    let mut c = code;
                    let mut tri = (Vec::new(), Vec::new(), Vec::new());
                    for &b in &basis {
                        let e = vec::unit(d, b);
                        let z = vec::zeros(d);
                        match c % 3 {
                            0 => (tri.0.push(e), tri.1.push(z.clone()), tri.2.push(z)),
                            1 => (tri.0.push(z.clone()), tri.1.push(e), tri.2.push(z)),
                            _ => (tri.0.push(z.clone()), tri.1.push(z), tri.2.push(e)),
                        };
                        c /= 3;
                    }
                    if disjoint(&self.space, &tri.1, &tri.2) {
                        cases.push(tri);
                    }
                }
            }
        }
        for _ in 0..trials {
            let n = rng.gen_range(1..=self.max_degree.max(1));
            let in_w: Vec<bool> = (0..self.space.points).map(|_| rng.gen_bool(0.5)).collect();
            let mut rand_vec = |mask: Option<bool>| -> Vec<C> {
                (0..d)
                    .map(|b| {
                        let x = self.space.label(b).0;
                        if mask.is_some_and(|w| in_w[x] != w) {
                            C::zero()
                        } else {
                            C::from_int(rng.gen_range(-2..=2))
                        }
                    })
                    .collect()
            };
            let vs: Vec<Vec<C>> = (0..n).map(|_| rand_vec(None)).collect();
            let ws: Vec<Vec<C>> = (0..n).map(|_| rand_vec(Some(true))).collect();
            let zs: Vec<Vec<C>> = (0..n).map(|_| rand_vec(Some(false))).collect();
            cases.push((vs, ws, zs));
        }
        for (vs, ws, zs) in cases {
            let sum = |a: &[Vec<C>], b: &[Vec<C>]| -> Vec<Vec<C>> { a.iter().zip(b).map(|(x, y)| vec::add(x, y)).collect() };
            let vw = sum(&vs, &ws);
            let vwz = sum(&vw, &zs);
            let vz = sum(&vs, &zs);
            let lhs = self.evaluate(&vwz)?;
            let rhs = self.evaluate(&vw)? - self.evaluate(&vs)? + self.evaluate(&vz)?;
            v.check("additive", lhs == rhs, || {
                let show = |xs: &[Vec<C>]| xs.iter().map(|x| vec::show(x)).collect::<Vec<_>>().join(", ");
                format!("v=({}), w=({}), z=({}): {lhs} vs {rhs}", show(&vs), show(&ws), show(&zs))
            });
        }
        Ok(v)
    }

    pub fn to_descriptor(&self) -> FunctionalDescriptor {
        let mut comps: BTreeMap<usize, Vec<(Vec<usize>, C)>> = BTreeMap::new();
        for (s, c) in self.entries() {
            let idx: Vec<usize> = (0..self.space.dim()).filter(|b| s >> b & 1 == 1).collect();
            comps.entry(idx.len()).or_default().push((idx, c.clone()));
        }
        FunctionalDescriptor {
            space: SpaceDescriptor { points: self.space.points, rank: self.space.rank },
            components: comps.into_iter().map(|(degree, entries)| ComponentDescriptor { degree, entries }).collect(),
        }
    }

    pub fn from_descriptor(desc: &FunctionalDescriptor) -> Result<Self> {
        let space = ConfigurationSpace::new(desc.space.points, desc.space.rank)?;
        let max_degree = desc.components.iter().map(|c| c.degree).max().unwrap_or(0);
        let mut f = Self::zero(space, max_degree);
        for comp in &desc.components {
            for (idx, c) in &comp.entries {
                if idx.len() != comp.degree {
                    return Err(Error::Parse(format!("entry {idx:?} listed under degree {}", comp.degree)));
                }
                if idx.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Parse(format!("entry {idx:?} is not a strictly ascending tuple")));
                }
                f.set(idx, c.clone())?;
            }
        }
        Ok(f)
    }
}

impl ShiftedFunctional {
    /// Applies a parameter homomorphism to every value.
    pub fn map_values(&self, chi: &GrassmannHom) -> Result<Self> {
        let mut out = Self::zero_with(self.space, self.max_degree, GrassmannElement::zero(chi.target()));
        for (s, v) in self.entries() {
            out.add_entry(s, chi.apply(v)?);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    pub points: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentDescriptor {
    pub degree: usize,
    pub entries: Vec<(Vec<usize>, C)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalDescriptor {
    pub space: SpaceDescriptor,
    pub components: Vec<ComponentDescriptor>,
}

impl<V: FunctionalValue> fmt::Display for Functional<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .entries()
            .map(|(s, v)| {
                let idx: Vec<String> = (0..self.space.dim()).filter(|b| s >> b & 1 == 1).map(|b| b.to_string()).collect();
                format!("({v})*F[{}]", idx.join(","))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn disjoint(space: &ConfigurationSpace, ws: &[Vec<C>], zs: &[Vec<C>]) -> bool {
    let pts = |xs: &[Vec<C>]| {
        let mut m = vec![false; space.points];
        for x in xs {
            for p in space.support(x) {
                m[p] = true;
            }
        }
        m
    };
    let (a, b) = (pts(ws), pts(zs));
    a.iter().zip(&b).all(|(x, y)| !(x & y))
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Sign of the permutation sorting `idx` (entries assumed distinct).
fn permutation_sign(idx: &[usize]) -> i32 {
    let mut inv = 0;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            if idx[i] > idx[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `(F·G) = (−1)^{pq} (G·F)` for pure degrees `p`, `q`.
pub fn graded_commutation_sign(p: usize, q: usize) -> i32 {
    if (p * q).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(points: usize, rank: usize) -> ConfigurationSpace {
        ConfigurationSpace::new(points, rank).unwrap()
    }

    fn ints(xs: &[i64]) -> Vec<C> {
        xs.iter().map(|&x| C::from_int(x)).collect()
    }

    fn antisymmetric_matrix(sp: ConfigurationSpace, a: &[[i64; 3]; 3]) -> FermionicFunctional {
        FermionicFunctional::from_tensor(sp, 2, |ij| C::from_int(a[ij[0]][ij[1]])).unwrap()
    }

    #[test]
    fn degree_two_evaluation() {
        let sp = space(1, 3);
        let a = [[0, 2, -1], [-2, 0, 3], [1, -3, 0]];
        let f = antisymmetric_matrix(sp, &a);
        let h1 = ints(&[1, 2, 0]);
        let h2 = ints(&[0, 1, 5]);
        let mut want = C::zero();
        for i in 0..3 {
            for j in 0..3 {
                want += &(&(&C::from_int(a[i][j]) * &h1[i]) * &h2[j]);
            }
        }
        assert_eq!(f.evaluate(&[h1.clone(), h2.clone()]).unwrap(), want);
        assert_eq!(f.evaluate(&[h2.clone(), h1.clone()]).unwrap(), -&want);
        assert!(f.evaluate(&[h1.clone(), h1.clone()]).unwrap().is_zero());
        assert!(f.evaluate(&[h1.clone(), h2.clone(), h1]).unwrap().is_zero());
        assert!(FermionicFunctional::from_tensor(sp, 2, |ij| C::from_int(ij[0] as i64)).is_err());
    }

    #[test]
    fn derivative_of_antisymmetric_form() {
        let sp = space(1, 3);
        let a = [[0, 2, -1], [-2, 0, 3], [1, -3, 0]];
        let f = antisymmetric_matrix(sp, &a);
        let dir = ints(&[1, -1, 2]);
        let h = ints(&[3, 0, 1]);
        let mut want = C::zero();
        for i in 0..3 {
            for j in i + 1..3 {
                let t = &(&dir[i] * &h[j]) - &(&dir[j] * &h[i]);
                want += &(&C::from_int(a[i][j]) * &t);
            }
        }
        assert_eq!(f.left_derivative(&dir, std::slice::from_ref(&h)).unwrap(), want);
        assert_eq!(f.right_derivative(&dir, std::slice::from_ref(&h)).unwrap(), -&want);
        let df = f.left_derivative_functional(&dir).unwrap();
        assert_eq!(df.evaluate(&[h]).unwrap(), want);
        let c = FermionicFunctional::constant(sp, C::from_int(4));
        assert!(c.left_derivative_functional(&dir).unwrap().is_zero());
    }

    #[test]
    fn product_of_degree_one() {
        let sp = space(2, 1);
        let mut f = FermionicFunctional::zero(sp, 1);
        f.set(&[0], C::from_int(2)).unwrap();
        f.set(&[1], C::from_int(1)).unwrap();
        let mut g = FermionicFunctional::zero(sp, 1);
        g.set(&[1], C::from_int(3)).unwrap();
        let fg = f.pointwise_product(&g).unwrap();
        let (v, w) = (ints(&[1, 2]), ints(&[-1, 1]));
        let fv = f.evaluate(std::slice::from_ref(&v)).unwrap();
        let fw = f.evaluate(std::slice::from_ref(&w)).unwrap();
        let gv = g.evaluate(std::slice::from_ref(&v)).unwrap();
        let gw = g.evaluate(std::slice::from_ref(&w)).unwrap();
        assert_eq!(fg.evaluate(&[v, w]).unwrap(), &(&fv * &gw) - &(&fw * &gv));
        let one = FermionicFunctional::constant(sp, C::one());
        assert_eq!(one.pointwise_product(&f).unwrap().component(1), f);
    }

    #[test]
    fn support_and_additivity() {
        let sp = space(3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let zero = FermionicFunctional::zero(sp, 2);
        assert!(zero.support().is_empty());
        assert!(zero.additivity_check(10, &mut rng).unwrap().passed());
        let mut bilocal = FermionicFunctional::zero(sp, 2);
        bilocal.set(&[0, 1], C::one()).unwrap();
        assert_eq!(bilocal.support(), vec![0, 1]);
        let v = bilocal.additivity_check(10, &mut rng).unwrap();
        assert!(!v.passed());
        let sp2 = space(3, 2);
        let mut local = FermionicFunctional::zero(sp2, 2);
        for x in 0..3 {
            local.set(&[sp2.index(x, 0), sp2.index(x, 1)], C::from_int(x as i64 + 1)).unwrap();
            local.set(&[sp2.index(x, 1)], C::one()).unwrap();
        }
        let v = local.additivity_check(20, &mut rng).unwrap();
        assert!(v.passed(), "{:?}", v.first_failure());
    }

    #[test]
    fn grassmann_extension_examples() {
        let sp = space(2, 1);
        let mut f2 = FermionicFunctional::zero(sp, 2);
        f2.set(&[0, 1], C::from_int(5)).unwrap();
        let (v1, v2) = (ints(&[1, 1]), ints(&[2, -1]));
        let etas = [GrassmannElement::generator(2, 1), GrassmannElement::generator(2, 2)];
        let got = f2.extend_and_evaluate(&[v1.clone(), v2.clone()], &etas).unwrap();
        let want = etas[1].mul(&etas[0]).scale(&f2.evaluate(&[v1.clone(), v2]).unwrap());
        assert_eq!(got, want);
        let c = FermionicFunctional::constant(sp, C::from_int(3));
        assert_eq!(c.extend_and_evaluate(&[], &[]).unwrap(), GrassmannElement::scalar(0, C::from_int(3)));
        let even = GrassmannElement::one(1);
        assert!(matches!(f2.extend_and_evaluate(&[v1], &[even]), Err(Error::Parity(_))));
    }

    #[test]
    fn shift_examples() {
        let sp = space(2, 1);
        let mut f1 = FermionicFunctional::zero(sp, 1);
        f1.set(&[0], C::from_int(2)).unwrap();
        f1.set(&[1], C::from_int(-1)).unwrap();
        let w = ints(&[3, 1]);
        let theta = GrassmannElement::generator(1, 1);
        let s = f1.shift(std::slice::from_ref(&w), std::slice::from_ref(&theta)).unwrap();
        assert_eq!(s.entry(0), theta.scale(&f1.evaluate(std::slice::from_ref(&w)).unwrap()));
        let mut f2 = FermionicFunctional::zero(sp, 2);
        f2.set(&[0, 1], C::one()).unwrap();
        let s2 = f2.shift(std::slice::from_ref(&w), std::slice::from_ref(&theta)).unwrap();
        let v = ints(&[1, 4]);
        assert_eq!(s2.evaluate(std::slice::from_ref(&v)).unwrap(), theta.scale(&f2.evaluate(&[v, w]).unwrap()));
        let none = f2.shift(&[], &[]).unwrap();
        assert_eq!(none.entry(3), GrassmannElement::scalar(0, C::one()));
    }

    #[test]
    fn descriptor_round_trip() {
        let sp = space(2, 2);
        let mut f = FermionicFunctional::zero(sp, 2);
        f.set(&[], C::frac(1, 2)).unwrap();
        f.set(&[3, 1], C::i()).unwrap();
        let json = serde_json::to_string(&f.to_descriptor()).unwrap();
        let back = FermionicFunctional::from_descriptor(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, f);
        assert_eq!(f.entry(0b1010), -C::i());
    }
}
