//! Grassmann algebras Λℝⁿ over Gaussian rationals, their homomorphisms, linear maps, and
//! the matrix-unit decomposition of admissible linear maps into hom combinations.
//!
//! Generators are 1-based in text and in the public constructors; a basis monomial
//! η_I is stored as a bitmask with bit `i-1` set for each `i ∈ I`, factors ascending.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::C;

/// Upper bound on generator count so that subsets fit in a `u32` mask.
pub const MAX_GENERATORS: usize = 16;

/// Subset of generators as a bitmask.
pub type Subset = u32;

pub fn subset(indices: &[usize]) -> Subset {
    indices.iter().fold(0, |m, &i| m | (1 << (i - 1)))
}

/// Ascending 1-based indices of a subset.
pub fn indices(s: Subset) -> Vec<usize> {
    (0..32).filter(|b| s >> b & 1 == 1).map(|b| b + 1).collect()
}

pub fn size(s: Subset) -> usize {
    s.count_ones() as usize
}

pub fn full(n: usize) -> Subset {
    if n == 0 {
        0
    } else {
        u32::MAX >> (32 - n)
    }
}

/// `(-1)^{#(i∈a, j∈b, i>j)}`, the sign of reordering η_a η_b to ascending order.
pub fn merge_sign(a: Subset, b: Subset) -> i32 {
    let mut inv = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inv += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if inv.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `(-1)^{k(k-1)/2}`, the reversal sign of a product of `k` odd factors.
pub fn reversal_sign(k: usize) -> i32 {
    if (k * k.saturating_sub(1) / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub(crate) fn signed(c: &C, s: i32) -> C {
    if s < 0 {
        -c
    } else {
        c.clone()
    }
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_GENERATORS {
        Err(Error::TooManyGenerators(n))
    } else {
        Ok(())
    }
}

/// Element of Λℝⁿ: sparse map from basis subsets to nonzero coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GrassmannElement {
    n: usize,
    coeffs: BTreeMap<Subset, C>,
}

impl GrassmannElement {
    pub fn zero(n: usize) -> Self {
        Self { n, coeffs: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, C::one())
    }

    pub fn scalar(n: usize, c: C) -> Self {
        Self::basis_scaled(n, 0, c)
    }

    /// η_i with 1-based `i`.
    pub fn generator(n: usize, i: usize) -> Self {
        Self::basis(n, 1 << (i - 1))
    }

    pub fn basis(n: usize, s: Subset) -> Self {
        Self::basis_scaled(n, s, C::one())
    }

    pub fn basis_scaled(n: usize, s: Subset, c: C) -> Self {
        debug_assert!(s & !full(n) == 0, "subset outside generator range");
        let mut e = Self::zero(n);
        e.add_term(s, c);
        e
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Subset, C)>) -> Result<Self> {
        check_n(n)?;
        let mut e = Self::zero(n);
        for (s, c) in terms {
            if s & !full(n) != 0 {
                return Err(Error::Dimension(format!("subset {:?} outside 1..={n}", indices(s))));
            }
            e.add_term(s, c);
        }
        Ok(e)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, s: Subset) -> C {
        self.coeffs.get(&s).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Subset, &C)> {
        self.coeffs.iter().map(|(s, c)| (*s, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, s: Subset, c: C) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(s).or_default();
        *slot += &c;
        if slot.is_zero() {
            self.coeffs.remove(&s);
        }
    }

    /// `Some(0)` or `Some(1)` when all terms share a parity; `None` if mixed. Zero is even.
    pub fn parity(&self) -> Option<u8> {
        let mut it = self.coeffs.keys().map(|s| (s.count_ones() % 2) as u8);
        let first = it.next().unwrap_or(0);
        it.all(|p| p == first).then_some(first)
    }

    pub fn is_odd(&self) -> bool {
        self.is_zero() || self.parity() == Some(1)
    }

    /// Same element viewed in Λℝᵐ, `m ≥ n`.
    pub fn widen(&self, m: usize) -> Self {
        assert!(m >= self.n);
        Self { n: m, coeffs: self.coeffs.clone() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        out.n = self.n.max(o.n);
        for (s, c) in o.terms() {
            out.add_term(s, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&C::from_int(-1)))
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        Self { n: self.n, coeffs: self.coeffs.iter().map(|(s, x)| (*s, x * c)).collect() }
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        if self.n != o.n {
            return Err(Error::Dimension(format!("generator counts {} and {}", self.n, o.n)));
        }
        Ok(self.mul(o))
    }

    /// Product; generator counts are unified to the larger one.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.n.max(o.n));
        for (a, x) in self.terms() {
            for (b, y) in o.terms() {
                if a & b != 0 {
                    continue;
                }
                out.add_term(a | b, signed(&(x * y), merge_sign(a, b)));
            }
        }
        out
    }

    /// Antilinear involution with η_J* = (−1)^{|J|(|J|−1)/2} η_J.
    pub fn star(&self) -> Self {
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|(s, c)| (*s, signed(&c.conj(), reversal_sign(size(*s))))).collect(),
        }
    }

    /// Coordinates in the basis ordered by subset mask.
    pub fn to_dense(&self) -> Vec<C> {
        (0..1u32 << self.n).map(|s| self.coeff(s)).collect()
    }

    pub fn from_dense(n: usize, v: &[C]) -> Self {
        let mut e = Self::zero(n);
        for (s, c) in v.iter().enumerate() {
            e.add_term(s as Subset, c.clone());
        }
        e
    }
}

impl fmt::Display for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(s, c)| {
                let idx: Vec<String> = indices(s).iter().map(usize::to_string).collect();
                format!("{c} * n[{}]", idx.join(","))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Λ{}[{}]", self.n, self)
    }
}

/// Parses `"3/2 * n[1,3] + -1i * n[]"` over `n` generators.
pub fn parse_element(n: usize, s: &str) -> Result<GrassmannElement> {
    check_n(n)?;
    let mut e = GrassmannElement::zero(n);
    let s = s.trim();
    if s == "0" {
        return Ok(e);
    }
    for term in s.split(" + ") {
        let (coeff, mono) = match term.split_once('*') {
            Some((c, m)) => (c.trim().parse::<C>()?, m.trim()),
            None => (C::one(), term.trim()),
        };
        let inner = mono
            .strip_prefix("n[")
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("bad monomial {mono:?}")))?;
        let mut idx = Vec::new();
        for t in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let i: usize = t.parse().map_err(|_| Error::Parse(format!("bad index {t:?}")))?;
            if i == 0 || i > n {
                return Err(Error::Parse(format!("index {i} outside 1..={n}")));
            }
            idx.push(i);
        }
        // Non-ascending input is reordered with its permutation sign.
        let mut acc = GrassmannElement::scalar(n, coeff);
        for i in idx {
            acc = acc.mul(&GrassmannElement::generator(n, i));
        }
        e = e.add(&acc);
    }
    Ok(e)
}

impl FromStr for GrassmannElement {
    type Err = Error;

    /// Infers the generator count from the largest index present.
    fn from_str(s: &str) -> Result<Self> {
        let max = s
            .match_indices("n[")
            .filter_map(|(k, _)| {
                let rest = &s[k + 2..];
                let end = rest.find(']')?;
                rest[..end].split(',').filter_map(|t| t.trim().parse::<usize>().ok()).max()
            })
            .max()
            .unwrap_or(0);
        parse_element(max, s)
    }
}

/// Unital homomorphism Λℝⁿ → Λℝᵐ given by odd generator images.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GrassmannHom {
    source: usize,
    target: usize,
    images: Vec<GrassmannElement>,
}

impl GrassmannHom {
    pub fn new(source: usize, target: usize, images: Vec<GrassmannElement>) -> Result<Self> {
        check_n(source)?;
        check_n(target)?;
        if images.len() != source {
            return Err(Error::Dimension(format!("{} images for {source} generators", images.len())));
        }
        for (k, im) in images.iter().enumerate() {
            if im.n() != target {
                return Err(Error::Dimension(format!("image of η{} lives in Λ{}", k + 1, im.n())));
            }
            if !im.is_odd() {
                return Err(Error::Parity(format!("image of η{} is not odd: {im}", k + 1)));
            }
        }
        Ok(Self { source, target, images })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, n, (1..=n).map(|i| GrassmannElement::generator(n, i)).collect()).unwrap()
    }

    /// P_K: keeps generators in `k`, kills the rest.
    pub fn projection(n: usize, k: Subset) -> Self {
        let images = (1..=n)
            .map(|i| {
                if k >> (i - 1) & 1 == 1 {
                    GrassmannElement::generator(n, i)
                } else {
                    GrassmannElement::zero(n)
                }
            })
            .collect();
        Self::new(n, n, images).unwrap()
    }

    /// χ_λ: η_i ↦ λ_i η_i.
    pub fn scaling(lambda: &[C]) -> Self {
        let n = lambda.len();
        let images = lambda
            .iter()
            .enumerate()
            .map(|(k, l)| GrassmannElement::generator(n, k + 1).scale(l))
            .collect();
        Self::new(n, n, images).unwrap()
    }

    /// η_i ↦ η_{perm[i-1]} with 1-based targets.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n + 1];
        for &p in perm {
            if p == 0 || p > n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Invalid(format!("not a permutation: {perm:?}")));
            }
        }
        Self::new(n, n, perm.iter().map(|&p| GrassmannElement::generator(n, p)).collect())
    }

    /// Λℝ^{|J|} → Λℝᴺ with η_i ↦ η_{j_i} (J ascending).
    pub fn block_embedding(big_n: usize, j: Subset) -> Self {
        let js = indices(j);
        Self::new(js.len(), big_n, js.iter().map(|&x| GrassmannElement::generator(big_n, x)).collect()).unwrap()
    }

    /// Λℝⁿ → Λℝ^{|J|} with η_{j_i} ↦ η_i and every other generator ↦ 0.
    pub fn block_restriction(n: usize, j: Subset) -> Self {
        let js = indices(j);
        let m = js.len();
        let images = (1..=n)
            .map(|i| match js.iter().position(|&x| x == i) {
                Some(p) => GrassmannElement::generator(m, p + 1),
                None => GrassmannElement::zero(m),
            })
            .collect();
        Self::new(n, m, images).unwrap()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn images(&self) -> &[GrassmannElement] {
        &self.images
    }

    /// Image of the basis monomial η_s.
    pub fn apply_basis(&self, s: Subset) -> GrassmannElement {
        let mut acc = GrassmannElement::one(self.target);
        for i in indices(s) {
            acc = acc.mul(&self.images[i - 1]);
            if acc.is_zero() {
                break;
            }
        }
        acc
    }

    pub fn apply(&self, a: &GrassmannElement) -> Result<GrassmannElement> {
        if a.n() != self.source {
            return Err(Error::Dimension(format!("hom from Λ{} applied to Λ{}", self.source, a.n())));
        }
        let mut out = GrassmannElement::zero(self.target);
        for (s, c) in a.terms() {
            out = out.add(&self.apply_basis(s).scale(c));
        }
        Ok(out)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &GrassmannHom) -> Result<GrassmannHom> {
        if inner.target != self.source {
            return Err(Error::Dimension("composition of incompatible homs".into()));
        }
        let images = inner.images.iter().map(|im| self.apply(im)).collect::<Result<_>>()?;
        GrassmannHom::new(inner.source, self.target, images)
    }

    pub fn to_linear_map(&self) -> GrassmannLinearMap {
        GrassmannLinearMap {
            source: self.source,
            target: self.target,
            columns: (0..1u32 << self.source).map(|s| self.apply_basis(s)).collect(),
        }
    }
}

/// Linear map Λℝⁿ → Λℝᵐ stored by the images χ(η_I) = Σ_J c_{IJ} θ_J.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GrassmannLinearMap {
    source: usize,
    target: usize,
    columns: Vec<GrassmannElement>,
}

impl GrassmannLinearMap {
    pub fn zero(source: usize, target: usize) -> Self {
        Self { source, target, columns: vec![GrassmannElement::zero(target); 1 << source] }
    }

    /// Builds from `(I, J, c_{IJ})` triples.
    pub fn from_table(source: usize, target: usize, entries: impl IntoIterator<Item = (Subset, Subset, C)>) -> Result<Self> {
        check_n(source)?;
        check_n(target)?;
        let mut m = Self::zero(source, target);
        for (i, j, c) in entries {
            if i & !full(source) != 0 || j & !full(target) != 0 {
                return Err(Error::Dimension("table entry outside generator range".into()));
            }
            m.columns[i as usize].add_term(j, c);
        }
        Ok(m)
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn coeff(&self, i: Subset, j: Subset) -> C {
        self.columns[i as usize].coeff(j)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Subset, Subset, &C)> {
        self.columns.iter().enumerate().flat_map(|(i, col)| col.terms().map(move |(j, c)| (i as Subset, j, c)))
    }

    pub fn apply_basis(&self, s: Subset) -> &GrassmannElement {
        &self.columns[s as usize]
    }

    pub fn apply(&self, a: &GrassmannElement) -> GrassmannElement {
        let mut out = GrassmannElement::zero(self.target);
        for (s, c) in a.terms() {
            out = out.add(&self.columns[s as usize].scale(c));
        }
        out
    }

    /// First table entry that no hom combination can produce, if any.
    ///
    /// Besides the parity and degree conditions, the unit row is constrained: every
    /// unital hom sends 1 to 1, so c_{∅J} must vanish for J ≠ ∅.
    pub fn admissibility_violation(&self) -> Option<(Subset, Subset, &'static str)> {
        self.entries().find_map(|(i, j, _)| {
            let (a, b) = (size(i), size(j));
            if (a + b) % 2 == 1 {
                Some((i, j, "|I|+|J| is odd"))
            } else if b < a {
                Some((i, j, "|J| < |I|"))
            } else if i == 0 && j != 0 {
                Some((i, j, "unital homs send 1 to a multiple of 1"))
            } else {
                None
            }
        })
    }

    pub fn is_admissible(&self) -> bool {
        self.admissibility_violation().is_none()
    }
}

/// Finite linear combination Σ c_k χ_k of homs with a common source and target.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HomCombination {
    source: usize,
    target: usize,
    terms: Vec<(C, GrassmannHom)>,
}

impl HomCombination {
    pub fn zero(source: usize, target: usize) -> Self {
        Self { source, target, terms: Vec::new() }
    }

    pub fn single(h: GrassmannHom) -> Self {
        Self { source: h.source, target: h.target, terms: vec![(C::one(), h)] }
    }

    pub fn terms(&self) -> &[(C, GrassmannHom)] {
        &self.terms
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn push(&mut self, c: C, h: GrassmannHom) {
        if c.is_zero() {
            return;
        }
        if let Some(k) = self.terms.iter().position(|(_, g)| *g == h) {
            self.terms[k].0 += &c;
            if self.terms[k].0.is_zero() {
                self.terms.remove(k);
            }
        } else {
            self.terms.push((c, h));
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (c, h) in &o.terms {
            out.push(c.clone(), h.clone());
        }
        out
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = Self::zero(self.source, self.target);
        for (c, h) in &self.terms {
            out.push(c * s, h.clone());
        }
        out
    }

    /// `self ∘ inner`, expanded bilinearly.
    pub fn compose(&self, inner: &HomCombination) -> Result<Self> {
        let mut out = Self::zero(inner.source, self.target);
        for (a, f) in &self.terms {
            for (b, g) in &inner.terms {
                out.push(a * b, f.compose(g)?);
            }
        }
        Ok(out)
    }

    pub fn apply(&self, a: &GrassmannElement) -> Result<GrassmannElement> {
        let mut out = GrassmannElement::zero(self.target);
        for (c, h) in &self.terms {
            out = out.add(&h.apply(a)?.scale(c));
        }
        Ok(out)
    }

    pub fn to_linear_map(&self) -> GrassmannLinearMap {
        let columns = (0..1u32 << self.source)
            .map(|s| {
                let mut col = GrassmannElement::zero(self.target);
                for (c, h) in &self.terms {
                    col = col.add(&h.apply_basis(s).scale(c));
                }
                col
            })
            .collect();
        GrassmannLinearMap { source: self.source, target: self.target, columns }
    }
}

/// E_I = P_I ∏_{i∈I}(id − P_{I∖{i}}) on Λℝⁿ, projecting onto multiples of η_I.
pub fn projector_combination(n: usize, i: Subset) -> HomCombination {
    let mut acc = HomCombination::single(GrassmannHom::projection(n, i));
    for k in indices(i) {
        let mut factor = HomCombination::single(GrassmannHom::identity(n));
        factor.push(C::from_int(-1), GrassmannHom::projection(n, i & !(1 << (k - 1))));
        acc = acc.compose(&factor).expect("same algebra");
    }
    acc
}

/// χ^{JI}: η_{i_k} ↦ θ_{J_k} with J cut into ascending blocks, the first of size
/// |J|−|I|+1 and the others singletons; generators outside I go to 0.
pub fn block_hom(m: usize, n: usize, j: Subset, i: Subset) -> Result<GrassmannHom> {
    let is = indices(i);
    let js = indices(j);
    if is.is_empty() || js.len() < is.len() || (is.len() + js.len()) % 2 == 1 {
        return Err(Error::Inadmissible(format!("no odd block partition of J={js:?} for I={is:?}")));
    }
    let first = js.len() - is.len() + 1;
    let mut blocks = vec![subset(&js[..first])];
    blocks.extend(js[first..].iter().map(|&x| subset(&[x])));
    let mut images = vec![GrassmannElement::zero(m); n];
    for (k, &ik) in is.iter().enumerate() {
        images[ik - 1] = GrassmannElement::basis(m, blocks[k]);
    }
    GrassmannHom::new(n, m, images)
}

/// Matrix unit E^{mn}_{JI} (η_{I'} ↦ δ_{II'} θ_J) and a hom combination realizing it.
pub fn matrix_unit(m: usize, n: usize, j: Subset, i: Subset) -> Result<(GrassmannLinearMap, HomCombination)> {
    check_n(m)?;
    check_n(n)?;
    if i & !full(n) != 0 || j & !full(m) != 0 {
        return Err(Error::Dimension("subset outside generator range".into()));
    }
    let (a, b) = (size(i), size(j));
    if (a + b) % 2 == 1 {
        return Err(Error::Inadmissible(format!("|I|+|J| = {} is odd", a + b)));
    }
    if b < a {
        return Err(Error::Inadmissible(format!("|J| = {b} < |I| = {a}")));
    }
    let combo = if i == 0 {
        if j != 0 {
            return Err(Error::Inadmissible("I = ∅ with J ≠ ∅: unital homs fix 1".into()));
        }
        // E_{∅∅}: P_∅ viewed as a map into Λℝᵐ.
        let h = GrassmannHom::new(n, m, vec![GrassmannElement::zero(m); n])?;
        HomCombination::single(h)
    } else {
        HomCombination::single(block_hom(m, n, j, i)?).compose(&projector_combination(n, i))?
    };
    let map = GrassmannLinearMap::from_table(n, m, [(i, j, C::one())])?;
    Ok((map, combo))
}

/// Writes an admissible linear map as Σ c_{IJ} E_{JI} expanded into homs.
pub fn decompose_linear_map(l: &GrassmannLinearMap) -> Result<HomCombination> {
    if let Some((i, j, why)) = l.admissibility_violation() {
        return Err(Error::Inadmissible(format!(
            "c_IJ = {} at I={:?}, J={:?}: {why}",
            l.coeff(i, j),
            indices(i),
            indices(j)
        )));
    }
    let mut out = HomCombination::zero(l.source, l.target);
    for (i, j, c) in l.entries() {
        let (_, combo) = matrix_unit(l.target, l.source, j, i)?;
        out = out.add(&combo.scale(c));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, s: &str) -> GrassmannElement {
        parse_element(n, s).unwrap()
    }

    #[test]
    fn product_signs() {
        let g = |i| GrassmannElement::generator(3, i);
        assert!(g(1).mul(&g(1)).is_zero());
        assert_eq!(g(2).mul(&g(1)), e(3, "-1 * n[1,2]"));
        assert_eq!(e(3, "n[1,3]").mul(&g(2)), e(3, "-1 * n[1,2,3]"));
        assert!(g(1).try_mul(&GrassmannElement::generator(2, 1)).is_err());
    }

    #[test]
    fn involution_signs() {
        assert_eq!(e(3, "n[1]").star(), e(3, "n[1]"));
        assert_eq!(e(3, "n[1,2]").star(), e(3, "-1 * n[1,2]"));
        assert_eq!(e(3, "n[1,2,3]").star(), e(3, "-1 * n[1,2,3]"));
        assert_eq!(e(3, "1i * n[]").star(), e(3, "-1i * n[]"));
    }

    #[test]
    fn text_round_trip() {
        let x = e(3, "3/2 * n[1,3] + -1i * n[]");
        assert_eq!(x.to_string(), "-1i * n[] + 3/2 * n[1,3]");
        assert_eq!(e(3, &x.to_string()), x);
        assert_eq!("3/2 * n[1,3]".parse::<GrassmannElement>().unwrap().n(), 3);
        assert_eq!(e(2, "n[2,1]"), e(2, "-1 * n[1,2]"));
        assert!(parse_element(2, "n[3]").is_err());
    }

    #[test]
    fn hom_examples() {
        let theta = e(3, "n[1,2,3]");
        let chi = GrassmannHom::new(1, 3, vec![theta.clone()]).unwrap();
        assert_eq!(chi.apply(&e(1, "n[1]")).unwrap(), theta);
        let lam = [C::from_int(2), C::from_int(3), C::frac(1, 5)];
        let s = GrassmannHom::scaling(&lam);
        assert_eq!(s.apply(&e(3, "n[1,3]")).unwrap(), e(3, "2/5 * n[1,3]"));
        assert!(GrassmannHom::new(1, 2, vec![e(2, "n[1,2]")]).is_err());
    }

    #[test]
    fn matrix_unit_examples() {
        let (_, c) = matrix_unit(2, 2, 0, 0).unwrap();
        let l = c.to_linear_map();
        assert_eq!(l.apply_basis(0), &GrassmannElement::one(2));
        for s in 1..4 {
            assert!(l.apply_basis(s).is_zero());
        }
        let (_, c) = matrix_unit(2, 2, 0b11, 0b11).unwrap();
        let l = c.to_linear_map();
        for s in 0..4 {
            let want = if s == 3 { GrassmannElement::basis(2, 3) } else { GrassmannElement::zero(2) };
            assert_eq!(l.apply_basis(s), &want);
        }
        let (_, c) = matrix_unit(3, 1, 0b111, 0b1).unwrap();
        let l = c.to_linear_map();
        assert!(l.apply_basis(0).is_zero());
        assert_eq!(l.apply_basis(1), &e(3, "n[1,2,3]"));
        assert!(matrix_unit(2, 2, 0b1, 0).is_err());
        assert!(matrix_unit(2, 2, 0b11, 0).is_err());
        assert!(matrix_unit(2, 2, 0b1, 0b11).is_err());
    }

    #[test]
    fn identity_decomposes() {
        let id = GrassmannHom::identity(3).to_linear_map();
        let combo = decompose_linear_map(&id).unwrap();
        assert_eq!(combo.to_linear_map(), id);
    }

    #[test]
    fn odd_entry_rejected() {
        let l = GrassmannLinearMap::from_table(1, 1, [(0b1, 0, C::one())]).unwrap();
        let err = decompose_linear_map(&l).unwrap_err();
        assert!(err.to_string().contains("odd"), "{err}");
    }
}
