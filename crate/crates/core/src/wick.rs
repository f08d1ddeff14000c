//! Fermionic Wick calculus on a finite causal Dirac model.
//!
//! Field symbols `ψ_a`, `ψ̄_a` are indexed by the source basis: `ψ_a` evaluates a
//! configuration `h` to `(Πh)_a` and `ψ̄_a` to its conjugate, so `ψ(s) = Σ conj(s_a) ψ_a`
//! evaluates to `⟨s, h⟩`. Elements are polynomials in the exterior algebra generated by
//! Grassmann parameters (ordered first) and field symbols, with coefficients polynomial in a
//! formal `ħ` and a formal coupling `λ` truncated at a fixed order.
//!
//! The star product is the Koszul exponential of the contraction operator
//! `Θ = Σ P⁺_{xy} ∂^r_{ψ_x} ⊗ ∂_{ψ̄_y} + Σ P⁻_{vu} ∂^r_{ψ̄_u} ⊗ ∂_{ψ_v}`, nested so that the
//! k-th power pairs the k-th right derivative of the left factor with the k-th left
//! derivative of the right factor. The time-ordered product `⋆F` replaces `P⁺` by `P^F` and
//! `P⁻` by `−P^F`.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use crate::car::{CarAlgebra, CarElement, CarMonomial, CausalDiracModel, QuantizedDirac, SmearedSection};
use crate::grassmann::{merge_sign, signed, Subset};
use crate::scalar::{vec as cvec, ExactMatrix, C, Q};
use crate::verdict::Verdict;
use crate::{Error, Result};

/// Field symbols use `2d` bits of a `u64`.
pub const MAX_SOURCE_DIM: usize = 32;
pub const DEFAULT_ORDER: u32 = 2;
const SERIES_LIMIT: usize = 256;

fn mm(a: &ExactMatrix, b: &ExactMatrix) -> ExactMatrix {
    a.try_mul(b).expect("shapes checked by construction")
}

fn bits64(x: u64) -> impl Iterator<Item = u32> {
    (0..64).filter(move |b| x >> b & 1 == 1)
}

fn parity(n: u32) -> i32 {
    if n.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Sign of sorting the concatenation `a·b` of two disjoint ascending bit sets.
fn merge_sign64(a: u64, b: u64) -> i32 {
    let mut inversions = 0;
    for j in bits64(b) {
        inversions += (a >> j >> 1).count_ones();
    }
    parity(inversions)
}

/// Sign of the left derivative by the letter at `bit`.
fn left_sign(f: u64, bit: u32) -> i32 {
    parity((f & ((1u64 << bit) - 1)).count_ones())
}

/// Sign of the right derivative by the letter at `bit`.
fn right_sign(f: u64, bit: u32) -> i32 {
    parity((f >> bit >> 1).count_ones())
}

/// `η_params ∧ (field letters)`, both blocks ascending.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WickMonomial {
    pub params: Subset,
    pub fields: u64,
}

impl WickMonomial {
    pub const ONE: Self = Self { params: 0, fields: 0 };

    pub fn degree(&self) -> u32 {
        self.params.count_ones() + self.fields.count_ones()
    }
}

/// A monomial together with its powers of `ħ` and `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WickKey {
    pub mono: WickMonomial,
    pub hbar: u32,
    pub lambda: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WickElement {
    dim: usize,
    terms: BTreeMap<WickKey, C>,
}

impl WickElement {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: C) -> Self {
        let mut e = Self::zero(dim);
        e.add_term(WickKey { mono: WickMonomial::ONE, hbar: 0, lambda: 0 }, c);
        e
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, C::one())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&WickKey, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: &WickKey) -> C {
        self.terms.get(k).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, k: WickKey, c: C) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(k).or_default();
        *slot += &c;
        if slot.is_zero() {
            self.terms.remove(&k);
        }
    }

    fn same_dim(&self, o: &Self) -> Result<()> {
        if self.dim != o.dim {
            return Err(Error::Dimension(format!("Wick elements over {} and {} symbols", self.dim, o.dim)));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (k, c) in &o.terms {
            r.add_term(*k, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-C::one()))
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut r = Self::zero(self.dim);
        for (k, c) in &self.terms {
            r.add_term(*k, c * s);
        }
        r
    }

    /// Multiplies by `ħ^k`.
    pub fn times_hbar(&self, k: u32) -> Self {
        let terms = self.terms.iter().map(|(key, c)| (WickKey { hbar: key.hbar + k, ..*key }, c.clone())).collect();
        Self { dim: self.dim, terms }
    }

    /// Multiplies by `λ^k` without truncating.
    pub fn times_lambda(&self, k: u32) -> Self {
        let terms = self.terms.iter().map(|(key, c)| (WickKey { lambda: key.lambda + k, ..*key }, c.clone())).collect();
        Self { dim: self.dim, terms }
    }

    /// Substitutes a number for `ħ`.
    pub fn at_hbar(&self, value: &C) -> Self {
        let mut r = Self::zero(self.dim);
        for (k, c) in &self.terms {
            r.add_term(WickKey { hbar: 0, ..*k }, c * &value.pow(k.hbar));
        }
        r
    }

    /// The `ħ⁰` part.
    pub fn classical(&self) -> Self {
        self.at_hbar(&C::zero())
    }

    /// Coefficient of `λ^k`.
    pub fn lambda_coefficient(&self, k: u32) -> Self {
        let mut r = Self::zero(self.dim);
        for (key, c) in &self.terms {
            if key.lambda == k {
                r.add_term(WickKey { lambda: 0, ..*key }, c.clone());
            }
        }
        r
    }

    pub fn max_lambda(&self) -> u32 {
        self.terms.keys().map(|k| k.lambda).max().unwrap_or(0)
    }

    /// `d/dλ`.
    pub fn lambda_derivative(&self) -> Self {
        let mut r = Self::zero(self.dim);
        for (k, c) in &self.terms {
            if k.lambda > 0 {
                r.add_term(WickKey { lambda: k.lambda - 1, ..*k }, c * &C::from_int(k.lambda.into()));
            }
        }
        r
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|k| k.mono.degree() % 2 == 0)
    }

    pub fn parameters(&self) -> Subset {
        self.terms.keys().fold(0, |m, k| m | k.mono.params)
    }

    /// Source indices carrying a field symbol.
    pub fn field_support(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for k in self.terms.keys() {
            for b in bits64(k.mono.fields) {
                out.insert(b as usize % self.dim);
            }
        }
        out
    }

    /// Coefficient of the trailing even parameter pair `η_{i} η_{j}` (`i < j`, both above every
    /// other parameter present), with the pair removed.
    pub fn pair_coefficient(&self, i: usize, j: usize) -> Self {
        let pair: Subset = (1 << (i - 1)) | (1 << (j - 1));
        let mut r = Self::zero(self.dim);
        for (k, c) in &self.terms {
            if k.mono.params & pair == pair {
                let mono = WickMonomial { params: k.mono.params & !pair, ..k.mono };
                r.add_term(WickKey { mono, ..*k }, c.clone());
            }
        }
        r
    }

    fn display_term(&self, k: &WickKey, c: &C, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.dim as u32;
        write!(f, "{c}")?;
        if k.hbar > 0 {
            write!(f, " * hbar^{}", k.hbar)?;
        }
        if k.lambda > 0 {
            write!(f, " * lambda^{}", k.lambda)?;
        }
        let list = |it: Vec<u32>| it.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        if k.mono.params != 0 {
            write!(f, " * n[{}]", list((0..32).filter(|b| k.mono.params >> b & 1 == 1).map(|b| b + 1).collect()))?;
        }
        let bar: Vec<u32> = bits64(k.mono.fields).filter(|&b| b < d).collect();
        let plain: Vec<u32> = bits64(k.mono.fields).filter(|&b| b >= d).map(|b| b - d).collect();
        if !bar.is_empty() {
            write!(f, " * psibar[{}]", list(bar))?;
        }
        if !plain.is_empty() {
            write!(f, " * psi[{}]", list(plain))?;
        }
        Ok(())
    }

    /// Parses the textual form over `dim` symbols; letters inside a factor may come in any
    /// order and are sorted with their permutation sign.
    pub fn parse(dim: usize, s: &str) -> Result<Self> {
        if dim > MAX_SOURCE_DIM {
            return Err(Error::Dimension(format!("{dim} symbols exceed {MAX_SOURCE_DIM}")));
        }
        let mut out = Self::zero(dim);
        let s = s.trim();
        if s == "0" {
            return Ok(out);
        }
        for term in s.split(" + ") {
            let mut factors = term.split('*').map(str::trim);
            let coeff: C = factors.next().unwrap_or("").parse()?;
            let (mut hbar, mut lambda) = (0, 0);
            let mut letters: Vec<(bool, u32)> = Vec::new();
            for fac in factors {
                let idx = |prefix: &str| -> Result<Option<Vec<u32>>> {
                    let Some(inner) = fac.strip_prefix(prefix).and_then(|r| r.strip_suffix(']')) else {
                        return Ok(None);
                    };
                    inner
                        .split(',')
                        .map(str::trim)
                        .filter(|t| !t.is_empty())
                        .map(|t| t.parse::<u32>().map_err(|_| Error::Parse(format!("bad index `{t}` in `{term}`"))))
                        .collect::<Result<Vec<_>>>()
                        .map(Some)
                };
                if let Some(p) = fac.strip_prefix("hbar^") {
                    hbar = p.parse().map_err(|_| Error::Parse(format!("bad ħ power in `{term}`")))?;
                } else if let Some(p) = fac.strip_prefix("lambda^") {
                    lambda = p.parse().map_err(|_| Error::Parse(format!("bad λ power in `{term}`")))?;
                } else if let Some(v) = idx("n[")? {
                    for i in v {
                        if i == 0 || i > 32 {
                            return Err(Error::Parse(format!("parameter index {i} outside 1..=32")));
                        }
                        letters.push((true, i - 1));
                    }
                } else if let Some(v) = idx("psibar[")? {
                    for a in v {
                        letters.push((false, a));
                    }
                } else if let Some(v) = idx("psi[")? {
                    for a in v {
                        letters.push((false, a + dim as u32));
                    }
                } else {
                    return Err(Error::Parse(format!("unknown factor `{fac}` in `{term}`")));
                }
            }
            for &(param, b) in &letters {
                if !param && b as usize >= 2 * dim {
                    return Err(Error::Parse(format!("symbol index outside 0..{dim} in `{term}`")));
                }
            }
            let mut acc = WickElement::constant(dim, coeff).times_hbar(hbar).times_lambda(lambda);
            for (param, b) in letters {
                let mono = if param {
                    WickMonomial { params: 1 << b, fields: 0 }
                } else {
                    WickMonomial { params: 0, fields: 1 << b }
                };
                let mut letter = WickElement::zero(dim);
                letter.add_term(WickKey { mono, hbar: 0, lambda: 0 }, C::one());
                acc = wedge_raw(&acc, &letter, u32::MAX);
            }
            out = out.add(&acc);
        }
        Ok(out)
    }
}

impl fmt::Display for WickElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            self.display_term(k, c, f)?;
        }
        Ok(())
    }
}

impl FromStr for WickElement {
    type Err = Error;

    /// Infers the symbol count from the largest `psi`/`psibar` index present.
    fn from_str(s: &str) -> Result<Self> {
        let mut max = 0;
        for prefix in ["psibar[", "psi["] {
            for (k, _) in s.match_indices(prefix) {
                let rest = &s[k + prefix.len()..];
                if let Some(end) = rest.find(']') {
                    if let Some(m) = rest[..end].split(',').filter_map(|t| t.trim().parse::<usize>().ok()).max() {
                        max = max.max(m + 1);
                    }
                }
            }
        }
        Self::parse(max, s)
    }
}

fn mono_wedge(a: &WickMonomial, b: &WickMonomial) -> Option<(WickMonomial, i32)> {
    if a.params & b.params != 0 || a.fields & b.fields != 0 {
        return None;
    }
    let s = merge_sign(a.params, b.params)
        * parity(b.params.count_ones() * a.fields.count_ones())
        * merge_sign64(a.fields, b.fields);
    Some((WickMonomial { params: a.params | b.params, fields: a.fields | b.fields }, s))
}

fn wedge_raw(a: &WickElement, b: &WickElement, cap: u32) -> WickElement {
    let mut out = WickElement::zero(a.dim);
    for (ka, ca) in &a.terms {
        for (kb, cb) in &b.terms {
            let lambda = ka.lambda + kb.lambda;
            if lambda > cap {
                continue;
            }
            if let Some((mono, s)) = mono_wedge(&ka.mono, &kb.mono) {
                out.add_term(WickKey { mono, hbar: ka.hbar + kb.hbar, lambda }, signed(&(ca * cb), s));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Product {
    Wedge,
    Star,
    StarF,
}

/// `S⁺`, `S⁻`, `S^F` (fields × sources) and their pairings `P = Π·S` (sources × sources).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropagatorPack {
    pub s_plus: ExactMatrix,
    pub s_minus: ExactMatrix,
    pub s_feynman: ExactMatrix,
    pub p_plus: ExactMatrix,
    pub p_minus: ExactMatrix,
    pub p_feynman: ExactMatrix,
}

/// Inverse of the pairing restricted to fields off the first slice, embedded as a
/// fields × sources matrix; `Π·R = 1` and `R·Π·h = h` whenever `h` vanishes on the first slice.
pub fn pairing_section(m: &CausalDiracModel) -> Result<ExactMatrix> {
    let lo = m.field_points.iter().map(|p| p.tau).min().unwrap_or(0);
    let cols: Vec<usize> = (0..m.field_dim()).filter(|&a| m.field_points[m.field_point(a)].tau > lo).collect();
    if cols.len() != m.source_dim() {
        return Err(Error::Dimension(format!(
            "{} fields off the first slice but {} source components",
            cols.len(),
            m.source_dim()
        )));
    }
    let sub = ExactMatrix::from_fn(m.source_dim(), cols.len(), |i, j| m.pairing.get(i, cols[j]).clone());
    let inv = sub.inverse()?;
    let mut r = ExactMatrix::zeros(m.field_dim(), m.source_dim());
    for (j, &a) in cols.iter().enumerate() {
        for b in 0..m.source_dim() {
            r.set(a, b, inv.get(j, b).clone());
        }
    }
    Ok(r)
}

impl PropagatorPack {
    pub fn from_model(m: &CausalDiracModel) -> Result<Self> {
        let kernel = m.retarded.try_sub(&m.advanced)?;
        let s_minus = m.s_minus.clone();
        let s_plus = kernel.scale(&C::i()).try_sub(&s_minus)?;
        let s_feynman = m.retarded.scale(&C::i()).try_sub(&s_minus)?;
        Ok(Self {
            p_plus: mm(&m.pairing, &s_plus),
            p_minus: mm(&m.pairing, &s_minus),
            p_feynman: mm(&m.pairing, &s_feynman),
            s_plus,
            s_minus,
            s_feynman,
        })
    }

    /// `S^F + c·R` with `R` the section of the pairing, so `P^F` moves by `c·1`. Breaks
    /// `D·S^F = i`; used as a negative control.
    pub fn mutate_feynman(&self, m: &CausalDiracModel, c: &C) -> Result<Self> {
        let r = pairing_section(m)?;
        let s_feynman = self.s_feynman.try_add(&r.scale(c))?;
        Ok(Self { p_feynman: mm(&m.pairing, &s_feynman), s_feynman, ..self.clone() })
    }

    pub fn validate(&self, m: &CausalDiracModel) -> Verdict {
        let mut v = Verdict::new();
        let ds = m.source_dim();
        for (op, s, want) in [
            ("dirac_s_plus", &self.s_plus, ExactMatrix::zeros(ds, ds)),
            ("dirac_s_minus", &self.s_minus, ExactMatrix::zeros(ds, ds)),
            ("dirac_s_feynman", &self.s_feynman, ExactMatrix::identity(ds).scale(&C::i())),
        ] {
            let got = m.dirac.try_mul(s);
            v.check(op, got.as_ref().map(|g| *g == want).unwrap_or(false), || match got {
                Ok(g) => format!("D·S = {:?}", g.to_rows()),
                Err(e) => e.to_string(),
            });
        }
        let kernel = m.retarded.try_sub(&m.advanced).expect("validated shapes");
        let sum = self.s_plus.try_add(&self.s_minus).map(|s| s.scale(&-C::i()));
        v.check("kernel_split", sum.as_ref().map(|s| *s == kernel).unwrap_or(false), || "−i(S⁺ + S⁻) ≠ S".into());
        v
    }
}

type Contraction = Rc<Vec<(u64, u32, C)>>;

/// A shift `h⃗ = Σ_i h^i θ_i` by fields `h^i` with odd parameters `θ_i` (1-based indices).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shift {
    pub terms: Vec<(usize, Vec<C>)>,
}

impl Shift {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn new(terms: Vec<(usize, Vec<C>)>) -> Self {
        Self { terms }
    }

    pub fn parameters(&self) -> Subset {
        self.terms.iter().fold(0, |m, (i, _)| m | 1 << (i - 1))
    }
}

/// Wick calculus bound to one model, one propagator pack and a λ-order cap.
pub struct WickAlgebra<'m> {
    model: &'m CausalDiracModel,
    pack: PropagatorPack,
    d: usize,
    order: u32,
    section: ExactMatrix,
    memo: RefCell<HashMap<(Product, u64, u64), Contraction>>,
}

impl<'m> WickAlgebra<'m> {
    pub fn new(model: &'m CausalDiracModel, pack: PropagatorPack, order: u32) -> Result<Self> {
        let d = model.source_dim();
        if d > MAX_SOURCE_DIM {
            return Err(Error::Dimension(format!("{d} source components exceed {MAX_SOURCE_DIM}")));
        }
        if pack.p_plus.rows() != d || pack.p_plus.cols() != d {
            return Err(Error::Dimension("propagator pack does not match the model".into()));
        }
        let section = pairing_section(model)?;
        Ok(Self { model, pack, d, order, section, memo: RefCell::new(HashMap::new()) })
    }

    pub fn from_model(model: &'m CausalDiracModel, order: u32) -> Result<Self> {
        Self::new(model, PropagatorPack::from_model(model)?, order)
    }

    pub fn model(&self) -> &CausalDiracModel {
        self.model
    }

    pub fn pack(&self) -> &PropagatorPack {
        &self.pack
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    fn letter(&self, bit: u32) -> WickElement {
        let mut e = WickElement::zero(self.d);
        e.add_term(WickKey { mono: WickMonomial { params: 0, fields: 1 << bit }, hbar: 0, lambda: 0 }, C::one());
        e
    }

    pub fn one(&self) -> WickElement {
        WickElement::one(self.d)
    }

    pub fn zero(&self) -> WickElement {
        WickElement::zero(self.d)
    }

    pub fn constant(&self, c: C) -> WickElement {
        WickElement::constant(self.d, c)
    }

    /// Grassmann parameter `η_i`, 1-based.
    pub fn param(&self, i: usize) -> WickElement {
        let mut e = self.zero();
        e.add_term(WickKey { mono: WickMonomial { params: 1 << (i - 1), fields: 0 }, hbar: 0, lambda: 0 }, C::one());
        e
    }

    pub fn psi(&self, a: usize) -> WickElement {
        self.letter((self.d + a) as u32)
    }

    pub fn psibar(&self, a: usize) -> WickElement {
        self.letter(a as u32)
    }

    /// `ψ(s) = Σ conj(s_a) ψ_a`.
    pub fn psi_of(&self, s: &[C]) -> WickElement {
        let mut e = self.zero();
        for (a, c) in s.iter().enumerate() {
            e = e.add(&self.psi(a).scale(&c.conj()));
        }
        e
    }

    /// `ψ̄(s) = Σ s_a ψ̄_a`.
    pub fn psibar_of(&self, s: &[C]) -> WickElement {
        let mut e = self.zero();
        for (a, c) in s.iter().enumerate() {
            e = e.add(&self.psibar(a).scale(c));
        }
        e
    }

    /// The doubled field `𝔇(s) = ψ(s) − ψ̄(s)`.
    pub fn doubled(&self, s: &[C]) -> WickElement {
        self.psi_of(s).sub(&self.psibar_of(s))
    }

    /// `Σ_i η_i 𝔇(s^i)`.
    pub fn doubled_smeared(&self, f: &SmearedSection) -> WickElement {
        let mut e = self.zero();
        for (eta, s) in &f.terms {
            let mut g = self.zero();
            for (sub, c) in eta.terms() {
                g.add_term(WickKey { mono: WickMonomial { params: sub, fields: 0 }, hbar: 0, lambda: 0 }, c.clone());
            }
            e = e.add(&self.wedge(&g, &self.doubled(s)));
        }
        e
    }

    fn truncate(&self, e: WickElement) -> WickElement {
        if e.terms.keys().all(|k| k.lambda <= self.order) {
            return e;
        }
        let terms = e.terms.into_iter().filter(|(k, _)| k.lambda <= self.order).collect();
        WickElement { dim: e.dim, terms }
    }

    pub fn wedge(&self, a: &WickElement, b: &WickElement) -> WickElement {
        wedge_raw(a, b, self.order)
    }

    fn contract(&self, kind: Product, f1: u64, f2: u64) -> Contraction {
        if let Some(hit) = self.memo.borrow().get(&(kind, f1, f2)) {
            return hit.clone();
        }
        let d = self.d as u32;
        let (plus, minus, minus_sign) = match kind {
            Product::Wedge => unreachable!("wedge has no contractions"),
            Product::Star => (&self.pack.p_plus, &self.pack.p_minus, 1),
            Product::StarF => (&self.pack.p_feynman, &self.pack.p_feynman, -1),
        };
        let mut out: BTreeMap<(u64, u32), C> = BTreeMap::new();
        let mut level: HashMap<(u64, u64), C> = HashMap::from([((f1, f2), C::one())]);
        let mut k = 0u32;
        let mut fact = C::one();
        while !level.is_empty() {
            let inv = fact.inv().expect("nonzero factorial");
            for ((r1, r2), c) in &level {
                if r1 & r2 == 0 {
                    let v = signed(&(c * &inv), merge_sign64(*r1, *r2));
                    *out.entry((r1 | r2, k)).or_default() += &v;
                }
            }
            let mut next: HashMap<(u64, u64), C> = HashMap::new();
            for ((r1, r2), c) in &level {
                for xb in bits64(*r1).filter(|&b| b >= d) {
                    for yb in bits64(*r2).filter(|&b| b < d) {
                        let p = plus.get((xb - d) as usize, yb as usize);
                        if p.is_zero() {
                            continue;
                        }
                        let s = right_sign(*r1, xb) * left_sign(*r2, yb);
                        *next.entry((r1 & !(1 << xb), r2 & !(1 << yb))).or_default() += &signed(&(c * p), s);
                    }
                }
                for ub in bits64(*r1).filter(|&b| b < d) {
                    for vb in bits64(*r2).filter(|&b| b >= d) {
                        let p = minus.get((vb - d) as usize, ub as usize);
                        if p.is_zero() {
                            continue;
                        }
                        let s = right_sign(*r1, ub) * left_sign(*r2, vb) * minus_sign;
                        *next.entry((r1 & !(1 << ub), r2 & !(1 << vb))).or_default() += &signed(&(c * p), s);
                    }
                }
            }
            next.retain(|_, c| !c.is_zero());
            level = next;
            k += 1;
            fact = &fact * &C::from_int(k.into());
        }
        let result: Contraction =
            Rc::new(out.into_iter().filter(|(_, c)| !c.is_zero()).map(|((f, h), c)| (f, h, c)).collect());
        self.memo.borrow_mut().insert((kind, f1, f2), result.clone());
        result
    }

    fn product_raw(&self, kind: Product, a: &WickElement, b: &WickElement) -> WickElement {
        if kind == Product::Wedge {
            return self.wedge(a, b);
        }
        let mut out = self.zero();
        for (ka, ca) in &a.terms {
            for (kb, cb) in &b.terms {
                let lambda = ka.lambda + kb.lambda;
                if lambda > self.order || ka.mono.params & kb.mono.params != 0 {
                    continue;
                }
                let s = merge_sign(ka.mono.params, kb.mono.params)
                    * parity(kb.mono.params.count_ones() * ka.mono.fields.count_ones());
                let c = signed(&(ca * cb), s);
                let params = ka.mono.params | kb.mono.params;
                for (f, h, cc) in self.contract(kind, ka.mono.fields, kb.mono.fields).iter() {
                    let key = WickKey { mono: WickMonomial { params, fields: *f }, hbar: ka.hbar + kb.hbar + h, lambda };
                    out.add_term(key, &c * cc);
                }
            }
        }
        out
    }

    pub fn product(&self, kind: Product, a: &WickElement, b: &WickElement) -> Result<WickElement> {
        a.same_dim(b)?;
        if a.dim != self.d {
            return Err(Error::Dimension(format!("element over {} symbols, algebra over {}", a.dim, self.d)));
        }
        Ok(self.product_raw(kind, a, b))
    }

    pub fn star(&self, a: &WickElement, b: &WickElement) -> Result<WickElement> {
        self.product(Product::Star, a, b)
    }

    pub fn star_f(&self, a: &WickElement, b: &WickElement) -> Result<WickElement> {
        self.product(Product::StarF, a, b)
    }

    /// Power series `Σ a^k/k!` in the chosen product; `a` must be even and nilpotent.
    pub fn exp(&self, a: &WickElement, kind: Product) -> Result<WickElement> {
        if !a.is_even() {
            return Err(Error::Parity("exponent is not even".into()));
        }
        let a = self.truncate(a.clone());
        let scalar_unit = a.terms.keys().any(|k| k.mono == WickMonomial::ONE && k.lambda == 0);
        if scalar_unit {
            return Err(Error::Invalid("exponent has a non-nilpotent scalar part".into()));
        }
        let mut sum = self.one();
        let mut power = self.one();
        for k in 1..=SERIES_LIMIT {
            power = self.product(kind, &power, &a)?.scale(&C::frac(1, k as i64));
            if power.is_zero() {
                return Ok(sum);
            }
            sum = sum.add(&power);
        }
        Err(Error::Invalid("exponential series did not terminate".into()))
    }

    /// Inverse in the star product by a geometric series around the scalar part.
    pub fn star_inverse(&self, s: &WickElement) -> Result<WickElement> {
        let c0 = s.coeff(&WickKey { mono: WickMonomial::ONE, hbar: 0, lambda: 0 });
        let c0_inv = c0.inv().map_err(|_| Error::Invalid("element has no unit scalar part".into()))?;
        let n = s.sub(&self.constant(c0)).scale(&-c0_inv.clone());
        let mut sum = self.one();
        let mut power = self.one();
        for _ in 0..SERIES_LIMIT {
            power = self.star(&power, &n)?;
            if power.is_zero() {
                return Ok(sum.scale(&c0_inv));
            }
            sum = sum.add(&power);
        }
        Err(Error::Invalid("element is not invertible: geometric series did not terminate".into()))
    }

    /// `S(A) = exp_{⋆F}(iA)`.
    pub fn smatrix(&self, a: &WickElement) -> Result<WickElement> {
        self.exp(&a.scale(&C::i()), Product::StarF)
    }

    /// `T(exp(iA) ⊗ H) = S(A) ⋆F H`.
    pub fn time_ordered_with(&self, a: &WickElement, h: &WickElement) -> Result<WickElement> {
        self.star_f(&self.smatrix(a)?, h)
    }

    /// `R(e^A, H) = S(A)^{⋆−1} ⋆ T(exp(iA) ⊗ H)`.
    pub fn retarded_field(&self, a: &WickElement, h: &WickElement) -> Result<WickElement> {
        let s = self.smatrix(a)?;
        self.star(&self.star_inverse(&s)?, &self.star_f(&s, h)?)
    }

    /// `R(e^A, H)` from its definition as `(1/i) d/dλ' S(A)^{⋆−1} ⋆ S(A + λ'H)` at `λ' = 0`,
    /// with `λ' = ζ₁ζ₂` an even nilpotent built from two fresh parameters.
    pub fn retarded_field_by_derivative(&self, a: &WickElement, h: &WickElement) -> Result<WickElement> {
        let used = a.parameters() | h.parameters();
        let top = 32 - used.leading_zeros() as usize;
        if top + 2 > 32 {
            return Err(Error::TooManyGenerators(top + 2));
        }
        let (z1, z2) = (top + 1, top + 2);
        let zeta = self.wedge(&self.param(z1), &self.param(z2));
        let s = self.smatrix(a)?;
        let moved = self.smatrix(&a.add(&self.wedge(&zeta, h)))?;
        let full = self.star(&self.star_inverse(&s)?, &moved)?;
        Ok(full.pair_coefficient(z1, z2).scale(&-C::i()))
    }

    fn shift_images(&self, shift: &Shift) -> (Vec<WickElement>, Vec<WickElement>) {
        let mut dpsi = vec![self.zero(); self.d];
        let mut dbar = vec![self.zero(); self.d];
        for (i, h) in &shift.terms {
            let ph = self.model.pairing.mul_vec(h).expect("field dimension");
            let theta = self.param(*i);
            for a in 0..self.d {
                dpsi[a] = dpsi[a].add(&theta.scale(&ph[a]));
                dbar[a] = dbar[a].add(&theta.scale(&ph[a].conj()));
            }
        }
        (dpsi, dbar)
    }

    /// `F^{λ^k h⃗}`: substitutes `ψ_a → ψ_a + λ^k (Πh⃗)_a`, `ψ̄_a → ψ̄_a + λ^k conj(Πh⃗)_a`.
    pub fn shifted(&self, f: &WickElement, shift: &Shift, lambda_power: u32) -> WickElement {
        let (dpsi, dbar) = self.shift_images(shift);
        let d = self.d as u32;
        let image: Vec<WickElement> = (0..2 * d)
            .map(|b| {
                let delta = if b < d { &dbar[b as usize] } else { &dpsi[(b - d) as usize] };
                self.letter(b).add(&delta.times_lambda(lambda_power))
            })
            .collect();
        let mut out = self.zero();
        for (k, c) in &f.terms {
            let mut head = self.zero();
            head.add_term(WickKey { mono: WickMonomial { params: k.mono.params, fields: 0 }, ..*k }, c.clone());
            for b in bits64(k.mono.fields) {
                head = self.wedge(&head, &image[b as usize]);
            }
            out = out.add(&head);
        }
        out
    }

    /// Left derivative by the symbol at `bit`.
    fn left_derivative(&self, f: &WickElement, bit: u32) -> WickElement {
        let mut out = self.zero();
        for (k, c) in &f.terms {
            if k.mono.fields >> bit & 1 == 1 {
                let s = left_sign(k.mono.fields, bit) * parity(k.mono.params.count_ones());
                let mono = WickMonomial { fields: k.mono.fields & !(1 << bit), ..k.mono };
                out.add_term(WickKey { mono, ..*k }, signed(c, s));
            }
        }
        out
    }

    /// Right derivative by the symbol at `bit`.
    fn right_derivative(&self, f: &WickElement, bit: u32) -> WickElement {
        let mut out = self.zero();
        for (k, c) in &f.terms {
            if k.mono.fields >> bit & 1 == 1 {
                let s = right_sign(k.mono.fields, bit);
                let mono = WickMonomial { fields: k.mono.fields & !(1 << bit), ..k.mono };
                out.add_term(WickKey { mono, ..*k }, signed(c, s));
            }
        }
        out
    }

    /// `(εF)(h⃗) = Σ_a conj(Πh⃗)_a ∂F/∂ψ̄_a + Σ_a ∂^r F/∂ψ_a (Πh⃗)_a`.
    pub fn euler_derivative(&self, f: &WickElement, shift: &Shift) -> WickElement {
        let (dpsi, dbar) = self.shift_images(shift);
        let mut out = self.zero();
        for a in 0..self.d {
            if !dbar[a].is_zero() {
                out = out.add(&self.wedge(&dbar[a], &self.left_derivative(f, a as u32)));
            }
            if !dpsi[a].is_zero() {
                out = out.add(&self.wedge(&self.right_derivative(f, (self.d + a) as u32), &dpsi[a]));
            }
        }
        out
    }

    /// `𝔇_G(Dh⃗) = Σ_i θ_i 𝔇(Dh^i)`.
    pub fn dirac_doubled(&self, shift: &Shift) -> WickElement {
        let mut e = self.zero();
        for (i, h) in &shift.terms {
            e = e.add(&self.wedge(&self.param(*i), &self.doubled(&self.model.apply_dirac(h))));
        }
        e
    }

    /// `⟨h⃗, Dh⃗⟩_G = Σ_{ij} θ_i θ_j ⟨h^i, Dh^j⟩` with `⟨h, s⟩ = conj(s†Πh)`.
    pub fn action_pairing(&self, shift: &Shift) -> WickElement {
        let mut e = self.zero();
        for (i, hi) in &shift.terms {
            for (j, hj) in &shift.terms {
                let z = self.model.pair(&self.model.apply_dirac(hj), hi).conj();
                e = e.add(&self.wedge(&self.param(*i), &self.param(*j)).scale(&z));
            }
        }
        e
    }

    /// `L(f) = Σ M_ab ψ̄_a ψ_b` with `M = R†·f·Π†D·f·R`, `R` the section of the pairing.
    pub fn lagrangian(&self, cutoff: Option<&[Q]>) -> Result<WickElement> {
        let df = self.model.field_dim();
        let weight = match cutoff {
            Some(w) if w.len() != df => {
                return Err(Error::Dimension(format!("cutoff has {} entries, fields have {df}", w.len())))
            }
            Some(w) => w.iter().cloned().map(C::real).collect(),
            None => vec![C::one(); df],
        };
        let f = ExactMatrix::diag(&weight);
        let core = mm(&mm(&f, &mm(&self.model.pairing.adjoint(), &self.model.dirac)), &f);
        let m = mm(&mm(&self.section.adjoint(), &core), &self.section);
        let mut e = self.zero();
        for a in 0..self.d {
            for b in 0..self.d {
                let c = m.get(a, b);
                if !c.is_zero() {
                    e = e.add(&self.wedge(&self.psibar(a), &self.psi(b)).scale(c));
                }
            }
        }
        Ok(e)
    }

    fn check_shift(&self, shift: &Shift, cutoff: Option<&[Q]>) -> Result<()> {
        for (i, h) in &shift.terms {
            if *i == 0 || *i > 32 {
                return Err(Error::Invalid(format!("shift parameter index {i} outside 1..=32")));
            }
            if h.len() != self.model.field_dim() {
                return Err(Error::Dimension(format!("shift field has {} entries", h.len())));
            }
            if !self.model.is_compact(h) {
                return Err(Error::Invalid(format!("shift field θ_{i} is not compactly supported")));
            }
            if let Some(w) = cutoff {
                let pd = self.model.pairing.adjoint().mul_vec(&self.model.apply_dirac(h))?;
                let bad = (0..h.len()).find(|&a| (!h[a].is_zero() || !pd[a].is_zero()) && w[a] != Q::from_integer(1.into()));
                if let Some(a) = bad {
                    return Err(Error::Invalid(format!("cutoff is not 1 at field coordinate {a} in the support of θ_{i}")));
                }
            }
        }
        Ok(())
    }

    /// `δ_{h⃗}L = 𝔇(Dh⃗) + ⟨h⃗, Dh⃗⟩_G`.
    pub fn delta_l(&self, shift: &Shift, cutoff: Option<&[Q]>) -> Result<WickElement> {
        self.check_shift(shift, cutoff)?;
        Ok(self.dirac_doubled(shift).add(&self.action_pairing(shift)))
    }

    /// `L(f)^{h⃗} − L(f)` by substitution.
    pub fn delta_l_by_substitution(&self, shift: &Shift, cutoff: Option<&[Q]>) -> Result<WickElement> {
        self.check_shift(shift, cutoff)?;
        let l = self.lagrangian(cutoff)?;
        Ok(self.shifted(&l, shift, 0).sub(&l))
    }

    /// Maps an element at `ħ = 1` to `Λ ⊗ CAR` with `ψ_a ↦ Ψ(e_a)`, `ψ̄_a ↦ Ψ(e_a)*`, using
    /// `x ∧ R = x ⋆ R − (contractions of x with R)` to rewrite exterior products.
    pub fn to_car(&self, car: &CarAlgebra, e: &WickElement) -> Result<CarElement> {
        if e.max_lambda() > 0 {
            return Err(Error::Invalid("only λ-free elements map to the CAR algebra".into()));
        }
        if car.section_dim() != self.d {
            return Err(Error::Dimension("CAR algebra and Wick algebra use different section spaces".into()));
        }
        let mut memo: HashMap<u64, CarElement> = HashMap::new();
        let mut out = CarElement::zero();
        for (k, c) in &e.terms {
            let fields = self.rho_fields(car, k.mono.fields, &mut memo);
            let eta = CarElement::monomial(CarMonomial { eta: k.mono.params, cre: 0, ann: 0 }, c.clone());
            out = out.add(&car.mul(&eta, &fields));
        }
        Ok(out)
    }

    fn rho_fields(&self, car: &CarAlgebra, f: u64, memo: &mut HashMap<u64, CarElement>) -> CarElement {
        if f == 0 {
            return CarElement::one();
        }
        if let Some(hit) = memo.get(&f) {
            return hit.clone();
        }
        let d = self.d as u32;
        let first = f.trailing_zeros();
        let rest = f & !(1 << first);
        let head = if first < d {
            car.psi_star(&cvec::unit(self.d, first as usize))
        } else {
            car.psi(&cvec::unit(self.d, (first - d) as usize))
        };
        let mut out = car.mul(&head, &self.rho_fields(car, rest, memo));
        for b in bits64(rest) {
            let p = match (first < d, b < d) {
                (false, true) => self.pack.p_plus.get((first - d) as usize, b as usize),
                (true, false) => self.pack.p_minus.get((b - d) as usize, first as usize),
                _ => continue,
            };
            if p.is_zero() {
                continue;
            }
            let sub = self.rho_fields(car, rest & !(1 << b), memo);
            out = out.sub(&sub.scale(&signed(p, left_sign(rest, b))));
        }
        memo.insert(f, out.clone());
        out
    }

    /// Source slice index (0-based) of each symbol position.
    fn slice_of(&self, a: usize) -> i64 {
        self.model.point(self.model.source_point(a)).tau
    }

    pub fn time_range(&self, e: &WickElement) -> Option<(i64, i64)> {
        let taus: Vec<i64> = e.field_support().into_iter().map(|a| self.slice_of(a)).collect();
        Some((*taus.iter().min()?, *taus.iter().max()?))
    }
}

/// Interaction presets on the source points of a lattice model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interaction {
    /// `λ Σ_a ψ̄_a ψ_a`.
    Mass,
    /// `λ Σ_p ψ̄_{p,0} ψ_{p,0} ψ̄_{p,1} ψ_{p,1}` over source points `p`.
    Quartic,
    /// `λ Σ_p (ψ̄_{p,0} ψ_{p,1} + ψ̄_{p,1} ψ_{p,0})`, the γ⁰-current smeared with weight 1.
    Current,
}

impl FromStr for Interaction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mass" => Ok(Self::Mass),
            "quartic" => Ok(Self::Quartic),
            "current" => Ok(Self::Current),
            _ => Err(Error::Parse(format!("unknown interaction `{s}` (expected mass, quartic or current)"))),
        }
    }
}

impl Interaction {
    /// The λ-free density at the given source points (all points when `None`).
    pub fn density(self, w: &WickAlgebra, points: Option<&BTreeSet<usize>>) -> WickElement {
        let m = w.model();
        let r = m.rank;
        let npts = m.source_points.len();
        let mut e = w.zero();
        for p in 0..npts {
            if points.is_some_and(|set| !set.contains(&p)) {
                continue;
            }
            let a = |c: usize| p * r + c;
            let bilinear = |x: usize, y: usize| w.wedge(&w.psibar(x), &w.psi(y));
            let term = match self {
                Self::Mass => (0..r).fold(w.zero(), |acc, c| acc.add(&bilinear(a(c), a(c)))),
                Self::Quartic if r >= 2 => w.wedge(&bilinear(a(0), a(0)), &bilinear(a(1), a(1))),
                Self::Quartic => w.zero(),
                Self::Current if r >= 2 => bilinear(a(0), a(1)).add(&bilinear(a(1), a(0))),
                Self::Current => w.zero(),
            };
            e = e.add(&term);
        }
        e
    }

    /// `λ ×` the density.
    pub fn build(self, w: &WickAlgebra, points: Option<&BTreeSet<usize>>) -> WickElement {
        self.density(w, points).times_lambda(1)
    }
}

fn compare(v: &mut Verdict, op: &str, lhs: &WickElement, rhs: &WickElement) {
    v.check(op, lhs == rhs, || format!("lhs − rhs = {}", lhs.sub(rhs)));
}

/// Compares the parts of λ-degree below `top`.
fn compare_below(v: &mut Verdict, op: &str, lhs: &WickElement, rhs: &WickElement, top: u32) {
    let cut = |e: &WickElement| WickElement {
        dim: e.dim,
        terms: e.terms.iter().filter(|(k, _)| k.lambda < top).map(|(k, c)| (*k, c.clone())).collect(),
    };
    compare(v, op, &cut(lhs), &cut(rhs));
}

fn attempt(v: &mut Verdict, op: &str, f: impl FnOnce(&mut Verdict) -> Result<()>) {
    if let Err(e) = f(v) {
        v.fail(op, e.to_string());
    }
}

/// `exp_{⋆F}(i𝔇(Dh⃗)) = exp_∧(i𝔇(Dh⃗)) · exp(−iħ⟨h⃗, Dh⃗⟩_G)`.
pub fn f1_check(w: &WickAlgebra, shift: &Shift) -> Verdict {
    let mut v = Verdict::new();
    attempt(&mut v, "f1", |v| {
        let dd = w.dirac_doubled(shift).scale(&C::i());
        let lhs = w.exp(&dd, Product::StarF)?;
        let phase = w.exp(&w.action_pairing(shift).scale(&-C::i()).times_hbar(1), Product::Wedge)?;
        let rhs = w.wedge(&w.exp(&dd, Product::Wedge)?, &phase);
        compare(v, "f1", &lhs, &rhs);
        Ok(())
    });
    v
}

/// `S(δ_{h⃗}L) = exp_∧(i𝔇(Dh⃗))` at `ħ = 1`.
pub fn smatrix_delta_l_check(w: &WickAlgebra, shift: &Shift) -> Verdict {
    let mut v = Verdict::new();
    attempt(&mut v, "smatrix_delta_l", |v| {
        let lhs = w.smatrix(&w.delta_l(shift, None)?)?.at_hbar(&C::one());
        let rhs = w.exp(&w.dirac_doubled(shift).scale(&C::i()), Product::Wedge)?;
        compare(v, "smatrix_delta_l", &lhs, &rhs);
        Ok(())
    });
    v
}

/// `F ⋆ 𝔇(Dh⃗) = F ∧ 𝔇(Dh⃗) = 𝔇(Dh⃗) ∧ F = 𝔇(Dh⃗) ⋆ F` for even `F`.
pub fn star_k_check(w: &WickAlgebra, f: &WickElement, shift: &Shift) -> Verdict {
    let mut v = Verdict::new();
    attempt(&mut v, "star_k", |v| {
        if !f.is_even() {
            return Err(Error::Parity("F must be even".into()));
        }
        let k = w.dirac_doubled(shift);
        let a = w.star(f, &k)?;
        let b = w.wedge(f, &k);
        let c = w.wedge(&k, f);
        let d = w.star(&k, f)?;
        compare(v, "star_k", &a, &b);
        compare(v, "star_k", &b, &c);
        compare(v, "star_k", &c, &d);
        Ok(())
    });
    v
}

/// `T(exp(iF) ⊗ 𝔇(Dh⃗)) = S(F) ⋆ 𝔇(Dh⃗) + iħ (εS(F))(h⃗)`.
pub fn schwinger_dyson_check(w: &WickAlgebra, f: &WickElement, shift: &Shift) -> Verdict {
    let mut v = Verdict::new();
    attempt(&mut v, "schwinger_dyson", |v| {
        let k = w.dirac_doubled(shift);
        let s = w.smatrix(f)?;
        let lhs = w.star_f(&s, &k)?;
        let rhs = w.star(&s, &k)?.add(&w.euler_derivative(&s, shift).scale(&C::i()).times_hbar(1));
        compare(v, "schwinger_dyson", &lhs, &rhs);
        Ok(())
    });
    v
}

/// `T(exp(iF) ⊗ (εF)(h⃗)) = −i (εS(F))(h⃗)`.
pub fn field_independence_check(w: &WickAlgebra, f: &WickElement, shift: &Shift) -> Verdict {
    let mut v = Verdict::new();
    attempt(&mut v, "field_independence", |v| {
        let lhs = w.time_ordered_with(f, &w.euler_derivative(f, shift))?;
        let rhs = w.euler_derivative(&w.smatrix(f)?, shift).scale(&-C::i());
        compare(v, "field_independence", &lhs, &rhs);
        Ok(())
    });
    v
}

/// `R(e^F, ħ(εF)(h⃗) + 𝔇(Dh⃗)) = 𝔇(Dh⃗)`, each `λ` order exactly.
pub fn field_equation_check(w: &WickAlgebra, f: &WickElement, shift: &Shift) -> Verdict {
    let mut v = Verdict::new();
    attempt(&mut v, "field_equation", |v| {
        let k = w.dirac_doubled(shift);
        let h = w.euler_derivative(f, shift).times_hbar(1).add(&k);
        let r = w.retarded_field(f, &h)?;
        compare(v, "field_equation", &r, &k);
        Ok(())
    });
    v
}

/// `d/dλ F^{λh⃗} = (εF^{λh⃗})(h⃗)`, `d/dλ δ_{λh⃗}L = 𝔇(Dh⃗) + 2λ⟨h⃗, Dh⃗⟩_G` and
/// `(εδ_{λh⃗}L)(h⃗) = 2λ⟨h⃗, Dh⃗⟩_G`, with λ the formal variable. `F` must be λ-free.
/// Differentiation lowers the λ-degree, so both sides are compared below the truncation order.
pub fn aux_checks(w: &WickAlgebra, f: &WickElement, shift: &Shift) -> Verdict {
    let mut v = Verdict::new();
    attempt(&mut v, "aux", |v| {
        if f.max_lambda() > 0 {
            return Err(Error::Invalid("aux identities take a λ-free functional".into()));
        }
        let moved = w.shifted(f, shift, 1);
        let top = w.order;
        compare_below(v, "aux1_shift", &moved.lambda_derivative(), &w.euler_derivative(&moved, shift), top);
        let l = w.lagrangian(None)?;
        let dl = w.shifted(&l, shift, 1).sub(&l);
        let two_pairing = w.action_pairing(shift).scale(&C::from_int(2)).times_lambda(1);
        let want = w.dirac_doubled(shift).add(&two_pairing);
        compare_below(v, "aux1_lagrangian", &dl.lambda_derivative(), &want, top);
        compare_below(v, "aux2", &w.euler_derivative(&dl, shift), &two_pairing, top);
        Ok(())
    });
    v
}

/// `d/dλ K(λ) = (εK(λ))(h⃗) + 𝔇(Dh⃗)` with `K(λ) = F^{λh⃗} + δ_{λh⃗}L`, checked on every
/// λ-coefficient of the interaction `F` separately (the coupling and the shift share no symbol).
pub fn aux3_check(w: &WickAlgebra, f: &WickElement, shift: &Shift) -> Verdict {
    let mut v = Verdict::new();
    attempt(&mut v, "aux3", |v| {
        let l = w.lagrangian(None)?;
        let dl = w.shifted(&l, shift, 1).sub(&l);
        for order in 0..=f.max_lambda() {
            let fk = f.lambda_coefficient(order);
            let k = w.shifted(&fk, shift, 1).add(&dl);
            let rhs = w.euler_derivative(&k, shift).add(&w.dirac_doubled(shift));
            compare_below(v, "aux3", &k.lambda_derivative(), &rhs, w.order);
        }
        Ok(())
    });
    v
}

/// `S(F^{h⃗} + δ_{h⃗}L) = S(F) ⋆ S(δ_{h⃗}L) = S(δ_{h⃗}L) ⋆ S(F)` at `ħ = 1`.
pub fn dynamics_check(w: &WickAlgebra, f: &WickElement, shift: &Shift) -> Verdict {
    let mut v = Verdict::new();
    attempt(&mut v, "dynamics", |v| {
        let dl = w.delta_l(shift, None)?;
        let one = C::one();
        let lhs = w.smatrix(&w.shifted(f, shift, 0).add(&dl))?.at_hbar(&one);
        let sf = w.smatrix(f)?;
        let sl = w.smatrix(&dl)?;
        compare(v, "dynamics", &lhs, &w.star(&sf, &sl)?.at_hbar(&one));
        compare(v, "dynamics", &lhs, &w.star(&sl, &sf)?.at_hbar(&one));
        Ok(())
    });
    v
}

/// Dynamics together with the Schwinger–Dyson equation, `star-K` and `aux3`.
pub fn dynamics_equivalence_check(w: &WickAlgebra, f: &WickElement, shift: &Shift) -> Verdict {
    let mut v = dynamics_check(w, f, shift);
    v.merge(schwinger_dyson_check(w, f, shift));
    v.merge(star_k_check(w, f, shift));
    v.merge(aux3_check(w, f, shift));
    v
}

/// `R(e^A, H)` through `S^{⋆−1} ⋆ T(e^{iA} ⊗ H)` and through the λ'-derivative agree.
pub fn retarded_field_check(w: &WickAlgebra, a: &WickElement, h: &WickElement) -> Verdict {
    let mut v = Verdict::new();
    attempt(&mut v, "retarded_field", |v| {
        compare(v, "retarded_field", &w.retarded_field(a, h)?, &w.retarded_field_by_derivative(a, h)?);
        Ok(())
    });
    v
}

/// `S(A₁+A₂+A₃) = S(A₁+A₂) ⋆ S(A₂)^{⋆−1} ⋆ S(A₂+A₃)` for `A₁` strictly later than `A₃`.
pub fn causal_factorization_check(w: &WickAlgebra, a1: &WickElement, a2: &WickElement, a3: &WickElement) -> Verdict {
    let mut v = Verdict::new();
    attempt(&mut v, "causal_factorization", |v| {
        if let (Some((lo1, _)), Some((_, hi3))) = (w.time_range(a1), w.time_range(a3)) {
            if lo1 <= hi3 {
                return Err(Error::Invalid(format!(
                    "A₁ starts at half-step {lo1}, not after A₃ which ends at {hi3}"
                )));
            }
        }
        let lhs = w.smatrix(&a1.add(a2).add(a3))?;
        let left = w.smatrix(&a1.add(a2))?;
        let mid = w.star_inverse(&w.smatrix(a2)?)?;
        let right = w.smatrix(&a2.add(a3))?;
        let rhs = w.star(&w.star(&left, &mid)?, &right)?;
        compare(v, "causal_factorization", &lhs, &rhs);
        Ok(())
    });
    v
}

/// `[ψ̄(s), ψ(t)]_⋆ = ħ⟨t, iS s⟩`-type data: the graded commutator of the basis symbols is
/// `ħ G_ab` with `G` the Gram matrix of the CAR algebra.
pub fn anticommutator_crosscheck(w: &WickAlgebra, gram: &ExactMatrix) -> Verdict {
    let mut v = Verdict::new();
    for a in 0..w.dim() {
        for b in 0..w.dim() {
            let (x, y) = (w.psi(a), w.psibar(b));
            let anti = w.star(&x, &y).and_then(|p| Ok(p.add(&w.star(&y, &x)?)));
            let want = w.constant(gram.get(a, b).clone()).times_hbar(1);
            v.check("star_car_anticommutator", anti.as_ref().is_ok_and(|z| *z == want), || match &anti {
                Ok(z) => format!("ψ_{a} ⋆ ψ̄_{b} + ψ̄_{b} ⋆ ψ_{a} = {z}, Gram entry {}", gram.get(a, b)),
                Err(e) => e.to_string(),
            });
            for (p, q, name) in [(w.psi(a), w.psi(b), "psi"), (w.psibar(a), w.psibar(b), "psibar")] {
                let anti = w.star(&p, &q).and_then(|pq| Ok(pq.add(&w.star(&q, &p)?)));
                v.check("star_car_anticommutator", anti.as_ref().is_ok_and(WickElement::is_zero), || {
                    format!("{name}_{a}, {name}_{b} do not anticommute")
                });
            }
        }
    }
    v
}

/// The Wick S-matrix of a linear doubled field, mapped to the CAR algebra, equals the
/// closed form of the quantized Dirac field.
pub fn linear_smatrix_crosscheck(w: &WickAlgebra, qd: &QuantizedDirac, f: &SmearedSection) -> Verdict {
    let mut v = Verdict::new();
    attempt(&mut v, "linear_smatrix", |v| {
        let wick = w.smatrix(&w.doubled_smeared(f))?.at_hbar(&C::one());
        let mapped = w.to_car(qd.car(), &wick)?;
        let closed = qd.toy_smatrix_linear(f)?;
        v.check("linear_smatrix", mapped == closed, || format!("Wick route {mapped} vs closed form {closed}"));
        Ok(())
    });
    v
}

/// Wick interaction with a nilpotent even coupling `η_i η_j`: `S(η j) = 1 + iη j`.
pub fn nilpotent_coupling_check(w: &WickAlgebra, density: &WickElement, i: usize, j: usize) -> Verdict {
    let mut v = Verdict::new();
    attempt(&mut v, "nilpotent_coupling", |v| {
        let eta = w.wedge(&w.param(i), &w.param(j));
        let a = w.wedge(&eta, density);
        let s = w.smatrix(&a)?;
        compare(v, "nilpotent_coupling", &s, &w.one().add(&a.scale(&C::i())));
        Ok(())
    });
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::car::LatticeParams;
    use crate::scalar::q;

    fn model(t: usize, l: usize) -> CausalDiracModel {
        CausalDiracModel::lattice(&LatticeParams::new(t, l, q(1, 2))).unwrap()
    }

    fn unit_shift(m: &CausalDiracModel, params: &[(usize, usize)]) -> Shift {
        let coords = m.compact_coords();
        Shift::new(params.iter().map(|&(i, k)| (i, cvec::unit(m.field_dim(), coords[k % coords.len()]))).collect())
    }

    #[test]
    fn pack_is_valid() {
        let m = model(2, 2);
        let p = PropagatorPack::from_model(&m).unwrap();
        assert!(p.validate(&m).passed());
        let bad = p.mutate_feynman(&m, &C::frac(1, 4)).unwrap();
        assert!(!bad.validate(&m).passed());
    }

    #[test]
    fn star_basics() {
        let m = model(1, 1);
        let w = WickAlgebra::from_model(&m, 2).unwrap();
        let x = w.psi(0).add(&w.psibar(1).scale(&C::from_int(3)));
        assert_eq!(w.star(&x, &w.one()).unwrap(), x);
        assert_eq!(w.star_f(&w.one(), &x).unwrap(), x);
        assert_eq!(w.star(&w.psi(0), &w.psi(1)).unwrap(), w.wedge(&w.psi(0), &w.psi(1)));
        // one contraction: ψ_0 ⋆ ψ̄_1 = ψ_0 ∧ ψ̄_1 + ħ P⁺_{01}
        let got = w.star(&w.psi(0), &w.psibar(1)).unwrap();
        let want = w.wedge(&w.psi(0), &w.psibar(1)).add(&w.constant(w.pack().p_plus.get(0, 1).clone()).times_hbar(1));
        assert_eq!(got, want);
        let got = w.star(&w.psibar(1), &w.psi(0)).unwrap();
        let want = w.wedge(&w.psibar(1), &w.psi(0)).add(&w.constant(w.pack().p_minus.get(0, 1).clone()).times_hbar(1));
        assert_eq!(got, want);
    }

    #[test]
    fn parameters_are_graded_central() {
        let m = model(1, 1);
        let w = WickAlgebra::from_model(&m, 2).unwrap();
        let eta = w.param(1);
        let lhs = w.star(&w.psi(0), &w.wedge(&eta, &w.psibar(0))).unwrap();
        let rhs = w.wedge(&eta, &w.star(&w.psi(0), &w.psibar(0)).unwrap()).scale(&-C::one());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn current_product_matches_hand_expansion() {
        let m = model(2, 1);
        let w = WickAlgebra::from_model(&m, 2).unwrap();
        let pts_x = BTreeSet::from([1]);
        let pts_y = BTreeSet::from([0]);
        let jx = Interaction::Current.density(&w, Some(&pts_x));
        let jy = Interaction::Current.density(&w, Some(&pts_y));
        let got = w.star_f(&jx, &jy).unwrap();
        let pf = &w.pack().p_feynman;
        let g = |i: usize, j: usize| if i != j { C::one() } else { C::zero() };
        let (x, y) = ([2usize, 3], [0usize, 1]);
        let mut want = w.wedge(&jx, &jy);
        let mut trace = C::zero();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        let k = &g(a, b) * &g(c, d);
                        if k.is_zero() {
                            continue;
                        }
                        let one = &k * pf.get(x[b], y[c]);
                        want = want.add(&w.wedge(&w.psibar(x[a]), &w.psi(y[d])).scale(&one).times_hbar(1));
                        let two = &k * pf.get(y[d], x[a]);
                        want = want.add(&w.wedge(&w.psibar(y[c]), &w.psi(x[b])).scale(&two).times_hbar(1));
                        trace += &(&k * &(pf.get(x[b], y[c]) * pf.get(y[d], x[a])));
                    }
                }
            }
        }
        want = want.add(&w.constant(-trace).times_hbar(2));
        assert_eq!(got, want);
    }

    #[test]
    fn exponential_rules() {
        let m = model(1, 1);
        let w = WickAlgebra::from_model(&m, 2).unwrap();
        let pair = w.wedge(&w.param(1), &w.param(2)).scale(&C::from_int(5));
        assert_eq!(w.exp(&pair, Product::Wedge).unwrap(), w.one().add(&pair));
        assert_eq!(w.exp(&w.zero(), Product::StarF).unwrap(), w.one());
        assert!(matches!(w.exp(&w.constant(C::one()), Product::Wedge), Err(Error::Invalid(_))));
        assert!(matches!(w.exp(&w.psi(0), Product::Wedge), Err(Error::Parity(_))));
        let lin = w.wedge(&w.param(1), &w.psibar(0));
        let e = w.exp(&lin.scale(&C::i()), Product::Wedge).unwrap();
        assert_eq!(e, w.one().add(&lin.scale(&C::i())));
    }

    #[test]
    fn display_parse_round_trip() {
        let m = model(1, 1);
        let w = WickAlgebra::from_model(&m, 3).unwrap();
        let e = w
            .wedge(&w.param(2), &w.wedge(&w.psibar(1), &w.psi(0)))
            .scale(&C::new(q(3, 2), q(-1, 1)))
            .times_hbar(2)
            .times_lambda(1)
            .add(&w.constant(C::i()));
        let text = e.to_string();
        assert_eq!(WickElement::parse(2, &text).unwrap(), e);
        let swapped = WickElement::parse(2, "1 * psi[0] * psibar[1]").unwrap();
        assert_eq!(swapped, w.wedge(&w.psibar(1), &w.psi(0)).scale(&-C::one()));
    }

    #[test]
    fn delta_l_two_routes() {
        let m = model(2, 2);
        let w = WickAlgebra::from_model(&m, 2).unwrap();
        assert!(w.delta_l(&Shift::zero(), None).unwrap().is_zero());
        let shift = unit_shift(&m, &[(1, 0), (2, 3)]);
        assert_eq!(w.delta_l(&shift, None).unwrap(), w.delta_l_by_substitution(&shift, None).unwrap());
        let edge = Shift::new(vec![(1, cvec::unit(m.field_dim(), 0))]);
        assert!(w.delta_l(&edge, None).is_err());
        let mut cutoff = vec![q(1, 1); m.field_dim()];
        let h = &shift.terms[0].1;
        let a = (0..h.len()).find(|&a| !h[a].is_zero()).unwrap();
        cutoff[a] = q(1, 2);
        assert!(w.delta_l(&shift, Some(&cutoff)).is_err());
    }

    #[test]
    fn identities_on_small_lattice() {
        let m = model(2, 1);
        let w = WickAlgebra::from_model(&m, 2).unwrap();
        let shift = unit_shift(&m, &[(1, 0), (2, 1)]);
        let quartic = Interaction::Quartic.build(&w, None);
        let mass = Interaction::Mass.build(&w, None);
        for v in [
            f1_check(&w, &shift),
            smatrix_delta_l_check(&w, &shift),
            aux_checks(&w, &mass.lambda_coefficient(1), &shift),
            field_independence_check(&w, &quartic, &shift),
            field_equation_check(&w, &quartic, &shift),
            field_equation_check(&w, &mass, &shift),
            dynamics_equivalence_check(&w, &quartic, &shift),
            retarded_field_check(&w, &quartic, &w.wedge(&w.psibar(0), &w.psi(1))),
        ] {
            assert!(v.passed(), "{:?}", v.first_failure());
        }
    }

    #[test]
    fn mutated_propagator_breaks_both_routes() {
        let m = model(2, 1);
        let pack = PropagatorPack::from_model(&m).unwrap().mutate_feynman(&m, &C::frac(1, 4)).unwrap();
        let w = WickAlgebra::new(&m, pack, 2).unwrap();
        let shift = unit_shift(&m, &[(1, 0), (2, 1)]);
        let quartic = Interaction::Quartic.build(&w, None);
        assert!(!field_equation_check(&w, &quartic, &shift).passed());
        assert!(!dynamics_equivalence_check(&w, &quartic, &shift).passed());
    }

    #[test]
    fn wick_maps_onto_car() {
        let m = model(2, 2);
        let w = WickAlgebra::from_model(&m, 1).unwrap();
        let qd = QuantizedDirac::new(&m).unwrap();
        assert!(anticommutator_crosscheck(&w, &qd.kernel().gram).passed());
        let d = m.source_dim();
        let f = SmearedSection::with_generators(2, 1, &[cvec::unit(d, 1), cvec::unit(d, 6)]);
        let v = linear_smatrix_crosscheck(&w, &qd, &f);
        assert!(v.passed(), "{:?}", v.first_failure());
        let a = w.wedge(&w.psibar(0), &w.psi(3));
        let b = w.wedge(&w.psi(2), &w.psibar(5));
        let lhs = w.to_car(qd.car(), &w.star(&a, &b).unwrap().at_hbar(&C::one())).unwrap();
        let rhs = qd.car().mul(&w.to_car(qd.car(), &a).unwrap(), &w.to_car(qd.car(), &b).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn causal_factorization_on_slices() {
        let m = model(3, 1);
        let w = WickAlgebra::from_model(&m, 2).unwrap();
        let q = |pts: &[usize]| Interaction::Quartic.build(&w, Some(&pts.iter().copied().collect()));
        let v = causal_factorization_check(&w, &q(&[2]), &q(&[0, 1, 2]), &q(&[0]));
        assert!(v.passed(), "{:?}", v.first_failure());
        assert!(!causal_factorization_check(&w, &q(&[0]), &q(&[1]), &q(&[2])).passed());
    }

    #[test]
    fn current_with_nilpotent_coupling() {
        let m = model(2, 1);
        let w = WickAlgebra::from_model(&m, 1).unwrap();
        let j = Interaction::Current.density(&w, None);
        assert!(nilpotent_coupling_check(&w, &j, 1, 2).passed());
    }
}
