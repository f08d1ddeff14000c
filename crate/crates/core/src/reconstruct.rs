//! Reconstruction of the universal graded algebra from a covariant Grassmann
//! multiplication functor: projections π_K and ρ_K, top components 𝔄ⁿ, the product
//! 𝔄ⁿ × 𝔄ᵐ → 𝔄ⁿ⁺ᵐ, inductive maps ι_{k,n}, the limit algebra, σ and the universal map τ.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::functor::{ModelFunctor, OpaqueFunctor};
use crate::graded::{check_homomorphism, direct_sum, HomCheck, StructureConstantAlgebra};
use crate::grassmann::{full, indices, matrix_unit, reversal_sign, size, GrassmannHom, Subset};
use crate::scalar::{vec, ExactMatrix, C};
use crate::verdict::Verdict;

/// Basis of 𝔄ⁿ = ρ_{1..n}(𝔄_{Λℝⁿ}) as ambient coordinate vectors, each homogeneous.
#[derive(Clone, Debug)]
pub struct TopComponent {
    pub level: usize,
    pub basis: Vec<Vec<C>>,
    pub degrees: Vec<u8>,
}

/// `ι_level(vector)` in the limit algebra, with `vector ∈ 𝔄^level`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitElement {
    pub level: usize,
    pub vector: Vec<C>,
}

/// π, ρ and top components of a functor, cached per level.
pub struct Reconstruction<'f> {
    f: &'f dyn OpaqueFunctor,
    pi: Vec<Vec<ExactMatrix>>,
    rho: Vec<Vec<ExactMatrix>>,
    tops: Vec<TopComponent>,
    maps: RefCell<HashMap<GrassmannHom, ExactMatrix>>,
}

fn columns(m: &ExactMatrix) -> Vec<Vec<C>> {
    (0..m.cols()).map(|j| m.column(j)).collect()
}

fn from_columns(rows: usize, cols: &[Vec<C>]) -> ExactMatrix {
    ExactMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i].clone())
}

impl<'f> Reconstruction<'f> {
    pub fn new(f: &'f dyn OpaqueFunctor) -> Result<Self> {
        let mut pi = Vec::new();
        let mut rho = Vec::new();
        let mut tops = Vec::new();
        for n in 0..=f.n_max() {
            let d = f.algebra(n).dim();
            let pn: Vec<ExactMatrix> =
                (0..1u32 << n).map(|k| f.map(&GrassmannHom::projection(n, k))).collect::<Result<_>>()?;
            let rn: Vec<ExactMatrix> = (0..1u32 << n)
                .map(|k| {
                    let mut acc = pn[k as usize].clone();
                    for i in indices(k) {
                        let factor = ExactMatrix::identity(d).try_sub(&pn[(k & !(1 << (i - 1))) as usize])?;
                        acc = acc.try_mul(&factor)?;
                    }
                    Ok(acc)
                })
                .collect::<Result<_>>()?;
            let alg = f.algebra(n);
            let r_top = &rn[full(n) as usize];
            let picks = r_top.independent_columns();
            let basis: Vec<Vec<C>> = picks.iter().map(|&j| r_top.column(j)).collect();
            let degrees = basis.iter().map(|b| alg.parity(b).unwrap_or(0)).collect();
            tops.push(TopComponent { level: n, basis, degrees });
            pi.push(pn);
            rho.push(rn);
        }
        Ok(Self { f, pi, rho, tops, maps: RefCell::new(HashMap::new()) })
    }

    pub fn functor(&self) -> &'f dyn OpaqueFunctor {
        self.f
    }

    pub fn n_max(&self) -> usize {
        self.f.n_max()
    }

    /// π_K = 𝔊P_K on 𝔄_{Λℝⁿ}.
    pub fn pi(&self, n: usize, k: Subset) -> &ExactMatrix {
        &self.pi[n][k as usize]
    }

    /// ρ_K = π_K ∏_{k∈K}(id − π_{K∖{k}}).
    pub fn rho(&self, n: usize, k: Subset) -> &ExactMatrix {
        &self.rho[n][k as usize]
    }

    pub fn top(&self, n: usize) -> &TopComponent {
        &self.tops[n]
    }

    fn map(&self, chi: &GrassmannHom) -> Result<ExactMatrix> {
        if let Some(m) = self.maps.borrow().get(chi) {
            return Ok(m.clone());
        }
        let m = self.f.map(chi)?;
        self.maps.borrow_mut().insert(chi.clone(), m.clone());
        Ok(m)
    }

    fn level_ok(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            Err(Error::LevelOverflow { needed: n, n_max: self.n_max() })
        } else {
            Ok(())
        }
    }

    /// `a ∈ 𝔄ⁿ` iff π_{{1..n}∖{k}}(a) = 0 for every k.
    pub fn in_top(&self, n: usize, a: &[C]) -> bool {
        (1..=n).all(|k| vec::is_zero(&self.pi(n, full(n) & !(1 << (k - 1))).mul_vec(a).expect("shape")))
    }

    /// `a·b = (−1)^{m·dg(a)} 𝔊χ^{n+m}_{{m+1..m+n}}(a) 𝔊χ^{n+m}_{{1..m}}(b)`, extended linearly
    /// over the parity components of `a`.
    pub fn dot(&self, n: usize, a: &[C], m: usize, b: &[C]) -> Result<Vec<C>> {
        self.level_ok(n + m)?;
        if !self.in_top(n, a) || !self.in_top(m, b) {
            return Err(Error::Invalid("dot arguments must lie in their top components".into()));
        }
        let big = n + m;
        let left = self.map(&GrassmannHom::block_embedding(big, full(big) & !full(m)))?;
        let right = self.map(&GrassmannHom::block_embedding(big, full(m)))?;
        let alg_n = self.f.algebra(n);
        let (even, odd) = alg_n.split_parity(a);
        let mut a_signed = even;
        let odd_sign = if m % 2 == 1 { C::from_int(-1) } else { C::one() };
        vec::axpy(&mut a_signed, &odd_sign, &odd);
        let la = left.mul_vec(&a_signed)?;
        let rb = right.mul_vec(b)?;
        Ok(self.f.algebra(big).mul(&la, &rb))
    }

    /// `ι_{k,n}(a) = η_1⋯η_{k−n} 𝔊χ^k_{{k−n+1..k}}(a)`.
    pub fn iota(&self, k: usize, n: usize, a: &[C]) -> Result<Vec<C>> {
        if k < n {
            return Err(Error::Invalid(format!("ι_{{{k},{n}}} needs k ≥ n")));
        }
        self.level_ok(k)?;
        let shifted = self.map(&GrassmannHom::block_embedding(k, full(k) & !full(k - n)))?.mul_vec(a)?;
        let etas = self.f.embedding(k).column(full(k - n) as usize);
        Ok(self.f.algebra(k).mul(&etas, &shifted))
    }

    /// Projection identities on level `n`: π_Kπ_J = π_{K∩J}, ρ_Kρ_J = δ_{JK}ρ_K, Σ_Kρ_K = id and
    /// ρ_K(ab) = Σ_{J⊆K} ρ_J(a)ρ_{K∖J}(b) over all basis pairs.
    pub fn projection_identities(&self, n: usize) -> Verdict {
        let mut v = Verdict::new();
        let alg = self.f.algebra(n);
        let d = alg.dim();
        let subsets = 1u32 << n;
        for k in 0..subsets {
            for j in 0..subsets {
                let pp = self.pi(n, k).try_mul(self.pi(n, j)).expect("square");
                v.check("projections", &pp == self.pi(n, k & j), || format!("level {n}, K={:?}, J={:?}", indices(k), indices(j)));
                let rr = self.rho(n, k).try_mul(self.rho(n, j)).expect("square");
                let want = if k == j { self.rho(n, k).clone() } else { ExactMatrix::zeros(d, d) };
                v.check("orthogonal", rr == want, || format!("level {n}, K={:?}, J={:?}", indices(k), indices(j)));
            }
        }
        let mut sum = ExactMatrix::zeros(d, d);
        for k in 0..subsets {
            sum = sum.try_add(self.rho(n, k)).expect("square");
        }
        v.check("completeness", sum == ExactMatrix::identity(d), || format!("level {n}"));
        let rho_cols: Vec<Vec<Vec<C>>> = (0..subsets).map(|k| columns(self.rho(n, k))).collect();
        for a in 0..d {
            for b in 0..d {
                let ab = alg.mul(&alg.basis(a), &alg.basis(b));
                for k in 0..subsets {
                    let lhs = self.rho(n, k).mul_vec(&ab).expect("shape");
                    let mut rhs = vec::zeros(d);
                    let mut j = k;
                    loop {
                        let t = alg.mul(&rho_cols[j as usize][a], &rho_cols[(k & !j) as usize][b]);
                        vec::axpy(&mut rhs, &C::one(), &t);
                        if j == 0 {
                            break;
                        }
                        j = (j - 1) & k;
                    }
                    v.check("product", lhs == rhs, || {
                        format!(
                            "level {n}, K={:?}, a={}, b={}: {} vs {}",
                            indices(k),
                            alg.labels()[a],
                            alg.labels()[b],
                            alg.show(&lhs),
                            alg.show(&rhs)
                        )
                    });
                }
            }
        }
        v
    }

    /// Associativity of `dot`, the unit law, ι composition, compatibility of ι with `dot`,
    /// and agreement of ι_{k,n} with 𝔊E^{kn} for k ≡ n mod 2, n ≥ 1, on top-component bases.
    pub fn inductive_identities(&self, max_level: usize) -> Result<Verdict> {
        let mut v = Verdict::new();
        let lv = max_level.min(self.n_max());
        let unit0 = self.f.algebra(0).unit();
        for n in 0..=lv {
            for (bi, a) in self.top(n).basis.iter().enumerate() {
                v.check("top_component", self.in_top(n, a), || format!("level {n} basis {bi}"));
                if n <= self.n_max() {
                    let u = self.dot(0, &unit0, n, a)?;
                    v.check("dot_unit", &u == a, || format!("level {n} basis {bi}"));
                }
                for k in n..=lv {
                    let direct = self.iota(k, n, a)?;
                    v.check("iota_lands_in_top", self.in_top(k, &direct), || format!("ι_{{{k},{n}}} basis {bi}"));
                    for mid in n..=k {
                        let two = self.iota(k, mid, &self.iota(mid, n, a)?)?;
                        v.check("iota_composition", two == direct, || format!("ι_{{{k},{mid}}}∘ι_{{{mid},{n}}} basis {bi}"));
                    }
                    if n >= 1 && (k - n) % 2 == 0 {
                        let (_, combo) = matrix_unit(k, n, full(k), full(n))?;
                        let e = self.f.map_combination(&combo)?.mul_vec(a)?;
                        v.check("iota_matrix_unit", e == direct, || format!("k={k}, n={n}, basis {bi}"));
                    }
                }
            }
        }
        // Products and projection compatibility, at levels whose sums stay in range.
        for n in 0..=lv {
            for m in 0..=lv - n {
                for (i, a) in self.top(n).basis.iter().enumerate() {
                    for (j, b) in self.top(m).basis.iter().enumerate() {
                        let ab = self.dot(n, a, m, b)?;
                        v.check("dot_in_top", self.in_top(n + m, &ab), || format!("levels {n},{m} basis {i},{j}"));
                        for k3 in 0..=lv.saturating_sub(n + m) {
                            for c in &self.top(k3).basis {
                                let l = self.dot(n + m, &ab, k3, c)?;
                                let r = self.dot(n, a, m + k3, &self.dot(m, b, k3, c)?)?;
                                v.check("dot_associative", l == r, || format!("levels {n},{m},{k3}"));
                            }
                        }
                        for dn in 0..=1 {
                            for dm in 0..=1 {
                                if n + dn + m + dm > lv {
                                    continue;
                                }
                                let l = self.dot(n + dn, &self.iota(n + dn, n, a)?, m + dm, &self.iota(m + dm, m, b)?)?;
                                let r = self.iota(n + dn + m + dm, n + m, &ab)?;
                                v.check("iota_dot_compatible", l == r, || {
                                    format!("ι_{{{},{n}}}(a)·ι_{{{},{m}}}(b), basis {i},{j}", n + dn, m + dm)
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(v)
    }

    /// Product of limit elements: `ι_n(a)·ι_m(b) = ι_{n+m}(a·b)`.
    pub fn limit_mul(&self, x: &LimitElement, y: &LimitElement) -> Result<LimitElement> {
        Ok(LimitElement { level: x.level + y.level, vector: self.dot(x.level, &x.vector, y.level, &y.vector)? })
    }

    /// `ι_n(a)* = (−1)^{n(n−1)/2 + n(dg(a)+n)} ι_n(a*)`, linear over parity components.
    pub fn limit_star(&self, x: &LimitElement) -> LimitElement {
        let n = x.level;
        let alg = self.f.algebra(n);
        let (even, odd) = alg.split_parity(&x.vector);
        let sign = |dg: usize| {
            let e = n * n.saturating_sub(1) / 2 + n * (dg + n);
            if e.is_multiple_of(2) {
                C::one()
            } else {
                C::from_int(-1)
            }
        };
        let mut out = vec::scale(&alg.star(&even), &sign(0));
        vec::axpy(&mut out, &sign(1), &alg.star(&odd));
        LimitElement { level: n, vector: out }
    }

    /// Parity in the limit: `dg(ι_n(a)) = dg(a) + n`.
    pub fn limit_degree(&self, x: &LimitElement) -> Option<u8> {
        self.f.algebra(x.level).parity(&x.vector).map(|g| ((g as usize + x.level) % 2) as u8)
    }

    pub fn limit_embed(&self, x: &LimitElement, k: usize) -> Result<LimitElement> {
        Ok(LimitElement { level: k, vector: self.iota(k, x.level, &x.vector)? })
    }

    pub fn limit_eq(&self, x: &LimitElement, y: &LimitElement) -> Result<bool> {
        let k = x.level.max(y.level);
        Ok(self.limit_embed(x, k)?.vector == self.limit_embed(y, k)?.vector)
    }

    /// Smallest-level representative.
    pub fn normalize(&self, x: &LimitElement) -> Result<LimitElement> {
        for n in 0..x.level {
            let imgs: Vec<Vec<C>> =
                self.top(n).basis.iter().map(|b| self.iota(x.level, n, b)).collect::<Result<_>>()?;
            if imgs.is_empty() {
                if vec::is_zero(&x.vector) {
                    return Ok(LimitElement { level: n, vector: self.f.algebra(n).zero() });
                }
                continue;
            }
            let m = from_columns(x.vector.len(), &imgs);
            if let Some(c) = m.solve_vec(&x.vector) {
                let mut v = self.f.algebra(n).zero();
                for (coef, b) in c.iter().zip(&self.top(n).basis) {
                    vec::axpy(&mut v, coef, b);
                }
                return Ok(LimitElement { level: n, vector: v });
            }
        }
        Ok(x.clone())
    }

    /// Builds the limit algebra on the smallest level `s` from which all ι_{k,s}, `k ≤ n_max`,
    /// are isomorphisms and `2s ≤ n_max`.
    pub fn limit(&self) -> Result<LimitAlgebra> {
        let n_max = self.n_max();
        'search: for s in 0..=n_max / 2 {
            let base = &self.top(s).basis;
            let mut to_level = Vec::new();
            for k in s..=n_max {
                let imgs: Vec<Vec<C>> = base.iter().map(|b| self.iota(k, s, b)).collect::<Result<_>>()?;
                if imgs.len() != self.top(k).basis.len() {
                    continue 'search;
                }
                let m = from_columns(self.f.algebra(k).dim(), &imgs);
                if m.rank() != imgs.len() {
                    continue 'search;
                }
                to_level.push(m);
            }
            let lim = LimitAlgebra::assemble(self, s, to_level)?;
            return Ok(lim);
        }
        Err(Error::Invalid(format!("top components do not stabilize below n_max = {n_max}")))
    }
}

/// The reconstructed algebra realized on 𝔄ˢ for a stable level `s`.
pub struct LimitAlgebra {
    stable_level: usize,
    basis: Vec<Vec<C>>,
    /// For `k ≥ s`, columns are ι_{k,s} of the basis.
    to_level: Vec<ExactMatrix>,
    algebra: StructureConstantAlgebra,
}

impl LimitAlgebra {
    fn assemble(rec: &Reconstruction<'_>, s: usize, to_level: Vec<ExactMatrix>) -> Result<Self> {
        let basis = rec.top(s).basis.clone();
        let mut lim = Self { stable_level: s, basis, to_level, algebra: StructureConstantAlgebra::scalars() };
        let dl = lim.basis.len();
        let elems: Vec<LimitElement> =
            lim.basis.iter().map(|b| LimitElement { level: s, vector: b.clone() }).collect();
        let mut products = Vec::with_capacity(dl * dl);
        for x in &elems {
            for y in &elems {
                products.push(lim.coords(rec, &rec.limit_mul(x, y)?)?);
            }
        }
        let stars: Vec<Vec<C>> = elems.iter().map(|x| lim.coords(rec, &rec.limit_star(x))).collect::<Result<_>>()?;
        let unit = lim.coords(rec, &LimitElement { level: 0, vector: rec.f.algebra(0).unit() })?;
        let degrees = elems.iter().map(|x| rec.limit_degree(x).unwrap_or(0)).collect();
        let labels = (0..dl).map(|k| format!("L{k}")).collect();
        lim.algebra =
            StructureConstantAlgebra::from_fns(labels, degrees, unit, |i, j| products[i * dl + j].clone(), |i| stars[i].clone());
        Ok(lim)
    }

    pub fn stable_level(&self) -> usize {
        self.stable_level
    }

    pub fn algebra(&self) -> &StructureConstantAlgebra {
        &self.algebra
    }

    pub fn basis(&self) -> &[Vec<C>] {
        &self.basis
    }

    /// Coordinates of a limit element in the basis of 𝔄ˢ.
    pub fn coords(&self, rec: &Reconstruction<'_>, x: &LimitElement) -> Result<Vec<C>> {
        let s = self.stable_level;
        let (m, target) = if x.level >= s {
            let k = x.level - s;
            let m = self.to_level.get(k).ok_or(Error::LevelOverflow { needed: x.level, n_max: rec.n_max() })?;
            (m.clone(), x.vector.clone())
        } else {
            (from_columns(rec.f.algebra(s).dim(), &self.basis), rec.iota(s, x.level, &x.vector)?)
        };
        m.solve_vec(&target)
            .ok_or_else(|| Error::Invalid(format!("element at level {} is outside the top component", x.level)))
    }

    pub fn element(&self, coords: &[C]) -> LimitElement {
        let mut v = vec::zeros(self.basis.first().map_or(0, Vec::len));
        for (c, b) in coords.iter().zip(&self.basis) {
            vec::axpy(&mut v, c, b);
        }
        LimitElement { level: self.stable_level, vector: v }
    }
}

/// `σ(a) = Σ_J η_J ⊗ ι_{|J|}(𝔊χ_n^J ρ_J(a))` as a matrix into Λℝⁿ ⊗ (limit algebra).
pub fn sigma_matrix(rec: &Reconstruction<'_>, lim: &LimitAlgebra, n: usize) -> Result<ExactMatrix> {
    let d = rec.f.algebra(n).dim();
    let dl = lim.algebra.dim();
    let mut out = ExactMatrix::zeros((1 << n) * dl, d);
    for j in 0..1u32 << n {
        let restrict = rec.map(&GrassmannHom::block_restriction(n, j))?.try_mul(rec.rho(n, j))?;
        for col in 0..d {
            let y = restrict.column(col);
            if vec::is_zero(&y) {
                continue;
            }
            let c = lim.coords(rec, &LimitElement { level: size(j), vector: y })?;
            for (k, x) in c.into_iter().enumerate() {
                out.set(j as usize * dl + k, col, x);
            }
        }
    }
    Ok(out)
}

pub fn sigma(rec: &Reconstruction<'_>, lim: &LimitAlgebra, n: usize, a: &[C]) -> Result<Vec<C>> {
    sigma_matrix(rec, lim, n)?.mul_vec(a)
}

/// σ is an injective graded *-homomorphism at level `n`, and natural for each `homs` entry.
pub fn sigma_checks(rec: &Reconstruction<'_>, lim: &LimitAlgebra, n: usize, homs: &[GrassmannHom]) -> Result<Verdict> {
    let target = ModelFunctor::new(lim.algebra.clone(), rec.n_max());
    let mut v = Verdict::new();
    let s = sigma_matrix(rec, lim, n)?;
    v.check("sigma_injective", s.rank() == s.cols(), || format!("level {n}: rank {} < {}", s.rank(), s.cols()));
    v.merge(check_homomorphism(&s, rec.f.algebra(n), target.algebra(n), HomCheck::exhaustive(true)));
    for chi in homs {
        if chi.source() != n {
            continue;
        }
        let lhs = sigma_matrix(rec, lim, chi.target())?.try_mul(&rec.f.map(chi)?)?;
        let rhs = target.map(chi)?.try_mul(&s)?;
        v.check("sigma_natural", lhs == rhs, || format!("hom {}→{} with images {:?}", chi.source(), chi.target(), chi.images()));
    }
    Ok(v)
}

/// A cone `σ′_n: 𝔄_{Λℝⁿ} → Λℝⁿ ⊗ 𝔄′` into a fixed algebra 𝔄′.
pub trait PrimedCone {
    fn target(&self) -> &StructureConstantAlgebra;
    /// Matrix into graded-tensor coordinates of Λℝⁿ ⊗ 𝔄′.
    fn sigma(&self, n: usize) -> Result<ExactMatrix>;
}

/// The reconstruction's own σ.
pub struct SigmaCone<'a, 'f> {
    pub rec: &'a Reconstruction<'f>,
    pub lim: &'a LimitAlgebra,
}

impl PrimedCone for SigmaCone<'_, '_> {
    fn target(&self) -> &StructureConstantAlgebra {
        &self.lim.algebra
    }

    fn sigma(&self, n: usize) -> Result<ExactMatrix> {
        sigma_matrix(self.rec, self.lim, n)
    }
}

/// For 𝔊^𝔅: the identity Λℝⁿ ⊗ 𝔅 → Λℝⁿ ⊗ 𝔅.
pub struct InclusionCone {
    pub base: StructureConstantAlgebra,
}

impl PrimedCone for InclusionCone {
    fn target(&self) -> &StructureConstantAlgebra {
        &self.base
    }

    fn sigma(&self, n: usize) -> Result<ExactMatrix> {
        Ok(ExactMatrix::identity((1 << n) * self.base.dim()))
    }
}

/// For 𝔊^𝔅: η_J ⊗ b ↦ η_J ⊗ (b, b) in Λℝⁿ ⊗ (𝔅 ⊕ 𝔅).
pub struct DiagonalCone {
    base_dim: usize,
    target: StructureConstantAlgebra,
}

impl DiagonalCone {
    pub fn new(base: &StructureConstantAlgebra) -> Self {
        Self { base_dim: base.dim(), target: direct_sum(base, base) }
    }
}

impl PrimedCone for DiagonalCone {
    fn target(&self) -> &StructureConstantAlgebra {
        &self.target
    }

    fn sigma(&self, n: usize) -> Result<ExactMatrix> {
        let db = self.base_dim;
        let mut m = ExactMatrix::zeros((1 << n) * 2 * db, (1 << n) * db);
        for j in 0..1usize << n {
            for k in 0..db {
                m.set(j * 2 * db + k, j * db + k, C::one());
                m.set(j * 2 * db + db + k, j * db + k, C::one());
            }
        }
        Ok(m)
    }
}

/// τ with its verification record.
pub struct TauOutcome {
    /// `dim 𝔄′ × dim(limit)`.
    pub tau: ExactMatrix,
    pub verdict: Verdict,
    pub injective: bool,
    pub surjective: bool,
}

/// τ defined by `η_{1..s} ⊗ τ(a) = σ′_s(a₀)` on the stable-level basis, then checked:
/// graded *-homomorphism, `(id⊗τ)∘σ_n = σ′_n` for `n ≤ levels`, and uniqueness via the
/// span of the limit components of σ images.
pub fn universal_tau(
    rec: &Reconstruction<'_>,
    lim: &LimitAlgebra,
    cone: &dyn PrimedCone,
    levels: usize,
) -> Result<TauOutcome> {
    let s = lim.stable_level;
    let tgt = cone.target();
    let dt = tgt.dim();
    let dl = lim.algebra.dim();
    let sig_s = cone.sigma(s)?;
    let top = full(s) as usize;
    let mut tau = ExactMatrix::zeros(dt, dl);
    for (j, b) in lim.basis.iter().enumerate() {
        let img = sig_s.mul_vec(b)?;
        for (idx, c) in img.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if idx / dt != top {
                return Err(Error::Invalid(format!(
                    "primed cone is inconsistent: σ′ of top basis vector {j} has a component off η_{{1..{s}}}"
                )));
            }
            tau.set(idx % dt, j, c.clone());
        }
    }
    let mut v = check_homomorphism(&tau, &lim.algebra, tgt, HomCheck::exhaustive(true));
    let mut span_rows: Vec<Vec<C>> = Vec::new();
    for n in 0..=levels.min(rec.n_max()) {
        let sig = sigma_matrix(rec, lim, n)?;
        let tau_n = block_diag(&tau, 1 << n);
        let lhs = tau_n.try_mul(&sig)?;
        let rhs = cone.sigma(n)?;
        v.check("tau_square", lhs == rhs, || format!("level {n}: (id⊗τ)∘σ ≠ σ′"));
        for col in 0..sig.cols() {
            let c = sig.column(col);
            for j in 0..1usize << n {
                let part = c[j * dl..(j + 1) * dl].to_vec();
                if !vec::is_zero(&part) {
                    span_rows.push(part);
                }
            }
        }
    }
    let span_rank = if span_rows.is_empty() { 0 } else { from_columns(dl, &span_rows).rank() };
    v.check("tau_unique", span_rank == dl, || format!("σ images span {span_rank} of {dl} limit dimensions"));
    let r = tau.rank();
    Ok(TauOutcome { injective: r == dl, surjective: r == dt, tau, verdict: v })
}

fn block_diag(m: &ExactMatrix, copies: usize) -> ExactMatrix {
    let (r, c) = (m.rows(), m.cols());
    let mut out = ExactMatrix::zeros(r * copies, c * copies);
    for b in 0..copies {
        for i in 0..r {
            for j in 0..c {
                let x = m.get(i, j);
                if !x.is_zero() {
                    out.set(b * r + i, b * c + j, x.clone());
                }
            }
        }
    }
    out
}

/// Entrywise comparison of structure constants through an invertible τ: A ≅ B.
pub fn isomorphism_check(tau: &ExactMatrix, a: &StructureConstantAlgebra, b: &StructureConstantAlgebra) -> Verdict {
    let mut v = Verdict::new();
    let Ok(inv) = tau.inverse() else {
        v.fail("tau_bijective", format!("τ has rank {} for dimensions {} → {}", tau.rank(), a.dim(), b.dim()));
        return v;
    };
    let img: Vec<Vec<C>> = columns(tau);
    let back = |x: &[C]| inv.mul_vec(x).expect("shape");
    v.check("unit", back(&b.unit()) == a.unit(), || "τ⁻¹(1) ≠ 1".into());
    for i in 0..a.dim() {
        v.check("grading", b.parity(&img[i]) == Some(a.degree(i)), || format!("basis {}", a.labels()[i]));
        let st = back(&b.star(&img[i]));
        v.check("star_constants", st == a.star(&a.basis(i)), || format!("basis {}", a.labels()[i]));
        for j in 0..a.dim() {
            let c = back(&b.mul(&img[i], &img[j]));
            let want = a.mul(&a.basis(i), &a.basis(j));
            v.check("structure_constants", c == want, || {
                format!("({}, {}): {} vs {}", a.labels()[i], a.labels()[j], a.show(&c), a.show(&want))
            });
        }
    }
    v
}

/// Sign used by the limit involution, exposed for the sign-rule regression.
pub fn limit_star_sign(level: usize, degree: usize) -> i32 {
    reversal_sign(level) * if (level * (degree + level)).is_multiple_of(2) { 1 } else { -1 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrices(n_max: usize) -> ModelFunctor {
        ModelFunctor::new(StructureConstantAlgebra::graded_matrices_2x2(), n_max)
    }

    #[test]
    fn pi_and_rho_on_tensor_model() {
        let f = matrices(2);
        let rec = Reconstruction::new(&f).unwrap();
        let b = f.base().basis(1);
        for k in 0..4u32 {
            for i in 0..4u32 {
                let x = f.pure(2, i, &b);
                let pi = rec.pi(2, k).mul_vec(&x).unwrap();
                let want = if i & !k == 0 { x.clone() } else { vec::zeros(x.len()) };
                assert_eq!(pi, want);
                let rho = rec.rho(2, k).mul_vec(&x).unwrap();
                let want = if i == k { x.clone() } else { vec::zeros(x.len()) };
                assert_eq!(rho, want);
            }
        }
        assert_eq!(rec.pi(2, 3), &ExactMatrix::identity(16));
    }

    #[test]
    fn dot_of_level_one_elements() {
        let f = matrices(2);
        let rec = Reconstruction::new(&f).unwrap();
        let base = f.base();
        for p in 0..4 {
            for q in 0..4 {
                let a = f.pure(1, 1, &base.basis(p));
                let b = f.pure(1, 1, &base.basis(q));
                let ab = rec.dot(1, &a, 1, &b).unwrap();
                let want = f.pure(2, 3, &base.mul(&base.basis(p), &base.basis(q)));
                assert_eq!(ab, want, "{p} {q}");
            }
        }
    }

    #[test]
    fn iota_two_one() {
        let f = matrices(2);
        let rec = Reconstruction::new(&f).unwrap();
        let b = f.base().basis(2);
        assert_eq!(rec.iota(2, 1, &f.pure(1, 1, &b)).unwrap(), f.pure(2, 3, &b));
        assert!(rec.iota(0, 1, &f.pure(1, 1, &b)).is_err());
    }

    #[test]
    fn limit_is_isomorphic_to_base() {
        let f = matrices(2);
        let rec = Reconstruction::new(&f).unwrap();
        let lim = rec.limit().unwrap();
        assert_eq!(lim.stable_level(), 0);
        let out = universal_tau(&rec, &lim, &InclusionCone { base: f.base().clone() }, 2).unwrap();
        assert!(out.verdict.passed(), "{:?}", out.verdict.first_failure());
        assert!(out.injective && out.surjective);
        assert!(isomorphism_check(&out.tau, lim.algebra(), f.base()).passed());
        let id = universal_tau(&rec, &lim, &SigmaCone { rec: &rec, lim: &lim }, 2).unwrap();
        assert_eq!(id.tau, ExactMatrix::identity(4));
        let diag = universal_tau(&rec, &lim, &DiagonalCone::new(f.base()), 2).unwrap();
        assert!(diag.verdict.passed(), "{:?}", diag.verdict.first_failure());
        assert!(diag.injective && !diag.surjective);
    }

    #[test]
    fn sigma_on_pure_tensors() {
        let f = matrices(2);
        let rec = Reconstruction::new(&f).unwrap();
        let lim = rec.limit().unwrap();
        let b = f.base().basis(1);
        let s = sigma(&rec, &lim, 2, &f.pure(2, 2, &b)).unwrap();
        let mut want = vec::zeros(16);
        want[2 * 4 + 1] = C::one();
        assert_eq!(s, want);
    }

    #[test]
    fn limit_star_reverses_products() {
        let f = matrices(3);
        let rec = Reconstruction::new(&f).unwrap();
        let base = f.base();
        for p in 0..4 {
            for q in 0..4 {
                let x = LimitElement { level: 1, vector: f.pure(1, 1, &base.basis(p)) };
                let y = LimitElement { level: 1, vector: f.pure(1, 1, &base.basis(q)) };
                let lhs = rec.limit_star(&rec.limit_mul(&x, &y).unwrap());
                let rhs = rec.limit_mul(&rec.limit_star(&y), &rec.limit_star(&x)).unwrap();
                assert!(rec.limit_eq(&lhs, &rhs).unwrap(), "{p} {q}");
            }
        }
    }

    #[test]
    fn identities_hold_on_grassmann_base() {
        let f = ModelFunctor::new(StructureConstantAlgebra::grassmann(2), 3);
        let rec = Reconstruction::new(&f).unwrap();
        for n in 0..=2 {
            let v = rec.projection_identities(n);
            assert!(v.passed(), "{:?}", v.first_failure());
        }
        let v = rec.inductive_identities(3).unwrap();
        assert!(v.passed(), "{:?}", v.first_failure());
        let lim = rec.limit().unwrap();
        let out = universal_tau(&rec, &lim, &InclusionCone { base: f.base().clone() }, 3).unwrap();
        assert!(isomorphism_check(&out.tau, lim.algebra(), f.base()).passed());
        let homs = crate::functor::generating_homs(2);
        let v = sigma_checks(&rec, &lim, 2, &homs).unwrap();
        assert!(v.passed(), "{:?}", v.first_failure());
    }

    #[test]
    fn normalize_finds_minimal_level() {
        let f = matrices(3);
        let rec = Reconstruction::new(&f).unwrap();
        let b = f.base().basis(3);
        let x = LimitElement { level: 1, vector: f.pure(1, 1, &b) };
        let up = rec.limit_embed(&x, 3).unwrap();
        let low = rec.normalize(&up).unwrap();
        assert_eq!(low.level, 0);
        assert!(rec.limit_eq(&low, &x).unwrap());
    }
}
