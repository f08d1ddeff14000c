//! Covariant Grassmann multiplication functors consumed through a finite interface,
//! the concrete tensor model 𝔊^𝔅, the (non-linear) tensor-square functor, descriptor
//! bundles, and the validator for the functor axioms.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::{check_homomorphism, graded_tensor, AlgebraDescriptor, HomCheck, StructureConstantAlgebra};
use crate::grassmann::{parse_element, GrassmannElement, GrassmannHom, HomCombination, Subset};
use crate::scalar::{vec, ExactMatrix, C};
use crate::verdict::Verdict;

/// A functor Λℝⁿ ↦ 𝔄_{Λℝⁿ} known for `n ≤ n_max`.
///
/// Maps are matrices acting on coordinate vectors; Λℝⁿ coordinates are ordered by subset mask.
pub trait OpaqueFunctor {
    fn n_max(&self) -> usize;

    /// 𝔄_{Λℝⁿ}.
    fn algebra(&self, n: usize) -> &StructureConstantAlgebra;

    /// ι_{Λℝⁿ}: Λℝⁿ → 𝔄_{Λℝⁿ} as a `dim 𝔄 × 2ⁿ` matrix.
    fn embedding(&self, n: usize) -> &ExactMatrix;

    /// 𝔊χ. Implementations that only know a generating set return an error otherwise.
    fn map(&self, chi: &GrassmannHom) -> Result<ExactMatrix>;

    /// 𝔊(Σ cᵢχᵢ) = Σ cᵢ𝔊χᵢ.
    fn map_combination(&self, combo: &HomCombination) -> Result<ExactMatrix> {
        let mut acc = ExactMatrix::zeros(self.algebra(combo.target()).dim(), self.algebra(combo.source()).dim());
        for (c, h) in combo.terms() {
            acc = acc.try_add(&self.map(h)?.scale(c))?;
        }
        Ok(acc)
    }

    fn label(&self) -> String {
        "functor".into()
    }
}

fn check_level(f: &dyn OpaqueFunctor, n: usize) -> Result<()> {
    if n > f.n_max() {
        Err(Error::LevelOverflow { needed: n, n_max: f.n_max() })
    } else {
        Ok(())
    }
}

/// 𝔊^𝔅: Λℝⁿ ↦ Λℝⁿ ⊗ 𝔅 with 𝔊χ = χ ⊗ id and ι(η) = η ⊗ 1.
pub struct ModelFunctor {
    base: StructureConstantAlgebra,
    algebras: Vec<StructureConstantAlgebra>,
    embeddings: Vec<ExactMatrix>,
}

impl ModelFunctor {
    pub fn new(base: StructureConstantAlgebra, n_max: usize) -> Self {
        let algebras: Vec<_> = (0..=n_max).map(|n| graded_tensor(n, &base)).collect();
        let db = base.dim();
        let embeddings = (0..=n_max)
            .map(|n| {
                let mut m = ExactMatrix::zeros((1 << n) * db, 1 << n);
                for s in 0..1usize << n {
                    for (k, c) in base.unit().iter().enumerate() {
                        m.set(s * db + k, s, c.clone());
                    }
                }
                m
            })
            .collect();
        Self { base, algebras, embeddings }
    }

    pub fn base(&self) -> &StructureConstantAlgebra {
        &self.base
    }

    /// Coordinates of η_I ⊗ b in Λℝⁿ ⊗ 𝔅.
    pub fn pure(&self, n: usize, i: Subset, b: &[C]) -> Vec<C> {
        let db = self.base.dim();
        let mut v = vec::zeros((1 << n) * db);
        for (k, c) in b.iter().enumerate() {
            v[i as usize * db + k] = c.clone();
        }
        v
    }
}

impl OpaqueFunctor for ModelFunctor {
    fn n_max(&self) -> usize {
        self.algebras.len() - 1
    }

    fn algebra(&self, n: usize) -> &StructureConstantAlgebra {
        &self.algebras[n]
    }

    fn embedding(&self, n: usize) -> &ExactMatrix {
        &self.embeddings[n]
    }

    fn map(&self, chi: &GrassmannHom) -> Result<ExactMatrix> {
        check_level(self, chi.source())?;
        check_level(self, chi.target())?;
        let db = self.base.dim();
        let mut m = ExactMatrix::zeros((1 << chi.target()) * db, (1 << chi.source()) * db);
        for s in 0..1u32 << chi.source() {
            let img = chi.apply_basis(s);
            for (t, c) in img.terms() {
                for k in 0..db {
                    m.set(t as usize * db + k, s as usize * db + k, c.clone());
                }
            }
        }
        Ok(m)
    }

    fn label(&self) -> String {
        format!("model functor over a {}-dimensional algebra", self.base.dim())
    }
}

/// G ↦ G ⊗ G with χ ↦ χ ⊗ χ: natural and graded-central but not linear in χ.
pub struct TensorSquareFunctor {
    algebras: Vec<StructureConstantAlgebra>,
    embeddings: Vec<ExactMatrix>,
}

impl TensorSquareFunctor {
    pub fn new(n_max: usize) -> Self {
        let algebras: Vec<_> =
            (0..=n_max).map(|n| graded_tensor(n, &StructureConstantAlgebra::grassmann(n))).collect();
        let embeddings = (0..=n_max)
            .map(|n| {
                let g = 1usize << n;
                let mut m = ExactMatrix::zeros(g * g, g);
                for s in 0..g {
                    m.set(s * g, s, C::one());
                }
                m
            })
            .collect();
        Self { algebras, embeddings }
    }
}

impl OpaqueFunctor for TensorSquareFunctor {
    fn n_max(&self) -> usize {
        self.algebras.len() - 1
    }

    fn algebra(&self, n: usize) -> &StructureConstantAlgebra {
        &self.algebras[n]
    }

    fn embedding(&self, n: usize) -> &ExactMatrix {
        &self.embeddings[n]
    }

    fn map(&self, chi: &GrassmannHom) -> Result<ExactMatrix> {
        check_level(self, chi.source())?;
        check_level(self, chi.target())?;
        let (gs, gt) = (1usize << chi.source(), 1usize << chi.target());
        let cols: Vec<GrassmannElement> = (0..gs as Subset).map(|s| chi.apply_basis(s)).collect();
        let mut m = ExactMatrix::zeros(gt * gt, gs * gs);
        for a in 0..gs {
            for b in 0..gs {
                for (x, c) in cols[a].terms() {
                    for (y, d) in cols[b].terms() {
                        m.set(x as usize * gt + y as usize, a * gs + b, c * d);
                    }
                }
            }
        }
        Ok(m)
    }

    fn label(&self) -> String {
        "tensor-square functor G ⊗ G".into()
    }
}

/// The finite generating set of homs Λℝⁿ → Λℝⁿ used by the validator and descriptors:
/// adjacent transpositions, projections P_K, and scalings with λ ∈ {0,1,2}ⁿ.
pub fn generating_homs(n: usize) -> Vec<GrassmannHom> {
    let mut out = Vec::new();
    for k in 1..n {
        let mut perm: Vec<usize> = (1..=n).collect();
        perm.swap(k - 1, k);
        out.push(GrassmannHom::permutation(&perm).expect("transposition"));
    }
    for k in 0..1u32 << n {
        out.push(GrassmannHom::projection(n, k));
    }
    let mut lam = vec![0usize; n];
    loop {
        if lam.contains(&2) {
            out.push(GrassmannHom::scaling(&lam.iter().map(|&l| C::from_int(l as i64)).collect::<Vec<_>>()));
        }
        let Some(p) = lam.iter().position(|&l| l < 2) else { break };
        lam[p] += 1;
        for l in &mut lam[..p] {
            *l = 0;
        }
    }
    out
}

/// Homs between different levels needed by the reconstruction: block embeddings
/// χ^N_J and block restrictions χ_N^J for all `J ⊆ {1..N}`.
pub fn level_changing_homs(big_n: usize) -> Vec<GrassmannHom> {
    let mut out = Vec::new();
    for j in 0..1u32 << big_n {
        out.push(GrassmannHom::block_embedding(big_n, j));
        out.push(GrassmannHom::block_restriction(big_n, j));
    }
    out
}

/// JSON bundle: algebra and embedding per level plus 𝔊χ tables for listed homs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctorDescriptor {
    pub levels: Vec<LevelDescriptor>,
    pub homs: Vec<HomDescriptor>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelDescriptor {
    pub algebra: AlgebraDescriptor,
    /// Columns are the images of the Λℝⁿ basis in subset-mask order.
    pub embedding: ExactMatrix,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomDescriptor {
    pub source: usize,
    pub target: usize,
    /// Generator images in Grassmann text syntax.
    pub images: Vec<String>,
    pub matrix: ExactMatrix,
}

/// A functor read from a [`FunctorDescriptor`]; `map` works for listed homs only.
pub struct TableFunctor {
    algebras: Vec<StructureConstantAlgebra>,
    embeddings: Vec<ExactMatrix>,
    table: HashMap<GrassmannHom, ExactMatrix>,
}

impl TableFunctor {
    pub fn from_descriptor(desc: FunctorDescriptor) -> Result<Self> {
        let mut algebras = Vec::new();
        let mut embeddings = Vec::new();
        for (n, lvl) in desc.levels.into_iter().enumerate() {
            let alg = StructureConstantAlgebra::from_descriptor(lvl.algebra)
                .map_err(|e| Error::Invalid(format!("levels[{n}].algebra: {e}")))?;
            if lvl.embedding.rows() != alg.dim() || lvl.embedding.cols() != 1 << n {
                return Err(Error::Dimension(format!("levels[{n}].embedding has the wrong shape")));
            }
            algebras.push(alg);
            embeddings.push(lvl.embedding);
        }
        let mut table = HashMap::new();
        for (k, h) in desc.homs.into_iter().enumerate() {
            let images = h
                .images
                .iter()
                .map(|s| parse_element(h.target, s))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Invalid(format!("homs[{k}].images: {e}")))?;
            let hom = GrassmannHom::new(h.source, h.target, images)
                .map_err(|e| Error::Invalid(format!("homs[{k}]: {e}")))?;
            table.insert(hom, h.matrix);
        }
        Ok(Self { algebras, embeddings, table })
    }

    /// Tabulates `f` on the generating set and the level-changing homs.
    pub fn describe(f: &dyn OpaqueFunctor) -> Result<FunctorDescriptor> {
        let levels = (0..=f.n_max())
            .map(|n| LevelDescriptor { algebra: f.algebra(n).to_descriptor(), embedding: f.embedding(n).clone() })
            .collect();
        let mut homs = Vec::new();
        for n in 0..=f.n_max() {
            for h in generating_homs(n).into_iter().chain(level_changing_homs(n)) {
                homs.push(HomDescriptor {
                    source: h.source(),
                    target: h.target(),
                    images: h.images().iter().map(ToString::to_string).collect(),
                    matrix: f.map(&h)?,
                });
            }
        }
        Ok(FunctorDescriptor { levels, homs })
    }
}

impl OpaqueFunctor for TableFunctor {
    fn n_max(&self) -> usize {
        self.algebras.len().saturating_sub(1)
    }

    fn algebra(&self, n: usize) -> &StructureConstantAlgebra {
        &self.algebras[n]
    }

    fn embedding(&self, n: usize) -> &ExactMatrix {
        &self.embeddings[n]
    }

    fn map(&self, chi: &GrassmannHom) -> Result<ExactMatrix> {
        check_level(self, chi.source())?;
        check_level(self, chi.target())?;
        if let Some(m) = self.table.get(chi) {
            return Ok(m.clone());
        }
        if *chi == GrassmannHom::identity(chi.source()) {
            return Ok(ExactMatrix::identity(self.algebras[chi.source()].dim()));
        }
        let imgs: Vec<String> = chi.images().iter().map(ToString::to_string).collect();
        Err(Error::Invalid(format!("functor table has no entry for hom with images {imgs:?}")))
    }

    fn label(&self) -> String {
        "tabulated functor".into()
    }
}

/// Settings for [`validate_functor`].
#[derive(Clone, Debug)]
pub struct FunctorValidation {
    /// Highest level at which the per-level axioms are checked.
    pub max_level: usize,
    /// Highest level at which linear relations among homs are enumerated.
    pub linearity_level: usize,
    /// Random basis pairs per multiplicativity check; `None` for exhaustive.
    pub samples: Option<usize>,
    pub seed: u64,
}

impl Default for FunctorValidation {
    fn default() -> Self {
        Self { max_level: 2, linearity_level: 2, samples: None, seed: 0 }
    }
}

fn flatten(m: &ExactMatrix) -> Vec<C> {
    m.to_rows().into_iter().flatten().collect()
}

/// Checks the functor axioms: algebra axioms, ι is a graded *-hom, graded centrality,
/// 𝔊χ are graded unital homs, naturality, functoriality, and linearity in χ.
pub fn validate_functor(f: &dyn OpaqueFunctor, opts: &FunctorValidation) -> Verdict {
    let mut v = Verdict::new();
    let mut rng: rand_chacha::ChaCha8Rng = rand::SeedableRng::seed_from_u64(opts.seed);
    let top = opts.max_level.min(f.n_max());
    for n in 0..=top {
        let alg = f.algebra(n);
        let g = StructureConstantAlgebra::grassmann(n);
        v.merge(match opts.samples {
            None => alg.validate(None),
            Some(k) => alg.validate(Some((&mut rng, k))),
        });
        v.merge(check_homomorphism(f.embedding(n), &g, alg, HomCheck::exhaustive(true)));
        // Graded centrality: ι(η_i) a = (−1)^{dg a} a ι(η_i).
        for i in 1..=n {
            let eta = f.embedding(n).column(1 << (i - 1));
            for k in 0..alg.dim() {
                let a = alg.basis(k);
                let l = alg.mul(&eta, &a);
                let mut r = alg.mul(&a, &eta);
                if alg.degree(k) == 1 {
                    r = vec::scale(&r, &C::from_int(-1));
                }
                v.check("graded_centrality", l == r, || format!("level {n}, η{i} against {}", alg.labels()[k]));
            }
        }
        let homs = generating_homs(n);
        for chi in homs.iter().chain(level_changing_homs(n).iter()) {
            let m = match f.map(chi) {
                Ok(m) => m,
                Err(e) => {
                    v.fail("functor_map", format!("{e}"));
                    continue;
                }
            };
            let (src, dst) = (f.algebra(chi.source()), f.algebra(chi.target()));
            let mut hv = match opts.samples {
                None => check_homomorphism(&m, src, dst, HomCheck::exhaustive(false)),
                Some(k) => check_homomorphism(&m, src, dst, HomCheck { sample: Some((&mut rng, k)), check_star: false }),
            };
            for fl in &mut hv.failures {
                fl.counterexample = format!("{} for hom {:?}: {}", fl.op, chi.images(), fl.counterexample);
            }
            v.merge(hv);
            // Naturality: 𝔊χ ∘ ι = ι ∘ χ.
            let lhs = m.try_mul(f.embedding(chi.source()));
            let rhs = f.embedding(chi.target()).try_mul(&hom_matrix(chi));
            v.check("naturality", matches!((&lhs, &rhs), (Ok(a), Ok(b)) if a == b), || {
                format!("hom with images {:?}", chi.images())
            });
        }
        // Functoriality on random composable pairs from the generating set.
        for _ in 0..homs.len().min(12) {
            let a = &homs[rng.gen_range(0..homs.len())];
            let b = &homs[rng.gen_range(0..homs.len())];
            let Ok(ab) = a.compose(b) else { continue };
            let (Ok(ma), Ok(mb), Ok(mab)) = (f.map(a), f.map(b), f.map(&ab)) else { continue };
            v.check("functoriality", ma.try_mul(&mb).ok().as_ref() == Some(&mab), || {
                format!("homs {:?} after {:?}", a.images(), b.images())
            });
        }
    }
    v.merge(check_linearity(f, opts.linearity_level.min(f.n_max())));
    v
}

/// Σλᵢχᵢ = 0 ⇒ Σλᵢ𝔊χᵢ = 0 over a basis of the relations among the generating homs of each level.
pub fn check_linearity(f: &dyn OpaqueFunctor, max_level: usize) -> Verdict {
    let mut v = Verdict::new();
    for n in 0..=max_level {
        let homs = generating_homs(n);
        let maps: Vec<Vec<C>> = homs.iter().map(|h| flatten(&hom_matrix(h))).collect();
        let rows = maps[0].len();
        let a = ExactMatrix::from_fn(rows, homs.len(), |i, j| maps[j][i].clone());
        for rel in a.null_space() {
            let mut acc: Option<ExactMatrix> = None;
            let mut ok = true;
            for (lam, h) in rel.iter().zip(&homs) {
                if lam.is_zero() {
                    continue;
                }
                let Ok(m) = f.map(h) else {
                    ok = false;
                    break;
                };
                let term = m.scale(lam);
                acc = Some(match acc {
                    None => term,
                    Some(x) => x.try_add(&term).expect("same shape"),
                });
            }
            if !ok {
                continue;
            }
            let sum_zero = acc.is_none_or(|m| m.is_zero());
            v.check("linearity", sum_zero, || {
                let terms: Vec<String> = rel
                    .iter()
                    .zip(&homs)
                    .filter(|(l, _)| !l.is_zero())
                    .map(|(l, h)| format!("{l}·{:?}", h.images()))
                    .collect();
                format!("level {n}: Σλχ = 0 but Σλ𝔊χ ≠ 0 for {}", terms.join(" + "))
            });
        }
    }
    v
}

/// Matrix of a hom on Λℝⁿ coordinates (subset-mask order).
pub fn hom_matrix(chi: &GrassmannHom) -> ExactMatrix {
    let mut m = ExactMatrix::zeros(1 << chi.target(), 1 << chi.source());
    for s in 0..1u32 << chi.source() {
        for (t, c) in chi.apply_basis(s).terms() {
            m.set(t as usize, s as usize, c.clone());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_functor_validates() {
        let f = ModelFunctor::new(StructureConstantAlgebra::graded_matrices_2x2(), 2);
        let v = validate_functor(&f, &FunctorValidation::default());
        assert!(v.passed(), "{:?}", v.first_failure());
        assert!(v.attempted > 100);
    }

    #[test]
    fn tensor_square_fails_only_linearity() {
        let f = TensorSquareFunctor::new(2);
        let v = validate_functor(&f, &FunctorValidation::default());
        assert!(!v.passed());
        assert!(v.failures.iter().all(|fl| fl.op == "linearity"), "{:?}", v.failures);
    }

    #[test]
    fn table_functor_round_trip() {
        let f = ModelFunctor::new(StructureConstantAlgebra::grassmann(1), 2);
        let desc = TableFunctor::describe(&f).unwrap();
        let json = serde_json::to_string(&desc).unwrap();
        let t = TableFunctor::from_descriptor(serde_json::from_str(&json).unwrap()).unwrap();
        let v = validate_functor(&t, &FunctorValidation::default());
        assert!(v.passed(), "{:?}", v.first_failure());
        let odd = GrassmannHom::new(1, 2, vec![parse_element(2, "n[1]").unwrap()]).unwrap();
        assert_eq!(t.map(&odd).unwrap(), f.map(&odd).unwrap());
    }
}
