//! Finite causal Dirac models and the CAR algebra they generate.
//!
//! A model is typed: configurations (fields) live on integer time slices `0..=T`, test
//! sections (sources) on the half-integer slices between them. The Dirac operator maps
//! fields to sections and its retarded and advanced inverses map back. A field is
//! compact when it vanishes on the first and last slice; on compact fields `D` is
//! hermitian for the pairing `⟨s, h⟩ = s† Π h`.
//!
//! The builtin lattice is a Dirac quantum walk: one time step is `W = B·A` with a
//! rational coin `A` and a chirality-dependent shift `B`, and
//! `(Dh)(t+½) = iΓ₀⁻¹(B⁻¹h(t+1) − A h(t))`.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::grassmann::{merge_sign, reversal_sign, signed, GrassmannElement, Subset};
use crate::scalar::{q, vec as cvec, ExactMatrix, PsdVerdict, C, Q};
use crate::verdict::Verdict;
use crate::{Error, Result};

/// Spinor components per lattice site.
pub const SPINOR_RANK: usize = 2;
/// Largest number of independent CAR modes an algebra may have.
pub const MAX_MODES: usize = 12;

fn mm(a: &ExactMatrix, b: &ExactMatrix) -> ExactMatrix {
    a.try_mul(b).expect("shapes checked by construction")
}

fn mv(a: &ExactMatrix, v: &[C]) -> Vec<C> {
    a.mul_vec(v).expect("shapes checked by construction")
}

/// `u† v`.
fn dot(u: &[C], v: &[C]) -> C {
    u.iter().zip(v).fold(C::zero(), |acc, (a, b)| acc + a.conj() * b)
}

/// A space-time point; `tau` counts half time steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub tau: i64,
    pub site: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CausalOrder {
    /// `p ≼ q` iff `tau_p ≤ tau_q` and the periodic site distance is at most `tau_q − tau_p`.
    LightCone { sites: usize },
    /// Explicit relation on unified point ids (fields first, then sources); reflexive
    /// pairs are implied.
    Explicit(BTreeSet<(usize, usize)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinusSplit {
    /// `S⁻ = ½·iS`, splitting the commutator kernel evenly between `S⁺` and `S⁻`.
    Symmetric,
    /// `S⁻ = 0`, so `S⁺ = iS` and the Feynman kernel is `iS_R`.
    Zero,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeParams {
    pub steps: usize,
    pub sites: usize,
    pub mass: Q,
    pub split: MinusSplit,
}

impl LatticeParams {
    pub fn new(steps: usize, sites: usize, mass: Q) -> Self {
        Self { steps, sites, mass, split: MinusSplit::Symmetric }
    }

    /// Parses `lattice:T=<n>,L=<n>[,m=<p/q>][,split=symmetric|zero]`; the mass defaults to 1/2.
    pub fn parse(spec: &str) -> Result<Self> {
        let body = spec
            .strip_prefix("lattice:")
            .ok_or_else(|| Error::Parse(format!("model spec `{spec}` must start with `lattice:`")))?;
        let mut steps = None;
        let mut sites = None;
        let mut mass = None;
        let mut split = MinusSplit::Symmetric;
        for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("`{part}` in `{spec}` is not key=value")))?;
            let bad = |what: &str| Error::Parse(format!("bad {what} `{v}` in `{spec}`"));
            match k {
                "T" => steps = Some(v.parse::<usize>().map_err(|_| bad("T"))?),
                "L" => sites = Some(v.parse::<usize>().map_err(|_| bad("L"))?),
                "m" => mass = Some(v.parse::<Q>().map_err(|_| bad("mass"))?),
                "split" => {
                    split = match v {
                        "symmetric" => MinusSplit::Symmetric,
                        "zero" => MinusSplit::Zero,
                        _ => return Err(bad("split")),
                    }
                }
                _ => return Err(Error::Parse(format!("unknown key `{k}` in `{spec}`"))),
            }
        }
        let params = Self {
            steps: steps.ok_or_else(|| Error::Parse(format!("`{spec}` lacks T")))?,
            sites: sites.ok_or_else(|| Error::Parse(format!("`{spec}` lacks L")))?,
            mass: mass.unwrap_or_else(|| q(1, 2)),
            split,
        };
        if params.steps == 0 || params.sites == 0 {
            return Err(Error::Invalid(format!("`{spec}` needs T ≥ 1 and L ≥ 1")));
        }
        Ok(params)
    }
}

impl fmt::Display for LatticeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lattice:T={},L={},m={}", self.steps, self.sites, self.mass)?;
        if self.split == MinusSplit::Zero {
            write!(f, ",split=zero")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalDiracModel {
    pub label: String,
    /// Components per point.
    pub rank: usize,
    pub field_points: Vec<Point>,
    pub source_points: Vec<Point>,
    pub order: CausalOrder,
    /// Slice metric Γ₀; enters through the pairing and the Dirac operator.
    pub gamma: ExactMatrix,
    /// Π, sources × fields.
    pub pairing: ExactMatrix,
    /// D, sources × fields.
    pub dirac: ExactMatrix,
    /// S_R, fields × sources.
    pub retarded: ExactMatrix,
    /// S_A, fields × sources.
    pub advanced: ExactMatrix,
    /// S⁻, fields × sources.
    pub s_minus: ExactMatrix,
}

/// Per-slice blocks of the quantum walk.
struct Walk {
    n: usize,
    coin: ExactMatrix,
    shift: ExactMatrix,
    gamma: ExactMatrix,
}

impl Walk {
    fn new(sites: usize, mass: &Q) -> Self {
        let n = sites * SPINOR_RANK;
        let one = q(1, 1);
        let m2 = mass * mass;
        let den = &one + &m2;
        let c = C::real((&one - &m2) / &den);
        let s = C::real((mass * q(2, 1)) / &den);
        let off = -(C::i() * &s);
        let coin = ExactMatrix::from_fn(n, n, |i, j| {
            if i / SPINOR_RANK != j / SPINOR_RANK {
                return C::zero();
            }
            if i % SPINOR_RANK == j % SPINOR_RANK {
                c.clone()
            } else {
                off.clone()
            }
        });
        // component 0 moves to the right, component 1 to the left
        let shift = ExactMatrix::from_fn(n, n, |i, j| {
            let (xi, ci) = (i / SPINOR_RANK, i % SPINOR_RANK);
            let (xj, cj) = (j / SPINOR_RANK, j % SPINOR_RANK);
            let from = if ci == 0 { (xi + sites - 1) % sites } else { (xi + 1) % sites };
            if ci == cj && xj == from {
                C::one()
            } else {
                C::zero()
            }
        });
        let gamma = ExactMatrix::from_fn(n, n, |i, j| {
            if i / SPINOR_RANK == j / SPINOR_RANK && i % SPINOR_RANK != j % SPINOR_RANK {
                C::one()
            } else {
                C::zero()
            }
        });
        Self { n, coin, shift, gamma }
    }
}

fn place(target: &mut ExactMatrix, r0: usize, c0: usize, block: &ExactMatrix) {
    for i in 0..block.rows() {
        for j in 0..block.cols() {
            target.set(r0 + i, c0 + j, block.get(i, j).clone());
        }
    }
}

impl CausalDiracModel {
    pub fn lattice(p: &LatticeParams) -> Result<Self> {
        if p.steps == 0 || p.sites == 0 {
            return Err(Error::Invalid("lattice needs T ≥ 1 and L ≥ 1".into()));
        }
        let w = Walk::new(p.sites, &p.mass);
        let (n, t) = (w.n, p.steps);
        let (df, ds) = ((t + 1) * n, t * n);
        let half = C::frac(1, 2);
        let shift_inv = w.shift.adjoint();
        let gamma_inv = w.gamma.inverse()?;
        let step = mm(&w.shift, &w.coin);
        let step_inv = step.adjoint();

        let mut pairing = ExactMatrix::zeros(ds, df);
        let mut dirac = ExactMatrix::zeros(ds, df);
        let pa = mm(&w.gamma, &w.coin).scale(&half);
        let pb = mm(&w.gamma, &shift_inv).scale(&half);
        let da = mm(&gamma_inv, &w.coin).scale(&-C::i());
        let db = mm(&gamma_inv, &shift_inv).scale(&C::i());
        for s in 0..t {
            place(&mut pairing, s * n, s * n, &pa);
            place(&mut pairing, s * n, (s + 1) * n, &pb);
            place(&mut dirac, s * n, s * n, &da);
            place(&mut dirac, s * n, (s + 1) * n, &db);
        }

        // h(t+1) = W h(t) − iBΓ₀ f(t+½), started from h(0) = 0 or h(T) = 0
        let inject = mm(&w.shift, &w.gamma).scale(&C::i());
        let mut retarded = ExactMatrix::zeros(df, ds);
        let mut advanced = ExactMatrix::zeros(df, ds);
        for j in 0..ds {
            let (s, k) = (j / n, j % n);
            let kick = inject.column(k);
            let mut h = cvec::zeros(n);
            for tt in s..t {
                h = if tt == s { cvec::scale(&kick, &-C::one()) } else { mv(&step, &h) };
                for (i, v) in h.iter().enumerate() {
                    retarded.set((tt + 1) * n + i, j, v.clone());
                }
            }
            let mut h = mv(&step_inv, &kick);
            for tt in (0..=s).rev() {
                if tt < s {
                    h = mv(&step_inv, &h);
                }
                for (i, v) in h.iter().enumerate() {
                    advanced.set(tt * n + i, j, v.clone());
                }
            }
        }
        let s_minus = match p.split {
            MinusSplit::Zero => ExactMatrix::zeros(df, ds),
            MinusSplit::Symmetric => retarded.try_sub(&advanced)?.scale(&(C::i() * &half)),
        };
        let field_points = (0..=t)
            .flat_map(|tt| (0..p.sites).map(move |x| Point { tau: 2 * tt as i64, site: x }))
            .collect();
        let source_points = (0..t)
            .flat_map(|tt| (0..p.sites).map(move |x| Point { tau: 2 * tt as i64 + 1, site: x }))
            .collect();
        Ok(Self {
            label: p.to_string(),
            rank: SPINOR_RANK,
            field_points,
            source_points,
            order: CausalOrder::LightCone { sites: p.sites },
            gamma: w.gamma,
            pairing,
            dirac,
            retarded,
            advanced,
            s_minus,
        })
    }

    pub fn from_spec(spec: &str) -> Result<Self> {
        Self::lattice(&LatticeParams::parse(spec)?)
    }

    pub fn field_dim(&self) -> usize {
        self.field_points.len() * self.rank
    }

    pub fn source_dim(&self) -> usize {
        self.source_points.len() * self.rank
    }

    /// Unified id of the point carrying field coordinate `a`.
    pub fn field_point(&self, a: usize) -> usize {
        a / self.rank
    }

    /// Unified id of the point carrying source coordinate `b`.
    pub fn source_point(&self, b: usize) -> usize {
        self.field_points.len() + b / self.rank
    }

    pub fn point(&self, unified: usize) -> Point {
        let nf = self.field_points.len();
        if unified < nf {
            self.field_points[unified]
        } else {
            self.source_points[unified - nf]
        }
    }

    pub fn point_count(&self) -> usize {
        self.field_points.len() + self.source_points.len()
    }

    pub fn precedes(&self, p: usize, q: usize) -> bool {
        if p == q {
            return true;
        }
        match &self.order {
            CausalOrder::Explicit(pairs) => pairs.contains(&(p, q)),
            CausalOrder::LightCone { sites } => {
                let (a, b) = (self.point(p), self.point(q));
                if a.tau > b.tau {
                    return false;
                }
                let d = a.site.abs_diff(b.site);
                let d = d.min(sites - d.min(*sites));
                d as i64 <= b.tau - a.tau
            }
        }
    }

    /// Field coordinates strictly inside the time range (compact directions).
    pub fn compact_coords(&self) -> Vec<usize> {
        let lo = self.field_points.iter().map(|p| p.tau).min().unwrap_or(0);
        let hi = self.field_points.iter().map(|p| p.tau).max().unwrap_or(0);
        (0..self.field_dim())
            .filter(|&a| {
                let tau = self.field_points[a / self.rank].tau;
                tau > lo && tau < hi
            })
            .collect()
    }

    pub fn compact_basis(&self) -> Vec<Vec<C>> {
        self.compact_coords().into_iter().map(|a| cvec::unit(self.field_dim(), a)).collect()
    }

    pub fn is_compact(&self, h: &[C]) -> bool {
        let keep: BTreeSet<usize> = self.compact_coords().into_iter().collect();
        h.iter().enumerate().all(|(a, v)| v.is_zero() || keep.contains(&a))
    }

    /// `⟨s, h⟩ = s† Π h` for a section `s` and a field `h`.
    pub fn pair(&self, s: &[C], h: &[C]) -> C {
        dot(s, &mv(&self.pairing, h))
    }

    pub fn apply_dirac(&self, h: &[C]) -> Vec<C> {
        mv(&self.dirac, h)
    }

    pub fn apply_retarded(&self, f: &[C]) -> Vec<C> {
        mv(&self.retarded, f)
    }

    /// Source points where some component of `f` is nonzero (unified ids).
    pub fn source_support(&self, f: &[C]) -> BTreeSet<usize> {
        (0..f.len()).filter(|&b| !f[b].is_zero()).map(|b| self.source_point(b)).collect()
    }

    pub fn field_support(&self, h: &[C]) -> BTreeSet<usize> {
        (0..h.len()).filter(|&a| !h[a].is_zero()).map(|a| self.field_point(a)).collect()
    }

    /// J⁻ of a set of unified points.
    pub fn causal_past(&self, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        (0..self.point_count()).filter(|&p| set.iter().any(|&q| self.precedes(p, q))).collect()
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        let pts = |v: &[Point], offset: usize| {
            v.iter()
                .enumerate()
                .map(|(i, p)| PointDescriptor {
                    id: offset + i,
                    time: (Q::from_integer(p.tau.into()) / q(2, 1)).to_string(),
                    site: p.site,
                })
                .collect()
        };
        let order = match &self.order {
            CausalOrder::LightCone { sites } => OrderDescriptor::LightCone { lightcone: *sites },
            CausalOrder::Explicit(pairs) => OrderDescriptor::Pairs { pairs: pairs.iter().copied().collect() },
        };
        ModelDescriptor {
            label: self.label.clone(),
            rank: self.rank,
            field_points: pts(&self.field_points, 0),
            source_points: pts(&self.source_points, self.field_points.len()),
            order,
            gamma: self.gamma.clone(),
            pairing: self.pairing.clone(),
            dirac: self.dirac.clone(),
            retarded: self.retarded.clone(),
            advanced: self.advanced.clone(),
            s_minus: self.s_minus.clone(),
        }
    }

    pub fn from_descriptor(d: &ModelDescriptor) -> Result<Self> {
        let pts = |v: &[PointDescriptor], offset: usize, what: &str| -> Result<Vec<Point>> {
            v.iter()
                .enumerate()
                .map(|(i, p)| {
                    if p.id != offset + i {
                        return Err(Error::Parse(format!("{what} point {i} has id {}, expected {}", p.id, offset + i)));
                    }
                    let t: Q = p
                        .time
                        .parse()
                        .map_err(|_| Error::Parse(format!("{what} point {}: bad time `{}`", p.id, p.time)))?;
                    let tau = t * q(2, 1);
                    if !tau.is_integer() {
                        return Err(Error::Parse(format!("{what} point {}: time must be a multiple of 1/2", p.id)));
                    }
                    let tau = i64::try_from(tau.to_integer())
                        .map_err(|_| Error::Parse(format!("{what} point {}: time out of range", p.id)))?;
                    Ok(Point { tau, site: p.site })
                })
                .collect()
        };
        let field_points = pts(&d.field_points, 0, "field")?;
        let source_points = pts(&d.source_points, field_points.len(), "source")?;
        let order = match &d.order {
            OrderDescriptor::LightCone { lightcone } => CausalOrder::LightCone { sites: *lightcone },
            OrderDescriptor::Pairs { pairs } => CausalOrder::Explicit(pairs.iter().copied().collect()),
        };
        let m = Self {
            label: d.label.clone(),
            rank: d.rank,
            field_points,
            source_points,
            order,
            gamma: d.gamma.clone(),
            pairing: d.pairing.clone(),
            dirac: d.dirac.clone(),
            retarded: d.retarded.clone(),
            advanced: d.advanced.clone(),
            s_minus: d.s_minus.clone(),
        };
        m.check_shapes()?;
        Ok(m)
    }

    fn check_shapes(&self) -> Result<()> {
        let (df, ds) = (self.field_dim(), self.source_dim());
        let want = [
            ("pairing", &self.pairing, ds, df),
            ("dirac", &self.dirac, ds, df),
            ("retarded", &self.retarded, df, ds),
            ("advanced", &self.advanced, df, ds),
            ("s_minus", &self.s_minus, df, ds),
        ];
        for (name, m, r, c) in want {
            if m.rows() != r || m.cols() != c {
                return Err(Error::Dimension(format!("{name} is {}x{}, expected {r}x{c}", m.rows(), m.cols())));
            }
        }
        if !self.gamma.is_square() {
            return Err(Error::Dimension("gamma must be square".into()));
        }
        if let CausalOrder::LightCone { sites } = self.order {
            if sites == 0 || self.field_points.iter().chain(&self.source_points).any(|p| p.site >= sites) {
                return Err(Error::Invalid("light-cone order needs every site below the site count".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointDescriptor {
    pub id: usize,
    /// Rational time in scalar syntax, e.g. `3/2`.
    pub time: String,
    pub site: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderDescriptor {
    /// Light cone on a periodic chain with the given number of sites.
    LightCone { lightcone: usize },
    /// Explicit `(earlier, later)` pairs of unified point ids.
    Pairs { pairs: Vec<(usize, usize)> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub label: String,
    pub rank: usize,
    pub field_points: Vec<PointDescriptor>,
    pub source_points: Vec<PointDescriptor>,
    pub order: OrderDescriptor,
    #[serde(rename = "Gamma")]
    pub gamma: ExactMatrix,
    #[serde(rename = "Pi")]
    pub pairing: ExactMatrix,
    #[serde(rename = "D")]
    pub dirac: ExactMatrix,
    #[serde(rename = "S_R")]
    pub retarded: ExactMatrix,
    #[serde(rename = "S_A")]
    pub advanced: ExactMatrix,
    #[serde(rename = "S_minus")]
    pub s_minus: ExactMatrix,
}

fn first_nonzero(m: &ExactMatrix, mut keep: impl FnMut(usize, usize) -> bool) -> Option<(usize, usize)> {
    (0..m.rows()).flat_map(|i| (0..m.cols()).map(move |j| (i, j))).find(|&(i, j)| keep(i, j) && !m.get(i, j).is_zero())
}

fn differs(a: &ExactMatrix, b: &ExactMatrix) -> Option<(usize, usize)> {
    (0..a.rows()).flat_map(|i| (0..a.cols()).map(move |j| (i, j))).find(|&(i, j)| a.get(i, j) != b.get(i, j))
}

/// Checks every model axiom exactly; each axiom is one entry of the verdict.
pub fn validate_model(m: &CausalDiracModel) -> Verdict {
    let mut v = Verdict::new();
    if let Err(e) = m.check_shapes() {
        v.fail("shapes", e.to_string());
        return v;
    }
    v.check("gamma_hermitian", m.gamma.is_hermitian(), || format!("Gamma = {:?}", m.gamma.to_rows()));
    v.check("gamma_invertible", m.gamma.inverse().is_ok(), || "Gamma is singular".into());
    let id = ExactMatrix::identity(m.source_dim());
    for (op, inv) in [("retarded_inverse", &m.retarded), ("advanced_inverse", &m.advanced)] {
        let prod = mm(&m.dirac, inv);
        let bad = differs(&prod, &id);
        v.check(op, bad.is_none(), || {
            let (i, j) = bad.unwrap();
            format!("(D·S)[{i}][{j}] = {}", prod.get(i, j))
        });
    }
    let bad = first_nonzero(&m.retarded, |a, b| !m.precedes(m.source_point(b), m.field_point(a)));
    v.check("retardation", bad.is_none(), || {
        let (a, b) = bad.unwrap();
        format!("S_R(x={}, y={}) = {} with y not ≼ x", m.field_point(a), m.source_point(b), m.retarded.get(a, b))
    });
    let bad = first_nonzero(&m.advanced, |a, b| !m.precedes(m.field_point(a), m.source_point(b)));
    v.check("advancement", bad.is_none(), || {
        let (a, b) = bad.unwrap();
        format!("S_A(x={}, y={}) = {} with x not ≼ y", m.field_point(a), m.source_point(b), m.advanced.get(a, b))
    });
    let compact: BTreeSet<usize> = m.compact_coords().into_iter().collect();
    let skew = mm(&m.pairing.adjoint(), &m.dirac).try_sub(&mm(&m.dirac.adjoint(), &m.pairing)).expect("square");
    let bad = first_nonzero(&skew, |a, b| compact.contains(&a) && compact.contains(&b));
    v.check("hermiticity", bad.is_none(), || {
        let (a, b) = bad.unwrap();
        format!("⟨e_{a}, D e_{b}⟩ − ⟨D e_{a}, e_{b}⟩ = {} on compact fields", skew.get(a, b))
    });
    let pr = mm(&m.pairing, &m.retarded);
    let pa = mm(&m.pairing, &m.advanced);
    let bad = differs(&pa, &pr.adjoint());
    v.check("advanced_adjoint", bad.is_none(), || {
        let (i, j) = bad.unwrap();
        format!("⟨e_{i}, S_A e_{j}⟩ = {} but ⟨S_R e_{i}, e_{j}⟩ = {}", pa.get(i, j), pr.get(j, i).conj())
    });
    let ds = mm(&m.dirac, &m.s_minus);
    let bad = first_nonzero(&ds, |_, _| true);
    v.check("s_minus_solution", bad.is_none(), || {
        let (i, j) = bad.unwrap();
        format!("(D·S⁻)[{i}][{j}] = {}", ds.get(i, j))
    });
    let gram = mm(&m.pairing, &m.retarded.try_sub(&m.advanced).expect("same shape")).scale(&C::i());
    match gram.psd_check() {
        Ok(PsdVerdict::PositiveSemidefinite) => v.check("psd", true, String::new),
        Ok(PsdVerdict::Indefinite { witness }) => {
            v.fail("psd", format!("⟨f, iS f⟩ < 0 for f = {}", cvec::show(&witness)));
            false
        }
        Err(e) => {
            v.fail("psd", format!("⟨·, iS·⟩ is not hermitian: {e}"));
            false
        }
    };
    v
}

/// The commutator kernel `S = S_R − S_A` and its Gram matrix `G_ab = ⟨e_a, iS e_b⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutatorKernel {
    /// fields × sources.
    pub kernel: ExactMatrix,
    /// sources × sources, hermitian PSD.
    pub gram: ExactMatrix,
}

pub fn commutator_kernel(m: &CausalDiracModel) -> Result<CommutatorKernel> {
    let v = validate_model(m);
    if let Some(f) = v.first_failure() {
        return Err(Error::Invalid(format!("model `{}` fails {}: {}", m.label, f.op, f.counterexample)));
    }
    let kernel = m.retarded.try_sub(&m.advanced)?;
    let gram = mm(&m.pairing, &kernel).scale(&C::i());
    Ok(CommutatorKernel { kernel, gram })
}

/// One letter of a CAR word over the reduced modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    /// `Ψ*_j`
    Create(usize),
    /// `Ψ_j`
    Annihilate(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewriteOrder {
    Leftmost,
    Rightmost,
}

/// `η_eta · Ψ*_cre · Ψ_ann`, each block ascending.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CarMonomial {
    pub eta: Subset,
    pub cre: u32,
    pub ann: u32,
}

impl CarMonomial {
    pub const ONE: Self = Self { eta: 0, cre: 0, ann: 0 };

    fn field_degree(&self) -> u32 {
        self.cre.count_ones() + self.ann.count_ones()
    }
}

/// Element of `Λ ⊗ CAR` in normal form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CarElement {
    terms: BTreeMap<CarMonomial, C>,
}

impl CarElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(C::one())
    }

    pub fn scalar(c: C) -> Self {
        Self::monomial(CarMonomial::ONE, c)
    }

    pub fn monomial(m: CarMonomial, c: C) -> Self {
        let mut e = Self::zero();
        e.add_term(m, c);
        e
    }

    /// A Grassmann parameter element, embedded as `η ⊗ 1`.
    pub fn from_grassmann(g: &GrassmannElement) -> Self {
        let mut e = Self::zero();
        for (s, c) in g.terms() {
            e.add_term(CarMonomial { eta: s, cre: 0, ann: 0 }, c.clone());
        }
        e
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CarMonomial, &C)> {
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

    pub fn coeff(&self, m: &CarMonomial) -> C {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, m: CarMonomial, c: C) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_default();
        *slot += &c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-C::one()))
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut r = Self::zero();
        for (m, c) in &self.terms {
            r.add_term(*m, c * s);
        }
        r
    }

    /// Coefficient of `η_s` as an element of the CAR factor.
    pub fn parameter_component(&self, s: Subset) -> Self {
        let mut r = Self::zero();
        for (m, c) in &self.terms {
            if m.eta == s {
                r.add_term(CarMonomial { eta: 0, ..*m }, c.clone());
            }
        }
        r
    }

    /// Scalar part in the CAR factor (`cre = ann = ∅`) for every parameter monomial.
    pub fn is_scalar(&self) -> bool {
        self.terms.keys().all(|m| m.cre == 0 && m.ann == 0)
    }

    fn is_nilpotent_shape(&self) -> bool {
        self.terms.keys().all(|m| m.eta != 0)
    }
}

impl fmt::Display for CarElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let show = |mask: u32, base: u32| -> String {
            (0..32).filter(|b| mask >> b & 1 == 1).map(|b| (b + base).to_string()).collect::<Vec<_>>().join(",")
        };
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            if m.eta != 0 {
                write!(f, " * n[{}]", show(m.eta, 1))?;
            }
            if m.cre != 0 {
                write!(f, " * Psi*[{}]", show(m.cre, 0))?;
            }
            if m.ann != 0 {
                write!(f, " * Psi[{}]", show(m.ann, 0))?;
            }
        }
        Ok(())
    }
}

fn sign_of(flip: bool) -> i32 {
    if flip {
        -1
    } else {
        1
    }
}

/// CAR algebra over sections with `{Ψ(s), Ψ(t)*} = ⟨s, G t⟩`, Ψ antilinear. Sections in
/// the kernel of `G` are quotiented out by expressing every section in a basis of
/// independent modes.
#[derive(Debug)]
pub struct CarAlgebra {
    full_gram: ExactMatrix,
    modes: Vec<usize>,
    /// `reduce[a][j]`: coordinate of `e_a` along mode `j` modulo ker G.
    reduce: ExactMatrix,
    gram: ExactMatrix,
    memo: RefCell<HashMap<(u32, u32), Vec<(u32, u32, C)>>>,
}

impl CarAlgebra {
    pub fn new(full_gram: ExactMatrix) -> Result<Self> {
        match full_gram.psd_check()? {
            PsdVerdict::PositiveSemidefinite => {}
            PsdVerdict::Indefinite { witness } => {
                return Err(Error::Invalid(format!("Gram matrix is indefinite along {}", cvec::show(&witness))))
            }
        }
        let modes = full_gram.independent_columns();
        if modes.len() > MAX_MODES {
            return Err(Error::Dimension(format!("{} CAR modes exceed the cap of {MAX_MODES}", modes.len())));
        }
        let r = modes.len();
        let d = full_gram.rows();
        let gram = ExactMatrix::from_fn(r, r, |i, j| full_gram.get(modes[i], modes[j]).clone());
        let rhs = ExactMatrix::from_fn(r, d, |i, a| full_gram.get(modes[i], a).clone());
        let coords = if r == 0 { ExactMatrix::zeros(0, d) } else { gram.solve(&rhs)? };
        let reduce = coords.transpose();
        // every e_a − Σ_j reduce[a][j] e_j must lie in ker G
        let cols = ExactMatrix::from_fn(d, r, |a, j| full_gram.get(a, modes[j]).clone());
        let back = if r == 0 { ExactMatrix::zeros(d, d) } else { mm(&cols, &coords) };
        if back != full_gram {
            return Err(Error::Invalid("Gram matrix columns are not spanned by its pivot columns".into()));
        }
        Ok(Self { full_gram, modes, reduce, gram, memo: RefCell::new(HashMap::new()) })
    }

    /// Gram matrix of the independent modes.
    pub fn gram(&self) -> &ExactMatrix {
        &self.gram
    }

    pub fn full_gram(&self) -> &ExactMatrix {
        &self.full_gram
    }

    /// Section indices chosen as modes.
    pub fn mode_sections(&self) -> &[usize] {
        &self.modes
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn section_dim(&self) -> usize {
        self.full_gram.rows()
    }

    /// Coordinates of a section along the modes, modulo ker G.
    pub fn reduce(&self, s: &[C]) -> Vec<C> {
        (0..self.modes.len())
            .map(|j| s.iter().enumerate().fold(C::zero(), |acc, (a, sa)| acc + sa * self.reduce.get(a, j)))
            .collect()
    }

    /// `Ψ(s) = Σ_j conj(ŝ_j) Ψ_j`.
    pub fn psi(&self, s: &[C]) -> CarElement {
        let mut e = CarElement::zero();
        for (j, c) in self.reduce(s).into_iter().enumerate() {
            e.add_term(CarMonomial { eta: 0, cre: 0, ann: 1 << j }, c.conj());
        }
        e
    }

    /// `Ψ(s)* = Σ_j ŝ_j Ψ*_j`.
    pub fn psi_star(&self, s: &[C]) -> CarElement {
        let mut e = CarElement::zero();
        for (j, c) in self.reduce(s).into_iter().enumerate() {
            e.add_term(CarMonomial { eta: 0, cre: 1 << j, ann: 0 }, c);
        }
        e
    }

    pub fn letter(&self, l: Letter) -> CarElement {
        match l {
            Letter::Create(j) => CarElement::monomial(CarMonomial { eta: 0, cre: 1 << j, ann: 0 }, C::one()),
            Letter::Annihilate(j) => CarElement::monomial(CarMonomial { eta: 0, cre: 0, ann: 1 << j }, C::one()),
        }
    }

    /// Normal form of `Ψ_B Ψ*_C` as `(cre, ann, coeff)` triples.
    fn normal_pair(&self, b: u32, c: u32) -> Vec<(u32, u32, C)> {
        if b == 0 || c == 0 {
            return vec![(c, b, C::one())];
        }
        if let Some(hit) = self.memo.borrow().get(&(b, c)) {
            return hit.clone();
        }
        let top = 31 - b.leading_zeros();
        let rest = b & !(1 << top);
        let mut acc: BTreeMap<(u32, u32), C> = BTreeMap::new();
        let mut push = |k: (u32, u32), v: C| {
            let slot = acc.entry(k).or_default();
            *slot += &v;
        };
        // Ψ_b Ψ*_{c_1}…Ψ*_{c_m} = Σ_k (−1)^{k−1} G_{b c_k} Ψ*_{C∖c_k} + (−1)^m Ψ*_C Ψ_b
        let cs: Vec<u32> = (0..32).filter(|x| c >> x & 1 == 1).collect();
        for (k, &ck) in cs.iter().enumerate() {
            let g = self.gram.get(top as usize, ck as usize);
            if g.is_zero() {
                continue;
            }
            let g = signed(g, sign_of(k % 2 == 1));
            for (cre, ann, co) in self.normal_pair(rest, c & !(1 << ck)) {
                push((cre, ann), &co * &g);
            }
        }
        let flip = cs.len() % 2 == 1;
        for (cre, ann, co) in self.normal_pair(rest, c) {
            push((cre, ann | 1 << top), signed(&co, sign_of(flip)));
        }
        let out: Vec<(u32, u32, C)> =
            acc.into_iter().filter(|(_, v)| !v.is_zero()).map(|((cr, an), v)| (cr, an, v)).collect();
        self.memo.borrow_mut().insert((b, c), out.clone());
        out
    }

    fn mul_monomials(&self, x: &CarMonomial, y: &CarMonomial, out: &mut CarElement, coeff: &C) {
        if x.eta & y.eta != 0 {
            return;
        }
        let mut sign = merge_sign(x.eta, y.eta);
        if (y.eta.count_ones() * x.field_degree()) % 2 == 1 {
            sign = -sign;
        }
        let eta = x.eta | y.eta;
        for (cre, ann, co) in self.normal_pair(x.ann, y.cre) {
            if x.cre & cre != 0 || ann & y.ann != 0 {
                continue;
            }
            let s = sign * merge_sign(x.cre, cre) * merge_sign(ann, y.ann);
            out.add_term(CarMonomial { eta, cre: x.cre | cre, ann: ann | y.ann }, signed(&(coeff * &co), s));
        }
    }

    pub fn mul(&self, a: &CarElement, b: &CarElement) -> CarElement {
        let mut out = CarElement::zero();
        for (x, cx) in &a.terms {
            for (y, cy) in &b.terms {
                self.mul_monomials(x, y, &mut out, &(cx * cy));
            }
        }
        out
    }

    pub fn anticommutator(&self, a: &CarElement, b: &CarElement) -> CarElement {
        self.mul(a, b).add(&self.mul(b, a))
    }

    /// Involution with `(η ⊗ a)* = (−1)^{dg η · dg a} η* ⊗ a*`.
    pub fn adjoint(&self, a: &CarElement) -> CarElement {
        let mut out = CarElement::zero();
        for (m, c) in &a.terms {
            let (p, q, k) = (m.cre.count_ones() as usize, m.ann.count_ones() as usize, m.eta.count_ones() as usize);
            let mut s = reversal_sign(p) * reversal_sign(q) * reversal_sign(k);
            if (k * (p + q)) % 2 == 1 {
                s = -s;
            }
            out.add_term(CarMonomial { eta: m.eta, cre: m.ann, ann: m.cre }, signed(&c.conj(), s));
        }
        out
    }

    /// `exp(a)` for `a` in the ideal generated by the Grassmann parameters.
    pub fn exp(&self, a: &CarElement) -> Result<CarElement> {
        if !a.is_nilpotent_shape() {
            return Err(Error::Invalid("exponent has a parameter-free part".into()));
        }
        let mut sum = CarElement::one();
        let mut power = CarElement::one();
        for k in 1..=(8 * Subset::BITS as i64) {
            power = self.mul(&power, a).scale(&C::frac(1, k));
            if power.is_zero() {
                return Ok(sum);
            }
            sum = sum.add(&power);
        }
        Err(Error::Invalid("exponential series did not terminate".into()))
    }

    /// Normal form of `coeff · word` by local rewriting in the chosen order.
    pub fn normalize_word(&self, coeff: &C, word: &[Letter], order: RewriteOrder) -> CarElement {
        let mut out = CarElement::zero();
        let mut stack = vec![(coeff.clone(), word.to_vec())];
        while let Some((c, w)) = stack.pop() {
            if c.is_zero() {
                continue;
            }
            let positions: Vec<usize> = (0..w.len().saturating_sub(1)).filter(|&i| reducible(w[i], w[i + 1])).collect();
            let pick = match order {
                RewriteOrder::Leftmost => positions.first(),
                RewriteOrder::Rightmost => positions.last(),
            };
            let Some(&i) = pick else {
                let mut m = CarMonomial::ONE;
                for l in &w {
                    match *l {
                        Letter::Create(j) => m.cre |= 1 << j,
                        Letter::Annihilate(j) => m.ann |= 1 << j,
                    }
                }
                out.add_term(m, c);
                continue;
            };
            let (x, y) = (w[i], w[i + 1]);
            let mut swapped = w.clone();
            swapped.swap(i, i + 1);
            match (x, y) {
                (Letter::Annihilate(a), Letter::Create(b)) => {
                    let g = self.gram.get(a, b);
                    if !g.is_zero() {
                        let mut shorter = w.clone();
                        shorter.drain(i..i + 2);
                        stack.push((&c * g, shorter));
                    }
                    stack.push((-c, swapped));
                }
                (Letter::Create(a), Letter::Create(b)) | (Letter::Annihilate(a), Letter::Annihilate(b)) => {
                    if a != b {
                        stack.push((-c, swapped));
                    }
                }
                _ => unreachable!("normal pairs are not reducible"),
            }
        }
        out
    }

    /// Product of letters evaluated with [`CarAlgebra::mul`].
    pub fn word_product(&self, coeff: &C, word: &[Letter]) -> CarElement {
        word.iter().fold(CarElement::scalar(coeff.clone()), |acc, &l| self.mul(&acc, &self.letter(l)))
    }
}

fn reducible(x: Letter, y: Letter) -> bool {
    match (x, y) {
        (Letter::Annihilate(_), Letter::Create(_)) => true,
        (Letter::Create(a), Letter::Create(b)) | (Letter::Annihilate(a), Letter::Annihilate(b)) => a >= b,
        (Letter::Create(_), Letter::Annihilate(_)) => false,
    }
}

/// `Σ_i η_i s^i` with odd Grassmann parameters `η_i` and sections `s^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmearedSection {
    pub terms: Vec<(GrassmannElement, Vec<C>)>,
}

impl SmearedSection {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    /// `Σ_i η_{first+i} s^i` on `n` generators.
    pub fn with_generators(n: usize, first: usize, sections: &[Vec<C>]) -> Self {
        let terms =
            sections.iter().enumerate().map(|(i, s)| (GrassmannElement::generator(n, first + i), s.clone())).collect();
        Self { terms }
    }

    pub fn plus(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Self { terms }
    }

    pub fn parameters(&self) -> Subset {
        self.terms.iter().flat_map(|(g, _)| g.terms().map(|(s, _)| s)).fold(0, |m, s| m | s)
    }

    fn check_odd(&self) -> Result<()> {
        for (g, _) in &self.terms {
            if g.is_zero() || !g.is_odd() {
                return Err(Error::Parity(format!("smearing parameter {g} is not odd")));
            }
        }
        Ok(())
    }
}

/// A validated model together with its commutator kernel and CAR algebra.
#[derive(Debug)]
pub struct QuantizedDirac<'m> {
    model: &'m CausalDiracModel,
    kernel: CommutatorKernel,
    car: CarAlgebra,
}

impl<'m> QuantizedDirac<'m> {
    pub fn new(model: &'m CausalDiracModel) -> Result<Self> {
        let kernel = commutator_kernel(model)?;
        let car = CarAlgebra::new(kernel.gram.clone())?;
        Ok(Self { model, kernel, car })
    }

    pub fn model(&self) -> &CausalDiracModel {
        self.model
    }

    pub fn kernel(&self) -> &CommutatorKernel {
        &self.kernel
    }

    pub fn car(&self) -> &CarAlgebra {
        &self.car
    }

    /// `⟨s, iS t⟩`.
    pub fn gram_form(&self, s: &[C], t: &[C]) -> C {
        self.kernel.gram.form(s, t).expect("section dimension")
    }

    /// `B₁(s) = Ψ(s) − Ψ(s)*`, the η-coefficient of `S(𝔇(ηs)) = 1 + iηB₁(s)`.
    pub fn b1(&self, s: &[C]) -> CarElement {
        self.car.psi(s).sub(&self.car.psi_star(s))
    }

    /// `⟨s, S_R t⟩`.
    fn retarded_form(&self, s: &[C], t: &[C]) -> C {
        self.model.pair(s, &self.model.apply_retarded(t))
    }

    /// `S(𝔇(f))` for linear `f = Σ η_i s^i`: the operator exponential corrected by the
    /// difference between time-ordered and operator contractions,
    /// `exp(i Σ η_i B₁(s^i)) · exp(−Σ_{i,j} η_i η_j Im⟨s^j, S_R s^i⟩)`.
    pub fn toy_smatrix_linear(&self, f: &SmearedSection) -> Result<CarElement> {
        f.check_odd()?;
        let mut x = CarElement::zero();
        for (eta, s) in &f.terms {
            x = x.add(&self.car.mul(&CarElement::from_grassmann(eta), &self.b1(s)));
        }
        let mut corr = CarElement::zero();
        for (ei, si) in &f.terms {
            for (ej, sj) in &f.terms {
                let im = self.retarded_form(sj, si).im.clone();
                if im == q(0, 1) {
                    continue;
                }
                let pair = CarElement::from_grassmann(&ei.mul(ej));
                corr = corr.add(&pair.scale(&C::real(-im)));
            }
        }
        let head = self.car.exp(&x.scale(&C::i()))?;
        Ok(self.car.mul(&head, &self.car.exp(&corr)?))
    }

    /// `E(f, g) = ⟨g, S_R f⟩_G + ⟨S_R f, g⟩_G` as a Grassmann scalar.
    pub fn weyl_exponent(&self, f: &SmearedSection, g: &SmearedSection) -> CarElement {
        let mut e = CarElement::zero();
        for (eta, s) in &f.terms {
            for (theta, t) in &g.terms {
                let z = self.retarded_form(t, s);
                let te = CarElement::from_grassmann(&theta.mul(eta)).scale(&z);
                let et = CarElement::from_grassmann(&eta.mul(theta)).scale(&z.conj());
                e = e.add(&te).add(&et);
            }
        }
        e
    }

    /// `B_k(s^{i_1} ∧ … ∧ s^{i_k})` read off from the coefficient of `η_{i_k}⋯η_{i_1}`.
    pub fn b_k(&self, sections: &[Vec<C>]) -> Result<CarElement> {
        let k = sections.len();
        let f = SmearedSection::with_generators(k.max(1), 1, sections);
        let s = self.toy_smatrix_linear(&f)?;
        let all = crate::grassmann::full(k);
        // η_k⋯η_1 = (−1)^{k(k−1)/2} η_{1..k}; S ∋ (i^k/k!) η_k⋯η_1 B_k
        let top = s.parameter_component(all);
        let mut fact = C::one();
        for j in 1..=k as i64 {
            fact = &fact * &C::from_int(j);
        }
        let scale = signed(&(fact * C::i().pow(3 * k as u32)), reversal_sign(k));
        Ok(top.scale(&scale))
    }
}

/// Checks `S(𝔇f)·S(𝔇g) = S(𝔇(f+g))·S(E(f,g))` exactly in `Λ ⊗ CAR`.
pub fn weyl_relation_check(qd: &QuantizedDirac, f: &SmearedSection, g: &SmearedSection) -> Verdict {
    let mut v = Verdict::new();
    if f.parameters() & g.parameters() != 0 {
        v.fail("weyl_distinct_parameters", "f and g share Grassmann parameters");
        return v;
    }
    let run = || -> Result<(CarElement, CarElement)> {
        let car = qd.car();
        let lhs = car.mul(&qd.toy_smatrix_linear(f)?, &qd.toy_smatrix_linear(g)?);
        let e = qd.weyl_exponent(f, g).scale(&C::i());
        let rhs = car.mul(&qd.toy_smatrix_linear(&f.plus(g))?, &car.exp(&e)?);
        Ok((lhs, rhs))
    };
    match run() {
        Ok((lhs, rhs)) => {
            v.check("weyl", lhs == rhs, || format!("difference {}", lhs.sub(&rhs)));
        }
        Err(e) => v.fail("weyl", e.to_string()),
    }
    v
}

/// Extracts Ψ from B₁ as the antilinear part and checks the three anticommutation
/// relations on all pairs of basis sections, together with `B₁ = Ψ − Ψ*`.
pub fn car_theorem_check(qd: &QuantizedDirac) -> Verdict {
    let mut v = Verdict::new();
    let car = qd.car();
    let d = car.section_dim();
    let b1_from_smatrix = |s: &[C]| -> Result<CarElement> {
        let f = SmearedSection::with_generators(1, 1, &[s.to_vec()]);
        let sm = qd.toy_smatrix_linear(&f)?;
        Ok(sm.parameter_component(1).scale(&-C::i()))
    };
    let mut psi = Vec::with_capacity(d);
    for a in 0..d {
        let e = cvec::unit(d, a);
        let ie = cvec::scale(&e, &C::i());
        let (b, bi) = match (b1_from_smatrix(&e), b1_from_smatrix(&ie)) {
            (Ok(b), Ok(bi)) => (b, bi),
            (Err(err), _) | (_, Err(err)) => {
                v.fail("car_extract", err.to_string());
                return v;
            }
        };
        let ibi = bi.scale(&C::i());
        let anti = b.add(&ibi).scale(&C::frac(1, 2));
        let lin = b.sub(&ibi).scale(&C::frac(1, 2));
        let star = car.adjoint(&anti);
        v.check("car_decomposition", lin == star.scale(&-C::one()), || {
            format!("section e_{a}: linear part {lin} vs −Ψ* = {}", star.scale(&-C::one()))
        });
        psi.push((anti, star));
    }
    for a in 0..d {
        for b in 0..d {
            let (pa, sa) = &psi[a];
            let (pb, sb) = &psi[b];
            let x = car.anticommutator(pa, pb);
            v.check("car_psi_psi", x.is_zero(), || format!("{{Ψ(e_{a}), Ψ(e_{b})}} = {x}"));
            let y = car.anticommutator(sa, sb);
            v.check("car_star_star", y.is_zero(), || format!("{{Ψ(e_{a})*, Ψ(e_{b})*}} = {y}"));
            let z = car.anticommutator(pa, sb);
            let want = CarElement::scalar(qd.kernel().gram.get(a, b).clone());
            v.check("car_psi_star", z == want, || format!("{{Ψ(e_{a}), Ψ(e_{b})*}} = {z}, expected {want}"));
        }
    }
    v
}

/// `B₁(Dh) = 0` for every compact basis field `h`.
pub fn on_shell_check(qd: &QuantizedDirac) -> Verdict {
    let mut v = Verdict::new();
    let m = qd.model();
    for a in m.compact_coords() {
        let h = cvec::unit(m.field_dim(), a);
        let b = qd.b1(&m.apply_dirac(&h));
        v.check("on_shell", b.is_zero(), || format!("B₁(D e_{a}) = {b}"));
    }
    v
}

/// `S · S* = 1` for `S = S(𝔇(ηs))`.
pub fn unitarity_check(qd: &QuantizedDirac, f: &SmearedSection) -> Verdict {
    let mut v = Verdict::new();
    match qd.toy_smatrix_linear(f) {
        Ok(s) => {
            let p = qd.car().mul(&s, &qd.car().adjoint(&s));
            v.check("unitarity", p == CarElement::one(), || format!("S S* = {p}"));
        }
        Err(e) => v.fail("unitarity", e.to_string()),
    }
    v
}

/// Output of [`causal_split`]: `f = f′ + D h` with `h` compact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalSplit {
    pub f_prime: Vec<C>,
    pub h: Vec<C>,
    /// The downward-closed set of field points on which `a ≡ 1`.
    pub region: BTreeSet<usize>,
}

/// Splits `f = f′ + D(a·S_R f)` with `a` the indicator of a downward-closed set of field
/// points, chosen so that `supp f′` misses the causal past of `supp g`.
pub fn causal_split(m: &CausalDiracModel, f: &[C], g: &[C]) -> Result<CausalSplit> {
    let past = m.causal_past(&m.source_support(g));
    let nf = m.field_points.len();
    // field points feeding D at a source point of the past
    let mut seed = BTreeSet::new();
    for b in 0..m.source_dim() {
        if !past.contains(&m.source_point(b)) {
            continue;
        }
        for a in 0..m.field_dim() {
            if !m.dirac.get(b, a).is_zero() {
                seed.insert(m.field_point(a));
            }
        }
    }
    let region: BTreeSet<usize> = (0..nf).filter(|&p| seed.iter().any(|&s| m.precedes(p, s))).collect();
    let sf = m.apply_retarded(f);
    let h: Vec<C> =
        sf.iter().enumerate().map(|(a, v)| if region.contains(&m.field_point(a)) { v.clone() } else { C::zero() }).collect();
    if !m.is_compact(&h) {
        return Err(Error::Invalid(
            "no downward-closed region separates the supports with a compact h: the past of supp g reaches the last slice"
                .into(),
        ));
    }
    let f_prime = cvec::sub(f, &m.apply_dirac(&h));
    let clash: Vec<usize> = m.source_support(&f_prime).intersection(&past).copied().collect();
    if !clash.is_empty() {
        return Err(Error::Invalid(format!("supp f′ meets J⁻(supp g) at points {clash:?}")));
    }
    Ok(CausalSplit { f_prime, h, region })
}

/// Matrix representation of the CAR algebra with diagonal Gram `diag(g)`:
/// `Ψ_j ↦ Z^{⊗j} ⊗ g_j σ⁻ ⊗ 1`, `Ψ*_j ↦ Z^{⊗j} ⊗ σ⁺ ⊗ 1`.
pub struct JordanWigner {
    dim: usize,
    ann: Vec<ExactMatrix>,
    cre: Vec<ExactMatrix>,
}

fn kron(a: &ExactMatrix, b: &ExactMatrix) -> ExactMatrix {
    ExactMatrix::from_fn(a.rows() * b.rows(), a.cols() * b.cols(), |i, j| {
        a.get(i / b.rows(), j / b.cols()) * b.get(i % b.rows(), j % b.cols())
    })
}

impl JordanWigner {
    /// `None` unless the Gram matrix is diagonal.
    pub fn new(gram: &ExactMatrix) -> Option<Self> {
        let k = gram.rows();
        if first_nonzero(gram, |i, j| i != j).is_some() {
            return None;
        }
        let z = ExactMatrix::diag(&[C::one(), -C::one()]);
        let lower = ExactMatrix::from_rows(vec![vec![C::zero(), C::one()], vec![C::zero(), C::zero()]]).ok()?;
        let raise = lower.transpose();
        let id2 = ExactMatrix::identity(2);
        let string = |j: usize, local: &ExactMatrix| {
            (0..k).fold(ExactMatrix::identity(1), |acc, i| {
                let f = match i.cmp(&j) {
                    std::cmp::Ordering::Less => &z,
                    std::cmp::Ordering::Equal => local,
                    std::cmp::Ordering::Greater => &id2,
                };
                kron(&acc, f)
            })
        };
        let ann = (0..k).map(|j| string(j, &lower.scale(gram.get(j, j)))).collect();
        let cre = (0..k).map(|j| string(j, &raise)).collect();
        Some(Self { dim: 1 << k, ann, cre })
    }

    pub fn letter(&self, l: Letter) -> &ExactMatrix {
        match l {
            Letter::Create(j) => &self.cre[j],
            Letter::Annihilate(j) => &self.ann[j],
        }
    }

    pub fn word(&self, word: &[Letter]) -> ExactMatrix {
        word.iter().fold(ExactMatrix::identity(self.dim), |acc, &l| mm(&acc, self.letter(l)))
    }

    /// Matrix of a parameter-free CAR element.
    pub fn element(&self, e: &CarElement) -> Result<ExactMatrix> {
        let mut acc = ExactMatrix::zeros(self.dim, self.dim);
        for (m, c) in e.terms() {
            if m.eta != 0 {
                return Err(Error::Invalid("Jordan–Wigner matrices carry no Grassmann parameters".into()));
            }
            let mut word = Vec::new();
            word.extend((0..32).filter(|j| m.cre >> j & 1 == 1).map(|j| Letter::Create(j as usize)));
            word.extend((0..32).filter(|j| m.ann >> j & 1 == 1).map(|j| Letter::Annihilate(j as usize)));
            acc = acc.try_add(&self.word(&word).scale(c))?;
        }
        Ok(acc)
    }
}

/// Outcome of the Jordan–Wigner comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JordanWignerOutcome {
    Checked(Verdict),
    Skipped(String),
}

pub fn random_word(rng: &mut impl Rng, modes: usize, max_len: usize) -> Vec<Letter> {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| {
            let j = rng.gen_range(0..modes);
            if rng.gen_bool(0.5) {
                Letter::Create(j)
            } else {
                Letter::Annihilate(j)
            }
        })
        .collect()
}

/// Compares normal-form arithmetic with the matrix representation on random words.
pub fn jordan_wigner_crosscheck(car: &CarAlgebra, words: usize, max_len: usize, rng: &mut impl Rng) -> JordanWignerOutcome {
    let Some(jw) = JordanWigner::new(car.gram()) else {
        return JordanWignerOutcome::Skipped("Gram matrix of the modes is not diagonal".into());
    };
    let k = car.mode_count();
    let mut v = Verdict::new();
    if k == 0 {
        return JordanWignerOutcome::Skipped("no modes".into());
    }
    for _ in 0..words {
        let w = random_word(rng, k, max_len);
        let nf = car.normalize_word(&C::one(), &w, RewriteOrder::Leftmost);
        let ok = jw.element(&nf).map(|m| m == jw.word(&w)).unwrap_or(false);
        v.check("jordan_wigner", ok, || format!("word {w:?} normalizes to {nf}"));
    }
    JordanWignerOutcome::Checked(v)
}

/// A random section with small Gaussian-integer entries.
pub fn random_section(rng: &mut impl Rng, d: usize) -> Vec<C> {
    (0..d)
        .map(|_| {
            if rng.gen_bool(0.4) {
                C::zero()
            } else {
                C::new(q(rng.gen_range(-3..=3), 1), q(rng.gen_range(-2..=2), 1))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lattice(t: usize, l: usize) -> CausalDiracModel {
        CausalDiracModel::lattice(&LatticeParams::new(t, l, q(1, 2))).unwrap()
    }

    #[test]
    fn builtin_lattice_is_valid() {
        for (t, l) in [(1, 1), (2, 2), (3, 2), (2, 3)] {
            let m = lattice(t, l);
            let v = validate_model(&m);
            assert!(v.passed(), "T={t} L={l}: {:?}", v.failures);
        }
        let zero = CausalDiracModel::from_spec("lattice:T=3,L=2,m=1/3,split=zero").unwrap();
        assert!(validate_model(&zero).passed());
    }

    #[test]
    fn spec_parsing() {
        let p = LatticeParams::parse("lattice:T=3,L=2,m=1/2").unwrap();
        assert_eq!((p.steps, p.sites, p.mass.clone()), (3, 2, q(1, 2)));
        assert_eq!(p.to_string(), "lattice:T=3,L=2,m=1/2");
        assert_eq!(LatticeParams::parse("lattice:T=3,L=2").unwrap(), p);
        assert!(LatticeParams::parse("lattice:L=2").is_err());
        assert!(LatticeParams::parse("grid:T=3").is_err());
        assert!(LatticeParams::parse("lattice:T=3,L=2,m=1/2,q=1").is_err());
    }

    #[test]
    fn broken_models_fail_with_witnesses() {
        let mut m = lattice(2, 2);
        let (a, b) = (0, m.source_dim() - 1);
        m.retarded.set(a, b, C::one());
        let v = validate_model(&m);
        assert!(v.failures.iter().any(|f| f.op == "retardation" && f.counterexample.contains("x=0")));

        let mut m = lattice(2, 2);
        let n = m.field_dim();
        let mid = m.compact_coords()[0];
        m.dirac.set(0, mid, m.dirac.get(0, mid) + &C::one());
        let _ = n;
        let v = validate_model(&m);
        assert!(v.failures.iter().any(|f| f.op == "hermiticity"));
    }

    #[test]
    fn commutator_kernel_annihilates_dirac_images() {
        let m = lattice(3, 2);
        let k = commutator_kernel(&m).unwrap();
        assert!(mm(&m.dirac, &k.kernel).is_zero());
        for h in m.compact_basis() {
            let f = m.apply_dirac(&h);
            assert!(cvec::is_zero(&mv(&k.kernel, &f)));
        }
        assert_eq!(k.gram.psd_check().unwrap(), PsdVerdict::PositiveSemidefinite);
        assert_eq!(k.gram.rank(), 2 * SPINOR_RANK);
    }

    #[test]
    fn normalize_examples() {
        let g = ExactMatrix::diag(&[C::from_int(3), C::from_int(2)]);
        let car = CarAlgebra::new(g).unwrap();
        let w = [Letter::Annihilate(0), Letter::Create(0)];
        let nf = car.normalize_word(&C::one(), &w, RewriteOrder::Leftmost);
        let want = CarElement::scalar(C::from_int(3))
            .sub(&CarElement::monomial(CarMonomial { eta: 0, cre: 1, ann: 1 }, C::one()));
        assert_eq!(nf, want);
        assert!(car.normalize_word(&C::one(), &[Letter::Annihilate(0), Letter::Annihilate(0)], RewriteOrder::Leftmost).is_zero());
        assert_eq!(car.word_product(&C::one(), &w), want);
    }

    #[test]
    fn degenerate_directions_vanish() {
        let m = lattice(3, 2);
        let qd = QuantizedDirac::new(&m).unwrap();
        for h in m.compact_basis() {
            assert!(qd.car().psi(&m.apply_dirac(&h)).is_zero());
        }
        assert!(on_shell_check(&qd).passed());
    }

    #[test]
    fn single_parameter_smatrix() {
        let m = lattice(2, 2);
        let qd = QuantizedDirac::new(&m).unwrap();
        let s = cvec::unit(m.source_dim(), 1);
        let f = SmearedSection::with_generators(1, 1, std::slice::from_ref(&s));
        let got = qd.toy_smatrix_linear(&f).unwrap();
        let eta = CarElement::from_grassmann(&GrassmannElement::generator(1, 1));
        let want = CarElement::one().add(&qd.car().mul(&eta, &qd.b1(&s)).scale(&C::i()));
        assert_eq!(got, want);
        assert_eq!(qd.toy_smatrix_linear(&SmearedSection::zero()).unwrap(), CarElement::one());
        let even = SmearedSection { terms: vec![(GrassmannElement::one(1), s)] };
        assert!(matches!(qd.toy_smatrix_linear(&even), Err(Error::Parity(_))));
        assert!(unitarity_check(&qd, &f).passed());
    }

    #[test]
    fn b2_is_antisymmetric() {
        let m = lattice(2, 2);
        let qd = QuantizedDirac::new(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_section(&mut rng, m.source_dim());
        let t = random_section(&mut rng, m.source_dim());
        let b_st = qd.b_k(&[s.clone(), t.clone()]).unwrap();
        let b_ts = qd.b_k(&[t, s]).unwrap();
        assert_eq!(b_st, b_ts.scale(&-C::one()));
    }

    #[test]
    fn weyl_and_car_on_small_lattice() {
        let m = lattice(2, 2);
        let qd = QuantizedDirac::new(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = m.source_dim();
        for _ in 0..5 {
            let f = SmearedSection::with_generators(4, 1, &[random_section(&mut rng, d), random_section(&mut rng, d)]);
            let g = SmearedSection::with_generators(4, 3, &[random_section(&mut rng, d), random_section(&mut rng, d)]);
            let v = weyl_relation_check(&qd, &f, &g);
            assert!(v.passed(), "{:?}", v.failures);
        }
        let v = car_theorem_check(&qd);
        assert!(v.passed(), "{:?}", v.first_failure());
    }

    #[test]
    fn later_sections_factorize() {
        let m = lattice(3, 2);
        let qd = QuantizedDirac::new(&m).unwrap();
        let d = m.source_dim();
        let n = 2 * SPINOR_RANK;
        let late = cvec::unit(d, 2 * n + 1);
        let early = cvec::unit(d, 1);
        let f = SmearedSection::with_generators(2, 1, &[late]);
        let g = SmearedSection::with_generators(2, 2, &[early]);
        assert!(qd.weyl_exponent(&f, &g).is_zero());
        let car = qd.car();
        let lhs = car.mul(&qd.toy_smatrix_linear(&f).unwrap(), &qd.toy_smatrix_linear(&g).unwrap());
        assert_eq!(lhs, qd.toy_smatrix_linear(&f.plus(&g)).unwrap());
    }

    #[test]
    fn causal_split_examples() {
        let m = lattice(3, 2);
        let d = m.source_dim();
        let n = 2 * SPINOR_RANK;
        let f = cvec::unit(d, 0);
        let g = cvec::unit(d, n + 2);
        let split = causal_split(&m, &f, &g).unwrap();
        assert_eq!(cvec::add(&split.f_prime, &m.apply_dirac(&split.h)), f);
        assert!(m.is_compact(&split.h));
        let past = m.causal_past(&m.source_support(&g));
        assert!(m.source_support(&split.f_prime).is_disjoint(&past));

        // f = D h₀ inside the past of g
        let h0 = cvec::unit(m.field_dim(), n + 1);
        let f = m.apply_dirac(&h0);
        let split = causal_split(&m, &f, &g).unwrap();
        assert!(cvec::is_zero(&split.f_prime));
        assert_eq!(split.h, h0);

        // a g on the last slice has a past reaching it
        let g_late = cvec::unit(d, 2 * n);
        assert!(causal_split(&m, &cvec::unit(d, 2 * n + 1), &g_late).is_err());
    }

    #[test]
    fn jordan_wigner_small() {
        let car = CarAlgebra::new(ExactMatrix::diag(&[C::one()])).unwrap();
        let jw = JordanWigner::new(car.gram()).unwrap();
        let a = jw.letter(Letter::Annihilate(0));
        let c = jw.letter(Letter::Create(0));
        assert_eq!(mm(a, c).try_add(&mm(c, a)).unwrap(), ExactMatrix::identity(2));
        let car = CarAlgebra::new(ExactMatrix::diag(&[C::from_int(2), C::frac(1, 3), C::from_int(5)])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        match jordan_wigner_crosscheck(&car, 50, 4, &mut rng) {
            JordanWignerOutcome::Checked(v) => assert!(v.passed(), "{:?}", v.first_failure()),
            JordanWignerOutcome::Skipped(why) => panic!("skipped: {why}"),
        }
        let full = CarAlgebra::new(ExactMatrix::from_fn(2, 2, |_, _| C::one())).unwrap();
        assert_eq!(full.mode_count(), 1);
        let dense = CarAlgebra::new(ExactMatrix::from_rows(vec![vec![C::from_int(2), C::one()], vec![C::one(), C::from_int(2)]]).unwrap()).unwrap();
        assert!(matches!(jordan_wigner_crosscheck(&dense, 1, 2, &mut rng), JordanWignerOutcome::Skipped(_)));
    }

    #[test]
    fn descriptor_round_trip() {
        let m = lattice(2, 2);
        let json = serde_json::to_string(&m.descriptor()).unwrap();
        let back: ModelDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(CausalDiracModel::from_descriptor(&back).unwrap(), m);
    }
}
