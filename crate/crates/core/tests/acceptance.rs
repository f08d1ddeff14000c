//! Acceptance criteria 1–8: one PASS/FAIL line per criterion with counts and timings.
//! Runs without the libtest harness so the lines always reach the test log.

use std::time::{Duration, Instant};

use fermalg::car::{car_theorem_check, on_shell_check, random_section, validate_model, weyl_relation_check};
use fermalg::car::{CausalDiracModel, QuantizedDirac, SmearedSection};
use fermalg::checks::{
    decomposition_check, identity_checks, jordan_wigner_suite, linearity_necessity_check, mutated_control_check,
    random_admissible_map, random_hom, random_inadmissible_map, random_shift, sign_rule_regression, BUILTIN_MODEL,
};
use fermalg::functor::ModelFunctor;
use fermalg::graded::StructureConstantAlgebra;
use fermalg::grassmann::{decompose_linear_map, full, matrix_unit, size, GrassmannElement};
use fermalg::reconstruct::{isomorphism_check, sigma_checks, universal_tau, InclusionCone, Reconstruction};
use fermalg::verdict::Verdict;
use fermalg::wick::{causal_factorization_check, Interaction, PropagatorPack, WickAlgebra};
use fermalg::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240601;

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

fn criterion_1() -> Verdict {
    let mut v = Verdict::new();
    let mut r = rng(1);
    for _ in 0..100 {
        v.merge(decomposition_check(&random_admissible_map(&mut r, 3, 3)));
        let bad = random_inadmissible_map(&mut r, 3, 3);
        v.check("rejects_inadmissible", matches!(decompose_linear_map(&bad), Err(Error::Inadmissible(_))), || {
            "inadmissible map decomposed".into()
        });
    }
    for i in 0..=full(3) {
        for j in 0..=full(3) {
            let admissible = (size(i) + size(j)).is_multiple_of(2) && size(j) >= size(i) && !(i == 0 && j != 0);
            match matrix_unit(3, 3, j, i) {
                Ok((map, _)) => {
                    v.check("matrix_unit_admissible", admissible, || format!("E_({j:b},{i:b}) accepted"));
                    v.merge(decomposition_check(&map));
                    let ok = (0..=full(3)).all(|k| {
                        let want = if k == i { GrassmannElement::basis(3, j) } else { GrassmannElement::zero(3) };
                        *map.apply_basis(k) == want
                    });
                    v.check("matrix_unit_table", ok, || format!("E_({j:b},{i:b})"));
                }
                Err(_) => {
                    v.check("matrix_unit_admissible", !admissible, || format!("E_({j:b},{i:b}) rejected"));
                }
            }
        }
    }
    v
}

fn bases() -> [(&'static str, StructureConstantAlgebra); 3] {
    [
        ("grassmann(1)", StructureConstantAlgebra::grassmann(1)),
        ("matrices(1|1)", StructureConstantAlgebra::graded_matrices_2x2()),
        ("grassmann(3)", StructureConstantAlgebra::grassmann(3)),
    ]
}

fn criterion_2() -> Verdict {
    let mut v = Verdict::new();
    for (_, base) in bases() {
        let f = ModelFunctor::new(base, 3);
        let rec = Reconstruction::new(&f).expect("tensor model reconstructs");
        for n in 0..=3 {
            v.merge(rec.projection_identities(n));
        }
    }
    v
}

fn criterion_3() -> Verdict {
    let mut v = Verdict::new();
    let mut r = rng(3);
    for base in [StructureConstantAlgebra::graded_matrices_2x2(), StructureConstantAlgebra::grassmann(2)] {
        let f = ModelFunctor::new(base.clone(), 3);
        let rec = Reconstruction::new(&f).expect("tensor model reconstructs");
        let lim = rec.limit().expect("limit exists");
        let out = universal_tau(&rec, &lim, &InclusionCone { base: base.clone() }, 3).expect("tau");
        v.merge(out.verdict);
        v.check("tau_bijective", out.injective && out.surjective, || "τ is not bijective".into());
        v.merge(isomorphism_check(&out.tau, lim.algebra(), &base));
        let homs: Vec<_> = (0..60)
            .map(|_| {
                let src = r.gen_range(0..=2);
                let dst = r.gen_range(1..=2);
                random_hom(&mut r, src, dst)
            })
            .collect();
        for n in 0..=2 {
            v.merge(sigma_checks(&rec, &lim, n, &homs).expect("sigma"));
        }
    }
    v
}

fn criterion_4() -> Verdict {
    linearity_necessity_check(2)
}

fn criterion_5() -> Verdict {
    let m = CausalDiracModel::from_spec(BUILTIN_MODEL).expect("builtin model");
    let mut v = validate_model(&m);
    let qd = QuantizedDirac::new(&m).expect("quantized field");
    v.merge(car_theorem_check(&qd));
    v.merge(on_shell_check(&qd));
    let mut r = rng(5);
    let d = m.source_dim();
    for _ in 0..100 {
        let f = SmearedSection::with_generators(4, 1, &[random_section(&mut r, d), random_section(&mut r, d)]);
        let g = SmearedSection::with_generators(4, 3, &[random_section(&mut r, d), random_section(&mut r, d)]);
        v.merge(weyl_relation_check(&qd, &f, &g));
    }
    v
}

fn criterion_6() -> Verdict {
    jordan_wigner_suite(70, 4, &mut rng(6))
}

fn criterion_7() -> Verdict {
    let m = CausalDiracModel::from_spec(BUILTIN_MODEL).expect("builtin model");
    let pack = PropagatorPack::from_model(&m).expect("propagators");
    let w = WickAlgebra::new(&m, pack.clone(), 2).expect("wick algebra");
    let quartic = Interaction::Quartic.build(&w, None);
    let mut v = pack.validate(&m);
    let mut r = rng(7);
    for params in 1..=3 {
        let shift = random_shift(&m, params, &mut r);
        v.merge(identity_checks(&w, &quartic, &shift));
        v.merge(mutated_control_check(&m, &pack, 2, Interaction::Quartic, &shift));
    }
    let nf = m.field_points.len();
    let at = |tau: i64| -> std::collections::BTreeSet<usize> {
        (0..m.source_points.len()).filter(|&p| m.point(nf + p).tau == tau).collect()
    };
    let taus: Vec<i64> = (0..m.source_points.len()).map(|p| m.point(nf + p).tau).collect();
    let (lo, hi) = (*taus.iter().min().unwrap(), *taus.iter().max().unwrap());
    let a1 = Interaction::Quartic.build(&w, Some(&at(hi)));
    let a3 = Interaction::Quartic.build(&w, Some(&at(lo)));
    v.merge(causal_factorization_check(&w, &a1, &quartic, &a3));
    v
}

fn criterion_8() -> Verdict {
    sign_rule_regression()
}

fn main() {
    let criteria: [(usize, &str, u64, fn() -> Verdict); 8] = [
        (1, "hom decomposition of admissible maps on Λℝ³", 10, criterion_1),
        (2, "projection identities on the tensor models, n ≤ 3", 30, criterion_2),
        (3, "reconstruction is a graded *-isomorphism; σ natural", 60, criterion_3),
        (4, "tensor-square functor rejected on linearity", 5, criterion_4),
        (5, "CAR, Weyl, on-shell and PSD on the builtin lattice", 120, criterion_5),
        (6, "Jordan–Wigner cross-check", 30, criterion_6),
        (7, "perturbative identities, field equation vs dynamics", 300, criterion_7),
        (8, "sign-rule regression at the smallest sizes", 10, criterion_8),
    ];
    let handles: Vec<_> = criteria
        .iter()
        .map(|&(n, title, budget, f)| {
            std::thread::spawn(move || {
                let t = Instant::now();
                let v = f();
                (n, title, budget, v, t.elapsed())
            })
        })
        .collect();
    let mut all_pass = true;
    for h in handles {
        let (n, title, budget, v, dt): (usize, &str, u64, Verdict, Duration) = h.join().expect("criterion panicked");
        let in_time = dt.as_secs_f64() < budget as f64;
        let pass = v.passed() && in_time;
        all_pass &= pass;
        println!(
            "{} criterion {n}: {title}: {} checks, {} failed, {:.2} s (budget {budget} s)",
            if pass { "PASS" } else { "FAIL" },
            v.attempted,
            v.failures.len(),
            dt.as_secs_f64()
        );
        for f in v.failures.iter().take(3) {
            println!("    {}: {}", f.op, f.counterexample);
        }
        if !in_time {
            println!("    over the runtime budget");
        }
    }
    if !all_pass {
        std::process::exit(1);
    }
}
