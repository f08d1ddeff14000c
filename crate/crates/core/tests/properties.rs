//! Algebraic laws as properties over generated inputs.

use fermalg::car::{
    random_section, unitarity_check, validate_model, weyl_relation_check, CarAlgebra, CausalDiracModel, Letter,
    LatticeParams, QuantizedDirac, RewriteOrder, SmearedSection,
};
use fermalg::checks::{random_functional, random_hom};
use fermalg::functional::ConfigurationSpace;
use fermalg::grassmann::{full, GrassmannElement, GrassmannHom};
use fermalg::scalar::q;
use fermalg::wick::{WickAlgebra, WickElement, WickKey, WickMonomial};
use fermalg::{ExactMatrix, C};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scalar() -> impl Strategy<Value = C> {
    (-4i64..=4, 1i64..=3, -2i64..=2).prop_map(|(n, d, im)| &C::frac(n, d) + &(&C::i() * &C::from_int(im)))
}

fn grassmann(n: usize) -> impl Strategy<Value = GrassmannElement> {
    prop::collection::vec(prop::option::weighted(0.5, scalar()), 1 << n).prop_map(move |cs| {
        let mut e = GrassmannElement::zero(n);
        for (s, c) in cs.into_iter().enumerate() {
            if let Some(c) = c {
                e.add_term(s as u32, c);
            }
        }
        e
    })
}

fn homogeneous(n: usize, parity: u32) -> impl Strategy<Value = GrassmannElement> {
    grassmann(n).prop_map(move |e| {
        GrassmannElement::from_terms(n, e.terms().filter(|(s, _)| s.count_ones() % 2 == parity).map(|(s, c)| (s, c.clone())))
            .expect("subsets in range")
    })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_field_laws(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
        prop_assert_eq!(a.to_string().parse::<C>().unwrap(), a);
    }

    #[test]
    fn grassmann_product_is_associative(a in grassmann(4), b in grassmann(4), c in grassmann(4)) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn grassmann_graded_commutative(
        (a, b, pa, pb) in (0u32..2, 0u32..2).prop_flat_map(|(pa, pb)| (homogeneous(3, pa), homogeneous(3, pb), Just(pa), Just(pb)))
    ) {
        let sign = C::from_int(if pa * pb == 1 { -1 } else { 1 });
        prop_assert_eq!(a.mul(&b), b.mul(&a).scale(&sign));
    }

    #[test]
    fn grassmann_involution(a in grassmann(3), b in grassmann(3), c in scalar()) {
        prop_assert_eq!(a.star().star(), a.clone());
        prop_assert_eq!(a.mul(&b).star(), b.star().mul(&a.star()));
        prop_assert_eq!(a.scale(&c).star(), a.star().scale(&c.conj()));
    }

    #[test]
    fn homs_are_multiplicative_and_compose(seed in any::<u64>(), n in 0usize..=3, m in 1usize..=3, k in 1usize..=3) {
        let mut r = rng(seed);
        let h = random_hom(&mut r, n, m);
        let g = random_hom(&mut r, m, k);
        for i in 0..=full(n) {
            for j in 0..=full(n) {
                let (x, y) = (GrassmannElement::basis(n, i), GrassmannElement::basis(n, j));
                prop_assert_eq!(h.apply(&x.mul(&y)).unwrap(), h.apply(&x).unwrap().mul(&h.apply(&y).unwrap()));
            }
            let x = GrassmannElement::basis(n, i);
            let composed: GrassmannHom = g.compose(&h).unwrap();
            prop_assert_eq!(composed.apply(&x).unwrap(), g.apply(&h.apply(&x).unwrap()).unwrap());
            if h.images().iter().all(|e| e.terms().all(|(_, c)| c.is_real())) {
                prop_assert_eq!(h.apply(&x.star()).unwrap(), h.apply(&x).unwrap().star());
            }
        }
        prop_assert_eq!(h.to_linear_map().admissibility_violation(), None);
    }

    #[test]
    fn functional_product_laws(seed in any::<u64>(), a in 0usize..=3, b in 0usize..=3) {
        let mut r = rng(seed);
        let space = ConfigurationSpace::new(2, 2).unwrap();
        let f = random_functional(&mut r, space, a, true);
        let g = random_functional(&mut r, space, b, true);
        let fg = f.pointwise_product(&g).unwrap();
        let sign = C::from_int(if a * b % 2 == 1 { -1 } else { 1 });
        prop_assert!(fg.entries().eq(g.pointwise_product(&f).unwrap().scale(&sign).entries()));
        let one = fermalg::functional::FermionicFunctional::constant(space, C::one());
        prop_assert!(f.pointwise_product(&one).unwrap().entries().eq(f.entries()));
        let vs: Vec<Vec<C>> = (0..a).map(|_| random_section(&mut r, space.dim())).collect();
        let w = f.evaluate(&vs).unwrap();
        let swapped: Vec<Vec<C>> = if a >= 2 {
            let mut s = vs.clone();
            s.swap(0, 1);
            s
        } else {
            vs.clone()
        };
        let expect = if a >= 2 { -w.clone() } else { w.clone() };
        prop_assert_eq!(f.evaluate(&swapped).unwrap(), expect);
    }
}

fn small_model() -> CausalDiracModel {
    CausalDiracModel::from_spec("lattice:T=1,L=1").unwrap()
}

/// A sum of a few monomials in up to two parameters and the field symbols, of one parity.
fn wick_element(w: &WickAlgebra, r: &mut ChaCha8Rng, parity: Option<u32>) -> WickElement {
    use rand::Rng;
    let d = w.dim();
    let mut e = WickElement::zero(d);
    for _ in 0..r.gen_range(1..=3) {
        let params = r.gen_range(0..4u32);
        let fields = r.gen_range(0..1u64 << (2 * d));
        let deg = params.count_ones() + fields.count_ones();
        if parity.is_some_and(|p| deg % 2 != p) || deg > 4 {
            continue;
        }
        let key = WickKey { mono: WickMonomial { params, fields }, hbar: 0, lambda: 0 };
        e.add_term(key, C::frac(r.gen_range(-3..=3), r.gen_range(1..=2)));
    }
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn star_is_associative(seed in any::<u64>()) {
        let m = small_model();
        let w = WickAlgebra::from_model(&m, 1).unwrap();
        let mut r = rng(seed);
        let (a, b, c) = (wick_element(&w, &mut r, None), wick_element(&w, &mut r, None), wick_element(&w, &mut r, None));
        let lhs = w.star(&w.star(&a, &b).unwrap(), &c).unwrap();
        let rhs = w.star(&a, &w.star(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(w.star(&a, &b).unwrap().classical(), w.wedge(&a, &b));
    }

    #[test]
    fn time_ordered_product_is_graded_commutative(seed in any::<u64>(), pa in 0u32..2, pb in 0u32..2) {
        let m = small_model();
        let w = WickAlgebra::from_model(&m, 1).unwrap();
        let mut r = rng(seed);
        let a = wick_element(&w, &mut r, Some(pa));
        let b = wick_element(&w, &mut r, Some(pb));
        let sign = C::from_int(if pa * pb == 1 { -1 } else { 1 });
        prop_assert_eq!(w.star_f(&a, &b).unwrap(), w.star_f(&b, &a).unwrap().scale(&sign));
    }

    #[test]
    fn wick_to_car_is_a_homomorphism(seed in any::<u64>()) {
        let m = small_model();
        let w = WickAlgebra::from_model(&m, 1).unwrap();
        let qd = QuantizedDirac::new(&m).unwrap();
        let mut r = rng(seed);
        let a = wick_element(&w, &mut r, None);
        let b = wick_element(&w, &mut r, None);
        let one = C::one();
        let lhs = w.to_car(qd.car(), &w.star(&a, &b).unwrap().at_hbar(&one)).unwrap();
        let rhs = qd.car().mul(&w.to_car(qd.car(), &a).unwrap(), &w.to_car(qd.car(), &b).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn lattice_models_satisfy_the_axioms(t in 1usize..=2, l in 1usize..=2, mn in 0i64..=3, md in 1i64..=3) {
        let m = CausalDiracModel::lattice(&LatticeParams::new(t, l, q(mn, md))).unwrap();
        let v = validate_model(&m);
        prop_assert!(v.passed(), "{:?}", v.first_failure());
    }

    #[test]
    fn weyl_and_unitarity(seed in any::<u64>()) {
        let m = small_model();
        let qd = QuantizedDirac::new(&m).unwrap();
        let mut r = rng(seed);
        let d = m.source_dim();
        let f = SmearedSection::with_generators(4, 1, &[random_section(&mut r, d), random_section(&mut r, d)]);
        let g = SmearedSection::with_generators(4, 3, &[random_section(&mut r, d), random_section(&mut r, d)]);
        let v = weyl_relation_check(&qd, &f, &g);
        prop_assert!(v.passed(), "{:?}", v.first_failure());
        let v = unitarity_check(&qd, &f);
        prop_assert!(v.passed(), "{:?}", v.first_failure());
    }

    #[test]
    fn normal_form_is_confluent(diag in prop::collection::vec((1i64..=5, 1i64..=3), 1..=3),
                                word in prop::collection::vec((any::<bool>(), 0usize..3), 0..=7)) {
        let g: Vec<C> = diag.iter().map(|&(n, d)| C::frac(n, d)).collect();
        let k = g.len();
        let car = CarAlgebra::new(ExactMatrix::diag(&g)).unwrap();
        let word: Vec<Letter> = word
            .into_iter()
            .map(|(c, j)| if c { Letter::Create(j % k) } else { Letter::Annihilate(j % k) })
            .collect();
        let left = car.normalize_word(&C::one(), &word, RewriteOrder::Leftmost);
        let right = car.normalize_word(&C::one(), &word, RewriteOrder::Rightmost);
        prop_assert_eq!(left, right);
    }
}
