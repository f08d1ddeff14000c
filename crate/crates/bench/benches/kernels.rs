use criterion::{black_box, criterion_group, criterion_main, Criterion};
use fermalg::car::{random_section, CausalDiracModel, QuantizedDirac, SmearedSection};
use fermalg::checks::{random_admissible_map, random_element};
use fermalg::grassmann::decompose_linear_map;
use fermalg::wick::{Interaction, WickAlgebra};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grassmann(c: &mut Criterion) {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let (a, b) = (random_element(&mut r, 6, None), random_element(&mut r, 6, None));
    c.bench_function("grassmann_mul_n6", |bench| bench.iter(|| black_box(&a).mul(black_box(&b))));
    let l = random_admissible_map(&mut r, 3, 3);
    c.bench_function("decompose_admissible_n3", |bench| bench.iter(|| decompose_linear_map(black_box(&l)).unwrap()));
}

fn car(c: &mut Criterion) {
    let m = CausalDiracModel::from_spec("lattice:T=2,L=2").unwrap();
    c.bench_function("quantize_lattice_T2_L2", |bench| bench.iter(|| QuantizedDirac::new(black_box(&m)).unwrap()));
    let qd = QuantizedDirac::new(&m).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let d = m.source_dim();
    let f = SmearedSection::with_generators(2, 1, &[random_section(&mut r, d), random_section(&mut r, d)]);
    c.bench_function("toy_smatrix_two_generators", |bench| bench.iter(|| qd.toy_smatrix_linear(black_box(&f)).unwrap()));
}

fn wick(c: &mut Criterion) {
    let m = CausalDiracModel::from_spec("lattice:T=1,L=1").unwrap();
    let w = WickAlgebra::from_model(&m, 2).unwrap();
    let quartic = Interaction::Quartic.build(&w, None);
    c.bench_function("star_quartic_squared", |bench| bench.iter(|| w.star(black_box(&quartic), black_box(&quartic)).unwrap()));
    c.bench_function("smatrix_quartic_order2", |bench| bench.iter(|| w.smatrix(black_box(&quartic)).unwrap()));
}

criterion_group!(benches, grassmann, car, wick);
criterion_main!(benches);
