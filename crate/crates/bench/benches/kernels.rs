use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use macstate::fme::derive_region_system;
use macstate::sim::{is_jointly_typical, run_monte_carlo, CodebookSizes, Scheme, SimConfig, TypicalityParams};
use macstate::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corner() -> Factors {
    Factors::from_laws(2, 2, 1, 2, 2, |_| 0.5, |_, _, _| 1.0, |s, _, _, u, x1| if x1 == u ^ s { 0.5 } else { 0.0 }).unwrap()
}

fn info(c: &mut Criterion) {
    let ch = Channel::random_binary(1).unwrap();
    let joint = Factors::uniform(2, 8, 3, 2, 2).joint(&ch).unwrap();
    c.bench_function("pair_bounds |U|=8 |V|=3", |b| b.iter(|| pair_bounds(&joint).unwrap()));
    c.bench_function("build joint |U|=8 |V|=3", |b| b.iter(|| Factors::uniform(2, 8, 3, 2, 2).joint(&ch).unwrap()));
}

fn region(c: &mut Criterion) {
    let ch = Channel::xor(0.5).unwrap();
    let cfg = SearchConfig { u_cap: Some(4), v_cap: Some(2), ..Default::default() };
    let mut g = c.benchmark_group("region");
    g.sample_size(10);
    g.bench_function("compute_region xor caps (4,2)", |b| b.iter(|| compute_region(&ch, &cfg).unwrap()));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let pts: Vec<RatePair> = (0..2000).map(|_| RatePair::new(rng.random(), rng.random())).collect();
    g.bench_function("convexify 2000 points", |b| b.iter(|| convexify(&pts).unwrap()));
    g.finish();
}

fn fme(c: &mut Criterion) {
    c.bench_function("derive two-bound system", |b| b.iter(|| derive_region_system().unwrap()));
}

fn sim(c: &mut Criterion) {
    let ch = Channel::xor(0.5).unwrap();
    let joint = corner().joint(&ch).unwrap();
    let m = marginalize(&joint, VarSet::of(&[Var::S, Var::U, Var::X2, Var::Y])).unwrap();
    let p = TypicalityParams::new(0.3, 1000).unwrap();
    c.bench_function("typicality check n=1000", |b| {
        b.iter_batched(
            || {
                let mut rng = ChaCha8Rng::seed_from_u64(3);
                (0..4).map(|_| (0..1000).map(|_| rng.random_range(0..2u8)).collect::<Vec<u8>>()).collect::<Vec<_>>()
            },
            |seqs| {
                let refs: Vec<&[u8]> = seqs.iter().map(Vec::as_slice).collect();
                is_jointly_typical(&refs, &m, &p).unwrap()
            },
            BatchSize::SmallInput,
        )
    });
    let mut cfg = SimConfig::new(ch, corner(), Scheme::B, 24, 3, 200);
    cfg.sizes = Some(CodebookSizes { m_c: 4, m_1: 4, m_hat: 4, m_0: 2, j: 2 });
    cfg.slack.epsilon = 0.4;
    let mut g = c.benchmark_group("sim");
    g.sample_size(10);
    g.bench_function("scheme B 200 trials n=24", |b| b.iter(|| run_monte_carlo(&cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, info, region, fme, sim);
criterion_main!(benches);
