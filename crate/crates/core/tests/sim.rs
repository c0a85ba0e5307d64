mod common;

use common::xor_corner_factors;
use macstate::sim::*;
use macstate::{Channel, ConditionalKernel, Error, Factors, FinitePmf};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `X1 = 0`, `X2` uniform over the noiseless MAC, so `Y` reveals `X2`.
fn clean_x2_only() -> (Channel, Factors) {
    let f = Factors::from_laws(1, 1, 1, 2, 2, |_| 0.5, |_, _, _| 1.0, |_, _, _, _, x1| (x1 == 0) as u8 as f64).unwrap();
    (Channel::clean_mac().unwrap(), f)
}

/// Every variable constant: each law has a single support cell.
fn constant_factors() -> Factors {
    Factors::from_laws(1, 1, 1, 2, 2, |x| [1.0, 0.0][x], |_, _, _| 1.0, |_, _, _, _, x1| (x1 == 0) as u8 as f64).unwrap()
}

fn sized(scheme: Scheme, ch: Channel, f: Factors, n: usize, blocks: usize, sizes: CodebookSizes) -> SimConfig {
    let mut cfg = SimConfig::new(ch, f, scheme, n, blocks, 200);
    cfg.sizes = Some(sizes);
    cfg.slack.epsilon = 0.9;
    cfg
}

const ONE: CodebookSizes = CodebookSizes { m_c: 1, m_1: 1, m_hat: 1, m_0: 1, j: 1 };

#[test]
fn noiseless_common_message_is_always_decoded() {
    let (ch, f) = clean_x2_only();
    for scheme in [Scheme::A, Scheme::B, Scheme::C] {
        let cfg = sized(scheme, ch.clone(), f.clone(), 24, 3, CodebookSizes { m_c: 2, ..ONE });
        let r = run_monte_carlo(&cfg).unwrap();
        assert_eq!(r.errors, 0, "{scheme:?}: {r:?}");
        assert_eq!(r.trials, 200);
    }
}

#[test]
fn minimal_sizes_give_one_codeword_per_layer() {
    let (ch, f) = clean_x2_only();
    let m = CodingModel::new(&ch, &f, TypicalityParams::new(0.9, 8).unwrap()).unwrap();
    let cb = generate_codebooks_a(&m, &ONE, 2, &mut ChaCha8Rng::seed_from_u64(0));
    let states = vec![vec![0; 8]; 2];
    let enc = encode_a(&cb, &m, 0, 0, &states);
    assert_eq!(enc.t, vec![0, 0]);
    assert_eq!(enc.j, vec![0, 0]);
    assert_eq!(enc.words.x2.len(), 2);
    // the single compression codeword is typical: no covering failure
    assert!(!enc.flags.encoder1_covering && !enc.flags.encoder2_covering);
    let r = run_monte_carlo(&sized(Scheme::A, ch, constant_factors(), 8, 2, ONE)).unwrap();
    assert_eq!(r.errors, 0);
}

#[test]
fn codebooks_are_reproducible_from_the_seed() {
    let ch = Channel::xor(0.5).unwrap();
    let m = CodingModel::new(&ch, &xor_corner_factors(), TypicalityParams::new(0.3, 10).unwrap()).unwrap();
    let sizes = CodebookSizes { m_c: 2, m_1: 3, m_hat: 4, m_0: 2, j: 2 };
    let a1 = generate_codebooks_a(&m, &sizes, 2, &mut ChaCha8Rng::seed_from_u64(7));
    let a2 = generate_codebooks_a(&m, &sizes, 2, &mut ChaCha8Rng::seed_from_u64(7));
    let a3 = generate_codebooks_a(&m, &sizes, 2, &mut ChaCha8Rng::seed_from_u64(8));
    assert_eq!(a1, a2);
    assert_ne!(a1, a3);
    let b1 = generate_codebooks_b(&m, &sizes, true, &mut ChaCha8Rng::seed_from_u64(7));
    let b2 = generate_codebooks_b(&m, &sizes, true, &mut ChaCha8Rng::seed_from_u64(7));
    assert_eq!(b1, b2);
}

#[test]
fn singleton_cells_pin_the_compression_index() {
    let ch = Channel::xor(0.5).unwrap();
    let m = CodingModel::new(&ch, &xor_corner_factors(), TypicalityParams::new(0.3, 6).unwrap()).unwrap();
    let sizes = CodebookSizes { m_c: 1, m_1: 1, m_hat: 5, m_0: 5, j: 1 };
    let cb = generate_codebooks_b(&m, &sizes, false, &mut ChaCha8Rng::seed_from_u64(1));
    for z in 0..5 {
        assert_eq!(cb.cell(cb.cell_of(z)), &[z]);
    }
    let states = vec![vec![0, 1, 0, 1, 1, 0]; 3];
    let enc = encode_b(&cb, &m, &[0, 0, 0], &[0, 0, 0], &states);
    for b in 1..3 {
        assert_eq!(enc.s[b], cb.cell_of(enc.z[b - 1]));
    }
    // z = 0 before the first block
    assert_eq!(enc.s[0], cb.cell_of(0));
}

#[test]
fn two_blocks_carry_one_block_of_data() {
    let (ch, f) = clean_x2_only();
    let m = CodingModel::new(&ch, &f, TypicalityParams::new(0.9, 12).unwrap()).unwrap();
    let sizes = CodebookSizes { m_c: 3, ..ONE };
    let cb = generate_codebooks_b(&m, &sizes, false, &mut ChaCha8Rng::seed_from_u64(3));
    let states = vec![vec![0; 12]; 2];
    let enc = encode_b(&cb, &m, &[2, 0], &[0, 0], &states);
    let y = enc.transmit(&m, &states, &mut ChaCha8Rng::seed_from_u64(4));
    let (wc, _) = decode_b_backward(&cb, &m, &y).unwrap();
    assert_eq!(wc[0], 2);
    assert_eq!(wc[1], 0);
}

/// Covering fixture: `X2` constant, `V = S xor Bern(0.2)`, so `I(V;S|X2) = 1 - h(0.2)`.
fn covering_factors() -> Factors {
    Factors::from_laws(2, 1, 2, 2, 2, |x| [1.0, 0.0][x], |s, _, v| if v == s { 0.8 } else { 0.2 }, |_, _, _, _, _| 0.5)
        .unwrap()
}

#[test]
fn short_compression_codebooks_fail_to_cover() {
    let ch = Channel::xor(0.5).unwrap();
    let mut freqs = Vec::new();
    for n in [50usize, 100, 200] {
        let m_hat = (n as f64 * 0.05).exp2().ceil() as usize;
        let mut cfg = SimConfig::new(ch.clone(), covering_factors(), Scheme::B, n, 2, 200);
        cfg.sizes = Some(CodebookSizes { m_hat, ..ONE });
        cfg.slack.epsilon = 0.15;
        let r = run_monte_carlo(&cfg).unwrap();
        freqs.push(r.stages.encoder1_covering as f64 / r.trials as f64);
    }
    assert!(freqs[2] >= 0.95, "{freqs:?}");
    assert!(freqs[2] + 0.05 >= freqs[0], "{freqs:?}");
}

/// `X2` uniform, `X1 = U = S xor Bern(0.2)`: on the XOR channel `Y = X2 xor Bern(0.2)`.
fn packing_factors() -> Factors {
    Factors::from_laws(2, 2, 1, 2, 2, |_| 0.5, |_, _, _| 1.0, |s, _, _, u, x1| {
        if u != x1 {
            0.0
        } else if u == s {
            0.8
        } else {
            0.2
        }
    })
    .unwrap()
}

#[test]
fn too_many_cells_break_cell_decoding() {
    let ch = Channel::xor(0.5).unwrap();
    let mut last = 0.0;
    for n in [8usize, 12, 16] {
        let m_0 = (n as f64 * 0.6).exp2().ceil() as usize;
        let mut cfg = SimConfig::new(ch.clone(), packing_factors(), Scheme::B, n, 2, 100);
        cfg.sizes = Some(CodebookSizes { m_hat: m_0, m_0, ..ONE });
        cfg.slack.epsilon = 0.3;
        let r = run_monte_carlo(&cfg).unwrap();
        last = r.stages.decode_step_a as f64 / r.trials as f64;
    }
    assert!(last >= 0.9, "{last}");
}

#[test]
fn unique_compression_decoding_checks_its_precondition() {
    let ch = Channel::useless().unwrap();
    // V = S with a useless output: I(V,X2;S) = 1 > I(V,X2;Y) = 0
    let f = Factors::from_laws(2, 1, 2, 2, 2, |_| 0.5, |s, _, v| (v == s) as u8 as f64, |_, _, _, _, _| 0.5).unwrap();
    let cfg = SimConfig::new(ch.clone(), f.clone(), Scheme::C, 4, 2, 10);
    assert!(matches!(run_monte_carlo(&cfg), Err(Error::Config(_))));
    assert!(run_monte_carlo(&SimConfig { scheme: Scheme::B, sizes: Some(ONE), ..cfg }).is_ok());
}

#[test]
fn configuration_errors() {
    let (ch, f) = clean_x2_only();
    let good = sized(Scheme::B, ch.clone(), f.clone(), 4, 2, ONE);
    assert!(matches!(run_monte_carlo(&SimConfig { blocks: 1, ..good.clone() }), Err(Error::Config(_))));
    assert!(matches!(run_monte_carlo(&SimConfig { trials: 0, ..good.clone() }), Err(Error::Config(_))));
    let bad_cells = CodebookSizes { m_0: 3, m_hat: 2, ..ONE };
    assert!(matches!(run_monte_carlo(&SimConfig { sizes: Some(bad_cells), ..good.clone() }), Err(Error::Config(_))));
    let mut huge = SimConfig::new(ch, f, Scheme::A, 200, 2, 1);
    huge.rates.r_c = 0.9;
    assert!(run_monte_carlo(&huge).unwrap_err().is_resource());
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let ch = Channel::xor(0.5).unwrap();
    let mut cfg = SimConfig::new(ch, packing_factors(), Scheme::B, 12, 3, 1000);
    cfg.sizes = Some(CodebookSizes { m_c: 2, m_1: 2, m_hat: 2, m_0: 2, j: 2 });
    cfg.slack.epsilon = 0.5;
    cfg.seed = 5;
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| run_monte_carlo(&cfg).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(4));
    assert_eq!(a, run_monte_carlo(&cfg).unwrap());
    assert_eq!(a.rng, "ChaCha8");
    assert!(a.ci_low <= a.error_rate && a.error_rate <= a.ci_high);
}

#[test]
fn exact_oracle_trivial_cases() {
    let ch = Channel::clean_mac().unwrap();
    let mut cfg = sized(Scheme::A, ch, constant_factors(), 2, 2, ONE);
    cfg.codebook_mode = CodebookMode::Fixed;
    assert_eq!(exact_error_micro(&cfg).unwrap(), 0.0);

    // useless output: two common messages cannot both be told apart
    let useless = Channel::useless().unwrap();
    let f = Factors::uniform(2, 1, 1, 2, 2);
    let cfg = sized(Scheme::A, useless, f, 2, 2, CodebookSizes { m_c: 2, ..ONE });
    assert!(exact_error_micro(&cfg).unwrap() >= 0.5);

    let mut big = sized(Scheme::B, Channel::xor(0.5).unwrap(), xor_corner_factors(), 6, 3, ONE);
    big.max_exact_outcomes = 1000;
    assert!(exact_error_micro(&big).unwrap_err().is_resource());
}

#[test]
fn exact_oracle_on_the_xor_micro_instance() {
    let cfg = SimConfig {
        sizes: Some(CodebookSizes { m_c: 2, m_1: 2, m_hat: 1, m_0: 1, j: 1 }),
        codebook_mode: CodebookMode::Fixed,
        trials: 5000,
        slack: Slack { epsilon: 0.5, ..Slack::default() },
        ..SimConfig::new(Channel::xor(0.5).unwrap(), xor_corner_factors(), Scheme::A, 2, 2, 1)
    };
    let exact = exact_error_micro(&cfg).unwrap();
    let mc = run_monte_carlo(&cfg).unwrap();
    let sigma = (exact * (1.0 - exact) / 5000.0).sqrt();
    assert!((mc.error_rate - exact).abs() <= 3.0 * sigma + 1e-12, "{exact} {}", mc.error_rate);
}

#[test]
fn explicit_and_exact_law_thresholds_agree() {
    let ch = Channel::xor(0.5).unwrap();
    for (kind, f) in [
        (ThresholdKind::Covering, covering_factors()),
        (ThresholdKind::Packing, packing_factors()),
        (ThresholdKind::Binning, packing_factors()),
    ] {
        let base = ThresholdConfig {
            kind,
            channel: ch.clone(),
            factors: f,
            rate: 0.3,
            n: 30,
            epsilon: 0.5,
            trials: 600,
            seed: 2,
            method: ThresholdMethod::Explicit,
            max_codebook_symbols: 1 << 22,
        };
        let a = run_threshold(&base).unwrap();
        let b = run_threshold(&ThresholdConfig { method: ThresholdMethod::ExactLaw, seed: 3, ..base }).unwrap();
        let se = (a.success_rate * (1.0 - a.success_rate) / 600.0 + b.success_rate * (1.0 - b.success_rate) / 600.0).sqrt();
        assert!((a.success_rate - b.success_rate).abs() <= 4.0 * se + 0.01, "{kind:?}: {a:?} {b:?}");
    }
}

#[test]
fn jointly_typical_public_check() {
    let ch = Channel::new(
        "t",
        FinitePmf::bernoulli(0.5).unwrap(),
        ConditionalKernel::constant(&[1, 1, 2], &[1.0]).unwrap(),
    )
    .unwrap();
    let joint = Factors::uniform(2, 1, 1, 1, 1).joint(&ch).unwrap();
    let sy = macstate::marginalize(&joint, macstate::VarSet::of(&[macstate::Var::S, macstate::Var::Y])).unwrap();
    let p = TypicalityParams::new(0.2, 4).unwrap();
    assert!(is_jointly_typical(&[&[0, 1, 0, 1], &[0, 0, 0, 0]], &sy, &p).unwrap());
    assert!(is_jointly_typical(&[&[0, 0, 0, 1], &[0, 0, 0, 0]], &sy, &p).is_ok_and(|t| !t));
    assert!(TypicalityParams::new(1.0, 4).is_err());
}
