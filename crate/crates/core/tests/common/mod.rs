#![allow(dead_code)]

use macstate::{Channel, Factors};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A pmf of length `k` from the uniform law on the simplex.
pub fn random_pmf(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let t: f64 = w.iter().sum();
    w.into_iter().map(|x| x / t).collect()
}

pub fn random_factors(ch: &Channel, u: usize, v: usize, seed: u64) -> Factors {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = Factors::uniform(ch.s_size(), u, v, ch.x1_size(), ch.x2_size());
    f.p_x2 = random_pmf(&mut rng, ch.x2_size());
    for row in f.p_v.chunks_mut(v) {
        row.copy_from_slice(&random_pmf(&mut rng, v));
    }
    let k = u * ch.x1_size();
    for row in f.p_ux1.chunks_mut(k) {
        row.copy_from_slice(&random_pmf(&mut rng, k));
    }
    f.check().unwrap();
    f
}

/// The XOR channel input law that reaches its corners: `X2` uniform, `V`
/// constant, `U` uniform and independent of `S`, `X1 = U xor S`.
pub fn xor_corner_factors() -> Factors {
    Factors::from_laws(2, 2, 1, 2, 2, |_| 0.5, |_, _, _| 1.0, |s, _, _, u, x1| if x1 == u ^ s { 0.5 } else { 0.0 }).unwrap()
}

pub fn binary_fixtures() -> Vec<Channel> {
    let mut out = vec![Channel::xor(0.5).unwrap(), Channel::useless().unwrap()];
    out.extend((0..3).map(|s| Channel::random_binary(s).unwrap()));
    out
}

pub fn all_fixtures() -> Vec<Channel> {
    let mut out = binary_fixtures();
    out.push(Channel::clean_mac().unwrap());
    out
}

pub fn report(name: &str, ok: bool, detail: &str) {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}
