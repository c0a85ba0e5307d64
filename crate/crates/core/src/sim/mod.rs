//! Random-coding simulation of the three block-Markov schemes.
//!
//! * scheme A: fresh codebooks per block, the same messages in every block,
//!   simultaneous decoding over all blocks with compression indices decoded
//!   non-uniquely;
//! * scheme B: one codebook, Wyner-Ziv cells over the compression indices,
//!   new messages per block and backward decoding;
//! * scheme C: scheme B with the compression index decoded uniquely.

mod exact;
mod model;
mod scheme_a;
mod scheme_b;
mod threshold;
mod typical;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::region::{Factors, CONSTRAINT_TOL};

pub use exact::exact_error_micro;
pub use model::CodingModel;
pub use scheme_a::{decode_a, encode_a, generate_codebooks_a, CodebookA, EncodedA};
pub use scheme_b::{decode_b_backward, decode_c_unique, encode_b, generate_codebooks_b, CodebookB, EncodedB};
pub use threshold::{
    run_threshold, typical_extension_probability, ThresholdConfig, ThresholdKind, ThresholdMethod, ThresholdResult,
};
pub use typical::{is_jointly_typical, Sym, TypicalTable, TypicalityParams};

/// Name of the generator recorded in results.
pub const RNG_NAME: &str = "ChaCha8";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    A,
    B,
    C,
}

/// Rates in bits per channel use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeRates {
    pub r_c: f64,
    pub r_1: f64,
    pub r_hat: f64,
    pub r_0: f64,
}

/// Slack multipliers of `epsilon` in the codebook-size exponents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Slack {
    pub epsilon: f64,
    pub eta_c: f64,
    pub eta_1: f64,
    pub eta_hat: f64,
    pub eta_0: f64,
    pub delta: f64,
}

impl Default for Slack {
    fn default() -> Self {
        Slack { epsilon: 0.15, eta_c: 1.0, eta_1: 1.0, eta_hat: 1.0, eta_0: 1.0, delta: 2.0 }
    }
}

/// Codebook sizes `M_c, M_1, M_hat, M_0, J`. Scheme A ignores `m_0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodebookSizes {
    pub m_c: usize,
    pub m_1: usize,
    pub m_hat: usize,
    pub m_0: usize,
    pub j: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookMode {
    /// A new codebook for every trial: error averaged over the ensemble.
    #[default]
    Fresh,
    /// One codebook drawn from the seed and reused by every trial.
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub channel: Channel,
    pub factors: Factors,
    pub scheme: Scheme,
    #[serde(default)]
    pub rates: SchemeRates,
    #[serde(default)]
    pub slack: Slack,
    pub n: usize,
    pub blocks: usize,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub codebook_mode: CodebookMode,
    /// Random balanced cells instead of `z mod M_0`.
    #[serde(default)]
    pub random_partition: bool,
    /// Explicit sizes instead of the rate formulas.
    #[serde(default)]
    pub sizes: Option<CodebookSizes>,
    #[serde(default = "default_max_symbols")]
    pub max_codebook_symbols: u64,
    #[serde(default = "default_max_outcomes")]
    pub max_exact_outcomes: u64,
}

fn default_max_symbols() -> u64 {
    50_000_000
}

fn default_max_outcomes() -> u64 {
    10_000_000
}

impl SimConfig {
    pub fn new(channel: Channel, factors: Factors, scheme: Scheme, n: usize, blocks: usize, trials: usize) -> SimConfig {
        SimConfig {
            channel,
            factors,
            scheme,
            rates: SchemeRates::default(),
            slack: Slack::default(),
            n,
            blocks,
            trials,
            seed: 0,
            codebook_mode: CodebookMode::Fresh,
            random_partition: false,
            sizes: None,
            max_codebook_symbols: default_max_symbols(),
            max_exact_outcomes: default_max_outcomes(),
        }
    }

    pub fn typicality(&self) -> Result<TypicalityParams> {
        TypicalityParams::new(self.slack.epsilon, self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.blocks < 2 {
            return Err(Error::Config("at least two blocks are needed".into()));
        }
        self.typicality()?;
        self.factors.check()?;
        if !self.factors.matches(&self.channel) {
            return Err(Error::Dimension("factors do not match the channel alphabets".into()));
        }
        let r = self.rates;
        if [r.r_c, r.r_1, r.r_hat, r.r_0].iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Config("rates must be finite and nonnegative".into()));
        }
        if self.scheme != Scheme::A && self.sizes.is_none() && r.r_0 > r.r_hat {
            return Err(Error::Config("cell-index rate r_0 exceeds compression rate r_hat".into()));
        }
        if let Some(s) = self.sizes {
            if [s.m_c, s.m_1, s.m_hat, s.m_0, s.j].contains(&0) {
                return Err(Error::Config("codebook sizes must be positive".into()));
            }
            if self.scheme != Scheme::A && s.m_0 > s.m_hat {
                return Err(Error::Config("more cells than compression indices".into()));
            }
        }
        Ok(())
    }
}

fn size_from_exponent(bits: f64, what: &str) -> Result<usize> {
    if bits > 62.0 {
        return Err(Error::Resource(format!("{what} = 2^{bits:.1} codewords is beyond reach")));
    }
    Ok((bits.exp2().ceil() as usize).max(1))
}

/// Codebook sizes from the rate formulas, or the configured override.
pub fn codebook_sizes(cfg: &SimConfig, model: &CodingModel) -> Result<CodebookSizes> {
    if let Some(s) = cfg.sizes {
        return Ok(s);
    }
    let (n, e, r, k) = (cfg.n as f64, cfg.slack.epsilon, cfg.rates, cfg.slack);
    let i_gp = model.info("I(U;S|V,X2)")?;
    let message_len = if cfg.scheme == Scheme::A { n * cfg.blocks as f64 } else { n };
    let sizes = CodebookSizes {
        m_c: size_from_exponent(message_len * (r.r_c - k.eta_c * e), "M_c")?,
        m_1: size_from_exponent(message_len * (r.r_1 - k.eta_1 * e), "M_1")?,
        m_hat: size_from_exponent(n * (r.r_hat + k.eta_hat * e), "M_hat")?,
        m_0: if cfg.scheme == Scheme::A { 1 } else { size_from_exponent(n * (r.r_0 + k.eta_0 * e), "M_0")? },
        j: size_from_exponent(n * (i_gp + k.delta * e), "J")?,
    };
    if cfg.scheme != Scheme::A && sizes.m_0 > sizes.m_hat {
        return Err(Error::Config("more cells than compression indices".into()));
    }
    Ok(sizes)
}

/// Stored codeword symbols for the given sizes.
pub fn codebook_symbols(scheme: Scheme, sizes: &CodebookSizes, n: usize, blocks: usize) -> u128 {
    let (mc, m1, mh, m0, j) =
        (sizes.m_c as u128, sizes.m_1 as u128, sizes.m_hat as u128, sizes.m_0 as u128, sizes.j as u128);
    let n = n as u128;
    match scheme {
        Scheme::A => blocks as u128 * n * (mc * mh + mc * mh * mh + mc * mh * mh * m1 * j),
        _ => n * (mc * m0 + mc * m0 * mh + mc * m0 * mh * m1 * j),
    }
}

fn check_resources(cfg: &SimConfig, sizes: &CodebookSizes) -> Result<()> {
    let symbols = codebook_symbols(cfg.scheme, sizes, cfg.n, cfg.blocks);
    if symbols > cfg.max_codebook_symbols as u128 {
        return Err(Error::Resource(format!(
            "codebook needs {symbols} symbols, limit {} (sizes {sizes:?})",
            cfg.max_codebook_symbols
        )));
    }
    Ok(())
}

/// Per-trial failure indicators of each protocol stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub state_atypical: u64,
    pub encoder2_covering: u64,
    pub encoder1_covering: u64,
    pub gp_binning: u64,
    pub decode_step_a: u64,
    pub decode_step_b: u64,
    pub decode_step_c: u64,
    pub decode_step_d: u64,
    pub decode_compression: u64,
}

impl StageCounts {
    fn add(&mut self, o: &StageCounts) {
        self.state_atypical += o.state_atypical;
        self.encoder2_covering += o.encoder2_covering;
        self.encoder1_covering += o.encoder1_covering;
        self.gp_binning += o.gp_binning;
        self.decode_step_a += o.decode_step_a;
        self.decode_step_b += o.decode_step_b;
        self.decode_step_c += o.decode_step_c;
        self.decode_step_d += o.decode_step_d;
        self.decode_compression += o.decode_compression;
    }
}

/// Encoder-side flags of one transmission.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EncoderFlags {
    pub state_atypical: bool,
    pub encoder2_covering: bool,
    pub encoder1_covering: bool,
    pub gp_binning: bool,
}

/// Decoder step that failed first (no candidate or several).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecodeStage {
    A,
    B,
    C,
    D,
    Compression,
}

fn stage_counts(flags: &EncoderFlags, failed: Option<DecodeStage>) -> StageCounts {
    let mut c = StageCounts {
        state_atypical: flags.state_atypical as u64,
        encoder2_covering: flags.encoder2_covering as u64,
        encoder1_covering: flags.encoder1_covering as u64,
        gp_binning: flags.gp_binning as u64,
        ..Default::default()
    };
    match failed {
        Some(DecodeStage::A) => c.decode_step_a = 1,
        Some(DecodeStage::B) => c.decode_step_b = 1,
        Some(DecodeStage::C) => c.decode_step_c = 1,
        Some(DecodeStage::D) => c.decode_step_d = 1,
        Some(DecodeStage::Compression) => c.decode_compression = 1,
        None => {}
    }
    c
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub scheme: Scheme,
    pub n: usize,
    pub blocks: usize,
    pub rates: SchemeRates,
    pub sizes: CodebookSizes,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub stages: StageCounts,
    pub codebook_mode: CodebookMode,
    pub seed: u64,
    pub rng: String,
}

impl SimResult {
    pub fn csv_header() -> &'static str {
        "n,blocks,scheme,r_c,r_1,r_hat,r_0,trials,errors,error,ci_low,ci_high,state_atypical,encoder2_covering,\
encoder1_covering,gp_binning,decode_step_a,decode_step_b,decode_step_c,decode_step_d,decode_compression"
    }

    pub fn csv_row(&self) -> String {
        let s = &self.stages;
        format!(
            "{},{},{:?},{},{},{},{},{},{},{:.6},{:.6},{:.6},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.blocks,
            self.scheme,
            self.rates.r_c,
            self.rates.r_1,
            self.rates.r_hat,
            self.rates.r_0,
            self.trials,
            self.errors,
            self.error_rate,
            self.ci_low,
            self.ci_high,
            s.state_atypical,
            s.encoder2_covering,
            s.encoder1_covering,
            s.gp_binning,
            s.decode_step_a,
            s.decode_step_b,
            s.decode_step_c,
            s.decode_step_d,
            s.decode_compression
        )
    }

    /// Standard error of the error-rate estimate.
    pub fn std_error(&self) -> f64 {
        (self.error_rate * (1.0 - self.error_rate) / self.trials as f64).sqrt()
    }
}

/// Generator for trial `k`; stream 0 is reserved for a fixed codebook.
pub(crate) fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) enum Book {
    A(CodebookA),
    B(CodebookB),
}

/// Everything shared by the trials of one configuration.
pub(crate) struct Prepared {
    pub model: CodingModel,
    pub sizes: CodebookSizes,
}

pub(crate) fn prepare(cfg: &SimConfig) -> Result<Prepared> {
    cfg.validate()?;
    let model = CodingModel::new(&cfg.channel, &cfg.factors, cfg.typicality()?)?;
    if cfg.scheme == Scheme::C {
        let margin = model.info("I(V,X2;Y)")? - model.info("I(V,X2;S)")?;
        if margin < -CONSTRAINT_TOL {
            return Err(Error::Config(format!(
                "unique compression decoding needs I(V,X2;Y) >= I(V,X2;S); margin is {margin:.3e}"
            )));
        }
    }
    let sizes = codebook_sizes(cfg, &model)?;
    check_resources(cfg, &sizes)?;
    Ok(Prepared { model, sizes })
}

pub(crate) fn generate_book(cfg: &SimConfig, p: &Prepared, rng: &mut ChaCha8Rng) -> Book {
    match cfg.scheme {
        Scheme::A => Book::A(generate_codebooks_a(&p.model, &p.sizes, cfg.blocks, rng)),
        _ => Book::B(generate_codebooks_b(&p.model, &p.sizes, cfg.random_partition, rng)),
    }
}

fn draw_states(model: &CodingModel, blocks: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Sym>> {
    (0..blocks).map(|_| (0..model.n).map(|_| model.draw_state(rng)).collect()).collect()
}

fn run_trial(cfg: &SimConfig, p: &Prepared, fixed: Option<&Book>, k: u64) -> (bool, StageCounts) {
    let mut rng = trial_rng(cfg.seed, k + 1);
    let fresh;
    let book = match fixed {
        Some(b) => b,
        None => {
            fresh = generate_book(cfg, p, &mut rng);
            &fresh
        }
    };
    let m = &p.model;
    let s = &p.sizes;
    match book {
        Book::A(cb) => {
            let wc = rng.random_range(0..s.m_c);
            let w1 = rng.random_range(0..s.m_1);
            let states = draw_states(m, cfg.blocks, &mut rng);
            let enc = encode_a(cb, m, wc, w1, &states);
            let y = enc.transmit(m, &states, &mut rng);
            let (hat_c, hat_1) = decode_a(cb, m, &y);
            let failed = match (hat_c, hat_1) {
                (None, _) => Some(DecodeStage::A),
                (Some(c), _) if c != wc => Some(DecodeStage::A),
                (_, None) => Some(DecodeStage::B),
                (_, Some(w)) if w != w1 => Some(DecodeStage::B),
                _ => None,
            };
            (failed.is_some(), stage_counts(&enc.flags, failed))
        }
        Book::B(cb) => {
            let blocks = cfg.blocks;
            let mut wcs: Vec<usize> = (0..blocks - 1).map(|_| rng.random_range(0..s.m_c)).collect();
            let mut w1s: Vec<usize> = (0..blocks - 1).map(|_| rng.random_range(0..s.m_1)).collect();
            wcs.push(0);
            w1s.push(0);
            let states = draw_states(m, blocks, &mut rng);
            let enc = encode_b(cb, m, &wcs, &w1s, &states);
            let y = enc.transmit(m, &states, &mut rng);
            let decoded = if cfg.scheme == Scheme::C { decode_c_unique(cb, m, &y) } else { decode_b_backward(cb, m, &y) };
            let failed = match decoded {
                Err(stage) => Some(stage),
                Ok((c, one)) => {
                    if c[..blocks - 1] != wcs[..blocks - 1] {
                        Some(DecodeStage::B)
                    } else if one[..blocks - 1] != w1s[..blocks - 1] {
                        Some(DecodeStage::D)
                    } else {
                        None
                    }
                }
            };
            (failed.is_some(), stage_counts(&enc.flags, failed))
        }
    }
}

/// Independent trials with fresh states, messages and noise; trial `k` uses
/// its own generator stream, so results do not depend on scheduling.
pub fn run_monte_carlo(cfg: &SimConfig) -> Result<SimResult> {
    let p = prepare(cfg)?;
    let fixed = match cfg.codebook_mode {
        CodebookMode::Fixed => Some(generate_book(cfg, &p, &mut trial_rng(cfg.seed, 0))),
        CodebookMode::Fresh => None,
    };
    let (errors, stages) = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|k| {
            let (e, c) = run_trial(cfg, &p, fixed.as_ref(), k);
            (e as u64, c)
        })
        .reduce(
            || (0, StageCounts::default()),
            |(e1, mut c1), (e2, c2)| {
                c1.add(&c2);
                (e1 + e2, c1)
            },
        );
    let trials = cfg.trials as u64;
    let (ci_low, ci_high) = wilson_interval(errors, trials);
    Ok(SimResult {
        scheme: cfg.scheme,
        n: cfg.n,
        blocks: cfg.blocks,
        rates: cfg.rates,
        sizes: p.sizes,
        trials,
        errors,
        error_rate: errors as f64 / trials as f64,
        ci_low,
        ci_high,
        stages,
        codebook_mode: cfg.codebook_mode,
        seed: cfg.seed,
        rng: RNG_NAME.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100);
        assert!(lo.abs() < 1e-12);
        assert!((hi - 0.0370).abs() < 1e-3);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn sizes_round_up() {
        assert_eq!(size_from_exponent(-3.0, "x").unwrap(), 1);
        assert_eq!(size_from_exponent(1.0, "x").unwrap(), 2);
        assert_eq!(size_from_exponent(1.2, "x").unwrap(), 3);
        assert!(size_from_exponent(80.0, "x").unwrap_err().is_resource());
    }
}
