use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::region::Factors;

use super::model::{draw, CodingModel};
use super::typical::{Sym, TypicalTable, TypicalityParams};
use super::{trial_rng, wilson_interval};

/// Which random-coding threshold to probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    /// `V` codewords covering `(S, X2)`; threshold `I(V;S|X2)`.
    Covering,
    /// Finding the sent `X2` codeword among others from `Y`; threshold `I(X2;Y)`.
    Packing,
    /// `U` bin codewords covering `(S, V, X2)`; threshold `I(U;S|V,X2)`.
    Binning,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMethod {
    /// Every codeword drawn and checked.
    Explicit,
    /// The source sequences are drawn; the chance that one independent
    /// codeword is typical with them is computed exactly, and the success
    /// indicator drawn from the resulting law.
    #[default]
    ExactLaw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub kind: ThresholdKind,
    pub channel: Channel,
    pub factors: Factors,
    /// Codebook rate: `M = ceil(2^(n rate))` codewords.
    pub rate: f64,
    pub n: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    pub method: ThresholdMethod,
    /// Limit on codeword symbols per trial in explicit mode.
    pub max_codebook_symbols: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub kind: ThresholdKind,
    pub rate: f64,
    pub threshold: f64,
    pub n: usize,
    pub codebook_size: f64,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

fn binomial_pmf(lf: &[f64], n: usize, k: usize, q: f64) -> f64 {
    if q <= 0.0 {
        return (k == 0) as u8 as f64;
    }
    if q >= 1.0 {
        return (k == n) as u8 as f64;
    }
    (lf[n] - lf[k] - lf[n - k] + k as f64 * q.ln() + (n - k) as f64 * (-q).ln_1p()).exp()
}

/// Probability that `count` i.i.d. draws from `q` land inside the box
/// `lo[a] <= N_a <= hi[a]`, via sequential binomial splits.
fn box_probability(lf: &[f64], count: usize, q: &[f64], lo: &[u32], hi: &[u32]) -> f64 {
    let k = q.len();
    let mut dist = vec![0.0; count + 1];
    dist[count] = 1.0;
    let mut mass = 1.0;
    for a in 0..k - 1 {
        let cond = if mass > 0.0 { (q[a] / mass).clamp(0.0, 1.0) } else { 0.0 };
        let mut next = vec![0.0; count + 1];
        for (r, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let top = (hi[a] as usize).min(r);
            for c in lo[a] as usize..=top {
                next[r - c] += p * binomial_pmf(lf, r, c, cond);
            }
        }
        dist = next;
        mass -= q[a];
    }
    let last = k - 1;
    let lo_r = lo[last] as usize;
    let hi_r = (hi[last] as usize).min(count);
    if q[last] <= 0.0 || mass <= 0.0 {
        return if lo_r == 0 { dist[0] } else { 0.0 };
    }
    (lo_r..=hi_r).map(|r| dist[r]).sum()
}

/// Probability that a codeword drawn symbol by symbol from `q(context)` is
/// jointly typical with the given context sequences. The table's axes are the
/// context axes in order with the codeword axis inserted at `code_axis`.
pub fn typical_extension_probability(
    table: &TypicalTable,
    context: &[&[Sym]],
    code_axis: usize,
    q: &dyn Fn(&[Sym]) -> Vec<f64>,
) -> f64 {
    let n = context[0].len();
    let sizes = table.sizes();
    let code_size = sizes[code_axis];
    let mut counts: BTreeMap<Vec<Sym>, usize> = BTreeMap::new();
    for i in 0..n {
        *counts.entry(context.iter().map(|c| c[i]).collect()).or_insert(0) += 1;
    }
    let full = |ctx: &[Sym], a: Sym| -> Vec<Sym> {
        let mut f = ctx.to_vec();
        f.insert(code_axis, a);
        f
    };
    // cells of contexts that never occur must allow a zero count
    let mut idx = vec![0 as Sym; sizes.len()];
    for cell in 0..table.cells() {
        let mut rest = cell;
        for a in (0..sizes.len()).rev() {
            idx[a] = (rest % sizes[a]) as Sym;
            rest /= sizes[a];
        }
        let mut ctx = idx.clone();
        ctx.remove(code_axis);
        if !counts.contains_key(&ctx) && table.band(cell).0 > 0 {
            return 0.0;
        }
    }
    let lf = ln_factorials(n);
    let mut p = 1.0;
    for (ctx, &count) in &counts {
        let qs = q(ctx);
        let (mut lo, mut hi) = (Vec::with_capacity(code_size), Vec::with_capacity(code_size));
        for a in 0..code_size {
            let (l, h) = table.band(table.cell(&full(ctx, a as Sym)));
            lo.push(l);
            hi.push(h);
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return 0.0;
        }
        p *= box_probability(&lf, count, &qs, &lo, &hi);
        if p == 0.0 {
            break;
        }
    }
    p
}

/// `1 - (1 - p)^m` without cancellation.
fn at_least_one(p: f64, m: f64) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    -(m * (-p).ln_1p()).exp_m1()
}

/// Success probability of covering or packing at the configured rate,
/// estimated over independent trials.
pub fn run_threshold(cfg: &ThresholdConfig) -> Result<ThresholdResult> {
    if cfg.trials == 0 || !cfg.rate.is_finite() || cfg.rate < 0.0 {
        return Err(Error::Config("need trials >= 1 and a finite nonnegative rate".into()));
    }
    let params = TypicalityParams::new(cfg.epsilon, cfg.n)?;
    let m = CodingModel::new(&cfg.channel, &cfg.factors, params)?;
    let threshold = m.info(match cfg.kind {
        ThresholdKind::Covering => "I(V;S|X2)",
        ThresholdKind::Packing => "I(X2;Y)",
        ThresholdKind::Binning => "I(U;S|V,X2)",
    })?;
    let size = (cfg.n as f64 * cfg.rate).exp2().ceil().max(1.0);
    if cfg.method == ThresholdMethod::Explicit && size * cfg.n as f64 > cfg.max_codebook_symbols as f64 {
        return Err(Error::Resource(format!(
            "explicit codebook of {size:.3e} codewords of length {} exceeds {} symbols",
            cfg.n, cfg.max_codebook_symbols
        )));
    }
    let n = cfg.n;
    let mut successes = 0u64;
    for trial in 0..cfg.trials as u64 {
        let mut rng = trial_rng(cfg.seed, trial + 1);
        let ok = match cfg.kind {
            ThresholdKind::Covering => {
                let (mut s, mut x2) = (Vec::with_capacity(n), Vec::with_capacity(n));
                for _ in 0..n {
                    s.push(m.draw_state(&mut rng));
                    x2.push(m.draw_x2(&mut rng));
                }
                match cfg.method {
                    ThresholdMethod::ExactLaw => {
                        let p = typical_extension_probability(&m.t_svx2, &[&s, &x2], 1, &|c| m.p_v_given_x2(c[1]).to_vec());
                        rng.random::<f64>() < at_least_one(p, size)
                    }
                    ThresholdMethod::Explicit => {
                        let mut counts = Vec::new();
                        (0..size as u64).any(|_| {
                            let v: Vec<Sym> = x2.iter().map(|&b| m.draw_v(&mut rng, b)).collect();
                            m.t_svx2.check(&[&s, &v, &x2], &mut counts)
                        })
                    }
                }
            }
            ThresholdKind::Binning => {
                let (mut s, mut v, mut x2) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
                for _ in 0..n {
                    let b = m.draw_x2(&mut rng);
                    let a = m.draw_v(&mut rng, b);
                    // state from its posterior given (v, x2)
                    let post: Vec<f64> = (0..m.ns).map(|st| joint_svx2(&m, st, a, b)).collect();
                    let total: f64 = post.iter().sum();
                    let post: Vec<f64> = post.iter().map(|p| p / total).collect();
                    s.push(draw(&mut rng, &post));
                    v.push(a);
                    x2.push(b);
                }
                match cfg.method {
                    ThresholdMethod::ExactLaw => {
                        let p = typical_extension_probability(&m.t_suvx2, &[&s, &v, &x2], 1, &|c| {
                            m.p_u_given_vx2(c[1], c[2]).to_vec()
                        });
                        rng.random::<f64>() < at_least_one(p, size)
                    }
                    ThresholdMethod::Explicit => {
                        let mut counts = Vec::new();
                        (0..size as u64).any(|_| {
                            let u: Vec<Sym> = (0..n).map(|k| m.draw_u(&mut rng, v[k], x2[k])).collect();
                            m.t_suvx2.check(&[&s, &u, &v, &x2], &mut counts)
                        })
                    }
                }
            }
            ThresholdKind::Packing => {
                let (mut x2, mut y) = (Vec::with_capacity(n), Vec::with_capacity(n));
                let py = joint_x2y(&m);
                for _ in 0..n {
                    let cell = draw(&mut rng, &py) as usize;
                    x2.push((cell / m.ny) as Sym);
                    y.push((cell % m.ny) as Sym);
                }
                let mut counts = Vec::new();
                let sent = m.t_x2y.check(&[&x2, &y], &mut counts);
                match cfg.method {
                    ThresholdMethod::ExactLaw => {
                        let p = typical_extension_probability(&m.t_x2y, &[&y], 0, &|_| m.p_x2().to_vec());
                        sent && rng.random::<f64>() >= at_least_one(p, size - 1.0)
                    }
                    ThresholdMethod::Explicit => {
                        sent && !(1..size as u64).any(|_| {
                            let w: Vec<Sym> = (0..n).map(|_| m.draw_x2(&mut rng)).collect();
                            m.t_x2y.check(&[&w, &y], &mut counts)
                        })
                    }
                }
            }
        };
        successes += ok as u64;
    }
    let trials = cfg.trials as u64;
    let (ci_low, ci_high) = wilson_interval(successes, trials);
    Ok(ThresholdResult {
        kind: cfg.kind,
        rate: cfg.rate,
        threshold,
        n,
        codebook_size: size,
        trials,
        successes,
        success_rate: successes as f64 / trials as f64,
        ci_low,
        ci_high,
    })
}

fn joint_svx2(m: &CodingModel, s: usize, v: Sym, x2: Sym) -> f64 {
    let mut t = 0.0;
    let j = &m.joint;
    let [_, nu, _, nx1, _, ny] = j.sizes();
    for u in 0..nu {
        for x1 in 0..nx1 {
            for y in 0..ny {
                t += j.get([s, u, v as usize, x1, x2 as usize, y]);
            }
        }
    }
    t
}

/// `P(x2, y)` flattened as `x2 * |Y| + y`.
fn joint_x2y(m: &CodingModel) -> Vec<f64> {
    let j = &m.joint;
    let [ns, nu, nv, nx1, nx2, ny] = j.sizes();
    let mut out = vec![0.0; nx2 * ny];
    for s in 0..ns {
        for u in 0..nu {
            for v in 0..nv {
                for x1 in 0..nx1 {
                    for x2 in 0..nx2 {
                        for y in 0..ny {
                            out[x2 * ny + y] += j.get([s, u, v, x1, x2, y]);
                        }
                    }
                }
            }
        }
    }
    out
}
