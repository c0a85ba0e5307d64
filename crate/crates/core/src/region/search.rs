use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::Channel;
use crate::error::Result;

use super::{Bounds, Evaluator, Factors, RegionKind, SearchConfig, CONSTRAINT_TOL};

const PENALTY: f64 = 4.0;
const INITIAL_STEP: f64 = 0.3;
const MIN_STEP: f64 = 1e-4;
const PATIENCE: usize = 40;

pub(crate) struct Candidate {
    pub bounds: Bounds,
    pub factors: Factors,
}

pub(crate) struct Outcome {
    pub candidates: Vec<Candidate>,
    pub evaluations: u64,
}

fn objective(b: &Bounds, lambda: f64, kind: RegionKind) -> f64 {
    let base = lambda * b.sum + (1.0 - lambda) * b.r1.min(b.sum);
    match kind {
        RegionKind::Constrained => base - PENALTY * (-b.decodability()).max(0.0),
        _ => base,
    }
}

fn feasible(b: &Bounds, kind: RegionKind) -> bool {
    kind != RegionKind::Constrained || b.decodability() >= -CONSTRAINT_TOL
}

/// `(|U|, |V|)` stages: start small and double towards the caps.
pub(crate) fn ladder(u_cap: usize, v_cap: usize, enabled: bool) -> Vec<(usize, usize)> {
    if !enabled {
        return vec![(u_cap, v_cap)];
    }
    let mut stages = vec![(u_cap.min(2), 1)];
    let mut k = 2;
    loop {
        let stage = (u_cap.min(k), v_cap.min(k / 2).max(1));
        if stages.last() != Some(&stage) {
            stages.push(stage);
        }
        if stage == (u_cap, v_cap) {
            break;
        }
        k *= 2;
        if k / 2 >= v_cap && k >= u_cap {
            let last = (u_cap, v_cap);
            if stages.last() != Some(&last) {
                stages.push(last);
            }
            break;
        }
    }
    stages
}

fn random_row(rng: &mut ChaCha8Rng, row: &mut [f64], strategy: usize, levels: usize) {
    row.fill(0.0);
    let n = row.len();
    match strategy % 4 {
        0 => row[rng.random_range(0..n)] = 1.0,
        1 => {
            for _ in 0..levels {
                row[rng.random_range(0..n)] += 1.0 / levels as f64;
            }
        }
        2 => {
            for p in row.iter_mut() {
                *p = -(1.0 - rng.random::<f64>()).ln();
            }
        }
        _ => {
            let w: f64 = rng.random();
            row[rng.random_range(0..n)] += w;
            row[rng.random_range(0..n)] += 1.0 - w;
        }
    }
    let total: f64 = row.iter().sum();
    if total > 0.0 {
        row.iter_mut().for_each(|p| *p /= total);
    } else {
        row[0] = 1.0;
    }
}

fn random_start(rng: &mut ChaCha8Rng, shape: &Factors, strategy: usize, levels: usize) -> Factors {
    let mut f = shape.clone();
    for row in f.rows() {
        random_row(rng, &mut f.block_mut(row.block)[row.offset..row.offset + row.len], strategy, levels);
    }
    f
}

struct Ascent {
    factors: Factors,
    bounds: Bounds,
    value: f64,
    evaluations: u64,
}

/// Randomised coordinate ascent by moving mass between two entries of one
/// simplex row.
fn ascend(channel: &Channel, start: Factors, lambda: f64, kind: RegionKind, iters: usize, rng: &mut ChaCha8Rng) -> Ascent {
    let mut eval = Evaluator::new(channel);
    let mut f = start;
    let mut bounds = eval.bounds(&f);
    let mut value = objective(&bounds, lambda, kind);
    let rows = f.rows();
    let blocks: Vec<Vec<usize>> = (0..3)
        .map(|b| (0..rows.len()).filter(|&r| rows[r].block == b && rows[r].len > 1).collect())
        .filter(|v: &Vec<usize>| !v.is_empty())
        .collect();
    let mut step = INITIAL_STEP;
    let mut fails = 0;
    let mut evaluations = 1;
    if blocks.is_empty() {
        return Ascent { factors: f, bounds, value, evaluations };
    }
    for _ in 0..iters {
        let group = &blocks[rng.random_range(0..blocks.len())];
        let row = rows[group[rng.random_range(0..group.len())]];
        let (i, j, t) = {
            let r = &f.block(row.block)[row.offset..row.offset + row.len];
            let support = r.iter().filter(|&&p| p > 0.0).count();
            let mut nth = rng.random_range(0..support);
            let i = r.iter().position(|&p| p > 0.0 && { nth = nth.wrapping_sub(1); nth == usize::MAX }).unwrap_or(0);
            let mut j = rng.random_range(0..row.len - 1);
            if j >= i {
                j += 1;
            }
            let t = if rng.random::<f64>() < 0.2 { r[i] } else { r[i].min(step * rng.random::<f64>()) };
            (i, j, t)
        };
        if t <= 0.0 {
            continue;
        }
        let block = f.block_mut(row.block);
        let (old_i, old_j) = (block[row.offset + i], block[row.offset + j]);
        block[row.offset + i] = if t >= old_i { 0.0 } else { old_i - t };
        block[row.offset + j] = old_j + t;
        let nb = eval.bounds(&f);
        evaluations += 1;
        let nv = objective(&nb, lambda, kind);
        if nv > value + 1e-13 {
            bounds = nb;
            value = nv;
            fails = 0;
        } else {
            let block = f.block_mut(row.block);
            block[row.offset + i] = old_i;
            block[row.offset + j] = old_j;
            fails += 1;
            if fails > PATIENCE {
                fails = 0;
                step *= 0.5;
                if step < MIN_STEP {
                    step = INITIAL_STEP;
                }
            }
        }
    }
    Ascent { factors: f, bounds, value, evaluations }
}

fn better(a: &Ascent, b: &Ascent) -> bool {
    match a.value.total_cmp(&b.value) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.factors.partial_cmp(&b.factors) == Some(Ordering::Less),
    }
}

pub(crate) fn run(
    channel: &Channel,
    cfg: &SearchConfig,
    kind: RegionKind,
    u_cap: usize,
    v_cap: usize,
    warm: &[Factors],
) -> Result<Outcome> {
    let lambdas: Vec<f64> = (0..cfg.lambdas).map(|i| i as f64 / (cfg.lambdas - 1) as f64).collect();
    let (ns, nx1, nx2) = (channel.s_size(), channel.x1_size(), channel.x2_size());
    let mut candidates = Vec::new();
    let mut evaluations = 0;
    let mut previous_stage: Vec<Factors> = Vec::new();
    for (stage_idx, (u, v)) in ladder(u_cap, v_cap, cfg.ladder).into_iter().enumerate() {
        let shape = Factors::uniform(ns, u, v, nx1, nx2);
        let warm_here: Vec<Factors> = warm
            .iter()
            .filter(|f| f.u_size <= u && f.v_size <= v)
            .map(|f| f.embed(u, v))
            .collect::<Result<_>>()?;
        let mut stage_best: Vec<Factors> = Vec::with_capacity(lambdas.len());
        let mut last_best: Option<Factors> = None;
        for (li, &lambda) in lambdas.iter().enumerate() {
            let mut starts: Vec<(Option<Factors>, u64)> = Vec::new();
            if let Some(f) = previous_stage.get(li) {
                starts.push((Some(f.embed(u, v)?), 0));
            }
            if let Some(f) = &last_best {
                starts.push((Some(f.clone()), 0));
            }
            starts.extend(warm_here.iter().cloned().map(|f| (Some(f), 0)));
            starts.extend((0..cfg.restarts).map(|r| (None, r as u64)));
            let runs: Vec<Ascent> = starts
                .into_par_iter()
                .enumerate()
                .map(|(k, (start, r))| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(((stage_idx as u64 * 256 + li as u64) << 16) + k as u64);
                    let start = start.unwrap_or_else(|| random_start(&mut rng, &shape, r as usize, cfg.grid_levels));
                    ascend(channel, start, lambda, kind, cfg.iterations, &mut rng)
                })
                .collect();
            let mut best: Option<&Ascent> = None;
            for a in &runs {
                evaluations += a.evaluations;
                if best.is_none_or(|b| better(a, b)) {
                    best = Some(a);
                }
            }
            let best = best.expect("at least one start");
            stage_best.push(best.factors.clone());
            last_best = Some(best.factors.clone());
            for a in runs {
                if feasible(&a.bounds, kind) {
                    candidates.push(Candidate { bounds: a.bounds, factors: a.factors });
                }
            }
        }
        previous_stage = stage_best;
    }
    Ok(Outcome { candidates, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_reaches_caps() {
        assert_eq!(ladder(72, 9, true).last(), Some(&(72, 9)));
        assert_eq!(ladder(4, 2, false), vec![(4, 2)]);
        let l = ladder(4, 2, true);
        assert_eq!(l.first(), Some(&(2, 1)));
        assert_eq!(l.last(), Some(&(4, 2)));
        assert_eq!(ladder(1, 1, true), vec![(1, 1)]);
    }

    #[test]
    fn random_rows_are_pmfs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for strategy in 0..8 {
            let f = random_start(&mut rng, &Factors::uniform(2, 3, 2, 2, 2), strategy, 4);
            f.check().unwrap();
        }
    }
}
