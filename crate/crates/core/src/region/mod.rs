//! Capacity-region search over the factorized input class, with and without
//! the compression-decodability constraint `I(V,X2;Y) >= I(V,X2;S)`.

mod factors;
mod hull;
mod search;

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::info::cond_mutual_info;
use crate::prob::{ensure_valid, JointDistribution, Var, VarSet};

pub use factors::{Bounds, Factors};
pub(crate) use factors::Evaluator;
pub use hull::{convexify, region_distance, DISTANCE_ANGLES};

/// Slack below zero still accepted for the decodability constraint.
pub const CONSTRAINT_TOL: f64 = 1e-10;

/// A pair `(R_c, R_1)` in bits per channel use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub rc: f64,
    pub r1: f64,
}

impl RatePair {
    pub fn new(rc: f64, r1: f64) -> Self {
        RatePair { rc, r1 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    /// Plain convex hull of rate pairs.
    #[default]
    Points,
    Unconstrained,
    Constrained,
}

/// A frontier vertex and, when it came from a search, the distribution
/// achieving it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub rate: RatePair,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Factors>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchMetadata {
    pub kind: RegionKind,
    pub u_cap: usize,
    pub v_cap: usize,
    pub grid_levels: usize,
    pub restarts: usize,
    pub iterations: usize,
    pub lambdas: usize,
    pub seed: u64,
    pub tolerance_bits: f64,
    /// True when the hull strictly enlarges the union of the per-distribution
    /// regions it was built from.
    pub hull_changed: bool,
    pub candidates: usize,
    pub evaluations: u64,
}

/// Upper-right boundary of a convex, down-closed region in the `(R_c, R_1)`
/// plane, ordered by increasing `R_c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionFrontier {
    pub channel_id: String,
    pub points: Vec<FrontierPoint>,
    pub metadata: SearchMetadata,
}

impl RegionFrontier {
    /// `max (c * R_c + s * R_1)` over the region.
    pub fn support(&self, c: f64, s: f64) -> f64 {
        self.points.iter().map(|p| c * p.rate.rc + s * p.rate.r1).fold(0.0, f64::max)
    }

    pub fn max_rc(&self) -> f64 {
        self.points.iter().map(|p| p.rate.rc).fold(0.0, f64::max)
    }

    pub fn max_r1(&self) -> f64 {
        self.points.iter().map(|p| p.rate.r1).fold(0.0, f64::max)
    }

    pub fn max_sum_rate(&self) -> f64 {
        self.support(1.0, 1.0)
    }

    /// Largest `R_1` with `(rc, R_1)` in the region, `None` past the edge.
    pub fn r1_at(&self, rc: f64) -> Option<f64> {
        let first = self.points.first()?;
        if rc < 0.0 || rc > self.max_rc() {
            return None;
        }
        if rc <= first.rate.rc {
            return Some(first.rate.r1);
        }
        for w in self.points.windows(2) {
            let (a, b) = (w[0].rate, w[1].rate);
            if rc <= b.rc {
                let t = if b.rc > a.rc { (rc - a.rc) / (b.rc - a.rc) } else { 1.0 };
                return Some(a.r1 + t * (b.r1 - a.r1));
            }
        }
        Some(self.points.last()?.rate.r1)
    }

    pub fn contains(&self, p: RatePair, tol: f64) -> bool {
        if p.rc < -tol || p.r1 < -tol || p.rc > self.max_rc() + tol {
            return false;
        }
        let at = p.rc.clamp(0.0, self.max_rc());
        self.r1_at(at).is_some_and(|r1| p.r1 <= r1 + tol)
    }

    /// Every vertex of `other` lies in `self` up to `tol`.
    pub fn dominates(&self, other: &RegionFrontier, tol: f64) -> bool {
        other.points.iter().all(|p| self.contains(p.rate, tol))
    }

    pub fn rates(&self) -> Vec<RatePair> {
        self.points.iter().map(|p| p.rate).collect()
    }

    /// `r_c,r_1` rows sorted by `r_c`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r_c,r_1\n");
        for p in &self.points {
            out.push_str(&format!("{:.12},{:.12}\n", p.rate.rc, p.rate.r1));
        }
        out
    }

    /// Achieving distributions of every vertex that has one.
    pub fn factors(&self) -> Vec<Factors> {
        self.points.iter().filter_map(|p| p.factors.clone()).collect()
    }
}

/// Search budget and auxiliary alphabet caps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// `|U|`; `None` uses the cardinality bound of the chosen region.
    pub u_cap: Option<usize>,
    pub v_cap: Option<usize>,
    /// Resolution of the grid initialisations.
    pub grid_levels: usize,
    /// Random starts per weight and per cap stage.
    pub restarts: usize,
    /// Proposed moves per local ascent.
    pub iterations: usize,
    /// Number of weights `lambda` in `[0, 1]`.
    pub lambdas: usize,
    pub seed: u64,
    pub tolerance_bits: f64,
    /// Largest `|S||X1||X2|` accepted before refusing with a resource error.
    pub max_input_product: usize,
    /// Grow `|U|`, `|V|` by doubling up to the caps, warm-starting each stage.
    pub ladder: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            u_cap: None,
            v_cap: None,
            grid_levels: 4,
            restarts: 4,
            iterations: 1500,
            lambdas: 11,
            seed: 0,
            tolerance_bits: 0.025,
            max_input_product: 64,
            ladder: true,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.u_cap == Some(0) || self.v_cap == Some(0) {
            return Err(Error::Config("auxiliary caps must be positive".into()));
        }
        if self.lambdas < 2 || self.restarts == 0 || self.grid_levels == 0 {
            return Err(Error::Config("need lambdas >= 2, restarts >= 1, grid_levels >= 1".into()));
        }
        if !(self.tolerance_bits > 0.0) {
            return Err(Error::Config("tolerance_bits must be positive".into()));
        }
        Ok(())
    }
}

/// `(|U|, |V|)` cardinality bounds of the region of the given kind.
pub fn cardinality_caps(channel: &Channel, kind: RegionKind) -> (usize, usize) {
    let k = channel.s_size() * channel.x1_size() * channel.x2_size();
    let extra = if kind == RegionKind::Constrained { 2 } else { 1 };
    ((k + extra) * k, k + extra)
}

/// `(I(U;Y|V,X2) - I(U;S|V,X2), I(U,V,X2;Y) - I(U,V,X2;S))` for one joint law.
pub fn pair_bounds(joint: &JointDistribution) -> Result<(f64, f64)> {
    ensure_valid(joint)?;
    let g = |vs: &[Var]| VarSet::of(vs);
    let (s, u, y) = (g(&[Var::S]), g(&[Var::U]), g(&[Var::Y]));
    let vx2 = g(&[Var::V, Var::X2]);
    let uvx2 = g(&[Var::U, Var::V, Var::X2]);
    let r1 = cond_mutual_info(joint, u, y, vx2)? - cond_mutual_info(joint, u, s, vx2)?;
    let sum = cond_mutual_info(joint, uvx2, y, VarSet::EMPTY)? - cond_mutual_info(joint, uvx2, s, VarSet::EMPTY)?;
    Ok((r1, sum))
}

/// Region of rate pairs reachable by the block-Markov scheme: union over the
/// input class of `R_1 <= a`, `R_c + R_1 <= b`, convexified.
pub fn compute_region(channel: &Channel, cfg: &SearchConfig) -> Result<RegionFrontier> {
    compute_region_from(channel, cfg, RegionKind::Unconstrained, &[])
}

/// As [`compute_region`], restricted to inputs with `I(V,X2;Y) >= I(V,X2;S)`.
pub fn compute_region_constrained(channel: &Channel, cfg: &SearchConfig) -> Result<RegionFrontier> {
    compute_region_from(channel, cfg, RegionKind::Constrained, &[])
}

/// Region search seeded with extra starting distributions; a refinement
/// seeded with an earlier frontier's achieving factors never loses ground.
pub fn compute_region_from(
    channel: &Channel,
    cfg: &SearchConfig,
    kind: RegionKind,
    warm: &[Factors],
) -> Result<RegionFrontier> {
    cfg.validate()?;
    if kind == RegionKind::Points {
        return Err(Error::Usage("region kind must be unconstrained or constrained".into()));
    }
    let k = channel.s_size() * channel.x1_size() * channel.x2_size();
    if k > cfg.max_input_product {
        return Err(Error::Resource(format!(
            "|S||X1||X2| = {k} exceeds the supported maximum {}",
            cfg.max_input_product
        )));
    }
    let (bu, bv) = cardinality_caps(channel, kind);
    let (u_cap, v_cap) = (cfg.u_cap.unwrap_or(bu), cfg.v_cap.unwrap_or(bv));
    for f in warm {
        f.check()?;
        if !f.matches(channel) || f.u_size > u_cap || f.v_size > v_cap {
            return Err(Error::Dimension("warm start does not fit the channel or the caps".into()));
        }
    }
    let outcome = search::run(channel, cfg, kind, u_cap, v_cap, warm)?;
    if outcome.candidates.is_empty() {
        return Err(Error::Config("no feasible input distribution was found".into()));
    }
    let mut corners = Vec::with_capacity(2 * outcome.candidates.len());
    let mut owner = Vec::with_capacity(2 * outcome.candidates.len());
    for (i, c) in outcome.candidates.iter().enumerate() {
        let (a, b) = c.bounds.clipped();
        corners.push(RatePair::new(b - a, a));
        corners.push(RatePair::new(b, 0.0));
        owner.extend([i, i]);
    }
    let chain = hull::upper_chain(&corners);
    let hull_changed = chain.windows(2).any(|w| {
        let mid = RatePair::new(0.5 * (w[0].0.rc + w[1].0.rc), 0.5 * (w[0].0.r1 + w[1].0.r1));
        !outcome.candidates.iter().any(|c| {
            let (a, b) = c.bounds.clipped();
            mid.r1 <= a + 1e-12 && mid.rc + mid.r1 <= b + 1e-12
        })
    });
    let points = chain
        .into_iter()
        .map(|(rate, idx)| {
            let c = &outcome.candidates[owner[idx]];
            FrontierPoint { rate, bounds: Some(c.bounds), factors: Some(c.factors.clone()) }
        })
        .collect();
    Ok(RegionFrontier {
        channel_id: channel.id().to_string(),
        points,
        metadata: SearchMetadata {
            kind,
            u_cap,
            v_cap,
            grid_levels: cfg.grid_levels,
            restarts: cfg.restarts,
            iterations: cfg.iterations,
            lambdas: cfg.lambdas,
            seed: cfg.seed,
            tolerance_bits: cfg.tolerance_bits,
            hull_changed,
            candidates: outcome.candidates.len(),
            evaluations: outcome.evaluations,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small() -> SearchConfig {
        SearchConfig { u_cap: Some(4), v_cap: Some(2), restarts: 2, iterations: 600, ..Default::default() }
    }

    #[test]
    fn caps_for_binary_alphabets() {
        let ch = Channel::xor(0.5).unwrap();
        assert_eq!(cardinality_caps(&ch, RegionKind::Unconstrained), (72, 9));
        assert_eq!(cardinality_caps(&ch, RegionKind::Constrained), (80, 10));
    }

    #[test]
    fn evaluator_agrees_with_info_measures() {
        let ch = Channel::random_binary(7).unwrap();
        let f = Factors::from_laws(
            2,
            3,
            2,
            2,
            2,
            |x2| [0.3, 0.7][x2],
            |s, x2, v| if v == (s ^ x2) { 0.8 } else { 0.2 },
            |s, v, x2, u, x1| {
                let w = [0.1, 0.2, 0.3, 0.15, 0.05, 0.2];
                w[(u * 2 + x1 + s + v + x2) % 6] / (0..6).map(|k| w[(k + s + v + x2) % 6]).sum::<f64>()
            },
        )
        .unwrap();
        let joint = f.joint(&ch).unwrap();
        let (r1, sum) = pair_bounds(&joint).unwrap();
        let b = Evaluator::new(&ch).bounds(&f);
        assert_abs_diff_eq!(b.r1, r1, epsilon = 1e-12);
        assert_abs_diff_eq!(b.sum, sum, epsilon = 1e-12);
    }

    #[test]
    fn xor_region_is_the_unit_simplex() {
        let ch = Channel::xor(0.5).unwrap();
        let f = compute_region(&ch, &small()).unwrap();
        assert_abs_diff_eq!(f.max_sum_rate(), 1.0, epsilon = 0.02);
        assert_abs_diff_eq!(f.max_r1(), 1.0, epsilon = 0.02);
        assert_abs_diff_eq!(f.max_rc(), 1.0, epsilon = 0.02);
        assert!(f.points.windows(2).all(|w| w[0].rate.rc < w[1].rate.rc));
        assert!(f.points.iter().all(|p| p.factors.is_some()));
    }

    #[test]
    fn search_is_deterministic() {
        let ch = Channel::random_binary(3).unwrap();
        let a = compute_region(&ch, &small()).unwrap();
        let b = compute_region(&ch, &small()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_large_inputs_and_bad_warm_starts() {
        let ch = Channel::xor(0.5).unwrap();
        let cfg = SearchConfig { max_input_product: 4, ..small() };
        assert!(compute_region(&ch, &cfg).unwrap_err().is_resource());
        let too_big = Factors::uniform(2, 5, 1, 2, 2);
        let r = compute_region_from(&ch, &small(), RegionKind::Unconstrained, &[too_big]);
        assert!(matches!(r, Err(Error::Dimension(_))));
    }
}
