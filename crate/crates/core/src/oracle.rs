//! Brute-force references, written without the optimised production paths:
//! a grid search over every conditional law and information terms summed
//! straight from their definitions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::prob::JointDistribution;
use crate::region::{FrontierPoint, RatePair, RegionFrontier, RegionKind, SearchMetadata};

/// Grid resolution: every row of every law ranges over the pmfs with entries
/// in multiples of `1 / levels`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub u_size: usize,
    pub v_size: usize,
    pub levels: usize,
    /// Refuse grids with more points than this.
    pub max_points: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { u_size: 2, v_size: 1, levels: 2, max_points: 2_000_000 }
    }
}

fn compositions(len: usize, levels: usize) -> Vec<Vec<f64>> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(left - k, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(levels, len, &mut Vec::new(), &mut raw);
    raw.into_iter().map(|c| c.into_iter().map(|k| k as f64 / levels as f64).collect()).collect()
}

/// Six-axis tensor `p[s][u][v][x1][x2][y]` built with plain loops.
struct Tensor {
    n: [usize; 6],
    p: Vec<f64>,
}

impl Tensor {
    fn at(&self, i: [usize; 6]) -> f64 {
        let mut k = 0;
        for a in 0..6 {
            k = k * self.n[a] + i[a];
        }
        self.p[k]
    }

    fn for_each(&self, mut f: impl FnMut([usize; 6], f64)) {
        let n = self.n;
        for s in 0..n[0] {
            for u in 0..n[1] {
                for v in 0..n[2] {
                    for x1 in 0..n[3] {
                        for x2 in 0..n[4] {
                            for y in 0..n[5] {
                                let i = [s, u, v, x1, x2, y];
                                f(i, self.at(i));
                            }
                        }
                    }
                }
            }
        }
    }

    /// Marginal over the listed axes, keyed by their values.
    fn marginal(&self, axes: &[usize]) -> BTreeMap<Vec<usize>, f64> {
        let mut m = BTreeMap::new();
        self.for_each(|i, p| {
            if p > 0.0 {
                *m.entry(axes.iter().map(|&a| i[a]).collect::<Vec<_>>()).or_insert(0.0) += p;
            }
        });
        m
    }

    /// `sum p(a,b,c) log p(a,b,c) p(c) / (p(a,c) p(b,c))`.
    fn cmi(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        let cat = |x: &[usize], y: &[usize]| -> Vec<usize> { x.iter().chain(y).copied().collect() };
        let abc = self.marginal(&cat(&cat(a, b), c));
        let ac = self.marginal(&cat(a, c));
        let bc = self.marginal(&cat(b, c));
        let cm = self.marginal(c);
        let mut total = 0.0;
        for (key, p) in &abc {
            let (ka, rest) = key.split_at(a.len());
            let (kb, kc) = rest.split_at(b.len());
            let pc = if c.is_empty() { 1.0 } else { cm[kc] };
            total += p * (p * pc / (ac[&cat(ka, kc)] * bc[&cat(kb, kc)])).log2();
        }
        total
    }
}

const S: usize = 0;
const U: usize = 1;
const V: usize = 2;
const X2: usize = 4;
const Y: usize = 5;

/// Every information term appearing in the region bounds, the auxiliary-rate
/// constraints and the decodability constraint.
pub fn direct_info_terms(joint: &JointDistribution) -> BTreeMap<String, f64> {
    let t = Tensor { n: joint.sizes(), p: joint.probs().to_vec() };
    let terms: [(&str, &[usize], &[usize], &[usize]); 10] = [
        ("I(U;Y|V,X2)", &[U], &[Y], &[V, X2]),
        ("I(U;S|V,X2)", &[U], &[S], &[V, X2]),
        ("I(U,V,X2;Y)", &[U, V, X2], &[Y], &[]),
        ("I(U,V,X2;S)", &[U, V, X2], &[S], &[]),
        ("I(V;S|X2)", &[V], &[S], &[X2]),
        ("I(X2;Y)", &[X2], &[Y], &[]),
        ("I(U,V;Y|X2)", &[U, V], &[Y], &[X2]),
        ("I(V,X2;Y)", &[V, X2], &[Y], &[]),
        ("I(V,X2;S)", &[V, X2], &[S], &[]),
        ("I(X2;S)", &[X2], &[S], &[]),
    ];
    terms.iter().map(|(name, a, b, c)| (name.to_string(), t.cmi(a, b, c))).collect()
}

fn upper_hull(corners: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = corners.to_vec();
    let r1_max = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    let rc_max = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    pts.push((0.0, r1_max));
    pts.push((rc_max, 0.0));
    // keep points not weakly dominated by another
    let mut front: Vec<(f64, f64)> = pts
        .iter()
        .copied()
        .filter(|p| !pts.iter().any(|q| q.0 >= p.0 && q.1 >= p.1 && (q.0 > p.0 || q.1 > p.1)))
        .collect();
    front.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    front.dedup();
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in front {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Region from exhaustively enumerating a grid of input distributions.
pub fn exhaustive_region(channel: &Channel, grid: &GridSpec) -> Result<RegionFrontier> {
    let (ns, nx1, nx2, ny) = (channel.s_size(), channel.x1_size(), channel.x2_size(), channel.y_size());
    let (nu, nv) = (grid.u_size, grid.v_size);
    if nu == 0 || nv == 0 || grid.levels == 0 {
        return Err(Error::Config("grid sizes and levels must be positive".into()));
    }
    let px2_grid = compositions(nx2, grid.levels);
    let pv_grid = compositions(nv, grid.levels);
    let pux1_grid = compositions(nu * nx1, grid.levels);
    let (n_v_rows, n_ux1_rows) = (ns * nx2, ns * nv * nx2);
    let total = (px2_grid.len() as f64)
        * (pv_grid.len() as f64).powi(n_v_rows as i32)
        * (pux1_grid.len() as f64).powi(n_ux1_rows as i32);
    if total > grid.max_points as f64 {
        return Err(Error::Resource(format!("grid has {total:.0} points, limit {}", grid.max_points)));
    }
    let q = channel.q_s().probs();
    let mut corners = Vec::new();
    let mut v_idx = vec![0usize; n_v_rows];
    let mut u_idx = vec![0usize; n_ux1_rows];
    for px2 in &px2_grid {
        v_idx.fill(0);
        loop {
            u_idx.fill(0);
            loop {
                let n = [ns, nu, nv, nx1, nx2, ny];
                let mut p = vec![0.0; n.iter().product()];
                let mut k = 0;
                for s in 0..ns {
                    for u in 0..nu {
                        for v in 0..nv {
                            for x1 in 0..nx1 {
                                for x2 in 0..nx2 {
                                    for y in 0..ny {
                                        let pv = pv_grid[v_idx[s * nx2 + x2]][v];
                                        let pux1 = pux1_grid[u_idx[(s * nv + v) * nx2 + x2]][u * nx1 + x1];
                                        p[k] = q[s] * px2[x2] * pv * pux1 * channel.w(x1, x2, s, y);
                                        k += 1;
                                    }
                                }
                            }
                        }
                    }
                }
                let t = Tensor { n, p };
                let a = t.cmi(&[U], &[Y], &[V, X2]) - t.cmi(&[U], &[S], &[V, X2]);
                let b = t.cmi(&[U, V, X2], &[Y], &[]) - t.cmi(&[U, V, X2], &[S], &[]);
                let b = b.max(0.0);
                let a = a.min(b).max(0.0);
                corners.push((b - a, a));
                corners.push((b, 0.0));
                if !bump(&mut u_idx, pux1_grid.len()) {
                    break;
                }
            }
            if !bump(&mut v_idx, pv_grid.len()) {
                break;
            }
        }
    }
    let hull = upper_hull(&corners);
    Ok(RegionFrontier {
        channel_id: channel.id().to_string(),
        points: hull
            .into_iter()
            .map(|(rc, r1)| FrontierPoint { rate: RatePair { rc, r1 }, bounds: None, factors: None })
            .collect(),
        metadata: SearchMetadata {
            kind: RegionKind::Unconstrained,
            u_cap: nu,
            v_cap: nv,
            grid_levels: grid.levels,
            candidates: corners.len() / 2,
            ..Default::default()
        },
    })
}

fn bump(idx: &mut [usize], radix: usize) -> bool {
    for d in idx.iter_mut() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(2, 2).len(), 3);
        assert_eq!(compositions(4, 2).len(), 10);
        assert!(compositions(3, 4).iter().all(|c| (c.iter().sum::<f64>() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn xor_grid_reaches_the_simplex() {
        let r = exhaustive_region(&Channel::xor(0.5).unwrap(), &GridSpec::default()).unwrap();
        let sum = r.points.iter().map(|p| p.rate.rc + p.rate.r1).fold(0.0, f64::max);
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_size_limit() {
        let g = GridSpec { u_size: 4, v_size: 2, levels: 4, max_points: 1000 };
        assert!(exhaustive_region(&Channel::xor(0.5).unwrap(), &g).unwrap_err().is_resource());
    }
}
