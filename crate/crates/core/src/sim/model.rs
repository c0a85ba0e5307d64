use rand::Rng;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::info::Atom;
use crate::prob::{marginalize, JointDistribution, Var, VarSet};
use crate::region::Factors;

use super::typical::{Sym, TypicalTable, TypicalityParams};

/// Everything the encoders and decoders need from the chosen input law:
/// codeword-generation conditionals, the `X1` draw, the channel, and
/// typicality bands at the configured `(epsilon, n)`.
#[derive(Clone, Debug)]
pub struct CodingModel {
    pub ns: usize,
    pub nu: usize,
    pub nv: usize,
    pub nx1: usize,
    pub nx2: usize,
    pub ny: usize,
    pub n: usize,
    q_s: Vec<f64>,
    p_x2: Vec<f64>,
    /// `[x2][v]`
    p_v_x2: Vec<f64>,
    /// `[v][x2][u]`
    p_u_vx2: Vec<f64>,
    /// `[u][s][v][x2][x1]`
    p_x1: Vec<f64>,
    /// `[x1][x2][s][y]`
    w: Vec<f64>,
    /// `P(y | u, s, v, x2)` with `X1` summed out, `[u][s][v][x2][y]`
    p_y_usvx2: Vec<f64>,
    pub t_s: TypicalTable,
    pub t_svx2: TypicalTable,
    pub t_suvx2: TypicalTable,
    pub t_uvx2y: TypicalTable,
    pub t_x2y: TypicalTable,
    pub t_vx2y: TypicalTable,
    pub joint: JointDistribution,
}

pub(crate) fn draw<R: Rng + ?Sized>(rng: &mut R, pmf: &[f64]) -> Sym {
    let mut x: f64 = rng.random();
    for (k, p) in pmf.iter().enumerate() {
        if x < *p {
            return k as Sym;
        }
        x -= p;
    }
    // rounding slack: last symbol with positive mass
    pmf.iter().rposition(|p| *p > 0.0).unwrap_or(0) as Sym
}

impl CodingModel {
    pub fn new(channel: &Channel, factors: &Factors, params: TypicalityParams) -> Result<CodingModel> {
        let joint = factors.joint(channel)?;
        let (ns, nu, nv, nx1, nx2, ny) =
            (channel.s_size(), factors.u_size, factors.v_size, channel.x1_size(), channel.x2_size(), channel.y_size());
        if [ns, nu, nv, nx1, nx2, ny].iter().any(|&k| k > Sym::MAX as usize + 1) {
            return Err(Error::Config("simulated alphabets are limited to 256 symbols".into()));
        }
        let q_s = channel.q_s().probs().to_vec();
        let mut p_v_x2 = vec![0.0; nx2 * nv];
        let mut p_uv_x2 = vec![0.0; nv * nx2 * nu];
        for s in 0..ns {
            for x2 in 0..nx2 {
                for v in 0..nv {
                    let pv = q_s[s] * factors.pv(s, x2, v);
                    p_v_x2[x2 * nv + v] += pv;
                    for u in 0..nu {
                        let pu: f64 = (0..nx1).map(|x1| factors.pux1(s, v, x2, u, x1)).sum();
                        p_uv_x2[(v * nx2 + x2) * nu + u] += pv * pu;
                    }
                }
            }
        }
        let mut p_u_vx2 = p_uv_x2;
        for v in 0..nv {
            for x2 in 0..nx2 {
                normalize_or_uniform(&mut p_u_vx2[(v * nx2 + x2) * nu..(v * nx2 + x2 + 1) * nu]);
            }
        }
        let mut p_x1 = vec![0.0; nu * ns * nv * nx2 * nx1];
        for u in 0..nu {
            for s in 0..ns {
                for v in 0..nv {
                    for x2 in 0..nx2 {
                        let base = (((u * ns + s) * nv + v) * nx2 + x2) * nx1;
                        for x1 in 0..nx1 {
                            p_x1[base + x1] = factors.pux1(s, v, x2, u, x1);
                        }
                        normalize_or_uniform(&mut p_x1[base..base + nx1]);
                    }
                }
            }
        }
        let mut w = vec![0.0; nx1 * nx2 * ns * ny];
        for x1 in 0..nx1 {
            for x2 in 0..nx2 {
                for s in 0..ns {
                    for y in 0..ny {
                        w[((x1 * nx2 + x2) * ns + s) * ny + y] = channel.w(x1, x2, s, y);
                    }
                }
            }
        }
        let mut p_y_usvx2 = vec![0.0; nu * ns * nv * nx2 * ny];
        for u in 0..nu {
            for s in 0..ns {
                for v in 0..nv {
                    for x2 in 0..nx2 {
                        let ctx = ((u * ns + s) * nv + v) * nx2 + x2;
                        for x1 in 0..nx1 {
                            let px1 = p_x1[ctx * nx1 + x1];
                            for y in 0..ny {
                                p_y_usvx2[ctx * ny + y] += px1 * w[((x1 * nx2 + x2) * ns + s) * ny + y];
                            }
                        }
                    }
                }
            }
        }
        let table = |vars: &[Var]| -> Result<TypicalTable> {
            Ok(TypicalTable::from_marginal(&marginalize(&joint, VarSet::of(vars))?, params))
        };
        Ok(CodingModel {
            ns,
            nu,
            nv,
            nx1,
            nx2,
            ny,
            n: params.n,
            q_s,
            p_x2: factors.p_x2.clone(),
            p_v_x2,
            p_u_vx2,
            p_x1,
            w,
            p_y_usvx2,
            t_s: table(&[Var::S])?,
            t_svx2: table(&[Var::S, Var::V, Var::X2])?,
            t_suvx2: table(&[Var::S, Var::U, Var::V, Var::X2])?,
            t_uvx2y: table(&[Var::U, Var::V, Var::X2, Var::Y])?,
            t_x2y: table(&[Var::X2, Var::Y])?,
            t_vx2y: table(&[Var::V, Var::X2, Var::Y])?,
            joint,
        })
    }

    pub fn info(&self, atom: &str) -> Result<f64> {
        atom.parse::<Atom>()?.evaluate(&self.joint)
    }

    pub fn draw_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Sym {
        draw(rng, &self.q_s)
    }

    pub fn draw_x2<R: Rng + ?Sized>(&self, rng: &mut R) -> Sym {
        draw(rng, &self.p_x2)
    }

    pub fn draw_v<R: Rng + ?Sized>(&self, rng: &mut R, x2: Sym) -> Sym {
        let x2 = x2 as usize;
        draw(rng, &self.p_v_x2[x2 * self.nv..(x2 + 1) * self.nv])
    }

    pub fn draw_u<R: Rng + ?Sized>(&self, rng: &mut R, v: Sym, x2: Sym) -> Sym {
        let k = v as usize * self.nx2 + x2 as usize;
        draw(rng, &self.p_u_vx2[k * self.nu..(k + 1) * self.nu])
    }

    fn ctx(&self, u: Sym, s: Sym, v: Sym, x2: Sym) -> usize {
        ((u as usize * self.ns + s as usize) * self.nv + v as usize) * self.nx2 + x2 as usize
    }

    /// `X1` from `P_{X1|U,S,V,X2}`; uniform on contexts of zero probability.
    pub fn draw_x1<R: Rng + ?Sized>(&self, rng: &mut R, u: Sym, s: Sym, v: Sym, x2: Sym) -> Sym {
        let k = self.ctx(u, s, v, x2);
        draw(rng, &self.p_x1[k * self.nx1..(k + 1) * self.nx1])
    }

    pub fn draw_y<R: Rng + ?Sized>(&self, rng: &mut R, x1: Sym, x2: Sym, s: Sym) -> Sym {
        let k = (x1 as usize * self.nx2 + x2 as usize) * self.ns + s as usize;
        draw(rng, &self.w[k * self.ny..(k + 1) * self.ny])
    }

    pub fn q_s(&self) -> &[f64] {
        &self.q_s
    }

    pub fn p_x2(&self) -> &[f64] {
        &self.p_x2
    }

    pub fn p_v_given_x2(&self, x2: Sym) -> &[f64] {
        let x2 = x2 as usize;
        &self.p_v_x2[x2 * self.nv..(x2 + 1) * self.nv]
    }

    pub fn p_u_given_vx2(&self, v: Sym, x2: Sym) -> &[f64] {
        let k = v as usize * self.nx2 + x2 as usize;
        &self.p_u_vx2[k * self.nu..(k + 1) * self.nu]
    }

    /// `P(y | u, s, v, x2)` after drawing `X1`.
    pub fn p_y_given(&self, u: Sym, s: Sym, v: Sym, x2: Sym) -> &[f64] {
        let k = self.ctx(u, s, v, x2);
        &self.p_y_usvx2[k * self.ny..(k + 1) * self.ny]
    }
}

/// Codewords sent in each block: `x2`, `v` and `u` sequences.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Words {
    pub x2: Vec<Vec<Sym>>,
    pub v: Vec<Vec<Sym>>,
    pub u: Vec<Vec<Sym>>,
}

impl Words {
    pub fn push(&mut self, x2: &[Sym], v: &[Sym], u: &[Sym]) {
        self.x2.push(x2.to_vec());
        self.v.push(v.to_vec());
        self.u.push(u.to_vec());
    }

    /// Draws `X1` and the channel output for every block.
    pub fn transmit<R: Rng + ?Sized>(&self, m: &CodingModel, states: &[Vec<Sym>], rng: &mut R) -> Vec<Vec<Sym>> {
        (0..self.x2.len())
            .map(|b| {
                (0..m.n)
                    .map(|k| {
                        let (u, s, v, x2) = (self.u[b][k], states[b][k], self.v[b][k], self.x2[b][k]);
                        let x1 = m.draw_x1(rng, u, s, v, x2);
                        m.draw_y(rng, x1, x2, s)
                    })
                    .collect()
            })
            .collect()
    }

    /// Probability of the output sequences given the states.
    pub fn output_probability(&self, m: &CodingModel, states: &[Vec<Sym>], y: &[Vec<Sym>]) -> f64 {
        let mut p = 1.0;
        for b in 0..self.x2.len() {
            for k in 0..m.n {
                p *= m.p_y_given(self.u[b][k], states[b][k], self.v[b][k], self.x2[b][k])[y[b][k] as usize];
                if p == 0.0 {
                    return 0.0;
                }
            }
        }
        p
    }
}

fn normalize_or_uniform(row: &mut [f64]) {
    let total: f64 = row.iter().sum();
    if total > 0.0 {
        row.iter_mut().for_each(|p| *p /= total);
    } else {
        let k = row.len() as f64;
        row.iter_mut().for_each(|p| *p = 1.0 / k);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conditionals_are_pmfs_and_consistent() {
        let ch = Channel::random_binary(5).unwrap();
        let f = Factors::from_laws(2, 2, 2, 2, 2, |x| [0.4, 0.6][x], |s, x2, v| if v == s ^ x2 { 0.7 } else { 0.3 }, |s, v, _x2, u, x1| {
            if u == (s ^ v) { if x1 == u { 0.6 } else { 0.2 } } else if x1 == u { 0.15 } else { 0.05 }
        })
        .unwrap();
        let m = CodingModel::new(&ch, &f, TypicalityParams::new(0.2, 10).unwrap()).unwrap();
        for x2 in 0..2 {
            assert_abs_diff_eq!(m.p_v_given_x2(x2).iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            for v in 0..2 {
                assert_abs_diff_eq!(m.p_u_given_vx2(v, x2).iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            }
        }
        // P(v | x2) equals the joint's conditional
        let j = &m.joint;
        let pvx2 = |v: usize, x2: usize| -> f64 {
            let mut t = 0.0;
            for s in 0..2 {
                for u in 0..2 {
                    for x1 in 0..2 {
                        for y in 0..2 {
                            t += j.get([s, u, v, x1, x2, y]);
                        }
                    }
                }
            }
            t
        };
        let pv1 = pvx2(1, 0) / (pvx2(0, 0) + pvx2(1, 0));
        assert_abs_diff_eq!(m.p_v_given_x2(0)[1], pv1, epsilon = 1e-12);
    }

    #[test]
    fn draws_follow_the_pmf() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let hits = (0..20000).filter(|_| draw(&mut rng, &[0.25, 0.75]) == 1).count();
        assert!((hits as f64 / 20000.0 - 0.75).abs() < 0.015);
        assert_eq!(draw(&mut rng, &[0.0, 1.0]), 1);
    }
}
