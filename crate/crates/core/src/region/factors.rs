use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::prob::{build_joint, entropy_of, ConditionalKernel, FinitePmf, JointDistribution};

/// The free part of a distribution in the class searched for the region:
/// `P_X2`, `P_{V|S,X2}` and `P_{U,X1|S,V,X2}`, stored as flat row-major
/// simplices.
///
/// * `p_x2[x2]`
/// * `p_v[(s * |X2| + x2) * |V| + v]`
/// * `p_ux1[((s * |V| + v) * |X2| + x2) * |U||X1| + u * |X1| + x1]`
#[derive(Clone, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Factors {
    pub s_size: usize,
    pub u_size: usize,
    pub v_size: usize,
    pub x1_size: usize,
    pub x2_size: usize,
    pub p_x2: Vec<f64>,
    pub p_v: Vec<f64>,
    pub p_ux1: Vec<f64>,
}

/// One simplex row inside the concatenated parameter vector.
#[derive(Clone, Copy, Debug)]
pub(crate) struct RowSpan {
    pub block: usize,
    pub offset: usize,
    pub len: usize,
}

impl Factors {
    /// All rows uniform.
    pub fn uniform(s: usize, u: usize, v: usize, x1: usize, x2: usize) -> Factors {
        Factors {
            s_size: s,
            u_size: u,
            v_size: v,
            x1_size: x1,
            x2_size: x2,
            p_x2: vec![1.0 / x2 as f64; x2],
            p_v: vec![1.0 / v as f64; s * x2 * v],
            p_ux1: vec![1.0 / (u * x1) as f64; s * v * x2 * u * x1],
        }
    }

    /// Builds factors from the three conditional laws.
    pub fn from_laws(
        s: usize,
        u: usize,
        v: usize,
        x1: usize,
        x2: usize,
        p_x2: impl Fn(usize) -> f64,
        p_v: impl Fn(usize, usize, usize) -> f64,
        p_ux1: impl Fn(usize, usize, usize, usize, usize) -> f64,
    ) -> Result<Factors> {
        let mut f = Factors::uniform(s, u, v, x1, x2);
        for b in 0..x2 {
            f.p_x2[b] = p_x2(b);
        }
        for si in 0..s {
            for b in 0..x2 {
                for vi in 0..v {
                    f.p_v[(si * x2 + b) * v + vi] = p_v(si, b, vi);
                }
            }
        }
        for si in 0..s {
            for vi in 0..v {
                for b in 0..x2 {
                    for ui in 0..u {
                        for a in 0..x1 {
                            let k = f.ux1_index(si, vi, b, ui, a);
                            f.p_ux1[k] = p_ux1(si, vi, b, ui, a);
                        }
                    }
                }
            }
        }
        f.check()?;
        Ok(f)
    }

    pub(crate) fn ux1_index(&self, s: usize, v: usize, x2: usize, u: usize, x1: usize) -> usize {
        ((s * self.v_size + v) * self.x2_size + x2) * self.u_size * self.x1_size + u * self.x1_size + x1
    }

    pub fn pv(&self, s: usize, x2: usize, v: usize) -> f64 {
        self.p_v[(s * self.x2_size + x2) * self.v_size + v]
    }

    pub fn pux1(&self, s: usize, v: usize, x2: usize, u: usize, x1: usize) -> f64 {
        self.p_ux1[self.ux1_index(s, v, x2, u, x1)]
    }

    pub(crate) fn rows(&self) -> Vec<RowSpan> {
        let mut rows = vec![RowSpan { block: 0, offset: 0, len: self.x2_size }];
        for r in 0..self.s_size * self.x2_size {
            rows.push(RowSpan { block: 1, offset: r * self.v_size, len: self.v_size });
        }
        let w = self.u_size * self.x1_size;
        for r in 0..self.s_size * self.v_size * self.x2_size {
            rows.push(RowSpan { block: 2, offset: r * w, len: w });
        }
        rows
    }

    pub(crate) fn block_mut(&mut self, block: usize) -> &mut [f64] {
        match block {
            0 => &mut self.p_x2,
            1 => &mut self.p_v,
            _ => &mut self.p_ux1,
        }
    }

    pub(crate) fn block(&self, block: usize) -> &[f64] {
        match block {
            0 => &self.p_x2,
            1 => &self.p_v,
            _ => &self.p_ux1,
        }
    }

    /// Checks shapes and that every row is a pmf.
    pub fn check(&self) -> Result<()> {
        let expect = [
            (self.p_x2.len(), self.x2_size),
            (self.p_v.len(), self.s_size * self.x2_size * self.v_size),
            (self.p_ux1.len(), self.s_size * self.v_size * self.x2_size * self.u_size * self.x1_size),
        ];
        for (got, want) in expect {
            if got != want {
                return Err(Error::Dimension(format!("factor block has {got} entries, expected {want}")));
            }
        }
        for row in self.rows() {
            let r = &self.block(row.block)[row.offset..row.offset + row.len];
            let total: f64 = r.iter().sum();
            if r.iter().any(|p| !p.is_finite() || *p < 0.0) || (total - 1.0).abs() > 1e-9 {
                return Err(Error::Validation(format!("factor row {r:?} is not a pmf")));
            }
        }
        Ok(())
    }

    pub fn matches(&self, channel: &Channel) -> bool {
        self.s_size == channel.s_size() && self.x1_size == channel.x1_size() && self.x2_size == channel.x2_size()
    }

    /// The three laws as probability-core objects.
    pub fn to_kernels(&self) -> Result<(FinitePmf, ConditionalKernel, ConditionalKernel)> {
        let px2 = FinitePmf::from_probs(self.p_x2.clone())?;
        let pv = ConditionalKernel::from_rows(
            &[self.s_size, self.x2_size],
            self.v_size,
            self.p_v.chunks(self.v_size).map(<[f64]>::to_vec).collect(),
        )?;
        let w = self.u_size * self.x1_size;
        let pux1 = ConditionalKernel::from_rows(
            &[self.s_size, self.v_size, self.x2_size],
            w,
            self.p_ux1.chunks(w).map(<[f64]>::to_vec).collect(),
        )?;
        Ok((px2, pv, pux1))
    }

    pub fn joint(&self, channel: &Channel) -> Result<JointDistribution> {
        if !self.matches(channel) {
            return Err(Error::Dimension("factors do not match the channel alphabets".into()));
        }
        let (px2, pv, pux1) = self.to_kernels()?;
        build_joint(channel.q_s(), &px2, &pv, &pux1, channel.kernel())
    }

    /// Pads `U` and `V` with unused symbols up to the given sizes.
    pub fn embed(&self, u_size: usize, v_size: usize) -> Result<Factors> {
        if u_size < self.u_size || v_size < self.v_size {
            return Err(Error::Usage("embedding can only enlarge auxiliary alphabets".into()));
        }
        let mut out = Factors::uniform(self.s_size, u_size, v_size, self.x1_size, self.x2_size);
        out.p_x2.clone_from(&self.p_x2);
        for s in 0..self.s_size {
            for x2 in 0..self.x2_size {
                for v in 0..v_size {
                    out.p_v[(s * self.x2_size + x2) * v_size + v] = if v < self.v_size { self.pv(s, x2, v) } else { 0.0 };
                }
            }
        }
        for s in 0..self.s_size {
            for v in 0..v_size {
                // rows for unused v symbols copy v = 0; they carry no mass
                let src_v = if v < self.v_size { v } else { 0 };
                for x2 in 0..self.x2_size {
                    for u in 0..u_size {
                        for x1 in 0..self.x1_size {
                            let k = out.ux1_index(s, v, x2, u, x1);
                            out.p_ux1[k] = if u < self.u_size { self.pux1(s, src_v, x2, u, x1) } else { 0.0 };
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// The two right-hand sides of the region for one distribution, in bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    /// `I(U;Y|V,X2) - I(U;S|V,X2)`
    pub r1: f64,
    /// `I(U,V,X2;Y) - I(U,V,X2;S)`
    pub sum: f64,
}

impl Bounds {
    /// `I(V,X2;Y) - I(V,X2;S)`, which equals `sum - r1` by the chain rule.
    pub fn decodability(&self) -> f64 {
        self.sum - self.r1
    }

    /// Clipped corner values `(min(r1, sum)^+, sum^+)`.
    pub fn clipped(&self) -> (f64, f64) {
        let sum = self.sum.max(0.0);
        (self.r1.min(self.sum).max(0.0).min(sum), sum)
    }
}

/// Evaluates [`Bounds`] straight from factors through the two marginals
/// `P_{S,U,V,X2}` and `P_{U,V,X2,Y}`, without materialising the six-way joint.
pub(crate) struct Evaluator<'c> {
    channel: &'c Channel,
    h_s: f64,
    suvx2: Vec<f64>,
    uvx2y: Vec<f64>,
    svx2: Vec<f64>,
    vx2y: Vec<f64>,
    y: Vec<f64>,
}

impl<'c> Evaluator<'c> {
    pub fn new(channel: &'c Channel) -> Self {
        Evaluator {
            channel,
            h_s: entropy_of(channel.q_s().probs()),
            suvx2: Vec::new(),
            uvx2y: Vec::new(),
            svx2: Vec::new(),
            vx2y: Vec::new(),
            y: Vec::new(),
        }
    }

    pub fn bounds(&mut self, f: &Factors) -> Bounds {
        let ch = self.channel;
        let (ns, nu, nv, nx1, nx2, ny) = (f.s_size, f.u_size, f.v_size, f.x1_size, f.x2_size, ch.y_size());
        reset(&mut self.suvx2, ns * nu * nv * nx2);
        reset(&mut self.uvx2y, nu * nv * nx2 * ny);
        reset(&mut self.svx2, ns * nv * nx2);
        reset(&mut self.vx2y, nv * nx2 * ny);
        reset(&mut self.y, ny);
        let q = ch.q_s().probs();
        for s in 0..ns {
            for x2 in 0..nx2 {
                let base_sx2 = q[s] * f.p_x2[x2];
                if base_sx2 == 0.0 {
                    continue;
                }
                for v in 0..nv {
                    let base = base_sx2 * f.pv(s, x2, v);
                    if base == 0.0 {
                        continue;
                    }
                    self.svx2[(s * nv + v) * nx2 + x2] += base;
                    let row0 = f.ux1_index(s, v, x2, 0, 0);
                    for u in 0..nu {
                        let mut m = 0.0;
                        let out = ((u * nv + v) * nx2 + x2) * ny;
                        for x1 in 0..nx1 {
                            let w = base * f.p_ux1[row0 + u * nx1 + x1];
                            if w == 0.0 {
                                continue;
                            }
                            m += w;
                            let wrow = ch.kernel().row(&[x1, x2, s]).probs();
                            for y in 0..ny {
                                self.uvx2y[out + y] += w * wrow[y];
                            }
                        }
                        self.suvx2[((s * nu + u) * nv + v) * nx2 + x2] += m;
                    }
                }
            }
        }
        for u in 0..nu {
            for k in 0..nv * nx2 * ny {
                let p = self.uvx2y[u * nv * nx2 * ny + k];
                self.vx2y[k] += p;
                self.y[k % ny] += p;
            }
        }
        let h_suvx2 = entropy_of(&self.suvx2);
        let h_uvx2y = entropy_of(&self.uvx2y);
        let h_svx2 = entropy_of(&self.svx2);
        let h_vx2y = entropy_of(&self.vx2y);
        let h_y = entropy_of(&self.y);
        Bounds { r1: h_vx2y - h_uvx2y - h_svx2 + h_suvx2, sum: h_y - h_uvx2y + h_suvx2 - self.h_s }
    }
}

fn reset(buf: &mut Vec<f64>, len: usize) {
    buf.clear();
    buf.resize(len, 0.0);
}
