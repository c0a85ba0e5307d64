//! State-dependent channel fixtures: `Q_S` plus `W_{Y|X1,X2,S}`.
//!
//! On disk a channel is JSON with the transition tensor nested in the axis
//! order `x1, x2, s -> y`:
//!
//! ```json
//! { "id": "xor", "q_s": [0.5, 0.5],
//!   "w": [[[[1,0],[0,1]], [[0,1],[1,0]]], [[[0,1],[1,0]], [[1,0],[0,1]]]] }
//! ```

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{ConditionalKernel, FinitePmf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ChannelSpec {
    id: String,
    q_s: Vec<f64>,
    w: Vec<Vec<Vec<Vec<f64>>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelSpec", into = "ChannelSpec")]
pub struct Channel {
    id: String,
    q_s: FinitePmf,
    kernel: ConditionalKernel,
}

impl TryFrom<ChannelSpec> for Channel {
    type Error = Error;
    fn try_from(spec: ChannelSpec) -> Result<Self> {
        let nx1 = spec.w.len();
        let nx2 = spec.w.first().map_or(0, Vec::len);
        let ns = spec.q_s.len();
        let mut rows = Vec::new();
        for (x1, plane) in spec.w.iter().enumerate() {
            if plane.len() != nx2 {
                return Err(Error::Dimension(format!("w[{x1}] has {} x2 entries, expected {nx2}", plane.len())));
            }
            for (x2, states) in plane.iter().enumerate() {
                if states.len() != ns {
                    return Err(Error::Dimension(format!(
                        "w[{x1}][{x2}] has {} state rows but |S| = {ns}",
                        states.len()
                    )));
                }
                rows.extend(states.iter().cloned());
            }
        }
        let ny = rows.first().map_or(0, Vec::len);
        let kernel = ConditionalKernel::from_rows(&[nx1, nx2, ns], ny, rows)?;
        Channel::new(spec.id, FinitePmf::from_probs(spec.q_s)?, kernel)
    }
}

impl From<Channel> for ChannelSpec {
    fn from(c: Channel) -> Self {
        let (nx1, nx2, ns) = (c.x1_size(), c.x2_size(), c.s_size());
        let w = (0..nx1)
            .map(|x1| {
                (0..nx2)
                    .map(|x2| (0..ns).map(|s| c.kernel.row(&[x1, x2, s]).probs().to_vec()).collect())
                    .collect()
            })
            .collect();
        ChannelSpec { id: c.id, q_s: c.q_s.probs().to_vec(), w }
    }
}

impl Channel {
    pub fn new(id: impl Into<String>, q_s: FinitePmf, kernel: ConditionalKernel) -> Result<Self> {
        let sizes = kernel.input_sizes();
        if sizes.len() != 3 || sizes[2] != q_s.len() {
            return Err(Error::Dimension("channel kernel must be indexed by (x1, x2, s) with |S| = |Q_S|".into()));
        }
        Ok(Channel { id: id.into(), q_s, kernel })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn q_s(&self) -> &FinitePmf {
        &self.q_s
    }

    pub fn kernel(&self) -> &ConditionalKernel {
        &self.kernel
    }

    pub fn s_size(&self) -> usize {
        self.q_s.len()
    }

    pub fn x1_size(&self) -> usize {
        self.kernel.input_sizes()[0]
    }

    pub fn x2_size(&self) -> usize {
        self.kernel.input_sizes()[1]
    }

    pub fn y_size(&self) -> usize {
        self.kernel.output_size()
    }

    /// `W(y | x1, x2, s)`.
    pub fn w(&self, x1: usize, x2: usize, s: usize, y: usize) -> f64 {
        self.kernel.prob(&[x1, x2, s], y)
    }

    /// `Y = X1 xor X2 xor S` with `S ~ Bern(p)`.
    pub fn xor(p: f64) -> Result<Self> {
        let kernel = ConditionalKernel::deterministic(&[2, 2, 2], 2, |i| i[0] ^ i[1] ^ i[2])?;
        Channel::new("xor", FinitePmf::bernoulli(p)?, kernel)
    }

    /// Single-state channel whose output is the input pair, `y = 2 x1 + x2`.
    pub fn clean_mac() -> Result<Self> {
        let kernel = ConditionalKernel::deterministic(&[2, 2, 1], 4, |i| 2 * i[0] + i[1])?;
        Channel::new("clean-mac", FinitePmf::point_mass(1, 0)?, kernel)
    }

    /// Binary channel whose output ignores every input.
    pub fn useless() -> Result<Self> {
        let kernel = ConditionalKernel::constant(&[2, 2, 2], &[0.5, 0.5])?;
        Channel::new("useless", FinitePmf::uniform(2)?, kernel)
    }

    /// A random channel with all alphabets binary; rows and `Q_S` drawn from
    /// the uniform law on the simplex, `Q_S(0)` kept inside `[0.2, 0.8]`.
    pub fn random_binary(seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q0 = 0.2 + 0.6 * rng.random::<f64>();
        let rows = (0..8)
            .map(|_| {
                let a: f64 = rng.random();
                vec![a, 1.0 - a]
            })
            .collect();
        let kernel = ConditionalKernel::from_rows(&[2, 2, 2], 2, rows)?;
        Channel::new(format!("random-binary-{seed}"), FinitePmf::from_probs(vec![q0, 1.0 - q0])?, kernel)
    }

    /// Relabels symbols: new symbol `perm[old]` on each axis.
    pub fn relabeled(&self, perm_s: &[usize], perm_x1: &[usize], perm_x2: &[usize]) -> Result<Self> {
        let (nx1, nx2, ns) = (self.x1_size(), self.x2_size(), self.s_size());
        let mut rows = vec![Vec::new(); nx1 * nx2 * ns];
        let mut q = vec![0.0; ns];
        for s in 0..ns {
            q[perm_s[s]] = self.q_s.prob(s);
            for x1 in 0..nx1 {
                for x2 in 0..nx2 {
                    let at = (perm_x1[x1] * nx2 + perm_x2[x2]) * ns + perm_s[s];
                    rows[at] = self.kernel.row(&[x1, x2, s]).probs().to_vec();
                }
            }
        }
        let kernel = ConditionalKernel::from_rows(&[nx1, nx2, ns], self.y_size(), rows)?;
        Channel::new(self.id.clone(), FinitePmf::from_probs(q)?, kernel)
    }
}
