use rand::Rng;

use super::model::{CodingModel, Words};
use super::typical::Sym;
use super::{CodebookSizes, EncoderFlags};

/// Codebooks of one block: `x2(wc, t')`, `v(wc, t', t)` and
/// `u(wc, t', t, w1, j)`, each a run of `n` symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BlockBook {
    x2: Vec<Sym>,
    v: Vec<Sym>,
    u: Vec<Sym>,
}

/// Independent codebooks for every block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodebookA {
    pub n: usize,
    pub sizes: CodebookSizes,
    blocks: Vec<BlockBook>,
}

impl CodebookA {
    pub fn blocks(&self) -> usize {
        self.blocks.len()
    }

    fn x2(&self, b: usize, wc: usize, tp: usize) -> &[Sym] {
        let k = wc * self.sizes.m_hat + tp;
        &self.blocks[b].x2[k * self.n..(k + 1) * self.n]
    }

    fn v_index(&self, wc: usize, tp: usize, t: usize) -> usize {
        (wc * self.sizes.m_hat + tp) * self.sizes.m_hat + t
    }

    fn v(&self, b: usize, wc: usize, tp: usize, t: usize) -> &[Sym] {
        let k = self.v_index(wc, tp, t);
        &self.blocks[b].v[k * self.n..(k + 1) * self.n]
    }

    fn u(&self, b: usize, wc: usize, tp: usize, t: usize, w1: usize, j: usize) -> &[Sym] {
        let k = (self.v_index(wc, tp, t) * self.sizes.m_1 + w1) * self.sizes.j + j;
        &self.blocks[b].u[k * self.n..(k + 1) * self.n]
    }
}

/// Superposition codebooks drawn from `P_X2`, `P_{V|X2}` and `P_{U|V,X2}`.
pub fn generate_codebooks_a<R: Rng + ?Sized>(
    m: &CodingModel,
    sizes: &CodebookSizes,
    blocks: usize,
    rng: &mut R,
) -> CodebookA {
    let n = m.n;
    let (mc, mh, m1, jj) = (sizes.m_c, sizes.m_hat, sizes.m_1, sizes.j);
    let books = (0..blocks)
        .map(|_| {
            let x2: Vec<Sym> = (0..mc * mh * n).map(|_| m.draw_x2(rng)).collect();
            let mut v = Vec::with_capacity(mc * mh * mh * n);
            for c in 0..mc * mh {
                for _ in 0..mh {
                    for k in 0..n {
                        v.push(m.draw_v(rng, x2[c * n + k]));
                    }
                }
            }
            let mut u = Vec::with_capacity(mc * mh * mh * m1 * jj * n);
            for vk in 0..mc * mh * mh {
                let x2_row = &x2[(vk / mh) * n..(vk / mh + 1) * n];
                let v_row = &v[vk * n..(vk + 1) * n];
                for _ in 0..m1 * jj {
                    for k in 0..n {
                        u.push(m.draw_u(rng, v_row[k], x2_row[k]));
                    }
                }
            }
            BlockBook { x2, v, u }
        })
        .collect();
    CodebookA { n, sizes: *sizes, blocks: books }
}

#[derive(Clone, Debug)]
pub struct EncodedA {
    pub words: Words,
    /// Compression index chosen in each block.
    pub t: Vec<usize>,
    pub j: Vec<usize>,
    pub flags: EncoderFlags,
}

impl EncodedA {
    pub fn transmit<R: Rng + ?Sized>(&self, m: &CodingModel, states: &[Vec<Sym>], rng: &mut R) -> Vec<Vec<Sym>> {
        self.words.transmit(m, states, rng)
    }
}

/// Both encoders for the same `(wc, w1)` in every block. The compression
/// index starts at 0; the first index in a failed search falls back to 0 and
/// a failed bin search to the last index.
pub fn encode_a(cb: &CodebookA, m: &CodingModel, wc: usize, w1: usize, states: &[Vec<Sym>]) -> EncodedA {
    let blocks = cb.blocks();
    let mut counts = Vec::new();
    let mut flags = EncoderFlags::default();
    let mut words = Words::default();
    let (mut ts, mut js) = (Vec::new(), Vec::new());
    let mut tp = 0;
    for (b, s) in states.iter().enumerate().take(blocks) {
        if !m.t_s.check(&[s], &mut counts) {
            flags.state_atypical = true;
        }
        let x2 = cb.x2(b, wc, tp);
        let t = (0..cb.sizes.m_hat).find(|&t| m.t_svx2.check(&[s, cb.v(b, wc, tp, t), x2], &mut counts));
        let t = t.unwrap_or_else(|| {
            if b + 1 < blocks {
                flags.encoder2_covering = true;
            }
            flags.encoder1_covering = true;
            0
        });
        let v = cb.v(b, wc, tp, t);
        let j = (0..cb.sizes.j).find(|&j| m.t_suvx2.check(&[s, cb.u(b, wc, tp, t, w1, j), v, x2], &mut counts));
        let j = j.unwrap_or_else(|| {
            flags.gp_binning = true;
            cb.sizes.j - 1
        });
        words.push(x2, v, cb.u(b, wc, tp, t, w1, j));
        ts.push(t);
        js.push(j);
        tp = t;
    }
    EncodedA { words, t: ts, j: js, flags }
}

/// Simultaneous decoding over all blocks: `(wc, w1)` is a candidate when some
/// chain of compression indices starting at 0 makes every block typical with
/// its output. The common message must be unique first, then the private one.
pub fn decode_a(cb: &CodebookA, m: &CodingModel, y: &[Vec<Sym>]) -> (Option<usize>, Option<usize>) {
    let (mc, mh, m1) = (cb.sizes.m_c, cb.sizes.m_hat, cb.sizes.m_1);
    let blocks = cb.blocks();
    let mut counts = Vec::new();
    // chains[wc][w1]
    let mut chains = vec![vec![false; m1]; mc];
    for (wc, row) in chains.iter_mut().enumerate() {
        // ok[b][(tp * mh + t) * m1 + w1]
        let mut ok = vec![vec![false; mh * mh * m1]; blocks];
        for (b, okb) in ok.iter_mut().enumerate() {
            for tp in 0..mh {
                let x2 = cb.x2(b, wc, tp);
                for t in 0..mh {
                    let v = cb.v(b, wc, tp, t);
                    for w1 in 0..m1 {
                        okb[(tp * mh + t) * m1 + w1] = (0..cb.sizes.j)
                            .any(|j| m.t_uvx2y.check(&[cb.u(b, wc, tp, t, w1, j), v, x2, &y[b]], &mut counts));
                    }
                }
            }
        }
        for (w1, hit) in row.iter_mut().enumerate() {
            let mut reach = vec![false; mh];
            reach[0] = true;
            for okb in &ok {
                let next: Vec<bool> =
                    (0..mh).map(|t| (0..mh).any(|tp| reach[tp] && okb[(tp * mh + t) * m1 + w1])).collect();
                reach = next;
            }
            *hit = reach.iter().any(|r| *r);
        }
    }
    let wc = unique((0..mc).filter(|&wc| chains[wc].iter().any(|h| *h)));
    let w1 = wc.and_then(|wc| unique((0..m1).filter(|&w1| chains[wc][w1])));
    (wc, w1)
}

pub(crate) fn unique(mut it: impl Iterator<Item = usize>) -> Option<usize> {
    let first = it.next()?;
    match it.next() {
        None => Some(first),
        Some(_) => None,
    }
}
