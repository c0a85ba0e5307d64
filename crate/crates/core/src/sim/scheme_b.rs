use rand::seq::SliceRandom;
use rand::Rng;

use super::model::{CodingModel, Words};
use super::scheme_a::unique;
use super::typical::Sym;
use super::{CodebookSizes, DecodeStage, EncoderFlags};

/// One codebook reused in every block: `x2(wc, s)`, `v(wc, s, z)` and
/// `u(wc, s, z, w1, j)`, with the compression indices `z` split into `M_0`
/// cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodebookB {
    pub n: usize,
    pub sizes: CodebookSizes,
    x2: Vec<Sym>,
    v: Vec<Sym>,
    u: Vec<Sym>,
    cell_of: Vec<usize>,
    cells: Vec<Vec<usize>>,
}

impl CodebookB {
    fn x2(&self, wc: usize, s: usize) -> &[Sym] {
        let k = wc * self.sizes.m_0 + s;
        &self.x2[k * self.n..(k + 1) * self.n]
    }

    fn v_index(&self, wc: usize, s: usize, z: usize) -> usize {
        (wc * self.sizes.m_0 + s) * self.sizes.m_hat + z
    }

    fn v(&self, wc: usize, s: usize, z: usize) -> &[Sym] {
        let k = self.v_index(wc, s, z);
        &self.v[k * self.n..(k + 1) * self.n]
    }

    fn u(&self, wc: usize, s: usize, z: usize, w1: usize, j: usize) -> &[Sym] {
        let k = (self.v_index(wc, s, z) * self.sizes.m_1 + w1) * self.sizes.j + j;
        &self.u[k * self.n..(k + 1) * self.n]
    }

    pub fn cell_of(&self, z: usize) -> usize {
        self.cell_of[z]
    }

    pub fn cell(&self, s: usize) -> &[usize] {
        &self.cells[s]
    }
}

/// Cells are `z mod M_0`, or a random balanced partition.
pub fn generate_codebooks_b<R: Rng + ?Sized>(
    m: &CodingModel,
    sizes: &CodebookSizes,
    random_partition: bool,
    rng: &mut R,
) -> CodebookB {
    let n = m.n;
    let (mc, m0, mh, m1, jj) = (sizes.m_c, sizes.m_0, sizes.m_hat, sizes.m_1, sizes.j);
    let x2: Vec<Sym> = (0..mc * m0 * n).map(|_| m.draw_x2(rng)).collect();
    let mut v = Vec::with_capacity(mc * m0 * mh * n);
    for c in 0..mc * m0 {
        for _ in 0..mh {
            for k in 0..n {
                v.push(m.draw_v(rng, x2[c * n + k]));
            }
        }
    }
    let mut u = Vec::with_capacity(mc * m0 * mh * m1 * jj * n);
    for vk in 0..mc * m0 * mh {
        let x2_row = &x2[(vk / mh) * n..(vk / mh + 1) * n];
        let v_row = &v[vk * n..(vk + 1) * n];
        for _ in 0..m1 * jj {
            for k in 0..n {
                u.push(m.draw_u(rng, v_row[k], x2_row[k]));
            }
        }
    }
    let mut order: Vec<usize> = (0..mh).collect();
    if random_partition {
        order.shuffle(rng);
    }
    let mut cell_of = vec![0; mh];
    let mut cells = vec![Vec::new(); m0];
    for (pos, &z) in order.iter().enumerate() {
        cell_of[z] = pos % m0;
    }
    for z in 0..mh {
        cells[cell_of[z]].push(z);
    }
    CodebookB { n, sizes: *sizes, x2, v, u, cell_of, cells }
}

#[derive(Clone, Debug)]
pub struct EncodedB {
    pub words: Words,
    pub z: Vec<usize>,
    /// Cell index carried by `x2` in each block.
    pub s: Vec<usize>,
    pub j: Vec<usize>,
    pub flags: EncoderFlags,
}

impl EncodedB {
    pub fn transmit<R: Rng + ?Sized>(&self, m: &CodingModel, states: &[Vec<Sym>], rng: &mut R) -> Vec<Vec<Sym>> {
        self.words.transmit(m, states, rng)
    }
}

/// Block `i` sends `x2(wc_i, s_{i-1})`; both encoders then pick the first
/// `z` whose `v` covers the state, and encoder 1 the first bin index.
/// Before the first block `z = 0`, so the initial cell is known to everyone.
pub fn encode_b(cb: &CodebookB, m: &CodingModel, wcs: &[usize], w1s: &[usize], states: &[Vec<Sym>]) -> EncodedB {
    let blocks = wcs.len();
    let mut counts = Vec::new();
    let mut flags = EncoderFlags::default();
    let mut words = Words::default();
    let (mut zs, mut cells, mut js) = (Vec::new(), Vec::new(), Vec::new());
    let mut sp = cb.cell_of[0];
    for b in 0..blocks {
        let (s, wc, w1) = (&states[b], wcs[b], w1s[b]);
        if !m.t_s.check(&[s], &mut counts) {
            flags.state_atypical = true;
        }
        let x2 = cb.x2(wc, sp);
        let z = (0..cb.sizes.m_hat).find(|&z| m.t_svx2.check(&[s, cb.v(wc, sp, z), x2], &mut counts));
        let z = z.unwrap_or_else(|| {
            if b + 1 < blocks {
                flags.encoder2_covering = true;
            }
            flags.encoder1_covering = true;
            0
        });
        let v = cb.v(wc, sp, z);
        let j = (0..cb.sizes.j).find(|&j| m.t_suvx2.check(&[s, cb.u(wc, sp, z, w1, j), v, x2], &mut counts));
        let j = j.unwrap_or_else(|| {
            flags.gp_binning = true;
            cb.sizes.j - 1
        });
        words.push(x2, v, cb.u(wc, sp, z, w1, j));
        cells.push(sp);
        zs.push(z);
        js.push(j);
        sp = cb.cell_of[z];
    }
    EncodedB { words, z: zs, s: cells, j: js, flags }
}

fn cell_from_x2(cb: &CodebookB, m: &CodingModel, wc: usize, y: &[Sym], counts: &mut Vec<u32>) -> Option<usize> {
    unique((0..cb.sizes.m_0).filter(|&s| m.t_x2y.check(&[cb.x2(wc, s), y], counts)))
}

/// Backward decoding, non-unique compression index.
pub fn decode_b_backward(
    cb: &CodebookB,
    m: &CodingModel,
    y: &[Vec<Sym>],
) -> Result<(Vec<usize>, Vec<usize>), DecodeStage> {
    decode_backward(cb, m, y, false)
}

/// Backward decoding with the compression index decoded uniquely before the
/// private message.
pub fn decode_c_unique(cb: &CodebookB, m: &CodingModel, y: &[Vec<Sym>]) -> Result<(Vec<usize>, Vec<usize>), DecodeStage> {
    decode_backward(cb, m, y, true)
}

/// Messages of the last block are fixed to 0. Going back from the last
/// block, each step (a) reads the cell index from `x2` of the later block,
/// (b) finds the common message of the earlier block among codewords whose
/// compression index lies in that cell, (c) reads the earlier block's own
/// cell index, and (d) finds its private message.
fn decode_backward(
    cb: &CodebookB,
    m: &CodingModel,
    y: &[Vec<Sym>],
    unique_z: bool,
) -> Result<(Vec<usize>, Vec<usize>), DecodeStage> {
    let blocks = y.len();
    let (mc, m0, m1, jj) = (cb.sizes.m_c, cb.sizes.m_0, cb.sizes.m_1, cb.sizes.j);
    let s_init = cb.cell_of[0];
    let mut counts = Vec::new();
    let mut wc_hat = vec![0; blocks];
    let mut w1_hat = vec![0; blocks];
    // (a) for the last block
    let mut cell = cell_from_x2(cb, m, 0, &y[blocks - 1], &mut counts).ok_or(DecodeStage::A)?;
    for b in (1..blocks).rev() {
        let yb = &y[b - 1];
        let prev_cells: Vec<usize> = if b - 1 == 0 { vec![s_init] } else { (0..m0).collect() };
        let zs = cb.cell(cell);
        // (b)
        let wc = unique((0..mc).filter(|&wc| {
            prev_cells.iter().any(|&sp| {
                let x2 = cb.x2(wc, sp);
                zs.iter().any(|&z| {
                    let v = cb.v(wc, sp, z);
                    (0..m1).any(|w1| (0..jj).any(|j| m.t_uvx2y.check(&[cb.u(wc, sp, z, w1, j), v, x2, yb], &mut counts)))
                })
            })
        }))
        .ok_or(DecodeStage::B)?;
        // (c)
        let sp = if b - 1 == 0 { s_init } else { cell_from_x2(cb, m, wc, yb, &mut counts).ok_or(DecodeStage::C)? };
        let x2 = cb.x2(wc, sp);
        // (d)
        let w1 = if unique_z {
            let z = unique(zs.iter().copied().filter(|&z| m.t_vx2y.check(&[cb.v(wc, sp, z), x2, yb], &mut counts)))
                .ok_or(DecodeStage::Compression)?;
            let v = cb.v(wc, sp, z);
            unique((0..m1).filter(|&w1| (0..jj).any(|j| m.t_uvx2y.check(&[cb.u(wc, sp, z, w1, j), v, x2, yb], &mut counts))))
        } else {
            unique((0..m1).filter(|&w1| {
                zs.iter().any(|&z| {
                    let v = cb.v(wc, sp, z);
                    (0..jj).any(|j| m.t_uvx2y.check(&[cb.u(wc, sp, z, w1, j), v, x2, yb], &mut counts))
                })
            }))
        }
        .ok_or(DecodeStage::D)?;
        wc_hat[b - 1] = wc;
        w1_hat[b - 1] = w1;
        cell = sp;
    }
    Ok((wc_hat, w1_hat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Channel;
    use crate::region::Factors;
    use crate::sim::TypicalityParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(n: usize) -> CodingModel {
        let ch = Channel::clean_mac().unwrap();
        let f = Factors::from_laws(1, 2, 1, 2, 2, |_| 0.5, |_, _, _| 1.0, |_, _, _, u, x1| if u == x1 { 0.5 } else { 0.0 })
            .unwrap();
        CodingModel::new(&ch, &f, TypicalityParams::new(0.9, n).unwrap()).unwrap()
    }

    #[test]
    fn partitions_are_balanced() {
        let m = model(2);
        let sizes = CodebookSizes { m_c: 1, m_1: 1, m_hat: 7, m_0: 3, j: 1 };
        for random in [false, true] {
            let cb = generate_codebooks_b(&m, &sizes, random, &mut ChaCha8Rng::seed_from_u64(2));
            let lens: Vec<usize> = (0..3).map(|s| cb.cell(s).len()).collect();
            assert_eq!(lens.iter().sum::<usize>(), 7);
            assert!(lens.iter().all(|&l| l == 2 || l == 3));
            for z in 0..7 {
                assert!(cb.cell(cb.cell_of(z)).contains(&z));
            }
        }
        let cb = generate_codebooks_b(&m, &sizes, false, &mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(cb.cell(1), &[1, 4]);
    }

    #[test]
    fn noiseless_backward_decoding() {
        let m = model(24);
        let sizes = CodebookSizes { m_c: 2, m_1: 2, m_hat: 1, m_0: 1, j: 1 };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut wins = 0;
        for _ in 0..40 {
            let cb = generate_codebooks_b(&m, &sizes, false, &mut rng);
            let wcs = vec![rng.random_range(0..2), rng.random_range(0..2), 0];
            let w1s = vec![rng.random_range(0..2), rng.random_range(0..2), 0];
            let states = vec![vec![0; 24]; 3];
            let enc = encode_b(&cb, &m, &wcs, &w1s, &states);
            let y = enc.transmit(&m, &states, &mut rng);
            for unique_z in [false, true] {
                if let Ok((c, one)) = decode_backward(&cb, &m, &y, unique_z) {
                    wins += (c[..2] == wcs[..2] && one[..2] == w1s[..2]) as usize;
                }
            }
        }
        assert!(wins >= 60, "{wins}");
    }
}
