use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::Marginal;

/// Symbol type of simulated sequences.
pub type Sym = u8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalityParams {
    pub epsilon: f64,
    pub n: usize,
}

impl TypicalityParams {
    pub fn new(epsilon: f64, n: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) || n == 0 {
            return Err(Error::Config(format!("need 0 < epsilon < 1 and n >= 1, got {epsilon}, {n}")));
        }
        Ok(TypicalityParams { epsilon, n })
    }
}

/// Precomputed count bands `[lo, hi]` for every cell of a reference pmf at a
/// fixed `n`: `|count/n - p| <= eps p`, and `count = 0` where `p = 0`.
#[derive(Clone, Debug)]
pub struct TypicalTable {
    sizes: Vec<usize>,
    lo: Vec<u32>,
    hi: Vec<u32>,
    /// False when some band is empty, so nothing is typical.
    possible: bool,
}

impl TypicalTable {
    pub fn new(sizes: &[usize], probs: &[f64], params: TypicalityParams) -> TypicalTable {
        let n = params.n as f64;
        let eps = params.epsilon;
        let mut lo = Vec::with_capacity(probs.len());
        let mut hi = Vec::with_capacity(probs.len());
        for &p in probs {
            if p <= 0.0 {
                lo.push(0);
                hi.push(0);
            } else {
                let l = (n * p * (1.0 - eps) - 1e-9).ceil().max(0.0);
                let h = (n * p * (1.0 + eps) + 1e-9).floor();
                lo.push(l as u32);
                hi.push(h as u32);
            }
        }
        let possible = lo.iter().zip(&hi).all(|(l, h)| l <= h);
        TypicalTable { sizes: sizes.to_vec(), lo, hi, possible }
    }

    pub fn from_marginal(m: &Marginal, params: TypicalityParams) -> TypicalTable {
        TypicalTable::new(m.sizes(), m.probs(), params)
    }

    pub fn cells(&self) -> usize {
        self.lo.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub(crate) fn band(&self, cell: usize) -> (u32, u32) {
        (self.lo[cell], self.hi[cell])
    }

    /// Row-major cell of one position.
    #[inline]
    pub fn cell(&self, symbols: &[Sym]) -> usize {
        let mut k = 0;
        for (s, n) in symbols.iter().zip(&self.sizes) {
            k = k * n + *s as usize;
        }
        k
    }

    /// Typicality of sequences given in the table's axis order; `counts` is
    /// scratch space.
    pub fn check(&self, seqs: &[&[Sym]], counts: &mut Vec<u32>) -> bool {
        if !self.possible {
            return false;
        }
        counts.clear();
        counts.resize(self.lo.len(), 0);
        let n = seqs[0].len();
        let mut sym = [0 as Sym; 8];
        for i in 0..n {
            for (a, s) in seqs.iter().enumerate() {
                sym[a] = s[i];
            }
            let c = self.cell(&sym[..seqs.len()]);
            counts[c] += 1;
            if counts[c] > self.hi[c] {
                return false;
            }
        }
        counts.iter().zip(&self.lo).all(|(c, l)| c >= l)
    }
}

/// Strong joint typicality of a tuple of sequences against a reference pmf
/// whose axes follow the tuple order.
pub fn is_jointly_typical(seqs: &[&[Sym]], reference: &Marginal, params: &TypicalityParams) -> Result<bool> {
    if seqs.is_empty() || seqs.len() != reference.sizes().len() || seqs.len() > 8 {
        return Err(Error::Usage("sequence tuple does not match the reference pmf".into()));
    }
    if seqs.iter().any(|s| s.len() != params.n) {
        return Err(Error::Usage(format!("all sequences must have length {}", params.n)));
    }
    for (s, &k) in seqs.iter().zip(reference.sizes()) {
        if s.iter().any(|&x| x as usize >= k) {
            return Err(Error::Usage("symbol outside the reference alphabet".into()));
        }
    }
    let table = TypicalTable::from_marginal(reference, *params);
    Ok(table.check(seqs, &mut Vec::new()))
}
