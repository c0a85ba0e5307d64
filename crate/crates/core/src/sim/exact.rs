use crate::error::{Error, Result};

use super::model::CodingModel;
use super::typical::Sym;
use super::{
    decode_a, decode_b_backward, decode_c_unique, encode_a, encode_b, generate_book, prepare, trial_rng, Book, Scheme,
    SimConfig,
};

/// All sequences over `0..k` of the given length, in lexicographic order.
fn sequences(k: usize, len: usize) -> Vec<Vec<Sym>> {
    let mut out = vec![Vec::with_capacity(len)];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k as Sym).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

fn split_blocks(seq: &[Sym], n: usize) -> Vec<Vec<Sym>> {
    seq.chunks(n).map(|c| c.to_vec()).collect()
}

fn state_probability(m: &CodingModel, seq: &[Sym]) -> f64 {
    seq.iter().map(|&s| m.q_s()[s as usize]).product()
}

/// Exact error probability of the fixed codebook drawn for `cfg` (the same
/// one `CodebookMode::Fixed` uses), by enumerating messages, state sequences
/// and output sequences. Refuses instances with more than
/// `cfg.max_exact_outcomes` outcomes.
pub fn exact_error_micro(cfg: &SimConfig) -> Result<f64> {
    let p = prepare(cfg)?;
    let m = &p.model;
    let s = &p.sizes;
    let len = cfg.n * cfg.blocks;
    let messages = match cfg.scheme {
        Scheme::A => (s.m_c * s.m_1) as f64,
        _ => ((s.m_c * s.m_1) as f64).powi(cfg.blocks as i32 - 1),
    };
    let outcomes = messages * (m.ns as f64).powi(len as i32) * (m.ny as f64).powi(len as i32);
    if outcomes > cfg.max_exact_outcomes as f64 || s.m_c * s.m_1 > Sym::MAX as usize + 1 {
        return Err(Error::Resource(format!(
            "exact evaluation needs {outcomes:.3e} outcomes, limit {}",
            cfg.max_exact_outcomes
        )));
    }
    let book = generate_book(cfg, &p, &mut trial_rng(cfg.seed, 0));
    let states: Vec<Vec<Vec<Sym>>> = sequences(m.ns, len).iter().map(|q| split_blocks(q, cfg.n)).collect();
    let outputs: Vec<Vec<Vec<Sym>>> = sequences(m.ny, len).iter().map(|q| split_blocks(q, cfg.n)).collect();
    let state_probs: Vec<f64> = states.iter().map(|st| state_probability(m, &st.concat())).collect();
    let mut error = 0.0;
    match &book {
        Book::A(cb) => {
            for wc in 0..s.m_c {
                for w1 in 0..s.m_1 {
                    for (st, ps) in states.iter().zip(&state_probs) {
                        if *ps == 0.0 {
                            continue;
                        }
                        let enc = encode_a(cb, m, wc, w1, st);
                        for y in &outputs {
                            let py = enc.words.output_probability(m, st, y);
                            if py > 0.0 && decode_a(cb, m, y) != (Some(wc), Some(w1)) {
                                error += ps * py;
                            }
                        }
                    }
                }
            }
        }
        Book::B(cb) => {
            let used = cfg.blocks - 1;
            let pairs: Vec<Vec<Sym>> = sequences(s.m_c * s.m_1, used);
            for msg in &pairs {
                let mut wcs: Vec<usize> = msg.iter().map(|&k| k as usize / s.m_1).collect();
                let mut w1s: Vec<usize> = msg.iter().map(|&k| k as usize % s.m_1).collect();
                wcs.push(0);
                w1s.push(0);
                for (st, ps) in states.iter().zip(&state_probs) {
                    if *ps == 0.0 {
                        continue;
                    }
                    let enc = encode_b(cb, m, &wcs, &w1s, st);
                    for y in &outputs {
                        let py = enc.words.output_probability(m, st, y);
                        if py == 0.0 {
                            continue;
                        }
                        let decoded =
                            if cfg.scheme == Scheme::C { decode_c_unique(cb, m, y) } else { decode_b_backward(cb, m, y) };
                        let ok = matches!(decoded, Ok((c, one)) if c[..used] == wcs[..used] && one[..used] == w1s[..used]);
                        if !ok {
                            error += ps * py;
                        }
                    }
                }
            }
        }
    }
    Ok(error / messages)
}
