use super::{HmmParams, ObservationSequence, StatePath};
use crate::error::{Error, Result};

/// Most probable state path for `obs`, computed in log-space in O(n² T).
///
/// Ties between predecessors, and between final states, go to the lower
/// state index.
pub fn viterbi(params: &HmmParams, obs: &ObservationSequence) -> Result<StatePath> {
    params.validate().map_err(Error::from)?;
    params.check_symbols(obs)?;

    let n = params.n_states();
    let symbols = obs.symbols();
    // log_trans_in[j * n + i] = ln a_ij, so the inner loop over predecessors is contiguous.
    let mut log_trans_in = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            log_trans_in[j * n + i] = params.transition[(i, j)].ln();
        }
    }
    let log_emit = params.emission.map(f64::ln);

    let mut delta: Vec<f64> = (0..n)
        .map(|j| params.prior[j].ln() + log_emit[(j, symbols[0] - 1)])
        .collect();
    let mut next = vec![0.0; n];
    let mut back = vec![0u32; symbols.len() * n];

    for (t, &sym) in symbols.iter().enumerate().skip(1) {
        let bp = &mut back[t * n..(t + 1) * n];
        for j in 0..n {
            let incoming = &log_trans_in[j * n..(j + 1) * n];
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (i, (&d, &la)) in delta.iter().zip(incoming).enumerate() {
                let score = d + la;
                if score > best {
                    best = score;
                    arg = i;
                }
            }
            next[j] = best + log_emit[(j, sym - 1)];
            bp[j] = arg as u32;
        }
        std::mem::swap(&mut delta, &mut next);
    }

    let mut best = f64::NEG_INFINITY;
    let mut last = 0;
    for (j, &d) in delta.iter().enumerate() {
        if d > best {
            best = d;
            last = j;
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::ZeroLikelihood);
    }

    let mut states = vec![0usize; symbols.len()];
    let mut cur = last;
    for t in (0..symbols.len()).rev() {
        states[t] = cur + 1;
        if t > 0 {
            cur = back[t * n + cur] as usize;
        }
    }
    Ok(StatePath {
        states,
        log_prob: best,
    })
}
