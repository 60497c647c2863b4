use super::{HmmParams, Matrix, ObservationSequence};
use crate::error::{Error, Result};

/// Emission probabilities regrouped by symbol: row `k` holds `P(o = k+1 | S = j)`
/// for every state `j`, so the per-step lookup is one contiguous slice.
pub(crate) fn emission_by_symbol(params: &HmmParams) -> Matrix {
    let n = params.n_states();
    Matrix::from_fn(n, n, |k, j| params.emission[(j, k)])
}

/// Normalized forward variables and their scale factors.
///
/// `alpha` is `T x n` with every row summing to one; `scale[t]` is the mass
/// removed at step `t`, so `log P(obs) = sum(ln scale)`.
pub(crate) struct ScaledForward {
    pub alpha: Vec<f64>,
    pub scale: Vec<f64>,
}

/// Runs the scaled forward recursion. Symbols must already be range checked.
///
/// Returns `None` when some prefix of the observations has zero probability.
pub(crate) fn scaled_forward(
    params: &HmmParams,
    by_symbol: &Matrix,
    obs: &[usize],
    keep_alpha: bool,
) -> Option<ScaledForward> {
    let n = params.n_states();
    let mut alpha = Vec::with_capacity(if keep_alpha { obs.len() * n } else { 0 });
    let mut scale = Vec::with_capacity(obs.len());
    let mut cur: Vec<f64> = params.prior.clone();
    let mut next = vec![0.0; n];

    for (t, &sym) in obs.iter().enumerate() {
        if t > 0 {
            next.iter_mut().for_each(|v| *v = 0.0);
            for (i, &a) in cur.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (acc, &p) in next.iter_mut().zip(params.transition.row(i)) {
                    *acc += a * p;
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        for (v, &b) in cur.iter_mut().zip(by_symbol.row(sym - 1)) {
            *v *= b;
        }
        let c: f64 = cur.iter().sum();
        if c <= 0.0 || !c.is_finite() {
            return None;
        }
        let inv = 1.0 / c;
        cur.iter_mut().for_each(|v| *v *= inv);
        scale.push(c);
        if keep_alpha {
            alpha.extend_from_slice(&cur);
        }
    }
    Some(ScaledForward { alpha, scale })
}

/// `log P(obs | params)`. Returns negative infinity for impossible sequences.
pub fn forward_log_likelihood(params: &HmmParams, obs: &ObservationSequence) -> Result<f64> {
    params.validate().map_err(Error::from)?;
    params.check_symbols(obs)?;
    let by_symbol = emission_by_symbol(params);
    Ok(
        match scaled_forward(params, &by_symbol, obs.symbols(), false) {
            Some(fwd) => fwd.scale.iter().map(|c| c.ln()).sum(),
            None => f64::NEG_INFINITY,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(prior: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> HmmParams {
        HmmParams::new(
            prior,
            Matrix::from_rows(a).unwrap(),
            Matrix::from_rows(b).unwrap(),
        )
        .unwrap()
    }

    fn obs(s: &[usize]) -> ObservationSequence {
        ObservationSequence::new(s.to_vec()).unwrap()
    }

    #[test]
    fn deterministic_chain_has_log_likelihood_zero() {
        let p = params(
            vec![1.0, 0.0],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        );
        assert_eq!(forward_log_likelihood(&p, &obs(&[1, 1, 1])).unwrap(), 0.0);
    }

    #[test]
    fn independent_uniform_chain() {
        let p = params(
            vec![0.5, 0.5],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        );
        let ll = forward_log_likelihood(&p, &obs(&[1, 2])).unwrap();
        assert!((ll - 0.25f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn impossible_sequence_is_negative_infinity() {
        let p = params(
            vec![1.0, 0.0],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        );
        assert_eq!(
            forward_log_likelihood(&p, &obs(&[1, 2])).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn out_of_range_symbol() {
        let p = params(
            vec![0.5, 0.5],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        );
        assert!(matches!(
            forward_log_likelihood(&p, &obs(&[1, 3])),
            Err(Error::Range { symbol: 3, .. })
        ));
    }
}
