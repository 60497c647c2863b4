use super::forward::{emission_by_symbol, scaled_forward};
use super::{HmmParams, Matrix, ObservationSequence};
use crate::error::{Error, Result};

/// Smallest probability any trained parameter may take.
///
/// Keeps states that happen to receive no expected counts in one iteration
/// from being starved permanently.
pub const PROBABILITY_FLOOR: f64 = 1e-10;

/// Rows whose state is expected to be visited less often than this keep
/// their previous values; their counts are numerical noise.
const NEGLIGIBLE_COUNT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmSettings {
    pub max_iters: usize,
    /// Stop once the total log-likelihood improves by less than this.
    pub tol: f64,
}

impl Default for EmSettings {
    fn default() -> Self {
        EmSettings {
            max_iters: 500,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrace {
    /// Total log-likelihood over all sequences, evaluated at the start of each
    /// iteration.
    pub log_likelihoods: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
}

/// Expected sufficient statistics summed over all training sequences.
struct Counts {
    prior: Vec<f64>,
    transition: Matrix,
    emission: Matrix,
    log_likelihood: f64,
}

impl Counts {
    fn zeros(n: usize) -> Self {
        Counts {
            prior: vec![0.0; n],
            transition: Matrix::zeros(n, n),
            emission: Matrix::zeros(n, n),
            log_likelihood: 0.0,
        }
    }
}

/// Trains `init` on `sequences` with multi-sequence Baum-Welch.
///
/// The initial parameters are first projected onto the floored simplex, and
/// every M-step maximizes the expected complete-data log-likelihood subject
/// to each entry being at least [`PROBABILITY_FLOOR`]. The total
/// log-likelihood is therefore non-decreasing from the first iteration on.
pub fn baum_welch(
    init: &HmmParams,
    sequences: &[ObservationSequence],
    settings: &EmSettings,
) -> Result<(HmmParams, TrainingTrace)> {
    init.validate().map_err(Error::from)?;
    if sequences.is_empty() {
        return Err(Error::usage("Baum-Welch needs at least one sequence"));
    }
    if settings.max_iters == 0 {
        return Err(Error::usage("max_iters must be at least 1"));
    }
    if !(settings.tol > 0.0) {
        return Err(Error::usage("tol must be positive"));
    }
    for seq in sequences {
        init.check_symbols(seq)?;
    }

    let mut params = floor_params(init, init);
    let mut trace = TrainingTrace {
        log_likelihoods: Vec::new(),
        iterations_run: 0,
        converged: false,
    };

    for _ in 0..settings.max_iters {
        let counts = expected_counts(&params, sequences)?;
        trace.iterations_run += 1;
        let improved = trace
            .log_likelihoods
            .last()
            .map(|&prev| counts.log_likelihood - prev);
        trace.log_likelihoods.push(counts.log_likelihood);
        if matches!(improved, Some(d) if d < settings.tol) {
            trace.converged = true;
            break;
        }
        params = maximize(&params, &counts);
    }
    Ok((params, trace))
}

fn expected_counts(params: &HmmParams, sequences: &[ObservationSequence]) -> Result<Counts> {
    let n = params.n_states();
    let by_symbol = emission_by_symbol(params);
    let mut total = Counts::zeros(n);
    // Per-sequence outer products of alpha and the backward message; scaled
    // by a_ij once at the end.
    let mut outer = Matrix::zeros(n, n);
    let mut beta = vec![0.0; n];
    let mut msg = vec![0.0; n];

    for seq in sequences {
        let obs = seq.symbols();
        let fwd = scaled_forward(params, &by_symbol, obs, true).ok_or(Error::ZeroLikelihood)?;
        total.log_likelihood += fwd.scale.iter().map(|c| c.ln()).sum::<f64>();

        let t_len = obs.len();
        let alpha_at = |t: usize| &fwd.alpha[t * n..(t + 1) * n];
        beta.iter_mut().for_each(|b| *b = 1.0);

        for t in (0..t_len).rev() {
            let alpha = alpha_at(t);
            for i in 0..n {
                total.emission[(i, obs[t] - 1)] += alpha[i] * beta[i];
            }
            if t == 0 {
                for (p, (&a, &b)) in total.prior.iter_mut().zip(alpha.iter().zip(&beta)) {
                    *p += a * b;
                }
                break;
            }
            // msg_j = b_j(o_t) beta_t(j) / c_t, the backward message into step t.
            let inv = 1.0 / fwd.scale[t];
            for ((m, &b), &e) in msg.iter_mut().zip(&beta).zip(by_symbol.row(obs[t] - 1)) {
                *m = e * b * inv;
            }
            let prev = alpha_at(t - 1);
            for (i, &a) in prev.iter().enumerate() {
                for (o, &m) in outer.row_mut(i).iter_mut().zip(&msg) {
                    *o += a * m;
                }
                beta[i] = params
                    .transition
                    .row(i)
                    .iter()
                    .zip(&msg)
                    .map(|(&p, &m)| p * m)
                    .sum();
            }
        }
    }

    for i in 0..n {
        for j in 0..n {
            total.transition[(i, j)] = params.transition[(i, j)] * outer[(i, j)];
        }
    }
    Ok(total)
}

fn maximize(current: &HmmParams, counts: &Counts) -> HmmParams {
    let n = current.n_states();
    let prior = floored_distribution(&counts.prior, &current.prior);
    let mut transition = Matrix::zeros(n, n);
    let mut emission = Matrix::zeros(n, n);
    for i in 0..n {
        transition
            .row_mut(i)
            .copy_from_slice(&floored_distribution(counts.transition.row(i), current.transition.row(i)));
        emission
            .row_mut(i)
            .copy_from_slice(&floored_distribution(counts.emission.row(i), current.emission.row(i)));
    }
    HmmParams {
        prior,
        transition,
        emission,
    }
}

fn floor_params(params: &HmmParams, fallback: &HmmParams) -> HmmParams {
    let n = params.n_states();
    let mut transition = Matrix::zeros(n, n);
    let mut emission = Matrix::zeros(n, n);
    for i in 0..n {
        transition
            .row_mut(i)
            .copy_from_slice(&floored_distribution(params.transition.row(i), fallback.transition.row(i)));
        emission
            .row_mut(i)
            .copy_from_slice(&floored_distribution(params.emission.row(i), fallback.emission.row(i)));
    }
    HmmParams {
        prior: floored_distribution(&params.prior, &fallback.prior),
        transition,
        emission,
    }
}

/// Maximizes `sum_j counts_j ln p_j` over distributions with every
/// `p_j >= PROBABILITY_FLOOR`.
///
/// The solution is `p_j = max(floor, counts_j / lambda)`; entries pinned at
/// the floor are found by repeatedly fixing those that fall below it. A row
/// with negligible counts keeps its previous values, projected the same way.
pub(crate) fn floored_distribution(counts: &[f64], fallback: &[f64]) -> Vec<f64> {
    let total: f64 = counts.iter().sum();
    let counts = if total > NEGLIGIBLE_COUNT { counts } else { fallback };
    let n = counts.len();
    let mut pinned = vec![false; n];
    let mut out = vec![0.0; n];
    loop {
        let n_pinned = pinned.iter().filter(|&&p| p).count();
        let free_mass = 1.0 - n_pinned as f64 * PROBABILITY_FLOOR;
        let free_counts: f64 = counts
            .iter()
            .zip(&pinned)
            .filter(|(_, &p)| !p)
            .map(|(&c, _)| c)
            .sum();
        let mut changed = false;
        for j in 0..n {
            if pinned[j] {
                out[j] = PROBABILITY_FLOOR;
                continue;
            }
            let v = free_mass * counts[j] / free_counts;
            if v < PROBABILITY_FLOOR {
                pinned[j] = true;
                changed = true;
            }
            out[j] = v;
        }
        if !changed {
            return out;
        }
    }
}
