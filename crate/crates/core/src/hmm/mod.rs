//! Discrete hidden Markov model engine.
//!
//! States and observation symbols are both numbered `1..=n_states`, matching
//! the line numbers they stand for. The emission matrix is stored with one row
//! per hidden state: `emission[(i, k)] = P(o(t) = k | S(t) = i)`.
//!
//! Likelihoods use the scaled forward-backward recursions, so sequences of
//! tens of thousands of samples never underflow. Viterbi runs in log-space.

mod baum_welch;
mod forward;
mod matrix;
mod text;
mod viterbi;

use std::fmt;

pub use baum_welch::{baum_welch, EmSettings, TrainingTrace, PROBABILITY_FLOOR};
pub use forward::forward_log_likelihood;
pub use matrix::Matrix;
pub use text::{read_params, write_params, LineError};
pub use viterbi::viterbi;

use crate::error::{Error, Result};

/// Tolerance on row sums for a vector or matrix to count as stochastic.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;

/// A broken [`HmmParams`] invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation(pub String);

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<Violation> for Error {
    fn from(v: Violation) -> Self {
        Error::InvalidParams(v.0)
    }
}

/// Prior, transition and emission probabilities of an `n`-state model whose
/// observation alphabet also has `n` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmParams {
    pub prior: Vec<f64>,
    pub transition: Matrix,
    pub emission: Matrix,
}

impl HmmParams {
    /// Builds and validates a parameter set.
    pub fn new(prior: Vec<f64>, transition: Matrix, emission: Matrix) -> Result<Self> {
        let params = HmmParams {
            prior,
            transition,
            emission,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn n_states(&self) -> usize {
        self.prior.len()
    }

    /// Checks every invariant and reports the first one that fails.
    pub fn validate(&self) -> Result<(), Violation> {
        let n = self.prior.len();
        if n < 2 {
            return Err(Violation(format!("n_states must be at least 2, got {n}")));
        }
        for (name, m) in [("transition", &self.transition), ("emission", &self.emission)] {
            if m.rows() != n || m.cols() != n {
                return Err(Violation(format!(
                    "{name} matrix is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        check_distribution("prior", &self.prior)?;
        for (name, m) in [("transition", &self.transition), ("emission", &self.emission)] {
            for i in 0..n {
                check_distribution(&format!("{name} row {}", i + 1), m.row(i))?;
            }
        }
        Ok(())
    }

    /// Checks that every symbol of `obs` is a valid index for this model.
    pub fn check_symbols(&self, obs: &ObservationSequence) -> Result<()> {
        let n = self.n_states();
        match obs.symbols().iter().position(|&s| s > n) {
            Some(position) => Err(Error::Range {
                symbol: obs.symbols()[position],
                position: position + 1,
                n_states: n,
            }),
            None => Ok(()),
        }
    }
}

fn check_distribution(name: &str, p: &[f64]) -> Result<(), Violation> {
    if let Some(k) = p.iter().position(|v| !v.is_finite()) {
        return Err(Violation(format!("{name} entry {} is not finite", k + 1)));
    }
    if let Some(k) = p.iter().position(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Violation(format!(
            "{name} entry {} = {} is outside [0, 1]",
            k + 1,
            p[k]
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
        return Err(Violation(format!("{name} not stochastic (sums to {sum})")));
    }
    Ok(())
}

/// Observed symbols `o(1..=T)`, each in `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationSequence(Vec<usize>);

impl ObservationSequence {
    pub fn new(symbols: Vec<usize>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::usage("observation sequence is empty"));
        }
        if let Some(position) = symbols.iter().position(|&s| s == 0) {
            return Err(Error::Range {
                symbol: 0,
                position: position + 1,
                n_states: symbols.iter().copied().max().unwrap_or(0),
            });
        }
        Ok(ObservationSequence(symbols))
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Most probable hidden state sequence and its joint log-probability with
/// the observations.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePath {
    pub states: Vec<usize>,
    pub log_prob: f64,
}
