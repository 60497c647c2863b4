//! Brute-force references for small HMMs, independent of the library's
//! dynamic programs.

#![allow(dead_code)]

use gaze_lds::hmm::{HmmParams, Matrix, ObservationSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Summary over every state path of length `T`.
pub struct Enumeration {
    /// Largest joint log-probability of a path with the observations.
    pub max_log_prob: f64,
    /// First path (in lexicographic order) achieving the maximum, 1-based.
    pub argmax: Vec<usize>,
    /// Sum over paths of the joint probability, i.e. `P(obs)`.
    pub total_prob: f64,
}

pub fn enumerate_paths(params: &HmmParams, obs: &ObservationSequence) -> Enumeration {
    let n = params.prior.len();
    let symbols = obs.symbols();
    let t_len = symbols.len();
    let mut path = vec![0usize; t_len];
    let mut best = Enumeration {
        max_log_prob: f64::NEG_INFINITY,
        argmax: vec![1; t_len],
        total_prob: 0.0,
    };
    loop {
        let mut lp = params.prior[path[0]].ln() + params.emission[(path[0], symbols[0] - 1)].ln();
        for t in 1..t_len {
            lp = lp + params.transition[(path[t - 1], path[t])].ln();
            lp = lp + params.emission[(path[t], symbols[t] - 1)].ln();
        }
        best.total_prob += lp.exp();
        if lp > best.max_log_prob {
            best.max_log_prob = lp;
            best.argmax = path.iter().map(|s| s + 1).collect();
        }
        // Odometer increment, last position fastest.
        let mut k = t_len;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            path[k] += 1;
            if path[k] < n {
                break;
            }
            path[k] = 0;
        }
    }
}

fn random_distribution(rng: &mut impl Rng, n: usize, zero_chance: f64) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen::<f64>() < zero_chance {
                    0.0
                } else {
                    rng.gen::<f64>() + 1e-3
                }
            })
            .collect();
        let sum: f64 = raw.iter().sum();
        if sum > 0.0 {
            return raw.iter().map(|v| v / sum).collect();
        }
    }
}

/// A random valid model; `zero_chance` of each entry being exactly zero.
pub fn random_params(rng: &mut impl Rng, n: usize, zero_chance: f64) -> HmmParams {
    let prior = random_distribution(rng, n, zero_chance);
    let rows = |rng: &mut _| {
        Matrix::from_rows(
            (0..n)
                .map(|_| random_distribution(rng, n, zero_chance))
                .collect(),
        )
        .unwrap()
    };
    let transition = rows(rng);
    let emission = rows(rng);
    HmmParams::new(prior, transition, emission).unwrap()
}

pub fn random_observations(rng: &mut impl Rng, n: usize, t_len: usize) -> ObservationSequence {
    ObservationSequence::new((0..t_len).map(|_| rng.gen_range(1..=n)).collect()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
