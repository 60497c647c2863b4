//! Line detection for reading with noisy eye-gaze data.
//!
//! Fixations are discretized to the nearest text line, and a discrete hidden
//! Markov model, trained without labels by Baum-Welch, recovers the line the
//! reader is actually on with Viterbi decoding. A reading-gaze simulator and
//! an evaluation harness measure detection error across noise levels.

pub mod discretizer;
pub mod error;
pub mod eval;
pub mod hmm;
pub mod io;
pub mod lds;
pub mod sim;

pub use discretizer::{Fixation, SurveillanceRegion};
pub use error::{Error, Result};
pub use hmm::{HmmParams, ObservationSequence, StatePath};
pub use lds::LdsModel;
