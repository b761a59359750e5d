//! Detection algorithms for `y = H·x + u`.
//!
//! Linear: [`mmse_single`], [`mmse_irc`], [`mrc_white`]. Tree-based:
//! [`osic_detect`], [`kbest_detect`], [`sr_kbest_detect`] on a triangular
//! model, [`ml_bruteforce`] as the exhaustive reference, and
//! [`robust_sr_kbest`], which whitens the interference before the search.

mod linear;
mod llr;
mod ml;
mod osic;
mod robust;
mod tree;

pub use linear::{mmse_irc, mmse_irc_weights, mmse_single, mrc_weights, mrc_white, LinearWeights};
pub use llr::{compute_llrs, demap_scalar, LLR_MAX};
pub use ml::{ml_bruteforce, ML_MAX_CANDIDATES};
pub use osic::{build_extended, extend_channel, osic_detect, ExtendedModel};
pub use robust::{robust_preprocess, robust_sr_kbest, RobustFront, RobustObservation, RobustPipelineState};
pub use tree::{kbest_detect, sr_kbest_detect, Candidate, CandidateList, SrKBestParams, DEFAULT_EXPAND};

use thiserror::Error;

use crate::numkit::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid SR-K-best parameters: {0}")]
    InvalidParams(String),
    #[error("search space {points}^{users} exceeds the brute-force limit")]
    SearchSpaceTooLarge { users: usize, points: usize },
    #[error("empty candidate list")]
    EmptyList,
}

/// Hard decisions (user order), per-bit max-log LLRs and the winning metric.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorOutput {
    pub hard: Vec<usize>,
    pub llr: Vec<f64>,
    pub metric: f64,
}

impl DetectorOutput {
    /// Output built from the head of an already unpermuted, sorted list.
    pub(crate) fn from_best(list: &CandidateList, llr: Vec<f64>) -> Self {
        let best = list.best().expect("non-empty candidate list");
        DetectorOutput {
            hard: best.symbols.clone(),
            llr,
            metric: best.metric,
        }
    }
}
