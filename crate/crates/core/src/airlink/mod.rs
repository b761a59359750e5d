//! Signal model: constellations, channel draws, estimation of the channel
//! and of the interference+noise covariance.

mod channel;
mod constellation;
mod estimation;

pub use channel::{
    apply_channel, apply_channel_with_noise, complex_gaussian, exponential_correlation, generate_channel,
    ChannelModelConfig, ChannelRealization,
};
pub use constellation::{build_constellation, ConstellationKind, ConstellationSpec};
pub use estimation::{
    estimate_channel, estimate_covariance, reference_residual, CeMode, ChannelEstimate, CovarianceEstimate,
    Loading, PilotPlan, MIN_LOADING,
};

use rand::Rng;
use thiserror::Error;

use crate::numkit::{ComplexVector, LinalgError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AirlinkError {
    #[error("unsupported kind: {0}")]
    UnsupportedKind(String),
    #[error("invalid channel configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("insufficient pilots: {pilots} observations for {users} users")]
    InsufficientPilots { users: usize, pilots: usize },
    #[error("empty sample set")]
    EmptySampleSet,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Maps symbol indices to constellation points.
pub fn modulate(cons: &ConstellationSpec, symbols: &[usize]) -> ComplexVector {
    ComplexVector::from(symbols.iter().map(|&s| cons.points[s]).collect::<Vec<_>>())
}

/// `count` uniformly drawn symbol indices.
pub fn random_symbols<R: Rng + ?Sized>(cons: &ConstellationSpec, count: usize, rng: &mut R) -> Vec<usize> {
    (0..count).map(|_| rng.random_range(0..cons.size())).collect()
}
