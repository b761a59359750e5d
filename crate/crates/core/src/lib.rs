//! Multi-user massive-MIMO uplink detection.
//!
//! The crate is organised bottom-up:
//!
//! * [`numkit`]: complex QR (plain and sorted), Cholesky, whitening, solves.
//! * [`airlink`]: constellations, a correlated Rayleigh channel with
//!   interferers, pilot channel estimation and covariance estimation.
//! * [`detectors`]: MRC, MMSE-IRC, sorted-QRD OSIC, K-best, SR-K-best,
//!   brute-force ML and the interference-whitening robust SR-K-best chain.
//! * [`fec`]: a regular (3,6) LDPC(288,144) code with a normalized
//!   min-sum decoder.

pub mod airlink;
pub mod detectors;
pub mod fec;
pub mod numkit;

pub use num_complex::Complex64;
