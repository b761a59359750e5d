//! Rate-1/2 LDPC(288,144) code: seeded regular (3,6) construction,
//! systematic encoding and normalized min-sum decoding.

mod code;
mod decode;
mod gf2;

pub use code::{build_code, LdpcCode, CODE_K, CODE_N, COL_WEIGHT, ROW_WEIGHT};
pub use decode::DecodeOutcome;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FecError {
    #[error("no full-rank regular code found after {attempts} seeds")]
    ConstructionFailed { attempts: u64 },
    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
}
