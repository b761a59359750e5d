//! Regularized (extended) channel model and sorted-QRD OSIC detection.

use super::llr::compute_llrs;
use super::tree::{successive_slice, Candidate, CandidateList};
use super::{DetectError, DetectorOutput};
use crate::airlink::ConstellationSpec;
use crate::numkit::{ComplexMatrix, ComplexVector, SortedQrd};

/// `H_ext = [H; reg·I]`, `y_ext = [y; 0]` with `reg = √(σ_n² + σ_i²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedModel {
    pub h_ext: ComplexMatrix,
    pub y_ext: ComplexVector,
    pub reg: f64,
}

/// Stacks the regularization block under the channel.
pub fn build_extended(
    h_hat: &ComplexMatrix,
    y: &ComplexVector,
    sigma_n2: f64,
    sigma_i2: f64,
) -> ExtendedModel {
    let reg = (sigma_n2 + sigma_i2).max(0.0).sqrt();
    let m = h_hat.cols();
    ExtendedModel {
        h_ext: extend_channel(h_hat, reg),
        y_ext: y.concat(&ComplexVector::zeros(m)),
        reg,
    }
}

/// Channel part of [`build_extended`].
pub fn extend_channel(h_hat: &ComplexMatrix, reg: f64) -> ComplexMatrix {
    h_hat.vstack(&ComplexMatrix::identity(h_hat.cols()).scale(reg))
}

/// Ordered successive interference cancellation on a sorted QRD of the
/// extended channel.
///
/// `ỹ = Qᴴ·y_ext` is resolved from the last (strongest) layer to the first
/// by nearest-point slicing; the result is returned in user order.
pub fn osic_detect(
    qrd: &SortedQrd,
    y_ext: &ComplexVector,
    cons: &ConstellationSpec,
) -> Result<DetectorOutput, DetectError> {
    if y_ext.len() != qrd.q.rows() {
        return Err(DetectError::DimensionMismatch(format!(
            "y_ext has length {}, Q has {} rows",
            y_ext.len(),
            qrd.q.rows()
        )));
    }
    let y_tilde = qrd.q.adjoint_mul_vec(y_ext);
    let (sym, metric) = successive_slice(&qrd.r, &y_tilde, cons);
    let list = CandidateList {
        entries: vec![Candidate { symbols: sym, metric }],
    }
    .unpermute(&qrd.perm);
    let llr = compute_llrs(&list, cons, qrd.r.cols())?;
    Ok(DetectorOutput::from_best(&list, llr))
}
