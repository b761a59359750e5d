//! Interference-whitening front end for SR-K-best detection.
//!
//! Given `y = H·x + u` with `E[u·uᴴ] = R_uu`:
//!
//! 1. whiten: `y₁ = W·y`, `H₁ = W·H` with `W·R_uu·Wᴴ = I`;
//! 2. thin QRD `H₁ = Q₁·R₁`, `y₂ = Q₁ᴴ·y₁` (unit-variance white noise);
//! 3. mid-stage MMSE on the triangular model,
//!    `x̂ = (I + R₁ᴴR₁)⁻¹·R₁ᴴ·y₂`;
//! 4. `H₂ = (R₁ᴴ)⁻¹ + R₁`, which satisfies `y₂ = H₂·x̂` for that estimate;
//! 5. sorted QRD `H₂·P = Q₂·R₂`, `y₃ = Q₂ᴴ·y₂`.
//!
//! The tree search then runs on `(R₂, y₃)` over the constellation alphabet.

use super::llr::compute_llrs;
use super::tree::{sr_kbest_detect, SrKBestParams};
use super::{DetectError, DetectorOutput};
use crate::airlink::ConstellationSpec;
use crate::numkit::{
    cholesky, cholesky_solve, inv_sqrt, invert_lower, qrd, sorted_qrd, ComplexMatrix, ComplexVector,
    Permutation, SortedQrd,
};

/// Every matrix and vector of the whitening chain for one observation.
#[derive(Clone, Debug)]
pub struct RobustPipelineState {
    pub w: ComplexMatrix,
    pub h1: ComplexMatrix,
    pub q1: ComplexMatrix,
    pub r1: ComplexMatrix,
    pub h2: ComplexMatrix,
    pub q2: ComplexMatrix,
    pub r2: ComplexMatrix,
    pub perm: Permutation,
    pub y1: ComplexVector,
    pub y2: ComplexVector,
    pub y3: ComplexVector,
    pub x_mid: ComplexVector,
}

/// Observation-independent part of the chain, shared by every data vector
/// that sees the same channel and covariance.
#[derive(Clone, Debug)]
pub struct RobustFront {
    pub w: ComplexMatrix,
    pub h1: ComplexMatrix,
    pub q1: ComplexMatrix,
    pub r1: ComplexMatrix,
    pub h2: ComplexMatrix,
    pub sorted: SortedQrd,
    /// Cholesky factor of `I + R₁ᴴR₁`.
    mid_factor: ComplexMatrix,
}

/// Observation-dependent part of the chain.
#[derive(Clone, Debug)]
pub struct RobustObservation {
    pub y1: ComplexVector,
    pub y2: ComplexVector,
    pub y3: ComplexVector,
    pub x_mid: ComplexVector,
}

impl RobustFront {
    pub fn new(h_hat: &ComplexMatrix, r_uu: &ComplexMatrix) -> Result<Self, DetectError> {
        let (n, m) = h_hat.shape();
        if r_uu.shape() != (n, n) {
            return Err(DetectError::DimensionMismatch(format!(
                "R_uu is {:?}, expected ({n}, {n})",
                r_uu.shape()
            )));
        }
        if n < m {
            return Err(DetectError::DimensionMismatch(format!(
                "n_rx = {n} < n_users = {m}"
            )));
        }
        let w = inv_sqrt(r_uu)?;
        let h1 = &w * h_hat;
        let (q1, r1) = qrd(&h1)?;
        let r1h = r1.adjoint();
        let mut gram = &r1h * &r1;
        for i in 0..m {
            gram[(i, i)] += 1.0;
        }
        let mid_factor = cholesky(&gram.hermitian_part())?;
        // R₁ has a positive diagonal after a successful QRD, so R₁ᴴ inverts.
        let h2 = &invert_lower(&r1h) + &r1;
        let sorted = sorted_qrd(&h2)?;
        Ok(RobustFront {
            w,
            h1,
            q1,
            r1,
            h2,
            sorted,
            mid_factor,
        })
    }

    pub fn observe(&self, y: &ComplexVector) -> Result<RobustObservation, DetectError> {
        if y.len() != self.w.cols() {
            return Err(DetectError::DimensionMismatch(format!(
                "y has length {}, expected {}",
                y.len(),
                self.w.cols()
            )));
        }
        let y1 = self.w.mul_vec(y);
        let y2 = self.q1.adjoint_mul_vec(&y1);
        let x_mid = cholesky_solve(&self.mid_factor, &self.r1.adjoint_mul_vec(&y2));
        let y3 = self.sorted.q.adjoint_mul_vec(&y2);
        Ok(RobustObservation { y1, y2, y3, x_mid })
    }

    /// SR-K-best on `(R₂, y₃)`, reported in user order.
    pub fn detect(
        &self,
        y: &ComplexVector,
        params: &SrKBestParams,
        cons: &ConstellationSpec,
    ) -> Result<DetectorOutput, DetectError> {
        let obs = self.observe(y)?;
        let list = sr_kbest_detect(&self.sorted.r, &obs.y3, params, cons)?.unpermute(&self.sorted.perm);
        let llr = compute_llrs(&list, cons, self.r1.cols())?;
        Ok(DetectorOutput::from_best(&list, llr))
    }
}

/// Runs the full whitening chain for one observation.
pub fn robust_preprocess(
    h_hat: &ComplexMatrix,
    y: &ComplexVector,
    r_uu: &ComplexMatrix,
) -> Result<RobustPipelineState, DetectError> {
    let front = RobustFront::new(h_hat, r_uu)?;
    let obs = front.observe(y)?;
    Ok(RobustPipelineState {
        w: front.w,
        h1: front.h1,
        q1: front.q1,
        r1: front.r1,
        h2: front.h2,
        q2: front.sorted.q,
        r2: front.sorted.r,
        perm: front.sorted.perm,
        y1: obs.y1,
        y2: obs.y2,
        y3: obs.y3,
        x_mid: obs.x_mid,
    })
}

/// Whitening chain followed by SR-K-best detection.
pub fn robust_sr_kbest(
    h_hat: &ComplexMatrix,
    y: &ComplexVector,
    r_uu: &ComplexMatrix,
    params: &SrKBestParams,
    cons: &ConstellationSpec,
) -> Result<DetectorOutput, DetectError> {
    params.validate()?;
    RobustFront::new(h_hat, r_uu)?.detect(y, params, cons)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airlink::{build_constellation, modulate, ConstellationKind};
    use crate::detectors::ml_bruteforce;
    use crate::numkit::testutil::{random_matrix, random_pd, random_vector, ChaCha};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};

    fn close(a: &ComplexMatrix, b: &ComplexMatrix) -> bool {
        (a - b).frobenius_norm() <= 1e-12
    }

    #[test]
    fn identity_hand_check() {
        let y = ComplexVector::from(vec![
            Complex64::new(0.3, -1.0),
            Complex64::new(2.0, 0.5),
            Complex64::new(-0.7, 0.0),
        ]);
        let eye = ComplexMatrix::identity(3);
        let st = robust_preprocess(&eye, &y, &eye).unwrap();
        assert!(close(&st.r1, &eye));
        assert!((&st.x_mid - &y.scale(Complex64::new(0.5, 0.0))).norm() <= 1e-12);
        assert!(close(&st.h2, &eye.scale(2.0)));
        assert!(close(&st.r2, &eye.scale(2.0)));
        assert!((&st.y3 - &y).norm() <= 1e-12);
    }

    #[test]
    fn white_covariance_leaves_channel() {
        let mut rng = ChaCha::seed_from_u64(50);
        let h = random_matrix(&mut rng, 6, 3);
        let y = random_vector(&mut rng, 6);
        let st = robust_preprocess(&h, &y, &ComplexMatrix::identity(6)).unwrap();
        assert!(close(&st.h1, &h));
        assert_eq!(st.y1, y);
    }

    #[test]
    fn chain_identities() {
        let mut rng = ChaCha::seed_from_u64(51);
        let h = random_matrix(&mut rng, 8, 4);
        let r_uu = random_pd(&mut rng, 8);
        let y = random_vector(&mut rng, 8);
        let st = robust_preprocess(&h, &y, &r_uu).unwrap();
        // y₂ = Q₁ᴴy₁ exactly, and H₂·x̂ reproduces y₂
        assert_eq!(st.y2, st.q1.adjoint_mul_vec(&st.y1));
        assert!((&st.h2.mul_vec(&st.x_mid) - &st.y2).norm() <= 1e-10 * st.y2.norm());
        assert!(st.r1.is_upper_triangular() && st.r2.is_upper_triangular());
        let h2p = st.h2.permute_columns(&st.perm);
        assert!((&(&st.q2 * &st.r2) - &h2p).frobenius_norm() <= 1e-10 * st.h2.frobenius_norm());
    }

    #[test]
    fn noiseless_recovery_with_white_noise_model() {
        let cons = build_constellation(ConstellationKind::Qam16);
        let mut rng = ChaCha::seed_from_u64(52);
        let r_uu = ComplexMatrix::identity(8).scale(1e-4);
        for _ in 0..20 {
            let h = random_matrix(&mut rng, 8, 4);
            let sym: Vec<usize> = (0..4).map(|_| rng.random_range(0..16)).collect();
            let y = h.mul_vec(&modulate(&cons, &sym));
            let out = robust_sr_kbest(&h, &y, &r_uu, &SrKBestParams::reference(), &cons).unwrap();
            assert_eq!(out.hard, sym);
        }
    }

    #[test]
    fn full_search_matches_whitened_ml() {
        let cons = build_constellation(ConstellationKind::Qam16);
        let mut rng = ChaCha::seed_from_u64(53);
        let params = SrKBestParams::exhaustive(256, 16);
        for _ in 0..20 {
            let h = random_matrix(&mut rng, 6, 2);
            let r_uu = random_pd(&mut rng, 6).scale(1e-3);
            let sym: Vec<usize> = (0..2).map(|_| rng.random_range(0..16)).collect();
            let y = h.mul_vec(&modulate(&cons, &sym));
            let out = robust_sr_kbest(&h, &y, &r_uu, &params, &cons).unwrap();
            let st = robust_preprocess(&h, &y, &r_uu).unwrap();
            let ml = ml_bruteforce(&st.h1, &st.y1, &cons).unwrap();
            assert_eq!(out.hard, ml.hard);
        }
    }

    #[test]
    fn rank_deficient_channel_is_reported() {
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0], &[0.0, 0.0]]).unwrap();
        let err = RobustFront::new(&h, &ComplexMatrix::identity(3));
        assert!(matches!(
            err,
            Err(DetectError::Linalg(
                crate::numkit::LinalgError::RankDeficient { .. }
            ))
        ));
    }
}
