//! Linear detectors: single-user MMSE, multi-user MMSE-IRC and MRC.

use num_complex::Complex64;

use super::DetectError;
use crate::numkit::{cholesky, cholesky_solve, cholesky_solve_matrix, ComplexMatrix, ComplexVector};

/// Linear combining weights, `n_users × n_rx`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearWeights {
    pub w: ComplexMatrix,
}

impl LinearWeights {
    pub fn apply(&self, y: &ComplexVector) -> ComplexVector {
        self.w.mul_vec(y)
    }
}

fn expect_len(what: &str, got: usize, want: usize) -> Result<(), DetectError> {
    if got != want {
        return Err(DetectError::DimensionMismatch(format!(
            "{what} has length {got}, expected {want}"
        )));
    }
    Ok(())
}

fn expect_shape(what: &str, m: &ComplexMatrix, want: (usize, usize)) -> Result<(), DetectError> {
    if m.shape() != want {
        return Err(DetectError::DimensionMismatch(format!(
            "{what} is {:?}, expected {want:?}",
            m.shape()
        )));
    }
    Ok(())
}

/// Single-user MMSE estimate `w·y` with the Sherman–Morrison form
/// `w = hᴴR_uu⁻¹ / (1 + hᴴR_uu⁻¹h)`.
pub fn mmse_single(
    h: &ComplexVector,
    r_uu: &ComplexMatrix,
    y: &ComplexVector,
) -> Result<Complex64, DetectError> {
    let n = h.len();
    expect_shape("R_uu", r_uu, (n, n))?;
    expect_len("y", y.len(), n)?;
    let l = cholesky(r_uu)?;
    let rinv_h = cholesky_solve(&l, h);
    // hᴴR⁻¹h is real for Hermitian R.
    let gain = h.dot(&rinv_h).re;
    Ok(rinv_h.dot(y) / (1.0 + gain))
}

/// Multi-user MMSE with interference rejection:
/// `W = (σ_n²I + HᴴR_uu⁻¹H)⁻¹·HᴴR_uu⁻¹`, `x̂ = W·y`.
///
/// The formula is taken literally; it is the unit-power MMSE-IRC solution
/// when `R_uu` is expressed in units of the noise power.
pub fn mmse_irc(
    h_hat: &ComplexMatrix,
    r_uu: &ComplexMatrix,
    sigma_n2: f64,
    y: &ComplexVector,
) -> Result<(LinearWeights, ComplexVector), DetectError> {
    let weights = mmse_irc_weights(h_hat, r_uu, sigma_n2)?;
    expect_len("y", y.len(), h_hat.rows())?;
    let x_hat = weights.apply(y);
    Ok((weights, x_hat))
}

/// Weight matrix of [`mmse_irc`] alone, reusable across a block.
pub fn mmse_irc_weights(
    h_hat: &ComplexMatrix,
    r_uu: &ComplexMatrix,
    sigma_n2: f64,
) -> Result<LinearWeights, DetectError> {
    let (n, m) = h_hat.shape();
    if n < m {
        return Err(DetectError::DimensionMismatch(format!(
            "n_rx = {n} < n_users = {m}"
        )));
    }
    expect_shape("R_uu", r_uu, (n, n))?;
    let l = cholesky(r_uu)?;
    // Z = R⁻¹H, so HᴴR⁻¹ = Zᴴ.
    let z = cholesky_solve_matrix(&l, h_hat);
    let zh = z.adjoint();
    let mut gram = &zh * h_hat;
    for i in 0..m {
        gram[(i, i)] += sigma_n2;
    }
    let gram = gram.hermitian_part();
    let lg = cholesky(&gram)?;
    Ok(LinearWeights {
        w: cholesky_solve_matrix(&lg, &zh),
    })
}

/// `x̂ = (σ_n²I + HᴴH)⁻¹Hᴴy`.
pub fn mrc_white(
    h_hat: &ComplexMatrix,
    sigma_n2: f64,
    y: &ComplexVector,
) -> Result<ComplexVector, DetectError> {
    let weights = mrc_weights(h_hat, sigma_n2)?;
    expect_len("y", y.len(), h_hat.rows())?;
    Ok(weights.apply(y))
}

/// Weight matrix `(σ_n²I + HᴴH)⁻¹Hᴴ`.
pub fn mrc_weights(h_hat: &ComplexMatrix, sigma_n2: f64) -> Result<LinearWeights, DetectError> {
    let (n, m) = h_hat.shape();
    if n < m {
        return Err(DetectError::DimensionMismatch(format!(
            "n_rx = {n} < n_users = {m}"
        )));
    }
    let hh = h_hat.adjoint();
    let mut gram = &hh * h_hat;
    for i in 0..m {
        gram[(i, i)] += sigma_n2;
    }
    let lg = cholesky(&gram.hermitian_part())?;
    Ok(LinearWeights {
        w: cholesky_solve_matrix(&lg, &hh),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::testutil::{random_matrix, random_pd, random_vector, ChaCha};
    use crate::numkit::{inverse_hermitian, solve_hermitian};
    use rand::SeedableRng;

    fn re(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn single_user_hand_case() {
        let h = ComplexVector::from_real(&[1.0, 0.0, 0.0]);
        let est = mmse_single(&h, &ComplexMatrix::identity(3), &h).unwrap();
        assert!((est - re(0.5)).norm() < 1e-15);
        let zero = ComplexVector::zeros(3);
        let y = ComplexVector::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(
            mmse_single(&zero, &ComplexMatrix::identity(3), &y).unwrap(),
            re(0.0)
        );
    }

    #[test]
    fn single_user_matches_wiener() {
        let mut rng = ChaCha::seed_from_u64(7);
        for n in [3, 8] {
            let r_uu = random_pd(&mut rng, n);
            let h = random_vector(&mut rng, n);
            let y = random_vector(&mut rng, n);
            let r_yy = &r_uu + &h.outer(&h);
            let w = inverse_hermitian(&r_yy).unwrap().mul_vec(&h);
            let direct = w.dot(&y);
            let sm = mmse_single(&h, &r_uu, &y).unwrap();
            assert!((sm - direct).norm() <= 1e-10 * direct.norm().max(1e-300));
        }
    }

    #[test]
    fn irc_identity_case() {
        let y = ComplexVector::from_real(&[2.0, -4.0]);
        let (w, x) = mmse_irc(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2), 1.0, &y).unwrap();
        assert!((&w.w - &ComplexMatrix::identity(2).scale(0.5)).frobenius_norm() < 1e-15);
        assert!((&x - &y.scale(re(0.5))).norm() < 1e-15);
    }

    #[test]
    fn irc_with_white_covariance_is_mrc() {
        let mut rng = ChaCha::seed_from_u64(8);
        let h = random_matrix(&mut rng, 8, 3);
        let y = random_vector(&mut rng, 8);
        let (_, x_irc) = mmse_irc(&h, &ComplexMatrix::identity(8), 0.3, &y).unwrap();
        let x_mrc = mrc_white(&h, 0.3, &y).unwrap();
        assert!((&x_irc - &x_mrc).norm() < 1e-12);
    }

    #[test]
    fn irc_matches_normal_equations() {
        let mut rng = ChaCha::seed_from_u64(9);
        let h = random_matrix(&mut rng, 8, 3);
        let r_uu = random_pd(&mut rng, 8);
        let y = random_vector(&mut rng, 8);
        let s2 = 0.7;
        let (_, x) = mmse_irc(&h, &r_uu, s2, &y).unwrap();
        // (σ²I + HᴴR⁻¹H)·x = HᴴR⁻¹y, solved through an explicit inverse of R
        let rinv = inverse_hermitian(&r_uu).unwrap();
        let hh_rinv = &h.adjoint() * &rinv;
        let mut a = &hh_rinv * &h;
        for i in 0..3 {
            a[(i, i)] += s2;
        }
        let want = solve_hermitian(&a.hermitian_part(), &hh_rinv.mul_vec(&y)).unwrap();
        assert!((&x - &want).norm() <= 1e-10 * want.norm());
    }

    #[test]
    fn mrc_cases() {
        let y = ComplexVector::from_real(&[1.0, 3.0]);
        let x = mrc_white(&ComplexMatrix::identity(2), 0.5, &y).unwrap();
        assert!((&x - &y.scale(re(1.0 / 1.5))).norm() < 1e-15);

        let mut rng = ChaCha::seed_from_u64(10);
        let h = random_matrix(&mut rng, 3, 3);
        let x_true = random_vector(&mut rng, 3);
        let x = mrc_white(&h, 0.0, &h.mul_vec(&x_true)).unwrap();
        assert!((&x - &x_true).norm() < 1e-9);

        // ridge least squares stacked as an ordinary least-squares problem
        let h = random_matrix(&mut rng, 6, 2);
        let y = random_vector(&mut rng, 6);
        let s2: f64 = 0.4;
        let stacked = h.vstack(&ComplexMatrix::identity(2).scale(s2.sqrt()));
        let (q, r) = crate::numkit::qrd(&stacked).unwrap();
        let rhs = q.adjoint_mul_vec(&y.concat(&ComplexVector::zeros(2)));
        let want = crate::numkit::back_substitute(&r, &rhs);
        let got = mrc_white(&h, s2, &y).unwrap();
        assert!((&got - &want).norm() < 1e-10);
    }

    #[test]
    fn shape_errors() {
        let h = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            mrc_white(&h, 1.0, &ComplexVector::zeros(2)),
            Err(DetectError::DimensionMismatch(_))
        ));
        let h = ComplexMatrix::identity(3);
        assert!(matches!(
            mmse_irc(&h, &ComplexMatrix::identity(2), 1.0, &ComplexVector::zeros(3)),
            Err(DetectError::DimensionMismatch(_))
        ));
        let bad = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!(matches!(
            mmse_single(&ComplexVector::zeros(2), &bad, &ComplexVector::zeros(2)),
            Err(DetectError::Linalg(_))
        ));
    }
}
