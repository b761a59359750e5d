//! Cholesky factorization and the solves built on it.

use num_complex::Complex64;

use super::{ComplexMatrix, ComplexVector, LinalgError};

/// Relative `‖A − Aᴴ‖_F` accepted as Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

fn check_hermitian(a: &ComplexMatrix) -> Result<(), LinalgError> {
    if a.rows() != a.cols() {
        return Err(LinalgError::DimensionMismatch {
            expected: (a.rows(), a.rows()),
            found: a.shape(),
        });
    }
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_TOLERANCE * a.frobenius_norm() {
        return Err(LinalgError::NotHermitian { defect });
    }
    Ok(())
}

/// Lower-triangular `L` with `L·Lᴴ = A` and a real positive diagonal.
pub fn cholesky(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    check_hermitian(a)?;
    let n = a.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d.is_nan() || d <= 0.0 {
            return Err(LinalgError::NotPositiveDefinite { index: j });
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Whitening matrix `W` with `W·A·Wᴴ = I`.
///
/// Uses `W = L⁻¹` for the Cholesky factor `A = L·Lᴴ` rather than the
/// Hermitian square root; any such `W` decorrelates noise with covariance `A`.
pub fn inv_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let l = cholesky(a)?;
    Ok(invert_lower(&l))
}

/// Solves `A·x = b` for Hermitian positive definite `A`.
pub fn solve_hermitian(a: &ComplexMatrix, b: &ComplexVector) -> Result<ComplexVector, LinalgError> {
    if b.len() != a.rows() {
        return Err(LinalgError::DimensionMismatch {
            expected: (a.rows(), 1),
            found: (b.len(), 1),
        });
    }
    let l = cholesky(a)?;
    Ok(cholesky_solve(&l, b))
}

/// Solves `A·X = B` column by column given the Cholesky factor of `A`.
pub fn cholesky_solve_matrix(l: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(l.rows(), b.rows());
    let mut x = ComplexMatrix::zeros(b.rows(), b.cols());
    for j in 0..b.cols() {
        let col = cholesky_solve(l, &b.column(j));
        x.set_column(j, &col);
    }
    x
}

/// Solves `L·Lᴴ·x = b`.
pub fn cholesky_solve(l: &ComplexMatrix, b: &ComplexVector) -> ComplexVector {
    let z = forward_substitute(l, b);
    back_substitute_adjoint(l, &z)
}

/// Solves `L·x = b` for lower-triangular `L`.
pub fn forward_substitute(l: &ComplexMatrix, b: &ComplexVector) -> ComplexVector {
    let n = l.rows();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    ComplexVector::from(x)
}

/// Solves `Lᴴ·x = b` for lower-triangular `L`.
fn back_substitute_adjoint(l: &ComplexMatrix, b: &ComplexVector) -> ComplexVector {
    let n = l.rows();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[(k, i)].conj() * x[k];
        }
        x[i] = s / l[(i, i)].conj();
    }
    ComplexVector::from(x)
}

/// Solves `U·x = b` for upper-triangular `U`.
pub fn back_substitute(u: &ComplexMatrix, b: &ComplexVector) -> ComplexVector {
    let n = u.rows();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= u[(i, k)] * x[k];
        }
        x[i] = s / u[(i, i)];
    }
    ComplexVector::from(x)
}

/// Inverse of a nonsingular lower-triangular matrix (itself lower triangular).
pub fn invert_lower(l: &ComplexMatrix) -> ComplexMatrix {
    let n = l.rows();
    let mut inv = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = Complex64::new(1.0, 0.0) / l[(j, j)];
        for i in j + 1..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in j..i {
                s -= l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = s / l[(i, i)];
        }
    }
    inv
}

/// Inverse of a nonsingular upper-triangular matrix.
pub fn invert_upper(u: &ComplexMatrix) -> ComplexMatrix {
    invert_lower(&u.adjoint()).adjoint()
}

/// Inverse of a Hermitian positive definite matrix.
pub fn inverse_hermitian(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let linv = invert_lower(&cholesky(a)?);
    Ok(&linv.adjoint() * &linv)
}
