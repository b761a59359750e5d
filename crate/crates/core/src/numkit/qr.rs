//! Householder QR decomposition, plain and with greedy column sorting.
//!
//! Both variants produce a thin factorization `A·P = Q·R` with `Q` of shape
//! `n×m`, `R` upper triangular `m×m` and a real positive diagonal. The sorted
//! variant picks, at every elimination step, the remaining column with the
//! smallest residual norm, so the diagonal of `R` is (greedily) ascending and
//! the last layer is the strongest one.

use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError, Permutation};

/// Relative pivot size below which a matrix is treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Relative residual-norm gap under which two candidate columns are
/// considered tied during sorting.
pub const SORT_TIE_TOLERANCE: f64 = 1e-12;

/// Result of a (possibly column-sorted) QR decomposition.
#[derive(Clone, Debug)]
pub struct SortedQrd {
    /// `n×m`, orthonormal columns.
    pub q: ComplexMatrix,
    /// `m×m` upper triangular with positive real diagonal.
    pub r: ComplexMatrix,
    /// Column order applied to the input before factorization.
    pub perm: Permutation,
}

/// Thin QR decomposition of a full-column-rank matrix.
pub fn qrd(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix), LinalgError> {
    let out = householder(a, false)?;
    Ok((out.q, out.r))
}

/// QR decomposition with greedy minimum-residual-norm column ordering.
pub fn sorted_qrd(a: &ComplexMatrix) -> Result<SortedQrd, LinalgError> {
    householder(a, true)
}

fn householder(a: &ComplexMatrix, sort: bool) -> Result<SortedQrd, LinalgError> {
    let (n, m) = a.shape();
    if n < m {
        return Err(LinalgError::DimensionMismatch {
            expected: (m, m),
            found: (n, m),
        });
    }
    let scale = a.frobenius_norm();
    let threshold = RANK_TOLERANCE * scale;
    // Column-major working copy: columns are swapped and reflected in place.
    let mut cols: Vec<Vec<Complex64>> = (0..m).map(|j| a.column(j).into_inner()).collect();
    let mut perm = Permutation::identity(m);
    let mut reflectors: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    let mut r = ComplexMatrix::zeros(m, m);

    for k in 0..m {
        if sort {
            let pick = pick_weakest(&cols, k, &perm);
            if pick != k {
                cols.swap(k, pick);
                perm.swap(k, pick);
            }
        }

        let x = &cols[k][k..];
        let norm = x.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm.is_nan() || norm <= threshold || norm == 0.0 {
            return Err(LinalgError::RankDeficient { step: k, pivot: norm });
        }
        let x0 = x[0];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        // Reflect x onto alpha·e₁ with alpha = −phase·‖x‖ to avoid cancellation.
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = x.to_vec();
        v[0] -= alpha;
        let vnorm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if vnorm > 0.0 {
            for vi in &mut v {
                *vi /= vnorm;
            }
        }
        for col in cols.iter_mut().skip(k) {
            apply_reflector(&v, &mut col[k..]);
        }
        // The pivot column is now exactly alpha·e₁.
        cols[k][k] = alpha;
        for z in cols[k][k + 1..].iter_mut() {
            *z = Complex64::new(0.0, 0.0);
        }
        for i in 0..=k {
            r[(i, k)] = cols[k][i];
        }
        reflectors.push(v);
    }

    // Thin Q: apply the reflectors in reverse order to the first m columns of I.
    let mut qcols: Vec<Vec<Complex64>> = (0..m)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();
    for (k, v) in reflectors.iter().enumerate().rev() {
        for col in qcols.iter_mut() {
            apply_reflector(v, &mut col[k..]);
        }
    }

    // Absorb diagonal phases into Q so that diag(R) is real positive.
    for k in 0..m {
        let d = r[(k, k)];
        let mag = d.norm();
        let unit = d / mag;
        for j in k..m {
            r[(k, j)] *= unit.conj();
        }
        r[(k, k)] = Complex64::new(mag, 0.0);
        for z in qcols[k].iter_mut() {
            *z *= unit;
        }
    }

    let q = ComplexMatrix::from_fn(n, m, |i, j| qcols[j][i]);
    Ok(SortedQrd { q, r, perm })
}

/// `x ← (I − 2vvᴴ)·x` for a unit vector `v`.
#[inline]
fn apply_reflector(v: &[Complex64], x: &mut [Complex64]) {
    let proj: Complex64 = v.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
    let s = proj * 2.0;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= vi * s;
    }
}

/// Index (≥ k) of the remaining column with the smallest residual norm on
/// rows `k..`, ties going to the lower original column index.
fn pick_weakest(cols: &[Vec<Complex64>], k: usize, perm: &Permutation) -> usize {
    let residual = |j: usize| cols[j][k..].iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    let mut best = k;
    let mut best_norm = residual(k);
    for j in k + 1..cols.len() {
        let nj = residual(j);
        let gap = (nj - best_norm).abs();
        let tied = gap <= SORT_TIE_TOLERANCE * nj.max(best_norm);
        if tied {
            if perm.order()[j] < perm.order()[best] {
                best = j;
                best_norm = nj;
            }
        } else if nj < best_norm {
            best = j;
            best_norm = nj;
        }
    }
    best
}
