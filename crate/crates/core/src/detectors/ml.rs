use num_complex::Complex64;

use super::llr::LLR_MAX;
use super::{DetectError, DetectorOutput};
use crate::airlink::ConstellationSpec;
use crate::numkit::{ComplexMatrix, ComplexVector};

/// Largest search space [`ml_bruteforce`] will enumerate.
pub const ML_MAX_CANDIDATES: usize = 1_000_000;

/// Exhaustive maximum-likelihood detection, `argmin ‖y − H·x‖²`.
///
/// Symbol vectors are visited in lexicographic index order and only a
/// strictly smaller metric replaces the incumbent, so ties resolve to the
/// lexicographically smallest vector. LLRs are exact max-log values over
/// the full search space.
pub fn ml_bruteforce(
    h: &ComplexMatrix,
    y: &ComplexVector,
    cons: &ConstellationSpec,
) -> Result<DetectorOutput, DetectError> {
    let (n, m) = h.shape();
    if y.len() != n {
        return Err(DetectError::DimensionMismatch(format!(
            "y has length {}, expected {n}",
            y.len()
        )));
    }
    let q = cons.size();
    let space = (0..m).try_fold(1usize, |acc, _| {
        acc.checked_mul(q).filter(|&v| v <= ML_MAX_CANDIDATES)
    });
    let Some(space) = space else {
        return Err(DetectError::SearchSpaceTooLarge { users: m, points: q });
    };

    // columns[u][s] = H[:, u]·points[s]
    let columns: Vec<Vec<Vec<Complex64>>> = (0..m)
        .map(|u| {
            cons.points
                .iter()
                .map(|p| (0..n).map(|i| h[(i, u)] * p).collect())
                .collect()
        })
        .collect();

    let bps = cons.bits_per_symbol;
    let mut search = Search {
        columns: &columns,
        cons,
        best_metric: f64::INFINITY,
        best: vec![0; m],
        current: vec![0; m],
        min0: vec![f64::INFINITY; m * bps],
        min1: vec![f64::INFINITY; m * bps],
        visited: 0,
    };
    let mut residual = y.as_slice().to_vec();
    search.descend(0, &mut residual);
    debug_assert_eq!(search.visited, space);

    let llr = search
        .min0
        .iter()
        .zip(&search.min1)
        .map(|(&a, &b)| (b - a).clamp(-LLR_MAX, LLR_MAX))
        .collect();
    Ok(DetectorOutput {
        hard: search.best,
        llr,
        metric: search.best_metric,
    })
}

struct Search<'a> {
    columns: &'a [Vec<Vec<Complex64>>],
    cons: &'a ConstellationSpec,
    best_metric: f64,
    best: Vec<usize>,
    current: Vec<usize>,
    min0: Vec<f64>,
    min1: Vec<f64>,
    visited: usize,
}

impl Search<'_> {
    fn descend(&mut self, user: usize, residual: &mut [Complex64]) {
        if user == self.columns.len() {
            self.visited += 1;
            let metric: f64 = residual.iter().map(Complex64::norm_sqr).sum();
            if metric < self.best_metric {
                self.best_metric = metric;
                self.best.copy_from_slice(&self.current);
            }
            let bps = self.cons.bits_per_symbol;
            for (u, &s) in self.current.iter().enumerate() {
                for b in 0..bps {
                    let slot = if self.cons.bit(s, b) == 0 {
                        &mut self.min0
                    } else {
                        &mut self.min1
                    };
                    let i = u * bps + b;
                    if metric < slot[i] {
                        slot[i] = metric;
                    }
                }
            }
            return;
        }
        for s in 0..self.cons.size() {
            let col = &self.columns[user][s];
            for (r, c) in residual.iter_mut().zip(col) {
                *r -= c;
            }
            self.current[user] = s;
            self.descend(user + 1, residual);
            for (r, c) in residual.iter_mut().zip(col) {
                *r += c;
            }
        }
    }
}
