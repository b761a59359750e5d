//! Per-trial receiver state for each detector.
//!
//! Everything that depends only on the channel estimate and the covariance
//! is computed once per trial; [`Receiver::detect`] then handles one
//! received vector.

use num_complex::Complex64;
use rkb_core::airlink::ConstellationSpec;
use rkb_core::detectors::{
    compute_llrs, demap_scalar, extend_channel, kbest_detect, ml_bruteforce, mmse_irc_weights, mrc_weights,
    osic_detect, sr_kbest_detect, DetectError, LinearWeights, RobustFront, SrKBestParams,
};
use rkb_core::numkit::{inv_sqrt, sorted_qrd, ComplexMatrix, ComplexVector, SortedQrd};

use crate::config::DetectorKind;

/// Floor on the noise power handed to detectors, so the noiseless case
/// keeps every regularized inverse well defined.
pub const MIN_NOISE_POWER: f64 = 1e-10;

/// What the receiver knows in one trial.
pub struct TrialKnowledge<'a> {
    pub h_hat: &'a ComplexMatrix,
    /// Estimated interference-plus-noise covariance.
    pub r_uu: &'a ComplexMatrix,
    /// Exact interference-plus-noise covariance; only the `ml` reference
    /// uses it.
    pub r_true: &'a ComplexMatrix,
    pub sigma_n2: f64,
}

/// Hard symbol decisions (user order) and per-bit LLRs.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub hard: Vec<usize>,
    pub llr: Vec<f64>,
}

pub enum Search {
    Osic,
    Kbest { k: usize, expand: usize },
    Sr(SrKBestParams),
}

#[allow(clippy::large_enum_variant)]
pub enum Receiver {
    /// Linear combiner followed by per-user bias removal.
    Linear { weights: LinearWeights, gain: Vec<f64> },
    /// Tree search on a sorted QRD of the regularized channel.
    Tree {
        qrd: SortedQrd,
        /// Maps raw metrics to units of the effective noise power.
        metric_scale: f64,
        search: Search,
    },
    Robust {
        front: RobustFront,
        params: SrKBestParams,
    },
    Ml {
        whitener: ComplexMatrix,
        h1: ComplexMatrix,
    },
}

impl Receiver {
    pub fn build(
        kind: DetectorKind,
        know: &TrialKnowledge<'_>,
        sr_params: &SrKBestParams,
        kbest: (usize, usize),
    ) -> Result<Receiver, DetectError> {
        let n_rx = know.h_hat.rows();
        let sigma_n2 = know.sigma_n2.max(MIN_NOISE_POWER);
        let linear = |weights: LinearWeights| {
            let wh = &weights.w * know.h_hat;
            let gain = (0..wh.rows()).map(|j| wh[(j, j)].re).collect();
            Receiver::Linear { weights, gain }
        };
        let tree = |search: Search| -> Result<Receiver, DetectError> {
            // Interference power beyond the thermal floor, read off the
            // covariance estimate.
            let sigma_i2 = (know.r_uu.trace().re / n_rx as f64 - sigma_n2).max(0.0);
            let reg2 = sigma_n2 + sigma_i2;
            let qrd = sorted_qrd(&extend_channel(know.h_hat, reg2.sqrt()))?;
            Ok(Receiver::Tree {
                qrd,
                metric_scale: 1.0 / reg2,
                search,
            })
        };
        Ok(match kind {
            DetectorKind::Mrc => linear(mrc_weights(know.h_hat, sigma_n2)?),
            DetectorKind::MmseIrc => {
                // Covariance in units of the noise power makes the weight
                // formula the unit-symbol-power MMSE-IRC solution.
                let r_rel = know.r_uu.scale(1.0 / sigma_n2);
                linear(mmse_irc_weights(know.h_hat, &r_rel, sigma_n2)?)
            }
            DetectorKind::Osic => tree(Search::Osic)?,
            DetectorKind::Kbest => tree(Search::Kbest {
                k: kbest.0,
                expand: kbest.1,
            })?,
            DetectorKind::SrKbest => tree(Search::Sr(sr_params.clone()))?,
            DetectorKind::RobustSrKbest => Receiver::Robust {
                front: RobustFront::new(know.h_hat, know.r_uu)?,
                params: sr_params.clone(),
            },
            DetectorKind::Ml => {
                let mut r = know.r_true.clone();
                for i in 0..n_rx {
                    r[(i, i)] += MIN_NOISE_POWER;
                }
                let whitener = inv_sqrt(&r)?;
                let h1 = &whitener * know.h_hat;
                Receiver::Ml { whitener, h1 }
            }
        })
    }

    pub fn detect(&self, y: &ComplexVector, cons: &ConstellationSpec) -> Result<Detection, DetectError> {
        match self {
            Receiver::Linear { weights, gain } => {
                let x_hat = weights.apply(y);
                let mut hard = Vec::with_capacity(gain.len());
                let mut llr = Vec::with_capacity(gain.len() * cons.bits_per_symbol);
                for (j, &mu) in gain.iter().enumerate() {
                    let mu = mu.max(f64::MIN_POSITIVE);
                    let z = x_hat[j] / mu;
                    hard.push(cons.slice(z));
                    llr.extend(demap_scalar(z, (1.0 - mu).max(0.0) / mu, cons));
                }
                Ok(Detection { hard, llr })
            }
            Receiver::Tree {
                qrd,
                metric_scale,
                search,
            } => {
                let m = qrd.r.cols();
                let y_ext = y.concat(&ComplexVector::zeros(m));
                let list = match search {
                    Search::Osic => {
                        let out = osic_detect(qrd, &y_ext, cons)?;
                        return Ok(Detection {
                            hard: out.hard,
                            llr: out.llr,
                        });
                    }
                    Search::Kbest { k, expand } => {
                        kbest_detect(&qrd.r, &qrd.q.adjoint_mul_vec(&y_ext), *k, cons, *expand)?
                    }
                    Search::Sr(params) => {
                        sr_kbest_detect(&qrd.r, &qrd.q.adjoint_mul_vec(&y_ext), params, cons)?
                    }
                };
                let mut list = list.unpermute(&qrd.perm);
                list.rescale(*metric_scale);
                let llr = compute_llrs(&list, cons, m)?;
                let hard = list.best().ok_or(DetectError::EmptyList)?.symbols.clone();
                Ok(Detection { hard, llr })
            }
            Receiver::Robust { front, params } => {
                let out = front.detect(y, params, cons)?;
                Ok(Detection {
                    hard: out.hard,
                    llr: out.llr,
                })
            }
            Receiver::Ml { whitener, h1 } => {
                let out = ml_bruteforce(h1, &whitener.mul_vec(y), cons)?;
                Ok(Detection {
                    hard: out.hard,
                    llr: out.llr,
                })
            }
        }
    }
}

/// `σ_n²·I + G·Gᴴ`: the exact interference-plus-noise covariance for
/// unit-energy interferer symbols.
pub fn true_covariance(g: Option<&ComplexMatrix>, n_rx: usize, sigma_n2: f64) -> ComplexMatrix {
    let mut r = match g {
        Some(g) => (g * &g.adjoint()).hermitian_part(),
        None => ComplexMatrix::zeros(n_rx, n_rx),
    };
    for i in 0..n_rx {
        r[(i, i)] += Complex64::new(sigma_n2, 0.0);
    }
    r
}
