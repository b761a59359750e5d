//! Pilot-based channel estimation and interference+noise covariance estimation.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::{AirlinkError, ChannelRealization};
use crate::numkit::{ComplexMatrix, ComplexVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CeMode {
    /// Receiver knows the true channel.
    Ideal,
    /// Least-squares estimate from orthogonal pilots.
    LsPilot,
}

impl fmt::Display for CeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CeMode::Ideal => "ideal",
            CeMode::LsPilot => "ls_pilot",
        })
    }
}

impl FromStr for CeMode {
    type Err = AirlinkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ideal" => Ok(CeMode::Ideal),
            "ls_pilot" | "ls-pilot" | "ls" => Ok(CeMode::LsPilot),
            other => Err(AirlinkError::UnsupportedKind(other.to_string())),
        }
    }
}

/// Time-orthogonal pilot layout: user `u` alone transmits in slots
/// `u·per_user .. (u+1)·per_user`, with unit-modulus pilot symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct PilotPlan {
    pub n_users: usize,
    pub per_user: usize,
}

impl PilotPlan {
    pub fn new(n_users: usize, per_user: usize) -> Self {
        PilotPlan { n_users, per_user }
    }

    pub fn slot_count(&self) -> usize {
        self.n_users * self.per_user
    }

    /// Owner of a slot.
    pub fn user_of(&self, slot: usize) -> usize {
        slot / self.per_user
    }

    /// Pilot symbol sent in `slot` by its owner (a QPSK point cycling with
    /// the slot index).
    pub fn symbol(&self, slot: usize) -> Complex64 {
        const PHASES: [(f64, f64); 4] = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];
        let (re, im) = PHASES[slot % 4];
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Transmit vector over all users for `slot`.
    pub fn tx_vector(&self, slot: usize) -> ComplexVector {
        let mut x = ComplexVector::zeros(self.n_users);
        x[self.user_of(slot)] = self.symbol(slot);
        x
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelEstimate {
    pub h_hat: ComplexMatrix,
    pub mode: CeMode,
    /// Estimated per-entry estimation-error variance (0 for ideal).
    pub error_var: f64,
}

/// Channel estimate from received pilot slots.
///
/// `y_pilots[t]` is the receive vector for pilot slot `t` of `plan`. In
/// [`CeMode::LsPilot`] each user's column is the pilot-matched average over
/// its own slots; `error_var` is the residual variance divided by the pilot
/// count (0 when a user has a single pilot).
pub fn estimate_channel(
    real: &ChannelRealization,
    plan: &PilotPlan,
    y_pilots: &[ComplexVector],
    mode: CeMode,
) -> Result<ChannelEstimate, AirlinkError> {
    if mode == CeMode::Ideal {
        return Ok(ChannelEstimate {
            h_hat: real.h.clone(),
            mode,
            error_var: 0.0,
        });
    }
    let n_rx = real.n_rx();
    let n_users = real.n_users();
    if plan.per_user == 0 || plan.n_users != n_users {
        return Err(AirlinkError::InsufficientPilots {
            users: n_users,
            pilots: plan.per_user * plan.n_users,
        });
    }
    if y_pilots.len() != plan.slot_count() {
        return Err(AirlinkError::InsufficientPilots {
            users: n_users,
            pilots: y_pilots.len(),
        });
    }
    if let Some(bad) = y_pilots.iter().find(|y| y.len() != n_rx) {
        return Err(AirlinkError::DimensionMismatch(format!(
            "pilot observation of length {}, expected {n_rx}",
            bad.len()
        )));
    }

    let p = plan.per_user as f64;
    let mut h_hat = ComplexMatrix::zeros(n_rx, n_users);
    for (t, y) in y_pilots.iter().enumerate() {
        let u = plan.user_of(t);
        let ps = plan.symbol(t);
        let w = ps.conj() / (ps.norm_sqr() * p);
        for i in 0..n_rx {
            h_hat[(i, u)] += y[i] * w;
        }
    }

    let mut error_var = 0.0;
    if plan.per_user > 1 {
        let mut resid = 0.0;
        for (t, y) in y_pilots.iter().enumerate() {
            let u = plan.user_of(t);
            let ps = plan.symbol(t);
            for i in 0..n_rx {
                resid += (y[i] - h_hat[(i, u)] * ps).norm_sqr();
            }
        }
        let dof = (n_users * n_rx * (plan.per_user - 1)) as f64;
        error_var = resid / dof / p;
    }
    Ok(ChannelEstimate {
        h_hat,
        mode,
        error_var,
    })
}

/// Diagonal loading rule for [`estimate_covariance`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Loading {
    /// `ε` added to the diagonal as-is.
    Absolute(f64),
    /// `ε = factor · trace(R̂)/n`, with [`MIN_LOADING`] as a floor.
    RelativeTrace(f64),
}

impl Default for Loading {
    fn default() -> Self {
        Loading::RelativeTrace(1e-6)
    }
}

/// Floor applied to relative loading so an all-zero sample set stays PD.
pub const MIN_LOADING: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceEstimate {
    pub r_uu: ComplexMatrix,
    pub samples: usize,
    pub loading: f64,
}

impl CovarianceEstimate {
    /// Received-signal covariance `R_yy = R_uu + h·hᴴ` for a single user column.
    pub fn r_yy(&self, h: &ComplexVector) -> ComplexMatrix {
        &self.r_uu + &h.outer(h)
    }

    /// Average interference+noise power per antenna.
    pub fn mean_power(&self) -> f64 {
        self.r_uu.trace().re / self.r_uu.rows() as f64
    }
}

/// Residual `û = y − ĥ·x` on a reference observation.
pub fn reference_residual(h_hat: &ComplexMatrix, x: &ComplexVector, y: &ComplexVector) -> ComplexVector {
    y - &h_hat.mul_vec(x)
}

/// `R̂_uu = (1/T)·Σ û_t·û_tᴴ + ε·I`, symmetrized to be exactly Hermitian.
pub fn estimate_covariance(
    residuals: &[ComplexVector],
    loading: Loading,
) -> Result<CovarianceEstimate, AirlinkError> {
    let first = residuals.first().ok_or(AirlinkError::EmptySampleSet)?;
    let n = first.len();
    if n == 0 {
        return Err(AirlinkError::EmptySampleSet);
    }
    let mut acc = vec![Complex64::new(0.0, 0.0); n * n];
    for u in residuals {
        if u.len() != n {
            return Err(AirlinkError::DimensionMismatch(format!(
                "residual of length {}, expected {n}",
                u.len()
            )));
        }
        // Lower triangle only; mirrored below.
        for i in 0..n {
            let ui = u[i];
            for j in 0..=i {
                acc[i * n + j] += ui * u[j].conj();
            }
        }
    }
    let t = residuals.len() as f64;
    let mut r = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = acc[i * n + j] / t;
            r[(i, j)] = v;
            r[(j, i)] = v.conj();
        }
        r[(i, i)] = Complex64::new(r[(i, i)].re, 0.0);
    }
    let eps = match loading {
        Loading::Absolute(e) => e,
        Loading::RelativeTrace(f) => (f * r.trace().re / n as f64).max(MIN_LOADING),
    };
    for i in 0..n {
        r[(i, i)] += eps;
    }
    Ok(CovarianceEstimate {
        r_uu: r,
        samples: residuals.len(),
        loading: eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airlink::{apply_channel_with_noise, complex_gaussian, generate_channel, ChannelModelConfig};
    use crate::numkit::cholesky;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ideal_returns_truth() {
        let cfg = ChannelModelConfig::default();
        let real = generate_channel(&cfg, 0.1, &mut cfg.stream()).unwrap();
        let est = estimate_channel(&real, &PilotPlan::new(4, 0), &[], CeMode::Ideal).unwrap();
        assert_eq!(est.h_hat, real.h);
        assert_eq!(est.error_var, 0.0);
    }

    #[test]
    fn noiseless_ls_is_exact() {
        let cfg = ChannelModelConfig {
            n_rx: 8,
            n_users: 3,
            seed: 2,
            ..Default::default()
        };
        let real = generate_channel(&cfg, 0.0, &mut cfg.stream()).unwrap();
        let plan = PilotPlan::new(3, 2);
        let none = ComplexVector::zeros(0);
        let ys: Vec<_> = (0..plan.slot_count())
            .map(|t| {
                apply_channel_with_noise(&real, &plan.tx_vector(t), &none, &ComplexVector::zeros(8)).unwrap()
            })
            .collect();
        let est = estimate_channel(&real, &plan, &ys, CeMode::LsPilot).unwrap();
        assert!((&est.h_hat - &real.h).frobenius_norm() < 1e-10);
    }

    #[test]
    fn missing_pilots_rejected() {
        let cfg = ChannelModelConfig::default();
        let real = generate_channel(&cfg, 0.1, &mut cfg.stream()).unwrap();
        let err = estimate_channel(&real, &PilotPlan::new(4, 0), &[], CeMode::LsPilot);
        assert!(matches!(err, Err(AirlinkError::InsufficientPilots { .. })));
    }

    #[test]
    fn ls_error_variance_scales_with_pilot_count() {
        let cfg = ChannelModelConfig {
            n_rx: 4,
            n_users: 2,
            seed: 31,
            ..Default::default()
        };
        let sigma2 = 0.1;
        for per_user in [1usize, 4] {
            let plan = PilotPlan::new(2, per_user);
            let mut rng = ChaCha8Rng::seed_from_u64(per_user as u64);
            let none = ComplexVector::zeros(0);
            let trials = 10_000;
            let mut err = 0.0;
            let mut reported = 0.0;
            for _ in 0..trials {
                let real = generate_channel(&cfg, sigma2, &mut rng).unwrap();
                let ys: Vec<_> = (0..plan.slot_count())
                    .map(|t| {
                        let n = ComplexVector::from(
                            (0..4)
                                .map(|_| complex_gaussian(&mut rng, sigma2))
                                .collect::<Vec<_>>(),
                        );
                        apply_channel_with_noise(&real, &plan.tx_vector(t), &none, &n).unwrap()
                    })
                    .collect();
                let est = estimate_channel(&real, &plan, &ys, CeMode::LsPilot).unwrap();
                err += (&est.h_hat - &real.h).frobenius_norm().powi(2) / 8.0;
                reported += est.error_var;
            }
            let mse = err / trials as f64;
            let want = sigma2 / per_user as f64;
            assert!((mse - want).abs() <= 0.1 * want, "P={per_user}: {mse} vs {want}");
            if per_user > 1 {
                let rep = reported / trials as f64;
                assert!((rep - want).abs() <= 0.1 * want, "reported {rep}");
            }
        }
    }

    #[test]
    fn zero_residuals_give_pure_loading() {
        let res = vec![ComplexVector::zeros(3); 5];
        let est = estimate_covariance(&res, Loading::Absolute(1e-3)).unwrap();
        assert_eq!(est.r_uu, ComplexMatrix::identity(3).scale(1e-3));
        assert_eq!(est.samples, 5);
        assert!(matches!(
            estimate_covariance(&[], Loading::default()),
            Err(AirlinkError::EmptySampleSet)
        ));
    }

    #[test]
    fn diagonal_covariance_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let vars = [1.0, 2.0, 3.0];
        let res: Vec<_> = (0..100_000)
            .map(|_| {
                ComplexVector::from(
                    vars.iter()
                        .map(|&v| complex_gaussian(&mut rng, v))
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        let est = estimate_covariance(&res, Loading::default()).unwrap();
        assert_eq!(est.r_uu.hermitian_defect(), 0.0);
        for i in 0..3 {
            for j in 0..3 {
                let truth = if i == j { vars[i] } else { 0.0 };
                // off-diagonal truth is zero: compare against the diagonal scale
                let scale = if i == j {
                    vars[i]
                } else {
                    (vars[i] * vars[j]).sqrt()
                };
                assert!((est.r_uu[(i, j)] - truth).norm() <= 0.05 * scale, "({i},{j})");
            }
        }
    }

    #[test]
    fn rank_one_interferer_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 4;
        let g = ComplexVector::from(
            (0..n)
                .map(|_| complex_gaussian(&mut rng, 1.0))
                .collect::<Vec<_>>(),
        );
        let (p, s2) = (2.0, 0.5);
        let res: Vec<_> = (0..100_000)
            .map(|_| {
                let s = complex_gaussian(&mut rng, p);
                let noise =
                    ComplexVector::from((0..n).map(|_| complex_gaussian(&mut rng, s2)).collect::<Vec<_>>());
                &g.scale(s) + &noise
            })
            .collect();
        let est = estimate_covariance(&res, Loading::default()).unwrap();
        let truth = &g.outer(&g).scale(p) + &ComplexMatrix::identity(n).scale(s2);
        assert!((&est.r_uu - &truth).frobenius_norm() <= 0.05 * truth.frobenius_norm());
        assert!(cholesky(&est.r_uu).is_ok());
    }
}
