//! Monte-Carlo BER engine.
//!
//! Every trial owns a ChaCha8 stream: the generator is seeded with
//! `master_seed` and switched to stream
//! `detector_index << 56 | snr_index << 40 | trial_index`, where the
//! detector index is the position in [`DetectorKind::ALL`] and the SNR index
//! is the position in the ascending grid. Trials are summed as integers, so
//! results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use rkb_core::airlink::{
    apply_channel, build_constellation, estimate_channel, estimate_covariance, generate_channel, modulate,
    random_symbols, reference_residual, AirlinkError, CeMode, ChannelModelConfig, ConstellationKind,
    ConstellationSpec, Loading, PilotPlan,
};
use rkb_core::detectors::DetectError;
use rkb_core::fec::{build_code, FecError, LdpcCode};
use rkb_core::numkit::ComplexVector;

use crate::config::{ConfigError, DetectorKind, ScenarioConfig};
use crate::receiver::{true_covariance, Receiver, TrialKnowledge};

/// Aggregated result of one (detector, SNR) point.
#[derive(Clone, Debug, PartialEq)]
pub struct BerRecord {
    pub detector: DetectorKind,
    pub snr_db: f64,
    pub trials: u64,
    pub bits: u64,
    pub bit_errors: u64,
    /// Exactly `bit_errors / bits`.
    pub ber: f64,
    pub coded: bool,
    pub ce_mode: CeMode,
    pub seed: u64,
}

/// A record plus the spread of per-trial error counts, for confidence
/// statements that respect the within-trial correlation of errors.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSummary {
    pub record: BerRecord,
    /// `Σ e_t²` over trials, with `e_t` the error count of trial `t`.
    pub error_sq_sum: u128,
}

impl PointSummary {
    /// Standard error of the BER estimate from the trial-to-trial variance.
    pub fn ber_std_error(&self) -> f64 {
        let r = &self.record;
        let t = r.trials as f64;
        if r.trials < 2 {
            return f64::INFINITY;
        }
        let mean = r.bit_errors as f64 / t;
        let var = ((self.error_sq_sum as f64) - t * mean * mean).max(0.0) / (t - 1.0);
        let bits_per_trial = r.bits as f64 / t;
        (var / t).sqrt() / bits_per_trial
    }
}

#[derive(Debug, Error)]
pub enum TrialError {
    #[error(transparent)]
    Airlink(#[from] AirlinkError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Fec(#[from] FecError),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("LDPC code construction failed: {0}")]
    Code(#[source] FecError),
    #[error("{detector} at {snr_db} dB, trial {trial}: {source}")]
    Trial {
        detector: DetectorKind,
        snr_db: f64,
        trial: u64,
        #[source]
        source: TrialError,
    },
}

/// Generator for one trial.
pub fn trial_rng(master_seed: u64, detector_index: usize, snr_index: usize, trial: u64) -> ChaCha8Rng {
    debug_assert!(detector_index < 1 << 8 && snr_index < 1 << 16 && trial < 1 << 40);
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((detector_index as u64) << 56) | ((snr_index as u64) << 40) | trial);
    rng
}

/// `σ_n² = 10^(−SNR/10)`: unit channel gain and unit symbol energy give
/// every target user unit power per receive antenna.
pub fn noise_power(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// SNR grid in ascending order, the order used for stream indices and rows.
pub fn sorted_grid(cfg: &ScenarioConfig) -> Vec<f64> {
    let mut grid = cfg.snr_grid_db.clone();
    grid.sort_by(f64::total_cmp);
    grid
}

/// Runs every (detector, SNR) point in detector-list order, then ascending
/// SNR.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<BerRecord>, RunError> {
    Ok(run_scenario_detailed(cfg)?
        .into_iter()
        .map(|p| p.record)
        .collect())
}

/// [`run_scenario`] with per-point trial statistics.
pub fn run_scenario_detailed(cfg: &ScenarioConfig) -> Result<Vec<PointSummary>, RunError> {
    cfg.validate()?;
    let code = if cfg.coded {
        let mut code = build_code(cfg.ldpc.seed).map_err(RunError::Code)?;
        code.max_iters = cfg.ldpc.max_iters;
        code.alpha = cfg.ldpc.alpha;
        Some(code)
    } else {
        None
    };
    let grid = sorted_grid(cfg);
    let mut out = Vec::with_capacity(cfg.detectors.len() * grid.len());
    for &detector in &cfg.detectors {
        for (snr_index, &snr_db) in grid.iter().enumerate() {
            out.push(run_point(cfg, code.as_ref(), detector, snr_index, snr_db)?);
        }
    }
    Ok(out)
}

struct PointContext<'a> {
    cfg: &'a ScenarioConfig,
    cons: ConstellationSpec,
    interferer_cons: ConstellationSpec,
    channel: ChannelModelConfig,
    plan: PilotPlan,
    code: Option<&'a LdpcCode>,
    detector: DetectorKind,
    snr_index: usize,
    sigma_n2: f64,
}

/// Runs all trials of one point.
pub fn run_point(
    cfg: &ScenarioConfig,
    code: Option<&LdpcCode>,
    detector: DetectorKind,
    snr_index: usize,
    snr_db: f64,
) -> Result<PointSummary, RunError> {
    let ctx = PointContext {
        cfg,
        cons: build_constellation(cfg.constellation),
        interferer_cons: build_constellation(ConstellationKind::Qam16),
        channel: ChannelModelConfig {
            n_rx: cfg.n_rx,
            n_users: cfg.n_users,
            n_interferers: if cfg.noiseless { 0 } else { cfg.n_interferers },
            rx_correlation: cfg.rx_correlation,
            interferer_power_ratio: cfg.interferer_power_ratio,
            seed: cfg.master_seed,
        },
        plan: PilotPlan::new(cfg.n_users, cfg.pilot_count),
        code,
        detector,
        snr_index,
        sigma_n2: if cfg.noiseless { 0.0 } else { noise_power(snr_db) },
    };
    let trials = cfg.trials_per_point as u64;
    let per_trial: Vec<Result<u64, TrialError>> =
        (0..trials).into_par_iter().map(|t| run_trial(&ctx, t)).collect();

    let mut bit_errors = 0u64;
    let mut error_sq_sum = 0u128;
    for (trial, r) in per_trial.into_iter().enumerate() {
        let e = r.map_err(|source| RunError::Trial {
            detector,
            snr_db,
            trial: trial as u64,
            source,
        })?;
        bit_errors += e;
        error_sq_sum += u128::from(e) * u128::from(e);
    }
    let bits_per_trial = match code {
        Some(code) => code.k,
        None => cfg.n_users * cfg.bits_per_symbol() * cfg.symbols_per_trial,
    } as u64;
    let bits = trials * bits_per_trial;
    Ok(PointSummary {
        record: BerRecord {
            detector,
            snr_db,
            trials,
            bits,
            bit_errors,
            ber: bit_errors as f64 / bits as f64,
            coded: cfg.coded,
            ce_mode: cfg.ce_mode,
            seed: cfg.master_seed,
        },
        error_sq_sum,
    })
}

/// One trial: channel, pilots, covariance reference block, then data.
/// Returns the number of bit errors.
fn run_trial(ctx: &PointContext<'_>, trial: u64) -> Result<u64, TrialError> {
    let cfg = ctx.cfg;
    let cons = &ctx.cons;
    let mut rng = trial_rng(cfg.master_seed, ctx.detector.index(), ctx.snr_index, trial);
    let rng = &mut rng;

    let real = generate_channel(&ctx.channel, ctx.sigma_n2, rng)?;
    let n_i = real.n_interferers();
    let interference = |rng: &mut ChaCha8Rng| {
        modulate(
            &ctx.interferer_cons,
            &random_symbols(&ctx.interferer_cons, n_i, rng),
        )
    };

    let pilots = match cfg.ce_mode {
        CeMode::Ideal => Vec::new(),
        CeMode::LsPilot => (0..ctx.plan.slot_count())
            .map(|t| {
                let s = interference(rng);
                apply_channel(&real, &ctx.plan.tx_vector(t), &s, rng)
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    let est = estimate_channel(&real, &ctx.plan, &pilots, cfg.ce_mode)?;

    let residuals = (0..cfg.covariance_samples)
        .map(|_| {
            let x = modulate(cons, &random_symbols(cons, cfg.n_users, rng));
            let s = interference(rng);
            let y = apply_channel(&real, &x, &s, rng)?;
            Ok(reference_residual(&est.h_hat, &x, &y))
        })
        .collect::<Result<Vec<_>, AirlinkError>>()?;
    let cov = estimate_covariance(&residuals, Loading::default())?;
    let r_true = true_covariance(real.g.as_ref(), cfg.n_rx, ctx.sigma_n2);

    let know = TrialKnowledge {
        h_hat: &est.h_hat,
        r_uu: &cov.r_uu,
        r_true: &r_true,
        sigma_n2: ctx.sigma_n2,
    };
    let rx = Receiver::build(
        ctx.detector,
        &know,
        &cfg.sr_params,
        (cfg.kbest_k, cfg.kbest_expand),
    )?;

    let transmit = |symbols: &[usize], rng: &mut ChaCha8Rng| -> Result<ComplexVector, AirlinkError> {
        let s = interference(rng);
        apply_channel(&real, &modulate(cons, symbols), &s, rng)
    };

    match ctx.code {
        None => {
            let mut errors = 0u64;
            for _ in 0..cfg.symbols_per_trial {
                let sym = random_symbols(cons, cfg.n_users, rng);
                let y = transmit(&sym, rng)?;
                let det = rx.detect(&y, cons)?;
                // Symbol indices are their Gray labels.
                errors += sym
                    .iter()
                    .zip(&det.hard)
                    .map(|(a, b)| u64::from((a ^ b).count_ones()))
                    .sum::<u64>();
            }
            Ok(errors)
        }
        Some(code) => {
            let bps = cons.bits_per_symbol;
            let per_vector = cfg.n_users * bps;
            let message: Vec<u8> = (0..code.k).map(|_| rng.random_range(0..2u8)).collect();
            let codeword = code.encode(&message)?;
            let vectors = codeword.len().div_ceil(per_vector);
            let mut llrs = Vec::with_capacity(vectors * per_vector);
            for v in 0..vectors {
                let sym: Vec<usize> = (0..cfg.n_users)
                    .map(|u| {
                        let label: Vec<u8> = (0..bps)
                            .map(|b| {
                                let idx = v * per_vector + u * bps + b;
                                // Positions past the codeword carry random filler.
                                codeword
                                    .get(idx)
                                    .copied()
                                    .unwrap_or_else(|| rng.random_range(0..2u8))
                            })
                            .collect();
                        cons.bits_to_symbol(&label)
                    })
                    .collect();
                let y = transmit(&sym, rng)?;
                llrs.extend(rx.detect(&y, cons)?.llr);
            }
            llrs.truncate(code.n);
            let decoded = code.decode_min_sum(&llrs)?;
            Ok(decoded.bits.iter().zip(&message).filter(|(a, b)| a != b).count() as u64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScenarioConfig {
        ScenarioConfig {
            n_rx: 6,
            n_users: 2,
            snr_grid_db: vec![10.0, 0.0],
            trials_per_point: 5,
            symbols_per_trial: 3,
            covariance_samples: 20,
            detectors: DetectorKind::ALL.to_vec(),
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn streams_differ_per_field() {
        let draw = |d, s, t| trial_rng(7, d, s, t).random::<u64>();
        let base = draw(0, 0, 0);
        assert_ne!(base, draw(1, 0, 0));
        assert_ne!(base, draw(0, 1, 0));
        assert_ne!(base, draw(0, 0, 1));
        assert_eq!(base, draw(0, 0, 0));
        assert_ne!(base, trial_rng(8, 0, 0, 0).random::<u64>());
    }

    #[test]
    fn record_order_and_conservation() {
        let cfg = small();
        let recs = run_scenario(&cfg).unwrap();
        assert_eq!(recs.len(), 14);
        for (i, r) in recs.iter().enumerate() {
            assert_eq!(r.detector, cfg.detectors[i / 2]);
            assert_eq!(r.snr_db, [0.0, 10.0][i % 2]);
            assert_eq!(r.bits, 5 * 2 * 4 * 3);
            assert_eq!(r.ber, r.bit_errors as f64 / r.bits as f64);
        }
    }

    #[test]
    fn coded_bits_are_message_bits() {
        let cfg = ScenarioConfig {
            coded: true,
            detectors: vec![DetectorKind::MmseIrc],
            snr_grid_db: vec![30.0],
            ..small()
        };
        let recs = run_scenario(&cfg).unwrap();
        assert_eq!(recs[0].bits, 5 * 144);
        assert_eq!(recs[0].bit_errors, 0);
    }

    #[test]
    fn standard_error_from_trial_spread() {
        let rec = BerRecord {
            detector: DetectorKind::Mrc,
            snr_db: 0.0,
            trials: 4,
            bits: 400,
            bit_errors: 8,
            ber: 0.02,
            coded: false,
            ce_mode: CeMode::Ideal,
            seed: 1,
        };
        // errors 0, 2, 2, 4: mean 2, sample variance 8/3
        let p = PointSummary {
            record: rec,
            error_sq_sum: 24,
        };
        let want = (8.0 / 3.0 / 4.0f64).sqrt() / 100.0;
        assert!((p.ber_std_error() - want).abs() < 1e-15);
    }
}
