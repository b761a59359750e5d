//! Scenario configuration: `key = value` lines with `#` comments.

use std::fmt;
use std::str::FromStr;

use rkb_core::airlink::{CeMode, ConstellationKind};
use rkb_core::detectors::{SrKBestParams, ML_MAX_CANDIDATES};
use thiserror::Error;

/// Detector selection names, in their canonical order. The position in this
/// list is the detector index used for stream derivation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    Mrc,
    MmseIrc,
    Osic,
    Kbest,
    SrKbest,
    RobustSrKbest,
    Ml,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 7] = [
        DetectorKind::Mrc,
        DetectorKind::MmseIrc,
        DetectorKind::Osic,
        DetectorKind::Kbest,
        DetectorKind::SrKbest,
        DetectorKind::RobustSrKbest,
        DetectorKind::Ml,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Mrc => "mrc",
            DetectorKind::MmseIrc => "mmse-irc",
            DetectorKind::Osic => "osic",
            DetectorKind::Kbest => "kbest",
            DetectorKind::SrKbest => "sr-kbest",
            DetectorKind::RobustSrKbest => "robust-sr-kbest",
            DetectorKind::Ml => "ml",
        }
    }

    pub fn index(self) -> usize {
        DetectorKind::ALL.iter().position(|&d| d == self).expect("listed")
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DetectorKind::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = DetectorKind::ALL.iter().map(|d| d.name()).collect();
                format!("unknown detector '{s}' (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for '{key}': {message}")]
    Validation { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LdpcSettings {
    pub seed: u64,
    pub max_iters: usize,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub n_rx: usize,
    pub n_users: usize,
    pub n_interferers: usize,
    pub constellation: ConstellationKind,
    pub snr_grid_db: Vec<f64>,
    pub trials_per_point: usize,
    pub master_seed: u64,
    pub ce_mode: CeMode,
    /// Pilot slots per user in `ls_pilot` mode.
    pub pilot_count: usize,
    pub detectors: Vec<DetectorKind>,
    pub coded: bool,
    pub sr_params: SrKBestParams,
    pub kbest_k: usize,
    pub kbest_expand: usize,
    pub rx_correlation: f64,
    /// Power of each interferer relative to one target user.
    pub interferer_power_ratio: f64,
    /// Reference vectors per trial used to estimate the covariance.
    pub covariance_samples: usize,
    /// Data vectors per trial on the uncoded path.
    pub symbols_per_trial: usize,
    /// Removes noise and interferers entirely.
    pub noiseless: bool,
    pub ldpc: LdpcSettings,
}

/// Largest supported trial index plus one (40-bit stream field).
pub const MAX_TRIALS: usize = 1 << 40;
/// Largest supported SNR grid length (16-bit stream field).
pub const MAX_SNR_POINTS: usize = 1 << 16;

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_rx: 16,
            n_users: 4,
            n_interferers: 0,
            constellation: ConstellationKind::Qam16,
            snr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            trials_per_point: 100,
            master_seed: 1,
            ce_mode: CeMode::Ideal,
            pilot_count: 4,
            detectors: DetectorKind::ALL
                .into_iter()
                .filter(|&d| d != DetectorKind::Ml)
                .collect(),
            coded: false,
            sr_params: SrKBestParams::reference(),
            kbest_k: 16,
            kbest_expand: 4,
            rx_correlation: 0.0,
            interferer_power_ratio: 1.0,
            covariance_samples: 168,
            symbols_per_trial: 24,
            noiseless: false,
            ldpc: LdpcSettings {
                seed: 1,
                max_iters: 25,
                alpha: 0.75,
            },
        }
    }
}

impl ScenarioConfig {
    pub fn bits_per_symbol(&self) -> usize {
        match self.constellation {
            ConstellationKind::Qpsk => 2,
            ConstellationKind::Qam16 => 4,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_users == 0 {
            return Err(invalid("n_users", "must be at least 1"));
        }
        if self.n_rx < self.n_users {
            return Err(invalid(
                "n_rx",
                format!("{} is below n_users = {}", self.n_rx, self.n_users),
            ));
        }
        if self.snr_grid_db.is_empty() {
            return Err(invalid("snr_db", "grid is empty"));
        }
        if self.snr_grid_db.len() > MAX_SNR_POINTS {
            return Err(invalid("snr_db", format!("at most {MAX_SNR_POINTS} points")));
        }
        if let Some(bad) = self.snr_grid_db.iter().find(|s| !s.is_finite()) {
            return Err(invalid("snr_db", format!("{bad} is not finite")));
        }
        if self.trials_per_point == 0 || self.trials_per_point >= MAX_TRIALS {
            return Err(invalid(
                "trials_per_point",
                format!("must lie in 1..{MAX_TRIALS}"),
            ));
        }
        if self.ce_mode == CeMode::LsPilot && self.pilot_count == 0 {
            return Err(invalid(
                "pilot_count",
                "ls_pilot needs at least one pilot per user",
            ));
        }
        if self.detectors.is_empty() {
            return Err(invalid("detectors", "list is empty"));
        }
        for (i, d) in self.detectors.iter().enumerate() {
            if self.detectors[..i].contains(d) {
                return Err(invalid("detectors", format!("'{d}' listed twice")));
            }
        }
        if self.detectors.contains(&DetectorKind::Ml) {
            let points = 1usize << self.bits_per_symbol();
            let feasible = (points as f64).powi(self.n_users as i32) <= ML_MAX_CANDIDATES as f64;
            if !feasible {
                return Err(invalid(
                    "detectors",
                    format!("ml is infeasible for {} users with {points} points", self.n_users),
                ));
            }
        }
        let sr = &self.sr_params;
        if sr.s > sr.k {
            return Err(invalid("sr.s", format!("s = {} exceeds k = {}", sr.s, sr.k)));
        }
        sr.validate().map_err(|e| invalid("sr", e.to_string()))?;
        if self.kbest_k == 0 {
            return Err(invalid("kbest.k", "must be at least 1"));
        }
        if self.kbest_expand == 0 {
            return Err(invalid("kbest.expand", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.rx_correlation) {
            return Err(invalid("rx_correlation", "must lie in [0, 1)"));
        }
        if !(self.interferer_power_ratio >= 0.0 && self.interferer_power_ratio.is_finite()) {
            return Err(invalid(
                "interferer_power_ratio",
                "must be finite and non-negative",
            ));
        }
        if self.covariance_samples == 0 {
            return Err(invalid("covariance_samples", "must be at least 1"));
        }
        if self.symbols_per_trial == 0 {
            return Err(invalid("symbols_per_trial", "must be at least 1"));
        }
        if self.ldpc.max_iters == 0 {
            return Err(invalid("ldpc.max_iters", "must be at least 1"));
        }
        if !(self.ldpc.alpha > 0.0 && self.ldpc.alpha <= 1.0) {
            return Err(invalid("ldpc.alpha", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Parses an SNR grid: either `lo:hi:step` (inclusive of `hi`) or a comma
/// separated list.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let [lo, hi, step] = parts[..] else {
            return Err(format!("expected lo:hi:step, got '{text}'"));
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| format!("'{s}' is not a number"));
        let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
        if step.is_nan() || step <= 0.0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
            return Err(format!("empty or unbounded range '{text}'"));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        if count > MAX_SNR_POINTS {
            return Err(format!("range '{text}' has more than {MAX_SNR_POINTS} points"));
        }
        return Ok((0..count).map(|i| lo + i as f64 * step).collect());
    }
    parse_list(text)
}

fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| format!("'{s}' is not valid here")))
        .collect()
}

fn parse_bool(text: &str) -> Result<bool, String> {
    match text {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(format!("'{text}' is not a boolean")),
    }
}

fn parse_scalar<T: FromStr>(text: &str) -> Result<T, String> {
    text.parse::<T>()
        .map_err(|_| format!("'{text}' is not valid here"))
}

/// Parses the detector list used by the `detectors` key and `--detectors`.
pub fn parse_detectors(text: &str) -> Result<Vec<DetectorKind>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

/// Parses and validates a configuration text. Omitted keys keep their
/// [`ScenarioConfig::default`] values.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = ScenarioConfig::default();
    let mut seen: Vec<String> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ConfigError::Parse {
            line: line_no,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if seen.iter().any(|k| k == key) {
            return Err(err(format!("duplicate key '{key}'")));
        }
        seen.push(key.to_string());
        apply(&mut cfg, key, value).map_err(|m| err(format!("{key}: {m}")))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn apply(cfg: &mut ScenarioConfig, key: &str, value: &str) -> Result<(), String> {
    match key {
        "n_rx" => cfg.n_rx = parse_scalar(value)?,
        "n_users" => cfg.n_users = parse_scalar(value)?,
        "n_interferers" => cfg.n_interferers = parse_scalar(value)?,
        "constellation" => {
            cfg.constellation = value
                .parse()
                .map_err(|e: rkb_core::airlink::AirlinkError| e.to_string())?
        }
        "snr_db" => cfg.snr_grid_db = parse_snr_grid(value)?,
        "trials_per_point" => cfg.trials_per_point = parse_scalar(value)?,
        "seed" => cfg.master_seed = parse_scalar(value)?,
        "ce_mode" => {
            cfg.ce_mode = value
                .parse()
                .map_err(|e: rkb_core::airlink::AirlinkError| e.to_string())?
        }
        "pilot_count" => cfg.pilot_count = parse_scalar(value)?,
        "detectors" => cfg.detectors = parse_detectors(value)?,
        "coded" => cfg.coded = parse_bool(value)?,
        "sr.k" => cfg.sr_params.k = parse_scalar(value)?,
        "sr.s" => cfg.sr_params.s = parse_scalar(value)?,
        "sr.p" => cfg.sr_params.p = parse_list(value)?,
        "sr.v" => cfg.sr_params.v = parse_list(value)?,
        "sr.q" => cfg.sr_params.q = parse_list(value)?,
        "sr.expand" => cfg.sr_params.expand = parse_scalar(value)?,
        "kbest.k" => cfg.kbest_k = parse_scalar(value)?,
        "kbest.expand" => cfg.kbest_expand = parse_scalar(value)?,
        "rx_correlation" => cfg.rx_correlation = parse_scalar(value)?,
        "interferer_power_ratio" => cfg.interferer_power_ratio = parse_scalar(value)?,
        "covariance_samples" => cfg.covariance_samples = parse_scalar(value)?,
        "symbols_per_trial" => cfg.symbols_per_trial = parse_scalar(value)?,
        "noiseless" => cfg.noiseless = parse_bool(value)?,
        "ldpc.seed" => cfg.ldpc.seed = parse_scalar(value)?,
        "ldpc.max_iters" => cfg.ldpc.max_iters = parse_scalar(value)?,
        "ldpc.alpha" => cfg.ldpc.alpha = parse_scalar(value)?,
        _ => return Err("unknown key".into()),
    }
    Ok(())
}
