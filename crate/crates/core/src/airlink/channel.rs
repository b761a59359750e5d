//! Kronecker-correlated Rayleigh uplink channel with unknown interferers.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::AirlinkError;
use crate::numkit::{cholesky, ComplexMatrix, ComplexVector};

/// Draws a circularly-symmetric complex Gaussian with variance `var`.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var * 0.5).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelModelConfig {
    pub n_rx: usize,
    pub n_users: usize,
    pub n_interferers: usize,
    /// Exponential correlation coefficient between adjacent receive antennas.
    pub rx_correlation: f64,
    /// Interferer power relative to a target user (linear).
    pub interferer_power_ratio: f64,
    pub seed: u64,
}

impl Default for ChannelModelConfig {
    fn default() -> Self {
        ChannelModelConfig {
            n_rx: 16,
            n_users: 4,
            n_interferers: 0,
            rx_correlation: 0.0,
            interferer_power_ratio: 1.0,
            seed: 0,
        }
    }
}

impl ChannelModelConfig {
    pub fn validate(&self) -> Result<(), AirlinkError> {
        if self.n_users == 0 || self.n_rx < self.n_users {
            return Err(AirlinkError::InvalidConfig(format!(
                "need n_rx >= n_users >= 1 (n_rx={}, n_users={})",
                self.n_rx, self.n_users
            )));
        }
        if !(0.0..1.0).contains(&self.rx_correlation) {
            return Err(AirlinkError::InvalidConfig(format!(
                "rx_correlation must lie in [0, 1), got {}",
                self.rx_correlation
            )));
        }
        if !self.interferer_power_ratio.is_finite() || self.interferer_power_ratio <= 0.0 {
            return Err(AirlinkError::InvalidConfig(format!(
                "interferer_power_ratio must be positive, got {}",
                self.interferer_power_ratio
            )));
        }
        Ok(())
    }

    /// Generator seeded from `self.seed`.
    pub fn stream(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// `C_jk = ρ^|j−k|` over the receive antennas.
    pub fn correlation_matrix(&self) -> ComplexMatrix {
        exponential_correlation(self.n_rx, self.rx_correlation)
    }
}

pub fn exponential_correlation(n: usize, rho: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |j, k| {
        Complex64::new(rho.powi((j as i32 - k as i32).abs()), 0.0)
    })
}

/// One channel draw: target users `h`, interferers `g`, noise power.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub h: ComplexMatrix,
    /// `n_rx × n_interferers`; `None` when there are no interferers.
    pub g: Option<ComplexMatrix>,
    pub sigma_n2: f64,
}

impl ChannelRealization {
    pub fn n_rx(&self) -> usize {
        self.h.rows()
    }

    pub fn n_users(&self) -> usize {
        self.h.cols()
    }

    pub fn n_interferers(&self) -> usize {
        self.g.as_ref().map_or(0, ComplexMatrix::cols)
    }
}

/// Draws `h = L·G` and `g = √p·L·G'` where `L·Lᴴ = C` is the receive
/// correlation and `G`, `G'` are i.i.d. unit-variance complex Gaussian.
pub fn generate_channel<R: Rng + ?Sized>(
    cfg: &ChannelModelConfig,
    sigma_n2: f64,
    rng: &mut R,
) -> Result<ChannelRealization, AirlinkError> {
    cfg.validate()?;
    if !sigma_n2.is_finite() || sigma_n2 < 0.0 {
        return Err(AirlinkError::InvalidConfig(format!(
            "invalid noise power {sigma_n2}"
        )));
    }
    let coloring = if cfg.rx_correlation == 0.0 {
        None
    } else {
        Some(cholesky(&cfg.correlation_matrix())?)
    };
    let draw = |rng: &mut R, cols: usize, power: f64| {
        let iid = ComplexMatrix::from_fn(cfg.n_rx, cols, |_, _| complex_gaussian(rng, power));
        match &coloring {
            Some(l) => l * &iid,
            None => iid,
        }
    };
    let h = draw(rng, cfg.n_users, 1.0);
    let g = (cfg.n_interferers > 0).then(|| draw(rng, cfg.n_interferers, cfg.interferer_power_ratio));
    Ok(ChannelRealization { h, g, sigma_n2 })
}

/// `y = h·x + g·s + n` with a freshly drawn noise vector.
pub fn apply_channel<R: Rng + ?Sized>(
    real: &ChannelRealization,
    x: &ComplexVector,
    s_interf: &ComplexVector,
    rng: &mut R,
) -> Result<ComplexVector, AirlinkError> {
    let noise = ComplexVector::from(
        (0..real.n_rx())
            .map(|_| complex_gaussian(rng, real.sigma_n2))
            .collect::<Vec<_>>(),
    );
    apply_channel_with_noise(real, x, s_interf, &noise)
}

/// `y = h·x + g·s + n` for a given noise vector.
pub fn apply_channel_with_noise(
    real: &ChannelRealization,
    x: &ComplexVector,
    s_interf: &ComplexVector,
    noise: &ComplexVector,
) -> Result<ComplexVector, AirlinkError> {
    if x.len() != real.n_users() || s_interf.len() != real.n_interferers() || noise.len() != real.n_rx() {
        return Err(AirlinkError::DimensionMismatch(format!(
            "x={} (want {}), s={} (want {}), n={} (want {})",
            x.len(),
            real.n_users(),
            s_interf.len(),
            real.n_interferers(),
            noise.len(),
            real.n_rx()
        )));
    }
    let mut y = &real.h.mul_vec(x) + noise;
    if let Some(g) = &real.g {
        y = &y + &g.mul_vec(s_interf);
    }
    Ok(y)
}
