//! Uplink radio channel: log-distance path loss, log-normal shadowing,
//! Rayleigh fading and linear-domain SINR combining.
//!
//! All large-scale terms work in dB / dBm; power combining happens in linear
//! milliwatts. Per-step realizations are drawn independently, so the channel
//! is memoryless between steps.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("channel.{key}: {message}")]
    InvalidConfig { key: &'static str, message: String },
    #[error("link distance must be positive, got {0}")]
    NonPositiveDistance(f64),
}

fn invalid(key: &'static str, message: impl Into<String>) -> ChannelError {
    ChannelError::InvalidConfig { key, message: message.into() }
}

/// How co-channel interference enters the SINR denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceMode {
    /// Transmitters at other APs whose PRB ranges intersect contribute,
    /// scaled by the overlap fraction.
    Overlap,
    /// Noise only.
    NoiseLimited,
}

/// Small-scale fading family. `None` pins the fading power to 1, which makes
/// the channel fully deterministic when shadowing is also disabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingMode {
    Rayleigh,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    /// Path-loss exponent of the log-distance model.
    pub pathloss_exponent: f64,
    /// Reference distance d0 in metres; distances are clamped up to it.
    pub reference_distance_m: f64,
    /// Loss at the reference distance, dB.
    pub pathloss_intercept_db: f64,
    /// Standard deviation of the log-normal shadowing term, dB.
    pub shadowing_sigma_db: f64,
    pub fading: FadingMode,
    /// Thermal noise power per allocation, dBm.
    pub noise_power_dbm: f64,
    pub interference_mode: InterferenceMode,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            pathloss_exponent: 3.0,
            reference_distance_m: 1.0,
            pathloss_intercept_db: 30.0,
            shadowing_sigma_db: 8.0,
            fading: FadingMode::Rayleigh,
            noise_power_dbm: -110.0,
            interference_mode: InterferenceMode::Overlap,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.pathloss_exponent > 0.0) {
            return Err(invalid("pathloss_exponent", "must be positive"));
        }
        if !(self.reference_distance_m > 0.0) {
            return Err(invalid("reference_distance_m", "must be positive"));
        }
        if !self.pathloss_intercept_db.is_finite() {
            return Err(invalid("pathloss_intercept_db", "must be finite"));
        }
        if !(self.shadowing_sigma_db >= 0.0) {
            return Err(invalid("shadowing_sigma_db", "must be non-negative"));
        }
        if !self.noise_power_dbm.is_finite() {
            return Err(invalid("noise_power_dbm", "must be finite"));
        }
        Ok(())
    }
}

/// One independent draw of the large- and small-scale channel terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRealization {
    pub pathloss_db: f64,
    pub shadowing_db: f64,
    /// Unit-mean fading power gain, linear.
    pub fading_power: f64,
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Log-distance path loss as a (negative) gain in dB.
///
/// Distances below the reference distance are clamped to it; non-positive
/// distances are rejected.
pub fn path_loss_db(distance_m: f64, cfg: &ChannelConfig) -> Result<f64, ChannelError> {
    if !(distance_m > 0.0) {
        return Err(ChannelError::NonPositiveDistance(distance_m));
    }
    let d = distance_m.max(cfg.reference_distance_m);
    Ok(-cfg.pathloss_intercept_db
        - 10.0 * cfg.pathloss_exponent * (d / cfg.reference_distance_m).log10())
}

/// Draws shadowing and fading for one link at the given distance.
pub fn sample_link(
    rng: &mut impl Rng,
    distance_m: f64,
    cfg: &ChannelConfig,
) -> Result<LinkRealization, ChannelError> {
    let pathloss_db = path_loss_db(distance_m, cfg)?;
    let shadowing_db = if cfg.shadowing_sigma_db > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        z * cfg.shadowing_sigma_db
    } else {
        0.0
    };
    let fading_power = match cfg.fading {
        FadingMode::Rayleigh => {
            // Rayleigh amplitude <=> exponentially distributed power, mean 1.
            let e: f64 = Exp1.sample(rng);
            e.max(f64::MIN_POSITIVE)
        }
        FadingMode::None => 1.0,
    };
    Ok(LinkRealization { pathloss_db, shadowing_db, fading_power })
}

/// Received power for a transmit power through one link realization, dBm.
pub fn received_power_dbm(ptx_dbm: f64, link: &LinkRealization) -> f64 {
    ptx_dbm + link.pathloss_db + link.shadowing_db + 10.0 * link.fading_power.log10()
}

/// SINR in dB; the denominator combines noise and interferers in linear mW.
/// With no interferers this reduces to `signal - noise` exactly.
pub fn sinr_db(signal_dbm: f64, interferers_dbm: &[f64], noise_dbm: f64) -> f64 {
    if interferers_dbm.is_empty() {
        return signal_dbm - noise_dbm;
    }
    let denom_mw =
        dbm_to_mw(noise_dbm) + interferers_dbm.iter().map(|&p| dbm_to_mw(p)).sum::<f64>();
    10.0 * (dbm_to_mw(signal_dbm) / denom_mw).log10()
}
