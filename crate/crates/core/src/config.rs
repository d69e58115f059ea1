//! TOML run configuration.
//!
//! Every field has a default, so an empty document is a valid full-scale
//! run; unknown keys are rejected rather than silently ignored. Validation
//! errors name the offending key with its section prefix.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::ChannelConfig;
use crate::drl::DrlHyper;
use crate::env::RewardWeights;
use crate::federate::RunMode;
use crate::phy::{McsTable, PhyError, PowerSet};
use crate::replay::PerConfig;
use crate::topology::TopologyConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("{0}")]
    Module(String),
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.into() }
}

/// Radio-link parameters: the rate table, the power menu, and the
/// resource-block plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhyConfig {
    /// Resource blocks granted to each transmitter.
    pub prbs_per_tx: u32,
    /// Bandwidth of one resource block.
    pub prb_bandwidth_hz: f64,
    /// System-wide resource-block budget per transmitter cap.
    pub zeta_max: u32,
    /// Optional CSV override of the bundled modulation table.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mcs_table_path: Option<PathBuf>,
}

impl Default for PhyConfig {
    fn default() -> Self {
        Self {
            prbs_per_tx: 4,
            prb_bandwidth_hz: 180e3,
            zeta_max: 8,
            mcs_table_path: None,
        }
    }
}

impl PhyConfig {
    pub fn load_table(&self) -> Result<McsTable, PhyError> {
        match &self.mcs_table_path {
            Some(path) => McsTable::load(path),
            None => McsTable::bundled(),
        }
    }

    pub fn power_set(&self) -> PowerSet {
        PowerSet::default()
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.prbs_per_tx == 0 || self.prbs_per_tx > self.zeta_max {
            return Err(invalid(
                "phy.prbs_per_tx",
                format!("must lie in 1..={}, got {}", self.zeta_max, self.prbs_per_tx),
            ));
        }
        if !(self.prb_bandwidth_hz > 0.0 && self.prb_bandwidth_hz.is_finite()) {
            return Err(invalid("phy.prb_bandwidth_hz", "must be positive"));
        }
        Ok(())
    }
}

/// Reward shaping and the service thresholds it penalizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub alpha1: f64,
    pub alpha2: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub c: f64,
    /// Minimum acceptable delivered rate.
    pub t_min_bps: f64,
    /// Minimum acceptable SINR.
    pub psi_min_db: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        let w = RewardWeights::default();
        Self {
            alpha1: w.alpha1,
            alpha2: w.alpha2,
            tau1: w.tau1,
            tau2: w.tau2,
            tau3: w.tau3,
            c: w.c,
            t_min_bps: 1e5,
            psi_min_db: -6.7,
        }
    }
}

impl RewardConfig {
    pub fn weights(&self) -> RewardWeights {
        RewardWeights {
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            tau1: self.tau1,
            tau2: self.tau2,
            tau3: self.tau3,
            c: self.c,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.weights().validate().map_err(|e| ConfigError::Module(e.to_string()))?;
        if !(self.t_min_bps >= 0.0 && self.t_min_bps.is_finite()) {
            return Err(invalid("reward.t_min_bps", "must be finite and non-negative"));
        }
        if !self.psi_min_db.is_finite() {
            return Err(invalid("reward.psi_min_db", "must be finite"));
        }
        Ok(())
    }
}

/// Learner hyperparameters, flattened together with the replay settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrlConfig {
    pub learning_rate: f64,
    pub gamma: f64,
    pub momentum: f64,
    pub epsilon_init: f64,
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
    pub target_sync_period: u64,
    pub batch_size: usize,
    pub update_period: u64,
    pub per_capacity: usize,
    pub per_alpha: f64,
    pub per_beta_init: f64,
    pub per_beta_final: f64,
    pub per_epsilon: f64,
}

impl Default for DrlConfig {
    fn default() -> Self {
        let h = DrlHyper::default();
        let p = PerConfig::default();
        Self {
            learning_rate: h.learning_rate,
            gamma: h.gamma,
            momentum: h.momentum,
            epsilon_init: h.epsilon_init,
            epsilon_decay: h.epsilon_decay,
            epsilon_min: h.epsilon_min,
            target_sync_period: h.target_sync_period,
            batch_size: h.batch_size,
            update_period: h.update_period,
            per_capacity: p.capacity,
            per_alpha: p.alpha,
            per_beta_init: p.beta_init,
            per_beta_final: p.beta_final,
            per_epsilon: p.epsilon,
        }
    }
}

impl DrlConfig {
    pub fn hyper(&self) -> DrlHyper {
        DrlHyper {
            learning_rate: self.learning_rate,
            gamma: self.gamma,
            momentum: self.momentum,
            epsilon_init: self.epsilon_init,
            epsilon_decay: self.epsilon_decay,
            epsilon_min: self.epsilon_min,
            target_sync_period: self.target_sync_period,
            batch_size: self.batch_size,
            update_period: self.update_period,
        }
    }

    pub fn per_config(&self) -> PerConfig {
        PerConfig {
            capacity: self.per_capacity,
            alpha: self.per_alpha,
            beta_init: self.per_beta_init,
            beta_final: self.per_beta_final,
            epsilon: self.per_epsilon,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.hyper().validate().map_err(|e| ConfigError::Module(e.to_string()))?;
        self.per_config().validate().map_err(|e| {
            // Replay keys live under [drl] as per_* fields.
            ConfigError::Module(format!("drl.per_*: {e}"))
        })?;
        if self.per_capacity < self.batch_size {
            return Err(invalid(
                "drl.per_capacity",
                format!("must hold at least one batch of {}", self.batch_size),
            ));
        }
        Ok(())
    }
}

/// Round structure of a training run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FederateConfig {
    pub rounds: u32,
    pub steps_per_round: u32,
    /// Persist the global model after every aggregation.
    pub save_checkpoints: bool,
}

impl Default for FederateConfig {
    fn default() -> Self {
        Self { rounds: 60, steps_per_round: 500, save_checkpoints: false }
    }
}

impl FederateConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.rounds == 0 {
            return Err(invalid("federate.rounds", "must be at least 1"));
        }
        if self.steps_per_round == 0 {
            return Err(invalid("federate.steps_per_round", "must be at least 1"));
        }
        Ok(())
    }
}

/// Complete experiment description. Scalar fields precede the section tables
/// so the emitted TOML parses back unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Training regimes to run.
    pub modes: Vec<RunMode>,
    /// Seeds; each (mode, seed) pair is one training run.
    pub seeds: Vec<u64>,
    /// Output directory for CSV curves and the summary.
    pub out_dir: PathBuf,
    /// Rounds averaged by the end-of-training summary.
    pub final_k: usize,
    /// Export the control-plane message trace alongside metrics.
    pub export_trace: bool,
    pub topology: TopologyConfig,
    pub channel: ChannelConfig,
    pub phy: PhyConfig,
    pub reward: RewardConfig,
    pub drl: DrlConfig,
    pub federate: FederateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            modes: vec![RunMode::FedDrl, RunMode::Idrl, RunMode::Ra],
            seeds: vec![1, 2, 3],
            out_dir: PathBuf::from("results"),
            final_k: 10,
            export_trace: false,
            topology: TopologyConfig::default(),
            channel: ChannelConfig::default(),
            phy: PhyConfig::default(),
            reward: RewardConfig::default(),
            drl: DrlConfig::default(),
            federate: FederateConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.modes.is_empty() {
            return Err(invalid("modes", "at least one run mode is required"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "at least one seed is required"));
        }
        if self.final_k == 0 {
            return Err(invalid("final_k", "must be at least 1"));
        }
        self.topology.validate().map_err(|e| ConfigError::Module(e.to_string()))?;
        self.channel.validate().map_err(|e| ConfigError::Module(e.to_string()))?;
        self.phy.validate()?;
        self.reward.validate()?;
        self.drl.validate()?;
        self.federate.validate()?;
        Ok(())
    }
}

/// Parses and validates a TOML document; an empty string yields defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Emits the configuration as TOML that [`parse_config`] accepts unchanged.
pub fn emit_config(cfg: &RunConfig) -> String {
    toml::to_string_pretty(cfg).expect("run configuration serializes to TOML")
}
