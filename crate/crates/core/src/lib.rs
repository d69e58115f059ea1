//! Deterministic discrete-time simulator of a smart-factory radio access
//! network in which every transmitter carries a deep-RL agent that jointly
//! picks its modulation-and-coding scheme and transmit power.
//!
//! The crate is organized bottom-up:
//!
//! - [`topology`]: edge clouds, access-point grid, transmitter placement and
//!   mobility inside a circular coverage area.
//! - [`channel`]: log-distance path loss, shadowing, Rayleigh fading, and
//!   linear-domain SINR combining.
//! - [`phy`]: the 29-entry modulation table, transmit power menu,
//!   resource-block accounting, throughput and energy bookkeeping.
//! - [`env`]: the per-step decision loop gluing the three layers into a
//!   multi-agent environment with normalized observations, a shared reward,
//!   constraint tallies, and a control-plane signaling trace.
//! - [`replay`]: proportional prioritized experience replay on a sum tree.
//! - [`drl`]: dueling double-Q learners with momentum gradient descent.
//! - [`federate`]: round-based training with parameter averaging, plus the
//!   independent and random baselines.
//! - [`config`] / [`experiment`]: TOML-driven experiment harness producing
//!   CSV learning curves, a TOML summary, and cross-mode comparisons.
//!
//! Every random draw flows from one run seed through fixed, named RNG
//! streams ([`seeding`]), so any run reproduces bit for bit.

pub mod channel;
pub mod config;
pub mod drl;
pub mod env;
pub mod experiment;
pub mod federate;
pub mod phy;
pub mod replay;
pub mod seeding;
pub mod topology;

pub use config::{emit_config, parse_config, ConfigError, RunConfig};
pub use experiment::{compare, load_summary, run_experiment, ExperimentError, Summary};
pub use federate::{run_training, Federation, RunMode, TrainingRun};
