//! The multi-transmitter decision environment.
//!
//! Each simulation step takes one joint action (an MCS index and a transmit
//! power level per transmitter), realizes every uplink channel, scores the
//! attempts, and returns per-transmitter outcomes plus the shared global
//! reward. Observations are one step delayed: the state handed to the agents
//! at step t summarizes the outcome of step t-1.

pub mod trace;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{
    dbm_to_mw, path_loss_db, received_power_dbm, sample_link, sinr_db, ChannelConfig,
    ChannelError, InterferenceMode,
};
use crate::phy::{
    attempt_outcome, energy_efficiency_bits_per_mj, step_energy_mj, throughput_bps, McsTable,
    PhyError, PowerSet, PrbAllocation, MCS_COUNT, POWER_LEVEL_COUNT,
};
use crate::seeding;
use crate::topology::{advance_mobility, build_topology, Topology, TopologyConfig, TopologyError};

pub use trace::{Direction, Interface, PayloadKind, SignalingTrace, TraceRecord};

/// Size of the joint MCS x power action alphabet.
pub const NUM_ACTIONS: usize = MCS_COUNT * POWER_LEVEL_COUNT;
/// Number of features in an agent observation.
pub const STATE_DIM: usize = 6;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error("action index {0} outside 0..{NUM_ACTIONS}")]
    BadActionIndex(usize),
    #[error("mcs {0} outside 1..={MCS_COUNT}")]
    BadMcs(u8),
    #[error("power level {0} outside 1..={POWER_LEVEL_COUNT}")]
    BadPower(u8),
    #[error("expected {expected} actions, got {got}")]
    ActionCountMismatch { expected: usize, got: usize },
    #[error("global reward of an empty transmitter set is undefined")]
    EmptyRewardList,
    #[error("{key}: {message}")]
    InvalidConfig { key: &'static str, message: String },
}

fn invalid(key: &'static str, message: impl Into<String>) -> EnvError {
    EnvError::InvalidConfig { key, message: message.into() }
}

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

/// A joint (MCS, power level) choice packed into a single index:
/// `a = (m - 1) * 6 + (k - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActionIndex(u16);

impl ActionIndex {
    pub fn new(raw: usize) -> Result<Self, EnvError> {
        if raw >= NUM_ACTIONS {
            return Err(EnvError::BadActionIndex(raw));
        }
        Ok(Self(raw as u16))
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }

    /// MCS index m in 1..=29.
    pub fn mcs(self) -> u8 {
        (self.0 / POWER_LEVEL_COUNT as u16) as u8 + 1
    }

    /// Power level k in 1..=6.
    pub fn power_level(self) -> u8 {
        (self.0 % POWER_LEVEL_COUNT as u16) as u8 + 1
    }
}

pub fn encode_action(m: u8, k: u8) -> Result<ActionIndex, EnvError> {
    if m == 0 || usize::from(m) > MCS_COUNT {
        return Err(EnvError::BadMcs(m));
    }
    if k == 0 || usize::from(k) > POWER_LEVEL_COUNT {
        return Err(EnvError::BadPower(k));
    }
    Ok(ActionIndex(
        (u16::from(m) - 1) * POWER_LEVEL_COUNT as u16 + (u16::from(k) - 1),
    ))
}

pub fn decode_action(a: ActionIndex) -> (u8, u8) {
    (a.mcs(), a.power_level())
}

// ---------------------------------------------------------------------------
// Observations
// ---------------------------------------------------------------------------

/// One agent observation; every feature is normalized into [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AgentState {
    /// Previous-step SINR, affine over [-20, 40] dB, clamped.
    pub sinr: f64,
    /// Previous-step delivered rate over the system throughput cap.
    pub throughput: f64,
    /// Previous-step decode outcome, 0 or 1.
    pub success: f64,
    /// Previous-step received power, affine over [-120, 0] dBm, clamped.
    pub rx_power: f64,
    /// Previous MCS index mapped onto [-1, 1].
    pub mcs: f64,
    /// Previous power level mapped onto [-1, 1].
    pub power: f64,
}

impl AgentState {
    pub fn features(&self) -> [f64; STATE_DIM] {
        [self.sinr, self.throughput, self.success, self.rx_power, self.mcs, self.power]
    }
}

/// Fixed normalization constants shared by observations and rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct StateNorms {
    pub sinr_range_db: (f64, f64),
    pub rx_power_range_dbm: (f64, f64),
    /// Rate of the top MCS over the maximum PRB budget, bits/second.
    pub throughput_cap_bps: f64,
    /// Bits per millijoule of a cap-rate transmission at minimum power.
    pub efficiency_cap: f64,
}

impl StateNorms {
    pub fn new(table: &McsTable, power: &PowerSet, prb_bandwidth_hz: f64, zeta_max: u32) -> Self {
        let throughput_cap_bps =
            f64::from(zeta_max) * prb_bandwidth_hz * table.max_spectral_efficiency();
        Self {
            sinr_range_db: (-20.0, 40.0),
            rx_power_range_dbm: (-120.0, 0.0),
            throughput_cap_bps,
            efficiency_cap: throughput_cap_bps / dbm_to_mw(power.min_dbm()),
        }
    }
}

fn affine_clamp(x: f64, range: (f64, f64)) -> f64 {
    let y = 2.0 * (x - range.0) / (range.1 - range.0) - 1.0;
    y.clamp(-1.0, 1.0)
}

/// Maps the outcome of step t-1 (and the action that produced it) to the
/// observation for step t. Use `AgentState::default()` before the first step.
pub fn build_state(prev: &TxOutcome, norms: &StateNorms) -> AgentState {
    AgentState {
        sinr: affine_clamp(prev.sinr_db, norms.sinr_range_db),
        throughput: prev.throughput_bps / norms.throughput_cap_bps,
        success: if prev.success { 1.0 } else { 0.0 },
        rx_power: affine_clamp(prev.rx_power_dbm, norms.rx_power_range_dbm),
        mcs: (f64::from(prev.mcs) - 1.0) / (MCS_COUNT as f64 - 1.0) * 2.0 - 1.0,
        power: (f64::from(prev.power_level) - 1.0) / (POWER_LEVEL_COUNT as f64 - 1.0) * 2.0 - 1.0,
    }
}

// ---------------------------------------------------------------------------
// Rewards and constraints
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    pub alpha1: f64,
    pub alpha2: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub c: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self { alpha1: 0.5, alpha2: 0.5, tau1: 0.2, tau2: 0.2, tau3: 0.2, c: 1.0 }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<(), EnvError> {
        for (key, v) in [
            ("reward.alpha1", self.alpha1),
            ("reward.alpha2", self.alpha2),
            ("reward.tau1", self.tau1),
            ("reward.tau2", self.tau2),
            ("reward.tau3", self.tau3),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(EnvError::InvalidConfig {
                    key,
                    message: format!("must lie in [0, 1], got {v}"),
                });
            }
        }
        if !(self.c > 0.0) {
            return Err(invalid("reward.c", format!("must be positive, got {}", self.c)));
        }
        Ok(())
    }
}

/// Monitoring thresholds for the four service constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintThresholds {
    pub t_min_bps: f64,
    pub p_max_dbm: f64,
    pub psi_min_db: f64,
    pub zeta_max: u32,
}

/// Per-step violation counts. The power and PRB constraints are enforced
/// structurally (the action alphabet cannot exceed them), so their counters
/// stay at zero; they are tallied anyway as a cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConstraintReport {
    pub c1_throughput: u32,
    pub c2_power: u32,
    pub c3_sinr: u32,
    pub c4_prbs: u32,
}

pub fn constraint_report(per_tx: &[TxOutcome], th: &ConstraintThresholds) -> ConstraintReport {
    let mut report = ConstraintReport::default();
    for o in per_tx {
        report.c1_throughput += u32::from(o.throughput_bps < th.t_min_bps);
        report.c2_power += u32::from(o.power_dbm > th.p_max_dbm);
        report.c3_sinr += u32::from(o.sinr_db < th.psi_min_db);
        report.c4_prbs += u32::from(o.prbs > th.zeta_max);
    }
    report
}

/// Reward of one attempt. Successful attempts earn normalized throughput and
/// energy efficiency plus a delivery bonus; failures pay for the rate the
/// chosen MCS would have delivered plus two fixed penalties.
pub fn local_reward(
    success: bool,
    throughput_bps: f64,
    efficiency: f64,
    attempted_throughput_bps: f64,
    w: &RewardWeights,
    norms: &StateNorms,
) -> f64 {
    if success {
        w.alpha1 * (throughput_bps / norms.throughput_cap_bps)
            + w.alpha2 * (efficiency / norms.efficiency_cap)
            + w.tau1
    } else {
        -w.alpha1 * (attempted_throughput_bps / norms.throughput_cap_bps)
            - w.tau2 * w.c
            - w.tau3 * w.c
    }
}

/// Arithmetic mean of the local rewards; every agent stores this value.
pub fn global_reward(locals: &[f64]) -> Result<f64, EnvError> {
    if locals.is_empty() {
        return Err(EnvError::EmptyRewardList);
    }
    Ok(locals.iter().sum::<f64>() / locals.len() as f64)
}

// ---------------------------------------------------------------------------
// Step outcomes
// ---------------------------------------------------------------------------

/// Everything observable about one transmitter's attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxOutcome {
    pub mcs: u8,
    pub power_level: u8,
    pub power_dbm: f64,
    pub prbs: u32,
    pub sinr_db: f64,
    pub rx_power_dbm: f64,
    pub success: bool,
    pub throughput_bps: f64,
    pub attempted_throughput_bps: f64,
    pub delivered_bits: f64,
    pub efficiency_bits_per_mj: f64,
    pub energy_mj: f64,
    pub local_reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub step: u64,
    pub per_tx: Vec<TxOutcome>,
    pub global_reward: f64,
    pub constraints: ConstraintReport,
}

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

/// Static PHY-layer inputs of an environment.
#[derive(Debug, Clone)]
pub struct PhyProfile {
    pub table: McsTable,
    pub power: PowerSet,
    pub prbs_per_tx: u32,
    pub prb_bandwidth_hz: f64,
    pub zeta_max: u32,
}

impl PhyProfile {
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.prbs_per_tx == 0 || self.prbs_per_tx > self.zeta_max {
            return Err(invalid(
                "phy.prbs_per_tx",
                format!("must lie in 1..={}, got {}", self.zeta_max, self.prbs_per_tx),
            ));
        }
        if !(self.prb_bandwidth_hz > 0.0) {
            return Err(invalid("phy.prb_bandwidth_hz", "must be positive"));
        }
        if self.power.len() != POWER_LEVEL_COUNT {
            return Err(invalid(
                "phy.power",
                format!("power set must have {POWER_LEVEL_COUNT} levels"),
            ));
        }
        Ok(())
    }
}

/// Exclusive owner of the network state. One `step` call consumes one joint
/// action, realizes every channel, advances mobility, and appends to the
/// signaling trace.
#[derive(Debug, Clone)]
pub struct Env {
    topo: Topology,
    topo_cfg: TopologyConfig,
    chan_cfg: ChannelConfig,
    phy: PhyProfile,
    allocations: Vec<PrbAllocation>,
    weights: RewardWeights,
    norms: StateNorms,
    thresholds: ConstraintThresholds,
    tau_s: f64,
    link_rngs: Vec<ChaCha8Rng>,
    mobility_rng: ChaCha8Rng,
    step_index: u64,
    trace: SignalingTrace,
}

impl Env {
    pub fn new(
        topo_cfg: TopologyConfig,
        chan_cfg: ChannelConfig,
        phy: PhyProfile,
        weights: RewardWeights,
        t_min_bps: f64,
        psi_min_db: f64,
        seed: u64,
        trace_enabled: bool,
    ) -> Result<Self, EnvError> {
        chan_cfg.validate()?;
        phy.validate()?;
        weights.validate()?;
        let mut topo_rng = seeding::stream_rng(seed, seeding::STREAM_TOPOLOGY);
        let topo = build_topology(&topo_cfg, &mut topo_rng)?;

        // Each edge cloud schedules its transmitters on disjoint PRB blocks
        // (orthogonal OFDMA within the cloud); other edge clouds reuse the
        // same blocks, so same-slot transmitters across clouds collide.
        let ec_slots = topo.ec_slots();
        let allocations = (0..topo.num_transmitters())
            .map(|tx| PrbAllocation {
                prbs: phy.prbs_per_tx,
                prb_bandwidth_hz: phy.prb_bandwidth_hz,
                zeta_max: phy.zeta_max,
                prb_offset: ec_slots[tx] as u32 * phy.prbs_per_tx,
            })
            .collect();

        let norms = StateNorms::new(&phy.table, &phy.power, phy.prb_bandwidth_hz, phy.zeta_max);
        let thresholds = ConstraintThresholds {
            t_min_bps,
            p_max_dbm: phy.power.max_dbm(),
            psi_min_db,
            zeta_max: phy.zeta_max,
        };
        let link_rngs = (0..topo.num_transmitters())
            .map(|tx| seeding::stream_rng(seed, seeding::STREAM_LINK_BASE + tx as u64))
            .collect();
        Ok(Self {
            topo,
            tau_s: topo_cfg.step_duration_s,
            topo_cfg,
            chan_cfg,
            phy,
            allocations,
            weights,
            norms,
            thresholds,
            link_rngs,
            mobility_rng: seeding::stream_rng(seed, seeding::STREAM_MOBILITY),
            step_index: 0,
            trace: SignalingTrace::new(trace_enabled),
        })
    }

    pub fn num_transmitters(&self) -> usize {
        self.topo.num_transmitters()
    }

    pub fn norms(&self) -> &StateNorms {
        &self.norms
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn trace(&self) -> &SignalingTrace {
        &self.trace
    }

    pub fn trace_mut(&mut self) -> &mut SignalingTrace {
        &mut self.trace
    }

    pub fn current_step(&self) -> u64 {
        self.step_index
    }

    /// Runs one simulation step under the given joint action.
    ///
    /// Returns the full outcome plus the next observation of every agent.
    pub fn step(
        &mut self,
        actions: &[ActionIndex],
    ) -> Result<(StepOutcome, Vec<AgentState>), EnvError> {
        let n = self.topo.num_transmitters();
        if actions.len() != n {
            return Err(EnvError::ActionCountMismatch { expected: n, got: actions.len() });
        }
        self.step_index += 1;
        let step = self.step_index;

        let ptx_dbm: Vec<f64> = actions
            .iter()
            .map(|a| self.phy.power.level_dbm(a.power_level()))
            .collect::<Result<_, _>>()?;

        for tx in 0..n {
            let ap = self.topo.serving_ap(tx);
            self.trace.record_uplink(step, tx, ap, self.topo.ec_of_ap[ap]);
        }

        let mut per_tx = Vec::with_capacity(n);
        let mut locals = Vec::with_capacity(n);
        for tx in 0..n {
            let (m, k) = decode_action(actions[tx]);
            let p_dbm = ptx_dbm[tx];
            let ap = self.topo.serving_ap(tx);
            let d = self.topo.serving_distance(tx).max(self.chan_cfg.reference_distance_m);
            let link = {
                let rng = &mut self.link_rngs[tx];
                sample_link(rng, d, &self.chan_cfg)?
            };
            let rx_power_dbm = received_power_dbm(p_dbm, &link);

            let mut interferers = Vec::new();
            if self.chan_cfg.interference_mode == InterferenceMode::Overlap {
                for other in 0..n {
                    if self.topo.serving_ap(other) == ap {
                        continue;
                    }
                    let frac = self.allocations[tx].overlap_fraction(&self.allocations[other]);
                    if frac <= 0.0 {
                        continue;
                    }
                    let d_other = self
                        .topo
                        .distance_to_ap(other, ap)
                        .max(self.chan_cfg.reference_distance_m);
                    let cross = {
                        let rng = &mut self.link_rngs[tx];
                        sample_link(rng, d_other, &self.chan_cfg)?
                    };
                    interferers
                        .push(received_power_dbm(ptx_dbm[other], &cross) + 10.0 * frac.log10());
                }
            }
            let sinr = sinr_db(rx_power_dbm, &interferers, self.chan_cfg.noise_power_dbm);
            let success = attempt_outcome(sinr, m, &self.phy.table)?;
            let attempted = throughput_bps(m, true, &self.phy.table, &self.allocations[tx])?;
            let throughput = if success { attempted } else { 0.0 };
            let delivered_bits = throughput * self.tau_s;
            let efficiency = energy_efficiency_bits_per_mj(delivered_bits, p_dbm, self.tau_s);
            let energy_mj = step_energy_mj(p_dbm, self.tau_s);
            let reward =
                local_reward(success, throughput, efficiency, attempted, &self.weights, &self.norms);
            locals.push(reward);
            per_tx.push(TxOutcome {
                mcs: m,
                power_level: k,
                power_dbm: p_dbm,
                prbs: self.allocations[tx].prbs,
                sinr_db: sinr,
                rx_power_dbm,
                success,
                throughput_bps: throughput,
                attempted_throughput_bps: attempted,
                delivered_bits,
                efficiency_bits_per_mj: efficiency,
                energy_mj,
                local_reward: reward,
            });
        }

        for tx in 0..n {
            self.trace.record_decision(step, tx, self.topo.serving_ec(tx));
        }
        for tx in 0..n {
            let ap = self.topo.serving_ap(tx);
            self.trace.record_downlink(step, tx, ap, self.topo.ec_of_ap[ap]);
        }

        let global = global_reward(&locals)?;
        let constraints = constraint_report(&per_tx, &self.thresholds);
        let next_states = per_tx.iter().map(|o| build_state(o, &self.norms)).collect();

        self.topo = advance_mobility(&self.topo, &self.topo_cfg, &mut self.mobility_rng);

        Ok((
            StepOutcome { step, per_tx, global_reward: global, constraints },
            next_states,
        ))
    }

    /// Closed-form SINR of one transmitter against its serving AP with all
    /// random terms disabled; used to cross-check deterministic runs.
    pub fn deterministic_link_budget_db(&self, tx: usize, p_dbm: f64) -> Result<f64, EnvError> {
        let d = self.topo.serving_distance(tx).max(self.chan_cfg.reference_distance_m);
        let pl = path_loss_db(d, &self.chan_cfg)?;
        Ok(p_dbm + pl - self.chan_cfg.noise_power_dbm)
    }
}
