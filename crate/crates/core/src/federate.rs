//! Federated training orchestration.
//!
//! A [`Federation`] owns the environment and one agent per transmitter and
//! drives the round cycle: broadcast the global model, run a round of
//! environment steps with per-step experience collection and periodic
//! gradient updates, then average every agent's parameters and momentum
//! back into the global model. The independent baseline skips broadcast and
//! aggregation entirely; the random baseline never learns. Aggregation and
//! broadcast are pure parameter arithmetic and consume no randomness, so a
//! one-agent federation reproduces independent training bit for bit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::RunConfig;
use crate::drl::checkpoint::Checkpoint;
use crate::drl::{Agent, DrlError, MomentumState, NetLayout, QNetParams};
use crate::env::{ActionIndex, Env, EnvError, PhyProfile, SignalingTrace};
use crate::phy::PhyError;
use crate::seeding::{stream_rng, STREAM_MODEL_INIT};

#[derive(Debug, Error)]
pub enum FederateError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Drl(#[from] DrlError),
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error("federation has no agents")]
    Empty,
    #[error("agent {index} parameter vector has {got} values, expected {expected}")]
    ShapeMismatch { index: usize, expected: usize, got: usize },
    #[error("unknown run mode {0:?}; expected feddrl, idrl, or ra")]
    UnknownMode(String),
}

/// Training regime selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    /// Federated learners with periodic parameter averaging.
    FedDrl,
    /// Identical learners without any parameter exchange.
    Idrl,
    /// Uniform random action selection, no learning.
    Ra,
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RunMode::FedDrl => "feddrl",
            RunMode::Idrl => "idrl",
            RunMode::Ra => "ra",
        };
        f.write_str(s)
    }
}

impl FromStr for RunMode {
    type Err = FederateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "feddrl" => Ok(RunMode::FedDrl),
            "idrl" => Ok(RunMode::Idrl),
            "ra" => Ok(RunMode::Ra),
            other => Err(FederateError::UnknownMode(other.to_string())),
        }
    }
}

/// The shared model: parameters, momentum, and the round that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalModel {
    pub params: QNetParams,
    pub momentum: MomentumState,
    pub round: u64,
}

impl GlobalModel {
    /// Initial global model for a run; every mode starts from this point so
    /// that learning-rule differences, not initialization, drive any gap.
    pub fn init(layout: NetLayout, seed: u64) -> Self {
        let mut rng = stream_rng(seed, STREAM_MODEL_INIT);
        Self {
            params: QNetParams::glorot(layout, &mut rng),
            momentum: MomentumState::zeros(layout),
            round: 0,
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint::new(&self.params, &self.momentum, self.round)
    }
}

/// Uniform elementwise average of parameters and momentum across agents.
pub fn aggregate(
    params: &[&QNetParams],
    momenta: &[&MomentumState],
) -> Result<(QNetParams, MomentumState), FederateError> {
    if params.is_empty() || params.len() != momenta.len() {
        return Err(FederateError::Empty);
    }
    let layout = params[0].layout();
    let n = layout.param_count();
    let scale = 1.0 / params.len() as f64;

    let mut theta = vec![0.0; n];
    let mut omega = vec![0.0; n];
    for (index, (p, m)) in params.iter().zip(momenta.iter()).enumerate() {
        if p.as_slice().len() != n || m.as_slice().len() != n {
            return Err(FederateError::ShapeMismatch {
                index,
                expected: n,
                got: p.as_slice().len(),
            });
        }
        for (acc, v) in theta.iter_mut().zip(p.as_slice()) {
            *acc += v * scale;
        }
        for (acc, v) in omega.iter_mut().zip(m.as_slice()) {
            *acc += v * scale;
        }
    }
    let params = QNetParams::from_vec(layout, theta)?;
    let momentum = MomentumState::from_vec(layout, omega)?;
    Ok((params, momentum))
}

/// Installs the global model into every agent and records the control-plane
/// push. Exploration schedules and replay memories are deliberately left
/// untouched; only parameters and momentum move.
pub fn broadcast(global: &GlobalModel, agents: &mut [Agent], trace: &mut SignalingTrace, step: u64) {
    for agent in agents.iter_mut() {
        agent.set_params(global.params.clone());
        agent.set_momentum(global.momentum.clone());
        trace.record_a1_broadcast(step, agent.id());
    }
}

/// Per-round aggregate metrics, one CSV row per report.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub round: u32,
    pub step_span: u32,
    /// Mean over the round of the per-step sum of delivered rates.
    pub system_throughput_bps: f64,
    /// Sum of the shared reward over the round.
    pub cum_reward: f64,
    /// Mean transmit energy per transmitter per step.
    pub avg_energy_mj: f64,
    /// Mean energy efficiency per transmitter per step.
    pub avg_eff_bits_per_mj: f64,
    /// Count of minimum-throughput violations over the round.
    pub c1: u64,
    /// Count of minimum-SINR violations over the round.
    pub c3: u64,
}

/// Global step counter shared across rounds; drives the annealing schedule
/// of the importance-sampling exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainingClock {
    pub global_step: u64,
    pub total_steps: u64,
}

/// Runs one training round: reset observations, then for each step select a
/// joint action, apply it, store the shared reward, and fire gradient
/// updates on the configured cadence.
pub fn run_round(
    env: &mut Env,
    agents: &mut [Agent],
    mode: RunMode,
    round: u32,
    steps: u32,
    clock: &mut TrainingClock,
) -> Result<RoundReport, FederateError> {
    if agents.is_empty() {
        return Err(FederateError::Empty);
    }
    let n = agents.len();
    let update_period = match mode {
        RunMode::Ra => 0,
        _ => {
            let h = agents[0].hyper();
            h.update_period
        }
    };

    for agent in agents.iter_mut() {
        agent.begin_round();
    }

    let mut throughput_sum = 0.0;
    let mut cum_reward = 0.0;
    let mut energy_sum = 0.0;
    let mut efficiency_sum = 0.0;
    let mut c1 = 0u64;
    let mut c3 = 0u64;

    for t in 1..=u64::from(steps) {
        let actions: Vec<ActionIndex> = agents
            .iter_mut()
            .map(|a| match mode {
                RunMode::Ra => a.choose_random(),
                _ => a.choose_learned(),
            })
            .collect();
        let (outcome, next_states) = env.step(&actions)?;
        for (agent, next) in agents.iter_mut().zip(next_states) {
            agent.observe(outcome.global_reward, next);
        }
        clock.global_step += 1;

        if update_period != 0 && t % update_period == 0 {
            let beta = agents[0]
                .replay_config()
                .beta_at(clock.global_step, clock.total_steps);
            for agent in agents.iter_mut() {
                agent.learn(beta)?;
            }
        }

        throughput_sum += outcome.per_tx.iter().map(|o| o.throughput_bps).sum::<f64>();
        cum_reward += outcome.global_reward;
        energy_sum += outcome.per_tx.iter().map(|o| o.energy_mj).sum::<f64>();
        efficiency_sum +=
            outcome.per_tx.iter().map(|o| o.efficiency_bits_per_mj).sum::<f64>();
        c1 += u64::from(outcome.constraints.c1_throughput);
        c3 += u64::from(outcome.constraints.c3_sinr);
    }

    let steps_f = f64::from(steps);
    Ok(RoundReport {
        round,
        step_span: steps,
        system_throughput_bps: throughput_sum / steps_f,
        cum_reward,
        avg_energy_mj: energy_sum / (steps_f * n as f64),
        avg_eff_bits_per_mj: efficiency_sum / (steps_f * n as f64),
        c1,
        c3,
    })
}

/// One complete training configuration: environment, agents, global model.
#[derive(Debug)]
pub struct Federation {
    env: Env,
    agents: Vec<Agent>,
    global: GlobalModel,
    mode: RunMode,
    steps_per_round: u32,
    next_round: u32,
    clock: TrainingClock,
}

impl Federation {
    pub fn new(
        cfg: &RunConfig,
        mode: RunMode,
        seed: u64,
        trace_enabled: bool,
    ) -> Result<Self, FederateError> {
        let table = cfg.phy.load_table()?;
        let phy = PhyProfile {
            table,
            power: cfg.phy.power_set(),
            prbs_per_tx: cfg.phy.prbs_per_tx,
            prb_bandwidth_hz: cfg.phy.prb_bandwidth_hz,
            zeta_max: cfg.phy.zeta_max,
        };
        let env = Env::new(
            cfg.topology.clone(),
            cfg.channel.clone(),
            phy,
            cfg.reward.weights(),
            cfg.reward.t_min_bps,
            cfg.reward.psi_min_db,
            seed,
            trace_enabled,
        )?;

        let global = GlobalModel::init(NetLayout::d3qn(), seed);
        let hyper = cfg.drl.hyper();
        let per = cfg.drl.per_config();
        let agents = (0..env.num_transmitters())
            .map(|i| Agent::new(i, &global.params, hyper, per.clone(), seed))
            .collect::<Result<Vec<_>, _>>()?;

        let total_steps =
            u64::from(cfg.federate.rounds) * u64::from(cfg.federate.steps_per_round);
        Ok(Self {
            env,
            agents,
            global,
            mode,
            steps_per_round: cfg.federate.steps_per_round,
            next_round: 1,
            clock: TrainingClock { global_step: 0, total_steps },
        })
    }

    pub fn mode(&self) -> RunMode {
        self.mode
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn global_model(&self) -> &GlobalModel {
        &self.global
    }

    pub fn next_round(&self) -> u32 {
        self.next_round
    }

    /// Broadcast (federated mode), one round of steps, aggregate (federated
    /// mode). Returns the round's metrics.
    pub fn run_round_cycle(&mut self) -> Result<RoundReport, FederateError> {
        let round = self.next_round;
        if self.mode == RunMode::FedDrl {
            let upcoming = self.env.current_step() + 1;
            broadcast(&self.global, &mut self.agents, self.env.trace_mut(), upcoming);
        }
        let report = run_round(
            &mut self.env,
            &mut self.agents,
            self.mode,
            round,
            self.steps_per_round,
            &mut self.clock,
        )?;
        if self.mode == RunMode::FedDrl {
            let params: Vec<&QNetParams> = self.agents.iter().map(|a| a.params()).collect();
            let momenta: Vec<&MomentumState> = self.agents.iter().map(|a| a.momentum()).collect();
            let (p, m) = aggregate(&params, &momenta)?;
            self.global = GlobalModel { params: p, momentum: m, round: u64::from(round) };
        }
        self.next_round += 1;
        Ok(report)
    }

    /// Runs a fixed number of steps outside the round cycle; used for trace
    /// capture.
    pub fn run_steps(&mut self, steps: u32) -> Result<RoundReport, FederateError> {
        let round = self.next_round;
        self.next_round += 1;
        run_round(&mut self.env, &mut self.agents, self.mode, round, steps, &mut self.clock)
    }
}

/// Full training run output.
#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub reports: Vec<RoundReport>,
    pub trace: SignalingTrace,
    pub final_model: GlobalModel,
}

/// Trains one (mode, seed) configuration for the configured number of
/// rounds.
pub fn run_training(
    cfg: &RunConfig,
    mode: RunMode,
    seed: u64,
    trace_enabled: bool,
) -> Result<TrainingRun, FederateError> {
    let mut fed = Federation::new(cfg, mode, seed, trace_enabled)?;
    let mut reports = Vec::with_capacity(cfg.federate.rounds as usize);
    for _ in 0..cfg.federate.rounds {
        reports.push(fed.run_round_cycle()?);
    }
    Ok(TrainingRun {
        reports,
        trace: fed.env.trace().clone(),
        final_model: fed.global.clone(),
    })
}
