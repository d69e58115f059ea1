//! Learning agents: dueling double-Q updates over prioritized replay with
//! momentum gradient descent.
//!
//! Each transmitter owns one [`Agent`]. Per decision the agent picks a joint
//! modulation/power action epsilon-greedily from its online network; every
//! `update_period` environment steps it samples a prioritized batch, forms
//! double-Q targets (online argmax, target evaluation), and takes one
//! momentum step. The target network is refreshed every
//! `target_sync_period` gradient updates. The task is continuing, so TD
//! targets carry no terminal mask.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{ActionIndex, AgentState, NUM_ACTIONS};
use crate::replay::{PerBuffer, PerConfig, ReplayError, Transition};
use crate::seeding::{stream_rng, STREAM_AGENT_BASE};

pub mod checkpoint;
mod net;

pub use net::{batch_loss_grad, mgd_update, MomentumState, NetLayout, QNetParams};

#[derive(Debug, Error)]
pub enum DrlError {
    #[error("parameter shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("{key}: {message}")]
    InvalidConfig { key: &'static str, message: String },
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

/// Learning hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrlHyper {
    /// Step size of the momentum update.
    pub learning_rate: f64,
    /// Discount factor of the TD target.
    pub gamma: f64,
    /// Momentum decay.
    pub momentum: f64,
    /// Initial exploration rate.
    pub epsilon_init: f64,
    /// Multiplicative decay applied after every action selection.
    pub epsilon_decay: f64,
    /// Exploration floor.
    pub epsilon_min: f64,
    /// Gradient updates between target-network refreshes.
    pub target_sync_period: u64,
    /// Replay batch size.
    pub batch_size: usize,
    /// Environment steps between gradient updates.
    pub update_period: u64,
}

impl Default for DrlHyper {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            gamma: 0.995,
            momentum: 0.9,
            epsilon_init: 1.0,
            epsilon_decay: 0.9995,
            epsilon_min: 0.1,
            target_sync_period: 200,
            batch_size: 32,
            update_period: 50,
        }
    }
}

impl DrlHyper {
    pub fn validate(&self) -> Result<(), DrlError> {
        let bad = |key, message: String| Err(DrlError::InvalidConfig { key, message });
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("drl.learning_rate", format!("must be positive, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("drl.gamma", format!("must lie in [0, 1), got {}", self.gamma));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("drl.momentum", format!("must lie in [0, 1), got {}", self.momentum));
        }
        if !(0.0..=1.0).contains(&self.epsilon_init) {
            return bad("drl.epsilon_init", format!("must lie in [0, 1], got {}", self.epsilon_init));
        }
        if !(0.0..=1.0).contains(&self.epsilon_decay) {
            return bad("drl.epsilon_decay", format!("must lie in [0, 1], got {}", self.epsilon_decay));
        }
        if !(0.0..=1.0).contains(&self.epsilon_min) || self.epsilon_min > self.epsilon_init {
            return bad(
                "drl.epsilon_min",
                format!("must lie in [0, epsilon_init], got {}", self.epsilon_min),
            );
        }
        if self.target_sync_period == 0 {
            return bad("drl.target_sync_period", "must be at least 1".into());
        }
        if self.batch_size == 0 {
            return bad("drl.batch_size", "must be at least 1".into());
        }
        if self.update_period == 0 {
            return bad("drl.update_period", "must be at least 1".into());
        }
        Ok(())
    }
}

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy selector with multiplicative decay and a floor.
///
/// Decay applies after every selection, so exploration shrinks with actions
/// taken, not with gradient updates.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonGreedy {
    epsilon: f64,
    decay: f64,
    floor: f64,
}

impl EpsilonGreedy {
    pub fn new(epsilon: f64, decay: f64, floor: f64) -> Self {
        Self { epsilon, decay, floor }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn select(&mut self, q: &[f64], rng: &mut impl Rng) -> usize {
        let action = if rng.gen::<f64>() < self.epsilon {
            rng.gen_range(0..q.len())
        } else {
            argmax(q)
        };
        self.epsilon = (self.epsilon * self.decay).max(self.floor);
        action
    }
}

/// Double-Q targets: `y = r + gamma * Q_target(s', argmax_a Q_online(s', a))`.
pub fn td_targets_raw(
    online: &QNetParams,
    target: &QNetParams,
    rewards: &[f64],
    next_states: &[&[f64]],
    gamma: f64,
) -> Vec<f64> {
    rewards
        .iter()
        .zip(next_states)
        .map(|(&r, s)| {
            let best = argmax(&online.forward(s));
            r + gamma * target.forward(s)[best]
        })
        .collect()
}

pub fn td_targets(
    online: &QNetParams,
    target: &QNetParams,
    batch: &[Transition],
    gamma: f64,
) -> Vec<f64> {
    let feats: Vec<[f64; 6]> = batch.iter().map(|t| t.next_state.features()).collect();
    let refs: Vec<&[f64]> = feats.iter().map(|f| f.as_slice()).collect();
    let rewards: Vec<f64> = batch.iter().map(|t| t.reward).collect();
    td_targets_raw(online, target, &rewards, &refs, gamma)
}

/// One transmitter's learner: online/target networks, momentum, exploration
/// schedule, and a private replay buffer and RNG stream.
#[derive(Debug, Clone)]
pub struct Agent {
    id: usize,
    params: QNetParams,
    target: QNetParams,
    momentum: MomentumState,
    policy: EpsilonGreedy,
    buffer: PerBuffer,
    hyper: DrlHyper,
    rng: ChaCha8Rng,
    state: AgentState,
    pending_action: Option<ActionIndex>,
    update_count: u64,
    sync_points: Vec<u64>,
}

impl Agent {
    pub fn new(
        id: usize,
        init: &QNetParams,
        hyper: DrlHyper,
        per: PerConfig,
        seed: u64,
    ) -> Result<Self, DrlError> {
        hyper.validate()?;
        Ok(Self {
            id,
            params: init.clone(),
            target: init.clone(),
            momentum: MomentumState::zeros(init.layout()),
            policy: EpsilonGreedy::new(hyper.epsilon_init, hyper.epsilon_decay, hyper.epsilon_min),
            buffer: PerBuffer::new(per)?,
            hyper,
            rng: stream_rng(seed, STREAM_AGENT_BASE + id as u64),
            state: AgentState::default(),
            pending_action: None,
            update_count: 0,
            sync_points: Vec::new(),
        })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn epsilon(&self) -> f64 {
        self.policy.epsilon()
    }

    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    /// Gradient-update counts at which the target network was refreshed.
    pub fn sync_points(&self) -> &[u64] {
        &self.sync_points
    }

    pub fn buffer_len(&self) -> usize {
        self.buffer.len()
    }

    pub fn replay_config(&self) -> &PerConfig {
        self.buffer.config()
    }

    pub fn hyper(&self) -> &DrlHyper {
        &self.hyper
    }

    pub fn params(&self) -> &QNetParams {
        &self.params
    }

    pub fn momentum(&self) -> &MomentumState {
        &self.momentum
    }

    pub fn set_params(&mut self, params: QNetParams) {
        self.params = params;
    }

    pub fn set_momentum(&mut self, momentum: MomentumState) {
        self.momentum = momentum;
    }

    /// Resets the observed state for a fresh training round. Exploration and
    /// replay memory persist across rounds.
    pub fn begin_round(&mut self) {
        self.state = AgentState::default();
        self.pending_action = None;
    }

    /// Epsilon-greedy action from the online network for the current state.
    pub fn choose_learned(&mut self) -> ActionIndex {
        let a = self.policy.select(&self.params.forward(&self.state.features()), &mut self.rng);
        let action = ActionIndex::new(a).expect("network output size matches action space");
        self.pending_action = Some(action);
        action
    }

    /// Uniform random action; the non-learning baseline policy.
    pub fn choose_random(&mut self) -> ActionIndex {
        let a = self.rng.gen_range(0..NUM_ACTIONS);
        let action = ActionIndex::new(a).expect("sampled inside the action space");
        self.pending_action = Some(action);
        action
    }

    /// Stores the transition for the pending action and advances the state.
    pub fn observe(&mut self, reward: f64, next_state: AgentState) {
        if let Some(action) = self.pending_action.take() {
            self.buffer.push(Transition { state: self.state, action, reward, next_state });
        }
        self.state = next_state;
    }

    /// One gradient update from a prioritized batch, if the buffer holds
    /// enough samples. Returns whether an update ran.
    pub fn learn(&mut self, beta: f64) -> Result<bool, DrlError> {
        if self.buffer.len() < self.hyper.batch_size {
            return Ok(false);
        }
        let batch = self.buffer.sample(self.hyper.batch_size, beta, &mut self.rng)?;
        let targets = td_targets(&self.params, &self.target, &batch.transitions, self.hyper.gamma);
        let feats: Vec<[f64; 6]> = batch.transitions.iter().map(|t| t.state.features()).collect();
        let states: Vec<&[f64]> = feats.iter().map(|f| f.as_slice()).collect();
        let actions: Vec<usize> =
            batch.transitions.iter().map(|t| t.action.index() as usize).collect();
        let (loss, grad, td_abs) =
            batch_loss_grad(&self.params, &states, &actions, &targets, &batch.weights);
        log::trace!("agent {} update {}: loss {loss:.6}", self.id, self.update_count + 1);
        mgd_update(
            &mut self.params,
            &mut self.momentum,
            &grad,
            self.hyper.momentum,
            self.hyper.learning_rate,
        )?;
        self.buffer.update_priorities(&batch.handles, &td_abs)?;
        self.update_count += 1;
        if self.update_count % self.hyper.target_sync_period == 0 {
            self.target = self.params.clone();
            self.sync_points.push(self.update_count);
        }
        Ok(true)
    }
}
