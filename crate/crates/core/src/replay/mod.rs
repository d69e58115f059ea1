//! Prioritized experience replay over a ring buffer.
//!
//! Proportional variant: transition i is sampled with probability
//! `p_i^alpha / sum_j p_j^alpha` where `p_i = |td_i| + epsilon`. New
//! transitions enter at the running maximum priority so they are replayed at
//! least once. Sampling is stratified over equal prefix-sum segments, and the
//! importance weights `(N * P(i))^-beta` are normalized by the batch maximum.

mod sum_tree;

pub use sum_tree::SumTree;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{ActionIndex, AgentState};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("replay.{key}: {message}")]
    InvalidConfig { key: &'static str, message: String },
    #[error("buffer holds {len} transitions, need {need} to sample")]
    NotEnoughSamples { len: usize, need: usize },
    #[error("priority update needs one td value per handle")]
    LengthMismatch,
}

fn invalid(key: &'static str, message: impl Into<String>) -> ReplayError {
    ReplayError::InvalidConfig { key, message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerConfig {
    pub capacity: usize,
    /// Priority exponent; 0 recovers uniform sampling.
    pub alpha: f64,
    /// Importance-weight exponent at the start of training.
    pub beta_init: f64,
    /// Importance-weight exponent at the end of training.
    pub beta_final: f64,
    /// Additive floor keeping every priority positive.
    pub epsilon: f64,
}

impl Default for PerConfig {
    fn default() -> Self {
        Self { capacity: 4000, alpha: 0.6, beta_init: 0.4, beta_final: 1.0, epsilon: 1e-3 }
    }
}

impl PerConfig {
    pub fn validate(&self) -> Result<(), ReplayError> {
        if self.capacity == 0 {
            return Err(invalid("capacity", "must be at least 1"));
        }
        if !(self.alpha >= 0.0) {
            return Err(invalid("alpha", "must be non-negative"));
        }
        if !(self.beta_init >= 0.0 && self.beta_final >= self.beta_init) {
            return Err(invalid("beta_final", "need 0 <= beta_init <= beta_final"));
        }
        if !(self.epsilon > 0.0) {
            return Err(invalid("epsilon", "must be positive"));
        }
        Ok(())
    }

    /// Linear anneal of beta over the training horizon.
    pub fn beta_at(&self, step: u64, total_steps: u64) -> f64 {
        if total_steps == 0 {
            return self.beta_final;
        }
        let progress = (step as f64 / total_steps as f64).min(1.0);
        self.beta_init + (self.beta_final - self.beta_init) * progress
    }
}

/// One stored interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: AgentState,
    pub action: ActionIndex,
    pub reward: f64,
    pub next_state: AgentState,
}

/// Identifies a sampled slot plus the insertion it referred to, so priority
/// updates for transitions that were overwritten in the meantime can be
/// dropped instead of corrupting an unrelated entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleHandle {
    pub slot: usize,
    pub insert_id: u64,
}

#[derive(Debug, Clone)]
pub struct SampledBatch {
    pub transitions: Vec<Transition>,
    pub handles: Vec<SampleHandle>,
    /// Importance weights, each in (0, 1].
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Slot {
    transition: Transition,
    insert_id: u64,
}

#[derive(Debug, Clone)]
pub struct PerBuffer {
    cfg: PerConfig,
    slots: Vec<Option<Slot>>,
    tree: SumTree,
    next_slot: usize,
    len: usize,
    insert_counter: u64,
    /// Running maximum raw priority; assigned to fresh transitions.
    max_priority: f64,
    stale_updates: u64,
}

impl PerBuffer {
    pub fn new(cfg: PerConfig) -> Result<Self, ReplayError> {
        cfg.validate()?;
        Ok(Self {
            tree: SumTree::new(cfg.capacity),
            slots: vec![None; cfg.capacity],
            cfg,
            next_slot: 0,
            len: 0,
            insert_counter: 0,
            max_priority: 1.0,
            stale_updates: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.cfg.capacity
    }

    pub fn config(&self) -> &PerConfig {
        &self.cfg
    }

    /// Number of ignored priority updates whose slot had been overwritten.
    pub fn stale_update_count(&self) -> u64 {
        self.stale_updates
    }

    /// Incrementally maintained total sampling weight.
    pub fn tree_total(&self) -> f64 {
        self.tree.total()
    }

    /// Linear-scan total; oracle counterpart of `tree_total`.
    pub fn leaf_sum(&self) -> f64 {
        self.tree.leaf_sum()
    }

    /// Current handle of a slot; what `sample` would return for it.
    pub fn handle_for_slot(&self, slot: usize) -> Option<SampleHandle> {
        self.slots[slot].as_ref().map(|s| SampleHandle { slot, insert_id: s.insert_id })
    }

    /// Inserts at the running maximum priority, overwriting the oldest
    /// transition once the ring is full.
    pub fn push(&mut self, transition: Transition) {
        let slot = self.next_slot;
        self.slots[slot] = Some(Slot { transition, insert_id: self.insert_counter });
        self.insert_counter += 1;
        self.tree.set(slot, self.max_priority.powf(self.cfg.alpha));
        self.next_slot = (self.next_slot + 1) % self.cfg.capacity;
        self.len = (self.len + 1).min(self.cfg.capacity);
    }

    /// Stratified proportional sample of `batch` transitions with
    /// importance weights at the given beta. Refuses when fewer than `batch`
    /// transitions are stored.
    pub fn sample(
        &self,
        batch: usize,
        beta: f64,
        rng: &mut impl Rng,
    ) -> Result<SampledBatch, ReplayError> {
        if self.len < batch || batch == 0 {
            return Err(ReplayError::NotEnoughSamples { len: self.len, need: batch.max(1) });
        }
        let total = self.tree.total();
        let segment = total / batch as f64;
        let mut transitions = Vec::with_capacity(batch);
        let mut handles = Vec::with_capacity(batch);
        let mut raw_weights = Vec::with_capacity(batch);
        for i in 0..batch {
            let lo = segment * i as f64;
            let prefix = lo + rng.gen::<f64>() * segment;
            let slot = self.tree.find(prefix);
            let stored = self.slots[slot].as_ref().expect("sampled slot is occupied");
            let prob = self.tree.get(slot) / total;
            raw_weights.push((self.len as f64 * prob).powf(-beta));
            transitions.push(stored.transition);
            handles.push(SampleHandle { slot, insert_id: stored.insert_id });
        }
        let max_w = raw_weights.iter().cloned().fold(f64::MIN, f64::max);
        let weights = raw_weights.iter().map(|w| w / max_w).collect();
        Ok(SampledBatch { transitions, handles, weights })
    }

    /// Reassigns priorities `|td| + epsilon` for the sampled transitions.
    /// Handles whose slot was overwritten since sampling are counted and
    /// skipped.
    pub fn update_priorities(
        &mut self,
        handles: &[SampleHandle],
        td_abs: &[f64],
    ) -> Result<(), ReplayError> {
        if handles.len() != td_abs.len() {
            return Err(ReplayError::LengthMismatch);
        }
        for (h, td) in handles.iter().zip(td_abs) {
            let live = match &self.slots[h.slot] {
                Some(slot) => slot.insert_id == h.insert_id,
                None => false,
            };
            if !live {
                self.stale_updates += 1;
                continue;
            }
            let priority = td.abs() + self.cfg.epsilon;
            self.tree.set(h.slot, priority.powf(self.cfg.alpha));
            if priority > self.max_priority {
                self.max_priority = priority;
            }
        }
        Ok(())
    }
}
