//! Dueling Q-network over a flat f64 parameter vector.
//!
//! Architecture: two tanh trunk layers feeding a scalar value head and a
//! per-action advantage head, combined as
//! `Q(s, a) = V(s) + A(s, a) - mean_a' A(s, a')`.
//! All parameters live in one contiguous vector with a fixed layout so that
//! federation, momentum updates, and checkpoints can treat the model as a
//! plain numeric array. Forward and backward passes are written out long-hand
//! against that layout.

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DrlError;

/// Shape descriptor of the network; fixes the flat parameter layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetLayout {
    pub input: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub actions: usize,
}

/// Byte offsets of each block in the flat vector, in layout order:
/// trunk weights/biases, value head, advantage head.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Offsets {
    pub w1: usize,
    pub b1: usize,
    pub w2: usize,
    pub b2: usize,
    pub wv: usize,
    pub bv: usize,
    pub wa: usize,
    pub ba: usize,
    pub total: usize,
}

impl NetLayout {
    /// The agent network: 6 observation features, two 32-unit tanh layers,
    /// one value output and 174 advantage outputs.
    pub fn d3qn() -> Self {
        Self {
            input: crate::env::STATE_DIM,
            hidden1: 32,
            hidden2: 32,
            actions: crate::env::NUM_ACTIONS,
        }
    }

    pub(crate) fn offsets(&self) -> Offsets {
        let w1 = 0;
        let b1 = w1 + self.input * self.hidden1;
        let w2 = b1 + self.hidden1;
        let b2 = w2 + self.hidden1 * self.hidden2;
        let wv = b2 + self.hidden2;
        let bv = wv + self.hidden2;
        let wa = bv + 1;
        let ba = wa + self.hidden2 * self.actions;
        let total = ba + self.actions;
        Offsets { w1, b1, w2, b2, wv, bv, wa, ba, total }
    }

    pub fn param_count(&self) -> usize {
        self.offsets().total
    }
}

/// Model parameters: a layout plus the flat value vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetParams {
    layout: NetLayout,
    values: Vec<f64>,
}

/// Momentum accumulator; same shape as the parameters it drives.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState {
    values: Vec<f64>,
}

impl MomentumState {
    pub fn zeros(layout: NetLayout) -> Self {
        Self { values: vec![0.0; layout.param_count()] }
    }

    pub fn from_vec(layout: NetLayout, values: Vec<f64>) -> Result<Self, DrlError> {
        if values.len() != layout.param_count() {
            return Err(DrlError::ShapeMismatch {
                expected: layout.param_count(),
                got: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

struct ForwardCache {
    h1: Vec<f64>,
    h2: Vec<f64>,
    adv: Vec<f64>,
    value: f64,
    q: Vec<f64>,
}

impl QNetParams {
    pub fn zeros(layout: NetLayout) -> Self {
        Self { layout, values: vec![0.0; layout.param_count()] }
    }

    pub fn from_vec(layout: NetLayout, values: Vec<f64>) -> Result<Self, DrlError> {
        if values.len() != layout.param_count() {
            return Err(DrlError::ShapeMismatch {
                expected: layout.param_count(),
                got: values.len(),
            });
        }
        Ok(Self { layout, values })
    }

    /// Glorot-uniform weights (bound `sqrt(6 / (fan_in + fan_out))` per
    /// layer), zero biases.
    pub fn glorot(layout: NetLayout, rng: &mut impl Rng) -> Self {
        let o = layout.offsets();
        let mut values = vec![0.0; o.total];
        let fill = |range: std::ops::Range<usize>, fan_in: usize, fan_out: usize,
                    values: &mut Vec<f64>,
                    rng: &mut dyn rand::RngCore| {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound);
            for v in &mut values[range] {
                *v = dist.sample(rng);
            }
        };
        fill(o.w1..o.b1, layout.input, layout.hidden1, &mut values, rng);
        fill(o.w2..o.b2, layout.hidden1, layout.hidden2, &mut values, rng);
        fill(o.wv..o.bv, layout.hidden2, 1, &mut values, rng);
        fill(o.wa..o.ba, layout.hidden2, layout.actions, &mut values, rng);
        Self { layout, values }
    }

    pub fn layout(&self) -> NetLayout {
        self.layout
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn forward_cached(&self, x: &[f64]) -> ForwardCache {
        let l = self.layout;
        debug_assert_eq!(x.len(), l.input);
        let o = l.offsets();
        let v = &self.values;

        let mut h1 = vec![0.0; l.hidden1];
        for (j, h) in h1.iter_mut().enumerate() {
            let mut acc = v[o.b1 + j];
            for (i, xi) in x.iter().enumerate() {
                acc += xi * v[o.w1 + i * l.hidden1 + j];
            }
            *h = acc.tanh();
        }

        let mut h2 = vec![0.0; l.hidden2];
        for (j, h) in h2.iter_mut().enumerate() {
            let mut acc = v[o.b2 + j];
            for (i, hi) in h1.iter().enumerate() {
                acc += hi * v[o.w2 + i * l.hidden2 + j];
            }
            *h = acc.tanh();
        }

        let mut value = v[o.bv];
        for (i, hi) in h2.iter().enumerate() {
            value += hi * v[o.wv + i];
        }

        let mut adv = vec![0.0; l.actions];
        for (j, a) in adv.iter_mut().enumerate() {
            let mut acc = v[o.ba + j];
            for (i, hi) in h2.iter().enumerate() {
                acc += hi * v[o.wa + i * l.actions + j];
            }
            *a = acc;
        }
        let adv_mean = adv.iter().sum::<f64>() / l.actions as f64;
        let q = adv.iter().map(|a| value + a - adv_mean).collect();
        ForwardCache { h1, h2, adv, value, q }
    }

    /// Q-values for one observation.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_cached(x).q
    }

    /// Value and raw advantage outputs; exposes the dueling decomposition.
    pub fn value_and_advantages(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let c = self.forward_cached(x);
        (c.value, c.adv)
    }
}

/// Weighted TD loss and its gradient over a batch.
///
/// `L = (1/B) * sum_i w_i * (y_i - Q(s_i, a_i))^2`; returns the loss, the
/// flat gradient, and per-sample absolute TD errors for priority updates.
pub fn batch_loss_grad(
    params: &QNetParams,
    states: &[&[f64]],
    actions: &[usize],
    targets: &[f64],
    weights: &[f64],
) -> (f64, Vec<f64>, Vec<f64>) {
    let l = params.layout;
    let o = l.offsets();
    let v = &params.values;
    let batch = states.len();
    assert!(batch > 0, "empty batch");
    assert_eq!(actions.len(), batch);
    assert_eq!(targets.len(), batch);
    assert_eq!(weights.len(), batch);

    let mut loss = 0.0;
    let mut grad = vec![0.0; o.total];
    let mut td_abs = Vec::with_capacity(batch);
    let inv_a = 1.0 / l.actions as f64;

    for ((x, (&a, &y)), &w) in
        states.iter().zip(actions.iter().zip(targets.iter())).zip(weights.iter())
    {
        let cache = params.forward_cached(x);
        let td = y - cache.q[a];
        loss += w * td * td / batch as f64;
        td_abs.push(td.abs());

        // dL/dQ(s, a) for this sample.
        let g = -2.0 * w * td / batch as f64;

        // Value head.
        grad[o.bv] += g;
        for (i, hi) in cache.h2.iter().enumerate() {
            grad[o.wv + i] += g * hi;
        }

        // Advantage head: dQ/dA_j = [j == a] - 1/|A|.
        for j in 0..l.actions {
            let coeff = if j == a { 1.0 - inv_a } else { -inv_a };
            grad[o.ba + j] += g * coeff;
            let gj = g * coeff;
            for (i, hi) in cache.h2.iter().enumerate() {
                grad[o.wa + i * l.actions + j] += gj * hi;
            }
        }

        // Into the second trunk layer.
        let mut dpre2 = vec![0.0; l.hidden2];
        for i in 0..l.hidden2 {
            let mut row_mean = 0.0;
            for j in 0..l.actions {
                row_mean += v[o.wa + i * l.actions + j];
            }
            row_mean *= inv_a;
            let dh2 = g * (v[o.wv + i] + v[o.wa + i * l.actions + a] - row_mean);
            dpre2[i] = dh2 * (1.0 - cache.h2[i] * cache.h2[i]);
            grad[o.b2 + i] += dpre2[i];
        }
        for (i, hi) in cache.h1.iter().enumerate() {
            for (j, dj) in dpre2.iter().enumerate() {
                grad[o.w2 + i * l.hidden2 + j] += hi * dj;
            }
        }

        // Into the first trunk layer.
        let mut dpre1 = vec![0.0; l.hidden1];
        for i in 0..l.hidden1 {
            let mut dh1 = 0.0;
            for (j, dj) in dpre2.iter().enumerate() {
                dh1 += v[o.w2 + i * l.hidden2 + j] * dj;
            }
            dpre1[i] = dh1 * (1.0 - cache.h1[i] * cache.h1[i]);
            grad[o.b1 + i] += dpre1[i];
        }
        for (i, xi) in x.iter().enumerate() {
            for (j, dj) in dpre1.iter().enumerate() {
                grad[o.w1 + i * l.hidden1 + j] += xi * dj;
            }
        }
    }

    (loss, grad, td_abs)
}

/// Momentum gradient step:
/// `m <- eta * m + g` then `theta <- theta - alpha * m`.
pub fn mgd_update(
    params: &mut QNetParams,
    momentum: &mut MomentumState,
    grad: &[f64],
    eta: f64,
    alpha: f64,
) -> Result<(), DrlError> {
    let n = params.values.len();
    if momentum.values.len() != n || grad.len() != n {
        return Err(DrlError::ShapeMismatch { expected: n, got: grad.len() });
    }
    for ((p, m), g) in params.values.iter_mut().zip(&mut momentum.values).zip(grad) {
        *m = eta * *m + g;
        *p -= alpha * *m;
    }
    Ok(())
}
