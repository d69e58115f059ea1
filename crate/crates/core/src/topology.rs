//! Edge-cloud / access-point / transmitter layout and mobility.
//!
//! Access points sit on a fixed square grid, one disk-shaped coverage area
//! each. Transmitters are split as evenly as possible across the APs, placed
//! uniformly inside the disk of their serving AP, and perform a random walk
//! whose displacements are reflected at the coverage boundary. Associations
//! never change during a run.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 3 km/h expressed in metres per second.
pub const SPEED_3_KMH_MPS: f64 = 3.0 / 3.6;

/// A position in the factory plane, metres.
pub type Point = [f64; 2];

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("topology.{key}: {message}")]
    InvalidConfig { key: &'static str, message: String },
}

fn invalid(key: &'static str, message: impl Into<String>) -> TopologyError {
    TopologyError::InvalidConfig { key, message: message.into() }
}

/// Static layout parameters plus the seed used for placement and motion.
///
/// `rng_seed` is overwritten by the harness with the per-run seed; it only
/// matters when the module is driven standalone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyConfig {
    pub num_edge_clouds: usize,
    pub aps_per_ec: usize,
    pub transmitters: usize,
    pub coverage_radius_m: f64,
    pub speed_mps: f64,
    pub step_duration_s: f64,
    pub rng_seed: u64,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            num_edge_clouds: 1,
            aps_per_ec: 4,
            transmitters: 12,
            coverage_radius_m: 100.0,
            speed_mps: SPEED_3_KMH_MPS,
            step_duration_s: 1e-3,
            rng_seed: 0,
        }
    }
}

impl TopologyConfig {
    pub fn num_aps(&self) -> usize {
        self.num_edge_clouds * self.aps_per_ec
    }

    /// Distance travelled by a transmitter in one simulation step.
    pub fn step_displacement_m(&self) -> f64 {
        self.speed_mps * self.step_duration_s
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        if self.num_edge_clouds == 0 {
            return Err(invalid("num_edge_clouds", "must be at least 1"));
        }
        if self.aps_per_ec == 0 {
            return Err(invalid("aps_per_ec", "must be at least 1"));
        }
        if self.transmitters == 0 {
            return Err(invalid("transmitters", "must be at least 1"));
        }
        if !(self.coverage_radius_m > 0.0) {
            return Err(invalid("coverage_radius_m", "must be positive"));
        }
        if !(self.speed_mps >= 0.0) {
            return Err(invalid("speed_mps", "must be non-negative"));
        }
        if !(self.step_duration_s > 0.0) {
            return Err(invalid("step_duration_s", "must be positive"));
        }
        Ok(())
    }
}

/// Immutable snapshot of the network layout at one simulation step.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub ap_positions: Vec<Point>,
    pub tx_positions: Vec<Point>,
    /// Serving AP of each transmitter; fixed for the run.
    pub association: Vec<usize>,
    /// Rank of each transmitter among the transmitters of its serving AP.
    pub ap_rank: Vec<usize>,
    /// Edge cloud that hosts each AP.
    pub ec_of_ap: Vec<usize>,
}

impl Topology {
    pub fn num_aps(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn num_transmitters(&self) -> usize {
        self.tx_positions.len()
    }

    pub fn serving_ap(&self, tx: usize) -> usize {
        self.association[tx]
    }

    pub fn serving_ec(&self, tx: usize) -> usize {
        self.ec_of_ap[self.association[tx]]
    }

    /// Distance from transmitter `tx` to the given AP, metres.
    pub fn distance_to_ap(&self, tx: usize, ap: usize) -> f64 {
        distance(self.tx_positions[tx], self.ap_positions[ap])
    }

    /// Distance from a transmitter to its serving AP, metres.
    pub fn serving_distance(&self, tx: usize) -> f64 {
        self.distance_to_ap(tx, self.serving_ap(tx))
    }

    /// Number of transmitters served by each AP.
    pub fn per_ap_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_aps()];
        for &ap in &self.association {
            counts[ap] += 1;
        }
        counts
    }

    /// Scheduling slot of each transmitter within its serving edge cloud.
    ///
    /// Slots number the transmitters of one edge cloud 0, 1, … in transmitter
    /// order. An edge cloud schedules its transmitters on disjoint resource
    /// blocks (slot-indexed), while the same slots — and hence the same
    /// spectrum — are reused by every other edge cloud.
    pub fn ec_slots(&self) -> Vec<usize> {
        let num_ecs = self.ec_of_ap.iter().map(|&e| e + 1).max().unwrap_or(0);
        let mut next = vec![0usize; num_ecs];
        self.association
            .iter()
            .map(|&ap| {
                let ec = self.ec_of_ap[ap];
                let slot = next[ec];
                next[ec] += 1;
                slot
            })
            .collect()
    }
}

pub fn distance(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Builds the AP grid and the initial transmitter placement.
///
/// APs are laid out row-major on a square-ish grid with `2 * coverage_radius`
/// spacing and grouped contiguously into edge clouds. Transmitter counts per
/// AP differ by at most one.
pub fn build_topology(cfg: &TopologyConfig, rng: &mut impl Rng) -> Result<Topology, TopologyError> {
    cfg.validate()?;
    let num_aps = cfg.num_aps();
    let cols = (num_aps as f64).sqrt().ceil() as usize;
    let spacing = 2.0 * cfg.coverage_radius_m;

    let mut ap_positions = Vec::with_capacity(num_aps);
    let mut ec_of_ap = Vec::with_capacity(num_aps);
    for ap in 0..num_aps {
        let col = ap % cols;
        let row = ap / cols;
        ap_positions.push([col as f64 * spacing, row as f64 * spacing]);
        ec_of_ap.push(ap / cfg.aps_per_ec);
    }

    // Even split: the first `transmitters % num_aps` APs take one extra.
    let base = cfg.transmitters / num_aps;
    let extra = cfg.transmitters % num_aps;
    let mut tx_positions = Vec::with_capacity(cfg.transmitters);
    let mut association = Vec::with_capacity(cfg.transmitters);
    let mut ap_rank = Vec::with_capacity(cfg.transmitters);
    for ap in 0..num_aps {
        let count = base + usize::from(ap < extra);
        for rank in 0..count {
            tx_positions.push(uniform_in_disk(ap_positions[ap], cfg.coverage_radius_m, rng));
            association.push(ap);
            ap_rank.push(rank);
        }
    }

    Ok(Topology { ap_positions, tx_positions, association, ap_rank, ec_of_ap })
}

/// Moves every transmitter by `speed * step_duration` in an independent
/// uniformly random direction, reflecting at the serving coverage boundary.
/// Associations are preserved.
pub fn advance_mobility(topo: &Topology, cfg: &TopologyConfig, rng: &mut impl Rng) -> Topology {
    let step = cfg.step_displacement_m();
    let mut next = topo.clone();
    for (tx, pos) in next.tx_positions.iter_mut().enumerate() {
        let theta = rng.gen::<f64>() * std::f64::consts::TAU;
        let moved = [pos[0] + step * theta.cos(), pos[1] + step * theta.sin()];
        let center = topo.ap_positions[topo.association[tx]];
        *pos = reflect_into_disk(center, cfg.coverage_radius_m, moved);
    }
    next
}

/// Uniform sample inside a disk via the inverse-CDF radius transform.
fn uniform_in_disk(center: Point, radius: f64, rng: &mut impl Rng) -> Point {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
    [center[0] + r * theta.cos(), center[1] + r * theta.sin()]
}

/// Radially reflects a point that left the disk back across the boundary.
/// Points already inside are returned unchanged.
pub(crate) fn reflect_into_disk(center: Point, radius: f64, p: Point) -> Point {
    let r = distance(p, center);
    if r <= radius {
        return p;
    }
    // Fold the radial excess back into [0, radius]; one fold suffices for any
    // realistic per-step displacement.
    let mut folded = r;
    while folded > radius {
        folded = (2.0 * radius - folded).abs();
    }
    if r == 0.0 {
        return center;
    }
    let scale = folded / r;
    [center[0] + (p[0] - center[0]) * scale, center[1] + (p[1] - center[1]) * scale]
}
