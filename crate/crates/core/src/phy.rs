//! Link-level abstractions: the MCS table, the discrete transmit power set,
//! PRB allocations, and the throughput / energy bookkeeping of one attempt.
//!
//! Spectral efficiencies come from a bundled 29-entry table of 5G NR shared
//! channel values; decode thresholds are interpolated linearly across the
//! [-6.7, 11.7] dB operating span so that threshold(1) = -6.7 and
//! threshold(29) = 11.7.

use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::channel::dbm_to_mw;

/// Number of MCS indices (m ranges over 1..=29).
pub const MCS_COUNT: usize = 29;
/// Number of discrete transmit power levels (k ranges over 1..=6).
pub const POWER_LEVEL_COUNT: usize = 6;
/// Decode threshold of the most robust / least robust MCS, dB.
pub const SINR_MARGIN_DB: (f64, f64) = (-6.7, 11.7);

static BUNDLED_MCS_CSV: &str = include_str!("../data/mcs_spectral_efficiency.csv");
/// SHA-256 of the bundled table; guards against silent asset drift.
const BUNDLED_MCS_SHA256: &str = "6611a0349a608ca6e8593b458f1ecc0d4e1b936ab4a94e20647855630d2aab2f";

#[derive(Debug, Error)]
pub enum PhyError {
    #[error("mcs table line {line}: {message}")]
    MalformedTable { line: usize, message: String },
    #[error("mcs table must have {MCS_COUNT} rows, got {0}")]
    WrongRowCount(usize),
    #[error("mcs table checksum mismatch: expected {expected}, got {got}")]
    ChecksumMismatch { expected: String, got: String },
    #[error("mcs table: {0}")]
    InvalidTable(String),
    #[error("mcs index {0} outside 1..={MCS_COUNT}")]
    BadMcsIndex(u8),
    #[error("power level {0} outside 1..={POWER_LEVEL_COUNT}")]
    BadPowerLevel(u8),
    #[error("phy.{key}: {message}")]
    InvalidConfig { key: &'static str, message: String },
    #[error("failed to read mcs table: {0}")]
    Io(#[from] std::io::Error),
}

/// One modulation-and-coding option.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McsEntry {
    /// 1-based index m.
    pub index: u8,
    /// Bits per second per Hz.
    pub spectral_efficiency: f64,
    /// Minimum SINR for a successful decode, dB (boundary inclusive).
    pub sinr_threshold_db: f64,
}

/// The ordered table of all 29 MCS options.
#[derive(Debug, Clone, PartialEq)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

impl McsTable {
    /// Loads the table compiled into the crate, verifying its checksum.
    pub fn bundled() -> Result<Self, PhyError> {
        let got = hex_sha256(BUNDLED_MCS_CSV.as_bytes());
        if got != BUNDLED_MCS_SHA256 {
            return Err(PhyError::ChecksumMismatch {
                expected: BUNDLED_MCS_SHA256.to_string(),
                got,
            });
        }
        Self::from_csv(BUNDLED_MCS_CSV)
    }

    /// Loads a table from an external file with the same layout as the
    /// bundled asset (no checksum enforcement).
    pub fn load(path: &Path) -> Result<Self, PhyError> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }

    /// Parses `index,spectral_efficiency` rows and attaches interpolated
    /// decode thresholds.
    pub fn from_csv(text: &str) -> Result<Self, PhyError> {
        let mut entries = Vec::with_capacity(MCS_COUNT);
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let row = raw.trim();
            if row.is_empty() {
                continue;
            }
            let (idx_str, se_str) = row.split_once(',').ok_or_else(|| {
                PhyError::MalformedTable { line, message: "expected index,value".into() }
            })?;
            let index: u8 = idx_str.trim().parse().map_err(|e| PhyError::MalformedTable {
                line,
                message: format!("bad index: {e}"),
            })?;
            let spectral_efficiency: f64 =
                se_str.trim().parse().map_err(|e| PhyError::MalformedTable {
                    line,
                    message: format!("bad spectral efficiency: {e}"),
                })?;
            entries.push(McsEntry {
                index,
                spectral_efficiency,
                sinr_threshold_db: sinr_threshold_db(index),
            });
        }
        if entries.len() != MCS_COUNT {
            return Err(PhyError::WrongRowCount(entries.len()));
        }
        let table = Self { entries };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<(), PhyError> {
        for (i, e) in self.entries.iter().enumerate() {
            if usize::from(e.index) != i + 1 {
                return Err(PhyError::InvalidTable(format!(
                    "row {} has index {}, expected {}",
                    i + 1,
                    e.index,
                    i + 1
                )));
            }
            if !(e.spectral_efficiency > 0.0) {
                return Err(PhyError::InvalidTable(format!(
                    "spectral efficiency of m={} must be positive",
                    e.index
                )));
            }
        }
        for pair in self.entries.windows(2) {
            if pair[1].spectral_efficiency <= pair[0].spectral_efficiency {
                return Err(PhyError::InvalidTable(format!(
                    "spectral efficiency must be strictly increasing at m={}",
                    pair[1].index
                )));
            }
            if pair[1].sinr_threshold_db < pair[0].sinr_threshold_db {
                return Err(PhyError::InvalidTable(format!(
                    "thresholds must be non-decreasing at m={}",
                    pair[1].index
                )));
            }
        }
        let lo = self.entries.first().unwrap().sinr_threshold_db;
        let hi = self.entries.last().unwrap().sinr_threshold_db;
        if (lo - SINR_MARGIN_DB.0).abs() > 1e-9 || (hi - SINR_MARGIN_DB.1).abs() > 1e-9 {
            return Err(PhyError::InvalidTable(format!(
                "thresholds must span [{}, {}], got [{lo}, {hi}]",
                SINR_MARGIN_DB.0, SINR_MARGIN_DB.1
            )));
        }
        Ok(())
    }

    pub fn entry(&self, m: u8) -> Result<&McsEntry, PhyError> {
        if m == 0 || usize::from(m) > MCS_COUNT {
            return Err(PhyError::BadMcsIndex(m));
        }
        Ok(&self.entries[usize::from(m) - 1])
    }

    pub fn spectral_efficiency(&self, m: u8) -> Result<f64, PhyError> {
        Ok(self.entry(m)?.spectral_efficiency)
    }

    pub fn sinr_threshold_db(&self, m: u8) -> Result<f64, PhyError> {
        Ok(self.entry(m)?.sinr_threshold_db)
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    /// Spectral efficiency of the top MCS; used by normalization caps.
    pub fn max_spectral_efficiency(&self) -> f64 {
        self.entries.last().unwrap().spectral_efficiency
    }
}

/// Linear interpolation of the decode threshold across the operating span.
fn sinr_threshold_db(m: u8) -> f64 {
    let (lo, hi) = SINR_MARGIN_DB;
    lo + f64::from(m - 1) * (hi - lo) / (MCS_COUNT as f64 - 1.0)
}

fn hex_sha256(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// The discrete transmit power alphabet in dBm, indexed by k in 1..=6.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSet {
    levels_dbm: Vec<f64>,
}

impl Default for PowerSet {
    fn default() -> Self {
        Self { levels_dbm: vec![-8.4, -2.3, 0.0, 4.0, 7.0, 9.0] }
    }
}

impl PowerSet {
    pub fn level_dbm(&self, k: u8) -> Result<f64, PhyError> {
        if k == 0 || usize::from(k) > self.levels_dbm.len() {
            return Err(PhyError::BadPowerLevel(k));
        }
        Ok(self.levels_dbm[usize::from(k) - 1])
    }

    pub fn min_dbm(&self) -> f64 {
        self.levels_dbm[0]
    }

    pub fn max_dbm(&self) -> f64 {
        *self.levels_dbm.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.levels_dbm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels_dbm.is_empty()
    }
}

/// Per-transmitter PRB assignment inside its AP grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrbAllocation {
    /// Number of PRBs held by the transmitter.
    pub prbs: u32,
    /// Bandwidth of one PRB, Hz.
    pub prb_bandwidth_hz: f64,
    /// Upper bound on per-transmitter PRB counts.
    pub zeta_max: u32,
    /// Index of the first held PRB in the AP grid.
    pub prb_offset: u32,
}

impl PrbAllocation {
    /// Total bandwidth of the allocation, Hz.
    pub fn bandwidth_hz(&self) -> f64 {
        f64::from(self.prbs) * self.prb_bandwidth_hz
    }

    /// Fraction of `self`'s PRBs that the other allocation collides with.
    /// Allocations on the same AP grid never self-intersect by construction;
    /// this is meant for cross-AP pairs.
    pub fn overlap_fraction(&self, other: &PrbAllocation) -> f64 {
        let lo = self.prb_offset.max(other.prb_offset);
        let hi = (self.prb_offset + self.prbs).min(other.prb_offset + other.prbs);
        if hi <= lo {
            return 0.0;
        }
        f64::from(hi - lo) / f64::from(self.prbs)
    }
}

/// Decode success: boundary inclusive comparison against the MCS threshold.
pub fn attempt_outcome(sinr_db: f64, m: u8, table: &McsTable) -> Result<bool, PhyError> {
    Ok(sinr_db >= table.sinr_threshold_db(m)?)
}

/// Bits carried by one step-long transmission at MCS `m`.
pub fn data_bits(
    m: u8,
    table: &McsTable,
    alloc: &PrbAllocation,
    tau_s: f64,
) -> Result<f64, PhyError> {
    Ok(alloc.bandwidth_hz() * table.spectral_efficiency(m)? * tau_s)
}

/// Delivered rate in bits/second: zero on failure, the full allocation rate
/// on success.
pub fn throughput_bps(
    m: u8,
    success: bool,
    table: &McsTable,
    alloc: &PrbAllocation,
) -> Result<f64, PhyError> {
    if !success {
        return Ok(0.0);
    }
    Ok(alloc.bandwidth_hz() * table.spectral_efficiency(m)?)
}

/// Energy drawn by one step-long transmission, millijoules.
pub fn step_energy_mj(p_dbm: f64, tau_s: f64) -> f64 {
    dbm_to_mw(p_dbm) * tau_s
}

/// Delivered bits per millijoule for one attempt.
pub fn energy_efficiency_bits_per_mj(delivered_bits: f64, p_dbm: f64, tau_s: f64) -> f64 {
    delivered_bits / step_energy_mj(p_dbm, tau_s)
}
