//! Binary snapshots of model parameters and momentum.
//!
//! Format, all little-endian: 4-byte magic `FQN1`, u16 version, four u32
//! layout dimensions, u64 training round, then two length-prefixed f64
//! vectors (parameters, momentum), and a trailing SHA-256 over everything
//! before it. Loading verifies magic, version, digest, and that vector
//! lengths match the declared layout, so a truncated or bit-flipped file
//! never round-trips silently.

use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::net::{MomentumState, NetLayout, QNetParams};
use super::DrlError;

const MAGIC: &[u8; 4] = b"FQN1";
const VERSION: u16 = 1;
const DIGEST_LEN: usize = 32;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u16),
    #[error("checkpoint digest mismatch; file is corrupt")]
    DigestMismatch,
    #[error("checkpoint truncated at byte {0}")]
    Truncated(usize),
    #[error("checkpoint layout declares {expected} values, found {got}")]
    ShapeMismatch { expected: usize, got: usize },
}

/// A model snapshot tied to the training round that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub layout: NetLayout,
    pub round: u64,
    pub theta: Vec<f64>,
    pub momentum: Vec<f64>,
}

impl Checkpoint {
    pub fn new(params: &QNetParams, momentum: &MomentumState, round: u64) -> Self {
        Self {
            layout: params.layout(),
            round,
            theta: params.as_slice().to_vec(),
            momentum: momentum.as_slice().to_vec(),
        }
    }

    pub fn into_model(self) -> Result<(QNetParams, MomentumState), DrlError> {
        let params = QNetParams::from_vec(self.layout, self.theta)?;
        let momentum = MomentumState::from_vec(self.layout, self.momentum)?;
        Ok((params, momentum))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(
            4 + 2 + 16 + 8 + 16 + 8 * (self.theta.len() + self.momentum.len()) + DIGEST_LEN,
        );
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        for dim in [self.layout.input, self.layout.hidden1, self.layout.hidden2, self.layout.actions]
        {
            out.extend_from_slice(&(dim as u32).to_le_bytes());
        }
        out.extend_from_slice(&self.round.to_le_bytes());
        for vec in [&self.theta, &self.momentum] {
            out.extend_from_slice(&(vec.len() as u64).to_le_bytes());
            for v in vec.iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        if bytes.len() < DIGEST_LEN + 4 {
            return Err(CheckpointError::Truncated(bytes.len()));
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != digest {
            return Err(CheckpointError::DigestMismatch);
        }

        let mut pos = 0;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8], CheckpointError> {
            if *pos + n > body.len() {
                return Err(CheckpointError::Truncated(body.len()));
            }
            let slice = &body[*pos..*pos + n];
            *pos += n;
            Ok(slice)
        };

        if take(&mut pos, 4)? != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = u16::from_le_bytes(take(&mut pos, 2)?.try_into().unwrap());
        if version != VERSION {
            return Err(CheckpointError::UnsupportedVersion(version));
        }
        let mut dims = [0usize; 4];
        for d in &mut dims {
            *d = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        }
        let layout =
            NetLayout { input: dims[0], hidden1: dims[1], hidden2: dims[2], actions: dims[3] };
        let round = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());

        let read_vec = |pos: &mut usize| -> Result<Vec<f64>, CheckpointError> {
            let len = u64::from_le_bytes(take(pos, 8)?.try_into().unwrap()) as usize;
            if len != layout.param_count() {
                return Err(CheckpointError::ShapeMismatch {
                    expected: layout.param_count(),
                    got: len,
                });
            }
            let raw = take(pos, 8 * len)?;
            Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
        };
        let theta = read_vec(&mut pos)?;
        let momentum = read_vec(&mut pos)?;
        if pos != body.len() {
            return Err(CheckpointError::Truncated(pos));
        }
        Ok(Self { layout, round, theta, momentum })
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
