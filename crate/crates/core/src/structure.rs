//! Subsystem layout of the composite Hilbert space.
//!
//! The battery `W` is always the first tensor factor, followed by the
//! system `S`, bath `B` and ancilla `A`: `H = H_W ⊗ H_S ⊗ H_B ⊗ H_A`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 4]", into = "[usize; 4]")]
pub struct TensorStructure {
    d_w: usize,
    d_s: usize,
    d_b: usize,
    d_a: usize,
}

impl TensorStructure {
    pub fn new(d_w: usize, d_s: usize, d_b: usize, d_a: usize) -> Result<Self> {
        if [d_w, d_s, d_b, d_a].contains(&0) {
            return Err(Error::InvalidInput(format!(
                "subsystem dimensions must be >= 1, got ({d_w},{d_s},{d_b},{d_a})"
            )));
        }
        Ok(Self { d_w, d_s, d_b, d_a })
    }

    /// Battery-only structure (no environment): `(d_w, 1, 1, 1)`.
    pub fn battery_only(d_w: usize) -> Result<Self> {
        Self::new(d_w, 1, 1, 1)
    }

    pub fn d_w(&self) -> usize {
        self.d_w
    }

    pub fn d_s(&self) -> usize {
        self.d_s
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    /// Dimension of the `S ⊗ B ⊗ A` environment traced out to obtain `ρ_W`.
    pub fn env_dim(&self) -> usize {
        self.d_s * self.d_b * self.d_a
    }

    pub fn total_dim(&self) -> usize {
        self.d_w * self.env_dim()
    }

    pub fn dims(&self) -> [usize; 4] {
        [self.d_w, self.d_s, self.d_b, self.d_a]
    }
}

impl TryFrom<[usize; 4]> for TensorStructure {
    type Error = Error;

    fn try_from(d: [usize; 4]) -> Result<Self> {
        Self::new(d[0], d[1], d[2], d[3])
    }
}

impl From<TensorStructure> for [usize; 4] {
    fn from(s: TensorStructure) -> Self {
        s.dims()
    }
}

impl fmt::Display for TensorStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.d_w, self.d_s, self.d_b, self.d_a)
    }
}

/// Parses the comma separated `dW,dS,dB,dA` form used on the command line.
impl FromStr for TensorStructure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::InvalidInput(format!(
                "expected four comma separated dimensions, got {s:?}"
            )));
        }
        let mut dims = [0usize; 4];
        for (slot, p) in dims.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad dimension {p:?} in {s:?}")))?;
        }
        dims.try_into()
    }
}
