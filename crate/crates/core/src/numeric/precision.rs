use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_START_BITS: u32 = 128;
pub const DEFAULT_CAP_BITS: u32 = 4096;
pub const PRECISION_ENV: &str = "DIOPH_PRECISION_BITS";

/// Precision escalation schedule: start at `start_bits`, double until
/// `cap_bits`. An enclosure that still straddles a decision boundary at the
/// cap is reported as ambiguous, never rounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub start_bits: u32,
    pub cap_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { start_bits: DEFAULT_START_BITS, cap_bits: DEFAULT_CAP_BITS }
    }
}

impl PrecisionPolicy {
    pub fn with_cap(cap_bits: u32) -> Self {
        PrecisionPolicy { start_bits: DEFAULT_START_BITS.min(cap_bits), cap_bits }
    }

    /// Reads the cap from `DIOPH_PRECISION_BITS`, falling back to the default.
    pub fn from_env() -> Result<Self> {
        match std::env::var(PRECISION_ENV) {
            Ok(raw) => {
                let bits = parse_bits(&raw)?;
                Ok(Self::with_cap(bits))
            }
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn ladder(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut bits = self.start_bits.max(2);
        while bits < self.cap_bits {
            out.push(bits);
            bits = bits.saturating_mul(2);
        }
        out.push(self.cap_bits.max(2));
        out
    }

    /// Runs `eval` at each rung of the ladder until it stops returning
    /// `Error::Unresolved`.
    /// `what` is only formatted on failure.
    pub fn certify<T>(&self, what: impl std::fmt::Display, mut eval: impl FnMut(u32) -> Result<T>) -> Result<T> {
        let mut bits = self.start_bits.max(2);
        loop {
            let rung = bits.min(self.cap_bits.max(2));
            match eval(rung) {
                Err(Error::Unresolved) if rung < self.cap_bits => bits = bits.saturating_mul(2),
                Err(Error::Unresolved) => break,
                other => return other,
            }
        }
        Err(Error::AmbiguousAtMaxPrecision { bits: self.cap_bits, what: what.to_string() })
    }
}

pub fn parse_bits(raw: &str) -> Result<u32> {
    let bits: u32 = raw
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("precision bits must be a positive integer, got {raw:?}")))?;
    if !(16..=1 << 20).contains(&bits) {
        return Err(Error::Parse(format!("precision bits {bits} outside 16..=1048576")));
    }
    Ok(bits)
}
