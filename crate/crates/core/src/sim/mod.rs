//! Simulation backends.
//!
//! [`dm`] evolves the exact density matrix (or, for noiseless runs, pure
//! state branches) and returns exact outcome probabilities. [`tableau`]
//! samples Pauli faults into a stabilizer tableau, one independent random
//! stream per shot.

pub mod dm;
pub mod tableau;

pub use dm::{final_density, run_dm, run_dm_with, DensityState, DmOptions, StateVector};
pub use tableau::{run_trajectories, run_trajectories_with, Tableau};

use crate::circuit::GateKind;
use crate::noise::NoiseError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("circuit has {qubits} qubits, above the backend cap of {cap}")]
    RegisterTooLarge { qubits: usize, cap: usize },
    #[error("more than {0} measurement branches")]
    TooManyBranches(usize),
    #[error("{0} is not supported here")]
    UnsupportedGate(GateKind),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    DmExact,
    TableauMc,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::DmExact => "dm_exact",
            Backend::TableauMc => "tableau_mc",
        })
    }
}

impl FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dm_exact" => Ok(Backend::DmExact),
            "tableau_mc" => Ok(Backend::TableauMc),
            _ => Err(format!(
                "unknown backend `{s}` (expected dm_exact or tableau_mc)"
            )),
        }
    }
}

/// Exact probabilities keyed by classical bitstring, bit 0 leftmost.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutcomeDistribution {
    pub probs: BTreeMap<String, f64>,
}

impl OutcomeDistribution {
    pub fn get(&self, key: &str) -> f64 {
        self.probs.get(key).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Rescaled to unit total; `None` when the total is zero.
    pub fn normalized(&self) -> Option<OutcomeDistribution> {
        let t = self.total();
        if t <= 0.0 {
            return None;
        }
        Some(OutcomeDistribution {
            probs: self
                .probs
                .iter()
                .map(|(k, &p)| (k.clone(), p / t))
                .collect(),
        })
    }

    /// Distribution of the bits at `positions`, in that order.
    pub fn marginal(&self, positions: &[usize]) -> OutcomeDistribution {
        let mut out = BTreeMap::new();
        for (k, &p) in &self.probs {
            *out.entry(select(k, positions)).or_insert(0.0) += p;
        }
        OutcomeDistribution { probs: out }
    }
}

impl FromIterator<(String, f64)> for OutcomeDistribution {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        let mut probs = BTreeMap::new();
        for (k, p) in iter {
            *probs.entry(k).or_insert(0.0) += p;
        }
        OutcomeDistribution { probs }
    }
}

/// Sampled counts keyed by classical bitstring, bit 0 leftmost.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeHistogram {
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
}

impl OutcomeHistogram {
    pub fn record(&mut self, key: String) {
        *self.counts.entry(key).or_insert(0) += 1;
        self.shots += 1;
    }

    pub fn get(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn merge(mut self, other: OutcomeHistogram) -> OutcomeHistogram {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self.shots += other.shots;
        self
    }

    pub fn frequencies(&self) -> OutcomeDistribution {
        let n = self.shots.max(1) as f64;
        self.counts
            .iter()
            .map(|(k, &v)| (k.clone(), v as f64 / n))
            .collect()
    }
}

impl FromIterator<(String, u64)> for OutcomeHistogram {
    fn from_iter<I: IntoIterator<Item = (String, u64)>>(iter: I) -> Self {
        let mut h = OutcomeHistogram::default();
        for (k, v) in iter {
            *h.counts.entry(k).or_insert(0) += v;
            h.shots += v;
        }
        h
    }
}

pub(crate) fn select(key: &str, positions: &[usize]) -> String {
    let b = key.as_bytes();
    positions.iter().map(|&i| b[i] as char).collect()
}

pub(crate) fn bits_to_key(bits: &[u8]) -> String {
    bits.iter()
        .map(|&b| if b != 0 { '1' } else { '0' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_merge_is_additive() {
        let a: OutcomeHistogram = [("00".to_string(), 3), ("11".to_string(), 1)]
            .into_iter()
            .collect();
        let b: OutcomeHistogram = [("11".to_string(), 2)].into_iter().collect();
        let m = a.clone().merge(b.clone());
        assert_eq!(m.shots, 6);
        assert_eq!(m.get("11"), 3);
        assert_eq!(m, b.merge(a));
    }

    #[test]
    fn marginals() {
        let d: OutcomeDistribution = [("010".to_string(), 0.25), ("110".to_string(), 0.75)]
            .into_iter()
            .collect();
        let m = d.marginal(&[2, 0]);
        assert_eq!(m.get("00"), 0.25);
        assert_eq!(m.get("01"), 0.75);
    }
}
