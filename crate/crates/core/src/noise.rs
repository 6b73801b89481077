//! Depolarizing noise shared by both backends.
//!
//! A fault is attached after every non-ideal gate: single-qubit gates and
//! resets get the single-qubit channel at rate `p1`, two-qubit gates the
//! two-qubit channel at rate `p2`. Measurements only suffer the classical
//! flip `p_meas`. Classically controlled Paulis are frame updates and stay
//! noiseless. Idle qubits are never touched.

use crate::circuit::{Gate, GateKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("{name} = {value} is not a probability")]
    NotAProbability { name: &'static str, value: f64 },
    #[error("kappa = {0} must be finite and non-negative")]
    BadKappa(f64),
    #[error("depolarizing channels exist for arity 1 or 2, not {0}")]
    Arity(usize),
}

/// How the rate `p` of a depolarizing channel is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `p` is the total probability of a non-identity Pauli, spread
    /// uniformly over the 3 (or 15) non-identity Paulis.
    #[default]
    PauliTotal,
    /// `rho -> (1-p) rho + p I/2` on each qubit; the two-qubit channel is the
    /// tensor product of two single-qubit channels.
    MaximallyMixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    pub p_meas: f64,
    pub kappa: f64,
    pub convention: Convention,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            p1: 0.0,
            p2: 0.0,
            p_meas: 0.0,
            kappa: 1.0,
            convention: Convention::PauliTotal,
        }
    }
}

fn probability(name: &'static str, value: f64) -> Result<(), NoiseError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(NoiseError::NotAProbability { name, value })
    }
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64) -> Result<Self, NoiseError> {
        let m = NoiseModel {
            p1,
            p2,
            ..NoiseModel::default()
        };
        m.validate()?;
        Ok(m)
    }

    /// Same rate `p` for one- and two-qubit gates.
    pub fn uniform(p: f64) -> Result<Self, NoiseError> {
        NoiseModel::new(p, p)
    }

    pub fn noiseless() -> Self {
        NoiseModel::default()
    }

    pub fn with_p_meas(mut self, p_meas: f64) -> Self {
        self.p_meas = p_meas;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        probability("p1", self.p1)?;
        probability("p2", self.p2)?;
        probability("p_meas", self.p_meas)?;
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(NoiseError::BadKappa(self.kappa));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.p_meas == 0.0
    }

    /// Physical failure probability used for logical-fault rates.
    pub fn physical_rate(&self) -> f64 {
        self.p1.max(self.p2)
    }

    /// Rate `kappa * p^n` of a logical fault on an `n`-qubit block, capped at 1.
    pub fn logical_fault_rate(&self, block: usize) -> f64 {
        (self.kappa * self.physical_rate().powi(block as i32)).min(1.0)
    }

    /// Depolarizing rate attached to `gate`, or `None` if it is noiseless.
    pub fn gate_rate(&self, gate: &Gate) -> Option<f64> {
        if gate.ideal {
            return None;
        }
        let p = match gate.kind {
            GateKind::Measure | GateKind::CondX | GateKind::CondZ => return None,
            GateKind::LogicalFault => self.logical_fault_rate(gate.arity()),
            GateKind::CX | GateKind::CZ => self.p2,
            _ => self.p1,
        };
        (p > 0.0).then_some(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i & 3]
    }

    /// Symplectic (x, z) bits.
    pub fn xz(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_xz(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Flips a computational-basis measurement.
    pub fn flips_z(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// A channel written as a probabilistic mixture of Pauli operators.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliChannel {
    pub arity: usize,
    pub terms: Vec<(Vec<Pauli>, f64)>,
}

impl PauliChannel {
    pub fn total_probability(&self) -> f64 {
        self.terms.iter().map(|(_, w)| w).sum()
    }

    pub fn weight(&self, letters: &[Pauli]) -> f64 {
        self.terms
            .iter()
            .filter(|(l, _)| l == letters)
            .map(|(_, w)| w)
            .sum()
    }
}

/// Pauli-mixture form of the `arity`-qubit depolarizing channel.
pub fn depolarizing_channel(
    arity: usize,
    p: f64,
    convention: Convention,
) -> Result<PauliChannel, NoiseError> {
    if !(1..=2).contains(&arity) {
        return Err(NoiseError::Arity(arity));
    }
    probability("p", p)?;
    let count = 1usize << (2 * arity);
    let letters = |i: usize| -> Vec<Pauli> {
        (0..arity)
            .map(|j| Pauli::from_index(i >> (2 * (arity - 1 - j))))
            .collect()
    };
    let single = |l: Pauli| {
        if l == Pauli::I {
            1.0 - 0.75 * p
        } else {
            0.25 * p
        }
    };
    let terms = (0..count)
        .map(|i| {
            let l = letters(i);
            let w = match convention {
                Convention::PauliTotal if i == 0 => 1.0 - p,
                Convention::PauliTotal => p / (count - 1) as f64,
                Convention::MaximallyMixed => l.iter().map(|&q| single(q)).product(),
            };
            (l, w)
        })
        .collect();
    Ok(PauliChannel { arity, terms })
}

/// A sampled non-identity Pauli attached after gate `location`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliFault {
    pub location: usize,
    /// One letter per qubit operand of the gate, not all identity.
    pub letters: SmallVec<[Pauli; 2]>,
}

/// Independent per-trajectory random stream.
pub type TrajectoryRng = ChaCha8Rng;

/// Stream for trajectory `index` under `seed`; independent of scheduling.
pub fn trajectory_rng(seed: u64, index: u64) -> TrajectoryRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws the fault (if any) that follows gate `location`.
///
/// No randomness is consumed for gates that carry no noise, so circuits that
/// differ only by ideal gates stay in lockstep on the same stream.
pub fn sample_fault<R: Rng + ?Sized>(
    location: usize,
    gate: &Gate,
    model: &NoiseModel,
    rng: &mut R,
) -> Option<PauliFault> {
    let p = model.gate_rate(gate)?;
    let n = gate.arity();
    let letters: SmallVec<[Pauli; 2]> = if gate.kind == GateKind::LogicalFault {
        if rng.random::<f64>() >= p {
            return None;
        }
        // X_L, Y_L or Z_L on the block: X on every qubit, Z on the first.
        let (x, z) = match rng.random_range(0..3u8) {
            0 => (true, false),
            1 => (true, true),
            _ => (false, true),
        };
        (0..n).map(|i| Pauli::from_xz(x, z && i == 0)).collect()
    } else {
        match model.convention {
            Convention::PauliTotal => {
                if rng.random::<f64>() >= p {
                    return None;
                }
                let i = rng.random_range(1..(1usize << (2 * n)));
                (0..n)
                    .map(|j| Pauli::from_index(i >> (2 * (n - 1 - j))))
                    .collect()
            }
            Convention::MaximallyMixed => {
                let letters: SmallVec<[Pauli; 2]> = (0..n)
                    .map(|_| {
                        if rng.random::<f64>() < 0.75 * p {
                            Pauli::from_index(rng.random_range(1..4))
                        } else {
                            Pauli::I
                        }
                    })
                    .collect();
                if letters.iter().all(|&l| l == Pauli::I) {
                    return None;
                }
                letters
            }
        }
    };
    Some(PauliFault { location, letters })
}
