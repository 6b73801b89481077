//! Fault-tolerant quantum error mitigation: encode small logical circuits in
//! the repetition or Steane code, simulate them under depolarizing noise and
//! post-select on the code space.
//!
//! The pipeline is [`circuit`] → [`codes`] → [`sim`] → [`mitigation`], with
//! [`analysis`] for fidelities and threshold bounds and [`harness`] tying
//! them together for configured experiments.

pub mod analysis;
pub mod circuit;
pub mod codes;
pub mod harness;
pub mod mitigation;
pub mod noise;
pub mod sim;

pub use analysis::{BoundInputs, BoundReport};
pub use circuit::{gate_census, parse_circuit, Circuit, Gate, GateKind};
pub use codes::{CodeSpec, EncodedCircuit, HadamardMode, LayoutKind, PauliString};
pub use harness::{ExperimentConfig, RunRecord};
pub use mitigation::{DecodePolicy, MitigationResult, Strategy};
pub use noise::{Convention, NoiseModel};
pub use sim::{Backend, OutcomeDistribution, OutcomeHistogram};
