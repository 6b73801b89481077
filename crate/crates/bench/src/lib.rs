//! Benchmark fixtures.

use ftqem::circuit::parse_circuit;
use ftqem::codes::{CodeSpec, EncodedCircuit, HadamardMode, LayoutKind};
use ftqem::harness::scenarios::{cnot_cascade, grover_two_qubit};
use ftqem::mitigation::{compile_for_strategy, Strategy};
use ftqem::{Circuit, NoiseModel};

pub fn cascade() -> Circuit {
    parse_circuit(&cnot_cascade()).expect("cascade parses")
}

pub fn grover() -> Circuit {
    parse_circuit(&grover_two_qubit()).expect("grover parses")
}

pub fn noise() -> NoiseModel {
    NoiseModel::new(0.001, 0.01).expect("valid rates")
}

/// `logical` on `rep(d)` with the DM readout tail.
pub fn encoded(logical: &Circuit, d: usize, hmode: HadamardMode) -> EncodedCircuit {
    compile_for_strategy(
        &CodeSpec::Repetition(d),
        logical,
        hmode,
        Strategy::DM,
        LayoutKind::Interleaved,
        None,
        false,
    )
    .expect("compiles")
}
