//! Code definitions and the logical-to-physical compiler.
//!
//! Two codes are supported: the `[d,1,d]` bit-flip repetition code and the
//! `[[7,1,3]]` Steane code. Each block stores its logical qubit at the
//! *primary* position that the decoding circuit returns the data to
//! (position 0 for the repetition code, 2 for Steane).

mod compile;
mod pauli;

pub use compile::{
    compile_logical, compile_with, AncillaMap, BlockReadout, ClassicalLayout, CompileOptions,
    EncodedCircuit, HadamardMode, LayoutKind, Readout,
};
pub use pauli::{in_stabilizer_group, PauliError, PauliString};

use crate::circuit::{gate_census, Circuit, CircuitError, Gate, GateKind};
use crate::noise::Pauli;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("invalid code `{0}` (expected rep:<d> with d >= 1, or steane)")]
    BadCode(String),
    #[error("logical basis string `{0}` must contain only 0 and 1")]
    BadBasis(String),
    #[error("{0} cannot be compiled for this code")]
    UnsupportedGate(GateKind),
    #[error("the non-fault-tolerant Hadamard applies to the repetition code only; H is transversal on Steane")]
    NonFtOnSteane,
    #[error("syndrome extraction supports weight-2 Z-type generators, got {0}")]
    UnsupportedGenerator(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CodeSpec {
    /// Bit-flip repetition code of length `d`; `d = 1` is no encoding.
    Repetition(usize),
    Steane,
}

// Rows of the [7,4] Hamming parity-check matrix (X-type generators) and the
// images of Z_4, Z_5, Z_6 under the encoder (Z-type generators). Both span
// the same [7,3] simplex code.
const STEANE_X_ROWS: [[usize; 4]; 3] = [[3, 4, 5, 6], [1, 2, 5, 6], [0, 2, 4, 6]];
const STEANE_Z_ROWS: [[usize; 4]; 3] = [[1, 2, 3, 4], [0, 2, 3, 5], [0, 1, 3, 6]];
// Pivot of each X row: the only row containing it.
const STEANE_PIVOTS: [usize; 3] = [3, 1, 0];
const STEANE_PRIMARY: usize = 2;

impl CodeSpec {
    pub fn repetition(d: usize) -> Result<Self, CodeError> {
        if d == 0 {
            return Err(CodeError::BadCode("rep:0".into()));
        }
        Ok(CodeSpec::Repetition(d))
    }

    pub fn block_size(&self) -> usize {
        match self {
            CodeSpec::Repetition(d) => *d,
            CodeSpec::Steane => 7,
        }
    }

    pub fn distance(&self) -> usize {
        match self {
            CodeSpec::Repetition(d) => *d,
            CodeSpec::Steane => 3,
        }
    }

    pub fn is_unencoded(&self) -> bool {
        matches!(self, CodeSpec::Repetition(1))
    }

    /// Block position holding the logical qubit after decoding.
    pub fn primary(&self) -> usize {
        match self {
            CodeSpec::Repetition(_) => 0,
            CodeSpec::Steane => STEANE_PRIMARY,
        }
    }

    /// Block positions whose Z-parity is the logical Z value.
    pub fn logical_z_support(&self) -> Vec<usize> {
        match self {
            CodeSpec::Repetition(_) => vec![0],
            CodeSpec::Steane => vec![0, 1, 2],
        }
    }

    pub fn logical_x(&self) -> PauliString {
        PauliString::on(
            self.block_size(),
            &(0..self.block_size()).collect::<Vec<_>>(),
            Pauli::X,
        )
    }

    pub fn logical_z(&self) -> PauliString {
        PauliString::on(self.block_size(), &self.logical_z_support(), Pauli::Z)
    }

    /// Z-type parity checks as block-position sets (the DM acceptance test).
    pub fn z_checks(&self) -> Vec<Vec<usize>> {
        match self {
            CodeSpec::Repetition(d) => (0..d.saturating_sub(1)).map(|i| vec![i, i + 1]).collect(),
            CodeSpec::Steane => STEANE_Z_ROWS.iter().map(|r| r.to_vec()).collect(),
        }
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSpec::Repetition(d) => write!(f, "rep:{d}"),
            CodeSpec::Steane => f.write_str("steane"),
        }
    }
}

impl FromStr for CodeSpec {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CodeError::BadCode(s.to_string());
        match s.trim() {
            "steane" => Ok(CodeSpec::Steane),
            other => {
                let d = other
                    .strip_prefix("rep:")
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(bad)?;
                CodeSpec::repetition(d).map_err(|_| bad())
            }
        }
    }
}

impl TryFrom<String> for CodeSpec {
    type Error = CodeError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<CodeSpec> for String {
    fn from(c: CodeSpec) -> String {
        c.to_string()
    }
}

/// Stabilizer generators of one block.
pub fn stabilizer_generators(code: &CodeSpec) -> Vec<PauliString> {
    let n = code.block_size();
    match code {
        CodeSpec::Repetition(_) => code
            .z_checks()
            .iter()
            .map(|s| PauliString::on(n, s, Pauli::Z))
            .collect(),
        CodeSpec::Steane => STEANE_X_ROWS
            .iter()
            .map(|r| PauliString::on(n, r, Pauli::X))
            .chain(
                STEANE_Z_ROWS
                    .iter()
                    .map(|r| PauliString::on(n, r, Pauli::Z)),
            )
            .collect(),
    }
}

/// Block-local unitary taking the primary qubit (others |0>) into the code.
pub fn encoder(code: &CodeSpec) -> Circuit {
    let n = code.block_size();
    let mut c = Circuit::new(n, 0);
    match code {
        CodeSpec::Repetition(d) => {
            for k in 1..*d {
                c.push(Gate::cx(0, k)).expect("in range");
            }
        }
        CodeSpec::Steane => {
            // Copy the data onto the weight-3 logical X support {2, 4, 5}, then
            // superpose over the X stabilizers through their pivots.
            c.extend([Gate::cx(2, 4), Gate::cx(2, 5)])
                .expect("in range");
            for &p in &STEANE_PIVOTS {
                c.push(Gate::h(p)).expect("in range");
            }
            for (row, &p) in STEANE_X_ROWS.iter().zip(&STEANE_PIVOTS) {
                for &t in row.iter().filter(|&&t| t != p) {
                    c.push(Gate::cx(p, t)).expect("in range");
                }
            }
        }
    }
    c
}

/// Maps codewords back to `|x>` on the primary position with every other
/// position reading 0, and every stabilizer generator to a single-qubit Z.
///
/// For the repetition code this is the CX chain `CX(d-2, d-1) ... CX(0, 1)`,
/// which sends `Z_i Z_{i+1}` to `Z_{i+1}`; for Steane it is the inverse
/// encoder.
pub fn decoding_circuit(code: &CodeSpec) -> Circuit {
    match code {
        CodeSpec::Repetition(d) => {
            let mut c = Circuit::new(*d, 0);
            c.extend((0..d.saturating_sub(1)).rev().map(|i| Gate::cx(i, i + 1)))
                .expect("in range");
            c
        }
        CodeSpec::Steane => inverse_encoder(code),
    }
}

/// The encoder run backwards (every encoder gate is self-inverse).
pub(crate) fn inverse_encoder(code: &CodeSpec) -> Circuit {
    let enc = encoder(code);
    let mut c = Circuit::new(enc.num_qubits(), 0);
    c.extend(enc.gates().iter().rev().cloned())
        .expect("in range");
    c
}

fn parse_basis(basis: &str) -> Result<Vec<bool>, CodeError> {
    basis
        .chars()
        .map(|ch| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(CodeError::BadBasis(basis.to_string())),
        })
        .collect()
}

/// Prepares logical basis state `basis` (logical qubit 0 leftmost) on
/// `basis.len()` blocks in the interleaved layout.
pub fn state_prep(code: &CodeSpec, basis: &str) -> Result<Circuit, CodeError> {
    state_prep_with_layout(code, basis, LayoutKind::Interleaved)
}

pub fn state_prep_with_layout(
    code: &CodeSpec,
    basis: &str,
    layout: LayoutKind,
) -> Result<Circuit, CodeError> {
    let bits = parse_basis(basis)?;
    let l = bits.len();
    let n = code.block_size();
    let mut c = Circuit::new(l * n, 0);
    for (j, &bit) in bits.iter().enumerate() {
        let block: Vec<usize> = (0..n).map(|k| layout.index(l, n, j, k)).collect();
        block_prep(code, bit, &block, &mut c)?;
    }
    Ok(c)
}

pub(crate) fn block_prep(
    code: &CodeSpec,
    bit: bool,
    block: &[usize],
    c: &mut Circuit,
) -> Result<(), CodeError> {
    match code {
        CodeSpec::Repetition(_) => {
            if bit {
                c.extend(block.iter().map(|&q| Gate::x(q)))?;
            }
        }
        CodeSpec::Steane => {
            if bit {
                c.push(Gate::x(block[code.primary()]))?;
            }
            c.append_mapped(&encoder(code), block, &[])?;
        }
    }
    Ok(())
}

/// Shor-style extraction of a weight-2 Z generator with a two-qubit cat.
///
/// Qubits `0..block_size` are the data block, `block_size` and
/// `block_size + 1` the cat ancillas; the two classical bits hold the cat
/// readouts and their parity is the syndrome.
pub fn ss_extraction_circuit(code: &CodeSpec, gen: &PauliString) -> Result<Circuit, CodeError> {
    let support = gen.support();
    if support.len() != 2 || !gen.is_z_type() || gen.len() != code.block_size() {
        return Err(CodeError::UnsupportedGenerator(gen.to_string()));
    }
    let n = code.block_size();
    let (a0, a1) = (n, n + 1);
    let mut c = Circuit::new(n + 2, 2);
    c.extend([
        Gate::h(a0),
        Gate::cx(a0, a1),
        Gate::cx(support[0], a0),
        Gate::cx(support[1], a1),
        Gate::measure(a0, 0),
        Gate::measure(a1, 1),
    ])?;
    Ok(c)
}

/// `t + 3h` for a logical payload circuit.
pub fn census_c(logical: &Circuit) -> Result<usize, CodeError> {
    gate_census(logical)
        .map(|census| census.c())
        .map_err(CodeError::UnsupportedGate)
}
