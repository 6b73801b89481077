//! Flat circuit representation shared by every backend.
//!
//! A [`Circuit`] is an ordered list of [`Gate`]s over a register of physical
//! qubits and a register of classical bits. Qubit 0 (and classical bit 0) is
//! always the leftmost character of any emitted bitstring.
//!
//! Two extensions exist on top of the plain Clifford gate set:
//!
//! * any gate may be flagged `ideal`, in which case no backend attaches noise
//!   to it (used for offline ancilla preparation and noiseless reference
//!   fragments);
//! * [`GateKind::LogicalFault`] is a multi-qubit noise-only instruction that
//!   injects a logical Pauli on a repetition block with rate `kappa * p^n`.

mod census;
mod text;

pub use census::{gate_census, GateCensus};
pub use text::{parse_circuit, serialize_circuit, ParseError};

use smallvec::SmallVec;
use std::fmt;
use thiserror::Error;

/// Operand list for a gate; at most two qubits except for logical faults.
pub type Qubits = SmallVec<[usize; 2]>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    CX,
    CZ,
    /// Z-basis measurement of one qubit into one classical bit.
    Measure,
    /// Reset one qubit to |0>.
    Reset,
    /// X applied when the classical bit reads 1.
    CondX,
    /// Z applied when the classical bit reads 1.
    CondZ,
    /// Noise-only logical fault on a repetition block (see module docs).
    LogicalFault,
}

impl GateKind {
    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::CX => "cx",
            GateKind::CZ => "cz",
            GateKind::Measure => "measure",
            GateKind::Reset => "reset",
            GateKind::CondX => "condx",
            GateKind::CondZ => "condz",
            GateKind::LogicalFault => "lfault",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        Some(match s {
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "h" => GateKind::H,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "cx" => GateKind::CX,
            "cz" => GateKind::CZ,
            "measure" => GateKind::Measure,
            "reset" => GateKind::Reset,
            "condx" => GateKind::CondX,
            "condz" => GateKind::CondZ,
            "lfault" => GateKind::LogicalFault,
            _ => return None,
        })
    }

    /// Number of qubit operands, `None` for variable arity.
    pub fn qubit_arity(self) -> Option<usize> {
        match self {
            GateKind::CX | GateKind::CZ => Some(2),
            GateKind::LogicalFault => None,
            _ => Some(1),
        }
    }

    pub fn has_clbit(self) -> bool {
        matches!(self, GateKind::Measure | GateKind::CondX | GateKind::CondZ)
    }

    pub fn is_conditional(self) -> bool {
        matches!(self, GateKind::CondX | GateKind::CondZ)
    }

    /// Unitary single- or two-qubit Clifford gate.
    pub fn is_unitary(self) -> bool {
        matches!(
            self,
            GateKind::X
                | GateKind::Y
                | GateKind::Z
                | GateKind::H
                | GateKind::S
                | GateKind::Sdg
                | GateKind::CX
                | GateKind::CZ
        )
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Qubits,
    /// Classical operand: the measured bit for `Measure`, the condition for `CondX`/`CondZ`.
    pub clbit: Option<usize>,
    /// Never receives noise.
    pub ideal: bool,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize], clbit: Option<usize>) -> Self {
        Gate {
            kind,
            qubits: Qubits::from_slice(qubits),
            clbit,
            ideal: false,
        }
    }

    fn one(kind: GateKind, q: usize) -> Self {
        Gate::new(kind, &[q], None)
    }

    pub fn x(q: usize) -> Self {
        Gate::one(GateKind::X, q)
    }
    pub fn y(q: usize) -> Self {
        Gate::one(GateKind::Y, q)
    }
    pub fn z(q: usize) -> Self {
        Gate::one(GateKind::Z, q)
    }
    pub fn h(q: usize) -> Self {
        Gate::one(GateKind::H, q)
    }
    pub fn s(q: usize) -> Self {
        Gate::one(GateKind::S, q)
    }
    pub fn sdg(q: usize) -> Self {
        Gate::one(GateKind::Sdg, q)
    }
    pub fn reset(q: usize) -> Self {
        Gate::one(GateKind::Reset, q)
    }
    pub fn cx(control: usize, target: usize) -> Self {
        Gate::new(GateKind::CX, &[control, target], None)
    }
    pub fn cz(a: usize, b: usize) -> Self {
        Gate::new(GateKind::CZ, &[a, b], None)
    }
    pub fn measure(q: usize, c: usize) -> Self {
        Gate::new(GateKind::Measure, &[q], Some(c))
    }
    pub fn cond_x(c: usize, q: usize) -> Self {
        Gate::new(GateKind::CondX, &[q], Some(c))
    }
    pub fn cond_z(c: usize, q: usize) -> Self {
        Gate::new(GateKind::CondZ, &[q], Some(c))
    }
    pub fn logical_fault(qubits: &[usize]) -> Self {
        Gate::new(GateKind::LogicalFault, qubits, None)
    }

    /// Marks the gate as noiseless.
    pub fn ideal(mut self) -> Self {
        self.ideal = true;
        self
    }

    pub fn with_ideal(mut self, ideal: bool) -> Self {
        self.ideal = ideal;
        self
    }

    pub fn arity(&self) -> usize {
        self.qubits.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("qubit {index} out of range (register has {size} qubits)")]
    QubitOutOfRange { index: usize, size: usize },
    #[error("classical bit {index} out of range (register has {size} bits)")]
    ClbitOutOfRange { index: usize, size: usize },
    #[error("{kind} expects {expected} qubit operand(s), got {got}")]
    Arity {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("{kind} requires a classical bit operand")]
    MissingClbit { kind: GateKind },
    #[error("{kind} takes no classical bit operand")]
    UnexpectedClbit { kind: GateKind },
    #[error("qubit {0} used twice in one gate")]
    RepeatedQubit(usize),
    #[error("classical bit {0} is read by a condition but was never measured")]
    UnmeasuredCondition(usize),
    #[error("classical bit {0} is measured more than once before a condition reads it")]
    AmbiguousCondition(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Circuit {
    num_qubits: usize,
    num_clbits: usize,
    gates: Vec<Gate>,
    // Number of Measure gates targeting each classical bit so far.
    writes: Vec<u32>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Circuit {
            num_qubits,
            num_clbits,
            gates: Vec::new(),
            writes: vec![0; num_clbits],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Grows the qubit register; existing indices are unaffected.
    pub fn grow_qubits(&mut self, num_qubits: usize) {
        self.num_qubits = self.num_qubits.max(num_qubits);
    }

    /// Grows the classical register; existing indices are unaffected.
    pub fn grow_clbits(&mut self, num_clbits: usize) {
        if num_clbits > self.num_clbits {
            self.num_clbits = num_clbits;
            self.writes.resize(num_clbits, 0);
        }
    }

    /// Allocates a fresh classical bit and returns its index.
    pub fn add_clbit(&mut self) -> usize {
        self.grow_clbits(self.num_clbits + 1);
        self.num_clbits - 1
    }

    fn check(&self, gate: &Gate) -> Result<(), CircuitError> {
        if let Some(expected) = gate.kind.qubit_arity() {
            if gate.qubits.len() != expected {
                return Err(CircuitError::Arity {
                    kind: gate.kind,
                    expected,
                    got: gate.qubits.len(),
                });
            }
        } else if gate.qubits.is_empty() {
            return Err(CircuitError::Arity {
                kind: gate.kind,
                expected: 1,
                got: 0,
            });
        }
        for (i, &q) in gate.qubits.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    index: q,
                    size: self.num_qubits,
                });
            }
            if gate.qubits[..i].contains(&q) {
                return Err(CircuitError::RepeatedQubit(q));
            }
        }
        match (gate.kind.has_clbit(), gate.clbit) {
            (true, None) => return Err(CircuitError::MissingClbit { kind: gate.kind }),
            (false, Some(_)) => return Err(CircuitError::UnexpectedClbit { kind: gate.kind }),
            (true, Some(c)) => {
                if c >= self.num_clbits {
                    return Err(CircuitError::ClbitOutOfRange {
                        index: c,
                        size: self.num_clbits,
                    });
                }
                if gate.kind.is_conditional() {
                    match self.writes[c] {
                        0 => return Err(CircuitError::UnmeasuredCondition(c)),
                        1 => {}
                        _ => return Err(CircuitError::AmbiguousCondition(c)),
                    }
                }
            }
            (false, None) => {}
        }
        Ok(())
    }

    /// Appends a gate after validating it against the registers.
    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        self.check(&gate)?;
        if gate.kind == GateKind::Measure {
            let c = gate.clbit.expect("checked");
            self.writes[c] = self.writes[c].saturating_add(1);
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> Result<(), CircuitError> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Concatenates `other` after `self`, growing registers as needed.
    pub fn append(&mut self, other: &Circuit) -> Result<(), CircuitError> {
        self.grow_qubits(other.num_qubits);
        self.grow_clbits(other.num_clbits);
        self.extend(other.gates.iter().cloned())
    }

    /// Appends `other` with its qubit `i` mapped to `qubit_map[i]` and its
    /// classical bit `j` mapped to `clbit_map[j]`.
    pub fn append_mapped(
        &mut self,
        other: &Circuit,
        qubit_map: &[usize],
        clbit_map: &[usize],
    ) -> Result<(), CircuitError> {
        for g in &other.gates {
            let mut mapped = g.clone();
            for q in mapped.qubits.iter_mut() {
                *q = *qubit_map.get(*q).ok_or(CircuitError::QubitOutOfRange {
                    index: *q,
                    size: qubit_map.len(),
                })?;
            }
            if let Some(c) = mapped.clbit.as_mut() {
                *c = *clbit_map.get(*c).ok_or(CircuitError::ClbitOutOfRange {
                    index: *c,
                    size: clbit_map.len(),
                })?;
            }
            self.push(mapped)?;
        }
        Ok(())
    }

    /// Builds a circuit from a gate list, validating every gate.
    pub fn from_gates(
        num_qubits: usize,
        num_clbits: usize,
        gates: impl IntoIterator<Item = Gate>,
    ) -> Result<Self, CircuitError> {
        let mut c = Circuit::new(num_qubits, num_clbits);
        c.extend(gates)?;
        Ok(c)
    }

    /// Same circuit with every gate flagged noiseless.
    pub fn into_ideal(self) -> Self {
        self.with_ideal(true)
    }

    /// Same circuit with every gate's noiseless flag set to `ideal`.
    pub fn with_ideal(mut self, ideal: bool) -> Self {
        for g in &mut self.gates {
            g.ideal = ideal;
        }
        self
    }

    /// Index one past the last non-measurement gate; gates from here on are
    /// the trailing measurement layer.
    pub fn trailing_measurements_start(&self) -> usize {
        self.gates
            .iter()
            .rposition(|g| g.kind != GateKind::Measure)
            .map_or(0, |i| i + 1)
    }

    /// For every classical bit, the gate index of the last condition reading it.
    pub fn last_reads(&self) -> Vec<Option<usize>> {
        let mut last = vec![None; self.num_clbits];
        for (i, g) in self.gates.iter().enumerate() {
            if g.kind.is_conditional() {
                last[g.clbit.expect("validated")] = Some(i);
            }
        }
        last
    }

    pub fn has_mid_circuit_feedback(&self) -> bool {
        self.gates.iter().any(|g| g.kind.is_conditional())
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_circuit(self))
    }
}
