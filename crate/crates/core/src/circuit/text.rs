//! Line-based text format.
//!
//! ```text
//! # comment
//! qubits 3
//! clbits 1
//! h 0
//! cx 0 1
//! measure 1 -> 0
//! condx 0 2
//! ideal x 2
//! ```
//!
//! `qubits` must be the first statement. A leading `ideal` marks a gate as
//! noiseless; `lfault q...` is the logical-fault instruction.

use super::{Circuit, CircuitError, Gate, GateKind};
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected `qubits <n>` as the first statement")]
    MissingHeader,
    #[error("unknown instruction `{0}`")]
    UnknownInstruction(String),
    #[error("invalid integer `{0}`")]
    BadInteger(String),
    #[error("`{0}` expects {1}")]
    Syntax(&'static str, &'static str),
    #[error("duplicate `{0}` declaration")]
    Duplicate(&'static str),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

fn int(tok: &str) -> Result<usize, ParseErrorKind> {
    tok.parse()
        .map_err(|_| ParseErrorKind::BadInteger(tok.to_string()))
}

fn parse_gate(tokens: &[&str]) -> Result<Gate, ParseErrorKind> {
    let (ideal, tokens) = match tokens.first() {
        Some(&"ideal") => (true, &tokens[1..]),
        _ => (false, tokens),
    };
    let name = tokens
        .first()
        .ok_or(ParseErrorKind::Syntax("ideal", "a gate after it"))?;
    let kind = GateKind::from_mnemonic(name)
        .ok_or_else(|| ParseErrorKind::UnknownInstruction(name.to_string()))?;
    let args = &tokens[1..];
    let gate = match kind {
        GateKind::Measure => match args {
            [q, "->", c] => Gate::measure(int(q)?, int(c)?),
            _ => return Err(ParseErrorKind::Syntax("measure", "`measure <q> -> <c>`")),
        },
        GateKind::CondX | GateKind::CondZ => match args {
            [c, q] => Gate::new(kind, &[int(q)?], Some(int(c)?)),
            _ => return Err(ParseErrorKind::Syntax(kind.mnemonic(), "`<c> <q>`")),
        },
        _ => {
            let qubits = args.iter().map(|t| int(t)).collect::<Result<Vec<_>, _>>()?;
            Gate::new(kind, &qubits, None)
        }
    };
    Ok(gate.with_ideal(ideal))
}

/// Parses the text format into a validated [`Circuit`].
pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut circuit: Option<Circuit> = None;
    let mut saw_clbits = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |kind| ParseError { line, kind };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match (&mut circuit, tokens[0]) {
            (None, "qubits") => match tokens[1..] {
                [n] => circuit = Some(Circuit::new(int(n).map_err(err)?, 0)),
                _ => return Err(err(ParseErrorKind::Syntax("qubits", "one integer"))),
            },
            (None, _) => return Err(err(ParseErrorKind::MissingHeader)),
            (Some(_), "qubits") => return Err(err(ParseErrorKind::Duplicate("qubits"))),
            (Some(c), "clbits") => {
                if saw_clbits {
                    return Err(err(ParseErrorKind::Duplicate("clbits")));
                }
                saw_clbits = true;
                match tokens[1..] {
                    [n] => c.grow_clbits(int(n).map_err(err)?),
                    _ => return Err(err(ParseErrorKind::Syntax("clbits", "one integer"))),
                }
            }
            (Some(c), _) => {
                let gate = parse_gate(&tokens).map_err(err)?;
                c.push(gate).map_err(|e| err(e.into()))?;
            }
        }
    }
    circuit.ok_or(ParseError {
        line: 0,
        kind: ParseErrorKind::MissingHeader,
    })
}

/// Renders a circuit in the text format; `parse_circuit` inverts it.
pub fn serialize_circuit(c: &Circuit) -> String {
    let mut out = format!("qubits {}", c.num_qubits());
    if c.num_clbits() > 0 {
        let _ = write!(out, "\nclbits {}", c.num_clbits());
    }
    for g in c.gates() {
        out.push('\n');
        if g.ideal {
            out.push_str("ideal ");
        }
        out.push_str(g.kind.mnemonic());
        match g.kind {
            GateKind::Measure => {
                let _ = write!(out, " {} -> {}", g.qubits[0], g.clbit.unwrap_or_default());
            }
            GateKind::CondX | GateKind::CondZ => {
                let _ = write!(out, " {} {}", g.clbit.unwrap_or_default(), g.qubits[0]);
            }
            _ => {
                for q in &g.qubits {
                    let _ = write!(out, " {q}");
                }
            }
        }
    }
    out
}
