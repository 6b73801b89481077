use super::{Circuit, GateKind};
use serde::{Deserialize, Serialize};
use std::ops::Add;

/// Gate counts entering the threshold formula: `t` transversal-compilable
/// gates and `h` Hadamards.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCensus {
    pub t: usize,
    pub h: usize,
}

impl GateCensus {
    /// `t + 3h`: every Hadamard costs three transversal layers in the gadget.
    pub fn c(&self) -> usize {
        self.t + 3 * self.h
    }
}

impl Add for GateCensus {
    type Output = GateCensus;
    fn add(self, rhs: GateCensus) -> GateCensus {
        GateCensus {
            t: self.t + rhs.t,
            h: self.h + rhs.h,
        }
    }
}

/// Counts the logical gates of `c`. Measurements and resets are not counted.
pub fn gate_census(c: &Circuit) -> Result<GateCensus, GateKind> {
    let mut census = GateCensus::default();
    for g in c.gates() {
        match g.kind {
            GateKind::X
            | GateKind::Y
            | GateKind::Z
            | GateKind::S
            | GateKind::Sdg
            | GateKind::CX
            | GateKind::CZ
            | GateKind::CondX
            | GateKind::CondZ => census.t += 1,
            GateKind::H => census.h += 1,
            GateKind::Measure | GateKind::Reset => {}
            GateKind::LogicalFault => return Err(g.kind),
        }
    }
    Ok(census)
}
