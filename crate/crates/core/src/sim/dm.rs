//! Exact backend.
//!
//! Mixed states are dense `2^n x 2^n` matrices; qubit `q` is bit `q` of a
//! basis index. Mid-circuit measurements branch on the recorded classical
//! value, and branches whose live classical bits agree are summed. The
//! trailing measurement layer is read off the final diagonals instead of
//! branching. Noiseless runs use pure-state branches, which reach larger
//! registers.

use super::{bits_to_key, OutcomeDistribution, SimError};
use crate::circuit::{Circuit, Gate, GateKind};
use crate::codes::PauliString;
use crate::noise::{Convention, NoiseModel, Pauli};
use num_complex::Complex64 as C;
use std::collections::BTreeMap;

const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);
const DROP: f64 = 1e-15;

/// Index map and phase of a monomial gate: `U|i> = phase |j>`.
fn monomial(kind: GateKind, qubits: &[usize]) -> Option<impl Fn(usize) -> (usize, C)> {
    let a = 1usize << qubits[0];
    let b = qubits.get(1).map_or(0, |&q| 1usize << q);
    let sign = |neg: bool| {
        if neg {
            C::new(-1.0, 0.0)
        } else {
            C::new(1.0, 0.0)
        }
    };
    let one = C::new(1.0, 0.0);
    let f = move |i: usize| -> (usize, C) {
        let on = i & a != 0;
        match kind {
            GateKind::X => (i ^ a, one),
            // Y|0> = i|1>, Y|1> = -i|0>.
            GateKind::Y => (i ^ a, if on { -I } else { I }),
            GateKind::Z => (i, sign(on)),
            GateKind::S => (i, if on { I } else { one }),
            GateKind::Sdg => (i, if on { -I } else { one }),
            GateKind::CX => (if on { i ^ b } else { i }, one),
            GateKind::CZ => (i, sign(on && i & b != 0)),
            _ => unreachable!("not monomial"),
        }
    };
    matches!(
        kind,
        GateKind::X
            | GateKind::Y
            | GateKind::Z
            | GateKind::S
            | GateKind::Sdg
            | GateKind::CX
            | GateKind::CZ
    )
    .then_some(f)
}

/// Masks and phase exponent of a Pauli string: `P|i> = i^k (-1)^{|i & z|} |i ^ x>`.
fn pauli_masks(letters: &[(usize, Pauli)]) -> (usize, usize, u8) {
    let (mut x, mut z, mut k) = (0usize, 0usize, 0u8);
    for &(q, l) in letters {
        let (lx, lz) = l.xz();
        if lx {
            x |= 1 << q;
        }
        if lz {
            z |= 1 << q;
        }
        if lx && lz {
            k += 1;
        }
    }
    (x, z, k % 4)
}

fn parity(v: usize) -> bool {
    v.count_ones() % 2 == 1
}

fn check_cap(n: usize, cap: usize) -> Result<(), SimError> {
    if n > cap {
        Err(SimError::RegisterTooLarge { qubits: n, cap })
    } else {
        Ok(())
    }
}

/// Unnormalised density matrix; its trace is the weight of the branch.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    n: usize,
    dim: usize,
    data: Vec<C>,
}

impl DensityState {
    /// `|0...0><0...0|` on `n` qubits.
    pub fn zero(n: usize) -> Self {
        let dim = 1usize << n;
        let mut data = vec![ZERO; dim * dim];
        data[0] = C::new(1.0, 0.0);
        DensityState { n, dim, data }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, r: usize, c: usize) -> C {
        self.data[r * self.dim + c]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Largest `|rho - rho^dagger|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.data[r * d + c] - self.data[c * d + r].conj()).norm());
            }
        }
        worst
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim + i].re)
            .collect()
    }

    fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    fn add_scaled(&mut self, other: &DensityState, s: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    fn apply_monomial(&mut self, f: impl Fn(usize) -> (usize, C)) {
        let d = self.dim;
        let map: Vec<(usize, C)> = (0..d).map(f).collect();
        let mut out = vec![ZERO; d * d];
        for (r, &(rr, pr)) in map.iter().enumerate() {
            let row = &self.data[r * d..(r + 1) * d];
            let dst = &mut out[rr * d..(rr + 1) * d];
            for (c, &(cc, pc)) in map.iter().enumerate() {
                dst[cc] = pr * row[c] * pc.conj();
            }
        }
        self.data = out;
    }

    fn apply_h(&mut self, q: usize) {
        let d = self.dim;
        let bit = 1usize << q;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // Rows, then columns (H is real symmetric).
        for r0 in (0..d).filter(|r| r & bit == 0) {
            let r1 = r0 | bit;
            for c in 0..d {
                let (a, b) = (self.data[r0 * d + c], self.data[r1 * d + c]);
                self.data[r0 * d + c] = (a + b) * s;
                self.data[r1 * d + c] = (a - b) * s;
            }
        }
        for r in 0..d {
            let row = &mut self.data[r * d..(r + 1) * d];
            for c0 in (0..d).filter(|c| c & bit == 0) {
                let c1 = c0 | bit;
                let (a, b) = (row[c0], row[c1]);
                row[c0] = (a + b) * s;
                row[c1] = (a - b) * s;
            }
        }
    }

    /// `rho -> U rho U^dagger` for a unitary Clifford gate.
    pub fn apply_unitary(&mut self, kind: GateKind, qubits: &[usize]) {
        if kind == GateKind::H {
            self.apply_h(qubits[0]);
        } else if let Some(f) = monomial(kind, qubits) {
            self.apply_monomial(f);
        } else {
            panic!("{kind} is not unitary");
        }
    }

    /// `rho -> P rho P^dagger`.
    pub fn apply_pauli(&mut self, letters: &[(usize, Pauli)]) {
        let (x, z, _) = pauli_masks(letters);
        self.apply_monomial(|i| {
            (
                i ^ x,
                if parity(i & z) {
                    C::new(-1.0, 0.0)
                } else {
                    C::new(1.0, 0.0)
                },
            )
        });
    }

    // rho -> (1 - lambda) rho + lambda Tr_q(rho) (x) I/2
    fn twirl(&mut self, q: usize, lambda: f64) {
        let d = self.dim;
        let bit = 1usize << q;
        let keep = 1.0 - lambda;
        for r0 in (0..d).filter(|r| r & bit == 0) {
            let r1 = r0 | bit;
            for c0 in (0..d).filter(|c| c & bit == 0) {
                let c1 = c0 | bit;
                let (a, b) = (self.data[r0 * d + c0], self.data[r1 * d + c1]);
                let avg = (a + b) * 0.5;
                self.data[r0 * d + c0] = a * keep + avg * lambda;
                self.data[r1 * d + c1] = b * keep + avg * lambda;
                self.data[r0 * d + c1] *= keep;
                self.data[r1 * d + c0] *= keep;
            }
        }
    }

    /// Depolarizing channel of rate `p` on one or two qubits.
    pub fn depolarize(&mut self, qubits: &[usize], p: f64, convention: Convention) {
        match (convention, qubits) {
            (Convention::MaximallyMixed, _) => {
                for &q in qubits {
                    self.twirl(q, p);
                }
            }
            (Convention::PauliTotal, [q]) => self.twirl(*q, 4.0 * p / 3.0),
            (Convention::PauliTotal, [a, b]) => {
                let mut t = self.clone();
                t.twirl(*a, 1.0);
                t.twirl(*b, 1.0);
                let lambda = 16.0 * p / 15.0;
                self.scale(1.0 - lambda);
                self.add_scaled(&t, lambda);
            }
            _ => panic!("depolarizing arity {}", qubits.len()),
        }
    }

    /// X_L, Y_L or Z_L on the block, each with probability `q / 3`.
    pub fn logical_fault(&mut self, block: &[usize], q: f64) {
        let mut acc = self.clone();
        acc.scale(1.0 - q);
        for (x, z) in [(true, false), (true, true), (false, true)] {
            let letters: Vec<(usize, Pauli)> = block
                .iter()
                .enumerate()
                .map(|(i, &b)| (b, Pauli::from_xz(x, z && i == 0)))
                .collect();
            let mut t = self.clone();
            t.apply_pauli(&letters);
            acc.add_scaled(&t, q / 3.0);
        }
        *self = acc;
    }

    /// `P_b rho P_b` for outcome `b` on qubit `q` (unnormalised).
    pub fn project(&self, q: usize, b: bool) -> DensityState {
        let d = self.dim;
        let bit = 1usize << q;
        let mut out = self.clone();
        for r in 0..d {
            for c in 0..d {
                if ((r & bit != 0) != b) || ((c & bit != 0) != b) {
                    out.data[r * d + c] = ZERO;
                }
            }
        }
        out
    }

    /// Resets qubit `q` to |0> (measure and flip).
    pub fn reset(&mut self, q: usize) {
        let d = self.dim;
        let bit = 1usize << q;
        for r0 in (0..d).filter(|r| r & bit == 0) {
            for c0 in (0..d).filter(|c| c & bit == 0) {
                let moved = self.data[(r0 | bit) * d + (c0 | bit)];
                self.data[r0 * d + c0] += moved;
            }
        }
        for r in 0..d {
            for c in 0..d {
                if (r | c) & bit != 0 {
                    self.data[r * d + c] = ZERO;
                }
            }
        }
    }

    /// `Tr(P rho)`.
    pub fn expectation(&self, p: &PauliString) -> C {
        let letters: Vec<(usize, Pauli)> = p.letters().iter().copied().enumerate().collect();
        let (x, z, k) = pauli_masks(&letters);
        let global = I.powu(((k + p.phase()) % 4) as u32);
        let d = self.dim;
        // Tr(P rho) = sum_r <r^x|P|r> rho[r, r^x].
        let sum: C = (0..d)
            .map(|r| {
                let s = if parity(r & z) { -1.0 } else { 1.0 };
                self.data[r * d + (r ^ x)] * s
            })
            .sum();
        sum * global
    }

    /// `(I + P)/2 rho (I + P)/2` for a Hermitian Pauli `P` (unnormalised).
    pub fn project_stabilizer(&self, p: &PauliString) -> DensityState {
        let letters: Vec<(usize, Pauli)> = p.letters().iter().copied().enumerate().collect();
        let (x, z, k) = pauli_masks(&letters);
        let global = I.powu(((k + p.phase()) % 4) as u32);
        let ph = |i: usize| if parity(i & z) { -global } else { global };
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        // P rho P^dagger has entry ph(r) conj(ph(c)) rho[r, c] at (r^x, c^x);
        // P rho has ph(r) rho[r, c] at (r^x, c); rho P has rho[r, c^x] ph(c) at (r, c).
        for r in 0..d {
            for c in 0..d {
                let v = self.data[r * d + c];
                out[r * d + c] += v;
                out[(r ^ x) * d + c] += ph(r) * v;
                out[r * d + (c ^ x)] += v * ph(c ^ x);
                out[(r ^ x) * d + (c ^ x)] += ph(r) * v * ph(c).conj();
            }
        }
        for v in &mut out {
            *v *= 0.25;
        }
        DensityState {
            n: self.n,
            dim: d,
            data: out,
        }
    }

    fn apply_gate_noise(&mut self, gate: &Gate, model: &NoiseModel) {
        if let Some(p) = model.gate_rate(gate) {
            if gate.kind == GateKind::LogicalFault {
                self.logical_fault(&gate.qubits, p);
            } else {
                self.depolarize(&gate.qubits, p, model.convention);
            }
        }
    }
}

/// Pure state; amplitudes are unnormalised within a branch.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C>,
}

impl StateVector {
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![ZERO; 1usize << n];
        amps[0] = C::new(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_unitary(&mut self, kind: GateKind, qubits: &[usize]) {
        if kind == GateKind::H {
            let bit = 1usize << qubits[0];
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for i0 in (0..self.amps.len()).filter(|i| i & bit == 0) {
                let (a, b) = (self.amps[i0], self.amps[i0 | bit]);
                self.amps[i0] = (a + b) * s;
                self.amps[i0 | bit] = (a - b) * s;
            }
        } else if let Some(f) = monomial(kind, qubits) {
            let mut out = vec![ZERO; self.amps.len()];
            for (i, &a) in self.amps.iter().enumerate() {
                if a != ZERO {
                    let (j, ph) = f(i);
                    out[j] = ph * a;
                }
            }
            self.amps = out;
        } else {
            panic!("{kind} is not unitary");
        }
    }

    pub fn project(&self, q: usize, b: bool) -> StateVector {
        let bit = 1usize << q;
        let mut out = self.clone();
        for (i, a) in out.amps.iter_mut().enumerate() {
            if (i & bit != 0) != b {
                *a = ZERO;
            }
        }
        out
    }

    /// `<psi|P|psi>`.
    pub fn expectation(&self, p: &PauliString) -> C {
        let letters: Vec<(usize, Pauli)> = p.letters().iter().copied().enumerate().collect();
        let (x, z, k) = pauli_masks(&letters);
        let global = I.powu(((k + p.phase()) % 4) as u32);
        let sum: C = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let s = if parity(i & z) { -1.0 } else { 1.0 };
                self.amps[i ^ x].conj() * a * s
            })
            .sum();
        sum * global
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DmOptions {
    /// Qubit cap for mixed-state runs.
    pub max_qubits: usize,
    /// Qubit cap for noiseless (pure-state) runs.
    pub max_pure_qubits: usize,
    pub max_branches: usize,
    /// Classical bits making up the output keys, in order; all bits if `None`.
    pub output_clbits: Option<Vec<usize>>,
}

impl Default for DmOptions {
    fn default() -> Self {
        DmOptions {
            max_qubits: 12,
            max_pure_qubits: 22,
            max_branches: 1 << 14,
            output_clbits: None,
        }
    }
}

/// Exact output distribution over all classical bits.
pub fn run_dm(circuit: &Circuit, model: &NoiseModel) -> Result<OutcomeDistribution, SimError> {
    run_dm_with(circuit, model, &DmOptions::default())
}

pub fn run_dm_with(
    circuit: &Circuit,
    model: &NoiseModel,
    options: &DmOptions,
) -> Result<OutcomeDistribution, SimError> {
    model.validate()?;
    let outputs: Vec<usize> = options
        .output_clbits
        .clone()
        .unwrap_or_else(|| (0..circuit.num_clbits()).collect());
    if model.is_noiseless() {
        check_cap(circuit.num_qubits(), options.max_pure_qubits)?;
        run_engine::<StateVector>(circuit, model, options, &outputs)
    } else {
        check_cap(circuit.num_qubits(), options.max_qubits)?;
        run_engine::<DensityState>(circuit, model, options, &outputs)
    }
}

/// Final density matrix of a circuit without measurements or conditions.
pub fn final_density(circuit: &Circuit, model: &NoiseModel) -> Result<DensityState, SimError> {
    model.validate()?;
    check_cap(circuit.num_qubits(), DmOptions::default().max_qubits)?;
    let mut rho = DensityState::zero(circuit.num_qubits());
    for g in circuit.gates() {
        match g.kind {
            GateKind::Measure | GateKind::CondX | GateKind::CondZ => {
                return Err(SimError::UnsupportedGate(g.kind))
            }
            GateKind::Reset => rho.reset(g.qubits[0]),
            GateKind::LogicalFault => {}
            k => rho.apply_unitary(k, &g.qubits),
        }
        rho.apply_gate_noise(g, model);
    }
    Ok(rho)
}

// What the branching engine needs from a state representation.
trait Branchable: Clone + Sized {
    fn zero(n: usize) -> Self;
    fn weight(&self) -> f64;
    fn unitary(&mut self, kind: GateKind, qubits: &[usize]);
    fn noise(&mut self, gate: &Gate, model: &NoiseModel);
    fn split(&self, q: usize) -> [Self; 2];
    /// Reset as a set of weighted components.
    fn reset_parts(self, q: usize) -> Vec<Self>;
    fn mix(parts: [(Self, f64); 2]) -> Self;
    /// Unrecorded Z measurement.
    fn dephase(self, q: usize) -> Vec<Self>;
    fn can_merge() -> bool;
    fn merge(&mut self, other: &Self);
    fn probabilities(&self) -> Vec<f64>;
}

impl Branchable for DensityState {
    fn zero(n: usize) -> Self {
        DensityState::zero(n)
    }
    fn weight(&self) -> f64 {
        self.trace()
    }
    fn unitary(&mut self, kind: GateKind, qubits: &[usize]) {
        self.apply_unitary(kind, qubits);
    }
    fn noise(&mut self, gate: &Gate, model: &NoiseModel) {
        self.apply_gate_noise(gate, model);
    }
    fn split(&self, q: usize) -> [Self; 2] {
        [self.project(q, false), self.project(q, true)]
    }
    fn reset_parts(mut self, q: usize) -> Vec<Self> {
        DensityState::reset(&mut self, q);
        vec![self]
    }
    fn mix(parts: [(Self, f64); 2]) -> Self {
        let [(mut a, wa), (b, wb)] = parts;
        a.scale(wa);
        a.add_scaled(&b, wb);
        a
    }
    fn dephase(self, q: usize) -> Vec<Self> {
        let [mut a, b] = self.split(q);
        a.add_scaled(&b, 1.0);
        vec![a]
    }
    fn can_merge() -> bool {
        true
    }
    fn merge(&mut self, other: &Self) {
        self.add_scaled(other, 1.0);
    }
    fn probabilities(&self) -> Vec<f64> {
        self.diagonal()
    }
}

impl Branchable for StateVector {
    fn zero(n: usize) -> Self {
        StateVector::zero(n)
    }
    fn weight(&self) -> f64 {
        self.norm_sqr()
    }
    fn unitary(&mut self, kind: GateKind, qubits: &[usize]) {
        self.apply_unitary(kind, qubits);
    }
    fn noise(&mut self, _: &Gate, _: &NoiseModel) {}
    fn split(&self, q: usize) -> [Self; 2] {
        [self.project(q, false), self.project(q, true)]
    }
    fn reset_parts(self, q: usize) -> Vec<Self> {
        let [a, mut b] = self.split(q);
        b.apply_unitary(GateKind::X, &[q]);
        vec![a, b]
    }
    fn mix(parts: [(Self, f64); 2]) -> Self {
        // Only reached with a zero flip probability.
        let [(a, _), _] = parts;
        a
    }
    fn dephase(self, q: usize) -> Vec<Self> {
        self.split(q).into()
    }
    fn can_merge() -> bool {
        false
    }
    fn merge(&mut self, _: &Self) {
        unreachable!("pure branches are never merged")
    }
    fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

struct Branch<S> {
    bits: Vec<u8>,
    state: S,
}

fn run_engine<S: Branchable>(
    circuit: &Circuit,
    model: &NoiseModel,
    options: &DmOptions,
    outputs: &[usize],
) -> Result<OutcomeDistribution, SimError> {
    let nc = circuit.num_clbits();
    let last_reads = circuit.last_reads();
    let mut is_output = vec![false; nc];
    for &c in outputs {
        is_output[c] = true;
    }
    // A classical bit is live at gate i if it is an output or read after i.
    let live = |c: usize, i: usize| is_output[c] || last_reads[c].is_some_and(|r| r > i);
    let tail = circuit.trailing_measurements_start();
    let pm = model.p_meas;

    let mut branches = vec![Branch {
        bits: vec![0u8; nc],
        state: S::zero(circuit.num_qubits()),
    }];
    for (i, g) in circuit.gates()[..tail].iter().enumerate() {
        match g.kind {
            GateKind::Measure => {
                let (q, c) = (g.qubits[0], g.clbit.expect("validated"));
                let mut next = Vec::with_capacity(branches.len() * 2);
                for Branch { bits, state } in branches {
                    if !live(c, i) {
                        next.extend(state.dephase(q).into_iter().map(|s| Branch {
                            bits: bits.clone(),
                            state: s,
                        }));
                        continue;
                    }
                    let [s0, s1] = state.split(q);
                    let recorded = if pm > 0.0 {
                        [
                            S::mix([(s0.clone(), 1.0 - pm), (s1.clone(), pm)]),
                            S::mix([(s0, pm), (s1, 1.0 - pm)]),
                        ]
                    } else {
                        [s0, s1]
                    };
                    for (v, s) in recorded.into_iter().enumerate() {
                        let mut bits = bits.clone();
                        bits[c] = v as u8;
                        next.push(Branch { bits, state: s });
                    }
                }
                branches = next;
            }
            GateKind::CondX | GateKind::CondZ => {
                let c = g.clbit.expect("validated");
                let kind = if g.kind == GateKind::CondX {
                    GateKind::X
                } else {
                    GateKind::Z
                };
                for b in &mut branches {
                    if b.bits[c] == 1 {
                        b.state.unitary(kind, &g.qubits);
                    }
                }
                for b in &mut branches {
                    if !live(c, i) {
                        b.bits[c] = 0;
                    }
                }
            }
            GateKind::Reset => {
                let q = g.qubits[0];
                branches = branches
                    .into_iter()
                    .flat_map(|Branch { bits, state }| {
                        state.reset_parts(q).into_iter().map(move |s| Branch {
                            bits: bits.clone(),
                            state: s,
                        })
                    })
                    .collect();
                for b in &mut branches {
                    b.state.noise(g, model);
                }
            }
            GateKind::LogicalFault => {
                for b in &mut branches {
                    b.state.noise(g, model);
                }
            }
            kind => {
                for b in &mut branches {
                    b.state.unitary(kind, &g.qubits);
                    b.state.noise(g, model);
                }
            }
        }
        branches.retain(|b| b.state.weight() > DROP);
        if S::can_merge() && g.kind.has_clbit() {
            let mut merged: BTreeMap<Vec<u8>, S> = BTreeMap::new();
            for Branch { bits, state } in branches {
                match merged.get_mut(&bits) {
                    Some(s) => s.merge(&state),
                    None => {
                        merged.insert(bits, state);
                    }
                }
            }
            branches = merged
                .into_iter()
                .map(|(bits, state)| Branch { bits, state })
                .collect();
        }
        if branches.len() > options.max_branches {
            return Err(SimError::TooManyBranches(options.max_branches));
        }
    }

    // Trailing layer: read classical values off the final diagonals.
    let finals: Vec<(usize, usize)> = circuit.gates()[tail..]
        .iter()
        .map(|g| (g.qubits[0], g.clbit.expect("validated")))
        .collect();
    let mut dist: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    for Branch { bits, state } in branches {
        let mut bits = bits;
        for (idx, p) in state.probabilities().into_iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            for &(q, c) in &finals {
                bits[c] = ((idx >> q) & 1) as u8;
            }
            *dist.entry(bits.clone()).or_insert(0.0) += p;
        }
    }
    if pm > 0.0 {
        for &(_, c) in &finals {
            let mut flipped: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
            for (bits, p) in dist {
                let mut other = bits.clone();
                other[c] ^= 1;
                *flipped.entry(bits).or_insert(0.0) += p * (1.0 - pm);
                *flipped.entry(other).or_insert(0.0) += p * pm;
            }
            dist = flipped;
        }
    }
    Ok(dist
        .into_iter()
        .map(|(bits, p)| {
            let key: Vec<u8> = outputs.iter().map(|&c| bits[c]).collect();
            (bits_to_key(&key), p)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    fn dm(src: &str, model: &NoiseModel) -> OutcomeDistribution {
        run_dm(&parse_circuit(src).unwrap(), model).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn hadamard_gives_fair_coin() {
        let d = dm(
            "qubits 1\nclbits 1\nh 0\nmeasure 0 -> 0",
            &NoiseModel::noiseless(),
        );
        assert_close(d.get("0"), 0.5, 1e-15);
        assert_close(d.get("1"), 0.5, 1e-15);
        let noisy = NoiseModel::uniform(0.2).unwrap();
        let d = dm("qubits 1\nclbits 1\nh 0\nmeasure 0 -> 0", &noisy);
        assert_close(d.get("0"), 0.5, 1e-15);
    }

    #[test]
    fn bell_state_keys_are_clbit_ordered() {
        let d = dm(
            "qubits 3\nclbits 3\nx 2\nh 0\ncx 0 1\nmeasure 0 -> 0\nmeasure 1 -> 1\nmeasure 2 -> 2",
            &NoiseModel::noiseless(),
        );
        assert_eq!(d.probs.len(), 2);
        assert_close(d.get("001"), 0.5, 1e-15);
        assert_close(d.get("111"), 0.5, 1e-15);
    }

    #[test]
    fn bit_flip_rate_of_one_noisy_gate() {
        let p = 0.09;
        let model = NoiseModel::uniform(p).unwrap();
        let d = dm("qubits 1\nclbits 1\nx 0\nmeasure 0 -> 0", &model);
        assert_close(d.get("0"), 2.0 * p / 3.0, 1e-15);
        let d = dm(
            "qubits 1\nclbits 1\nx 0\nmeasure 0 -> 0",
            &model.with_convention(Convention::MaximallyMixed),
        );
        assert_close(d.get("0"), p / 2.0, 1e-15);
        // Each qubit of a CX sees X or Y on it in 8 of the 15 Paulis.
        let d = dm(
            "qubits 2\nclbits 2\ncx 0 1\nmeasure 0 -> 0\nmeasure 1 -> 1",
            &model,
        );
        assert_close(d.get("10") + d.get("11"), 8.0 * p / 15.0, 1e-15);
        assert_close(d.get("11"), 4.0 * p / 15.0, 1e-15);
    }

    #[test]
    fn measurement_flip() {
        let model = NoiseModel::noiseless().with_p_meas(0.25);
        let d = dm("qubits 1\nclbits 1\nmeasure 0 -> 0", &model);
        assert_close(d.get("1"), 0.25, 1e-15);
        // Mid-circuit flips propagate through conditions.
        let d = dm(
            "qubits 2\nclbits 2\nmeasure 0 -> 0\ncondx 0 1\nmeasure 1 -> 1",
            &model,
        );
        assert_close(d.get("11"), 0.25 * 0.75, 1e-15);
        assert_close(d.get("10"), 0.25 * 0.25, 1e-15);
    }

    #[test]
    fn teleportation_branches_merge() {
        // Teleport |1> from qubit 0 to qubit 2.
        let src = "qubits 3\nclbits 3\nx 0\nh 1\ncx 1 2\ncx 0 1\nh 0\nmeasure 0 -> 0\nmeasure 1 -> 1\ncondx 1 2\ncondz 0 2\nmeasure 2 -> 2";
        let c = parse_circuit(src).unwrap();
        for model in [NoiseModel::noiseless(), NoiseModel::uniform(1e-9).unwrap()] {
            let opts = DmOptions {
                output_clbits: Some(vec![2]),
                ..Default::default()
            };
            let d = run_dm_with(&c, &model, &opts).unwrap();
            assert_close(d.get("1"), 1.0, 1e-8);
        }
    }

    #[test]
    fn reset_returns_to_zero() {
        let d = dm(
            "qubits 2\nclbits 2\nh 0\ncx 0 1\nreset 0\nmeasure 0 -> 0\nmeasure 1 -> 1",
            &NoiseModel::noiseless(),
        );
        assert_close(d.get("00"), 0.5, 1e-15);
        assert_close(d.get("01"), 0.5, 1e-15);
        let model = NoiseModel::uniform(0.3).unwrap();
        let d = dm("qubits 1\nclbits 1\nx 0\nreset 0\nmeasure 0 -> 0", &model);
        assert_close(d.get("1"), 0.2, 1e-15);
    }

    #[test]
    fn register_cap() {
        let c = Circuit::new(13, 0);
        assert_eq!(
            run_dm(&c, &NoiseModel::uniform(0.1).unwrap()),
            Err(SimError::RegisterTooLarge {
                qubits: 13,
                cap: 12
            })
        );
        assert!(run_dm(&c, &NoiseModel::noiseless()).is_ok());
    }

    #[test]
    fn pure_and_mixed_paths_agree() {
        let src = "qubits 3\nclbits 3\nh 0\ns 0\ncx 0 1\nh 1\ncz 1 2\nh 2\nsdg 2\nmeasure 1 -> 1\ncondx 1 0\ny 2\nmeasure 0 -> 0\nmeasure 2 -> 2";
        let c = parse_circuit(src).unwrap();
        let pure = run_dm(&c, &NoiseModel::noiseless()).unwrap();
        let mixed = run_dm(&c, &NoiseModel::uniform(1e-300).unwrap()).unwrap();
        for (k, p) in &pure.probs {
            assert_close(*p, mixed.get(k), 1e-12);
        }
        assert_close(mixed.total(), 1.0, 1e-12);
    }

    #[test]
    fn channel_invariants() {
        let model = NoiseModel::new(0.05, 0.1).unwrap();
        let mut rho = DensityState::zero(3);
        let gates = [
            Gate::h(0),
            Gate::cx(0, 1),
            Gate::s(1),
            Gate::cz(1, 2),
            Gate::h(2),
            Gate::y(0),
        ];
        let mut purity = rho.purity();
        for g in &gates {
            rho.apply_unitary(g.kind, &g.qubits);
            assert_close(rho.purity(), purity, 1e-12);
            rho.apply_gate_noise(g, &model);
            assert_close(rho.trace(), 1.0, 1e-10);
            assert!(rho.hermiticity_error() < 1e-10);
            assert!(rho.purity() <= purity + 1e-12);
            purity = rho.purity();
        }
        rho.logical_fault(&[0, 1, 2], 0.3);
        assert_close(rho.trace(), 1.0, 1e-10);
    }

    #[test]
    fn expectation_values() {
        let mut psi = StateVector::zero(2);
        psi.apply_unitary(GateKind::H, &[0]);
        psi.apply_unitary(GateKind::CX, &[0, 1]);
        let e = |s: &str| psi.expectation(&s.parse().unwrap());
        assert_close(e("XX").re, 1.0, 1e-12);
        assert_close(e("ZZ").re, 1.0, 1e-12);
        assert_close(e("YY").re, -1.0, 1e-12);
        assert_close(e("-YY").re, 1.0, 1e-12);
        assert_close(e("ZI").re, 0.0, 1e-12);
        let mut rho = DensityState::zero(2);
        rho.apply_unitary(GateKind::H, &[0]);
        rho.apply_unitary(GateKind::CX, &[0, 1]);
        assert_close(rho.expectation(&"YY".parse().unwrap()).re, -1.0, 1e-12);
        // S|+> = |+i>: <Y> = 1.
        let mut rho = DensityState::zero(1);
        rho.apply_unitary(GateKind::H, &[0]);
        rho.apply_unitary(GateKind::S, &[0]);
        assert_close(rho.expectation(&"Y".parse().unwrap()).re, 1.0, 1e-12);
        rho.apply_unitary(GateKind::Sdg, &[0]);
        rho.apply_unitary(GateKind::Sdg, &[0]);
        assert_close(rho.expectation(&"Y".parse().unwrap()).re, -1.0, 1e-12);
    }
}
