//! Stabilizer tableau with sampled Pauli faults.
//!
//! Rows `0..n` are destabilizers, `n..2n` stabilizers and row `2n` is
//! scratch space for deterministic measurements. Each row stores its X and Z
//! bits packed into `u64` words.

use super::{bits_to_key, OutcomeHistogram, SimError};
use crate::circuit::{Circuit, GateKind};
use crate::noise::{sample_fault, trajectory_rng, NoiseModel, Pauli};
use rand::Rng;
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

impl Tableau {
    /// The state |0...0>.
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Tableau {
            n,
            words,
            x: vec![0; rows * words],
            z: vec![0; rows * words],
            r: vec![false; rows],
        };
        t.reset_all();
        t
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Back to |0...0> without reallocating.
    pub fn reset_all(&mut self) {
        self.x.fill(0);
        self.z.fill(0);
        self.r.fill(false);
        for q in 0..self.n {
            let (w, m) = (q / 64, 1u64 << (q % 64));
            self.x[q * self.words + w] |= m;
            self.z[(q + self.n) * self.words + w] |= m;
        }
    }

    #[inline]
    fn bit(v: &[u64], words: usize, row: usize, q: usize) -> bool {
        v[row * words + q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    fn flip(v: &mut [u64], words: usize, row: usize, q: usize) {
        v[row * words + q / 64] ^= 1u64 << (q % 64);
    }

    fn rows(&self) -> usize {
        2 * self.n
    }

    pub fn h(&mut self, q: usize) {
        let (w, s) = (q / 64, q % 64);
        for row in 0..self.rows() {
            let i = row * self.words + w;
            let (xb, zb) = (self.x[i] >> s & 1, self.z[i] >> s & 1);
            self.r[row] ^= xb & zb == 1;
            if xb != zb {
                self.x[i] ^= 1 << s;
                self.z[i] ^= 1 << s;
            }
        }
    }

    pub fn s(&mut self, q: usize) {
        let (w, s) = (q / 64, q % 64);
        for row in 0..self.rows() {
            let i = row * self.words + w;
            let (xb, zb) = (self.x[i] >> s & 1, self.z[i] >> s & 1);
            self.r[row] ^= xb & zb == 1;
            self.z[i] ^= xb << s;
        }
    }

    pub fn sdg(&mut self, q: usize) {
        let (w, s) = (q / 64, q % 64);
        for row in 0..self.rows() {
            let i = row * self.words + w;
            let (xb, zb) = (self.x[i] >> s & 1, self.z[i] >> s & 1);
            self.r[row] ^= xb & !zb & 1 == 1;
            self.z[i] ^= xb << s;
        }
    }

    /// Applies a Pauli: flips the sign of every row it anticommutes with.
    pub fn pauli(&mut self, q: usize, p: Pauli) {
        let (px, pz) = p.xz();
        for row in 0..self.rows() {
            let xb = Self::bit(&self.x, self.words, row, q);
            let zb = Self::bit(&self.z, self.words, row, q);
            self.r[row] ^= (px && zb) ^ (pz && xb);
        }
    }

    pub fn cx(&mut self, a: usize, b: usize) {
        let words = self.words;
        for row in 0..self.rows() {
            let xa = Self::bit(&self.x, words, row, a);
            let zb = Self::bit(&self.z, words, row, b);
            let xb = Self::bit(&self.x, words, row, b);
            let za = Self::bit(&self.z, words, row, a);
            self.r[row] ^= xa && zb && (xb == za);
            if xa {
                Self::flip(&mut self.x, words, row, b);
            }
            if zb {
                Self::flip(&mut self.z, words, row, a);
            }
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cx(a, b);
        self.h(b);
    }

    // Row h <- row i * row h, with the sign from the phase exponent.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let mut sum: i64 = 2 * (self.r[h] as i64 + self.r[i] as i64);
        for k in 0..w {
            let (x1, z1) = (self.x[i * w + k], self.z[i * w + k]);
            let (x2, z2) = (self.x[h * w + k], self.z[h * w + k]);
            let pos = (x1 & z1 & z2 & !x2) | (x1 & !z1 & z2 & x2) | (!x1 & z1 & x2 & !z2);
            let neg = (x1 & z1 & x2 & !z2) | (x1 & !z1 & z2 & !x2) | (!x1 & z1 & x2 & z2);
            sum += pos.count_ones() as i64 - neg.count_ones() as i64;
            self.x[h * w + k] ^= x1;
            self.z[h * w + k] ^= z1;
        }
        self.r[h] = sum.rem_euclid(4) == 2;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let w = self.words;
        self.x.copy_within(src * w..(src + 1) * w, dst * w);
        self.z.copy_within(src * w..(src + 1) * w, dst * w);
        self.r[dst] = self.r[src];
    }

    /// Z measurement of qubit `q`; random outcomes are drawn from `rng`.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> bool {
        let n = self.n;
        let w = self.words;
        let pivot = (n..2 * n).find(|&p| Self::bit(&self.x, w, p, q));
        match pivot {
            Some(p) => {
                for i in 0..2 * n {
                    if i != p && Self::bit(&self.x, w, i, q) {
                        self.rowsum(i, p);
                    }
                }
                self.copy_row(p - n, p);
                self.x[p * w..(p + 1) * w].fill(0);
                self.z[p * w..(p + 1) * w].fill(0);
                Self::flip(&mut self.z, w, p, q);
                let outcome = rng.random::<bool>();
                self.r[p] = outcome;
                outcome
            }
            None => {
                let scratch = 2 * n;
                self.x[scratch * w..(scratch + 1) * w].fill(0);
                self.z[scratch * w..(scratch + 1) * w].fill(0);
                self.r[scratch] = false;
                for i in 0..n {
                    if Self::bit(&self.x, w, i, q) {
                        self.rowsum(scratch, i + n);
                    }
                }
                self.r[scratch]
            }
        }
    }

    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) {
        if self.measure(q, rng) {
            self.pauli(q, Pauli::X);
        }
    }

    fn apply(&mut self, kind: GateKind, qubits: &[usize]) {
        match kind {
            GateKind::X => self.pauli(qubits[0], Pauli::X),
            GateKind::Y => self.pauli(qubits[0], Pauli::Y),
            GateKind::Z => self.pauli(qubits[0], Pauli::Z),
            GateKind::H => self.h(qubits[0]),
            GateKind::S => self.s(qubits[0]),
            GateKind::Sdg => self.sdg(qubits[0]),
            GateKind::CX => self.cx(qubits[0], qubits[1]),
            GateKind::CZ => self.cz(qubits[0], qubits[1]),
            _ => unreachable!("{kind} is not unitary"),
        }
    }
}

/// Runs one shot into `bits` (one byte per classical bit).
pub(crate) fn run_shot<R: Rng + ?Sized>(
    circuit: &Circuit,
    model: &NoiseModel,
    tableau: &mut Tableau,
    bits: &mut [u8],
    rng: &mut R,
) {
    tableau.reset_all();
    bits.fill(0);
    for (loc, g) in circuit.gates().iter().enumerate() {
        match g.kind {
            GateKind::Measure => {
                let mut v = tableau.measure(g.qubits[0], rng);
                if model.p_meas > 0.0 && !g.ideal && rng.random::<f64>() < model.p_meas {
                    v = !v;
                }
                bits[g.clbit.expect("validated")] = v as u8;
                continue;
            }
            GateKind::CondX | GateKind::CondZ => {
                if bits[g.clbit.expect("validated")] == 1 {
                    let p = if g.kind == GateKind::CondX {
                        Pauli::X
                    } else {
                        Pauli::Z
                    };
                    tableau.pauli(g.qubits[0], p);
                }
                continue;
            }
            GateKind::Reset => tableau.reset(g.qubits[0], rng),
            GateKind::LogicalFault => {}
            kind => tableau.apply(kind, &g.qubits),
        }
        if let Some(fault) = sample_fault(loc, g, model, rng) {
            for (&q, &l) in g.qubits.iter().zip(&fault.letters) {
                if l != Pauli::I {
                    tableau.pauli(q, l);
                }
            }
        }
    }
}

const CHUNK: u64 = 1024;

/// Samples `shots` trajectories. Shot `k` uses the stream `(seed, k)`, so the
/// histogram does not depend on how shots are scheduled across threads.
pub fn run_trajectories(
    circuit: &Circuit,
    model: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<OutcomeHistogram, SimError> {
    run_trajectories_with(circuit, model, shots, seed, bits_to_key)
}

/// As [`run_trajectories`], keying each shot with `key(bits)`.
pub fn run_trajectories_with<F>(
    circuit: &Circuit,
    model: &NoiseModel,
    shots: u64,
    seed: u64,
    key: F,
) -> Result<OutcomeHistogram, SimError>
where
    F: Fn(&[u8]) -> String + Sync,
{
    model.validate()?;
    let chunks = shots.div_ceil(CHUNK);
    let hist = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut tableau = Tableau::new(circuit.num_qubits());
            let mut bits = vec![0u8; circuit.num_clbits()];
            let mut h = OutcomeHistogram::default();
            let end = ((chunk + 1) * CHUNK).min(shots);
            for k in chunk * CHUNK..end {
                let mut rng = trajectory_rng(seed, k);
                run_shot(circuit, model, &mut tableau, &mut bits, &mut rng);
                h.record(key(&bits));
            }
            h
        })
        .reduce(OutcomeHistogram::default, OutcomeHistogram::merge);
    Ok(hist)
}
