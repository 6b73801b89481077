use crate::circuit::{Circuit, GateKind};
use crate::noise::Pauli;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("invalid Pauli string `{0}`")]
    Parse(String),
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error("{0} is not a unitary Clifford gate")]
    NonUnitary(GateKind),
}

/// `i^phase` times a tensor product of single-qubit Paulis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    phase: u8,
    letters: Vec<Pauli>,
}

// a * b = i^k c for single letters.
fn letter_product(a: Pauli, b: Pauli) -> (u8, Pauli) {
    use Pauli::*;
    match (a, b) {
        (I, p) | (p, I) => (0, p),
        (X, X) | (Y, Y) | (Z, Z) => (0, I),
        (X, Y) => (1, Z),
        (Y, Z) => (1, X),
        (Z, X) => (1, Y),
        (Y, X) => (3, Z),
        (Z, Y) => (3, X),
        (X, Z) => (3, Y),
    }
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        PauliString { phase: 0, letters }
    }

    pub fn identity(n: usize) -> Self {
        PauliString::new(vec![Pauli::I; n])
    }

    /// Pauli with `letter` on each qubit of `support`.
    pub fn on(n: usize, support: &[usize], letter: Pauli) -> Self {
        let mut p = PauliString::identity(n);
        for &q in support {
            p.letters[q] = letter;
        }
        p
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    /// Exponent `k` of the overall factor `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&l| l != Pauli::I).count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&q| self.letters[q] != Pauli::I)
            .collect()
    }

    pub fn is_z_type(&self) -> bool {
        self.letters
            .iter()
            .all(|&l| matches!(l, Pauli::I | Pauli::Z))
    }

    pub fn is_x_type(&self) -> bool {
        self.letters
            .iter()
            .all(|&l| matches!(l, Pauli::I | Pauli::X))
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    pub fn mul(&self, other: &PauliString) -> Result<PauliString, PauliError> {
        if self.len() != other.len() {
            return Err(PauliError::Length(self.len(), other.len()));
        }
        let mut phase = self.phase + other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (k, c) = letter_product(a, b);
                phase += k;
                c
            })
            .collect();
        Ok(PauliString {
            phase: phase & 3,
            letters,
        })
    }

    /// Embeds into an `n`-qubit register, qubit `i` landing on `positions[i]`.
    pub fn embed(&self, n: usize, positions: &[usize]) -> PauliString {
        let mut p = PauliString::identity(n).with_phase(self.phase);
        for (i, &l) in self.letters.iter().enumerate() {
            p.letters[positions[i]] = l;
        }
        p
    }

    fn flip_sign(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    /// Heisenberg update `U P U^dagger` for every unitary gate of `circuit`, in order.
    pub fn conjugate_by(&self, circuit: &Circuit) -> Result<PauliString, PauliError> {
        if circuit.num_qubits() > self.len() {
            return Err(PauliError::Length(self.len(), circuit.num_qubits()));
        }
        let mut p = self.clone();
        for g in circuit.gates() {
            p.conjugate_gate(g.kind, &g.qubits)?;
        }
        Ok(p)
    }

    fn conjugate_gate(&mut self, kind: GateKind, qubits: &[usize]) -> Result<(), PauliError> {
        use Pauli::*;
        match kind {
            GateKind::CX => {
                let (c, t) = (qubits[0], qubits[1]);
                let (xc, zc) = self.letters[c].xz();
                let (xt, zt) = self.letters[t].xz();
                if xc && zt && (xt == zc) {
                    self.flip_sign();
                }
                self.letters[c] = Pauli::from_xz(xc, zc ^ zt);
                self.letters[t] = Pauli::from_xz(xt ^ xc, zt);
            }
            GateKind::CZ => {
                let t = qubits[1];
                self.conjugate_gate(GateKind::H, &[t])?;
                self.conjugate_gate(GateKind::CX, qubits)?;
                self.conjugate_gate(GateKind::H, &[t])?;
            }
            _ if kind.is_unitary() => {
                let q = qubits[0];
                let l = self.letters[q];
                let (new, flip) = match (kind, l) {
                    (_, I) => (I, false),
                    (GateKind::H, X) => (Z, false),
                    (GateKind::H, Z) => (X, false),
                    (GateKind::H, Y) => (Y, true),
                    (GateKind::S, X) => (Y, false),
                    (GateKind::S, Y) => (X, true),
                    (GateKind::Sdg, X) => (Y, true),
                    (GateKind::Sdg, Y) => (X, false),
                    (GateKind::S | GateKind::Sdg, Z) => (Z, false),
                    (GateKind::X, X) | (GateKind::Y, Y) | (GateKind::Z, Z) => (l, false),
                    (GateKind::X | GateKind::Y | GateKind::Z, _) => (l, true),
                    _ => unreachable!("non-unitary kinds handled below"),
                };
                self.letters[q] = new;
                if flip {
                    self.flip_sign();
                }
            }
            _ => return Err(PauliError::NonUnitary(kind)),
        }
        Ok(())
    }

    fn symplectic(&self) -> Vec<bool> {
        let n = self.len();
        let mut v = vec![false; 2 * n];
        for (q, l) in self.letters.iter().enumerate() {
            let (x, z) = l.xz();
            v[q] = x;
            v[n + q] = z;
        }
        v
    }
}

/// Whether `candidate` (with its sign) lies in the group generated by the
/// mutually commuting Hermitian `generators`.
pub fn in_stabilizer_group(generators: &[PauliString], candidate: &PauliString) -> bool {
    let n = candidate.len();
    if generators.iter().any(|g| g.len() != n) {
        return false;
    }
    // Row-reduce the generators, carrying the full Pauli product along.
    let mut rows: Vec<(Vec<bool>, PauliString)> = generators
        .iter()
        .map(|g| (g.symplectic(), g.clone()))
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..2 * n {
        let Some(k) = (r..rows.len()).find(|&k| rows[k].0[col]) else {
            continue;
        };
        rows.swap(r, k);
        for k in 0..rows.len() {
            if k != r && rows[k].0[col] {
                let (bits, p) = rows[r].clone();
                for (a, b) in rows[k].0.iter_mut().zip(&bits) {
                    *a ^= *b;
                }
                rows[k].1 = rows[k].1.mul(&p).expect("same length");
            }
        }
        pivots.push((col, r));
        r += 1;
    }
    let mut residual = candidate.clone();
    let mut bits = residual.symplectic();
    for &(col, row) in &pivots {
        if bits[col] {
            for (a, b) in bits.iter_mut().zip(&rows[row].0) {
                *a ^= *b;
            }
            residual = residual.mul(&rows[row].1).expect("same length");
        }
    }
    bits.iter().all(|b| !b) && residual.phase == 0
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["+", "+i", "-", "-i"][self.phase as usize])?;
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else {
            (0, s.strip_prefix('+').unwrap_or(s))
        };
        let letters = body
            .chars()
            .map(|c| match c {
                'I' | '_' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(PauliError::Parse(s.to_string())),
            })
            .collect::<Result<_, _>>()?;
        Ok(PauliString { phase, letters })
    }
}
