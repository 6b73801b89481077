//! Logical-to-physical compilation.
//!
//! Blocks are laid out either interleaved (replica `k` of logical qubit `j`
//! at `k * L + j`) or blocked (`j * n + k`). Logical classical bit `c` owns
//! `n` physical classical bits laid out the same way, so `rep:1` compiles to
//! the input circuit verbatim. Gadget and syndrome qubits and bits are
//! appended after the data registers.

use super::{
    block_prep, decoding_circuit, encoder, inverse_encoder, parse_basis, ss_extraction_circuit,
    stabilizer_generators, CodeError, CodeSpec,
};
use crate::circuit::{Circuit, Gate, GateKind};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// How a logical Hadamard is realised on the repetition code.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HadamardMode {
    /// Decode the block, apply H to the primary qubit, re-encode.
    #[default]
    #[serde(rename = "nonft", alias = "non_ft")]
    NonFT,
    /// One-bit teleportation through a cat-state ancilla block.
    #[serde(rename = "ft", alias = "ft_gadget")]
    FTGadget,
    /// The gadget with a noiseless ancilla followed by a logical fault of
    /// rate `kappa * p^d`.
    #[serde(rename = "ideal", alias = "idealized_ancilla")]
    IdealizedAncilla,
}

impl fmt::Display for HadamardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HadamardMode::NonFT => "nonft",
            HadamardMode::FTGadget => "ft",
            HadamardMode::IdealizedAncilla => "ideal",
        })
    }
}

impl FromStr for HadamardMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nonft" | "non_ft" => Ok(HadamardMode::NonFT),
            "ft" | "ft_gadget" => Ok(HadamardMode::FTGadget),
            "ideal" | "idealized_ancilla" => Ok(HadamardMode::IdealizedAncilla),
            _ => Err(format!(
                "unknown Hadamard mode `{s}` (expected nonft, ft or ideal)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    #[default]
    Interleaved,
    Blocked,
}

impl LayoutKind {
    /// Physical index of replica `k` of logical index `j` among `l` blocks of size `n`.
    pub fn index(self, l: usize, n: usize, j: usize, k: usize) -> usize {
        match self {
            LayoutKind::Interleaved => k * l + j,
            LayoutKind::Blocked => j * n + k,
        }
    }
}

/// What a logical measurement compiles to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// Transversal Z measurement of the block.
    #[default]
    Direct,
    /// Decoding circuit, then measurement. The decoder is noiseless unless
    /// `noisy` is set.
    Decoded { noisy: bool },
    /// Cat-state extraction of every generator, then measurement.
    Syndromes,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileOptions {
    pub layout: LayoutKind,
    pub readout: Readout,
    /// Logical basis state prepared before the payload (qubit 0 leftmost).
    pub initial: Option<String>,
}

/// Physical resources that are not data qubits.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncillaMap {
    /// Qubits that ever served as a Hadamard-gadget ancilla block.
    pub gadget_qubits: Vec<usize>,
    /// X-basis readouts of teleported data blocks.
    pub gadget_clbits: Vec<usize>,
    pub syndrome_qubits: Vec<usize>,
    pub syndrome_clbits: Vec<usize>,
}

/// How one logical classical bit was read out.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockReadout {
    /// Physical classical bits in block-position order.
    pub clbits: Vec<usize>,
    pub decoded: bool,
    /// Cat readout pairs, one per generator; the syndrome is their parity.
    pub syndromes: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalLayout {
    /// Indexed by logical classical bit.
    pub readouts: Vec<BlockReadout>,
    pub primary: usize,
    /// Direct Steane readout checks Z-type stabilizers only.
    pub partial_verification: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedCircuit {
    pub code: CodeSpec,
    pub hmode: HadamardMode,
    #[serde(skip)]
    pub physical: Circuit,
    /// Data block of each logical qubit at the end of the circuit.
    pub layout: Vec<Vec<usize>>,
    pub ancillas: AncillaMap,
    pub classical: ClassicalLayout,
}

impl EncodedCircuit {
    /// Sidecar describing the physical layout, for use next to the circuit text.
    pub fn sidecar(&self) -> serde_json::Value {
        let layout: BTreeMap<String, &Vec<usize>> = self
            .layout
            .iter()
            .enumerate()
            .map(|(j, b)| (j.to_string(), b))
            .collect();
        serde_json::json!({
            "code": self.code,
            "hmode": self.hmode,
            "num_qubits": self.physical.num_qubits(),
            "num_clbits": self.physical.num_clbits(),
            "layout": layout,
            "ancillas": self.ancillas,
            "classical": self.classical,
        })
    }
}

/// Compiles with interleaved layout, direct readout and no state preparation.
pub fn compile_logical(
    code: &CodeSpec,
    logical: &Circuit,
    hmode: HadamardMode,
) -> Result<EncodedCircuit, CodeError> {
    compile_with(code, logical, hmode, &CompileOptions::default())
}

pub fn compile_with(
    code: &CodeSpec,
    logical: &Circuit,
    hmode: HadamardMode,
    options: &CompileOptions,
) -> Result<EncodedCircuit, CodeError> {
    let mut compiler = Compiler::new(*code, hmode, logical, options)?;
    for gate in logical.gates() {
        compiler.compile_gate(gate)?;
    }
    Ok(compiler.finish())
}

struct Compiler {
    code: CodeSpec,
    hmode: HadamardMode,
    readout: Readout,
    n_clbits: usize,
    layout: LayoutKind,
    out: Circuit,
    blocks: Vec<Vec<usize>>,
    // Blocks left decoded by a decoded readout; re-encoded before reuse.
    decoded: Vec<bool>,
    // Retired blocks that can be reset and reused as gadget ancillas.
    pool: Vec<Vec<usize>>,
    ancillas: AncillaMap,
    readouts: Vec<BlockReadout>,
}

impl Compiler {
    fn new(
        code: CodeSpec,
        hmode: HadamardMode,
        logical: &Circuit,
        options: &CompileOptions,
    ) -> Result<Self, CodeError> {
        if code == CodeSpec::Steane && hmode == HadamardMode::NonFT {
            return Err(CodeError::NonFtOnSteane);
        }
        let (l, c, n) = (
            logical.num_qubits(),
            logical.num_clbits(),
            code.block_size(),
        );
        let blocks: Vec<Vec<usize>> = (0..l)
            .map(|j| (0..n).map(|k| options.layout.index(l, n, j, k)).collect())
            .collect();
        let mut out = Circuit::new(l * n, c * n);
        let bits = match &options.initial {
            Some(basis) => {
                let bits = parse_basis(basis)?;
                if bits.len() != l {
                    return Err(CodeError::BadBasis(basis.clone()));
                }
                bits
            }
            None => vec![false; l],
        };
        for (block, &bit) in blocks.iter().zip(&bits) {
            block_prep(&code, bit, block, &mut out)?;
        }
        Ok(Compiler {
            code,
            hmode,
            readout: options.readout,
            n_clbits: c,
            layout: options.layout,
            out,
            decoded: vec![false; l],
            blocks,
            pool: Vec::new(),
            ancillas: AncillaMap::default(),
            readouts: vec![BlockReadout::default(); c],
        })
    }

    fn n(&self) -> usize {
        self.code.block_size()
    }

    fn data_clbit(&self, c: usize, k: usize) -> usize {
        self.layout.index(self.n_clbits, self.n(), c, k)
    }

    fn emit(&mut self, gate: Gate) -> Result<(), CodeError> {
        Ok(self.out.push(gate)?)
    }

    fn fresh_qubits(&mut self, count: usize) -> Vec<usize> {
        let start = self.out.num_qubits();
        self.out.grow_qubits(start + count);
        (start..start + count).collect()
    }

    // Number of leading block pairs coupled by a logical CZ: CZ^{(x)m} on
    // repetition codewords gives (-1)^{m x y}, so m must be odd.
    fn cz_width(&self) -> usize {
        match self.code {
            CodeSpec::Repetition(d) if d % 2 == 0 => d - 1,
            _ => self.n(),
        }
    }

    fn ensure_encoded(&mut self, q: usize, ideal: bool) -> Result<(), CodeError> {
        if self.decoded[q] {
            self.decoded[q] = false;
            let noisy = matches!(self.readout, Readout::Decoded { noisy: true });
            let enc = encoder(&self.code).with_ideal(ideal || !noisy);
            let block = self.blocks[q].clone();
            self.out.append_mapped(&enc, &block, &[])?;
        }
        Ok(())
    }

    // Emits the logical value of clbit `c` as a list of physical bits whose
    // parity is the logical bit.
    fn logical_bit(&self, c: usize) -> Vec<usize> {
        let r = &self.readouts[c];
        if r.decoded {
            return vec![self.data_clbit(c, self.code.primary())];
        }
        self.code
            .logical_z_support()
            .into_iter()
            .map(|k| self.data_clbit(c, k))
            .collect()
    }

    fn compile_gate(&mut self, gate: &Gate) -> Result<(), CodeError> {
        let ideal = gate.ideal;
        for &q in &gate.qubits {
            self.ensure_encoded(q, ideal)?;
        }
        let n = self.n();
        let one = |kind: GateKind, q: usize| Gate::new(kind, &[q], None).with_ideal(ideal);
        let block = |q: usize| self.blocks[q].clone();
        let steane = self.code == CodeSpec::Steane;
        match gate.kind {
            GateKind::X | GateKind::Y | GateKind::Z | GateKind::H if steane => {
                for p in block(gate.qubits[0]) {
                    self.emit(one(gate.kind, p))?;
                }
            }
            // Transversal S on the Steane code acts as the logical S-dagger.
            GateKind::S | GateKind::Sdg if steane => {
                let kind = if gate.kind == GateKind::S {
                    GateKind::Sdg
                } else {
                    GateKind::S
                };
                for p in block(gate.qubits[0]) {
                    self.emit(one(kind, p))?;
                }
            }
            GateKind::X => {
                for p in block(gate.qubits[0]) {
                    self.emit(one(GateKind::X, p))?;
                }
            }
            GateKind::Y => {
                let b = block(gate.qubits[0]);
                self.emit(one(GateKind::Y, b[0]))?;
                for &p in &b[1..] {
                    self.emit(one(GateKind::X, p))?;
                }
            }
            // Phase-type gates act on one replica: Z_L = Z_0 on the repetition code.
            GateKind::Z | GateKind::S | GateKind::Sdg => {
                self.emit(one(gate.kind, block(gate.qubits[0])[0]))?;
            }
            GateKind::H if n == 1 => self.emit(one(GateKind::H, block(gate.qubits[0])[0]))?,
            GateKind::H => match self.hmode {
                HadamardMode::NonFT => self.nonft_h(gate.qubits[0], ideal)?,
                _ => self.gadget_h(gate.qubits[0], ideal)?,
            },
            GateKind::CX => {
                let (a, b) = (block(gate.qubits[0]), block(gate.qubits[1]));
                for (&x, &y) in a.iter().zip(&b) {
                    self.emit(Gate::cx(x, y).with_ideal(ideal))?;
                }
            }
            GateKind::CZ => {
                let (a, b) = (block(gate.qubits[0]), block(gate.qubits[1]));
                for (&x, &y) in a.iter().zip(&b).take(self.cz_width()) {
                    self.emit(Gate::cz(x, y).with_ideal(ideal))?;
                }
            }
            GateKind::Reset => {
                let b = block(gate.qubits[0]);
                for &p in &b {
                    self.emit(one(GateKind::Reset, p))?;
                }
                if steane {
                    let enc = encoder(&self.code).with_ideal(ideal);
                    self.out.append_mapped(&enc, &b, &[])?;
                }
            }
            GateKind::Measure => {
                self.measure(gate.qubits[0], gate.clbit.expect("validated"), ideal)?
            }
            GateKind::CondX | GateKind::CondZ => {
                let c = gate.clbit.expect("validated");
                let b = block(gate.qubits[0]);
                let targets: Vec<usize> = match (gate.kind, steane) {
                    (GateKind::CondZ, false) => vec![b[0]],
                    _ => b,
                };
                let letter = if gate.kind == GateKind::CondX {
                    GateKind::CondX
                } else {
                    GateKind::CondZ
                };
                // Repetition blocks condition on a single replica.
                let bits = if steane {
                    self.logical_bit(c)
                } else {
                    vec![self.logical_bit(c)[0]]
                };
                for bit in bits {
                    for &t in &targets {
                        self.emit(Gate::new(letter, &[t], Some(bit)).with_ideal(ideal))?;
                    }
                }
            }
            GateKind::LogicalFault => return Err(CodeError::UnsupportedGate(gate.kind)),
        }
        Ok(())
    }

    fn nonft_h(&mut self, q: usize, ideal: bool) -> Result<(), CodeError> {
        let b = self.blocks[q].clone();
        let dec = inverse_encoder(&self.code).with_ideal(ideal);
        self.out.append_mapped(&dec, &b, &[])?;
        self.emit(Gate::h(b[0]).with_ideal(ideal))?;
        self.out
            .append_mapped(&encoder(&self.code).with_ideal(ideal), &b, &[])?;
        Ok(())
    }

    // H|psi> by one-bit teleportation: CZ(data, |+>_L), X-basis readout of
    // the data block, X_L correction by the readout parity.
    fn gadget_h(&mut self, q: usize, ideal: bool) -> Result<(), CodeError> {
        let n = self.n();
        let offline = ideal || self.hmode == HadamardMode::IdealizedAncilla;
        let anc = match self.pool.pop() {
            Some(b) => {
                for &p in &b {
                    self.emit(Gate::reset(p).with_ideal(offline))?;
                }
                b
            }
            None => self.fresh_qubits(n),
        };
        for &p in &anc {
            if !self.ancillas.gadget_qubits.contains(&p) {
                self.ancillas.gadget_qubits.push(p);
            }
        }
        self.emit(Gate::h(anc[0]).with_ideal(offline))?;
        for &p in &anc[1..] {
            self.emit(Gate::cx(anc[0], p).with_ideal(offline))?;
        }
        if self.hmode == HadamardMode::IdealizedAncilla && !ideal {
            self.emit(Gate::logical_fault(&anc))?;
        }
        let data = self.blocks[q].clone();
        for (&x, &y) in data.iter().zip(&anc).take(self.cz_width()) {
            self.emit(Gate::cz(x, y).with_ideal(ideal))?;
        }
        for &x in &data {
            self.emit(Gate::h(x).with_ideal(ideal))?;
            let g = self.out.add_clbit();
            self.ancillas.gadget_clbits.push(g);
            self.emit(Gate::measure(x, g).with_ideal(ideal))?;
            for &a in &anc {
                self.emit(Gate::cond_x(g, a).with_ideal(ideal))?;
            }
        }
        self.blocks[q] = anc;
        self.pool.push(data);
        Ok(())
    }

    fn measure(&mut self, q: usize, c: usize, ideal: bool) -> Result<(), CodeError> {
        let b = self.blocks[q].clone();
        let n = self.n();
        let mut readout = BlockReadout::default();
        match self.readout {
            Readout::Direct => {}
            Readout::Decoded { noisy: noisy_dec } => {
                let dec = decoding_circuit(&self.code).with_ideal(ideal || !noisy_dec);
                self.out.append_mapped(&dec, &b, &[])?;
                self.decoded[q] = n > 1;
                readout.decoded = n > 1;
            }
            Readout::Syndromes => {
                for gen in stabilizer_generators(&self.code) {
                    let frag = ss_extraction_circuit(&self.code, &gen)?;
                    let frag = frag.with_ideal(ideal);
                    let cat = self.fresh_qubits(2);
                    self.ancillas.syndrome_qubits.extend(&cat);
                    let bits = [self.out.add_clbit(), self.out.add_clbit()];
                    self.ancillas.syndrome_clbits.extend(bits);
                    let qmap: Vec<usize> = b.iter().chain(&cat).copied().collect();
                    self.out.append_mapped(&frag, &qmap, &bits)?;
                    readout.syndromes.push(bits);
                }
            }
        }
        for (k, &p) in b.iter().enumerate() {
            let bit = self.data_clbit(c, k);
            readout.clbits.push(bit);
            self.emit(Gate::measure(p, bit).with_ideal(ideal))?;
        }
        self.readouts[c] = readout;
        Ok(())
    }

    fn finish(self) -> EncodedCircuit {
        let partial = self.code == CodeSpec::Steane && self.readout == Readout::Direct;
        EncodedCircuit {
            code: self.code,
            hmode: self.hmode,
            physical: self.out,
            layout: self.blocks,
            ancillas: self.ancillas,
            classical: ClassicalLayout {
                readouts: self.readouts,
                primary: self.code.primary(),
                partial_verification: partial,
            },
        }
    }
}
