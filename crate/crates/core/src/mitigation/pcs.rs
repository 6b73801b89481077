//! Pauli check sandwiching.
//!
//! Each check pair `(L, R)` with `R U L = U` gets an ancilla prepared in
//! |+>: controlled-`L` before the payload, controlled-`R` after, then an
//! X-basis readout. Shots where every ancilla reads 0 are kept. When the
//! checks are stabilizers of the input and output code spaces this is
//! stabilizer error detection at the end of the circuit.

use super::MitigationError;
use crate::circuit::{Circuit, Gate};
use crate::codes::{in_stabilizer_group, stabilizer_generators, EncodedCircuit, PauliString};
use crate::noise::Pauli;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PcsOptions {
    /// Omit the left checks (they act trivially on code-space inputs).
    pub skip_left: bool,
    /// Omit the right checks.
    pub skip_right: bool,
    /// Flag all check gates noiseless.
    pub ideal_checks: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PcsCircuit {
    pub circuit: Circuit,
    /// One ancilla per check pair.
    pub ancillas: Vec<usize>,
    /// Classical bit holding each ancilla's X-basis readout.
    pub check_clbits: Vec<usize>,
}

/// Stabilizer generators of every block, embedded in the full register.
pub fn block_stabilizers(
    n: usize,
    blocks: &[Vec<usize>],
    code: &crate::codes::CodeSpec,
) -> Vec<PauliString> {
    blocks
        .iter()
        .flat_map(|b| {
            stabilizer_generators(code)
                .into_iter()
                .map(move |g| g.embed(n, b))
        })
        .collect()
}

/// The right check matching `left`: `R = U L U^dagger`.
pub fn right_check(payload: &Circuit, left: &PauliString) -> Result<PauliString, MitigationError> {
    left.conjugate_by(payload)
        .map_err(|_| MitigationError::NonUnitaryPayload)
}

fn controlled_pauli(
    out: &mut Circuit,
    ancilla: usize,
    p: &PauliString,
    ideal: bool,
) -> Result<(), MitigationError> {
    let push = |out: &mut Circuit, g: Gate| {
        out.push(g.with_ideal(ideal))
            .map_err(|e| MitigationError::Code(e.into()))
    };
    for (q, &l) in p.letters().iter().enumerate() {
        match l {
            Pauli::I => {}
            Pauli::X => push(out, Gate::cx(ancilla, q))?,
            Pauli::Z => push(out, Gate::cz(ancilla, q))?,
            // Y = S X S^dagger.
            Pauli::Y => {
                push(out, Gate::sdg(q))?;
                push(out, Gate::cx(ancilla, q))?;
                push(out, Gate::s(q))?;
            }
        }
    }
    // Global phase of the string becomes a phase on the control.
    match p.phase() {
        0 => {}
        1 => push(out, Gate::s(ancilla))?,
        2 => push(out, Gate::z(ancilla))?,
        _ => push(out, Gate::sdg(ancilla))?,
    }
    Ok(())
}

/// Builds the sandwich around `payload.physical`, which must be unitary.
///
/// Left checks must lie in the stabilizer group of the input blocks and
/// right checks in that of the output blocks; every pair must satisfy
/// `R = U L U^dagger`. The data qubits are not measured.
pub fn build_pcs_circuit(
    payload: &EncodedCircuit,
    input_blocks: &[Vec<usize>],
    checks: &[(PauliString, PauliString)],
    options: PcsOptions,
) -> Result<PcsCircuit, MitigationError> {
    let u = &payload.physical;
    if u.gates().iter().any(|g| !g.kind.is_unitary()) {
        return Err(MitigationError::NonUnitaryPayload);
    }
    let n = u.num_qubits();
    let input_group = block_stabilizers(n, input_blocks, &payload.code);
    let output_group = block_stabilizers(n, &payload.layout, &payload.code);
    for (l, r) in checks {
        if !in_stabilizer_group(&input_group, l) {
            return Err(MitigationError::NotAStabilizer(l.to_string()));
        }
        if !in_stabilizer_group(&output_group, r) {
            return Err(MitigationError::NotAStabilizer(r.to_string()));
        }
        let expected = right_check(u, l)?;
        if &expected != r {
            return Err(MitigationError::NotACheckPair {
                expected: expected.to_string(),
                got: r.to_string(),
            });
        }
    }

    let m = checks.len();
    let ancillas: Vec<usize> = (n..n + m).collect();
    let check_clbits: Vec<usize> = (u.num_clbits()..u.num_clbits() + m).collect();
    let mut out = Circuit::new(n + m, u.num_clbits() + m);
    let ideal = options.ideal_checks;
    let code_err = |e: crate::circuit::CircuitError| MitigationError::Code(e.into());
    for &a in &ancillas {
        out.push(Gate::h(a).with_ideal(ideal)).map_err(code_err)?;
    }
    if !options.skip_left {
        for ((l, _), &a) in checks.iter().zip(&ancillas) {
            controlled_pauli(&mut out, a, l, ideal)?;
        }
    }
    out.extend(u.gates().iter().cloned()).map_err(code_err)?;
    if !options.skip_right {
        for ((_, r), &a) in checks.iter().zip(&ancillas) {
            controlled_pauli(&mut out, a, r, ideal)?;
        }
    }
    for (&a, &c) in ancillas.iter().zip(&check_clbits) {
        out.push(Gate::h(a).with_ideal(ideal)).map_err(code_err)?;
        out.push(Gate::measure(a, c).with_ideal(ideal))
            .map_err(code_err)?;
    }
    Ok(PcsCircuit {
        circuit: out,
        ancillas,
        check_clbits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::codes::{compile_logical, CodeSpec, HadamardMode};
    use crate::noise::NoiseModel;
    use crate::sim::run_dm;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn rep2(src: &str) -> EncodedCircuit {
        compile_logical(
            &CodeSpec::Repetition(2),
            &parse_circuit(src).unwrap(),
            HadamardMode::NonFT,
        )
        .unwrap()
    }

    fn acceptance(c: &Circuit, ancilla_bits: &[usize]) -> f64 {
        let d = run_dm(c, &NoiseModel::noiseless()).unwrap();
        d.probs
            .iter()
            .filter(|(k, _)| ancilla_bits.iter().all(|&b| k.as_bytes()[b] == b'0'))
            .map(|(_, v)| v)
            .sum()
    }

    #[test]
    fn identity_payload_accepts_code_states() {
        let enc = rep2("qubits 1");
        let pcs = build_pcs_circuit(
            &enc,
            &enc.layout,
            &[(p("ZZ"), p("ZZ"))],
            PcsOptions::default(),
        )
        .unwrap();
        assert_eq!(pcs.circuit.num_qubits(), 3);
        assert!((acceptance(&pcs.circuit, &pcs.check_clbits) - 1.0).abs() < 1e-12);
    }

    fn with_prep(prep: &[Gate], c: &Circuit) -> Circuit {
        let mut out = Circuit::new(c.num_qubits(), c.num_clbits());
        out.extend(prep.iter().cloned()).unwrap();
        out.append(c).unwrap();
        out
    }

    #[test]
    fn off_code_input() {
        // |01> is a -1 eigenstate of ZZ: a lone left check always fires,
        // while the full sandwich (ZZ applied twice) always passes.
        let enc = rep2("qubits 1");
        let checks = [(p("ZZ"), p("ZZ"))];
        let left_only = PcsOptions {
            skip_right: true,
            ..Default::default()
        };
        let pcs = build_pcs_circuit(&enc, &enc.layout, &checks, left_only).unwrap();
        let c = with_prep(&[Gate::x(1)], &pcs.circuit);
        assert!(acceptance(&c, &pcs.check_clbits).abs() < 1e-12);
        let full = build_pcs_circuit(&enc, &enc.layout, &checks, PcsOptions::default()).unwrap();
        let c = with_prep(&[Gate::x(1)], &full.circuit);
        assert!((acceptance(&c, &full.check_clbits) - 1.0).abs() < 1e-12);
        // |0>|+> is an equal superposition of the two eigenspaces.
        let c = with_prep(&[Gate::h(1)], &pcs.circuit);
        assert!((acceptance(&c, &pcs.check_clbits) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn check_validation() {
        let enc = rep2("qubits 2\ncx 0 1");
        // Blocks {0,2} and {1,3}; Z on the target block spreads to the control.
        let l = p("IZIZ");
        let r = right_check(&enc.physical, &l).unwrap();
        assert_eq!(r, p("ZZZZ"));
        assert!(
            build_pcs_circuit(&enc, &enc.layout, &[(l.clone(), r)], PcsOptions::default()).is_ok()
        );
        assert!(matches!(
            build_pcs_circuit(
                &enc,
                &enc.layout,
                &[(l.clone(), l.clone())],
                PcsOptions::default()
            ),
            Err(MitigationError::NotACheckPair { .. })
        ));
        assert!(matches!(
            build_pcs_circuit(
                &enc,
                &enc.layout,
                &[(p("ZIII"), p("ZIII"))],
                PcsOptions::default()
            ),
            Err(MitigationError::NotAStabilizer(_))
        ));
        assert!(matches!(
            build_pcs_circuit(
                &enc,
                &enc.layout,
                &[(p("XIXI"), p("XIXI"))],
                PcsOptions::default()
            ),
            Err(MitigationError::NotAStabilizer(_))
        ));
    }

    #[test]
    fn signed_and_y_checks() {
        // Single-qubit payload S: R = S Y S^dagger = -X for L = Y.
        let enc = EncodedCircuit {
            physical: parse_circuit("qubits 1\ns 0").unwrap(),
            ..rep_unencoded()
        };
        let l = p("Y");
        let r = right_check(&enc.physical, &l).unwrap();
        assert_eq!(r, p("-X"));
        // The trivial group only contains the identity, so build by hand.
        let mut c = Circuit::new(2, 1);
        c.push(Gate::h(1)).unwrap();
        // Prepare the +1 eigenstate of Y on the data qubit first.
        let mut full = Circuit::new(2, 1);
        full.extend([Gate::h(0), Gate::s(0)]).unwrap();
        full.append(&c).unwrap();
        controlled_pauli(&mut full, 1, &l, false).unwrap();
        full.push(Gate::s(0)).unwrap();
        controlled_pauli(&mut full, 1, &r, false).unwrap();
        full.extend([Gate::h(1), Gate::measure(1, 0)]).unwrap();
        assert!((acceptance(&full, &[0]) - 1.0).abs() < 1e-12);
    }

    fn rep_unencoded() -> EncodedCircuit {
        compile_logical(
            &CodeSpec::Repetition(1),
            &Circuit::new(1, 0),
            HadamardMode::NonFT,
        )
        .unwrap()
    }
}
