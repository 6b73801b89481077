#![allow(dead_code)]

use ftqem::{Circuit, Gate};
use rand::Rng;

/// A random Clifford circuit on `n` qubits with `len` gates drawn from the
/// full gate set (mid-circuit measurement and reset included), followed by
/// a measurement of every qubit into the clbit of the same index.
pub fn random_clifford<R: Rng>(rng: &mut R, n: usize, len: usize) -> Circuit {
    let mut c = Circuit::new(n, n);
    for _ in 0..len {
        let a = rng.random_range(0..n);
        let b = (a + rng.random_range(1..n)) % n;
        let g = match rng.random_range(0..20) {
            0..=1 => Gate::x(a),
            2 => Gate::y(a),
            3 => Gate::z(a),
            4..=6 => Gate::h(a),
            7..=8 => Gate::s(a),
            9 => Gate::sdg(a),
            10..=13 => Gate::cx(a, b),
            14..=15 => Gate::cz(a, b),
            16 => Gate::reset(a),
            17 => Gate::measure(a, a),
            _ => Gate::h(b),
        };
        c.push(g).unwrap();
    }
    for q in 0..n {
        c.push(Gate::measure(q, q)).unwrap();
    }
    c
}

/// `len` unitary logical gates on `n` qubits, terminal measurement of all.
pub fn random_logical<R: Rng>(rng: &mut R, n: usize, len: usize) -> Circuit {
    let mut c = Circuit::new(n, n);
    for _ in 0..len {
        let a = rng.random_range(0..n);
        let g = if n > 1 && rng.random_bool(0.35) {
            let b = (a + rng.random_range(1..n)) % n;
            if rng.random_bool(0.6) {
                Gate::cx(a, b)
            } else {
                Gate::cz(a, b)
            }
        } else {
            match rng.random_range(0..6) {
                0 => Gate::x(a),
                1 => Gate::y(a),
                2 => Gate::z(a),
                3 => Gate::h(a),
                4 => Gate::s(a),
                _ => Gate::sdg(a),
            }
        };
        c.push(g).unwrap();
    }
    for q in 0..n {
        c.push(Gate::measure(q, q)).unwrap();
    }
    c
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
