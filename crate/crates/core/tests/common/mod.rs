//! Dense-matrix reference implementation for cross-checking the kernels.
#![allow(dead_code)]

use num_complex::Complex64;
use xebsim::haar::sample_haar_unitary;
use xebsim::{Circuit, GateKind, GateOp, RngStream};

pub type Mat = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> Mat {
    (0..d).map(|i| (0..d).map(|j| c((i == j) as u8 as f64, 0.0)).collect()).collect()
}

/// Kronecker product, `a` on the more significant factor.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (da, db) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); da * db]; da * db];
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    out[i * db + k][j * db + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    (0..d)
        .map(|i| (0..d).map(|j| (0..d).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn matvec(a: &Mat, v: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// Textbook matrix of a fixed gate. Two-qubit matrices are written with the
/// first target as the less significant bit.
pub fn textbook(kind: GateKind) -> Mat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    match kind {
        GateKind::H => vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]],
        GateKind::P => vec![vec![o, z], vec![z, c(0.0, 1.0)]],
        GateKind::T => vec![vec![o, z], vec![z, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]],
        GateKind::X => vec![vec![z, o], vec![o, z]],
        GateKind::I => identity(2),
        // basis order |t c>: control is bit 0
        GateKind::Cnot => vec![
            vec![o, z, z, z],
            vec![z, z, z, o],
            vec![z, z, o, z],
            vec![z, o, z, z],
        ],
        GateKind::Custom => unreachable!(),
    }
}

fn swap_gate() -> Mat {
    let mut m = identity(4);
    m.swap(1, 2);
    m
}

/// Full `2^n` matrix of `g` (in local ordering) acting on `targets`, built
/// from Kronecker products and explicit swaps.
pub fn embed(n: usize, targets: &[usize], g: &Mat) -> Mat {
    let eye = |k: usize| identity(1 << k);
    match *targets {
        [q] => kron(&kron(&eye(n - q - 1), g), &eye(q)),
        [a, b] if b == a + 1 => kron(&kron(&eye(n - a - 2), g), &eye(a)),
        [a, b] if a == b + 1 => {
            let s = swap_gate();
            embed(n, &[b, a], &matmul(&matmul(&s, g), &s))
        }
        [a, b] => {
            // conjugate by the swap that moves b next to a
            let nb = if b > a { a + 1 } else { a - 1 };
            let sw = swap_between(n, nb.min(b), nb.max(b));
            matmul(&matmul(&sw, &embed(n, &[a, nb], g)), &sw)
        }
        _ => panic!("bad targets"),
    }
}

/// Full swap of qubits `lo < hi` as a product of adjacent swaps.
fn swap_between(n: usize, lo: usize, hi: usize) -> Mat {
    let adj = |q: usize| embed(n, &[q, q + 1], &swap_gate());
    let mut m = identity(1 << n);
    for q in lo..hi {
        m = matmul(&adj(q), &m);
    }
    for q in (lo..hi - 1).rev() {
        m = matmul(&adj(q), &m);
    }
    m
}

pub fn op_matrix(op: &GateOp) -> Mat {
    match op.kind() {
        GateKind::Custom => {
            let d = if op.targets().len() == 1 { 2 } else { 4 };
            let m = op.matrix();
            (0..d).map(|r| (0..d).map(|c| m[r * d + c]).collect()).collect()
        }
        k => textbook(k),
    }
}

/// Final state of `circuit` on `|0..0>` by dense matrix products.
pub fn oracle_state(circuit: &Circuit) -> Vec<Complex64> {
    let n = circuit.num_qubits();
    let mut v = vec![c(0.0, 0.0); 1 << n];
    v[0] = c(1.0, 0.0);
    for op in circuit.ops() {
        v = matvec(&embed(n, op.targets(), &op_matrix(op)), &v);
    }
    v
}

/// Random circuit over every gate kind, including Haar-random custom gates
/// and CNOTs on arbitrary ordered pairs.
pub fn mixed_circuit(n: usize, gates: usize, rng: &mut RngStream) -> Circuit {
    use rand::Rng;
    let mut circuit = Circuit::new(n).unwrap();
    for _ in 0..gates {
        let q = rng.random_range(0..n);
        let pick = if n == 1 { rng.random_range(0..6) } else { rng.random_range(0..8) };
        let other = |rng: &mut RngStream| loop {
            let b = rng.random_range(0..n);
            if b != q {
                break b;
            }
        };
        let op = match pick {
            0 => GateOp::h(q),
            1 => GateOp::p(q),
            2 => GateOp::t(q),
            3 => GateOp::x(q),
            4 => GateOp::id(q),
            5 => {
                let u = sample_haar_unitary(2, rng).unwrap();
                GateOp::custom(&[q], row_major(&u)).unwrap()
            }
            6 => GateOp::cnot(q, other(rng)),
            _ => {
                let b = other(rng);
                let u = sample_haar_unitary(4, rng).unwrap();
                GateOp::custom(&[q, b], row_major(&u)).unwrap()
            }
        };
        circuit.push(op).unwrap();
    }
    circuit
}

fn row_major(u: &xebsim::haar::CMatrix) -> Vec<Complex64> {
    let d = u.dim();
    (0..d * d).map(|k| u.get(k / d, k % d)).collect()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
