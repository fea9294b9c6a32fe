//! Haar-uniform sampling of phases, states and unitaries, and random
//! circuits drawn from a weighted gate alphabet.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, XebError};
use crate::rng::RngStream;
use crate::statevector::{Circuit, GateKind, GateOp, StateVector};

/// Largest dense unitary we will sample.
pub const MAX_UNITARY_DIM: usize = 1 << 13;

/// A uniformly distributed phase `phi` in `[0, 2 pi)`, i.e. a Haar draw from U(1).
pub fn sample_u1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let phi = rng.random::<f64>() * TAU;
    if phi >= TAU {
        0.0
    } else {
        phi
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// A state drawn uniformly from the unit sphere in `C^N`, `N = 2^n`.
pub fn sample_haar_state(n: usize, rng: &mut RngStream) -> Result<StateVector> {
    // Validates n before allocating.
    let dim = StateVector::zero_state(n)?.dim();
    let mut amps: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    Ok(StateVector::from_parts_unchecked(n, amps))
}

/// Dense complex square matrix, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, data }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for col in 0..dim {
            for row in 0..dim {
                data.push(f(row, col));
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[col * self.dim + row]
    }

    pub fn column(&self, col: usize) -> &[Complex64] {
        &self.data[col * self.dim..(col + 1) * self.dim]
    }

    fn column_mut(&mut self, col: usize) -> &mut [Complex64] {
        &mut self.data[col * self.dim..(col + 1) * self.dim]
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for j in 0..d {
            let dst = &mut out[j * d..(j + 1) * d];
            for (k, &b) in rhs.column(j).iter().enumerate() {
                for (o, &a) in dst.iter_mut().zip(self.column(k)) {
                    *o += a * b;
                }
            }
        }
        CMatrix { dim: d, data: out }
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `max |(M^dag M - I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let s: Complex64 = self
                    .column(i)
                    .iter()
                    .zip(self.column(j))
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for (k, &x) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.column(k)) {
                *o += a * x;
            }
        }
        out
    }
}

/// Whether to normalize the QR factorization so `R` has a real positive diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum QrPhase {
    #[default]
    Fixed,
    /// Raw Householder output. Not Haar distributed; kept as a test hook.
    Raw,
}

/// Householder QR of a square matrix. Returns `Q` and the diagonal of `R`.
fn householder_qr(mut a: CMatrix) -> (CMatrix, Vec<Complex64>) {
    let d = a.dim;
    let mut reflectors: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    let mut r_diag = Vec::with_capacity(d);
    for k in 0..d {
        let x = &a.column(k)[k..];
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            reflectors.push(Vec::new());
            r_diag.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = x.to_vec();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut v {
            *z /= vnorm;
        }
        for j in k..d {
            let col = &mut a.column_mut(j)[k..];
            let dot: Complex64 = v.iter().zip(col.iter()).map(|(vi, ci)| vi.conj() * ci).sum();
            for (ci, vi) in col.iter_mut().zip(&v) {
                *ci -= 2.0 * vi * dot;
            }
        }
        r_diag.push(alpha);
        reflectors.push(v);
    }
    // Q = H_0 H_1 ... H_{d-1}, accumulated right to left onto the identity.
    let mut q = CMatrix::identity(d);
    for (k, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        for j in 0..d {
            let col = &mut q.column_mut(j)[k..];
            let dot: Complex64 = v.iter().zip(col.iter()).map(|(vi, ci)| vi.conj() * ci).sum();
            for (ci, vi) in col.iter_mut().zip(v) {
                *ci -= 2.0 * vi * dot;
            }
        }
    }
    (q, r_diag)
}

/// A Haar-random `dim x dim` unitary: QR of a complex Ginibre matrix with the
/// phase of each `R_kk` absorbed into `Q`.
pub fn sample_haar_unitary(dim: usize, rng: &mut RngStream) -> Result<CMatrix> {
    sample_haar_unitary_with(dim, rng, QrPhase::Fixed)
}

pub fn sample_haar_unitary_with(dim: usize, rng: &mut RngStream, phase: QrPhase) -> Result<CMatrix> {
    if dim == 0 || dim > MAX_UNITARY_DIM {
        return Err(XebError::Capacity {
            what: "unitary dimension",
            value: dim,
            limit: MAX_UNITARY_DIM,
        });
    }
    let g = CMatrix::from_fn(dim, |_, _| complex_gaussian(rng));
    let (mut q, r_diag) = householder_qr(g);
    if phase == QrPhase::Fixed {
        for (k, r) in r_diag.iter().enumerate() {
            let norm = r.norm();
            if norm > 0.0 {
                let ph = r / norm;
                for z in q.column_mut(k) {
                    *z *= ph;
                }
            }
        }
    }
    Ok(q)
}

/// The first column of a Haar unitary, i.e. `U|0>`, as a state.
pub fn haar_unitary_state(n: usize, rng: &mut RngStream) -> Result<StateVector> {
    let dim = StateVector::zero_state(n)?.dim();
    let u = sample_haar_unitary(dim, rng)?;
    Ok(StateVector::from_parts_unchecked(n, u.column(0).to_vec()))
}

/// Gate alphabet with selection weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSetSpec {
    pub alphabet: Vec<(GateKind, f64)>,
}

impl Default for GateSetSpec {
    fn default() -> Self {
        Self::uniform(&[GateKind::H, GateKind::P, GateKind::Cnot, GateKind::T, GateKind::I])
    }
}

impl GateSetSpec {
    pub fn uniform(kinds: &[GateKind]) -> Self {
        Self {
            alphabet: kinds.iter().map(|&k| (k, 1.0)).collect(),
        }
    }

    /// Parses `H,P,CNOT,T,I` or weighted `H:2,T:1`.
    pub fn parse(text: &str) -> Result<Self> {
        let alphabet = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|item| {
                let (name, w) = item.split_once(':').unwrap_or((item, "1"));
                let w: f64 = w
                    .trim()
                    .parse()
                    .map_err(|_| XebError::validation(format!("bad gate weight '{w}'")))?;
                Ok((name.trim().parse::<GateKind>()?, w))
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = Self { alphabet };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphabet.is_empty() {
            return Err(XebError::validation("empty gate alphabet"));
        }
        for &(kind, w) in &self.alphabet {
            if kind == GateKind::Custom {
                return Err(XebError::validation("custom gates cannot be sampled"));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(XebError::validation(format!("weight {w} for {kind} is invalid")));
            }
        }
        if self.alphabet.iter().map(|(_, w)| w).sum::<f64>() <= 0.0 {
            return Err(XebError::validation("gate weights sum to zero"));
        }
        Ok(())
    }

    fn single_qubit(&self) -> Vec<(GateKind, f64)> {
        self.alphabet
            .iter()
            .copied()
            .filter(|&(k, w)| k.arity() == 1 && w > 0.0)
            .collect()
    }
}

impl std::fmt::Display for GateSetSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let items: Vec<String> = self.alphabet.iter().map(|(k, w)| format!("{k}:{w}")).collect();
        f.write_str(&items.join(","))
    }
}

/// How long a random circuit runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CircuitLength {
    /// Full qubit sweeps.
    Cycles(usize),
    /// Sweep until exactly this many gates have been placed.
    Gates(usize),
}

struct GateDraw {
    all: Vec<GateKind>,
    all_idx: WeightedIndex<f64>,
    single: Vec<GateKind>,
    single_idx: WeightedIndex<f64>,
}

impl GateDraw {
    fn new(spec: &GateSetSpec) -> Result<Self> {
        spec.validate()?;
        let single = spec.single_qubit();
        if single.is_empty() {
            return Err(XebError::validation(
                "gate alphabet needs a single-qubit gate for the sweep boundary",
            ));
        }
        let werr = |e: rand::distr::weighted::Error| XebError::validation(e.to_string());
        Ok(Self {
            all: spec.alphabet.iter().map(|(k, _)| *k).collect(),
            all_idx: WeightedIndex::new(spec.alphabet.iter().map(|(_, w)| *w)).map_err(werr)?,
            single_idx: WeightedIndex::new(single.iter().map(|(_, w)| *w)).map_err(werr)?,
            single: single.into_iter().map(|(k, _)| k).collect(),
        })
    }

    fn draw(&self, rng: &mut RngStream, last_qubit: bool) -> GateKind {
        let kind = self.all[self.all_idx.sample(rng)];
        if kind == GateKind::Cnot && last_qubit {
            self.single[self.single_idx.sample(rng)]
        } else {
            kind
        }
    }
}

/// Random circuit built by sweeping the qubits in order each cycle. A CNOT
/// drawn at qubit `i` acts on `(i, i + 1)` and the sweep resumes at `i + 2`;
/// a CNOT drawn at the last qubit is redrawn from the single-qubit gates.
pub fn sample_random_circuit(
    n: usize,
    cycles: usize,
    spec: &GateSetSpec,
    rng: &mut RngStream,
) -> Result<Circuit> {
    if cycles == 0 {
        return Err(XebError::validation("cycles must be at least 1"));
    }
    sample_circuit(n, CircuitLength::Cycles(cycles), spec, rng)
}

pub fn sample_circuit(
    n: usize,
    length: CircuitLength,
    spec: &GateSetSpec,
    rng: &mut RngStream,
) -> Result<Circuit> {
    let mut circuit = Circuit::new(n)?;
    let draw = GateDraw::new(spec)?;
    let (max_cycles, max_gates) = match length {
        CircuitLength::Cycles(c) => (c, usize::MAX),
        CircuitLength::Gates(g) => (usize::MAX, g),
    };
    let mut cycle = 0;
    while cycle < max_cycles && circuit.gate_count() < max_gates {
        let mut q = 0;
        while q < n && circuit.gate_count() < max_gates {
            let op = match draw.draw(rng, q + 1 == n) {
                GateKind::Cnot => {
                    let op = GateOp::cnot(q, q + 1);
                    q += 2;
                    op
                }
                kind => {
                    q += 1;
                    GateOp::single(kind, q - 1)?
                }
            };
            circuit.push(op)?;
        }
        cycle += 1;
    }
    Ok(circuit)
}

/// Default scrambling depth for `n` qubits.
pub fn default_cycles(n: usize) -> usize {
    20 * n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u1_range_and_determinism() {
        let mut a = RngStream::new(5, 0);
        let mut b = RngStream::new(5, 0);
        for _ in 0..1000 {
            let x = sample_u1(&mut a);
            assert!((0.0..TAU).contains(&x));
            assert_eq!(x, sample_u1(&mut b));
        }
    }

    #[test]
    fn haar_state_is_normalized() {
        let mut rng = RngStream::new(1, 0);
        for n in 1..8 {
            let s = sample_haar_state(n, &mut rng).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_dim_one_is_a_phase() {
        let mut rng = RngStream::new(2, 0);
        let u = sample_haar_unitary(1, &mut rng).unwrap();
        assert!((u.get(0, 0).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unitary_dim_16() {
        let mut rng = RngStream::new(3, 0);
        let u = sample_haar_unitary(16, &mut rng).unwrap();
        assert!(u.unitarity_defect() < 1e-10);
        let raw = sample_haar_unitary_with(16, &mut rng, QrPhase::Raw).unwrap();
        assert!(raw.unitarity_defect() < 1e-10);
    }

    #[test]
    fn unitary_capacity() {
        let mut rng = RngStream::new(3, 0);
        assert!(matches!(
            sample_haar_unitary(MAX_UNITARY_DIM + 1, &mut rng),
            Err(XebError::Capacity { .. })
        ));
        assert!(sample_haar_unitary(0, &mut rng).is_err());
    }

    #[test]
    fn qr_reconstructs_input() {
        let mut rng = RngStream::new(4, 0);
        let g = CMatrix::from_fn(5, |_, _| complex_gaussian(&mut rng));
        let (q, r_diag) = householder_qr(g.clone());
        // Q^dag G is upper triangular with the recorded diagonal.
        let r = q.adjoint().matmul(&g);
        for col in 0..5 {
            for row in 0..5 {
                if row > col {
                    assert!(r.get(row, col).norm() < 1e-12);
                }
            }
            assert!((r.get(col, col) - r_diag[col]).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_alphabet_leaves_zero_state() {
        let mut rng = RngStream::new(9, 0);
        let spec = GateSetSpec::uniform(&[GateKind::I]);
        let c = sample_random_circuit(4, 6, &spec, &mut rng).unwrap();
        assert_eq!(c.gate_count(), 24);
        assert_eq!(c.run().unwrap(), StateVector::zero_state(4).unwrap());
    }

    #[test]
    fn cnot_only_alphabet_is_rejected() {
        let mut rng = RngStream::new(9, 0);
        let spec = GateSetSpec::uniform(&[GateKind::Cnot]);
        assert!(sample_random_circuit(4, 2, &spec, &mut rng).is_err());
    }

    #[test]
    fn sweeps_cover_each_qubit_once() {
        let mut rng = RngStream::new(10, 0);
        let spec = GateSetSpec::default();
        let n = 7;
        let c = sample_random_circuit(n, 30, &spec, &mut rng).unwrap();
        let covered: usize = c.ops().iter().map(|op| op.targets().len()).sum();
        assert_eq!(covered, 30 * n);
        for op in c.ops() {
            if op.kind() == GateKind::Cnot {
                assert_eq!(op.targets()[1], op.targets()[0] + 1);
            }
        }
    }

    #[test]
    fn gate_budget_is_exact() {
        let mut rng = RngStream::new(12, 0);
        let c = sample_circuit(10, CircuitLength::Gates(500), &GateSetSpec::default(), &mut rng)
            .unwrap();
        assert_eq!(c.gate_count(), 500);
    }

    #[test]
    fn circuits_are_reproducible() {
        let spec = GateSetSpec::default();
        let a = sample_random_circuit(5, 10, &spec, &mut RngStream::new(77, 4)).unwrap();
        let b = sample_random_circuit(5, 10, &spec, &mut RngStream::new(77, 4)).unwrap();
        let c = sample_random_circuit(5, 10, &spec, &mut RngStream::new(77, 5)).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_ne!(a.to_text(), c.to_text());
    }

    #[test]
    fn gate_set_parsing() {
        let s = GateSetSpec::parse("H,P,CNOT,T,I").unwrap();
        assert_eq!(s, GateSetSpec::default());
        let w = GateSetSpec::parse("H:2, T:0.5").unwrap();
        assert_eq!(w.alphabet, vec![(GateKind::H, 2.0), (GateKind::T, 0.5)]);
        assert!(GateSetSpec::parse("H:-1").is_err());
        assert!(GateSetSpec::parse("H:0,T:0").is_err());
        assert!(GateSetSpec::parse("Q").is_err());
        assert_eq!(GateSetSpec::parse(&w.to_string()).unwrap(), w);
    }
}
