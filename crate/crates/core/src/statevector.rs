//! Dense state-vector simulation.
//!
//! Amplitudes are stored in a flat array indexed by the integer basis label,
//! with qubit 0 as the least-significant bit. Gates are applied in place with
//! strided 1- and 2-qubit kernels; the full `2^n x 2^n` operator is never
//! materialized.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, XebError};
use crate::sampling::ProbabilityTable;

/// Largest supported register (2^24 amplitudes, 256 MiB).
pub const MAX_QUBITS: usize = 24;

/// Unitarity tolerance applied to gate matrices.
pub const UNITARITY_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n` qubits.
    pub fn zero_state(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(Self { n, amps })
    }

    /// Wraps raw amplitudes. The length must be a power of two and the
    /// vector must be normalized to within `1e-10`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(XebError::validation(format!(
                "amplitude vector length {len} is not 2^n with n >= 1"
            )));
        }
        let n = len.trailing_zeros() as usize;
        check_qubits(n)?;
        let state = Self { n, amps };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(XebError::validation(format!(
                "state is not normalized: |psi|^2 = {norm}"
            )));
        }
        Ok(state)
    }

    pub(crate) fn from_parts_unchecked(n: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n);
        Self { n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Hilbert-space dimension `N = 2^n`.
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `p(x) = |<x|psi>|^2`.
    pub fn probability(&self, x: usize) -> Result<f64> {
        self.amps
            .get(x)
            .map(|a| a.norm_sqr())
            .ok_or(XebError::Index {
                what: "basis state",
                index: x,
                size: self.amps.len(),
            })
    }

    pub fn full_distribution(&self) -> ProbabilityTable {
        let norm = self.norm_sqr();
        let probs = self.amps.iter().map(|a| a.norm_sqr() / norm).collect();
        ProbabilityTable::from_normalized(probs)
    }

    pub fn apply_gate(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate_for(self.n)?;
        match gate.kind {
            GateKind::I => {}
            GateKind::X => self.apply_x(gate.targets[0]),
            GateKind::P | GateKind::T => self.apply_phase(gate.targets[0], gate.matrix[3]),
            GateKind::Cnot => self.apply_cnot(gate.targets[0], gate.targets[1]),
            GateKind::H | GateKind::Custom if gate.targets.len() == 1 => {
                let m = [gate.matrix[0], gate.matrix[1], gate.matrix[2], gate.matrix[3]];
                self.apply_1q(gate.targets[0], &m)
            }
            GateKind::H | GateKind::Custom => {
                let mut m = [ZERO; 16];
                m.copy_from_slice(&gate.matrix);
                self.apply_2q(gate.targets[0], gate.targets[1], &m)
            }
        }
        Ok(())
    }

    /// Applies every gate of `circuit` in order.
    pub fn evolve(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits() != self.n {
            return Err(XebError::validation(format!(
                "circuit acts on {} qubits but state has {}",
                circuit.num_qubits(),
                self.n
            )));
        }
        for op in circuit.ops() {
            self.apply_gate(op)?;
        }
        Ok(())
    }

    fn apply_1q(&mut self, q: usize, m: &[Complex64; 4]) {
        let stride = 1usize << q;
        for block in self.amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = m[0] * x + m[1] * y;
                *a1 = m[2] * x + m[3] * y;
            }
        }
    }

    fn apply_phase(&mut self, q: usize, phase: Complex64) {
        let stride = 1usize << q;
        for block in self.amps.chunks_exact_mut(stride << 1) {
            for a in &mut block[stride..] {
                *a *= phase;
            }
        }
    }

    fn apply_x(&mut self, q: usize) {
        let stride = 1usize << q;
        for block in self.amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            lo.swap_with_slice(hi);
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let (cm, tm) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    /// Local index ordering: `l = bit(q0) + 2 * bit(q1)`.
    fn apply_2q(&mut self, q0: usize, q1: usize, m: &[Complex64; 16]) {
        let (m0, m1) = (1usize << q0, 1usize << q1);
        for base in 0..self.amps.len() {
            if base & (m0 | m1) != 0 {
                continue;
            }
            let idx = [base, base | m0, base | m1, base | m0 | m1];
            let v = idx.map(|i| self.amps[i]);
            for (r, &i) in idx.iter().enumerate() {
                self.amps[i] = (0..4).map(|c| m[r * 4 + c] * v[c]).sum();
            }
        }
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(XebError::Capacity {
            what: "qubit count",
            value: n,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    /// Phase gate `diag(1, i)`.
    P,
    /// `pi/8` gate `diag(1, e^{i pi/4})`.
    T,
    X,
    Cnot,
    I,
    Custom,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot => 2,
            _ => 1,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::P => "P",
            GateKind::T => "T",
            GateKind::X => "X",
            GateKind::Cnot => "CNOT",
            GateKind::I => "I",
            GateKind::Custom => "U",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

impl FromStr for GateKind {
    type Err = XebError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "H" => GateKind::H,
            "P" | "S" => GateKind::P,
            "T" => GateKind::T,
            "X" => GateKind::X,
            "CNOT" | "CX" => GateKind::Cnot,
            "I" | "ID" => GateKind::I,
            "U" => GateKind::Custom,
            other => return Err(XebError::validation(format!("unknown gate '{other}'"))),
        })
    }
}

/// A gate bound to its target qubits, carrying its matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct GateOp {
    kind: GateKind,
    targets: Vec<usize>,
    matrix: Vec<Complex64>,
}

impl GateOp {
    pub fn single(kind: GateKind, q: usize) -> Result<Self> {
        let s = FRAC_1_SQRT_2;
        let matrix = match kind {
            GateKind::H => vec![c(s), c(s), c(s), c(-s)],
            GateKind::P => vec![ONE, ZERO, ZERO, Complex64::i()],
            GateKind::T => vec![ONE, ZERO, ZERO, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
            GateKind::X => vec![ZERO, ONE, ONE, ZERO],
            GateKind::I => vec![ONE, ZERO, ZERO, ONE],
            GateKind::Cnot | GateKind::Custom => {
                return Err(XebError::validation(format!("{kind} is not a fixed single-qubit gate")))
            }
        };
        Ok(Self {
            kind,
            targets: vec![q],
            matrix,
        })
    }

    pub fn h(q: usize) -> Self {
        Self::single(GateKind::H, q).expect("fixed gate")
    }

    pub fn p(q: usize) -> Self {
        Self::single(GateKind::P, q).expect("fixed gate")
    }

    pub fn t(q: usize) -> Self {
        Self::single(GateKind::T, q).expect("fixed gate")
    }

    pub fn x(q: usize) -> Self {
        Self::single(GateKind::X, q).expect("fixed gate")
    }

    pub fn id(q: usize) -> Self {
        Self::single(GateKind::I, q).expect("fixed gate")
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        let mut matrix = vec![ZERO; 16];
        // |c t> with l = c + 2t; control set flips the target bit.
        for (r, col) in [(0, 0), (3, 1), (2, 2), (1, 3)] {
            matrix[r * 4 + col] = ONE;
        }
        Self {
            kind: GateKind::Cnot,
            targets: vec![control, target],
            matrix,
        }
    }

    /// Arbitrary 1- or 2-qubit unitary. `matrix` is row-major, 4 or 16 entries.
    pub fn custom(targets: &[usize], matrix: Vec<Complex64>) -> Result<Self> {
        let dim = match targets.len() {
            1 => 2,
            2 => 4,
            k => return Err(XebError::validation(format!("custom gate on {k} qubits"))),
        };
        if matrix.len() != dim * dim {
            return Err(XebError::validation(format!(
                "custom gate matrix has {} entries, expected {}",
                matrix.len(),
                dim * dim
            )));
        }
        let defect = unitarity_defect(&matrix, dim);
        if defect >= UNITARITY_TOL {
            return Err(XebError::validation(format!(
                "gate matrix is not unitary: max|M^dag M - I| = {defect:e}"
            )));
        }
        Ok(Self {
            kind: GateKind::Custom,
            targets: targets.to_vec(),
            matrix,
        })
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    fn validate_for(&self, n: usize) -> Result<()> {
        for &q in &self.targets {
            if q >= n {
                return Err(XebError::Index {
                    what: "qubit",
                    index: q,
                    size: n,
                });
            }
        }
        if self.targets.len() == 2 && self.targets[0] == self.targets[1] {
            return Err(XebError::validation(format!(
                "two-qubit gate with repeated target {}",
                self.targets[0]
            )));
        }
        Ok(())
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `max |(M^dag M - I)_ij|` for a row-major `dim x dim` matrix.
pub fn unitarity_defect(m: &[Complex64], dim: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let s: Complex64 = (0..dim).map(|k| m[k * dim + i].conj() * m[k * dim + j]).sum();
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((s - target).norm());
        }
    }
    worst
}

/// An ordered gate program on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(n: usize) -> Result<Self> {
        check_qubits(n)?;
        Ok(Self { n, ops: Vec::new() })
    }

    pub fn push(&mut self, op: GateOp) -> Result<()> {
        op.validate_for(self.n)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    /// Total number of gates `g`.
    pub fn gate_count(&self) -> usize {
        self.ops.len()
    }

    /// Runs the circuit on `|0...0>`.
    pub fn run(&self) -> Result<StateVector> {
        let mut psi = StateVector::zero_state(self.n)?;
        psi.evolve(self)?;
        Ok(psi)
    }

    /// Line-oriented text: header `n=<qubits>`, then one `GATE q0 [q1]` per
    /// line. Custom gates append their row-major entries as `re,im` pairs.
    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\n", self.n);
        for op in &self.ops {
            out.push_str(op.kind.mnemonic());
            for q in &op.targets {
                out.push_str(&format!(" {q}"));
            }
            if op.kind == GateKind::Custom {
                for z in &op.matrix {
                    out.push_str(&format!(" {:?},{:?}", z.re, z.im));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(XebError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let n: usize = header
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or(XebError::Parse {
                line: hline,
                msg: format!("expected 'n=<qubits>', got '{header}'"),
            })?;
        let mut circuit = Circuit::new(n)?;
        for (line, body) in lines {
            let perr = |msg: String| XebError::Parse { line, msg };
            let mut fields = body.split_whitespace();
            let kind: GateKind = fields
                .next()
                .unwrap_or_default()
                .parse()
                .map_err(|e: XebError| perr(e.to_string()))?;
            let rest: Vec<&str> = fields.collect();
            let op = if kind == GateKind::Custom {
                let nq = rest.iter().take_while(|f| !f.contains(',')).count();
                let targets = parse_qubits(&rest[..nq]).map_err(&perr)?;
                let matrix = rest[nq..]
                    .iter()
                    .map(|f| parse_complex(f))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| perr("bad matrix entry".into()))?;
                GateOp::custom(&targets, matrix).map_err(|e| perr(e.to_string()))?
            } else {
                let targets = parse_qubits(&rest).map_err(&perr)?;
                if targets.len() != kind.arity() {
                    return Err(perr(format!("{kind} takes {} qubit(s)", kind.arity())));
                }
                match kind {
                    GateKind::Cnot => GateOp::cnot(targets[0], targets[1]),
                    _ => GateOp::single(kind, targets[0]).map_err(|e| perr(e.to_string()))?,
                }
            };
            circuit.push(op).map_err(|e| perr(e.to_string()))?;
        }
        Ok(circuit)
    }
}

fn parse_qubits(fields: &[&str]) -> std::result::Result<Vec<usize>, String> {
    fields
        .iter()
        .map(|f| f.parse::<usize>().map_err(|_| format!("bad qubit index '{f}'")))
        .collect()
}

fn parse_complex(field: &str) -> Option<Complex64> {
    let (re, im) = field.split_once(',')?;
    Some(Complex64::new(re.parse().ok()?, im.parse().ok()?))
}
