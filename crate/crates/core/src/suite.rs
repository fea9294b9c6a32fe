//! Statistical checks of the Haar samplers.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::haar::{haar_unitary_state, sample_haar_state, sample_haar_unitary, sample_haar_unitary_with, sample_u1, QrPhase};
use crate::error::Result;
use crate::rng::RngStream;
use crate::stats::{chi_square_homogeneity, ks_one_sample, ks_two_sample, mean_stderr};

/// Significance level for the p-value based checks.
pub const ALPHA: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarSuiteConfig {
    pub seed: u64,
    pub draws: usize,
    /// Unitary dimensions to check; left invariance runs for those >= 2.
    pub dims: Vec<usize>,
    /// Register sizes for the state-versus-unitary comparison.
    pub state_qubits: Vec<usize>,
    pub qr_phase: QrPhase,
}

impl Default for HaarSuiteConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            draws: 10_000,
            dims: vec![1, 2, 8, 16],
            state_qubits: vec![3],
            qr_phase: QrPhase::Fixed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteVerdict {
    pub name: String,
    pub passed: bool,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub detail: String,
}

fn unitary(dim: usize, rng: &mut RngStream, phase: QrPhase) -> Result<crate::haar::CMatrix> {
    sample_haar_unitary_with(dim, rng, phase)
}

fn unitarity(cfg: &HaarSuiteConfig, dim: usize) -> Result<SuiteVerdict> {
    let mut rng = RngStream::new(cfg.seed, 100 + dim as u64);
    let worst = (0..20)
        .map(|_| unitary(dim, &mut rng, cfg.qr_phase).map(|u| u.unitarity_defect()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(SuiteVerdict {
        name: format!("unitarity_dim{dim}"),
        passed: worst < 1e-10,
        statistic: worst,
        p_value: None,
        detail: "max |M^dag M - I| over 20 draws < 1e-10".into(),
    })
}

/// Compares `|tr M|` with `|tr(U0 M)|` over independent draws.
fn left_invariance(cfg: &HaarSuiteConfig, dim: usize) -> Result<SuiteVerdict> {
    let u0 = sample_haar_unitary(dim, &mut RngStream::new(cfg.seed, 200 + dim as u64))?;
    let mut ra = RngStream::new(cfg.seed, 300 + dim as u64);
    let mut rb = RngStream::new(cfg.seed, 400 + dim as u64);
    let mut a = Vec::with_capacity(cfg.draws);
    let mut b = Vec::with_capacity(cfg.draws);
    for _ in 0..cfg.draws {
        a.push(unitary(dim, &mut ra, cfg.qr_phase)?.trace().norm());
        b.push(u0.matmul(&unitary(dim, &mut rb, cfg.qr_phase)?).trace().norm());
    }
    let t = ks_two_sample(&a, &b);
    Ok(SuiteVerdict {
        name: format!("left_invariance_dim{dim}"),
        passed: t.p_value > ALPHA,
        statistic: t.statistic,
        p_value: Some(t.p_value),
        detail: "two-sample KS of |tr M| vs |tr U0 M|".into(),
    })
}

fn trace_moment(cfg: &HaarSuiteConfig, dim: usize) -> Result<SuiteVerdict> {
    let mut rng = RngStream::new(cfg.seed, 500 + dim as u64);
    let xs = (0..cfg.draws)
        .map(|_| unitary(dim, &mut rng, cfg.qr_phase).map(|u| u.trace().norm_sqr()))
        .collect::<Result<Vec<_>>>()?;
    let ms = mean_stderr(&xs);
    let z = (ms.mean - 1.0) / ms.stderr;
    Ok(SuiteVerdict {
        name: format!("trace_moment_dim{dim}"),
        passed: z.abs() < 5.0,
        statistic: ms.mean,
        p_value: None,
        detail: format!("E|tr M|^2 = {:.4} ± {:.4}, expected 1 within 5 SE", ms.mean, ms.stderr),
    })
}

fn u1_arcs(cfg: &HaarSuiteConfig) -> SuiteVerdict {
    let mut rng = RngStream::new(cfg.seed, 600);
    let phis: Vec<f64> = (0..cfg.draws).map(|_| sample_u1(&mut rng)).collect();
    let arcs = [(0.0, TAU / 6.0), (1.0, 2.5), (4.0, 6.0), (5.5, TAU)];
    let mut worst_z: f64 = 0.0;
    for (lo, hi) in arcs {
        let q = (hi - lo) / TAU;
        let f = phis.iter().filter(|&&p| p >= lo && p < hi).count() as f64 / phis.len() as f64;
        let sigma = (q * (1.0 - q) / phis.len() as f64).sqrt();
        worst_z = worst_z.max((f - q).abs() / sigma);
    }
    SuiteVerdict {
        name: "u1_arc_uniformity".into(),
        passed: worst_z < 3.0,
        statistic: worst_z,
        p_value: None,
        detail: "arc fractions within 3 binomial sigma of length/2pi".into(),
    }
}

fn u1_shift(cfg: &HaarSuiteConfig) -> SuiteVerdict {
    const BINS: usize = 20;
    let shift = 1.234;
    let mut ra = RngStream::new(cfg.seed, 700);
    let mut rb = RngStream::new(cfg.seed, 701);
    let bin = |phi: f64| ((phi / TAU * BINS as f64) as usize).min(BINS - 1);
    let mut a = [0u64; BINS];
    let mut b = [0u64; BINS];
    for _ in 0..cfg.draws {
        a[bin(sample_u1(&mut ra))] += 1;
        b[bin((sample_u1(&mut rb) + shift) % TAU)] += 1;
    }
    let t = chi_square_homogeneity(&a, &b);
    SuiteVerdict {
        name: "u1_shift_invariance".into(),
        passed: t.p_value > ALPHA,
        statistic: t.statistic,
        p_value: Some(t.p_value),
        detail: "chi-square homogeneity of phi vs (phi + 1.234) mod 2pi".into(),
    }
}

fn state_vs_unitary(cfg: &HaarSuiteConfig, n: usize) -> Result<SuiteVerdict> {
    let mut ra = RngStream::new(cfg.seed, 800 + n as u64);
    let mut rb = RngStream::new(cfg.seed, 900 + n as u64);
    let mut a = Vec::with_capacity(cfg.draws);
    let mut b = Vec::with_capacity(cfg.draws);
    for _ in 0..cfg.draws {
        a.push(sample_haar_state(n, &mut ra)?.probability(0)?);
        b.push(haar_unitary_state(n, &mut rb)?.probability(0)?);
    }
    let t = ks_two_sample(&a, &b);
    Ok(SuiteVerdict {
        name: format!("state_vs_unitary_n{n}"),
        passed: t.p_value > ALPHA,
        statistic: t.statistic,
        p_value: Some(t.p_value),
        detail: "two-sample KS of p(0) from Haar states vs U|0>".into(),
    })
}

fn single_qubit_uniform(cfg: &HaarSuiteConfig) -> Result<SuiteVerdict> {
    let mut rng = RngStream::new(cfg.seed, 1000);
    let p0 = (0..cfg.draws)
        .map(|_| sample_haar_state(1, &mut rng).and_then(|s| s.probability(0)))
        .collect::<Result<Vec<_>>>()?;
    let t = ks_one_sample(&p0, |x| x.clamp(0.0, 1.0));
    Ok(SuiteVerdict {
        name: "single_qubit_p0_uniform".into(),
        passed: t.p_value > ALPHA,
        statistic: t.statistic,
        p_value: Some(t.p_value),
        detail: "one-sample KS of p(0) at n=1 against U[0,1]".into(),
    })
}

pub fn run_haar_suite(cfg: &HaarSuiteConfig) -> Result<Vec<SuiteVerdict>> {
    let mut out = Vec::new();
    for &dim in &cfg.dims {
        out.push(unitarity(cfg, dim)?);
    }
    for &dim in cfg.dims.iter().filter(|&&d| (2..=8).contains(&d)) {
        out.push(left_invariance(cfg, dim)?);
    }
    if cfg.dims.contains(&8) {
        out.push(trace_moment(cfg, 8)?);
    }
    out.push(u1_arcs(cfg));
    out.push(u1_shift(cfg));
    if cfg.dims.iter().any(|&d| d >= 2) {
        for &n in &cfg.state_qubits {
            out.push(state_vs_unitary(cfg, n)?);
        }
        out.push(single_qubit_uniform(cfg)?);
    }
    Ok(out)
}
