//! Porter-Thomas densities, entropy constants, tail masses and the
//! sum-to-expectation identity, plus empirical histograms of output
//! probabilities.
//!
//! For a Haar-random state in dimension `N` each output probability has the
//! exact density `(N-1)(1-p)^(N-2)` on `[0, 1]`, which tends to the
//! Porter-Thomas law `N e^(-N p)` as `N` grows. The large-`N` law gives
//! closed forms for the entropy of the ideal distribution
//! (`log N - 1 + gamma`) and for the cross entropy of a uniform guesser
//! (`log N + gamma`), which are what [`constants`] returns.
//!
//! Note on moments: `int p N e^(-N p) dp` is exactly `1/N`. The non-uniform
//! first moment is the mean probability of a bitstring *sampled from the
//! circuit*, `sum_x p(x)^2`, whose ensemble mean is `2/N`. Both appear in
//! [`sum_identity_check`] as [`TestFunction::P`] and [`TestFunction::PSquared`].

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Result, XebError};
use crate::quad;
use crate::sampling::ProbabilityTable;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Upper limit of Porter-Thomas integrals in units of `1/N`; the mass beyond is `e^-50`.
pub const PT_CUTOFF: f64 = 50.0;

const QUAD_ABS_TOL: f64 = 1e-12;
const QUAD_REL_TOL: f64 = 1e-12;

fn check_dim(dim: usize, min: usize) -> Result<f64> {
    if dim < min {
        return Err(XebError::domain(format!("dimension N = {dim} must be >= {min}")));
    }
    Ok(dim as f64)
}

/// Porter-Thomas density `N e^(-N p)`.
pub fn pt_pdf(p: f64, dim: usize) -> Result<f64> {
    let n = check_dim(dim, 1)?;
    if !(p >= 0.0) {
        return Err(XebError::domain(format!("probability {p} is negative")));
    }
    Ok(n * (-n * p).exp())
}

/// Exact finite-`N` density `(N-1)(1-p)^(N-2)` on `[0, 1]`.
pub fn exact_pdf(p: f64, dim: usize) -> Result<f64> {
    let n = check_dim(dim, 2)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(XebError::domain(format!("probability {p} outside [0, 1]")));
    }
    Ok((n - 1.0) * (1.0 - p).powi(dim as i32 - 2))
}

/// The two output-probability laws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PtLaw {
    /// `N e^(-N p)`.
    Asymptotic,
    /// `(N-1)(1-p)^(N-2)`.
    Exact,
}

impl PtLaw {
    pub fn cdf(self, p: f64, dim: usize) -> f64 {
        let n = dim as f64;
        let p = p.max(0.0);
        match self {
            PtLaw::Asymptotic => -(-n * p).exp_m1(),
            PtLaw::Exact if p >= 1.0 => 1.0,
            PtLaw::Exact => 1.0 - (1.0 - p).powi(dim as i32 - 1),
        }
    }

    pub fn pdf(self, p: f64, dim: usize) -> f64 {
        match self {
            PtLaw::Asymptotic => pt_pdf(p, dim).unwrap_or(0.0),
            PtLaw::Exact => exact_pdf(p, dim).unwrap_or(0.0),
        }
    }

    /// Probability mass on `[a, b)`.
    pub fn mass(self, a: f64, b: f64, dim: usize) -> f64 {
        self.cdf(b, dim) - self.cdf(a, dim)
    }
}

/// `J(N) = int_1^inf N e^(-N p) dp = e^(-N)`.
pub fn tail_mass(dim: usize) -> f64 {
    (-(dim as f64)).exp()
}

/// `J(N)` by direct quadrature of the density.
pub fn tail_mass_quadrature(dim: usize) -> f64 {
    let n = dim.max(1) as f64;
    quad::integrate(|p| n * (-n * p).exp(), 1.0, 1.0 + PT_CUTOFF / n, 0.0, QUAD_REL_TOL).value
}

/// `E[f(p)]` under `N e^(-N p)`, by quadrature in `u = N p`.
pub fn pt_expectation<F: Fn(f64) -> f64>(dim: usize, f: F) -> f64 {
    let n = dim as f64;
    quad::integrate(|u| f(u / n) * (-u).exp(), 0.0, PT_CUTOFF, QUAD_ABS_TOL, QUAD_REL_TOL).value
}

/// Large-`N` entropy constants, in nats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtConstants {
    pub dim: usize,
    pub gamma: f64,
    /// Entropy of the ideal output distribution, `log N - 1 + gamma`.
    pub h_ideal: f64,
    /// Cross entropy of a uniform sampler against the ideal distribution, `log N + gamma`.
    pub h0: f64,
    /// `E[log p] = -(log N + gamma)`.
    pub expected_log_p: f64,
}

pub fn constants(dim: usize) -> Result<PtConstants> {
    let n = check_dim(dim, 2)?;
    let h0 = n.ln() + EULER_GAMMA;
    Ok(PtConstants {
        dim,
        gamma: EULER_GAMMA,
        h_ideal: h0 - 1.0,
        h0,
        expected_log_p: -h0,
    })
}

/// `log N + gamma`, defined for any `N >= 1`.
pub fn h0(dim: usize) -> f64 {
    (dim as f64).ln() + EULER_GAMMA
}

/// The same constants evaluated from their defining integrals.
pub fn constants_by_quadrature(dim: usize) -> Result<PtConstants> {
    let n = check_dim(dim, 2)?;
    let expected_log_p = pt_expectation(dim, f64::ln);
    let h_ideal = -n * pt_expectation(dim, |p| p * p.ln());
    Ok(PtConstants {
        dim,
        gamma: EULER_GAMMA,
        h_ideal,
        h0: -expected_log_p,
        expected_log_p,
    })
}

/// Ensemble mean of `-sum_x p(x) log p(x)` under the exact finite-`N` law,
/// `H_N - 1` with `H_N` the harmonic number. Differs from `log N - 1 + gamma`
/// at small `N` (0.5 versus 0.27 at `N = 2`).
pub fn exact_expected_entropy(dim: usize) -> Result<f64> {
    check_dim(dim, 2)?;
    Ok((2..=dim).map(|k| 1.0 / k as f64).sum())
}

/// Pooled histogram of output probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub dim: usize,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Number of values inside `[edges[0], edges[last]]`; equals `sum(counts)`.
    pub total: u64,
    /// Values above the last edge.
    pub overflow: u64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn pooled(&self) -> u64 {
        self.total + self.overflow
    }

    /// Fraction of all pooled values per bin.
    pub fn masses(&self) -> Vec<f64> {
        let pooled = self.pooled() as f64;
        self.counts.iter().map(|&c| c as f64 / pooled).collect()
    }

    pub fn densities(&self) -> Vec<f64> {
        self.masses()
            .iter()
            .zip(self.edges.windows(2))
            .map(|(m, e)| m / (e[1] - e[0]))
            .collect()
    }

    fn law_masses(&self, law: PtLaw) -> (Vec<f64>, f64) {
        let masses = self
            .edges
            .windows(2)
            .map(|e| law.mass(e[0], e[1], self.dim))
            .collect();
        let last = *self.edges.last().expect("edges");
        (masses, 1.0 - law.cdf(last, self.dim))
    }

    /// Total-variation distance between the binned empirical distribution and
    /// `law`, with the region above the last edge as one extra bin.
    pub fn tv_distance(&self, law: PtLaw) -> f64 {
        let (model, model_over) = self.law_masses(law);
        let over = self.overflow as f64 / self.pooled() as f64;
        let body: f64 = self
            .masses()
            .iter()
            .zip(&model)
            .map(|(a, b)| (a - b).abs())
            .sum();
        0.5 * (body + (over - model_over).abs())
    }

    /// Total-variation distance between the two laws on this binning.
    pub fn law_tv_distance(&self) -> f64 {
        let (a, ao) = self.law_masses(PtLaw::Asymptotic);
        let (b, bo) = self.law_masses(PtLaw::Exact);
        let body: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        0.5 * (body + (ao - bo).abs())
    }

    /// CSV with `bin_left,bin_right,count,empirical_density,pt_density,exact_density`.
    /// Model densities are bin averages.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "bin_left",
            "bin_right",
            "count",
            "empirical_density",
            "pt_density",
            "exact_density",
        ])?;
        for ((e, &count), dens) in self.edges.windows(2).zip(&self.counts).zip(self.densities()) {
            let width = e[1] - e[0];
            let pt = PtLaw::Asymptotic.mass(e[0], e[1], self.dim) / width;
            let exact = PtLaw::Exact.mass(e[0], e[1], self.dim) / width;
            w.write_record([
                e[0].to_string(),
                e[1].to_string(),
                count.to_string(),
                dens.to_string(),
                pt.to_string(),
                exact.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn common_dim(tables: &[ProbabilityTable]) -> Result<usize> {
    let first = tables
        .first()
        .ok_or_else(|| XebError::validation("no tables to histogram"))?
        .dim();
    if let Some(t) = tables.iter().find(|t| t.dim() != first) {
        return Err(XebError::validation(format!(
            "mixed dimensions: {} and {}",
            first,
            t.dim()
        )));
    }
    Ok(first)
}

/// Histogram over `[0, max p observed]` pooling every entry of every table.
pub fn empirical_histogram(tables: &[ProbabilityTable], bins: usize) -> Result<Histogram> {
    common_dim(tables)?;
    let max = tables
        .iter()
        .flat_map(|t| t.probs().iter().copied())
        .fold(0.0, f64::max);
    histogram_in_range(tables, bins, if max > 0.0 { max } else { 1.0 })
}

/// Histogram over `[0, upper]`; larger values go to the overflow count.
pub fn histogram_in_range(tables: &[ProbabilityTable], bins: usize, upper: f64) -> Result<Histogram> {
    let dim = common_dim(tables)?;
    if bins < 10 {
        return Err(XebError::validation(format!("need at least 10 bins, got {bins}")));
    }
    if !(upper > 0.0) {
        return Err(XebError::validation("histogram upper edge must be positive"));
    }
    let width = upper / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    let mut overflow = 0;
    for &p in tables.iter().flat_map(|t| t.probs()) {
        if p > upper {
            overflow += 1;
        } else {
            counts[((p / width) as usize).min(bins - 1)] += 1;
        }
    }
    Ok(Histogram {
        dim,
        edges,
        total: counts.iter().sum(),
        counts,
        overflow,
    })
}

/// The standard binning for comparing against the Porter-Thomas law: 50 bins on `[0, 6/N]`.
pub fn pt_histogram(tables: &[ProbabilityTable]) -> Result<Histogram> {
    let dim = common_dim(tables)?;
    histogram_in_range(tables, 50, 6.0 / dim as f64)
}

/// Test functions for the sum-to-expectation identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestFunction {
    PLogP,
    LogP,
    P,
    PSquared,
}

impl TestFunction {
    pub fn eval(self, p: f64) -> f64 {
        match self {
            TestFunction::PLogP if p == 0.0 => 0.0,
            TestFunction::PLogP => p * p.ln(),
            TestFunction::LogP => p.ln(),
            TestFunction::P => p,
            TestFunction::PSquared => p * p,
        }
    }

    fn defined_at(self, p: f64) -> bool {
        !(self == TestFunction::LogP && p <= 0.0)
    }
}

/// Both sides of `sum_x f(p(x)) = N E[f(p)]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumIdentity {
    pub lhs: f64,
    pub rhs: f64,
    /// Entries where `f` is undefined; left out of `lhs`.
    pub excluded: Vec<usize>,
}

pub fn sum_identity_check(table: &ProbabilityTable, f: TestFunction) -> SumIdentity {
    let mut lhs = 0.0;
    let mut excluded = Vec::new();
    for (x, &p) in table.probs().iter().enumerate() {
        if f.defined_at(p) {
            lhs += f.eval(p);
        } else {
            excluded.push(x);
        }
    }
    let dim = table.dim();
    let rhs = dim as f64 * pt_expectation(dim, |p| f.eval(p));
    SumIdentity { lhs, rhs, excluded }
}
