//! Cross-entropy benchmarking.
//!
//! A sampler under test (`spoofer`) is scored by its cross entropy against
//! the ideal output distribution, `H(p_A, p) = -sum_x p_A(x) log p(x)`, and
//! by `delta_h = (log N + gamma) - H(p_A, p)`, which is 0 for a uniform
//! guesser and 1 (in ensemble mean) for a perfect sampler. The log-ratio
//! experiment compares `log Pr(S)` of a reference sample `S` (the quantum
//! device, noiseless by default) with `log Pr(S_spoof)`, both evaluated on the
//! ideal table.
//!
//! Reports carry both sampled estimates and the exact-table values they
//! estimate.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, XebError};
use crate::haar::{sample_circuit, sample_haar_state, CircuitLength, GateSetSpec};
use crate::noise;
use crate::ptheory::{self, h0};
use crate::rng::RngStream;
use crate::sampling::{
    draw_sample, log_pr, spoofer_table, BitstringSample, ProbabilityTable, SamplerKind,
};
use crate::stats::mean_stderr;

/// A cross entropy in nats; infinite when the sampler puts weight on a
/// bitstring the ideal distribution never produces.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossEntropy {
    pub nats: f64,
    pub offending: Vec<usize>,
}

impl CrossEntropy {
    pub fn is_finite(&self) -> bool {
        self.offending.is_empty()
    }
}

/// `-sum_x p_a(x) log p_ideal(x)`.
pub fn cross_entropy_exact(p_a: &ProbabilityTable, p_ideal: &ProbabilityTable) -> Result<CrossEntropy> {
    if p_a.dim() != p_ideal.dim() {
        return Err(XebError::validation(format!(
            "tables differ in size: {} vs {}",
            p_a.dim(),
            p_ideal.dim()
        )));
    }
    let mut nats = 0.0;
    let mut offending = Vec::new();
    for (x, (&a, &p)) in p_a.probs().iter().zip(p_ideal.probs()).enumerate() {
        if a == 0.0 {
            continue;
        }
        if p > 0.0 {
            nats -= a * p.ln();
        } else {
            offending.push(x);
        }
    }
    if !offending.is_empty() {
        nats = f64::INFINITY;
    }
    Ok(CrossEntropy { nats, offending })
}

/// `-(1/m) sum_{x in S} log p_ideal(x)`.
pub fn cross_entropy_sampled(sample: &BitstringSample, p_ideal: &ProbabilityTable) -> Result<CrossEntropy> {
    let lp = log_pr(sample, p_ideal)?;
    Ok(CrossEntropy {
        nats: -lp.value / sample.m() as f64,
        offending: lp.offending,
    })
}

/// `delta_h = (log N + gamma) - h_cross`.
pub fn delta_h(h_cross: f64, dim: usize) -> f64 {
    h0(dim) - h_cross
}

/// Exact `delta_h` of distribution `p_a` against `p_ideal`.
pub fn delta_h_exact(p_a: &ProbabilityTable, p_ideal: &ProbabilityTable) -> Result<f64> {
    Ok(delta_h(cross_entropy_exact(p_a, p_ideal)?.nats, p_ideal.dim()))
}

/// Where each experiment's ideal state comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CircuitSource {
    /// Random gate circuit with this many sweeps.
    Gates { cycles: usize },
    /// Random gate circuit with exactly this many gates.
    GateBudget { gates: usize },
    /// Haar-random state (no gate program; `g = 0`).
    Haar,
}

/// The device side of the log-ratio experiment.
#[derive(Clone, Debug, PartialEq)]
pub enum Reference {
    Sampler(SamplerKind),
    /// Depolarizing mixture with `F = e^(-r g)`, `g` the circuit's gate count.
    GateNoise { rate: f64 },
}

impl Reference {
    pub fn label(&self) -> String {
        match self {
            Reference::Sampler(kind) => kind.label(),
            Reference::GateNoise { rate } => format!("gate-noise(r={rate})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub n: usize,
    pub source: CircuitSource,
    pub m: usize,
    pub spoofer: SamplerKind,
    pub reference: Reference,
    pub gate_set: GateSetSpec,
}

impl ExperimentSpec {
    /// Ideal reference, default gate set.
    pub fn new(n: usize, source: CircuitSource, m: usize, spoofer: SamplerKind) -> Self {
        Self {
            n,
            source,
            m,
            spoofer,
            reference: Reference::Sampler(SamplerKind::Ideal),
            gate_set: GateSetSpec::default(),
        }
    }

    pub fn with_reference(mut self, reference: Reference) -> Self {
        self.reference = reference;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(XebError::validation("m must be at least 1"));
        }
        if let CircuitSource::Gates { cycles: 0 } = self.source {
            return Err(XebError::validation("cycles must be at least 1"));
        }
        self.spoofer.validate()?;
        match &self.reference {
            Reference::Sampler(kind) => kind.validate(),
            Reference::GateNoise { rate } => noise::NoiseSpec::new(*rate, 0).map(|_| ()),
        }
    }
}

/// Statistics for one circuit. `log_pr_ideal` is `log Pr(S)` of the reference
/// sample; `h_cross`/`delta_h` score the spoofer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XebReport {
    pub circuit_id: String,
    pub n: usize,
    pub m: usize,
    pub gate_count: usize,
    pub reference: String,
    pub spoofer: String,
    /// Fidelity of the reference sampler (1 when noiseless).
    pub fidelity: f64,
    pub h_cross: f64,
    pub h_cross_exact: f64,
    pub delta_h: f64,
    pub delta_h_exact: f64,
    pub reference_h_cross: f64,
    pub reference_delta_h: f64,
    pub reference_delta_h_exact: f64,
    pub log_pr_ideal: f64,
    pub log_pr_spoof: f64,
    pub log_ratio: f64,
    /// `m (H(p_spoof, p) - H(p_ref, p))`, the exact conditional mean of `log_ratio`.
    pub log_ratio_expected: f64,
    /// `-sum_x p(x) log p(x)` of the ideal table.
    pub entropy_exact: f64,
}

impl XebReport {
    pub fn is_finite(&self) -> bool {
        self.log_pr_ideal.is_finite() && self.log_pr_spoof.is_finite()
    }
}

/// Ideal output table for one draw from `source`, and its gate count.
pub fn sample_ideal_table(
    n: usize,
    source: CircuitSource,
    gate_set: &GateSetSpec,
    rng: &mut RngStream,
) -> Result<(ProbabilityTable, usize)> {
    let length = match source {
        CircuitSource::Haar => return Ok((sample_haar_state(n, rng)?.full_distribution(), 0)),
        CircuitSource::Gates { cycles } => CircuitLength::Cycles(cycles),
        CircuitSource::GateBudget { gates } => CircuitLength::Gates(gates),
    };
    let circuit = sample_circuit(n, length, gate_set, rng)?;
    Ok((circuit.run()?.full_distribution(), circuit.gate_count()))
}

/// One circuit of the log-ratio experiment: build the ideal table, draw `m`
/// bitstrings from the reference and from the spoofer, and score both
/// against the ideal table.
pub fn run_circuit_experiment(spec: &ExperimentSpec, circuit_id: &str, rng: &mut RngStream) -> Result<XebReport> {
    spec.validate()?;
    let (ideal, gate_count) = sample_ideal_table(spec.n, spec.source, &spec.gate_set, rng)?;
    let dim = ideal.dim();

    let (reference_kind, fidelity) = match &spec.reference {
        Reference::Sampler(kind) => {
            let f = match kind {
                SamplerKind::NoisyMixture { fidelity } => *fidelity,
                SamplerKind::Uniform => 0.0,
                _ => 1.0,
            };
            (kind.clone(), f)
        }
        Reference::GateNoise { rate } => {
            let fidelity = noise::fidelity(*rate, gate_count)?;
            (SamplerKind::NoisyMixture { fidelity }, fidelity)
        }
    };
    let ref_table = spoofer_table(&reference_kind, &ideal)?;
    let spoof_table = spoofer_table(&spec.spoofer, &ideal)?;

    let ref_sample = draw_sample(&ref_table, spec.m, rng, &reference_kind.label(), circuit_id)?;
    let spoof_sample = draw_sample(&spoof_table, spec.m, rng, &spec.spoofer.label(), circuit_id)?;

    let log_pr_ideal = log_pr(&ref_sample, &ideal)?.value;
    let log_pr_spoof = log_pr(&spoof_sample, &ideal)?.value;
    let m = spec.m as f64;
    let h_cross = -log_pr_spoof / m;
    let reference_h_cross = -log_pr_ideal / m;
    let h_cross_exact = cross_entropy_exact(&spoof_table, &ideal)?.nats;
    let ref_h_cross_exact = cross_entropy_exact(&ref_table, &ideal)?.nats;

    Ok(XebReport {
        circuit_id: circuit_id.to_owned(),
        n: spec.n,
        m: spec.m,
        gate_count,
        reference: reference_kind.label(),
        spoofer: spec.spoofer.label(),
        fidelity,
        h_cross,
        h_cross_exact,
        delta_h: delta_h(h_cross, dim),
        delta_h_exact: delta_h(h_cross_exact, dim),
        reference_h_cross,
        reference_delta_h: delta_h(reference_h_cross, dim),
        reference_delta_h_exact: delta_h(ref_h_cross_exact, dim),
        log_pr_ideal,
        log_pr_spoof,
        log_ratio: log_pr_ideal - log_pr_spoof,
        log_ratio_expected: m * (h_cross_exact - ref_h_cross_exact),
        entropy_exact: cross_entropy_exact(&ideal, &ideal)?.nats,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleConfig {
    pub experiment: ExperimentSpec,
    pub num_circuits: usize,
    pub seed: u64,
    /// Classical baseline `C` for the verdict.
    pub baseline_c: f64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub num_circuits: usize,
    /// Mean sampled `delta_h` of the spoofer.
    pub alpha: f64,
    pub alpha_stderr: f64,
    pub alpha_exact: f64,
    pub alpha_exact_stderr: f64,
    pub reference_alpha: f64,
    pub reference_alpha_stderr: f64,
    pub mean_log_ratio: f64,
    pub mean_log_ratio_stderr: f64,
    pub mean_log_ratio_expected: f64,
    pub mean_log_ratio_expected_stderr: f64,
    pub baseline_c: f64,
    /// `alpha <= 1 + 3 stderr`.
    pub alpha_in_range: bool,
    /// `alpha > C` with the range check satisfied.
    pub supremacy: bool,
}

impl EnsembleSummary {
    pub fn from_reports(reports: &[XebReport], baseline_c: f64) -> Self {
        let col = |f: fn(&XebReport) -> f64| mean_stderr(&reports.iter().map(f).collect::<Vec<_>>());
        let alpha = col(|r| r.delta_h);
        let alpha_exact = col(|r| r.delta_h_exact);
        let reference = col(|r| r.reference_delta_h);
        let ratio = col(|r| r.log_ratio);
        let ratio_exp = col(|r| r.log_ratio_expected);
        let alpha_in_range = alpha.mean <= 1.0 + 3.0 * alpha.stderr;
        Self {
            num_circuits: reports.len(),
            alpha: alpha.mean,
            alpha_stderr: alpha.stderr,
            alpha_exact: alpha_exact.mean,
            alpha_exact_stderr: alpha_exact.stderr,
            reference_alpha: reference.mean,
            reference_alpha_stderr: reference.stderr,
            mean_log_ratio: ratio.mean,
            mean_log_ratio_stderr: ratio.stderr,
            mean_log_ratio_expected: ratio_exp.mean,
            mean_log_ratio_expected_stderr: ratio_exp.stderr,
            baseline_c,
            alpha_in_range,
            supremacy: alpha_in_range && alpha.mean > baseline_c,
        }
    }

    /// `alpha=<v> ± <se>, C=<baseline>, supremacy=<bool>`
    pub fn verdict_line(&self) -> String {
        format!(
            "alpha={:.6} ± {:.6}, C={}, supremacy={}",
            self.alpha, self.alpha_stderr, self.baseline_c, self.supremacy
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleRun {
    pub summary: EnsembleSummary,
    pub reports: Vec<XebReport>,
}

/// A constituent circuit failed; `partial` holds every report that completed.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("circuit {circuit} failed: {cause}")]
pub struct EnsembleFailure {
    pub circuit: usize,
    pub cause: XebError,
    pub partial: Vec<XebReport>,
}

fn in_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| XebError::validation(e.to_string()))?;
    Ok(pool.install(job))
}

/// Circuit `i` uses stream `(seed, i)`, so results do not depend on `workers`.
pub fn run_ensemble(config: &EnsembleConfig) -> std::result::Result<EnsembleRun, EnsembleFailure> {
    let fail = |circuit, cause| EnsembleFailure {
        circuit,
        cause,
        partial: Vec::new(),
    };
    if config.num_circuits < 2 {
        return Err(fail(0, XebError::validation("an ensemble needs at least 2 circuits")));
    }
    config.experiment.validate().map_err(|e| fail(0, e))?;
    let results: Vec<Result<XebReport>> = in_pool(config.workers, || {
        (0..config.num_circuits)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(config.seed, i as u64);
                let report = run_circuit_experiment(&config.experiment, &format!("c{i}"), &mut rng)?;
                if !report.is_finite() {
                    return Err(XebError::validation(format!(
                        "circuit c{i}: sampled a bitstring with zero ideal probability"
                    )));
                }
                Ok(report)
            })
            .collect()
    })
    .map_err(|e| fail(0, e))?;

    let mut reports = Vec::with_capacity(results.len());
    let mut first_error = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(rep) => reports.push(rep),
            Err(e) if first_error.is_none() => first_error = Some((i, e)),
            Err(_) => {}
        }
    }
    if let Some((circuit, cause)) = first_error {
        return Err(EnsembleFailure {
            circuit,
            cause,
            partial: reports,
        });
    }
    Ok(EnsembleRun {
        summary: EnsembleSummary::from_reports(&reports, config.baseline_c),
        reports,
    })
}

/// One CSV row per circuit.
pub fn write_reports_csv<W: Write>(reports: &[XebReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// What `-(1/m) log Pr(S)` is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AepTarget {
    /// `log N - 1 + gamma`.
    EntropyFormula,
    /// `log N + gamma`.
    UniformCrossFormula,
    Value(f64),
}

impl AepTarget {
    pub fn value(self, dim: usize) -> f64 {
        match self {
            AepTarget::EntropyFormula => h0(dim) - 1.0,
            AepTarget::UniformCrossFormula => h0(dim),
            AepTarget::Value(v) => v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AepDiagnostic {
    pub m: usize,
    pub epsilon: f64,
    pub target: f64,
    /// `|-(1/m) log Pr(S) - target|`; infinite if `S` has a zero-probability bitstring.
    pub lhs: f64,
    pub typical: bool,
}

pub fn aep_diagnostic(
    sample: &BitstringSample,
    p_ideal: &ProbabilityTable,
    target: AepTarget,
    epsilon: f64,
) -> Result<AepDiagnostic> {
    if !(epsilon > 0.0) {
        return Err(XebError::validation(format!("epsilon {epsilon} must be positive")));
    }
    let target = target.value(p_ideal.dim());
    let h = cross_entropy_sampled(sample, p_ideal)?.nats;
    let lhs = (h - target).abs();
    Ok(AepDiagnostic {
        m: sample.m(),
        epsilon,
        target,
        lhs,
        typical: lhs <= epsilon,
    })
}

/// Which typical set to probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AepVariant {
    /// Ideal samples against the ideal entropy.
    Typical,
    /// Uniform samples against the uniform cross entropy.
    CrossTypical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalFraction {
    pub m: usize,
    pub trials: usize,
    pub fraction: f64,
    /// Binomial standard error of `fraction`.
    pub sigma: f64,
}

/// Fraction of `trials` Haar-random circuits whose `m`-sample is typical, per `m`.
pub fn aep_typical_fractions(
    n: usize,
    m_values: &[usize],
    trials: usize,
    epsilon: f64,
    variant: AepVariant,
    seed: u64,
) -> Result<Vec<TypicalFraction>> {
    if trials == 0 {
        return Err(XebError::validation("need at least one trial"));
    }
    let hits: Vec<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = RngStream::new(seed, t as u64);
            let ideal = sample_haar_state(n, &mut rng)?.full_distribution();
            let (table, target) = match variant {
                AepVariant::Typical => (ideal.clone(), AepTarget::EntropyFormula),
                AepVariant::CrossTypical => {
                    (ProbabilityTable::uniform(ideal.dim())?, AepTarget::UniformCrossFormula)
                }
            };
            m_values
                .iter()
                .map(|&m| {
                    let s = draw_sample(&table, m, &mut rng, "aep", &format!("t{t}"))?;
                    Ok(aep_diagnostic(&s, &ideal, target, epsilon)?.typical)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(m_values
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let k = hits.iter().filter(|h| h[j]).count() as f64;
            let fraction = k / trials as f64;
            TypicalFraction {
                m,
                trials,
                fraction,
                sigma: (fraction * (1.0 - fraction) / trials as f64).sqrt(),
            }
        })
        .collect())
}

/// One row of an error-rate sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub g: usize,
    #[serde(rename = "F")]
    pub fidelity: f64,
    pub mean_log_ratio: f64,
    pub mean_log_ratio_stderr: f64,
    pub mean_log_ratio_expected: f64,
    pub mean_log_ratio_expected_stderr: f64,
    /// `m e^(-r g)`.
    pub predicted: f64,
    /// Relative deviation of the exact-table mean from `predicted`.
    pub rel_err: f64,
    pub rel_err_sampled: f64,
    /// Whether `predicted` clears the statistical floor.
    pub checked: bool,
    pub pass: bool,
}

/// Prediction floor below which sweep rows are reported but not judged.
pub const SWEEP_FLOOR: f64 = 50.0;
pub const SWEEP_REL_TOL: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub n: usize,
    pub source: CircuitSource,
    /// Gate count entering `F = e^(-r g)`.
    pub g: usize,
    pub m: usize,
    pub num_circuits: usize,
    pub seed: u64,
    pub r_values: Vec<f64>,
    pub workers: usize,
}

/// Runs the noisy log-ratio experiment (mixture reference with `F = e^(-r g)`,
/// uniform spoofer) for each error rate. The same seed, and so the same
/// circuits, is reused across rates.
pub fn log_ratio_sweep(cfg: &SweepConfig) -> std::result::Result<Vec<SweepRow>, EnsembleFailure> {
    let specs = noise::sweep_gates(&cfg.r_values, cfg.g).map_err(|cause| EnsembleFailure {
        circuit: 0,
        cause,
        partial: Vec::new(),
    })?;
    let m = cfg.m;
    specs
        .iter()
        .map(|ns| {
            let experiment = ExperimentSpec::new(cfg.n, cfg.source, m, SamplerKind::Uniform)
                .with_reference(Reference::Sampler(SamplerKind::NoisyMixture { fidelity: ns.fidelity }));
            let run = run_ensemble(&EnsembleConfig {
                experiment,
                num_circuits: cfg.num_circuits,
                seed: cfg.seed,
                baseline_c: 0.0,
                workers: cfg.workers,
            })?;
            let s = &run.summary;
            let predicted = m as f64 * ns.fidelity;
            let rel_err = (s.mean_log_ratio_expected - predicted).abs() / predicted;
            let checked = predicted >= SWEEP_FLOOR;
            Ok(SweepRow {
                r: ns.r,
                g: ns.g,
                fidelity: ns.fidelity,
                mean_log_ratio: s.mean_log_ratio,
                mean_log_ratio_stderr: s.mean_log_ratio_stderr,
                mean_log_ratio_expected: s.mean_log_ratio_expected,
                mean_log_ratio_expected_stderr: s.mean_log_ratio_expected_stderr,
                predicted,
                rel_err,
                rel_err_sampled: (s.mean_log_ratio - predicted).abs() / predicted,
                checked,
                pass: !checked || rel_err < SWEEP_REL_TOL,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Large-`N` constants for a register of `n` qubits.
pub fn constants_for_qubits(n: usize) -> Result<ptheory::PtConstants> {
    ptheory::constants(1usize << n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn haar_table(n: usize, seed: u64) -> ProbabilityTable {
        sample_haar_state(n, &mut RngStream::new(seed, 0)).unwrap().full_distribution()
    }

    #[test]
    fn uniform_against_uniform_is_log_n() {
        let u = ProbabilityTable::uniform(64).unwrap();
        let h = cross_entropy_exact(&u, &u).unwrap();
        assert!((h.nats - 64f64.ln()).abs() < 1e-12);
        assert!((delta_h(h.nats, 64) - ptheory::EULER_GAMMA).abs() < 1e-12);
    }

    #[test]
    fn support_violation_is_infinite() {
        let a = ProbabilityTable::new(vec![0.5, 0.5, 0.0]).unwrap();
        let p = ProbabilityTable::new(vec![1.0, 0.0, 0.0]).unwrap();
        let h = cross_entropy_exact(&a, &p).unwrap();
        assert_eq!(h.nats, f64::INFINITY);
        assert_eq!(h.offending, vec![1]);
        // Zero weight on a zero-probability state is fine.
        assert!(cross_entropy_exact(&p, &p).unwrap().is_finite());
        assert!(cross_entropy_exact(&a, &ProbabilityTable::uniform(4).unwrap()).is_err());
    }

    #[test]
    fn sampled_cross_entropy_of_constant_sample() {
        let e = (-1.0f64).exp();
        let t = ProbabilityTable::new(vec![e, 1.0 - e]).unwrap();
        let s = BitstringSample::new(1, vec![0; 25], "x", "c").unwrap();
        assert!((cross_entropy_sampled(&s, &t).unwrap().nats - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_delta_h_is_linear_in_fidelity() {
        // delta_h(F) = F delta_h(1) + (1 - F) delta_h(0) holds per table.
        let ideal = haar_table(8, 3);
        let dh = |f: f64| {
            let t = spoofer_table(&SamplerKind::NoisyMixture { fidelity: f }, &ideal).unwrap();
            delta_h_exact(&t, &ideal).unwrap()
        };
        let (d0, d1) = (dh(0.0), dh(1.0));
        for f in [0.1, 0.25, 0.5, 0.9] {
            assert!((dh(f) - (f * d1 + (1.0 - f) * d0)).abs() < 1e-12);
        }
    }

    #[test]
    fn report_invariants() {
        let spec = ExperimentSpec::new(6, CircuitSource::Gates { cycles: 30 }, 200, SamplerKind::Uniform);
        let r = run_circuit_experiment(&spec, "c0", &mut RngStream::new(5, 0)).unwrap();
        assert_eq!(r.delta_h, h0(64) - r.h_cross);
        assert_eq!(r.log_ratio, r.log_pr_ideal - r.log_pr_spoof);
        assert_eq!(r.fidelity, 1.0);
        assert!(r.gate_count > 0);
    }

    #[test]
    fn experiment_is_deterministic() {
        let spec = ExperimentSpec::new(5, CircuitSource::Gates { cycles: 20 }, 100, SamplerKind::Uniform);
        let a = run_circuit_experiment(&spec, "c", &mut RngStream::new(8, 2)).unwrap();
        let b = run_circuit_experiment(&spec, "c", &mut RngStream::new(8, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gate_noise_reference_uses_gate_count() {
        let spec = ExperimentSpec::new(6, CircuitSource::GateBudget { gates: 100 }, 50, SamplerKind::Uniform)
            .with_reference(Reference::GateNoise { rate: 0.01 });
        let r = run_circuit_experiment(&spec, "c", &mut RngStream::new(1, 1)).unwrap();
        assert_eq!(r.gate_count, 100);
        assert!((r.fidelity - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn ensemble_rejects_single_circuit() {
        let spec = ExperimentSpec::new(4, CircuitSource::Haar, 10, SamplerKind::Uniform);
        let cfg = EnsembleConfig {
            experiment: spec,
            num_circuits: 1,
            seed: 0,
            baseline_c: 0.0,
            workers: 1,
        };
        assert!(run_ensemble(&cfg).is_err());
    }

    #[test]
    fn ensemble_failure_keeps_partial_results() {
        // An identity-only alphabet leaves |0..0>, so uniform draws hit zero
        // ideal probability.
        let mut spec = ExperimentSpec::new(4, CircuitSource::Gates { cycles: 2 }, 50, SamplerKind::Uniform);
        spec.gate_set = GateSetSpec::uniform(&[crate::statevector::GateKind::I]);
        let cfg = EnsembleConfig {
            experiment: spec,
            num_circuits: 3,
            seed: 0,
            baseline_c: 0.0,
            workers: 1,
        };
        let err = run_ensemble(&cfg).unwrap_err();
        assert_eq!(err.circuit, 0);
        assert!(err.partial.is_empty());
    }

    #[test]
    fn ensemble_independent_of_worker_count() {
        let spec = ExperimentSpec::new(5, CircuitSource::Haar, 64, SamplerKind::Uniform);
        let mk = |workers| EnsembleConfig {
            experiment: spec.clone(),
            num_circuits: 6,
            seed: 21,
            baseline_c: 0.0,
            workers,
        };
        assert_eq!(run_ensemble(&mk(1)).unwrap(), run_ensemble(&mk(3)).unwrap());
    }

    #[test]
    fn aep_flags() {
        let mut probs = vec![0.01; 11];
        probs[0] = 0.9;
        let t = ProbabilityTable::new(probs).unwrap();
        let s = BitstringSample::new(4, vec![0], "x", "c").unwrap();
        let d = aep_diagnostic(&s, &t, AepTarget::Value(1.0), 0.05).unwrap();
        assert!(!d.typical);
        assert_eq!(d.typical, d.lhs <= d.epsilon);
        assert!(aep_diagnostic(&s, &t, AepTarget::Value(1.0), 0.0).is_err());
        let zero = ProbabilityTable::new(vec![1.0, 0.0]).unwrap();
        let s = BitstringSample::new(1, vec![1], "x", "c").unwrap();
        let d = aep_diagnostic(&s, &zero, AepTarget::EntropyFormula, 0.1).unwrap();
        assert_eq!(d.lhs, f64::INFINITY);
        assert!(!d.typical);
    }

    #[test]
    fn verdict_line_format() {
        let r = XebReport {
            circuit_id: "c".into(),
            n: 1,
            m: 1,
            gate_count: 0,
            reference: "ideal".into(),
            spoofer: "uniform".into(),
            fidelity: 1.0,
            h_cross: 0.0,
            h_cross_exact: 0.0,
            delta_h: 0.5,
            delta_h_exact: 0.5,
            reference_h_cross: 0.0,
            reference_delta_h: 0.0,
            reference_delta_h_exact: 0.0,
            log_pr_ideal: 0.0,
            log_pr_spoof: 0.0,
            log_ratio: 0.0,
            log_ratio_expected: 0.0,
            entropy_exact: 0.0,
        };
        let s = EnsembleSummary::from_reports(&[r.clone(), r], 0.25);
        assert_eq!(s.verdict_line(), "alpha=0.500000 ± 0.000000, C=0.25, supremacy=true");
    }
}
