//! Python bindings. Tables are plain lists of floats; ensemble results come
//! back as dicts.

use num_complex::Complex64;
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use xebsim::haar::{self, CircuitLength};
use xebsim::sampling::{self, BitstringSample, ProbabilityTable, SamplerKind};
use xebsim::xeb::{self, CircuitSource, EnsembleConfig, ExperimentSpec, Reference, SweepConfig};
use xebsim::{ptheory, noise, suite, GateOp, GateSetSpec, RngStream, XebError};

fn err(e: XebError) -> PyErr {
    match e {
        XebError::Index { .. } => PyIndexError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn table(probs: Vec<f64>) -> PyResult<ProbabilityTable> {
    ProbabilityTable::new(probs).map_err(err)
}

fn spoofer(kind: &str, fidelity: Option<f64>) -> PyResult<SamplerKind> {
    Ok(match (kind, fidelity) {
        ("ideal", _) => SamplerKind::Ideal,
        ("uniform", _) => SamplerKind::Uniform,
        ("mixture", Some(fidelity)) => SamplerKind::NoisyMixture { fidelity },
        ("mixture", None) => return Err(PyValueError::new_err("mixture needs a fidelity")),
        _ => return Err(PyValueError::new_err(format!("unknown spoofer '{kind}'"))),
    })
}

fn source(kind: &str, n: usize, cycles: Option<usize>) -> PyResult<CircuitSource> {
    match kind {
        "haar" => Ok(CircuitSource::Haar),
        "gates" => Ok(CircuitSource::Gates {
            cycles: cycles.unwrap_or(haar::default_cycles(n)),
        }),
        _ => Err(PyValueError::new_err(format!("unknown source '{kind}'"))),
    }
}

#[pyclass(name = "Gate", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGate(GateOp);

#[pymethods]
impl PyGate {
    #[staticmethod]
    fn h(q: usize) -> Self {
        Self(GateOp::h(q))
    }
    #[staticmethod]
    fn p(q: usize) -> Self {
        Self(GateOp::p(q))
    }
    #[staticmethod]
    fn t(q: usize) -> Self {
        Self(GateOp::t(q))
    }
    #[staticmethod]
    fn x(q: usize) -> Self {
        Self(GateOp::x(q))
    }
    #[staticmethod]
    fn id(q: usize) -> Self {
        Self(GateOp::id(q))
    }
    #[staticmethod]
    fn cnot(control: usize, target: usize) -> Self {
        Self(GateOp::cnot(control, target))
    }
    /// Row-major 2x2 or 4x4 unitary on one or two qubits.
    #[staticmethod]
    fn custom(targets: Vec<usize>, matrix: Vec<Complex64>) -> PyResult<Self> {
        GateOp::custom(&targets, matrix).map(Self).map_err(err)
    }
    #[getter]
    fn kind(&self) -> String {
        self.0.kind().to_string()
    }
    #[getter]
    fn targets(&self) -> Vec<usize> {
        self.0.targets().to_vec()
    }
    fn matrix(&self) -> Vec<Complex64> {
        self.0.matrix().to_vec()
    }
    fn __repr__(&self) -> String {
        format!("Gate({} {:?})", self.0.kind(), self.0.targets())
    }
}

#[pyclass(name = "StateVector", skip_from_py_object)]
#[derive(Clone)]
struct PyStateVector(xebsim::StateVector);

#[pymethods]
impl PyStateVector {
    #[staticmethod]
    fn zero_state(n: usize) -> PyResult<Self> {
        xebsim::StateVector::zero_state(n).map(Self).map_err(err)
    }
    #[staticmethod]
    fn from_amplitudes(amps: Vec<Complex64>) -> PyResult<Self> {
        xebsim::StateVector::from_amplitudes(amps).map(Self).map_err(err)
    }
    #[getter]
    fn n(&self) -> usize {
        self.0.num_qubits()
    }
    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn amplitudes(&self) -> Vec<Complex64> {
        self.0.amplitudes().to_vec()
    }
    fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }
    fn probability(&self, x: usize) -> PyResult<f64> {
        self.0.probability(x).map_err(err)
    }
    fn probabilities(&self) -> Vec<f64> {
        self.0.full_distribution().into_vec()
    }
    fn apply(&mut self, gate: &PyGate) -> PyResult<()> {
        self.0.apply_gate(&gate.0).map_err(err)
    }
    fn evolve(&mut self, circuit: &PyCircuit) -> PyResult<()> {
        self.0.evolve(&circuit.0).map_err(err)
    }
}

#[pyclass(name = "Circuit", skip_from_py_object)]
#[derive(Clone)]
struct PyCircuit(xebsim::Circuit);

#[pymethods]
impl PyCircuit {
    #[new]
    fn new(n: usize) -> PyResult<Self> {
        xebsim::Circuit::new(n).map(Self).map_err(err)
    }
    /// Random sweep circuit; `gates` is an alphabet such as `"H,P,CNOT,T,I"`.
    #[staticmethod]
    #[pyo3(signature = (n, seed, cycles=None, stream=0, gates=None, gate_budget=None))]
    fn random(
        n: usize,
        seed: u64,
        cycles: Option<usize>,
        stream: u64,
        gates: Option<&str>,
        gate_budget: Option<usize>,
    ) -> PyResult<Self> {
        let spec = match gates {
            Some(text) => GateSetSpec::parse(text).map_err(err)?,
            None => GateSetSpec::default(),
        };
        let length = match gate_budget {
            Some(g) => CircuitLength::Gates(g),
            None => CircuitLength::Cycles(cycles.unwrap_or(haar::default_cycles(n))),
        };
        haar::sample_circuit(n, length, &spec, &mut RngStream::new(seed, stream))
            .map(Self)
            .map_err(err)
    }
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        xebsim::Circuit::from_text(text).map(Self).map_err(err)
    }
    fn push(&mut self, gate: &PyGate) -> PyResult<()> {
        self.0.push(gate.0.clone()).map_err(err)
    }
    #[getter]
    fn n(&self) -> usize {
        self.0.num_qubits()
    }
    #[getter]
    fn gate_count(&self) -> usize {
        self.0.gate_count()
    }
    fn ops(&self) -> Vec<PyGate> {
        self.0.ops().iter().cloned().map(PyGate).collect()
    }
    fn run(&self) -> PyResult<PyStateVector> {
        self.0.run().map(PyStateVector).map_err(err)
    }
    fn to_text(&self) -> String {
        self.0.to_text()
    }
    fn __len__(&self) -> usize {
        self.0.gate_count()
    }
}

#[pyfunction]
#[pyo3(signature = (n, seed, stream=0))]
fn haar_state(n: usize, seed: u64, stream: u64) -> PyResult<PyStateVector> {
    haar::sample_haar_state(n, &mut RngStream::new(seed, stream)).map(PyStateVector).map_err(err)
}

/// Haar-random unitary as a list of rows.
#[pyfunction]
#[pyo3(signature = (dim, seed, stream=0))]
fn haar_unitary(dim: usize, seed: u64, stream: u64) -> PyResult<Vec<Vec<Complex64>>> {
    let u = haar::sample_haar_unitary(dim, &mut RngStream::new(seed, stream)).map_err(err)?;
    Ok((0..dim).map(|r| (0..dim).map(|c| u.get(r, c)).collect()).collect())
}

#[pyfunction]
#[pyo3(signature = (kind, ideal, fidelity=None))]
fn spoofer_table(kind: &str, ideal: Vec<f64>, fidelity: Option<f64>) -> PyResult<Vec<f64>> {
    let t = sampling::spoofer_table(&spoofer(kind, fidelity)?, &table(ideal)?).map_err(err)?;
    Ok(t.into_vec())
}

#[pyfunction]
#[pyo3(signature = (probs, m, seed, stream=0))]
fn draw_sample(probs: Vec<f64>, m: usize, seed: u64, stream: u64) -> PyResult<Vec<usize>> {
    let s = sampling::draw_sample(&table(probs)?, m, &mut RngStream::new(seed, stream), "py", "py").map_err(err)?;
    Ok(s.xs)
}

fn sample_of(xs: Vec<usize>, dim: usize) -> PyResult<BitstringSample> {
    let n = dim.max(2).next_power_of_two().trailing_zeros() as usize;
    BitstringSample::new(n, xs, "py", "py").map_err(err)
}

/// `log Pr(S)` in nats; `-inf` if a bitstring has zero probability.
#[pyfunction]
fn log_pr(xs: Vec<usize>, ideal: Vec<f64>) -> PyResult<f64> {
    let t = table(ideal)?;
    let s = sample_of(xs, t.dim())?;
    Ok(sampling::log_pr(&s, &t).map_err(err)?.value)
}

#[pyfunction]
fn cross_entropy(p_a: Vec<f64>, p_ideal: Vec<f64>) -> PyResult<f64> {
    Ok(xeb::cross_entropy_exact(&table(p_a)?, &table(p_ideal)?).map_err(err)?.nats)
}

#[pyfunction]
fn cross_entropy_sampled(xs: Vec<usize>, p_ideal: Vec<f64>) -> PyResult<f64> {
    let t = table(p_ideal)?;
    let s = sample_of(xs, t.dim())?;
    Ok(xeb::cross_entropy_sampled(&s, &t).map_err(err)?.nats)
}

#[pyfunction]
fn delta_h(h_cross: f64, dim: usize) -> f64 {
    xeb::delta_h(h_cross, dim)
}

#[pyfunction]
fn pt_pdf(p: f64, dim: usize) -> PyResult<f64> {
    ptheory::pt_pdf(p, dim).map_err(err)
}

#[pyfunction]
fn exact_pdf(p: f64, dim: usize) -> PyResult<f64> {
    ptheory::exact_pdf(p, dim).map_err(err)
}

#[pyfunction]
fn tail_mass(dim: usize) -> f64 {
    ptheory::tail_mass(dim)
}

#[pyfunction]
fn tail_mass_quadrature(dim: usize) -> f64 {
    ptheory::tail_mass_quadrature(dim)
}

#[pyfunction]
fn exact_expected_entropy(dim: usize) -> PyResult<f64> {
    ptheory::exact_expected_entropy(dim).map_err(err)
}

/// `dim`, `gamma`, `h_ideal`, `h0`, `expected_log_p`.
#[pyfunction]
fn constants(py: Python<'_>, dim: usize) -> PyResult<Py<PyAny>> {
    to_py(py, &ptheory::constants(dim).map_err(err)?)
}

/// Pooled 50-bin histogram on [0, 6/N] with TV distances to both laws.
#[pyfunction]
fn pt_histogram(py: Python<'_>, tables: Vec<Vec<f64>>) -> PyResult<Py<PyAny>> {
    #[derive(Serialize)]
    struct Out {
        histogram: ptheory::Histogram,
        tv_asymptotic: f64,
        tv_exact: f64,
        tv_laws: f64,
    }
    let tables = tables.into_iter().map(table).collect::<PyResult<Vec<_>>>()?;
    let h = ptheory::pt_histogram(&tables).map_err(err)?;
    to_py(
        py,
        &Out {
            tv_asymptotic: h.tv_distance(ptheory::PtLaw::Asymptotic),
            tv_exact: h.tv_distance(ptheory::PtLaw::Exact),
            tv_laws: h.law_tv_distance(),
            histogram: h,
        },
    )
}

#[pyfunction]
fn fidelity(r: f64, g: usize) -> PyResult<f64> {
    noise::fidelity(r, g).map_err(err)
}

/// Runs an ensemble; returns `{"summary": {...}, "reports": [...]}`.
#[pyfunction]
#[pyo3(signature = (
    n, m, circuits, seed, spoofer="uniform", fidelity=None, source="gates", cycles=None,
    reference_r=None, baseline=0.0, workers=0
))]
#[allow(clippy::too_many_arguments)]
fn run_ensemble(
    py: Python<'_>,
    n: usize,
    m: usize,
    circuits: usize,
    seed: u64,
    spoofer: &str,
    fidelity: Option<f64>,
    source: &str,
    cycles: Option<usize>,
    reference_r: Option<f64>,
    baseline: f64,
    workers: usize,
) -> PyResult<Py<PyAny>> {
    #[derive(Serialize)]
    struct Out<'a> {
        summary: &'a xebsim::EnsembleSummary,
        reports: &'a [xebsim::XebReport],
    }
    let mut experiment = ExperimentSpec::new(n, self::source(source, n, cycles)?, m, self::spoofer(spoofer, fidelity)?);
    if let Some(rate) = reference_r {
        experiment = experiment.with_reference(Reference::GateNoise { rate });
    }
    let cfg = EnsembleConfig {
        experiment,
        num_circuits: circuits,
        seed,
        baseline_c: baseline,
        workers,
    };
    let run = xeb::run_ensemble(&cfg).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(
        py,
        &Out {
            summary: &run.summary,
            reports: &run.reports,
        },
    )
}

/// Mean log-ratio against `m e^(-r g)` for each rate; one dict per rate.
#[pyfunction]
#[pyo3(signature = (r_values, seed, n=10, g=500, m=1000, circuits=50, source="gates", cycles=None, workers=0))]
#[allow(clippy::too_many_arguments)]
fn log_ratio_sweep(
    py: Python<'_>,
    r_values: Vec<f64>,
    seed: u64,
    n: usize,
    g: usize,
    m: usize,
    circuits: usize,
    source: &str,
    cycles: Option<usize>,
    workers: usize,
) -> PyResult<Py<PyAny>> {
    let cfg = SweepConfig {
        n,
        source: self::source(source, n, cycles)?,
        g,
        m,
        num_circuits: circuits,
        seed,
        r_values,
        workers,
    };
    let rows = xeb::log_ratio_sweep(&cfg).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &rows)
}

/// Statistical checks of the Haar samplers; one dict per check.
#[pyfunction]
#[pyo3(signature = (seed, draws=10_000, skip_phase_fix=false))]
fn haar_suite(py: Python<'_>, seed: u64, draws: usize, skip_phase_fix: bool) -> PyResult<Py<PyAny>> {
    let cfg = suite::HaarSuiteConfig {
        seed,
        draws,
        qr_phase: if skip_phase_fix { xebsim::QrPhase::Raw } else { xebsim::QrPhase::Fixed },
        ..suite::HaarSuiteConfig::default()
    };
    to_py(py, &suite::run_haar_suite(&cfg).map_err(err)?)
}

#[pymodule]
fn pyxebsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGate>()?;
    m.add_class::<PyStateVector>()?;
    m.add_class::<PyCircuit>()?;
    m.add("EULER_GAMMA", ptheory::EULER_GAMMA)?;
    m.add_function(wrap_pyfunction!(haar_state, m)?)?;
    m.add_function(wrap_pyfunction!(haar_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(spoofer_table, m)?)?;
    m.add_function(wrap_pyfunction!(draw_sample, m)?)?;
    m.add_function(wrap_pyfunction!(log_pr, m)?)?;
    m.add_function(wrap_pyfunction!(cross_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(cross_entropy_sampled, m)?)?;
    m.add_function(wrap_pyfunction!(delta_h, m)?)?;
    m.add_function(wrap_pyfunction!(pt_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(exact_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(tail_mass, m)?)?;
    m.add_function(wrap_pyfunction!(tail_mass_quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(exact_expected_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(pt_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(run_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(log_ratio_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(haar_suite, m)?)?;
    Ok(())
}
