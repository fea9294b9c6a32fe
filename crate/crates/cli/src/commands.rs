use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use xebsim::haar::default_cycles;
use xebsim::ptheory::{self, histogram_in_range, PtLaw};
use xebsim::suite::{run_haar_suite, HaarSuiteConfig, SuiteVerdict};
use xebsim::xeb::{
    log_ratio_sweep, run_ensemble, sample_ideal_table, write_reports_csv, write_sweep_csv, CircuitSource,
    EnsembleConfig, ExperimentSpec, Reference, SweepConfig,
};
use xebsim::{GateSetSpec, QrPhase, RngStream, SamplerKind};

use crate::config::{write_resolved, Knobs, Source, Spoofer};

/// Whether every check of a command passed.
pub type Passed = bool;

fn out_dir(k: &mut Knobs) -> Result<PathBuf> {
    let dir = k.out.get_or_insert_with(|| PathBuf::from("xebsim-out")).clone();
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(())
}

fn gate_set(k: &mut Knobs) -> Result<GateSetSpec> {
    let text = k.gates.get_or_insert_with(|| GateSetSpec::default().to_string());
    Ok(GateSetSpec::parse(text)?)
}

fn circuit_source(k: &mut Knobs, n: usize) -> CircuitSource {
    match *k.source.get_or_insert(Source::Gates) {
        Source::Haar => CircuitSource::Haar,
        Source::Gates => CircuitSource::Gates {
            cycles: *k.cycles.get_or_insert(default_cycles(n)),
        },
    }
}

#[derive(Serialize)]
struct HaarTestReport {
    passed: bool,
    verdicts: Vec<SuiteVerdict>,
}

pub fn haar_test(mut k: Knobs) -> Result<Passed> {
    let defaults = HaarSuiteConfig::default();
    let cfg = HaarSuiteConfig {
        seed: k.seed()?,
        draws: *k.draws.get_or_insert(defaults.draws),
        dims: k.dim.get_or_insert(defaults.dims).clone(),
        state_qubits: defaults.state_qubits,
        qr_phase: if *k.skip_phase_fix.get_or_insert(false) { QrPhase::Raw } else { QrPhase::Fixed },
    };
    let dir = out_dir(&mut k)?;
    write_resolved(&dir, "haar-test", &k)?;
    let verdicts = run_haar_suite(&cfg)?;
    for v in &verdicts {
        let p = v.p_value.map(|p| format!(", p={p:.4}")).unwrap_or_default();
        println!("{:<28} {} (stat={:.4e}{p})", v.name, if v.passed { "pass" } else { "FAIL" }, v.statistic);
    }
    let passed = verdicts.iter().all(|v| v.passed);
    write_json(&dir, "haar_test.json", &HaarTestReport { passed, verdicts })?;
    Ok(passed)
}

#[derive(Serialize)]
struct ConvergeRow {
    n: usize,
    dim: usize,
    states: usize,
    pooled: u64,
    tv_asymptotic: f64,
    tv_exact: f64,
    tv_laws: f64,
}

/// TV threshold against the exact law.
const TV_LIMIT: f64 = 0.05;
/// Pooled probabilities per register size when `states` is unset.
const MIN_POOLED: usize = 6400;

pub fn pt_converge(mut k: Knobs) -> Result<Passed> {
    let seed = k.seed()?;
    let ns = match (&k.ns, k.n) {
        (Some(ns), _) => ns.clone(),
        (None, Some(n)) => vec![n],
        (None, None) => (1..=5).collect(),
    };
    k.ns = Some(ns.clone());
    if ns.is_empty() {
        bail!("no register sizes given");
    }
    let bins = *k.bins.get_or_insert(50);
    let source = *k.source.get_or_insert(Source::Haar);
    let spec = gate_set(&mut k)?;
    let dir = out_dir(&mut k)?;
    write_resolved(&dir, "pt-converge", &k)?;

    let mut rows = Vec::new();
    for (j, &n) in ns.iter().enumerate() {
        if n == 0 || n > xebsim::statevector::MAX_QUBITS {
            bail!("register size {n} out of range");
        }
        let dim = 1usize << n;
        let states = k.states.unwrap_or_else(|| 200.max(MIN_POOLED.div_ceil(dim)));
        let src = match source {
            Source::Haar => CircuitSource::Haar,
            Source::Gates => CircuitSource::Gates {
                cycles: k.cycles.unwrap_or(default_cycles(n)),
            },
        };
        let tables = (0..states)
            .map(|i| {
                let mut rng = RngStream::new(seed, ((j as u64) << 32) | i as u64);
                sample_ideal_table(n, src, &spec, &mut rng).map(|t| t.0)
            })
            .collect::<xebsim::Result<Vec<_>>>()?;
        let h = histogram_in_range(&tables, bins, 6.0 / dim as f64)?;
        h.write_csv(create(&dir, &format!("histogram_n{n}.csv"))?)?;
        rows.push(ConvergeRow {
            n,
            dim,
            states,
            pooled: h.pooled(),
            tv_asymptotic: h.tv_distance(PtLaw::Asymptotic),
            tv_exact: h.tv_distance(PtLaw::Exact),
            tv_laws: h.law_tv_distance(),
        });
    }
    let mut w = csv::Writer::from_writer(create(&dir, "pt_converge.csv")?);
    for r in &rows {
        w.serialize(r)?;
        println!(
            "n={:<2} N={:<6} tv_exact={:.4} tv_asymptotic={:.4} tv_laws={:.4}",
            r.n, r.dim, r.tv_exact, r.tv_asymptotic, r.tv_laws
        );
    }
    w.flush()?;
    let mut by_n: Vec<&ConvergeRow> = rows.iter().collect();
    by_n.sort_by_key(|r| r.n);
    let decreasing = by_n.windows(2).all(|w| w[1].tv_laws <= w[0].tv_laws);
    Ok(decreasing && rows.iter().all(|r| r.tv_exact < TV_LIMIT))
}

#[derive(Serialize)]
struct AepRow {
    epsilon: f64,
    /// Fraction of reference samples within `epsilon` of `log N - 1 + gamma`.
    reference_typical: f64,
    /// Fraction of spoofer samples within `epsilon` of `log N + gamma`.
    spoofer_cross_typical: f64,
}

pub fn xeb_run(mut k: Knobs) -> Result<Passed> {
    let seed = k.seed()?;
    let n = *k.n.get_or_insert(10);
    let m = *k.m.get_or_insert(1000);
    let circuits = *k.circuits.get_or_insert(50);
    let spoofer = match *k.spoofer.get_or_insert(Spoofer::Uniform) {
        Spoofer::Ideal => SamplerKind::Ideal,
        Spoofer::Uniform => SamplerKind::Uniform,
        Spoofer::Mixture => match k.fidelity {
            Some(fidelity) => SamplerKind::NoisyMixture { fidelity },
            None => bail!("--spoofer mixture needs --fidelity"),
        },
    };
    let reference = match k.r.as_deref() {
        None => Reference::Sampler(SamplerKind::Ideal),
        Some([rate]) => Reference::GateNoise { rate: *rate },
        Some(_) => bail!("xeb-run takes a single --r; use log-ratio for sweeps"),
    };
    let source = circuit_source(&mut k, n);
    let mut experiment = ExperimentSpec::new(n, source, m, spoofer).with_reference(reference);
    experiment.gate_set = gate_set(&mut k)?;
    let cfg = EnsembleConfig {
        experiment,
        num_circuits: circuits,
        seed,
        baseline_c: *k.baseline.get_or_insert(0.0),
        workers: *k.workers.get_or_insert(0),
    };
    let epsilons = k.epsilon.get_or_insert_with(|| vec![0.1]).clone();
    let dir = out_dir(&mut k)?;
    write_resolved(&dir, "xeb-run", &k)?;

    let run = match run_ensemble(&cfg) {
        Ok(run) => run,
        Err(failure) => {
            write_reports_csv(&failure.partial, create(&dir, "reports.partial.csv")?)?;
            return Err(failure.into());
        }
    };
    write_reports_csv(&run.reports, create(&dir, "reports.csv")?)?;
    write_json(&dir, "summary.json", &run.summary)?;

    let h0 = ptheory::h0(1 << n);
    let frac = |pred: &dyn Fn(&xebsim::XebReport) -> bool| {
        run.reports.iter().filter(|r| pred(r)).count() as f64 / run.reports.len() as f64
    };
    let mut w = csv::Writer::from_writer(create(&dir, "aep.csv")?);
    for eps in epsilons {
        w.serialize(AepRow {
            epsilon: eps,
            reference_typical: frac(&|r| (r.reference_h_cross - (h0 - 1.0)).abs() <= eps),
            spoofer_cross_typical: frac(&|r| (r.h_cross - h0).abs() <= eps),
        })?;
    }
    w.flush()?;

    let s = &run.summary;
    println!(
        "mean log_ratio={:.3} ± {:.3} (exact-table {:.3})",
        s.mean_log_ratio, s.mean_log_ratio_stderr, s.mean_log_ratio_expected
    );
    println!("{}", s.verdict_line());
    Ok(s.alpha_in_range)
}

pub fn log_ratio(mut k: Knobs) -> Result<Passed> {
    let seed = k.seed()?;
    let r_values = match &k.r {
        Some(r) if !r.is_empty() => r.clone(),
        _ => bail!("log-ratio needs at least one rate (--r)"),
    };
    let n = *k.n.get_or_insert(10);
    let source = circuit_source(&mut k, n);
    let cfg = SweepConfig {
        n,
        source,
        g: *k.g.get_or_insert(500),
        m: *k.m.get_or_insert(1000),
        num_circuits: *k.circuits.get_or_insert(50),
        seed,
        r_values,
        workers: *k.workers.get_or_insert(0),
    };
    let dir = out_dir(&mut k)?;
    write_resolved(&dir, "log-ratio", &k)?;
    let rows = log_ratio_sweep(&cfg)?;
    write_sweep_csv(&rows, create(&dir, "log_ratio.csv")?)?;
    for r in &rows {
        println!(
            "r={:<8} F={:.6} predicted={:.3} observed={:.3} ± {:.3} exact-table={:.3} {}",
            r.r,
            r.fidelity,
            r.predicted,
            r.mean_log_ratio,
            r.mean_log_ratio_stderr,
            r.mean_log_ratio_expected,
            match (r.checked, r.pass) {
                (false, _) => "below floor",
                (true, true) => "pass",
                (true, false) => "FAIL",
            }
        );
    }
    Ok(rows.iter().all(|r| r.pass))
}

#[derive(Serialize)]
struct TailRow {
    #[serde(rename = "N")]
    dim: usize,
    quadrature: f64,
    closed_form: f64,
    rel_diff: f64,
}

pub fn tail_table(mut k: Knobs) -> Result<Passed> {
    let rows: Vec<TailRow> = [2, 4, 8, 16, 32, 64, 128, 256]
        .into_iter()
        .map(|dim| {
            let q = ptheory::tail_mass_quadrature(dim);
            let c = ptheory::tail_mass(dim);
            TailRow {
                dim,
                quadrature: q,
                closed_form: c,
                rel_diff: (q - c).abs() / c,
            }
        })
        .collect();
    println!("{:>4}  {:>12}  {:>12}  {:>9}", "N", "J(N)", "e^-N", "rel diff");
    for r in &rows {
        println!("{:>4}  {:>12.4e}  {:>12.4e}  {:>9.1e}", r.dim, r.quadrature, r.closed_form, r.rel_diff);
    }
    if k.out.is_some() {
        let dir = out_dir(&mut k)?;
        write_resolved(&dir, "tail-table", &k)?;
        let mut w = csv::Writer::from_writer(create(&dir, "tail_table.csv")?);
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(rows.iter().filter(|r| r.dim <= 64).all(|r| r.rel_diff < 1e-10))
}
