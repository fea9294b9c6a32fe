//! Run configuration: a flat key-value file overridden by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Spoofer {
    Ideal,
    Uniform,
    Mixture,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Gates,
    Haar,
}

/// Every knob, as read from the file or the command line. Unset keys take
/// the per-command defaults when resolved.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Knobs {
    /// Qubit count.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Sweeps per random circuit (default 20 n).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycles: Option<usize>,
    /// Bitstrings per sample.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Circuits per ensemble.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circuits: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spoofer: Option<Spoofer>,
    /// Mixture weight for `--spoofer mixture`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    /// Per-gate error rates, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    /// Gate count entering `F = e^(-r g)`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<usize>,
    /// Circuit source: random gate circuits or Haar states.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<Source>,
    /// Gate alphabet, e.g. `H,P,CNOT,T,I` or weighted `H:2,T:1`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gates: Option<String>,
    /// Register sizes for pt-converge, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ns: Option<Vec<usize>>,
    /// States pooled per register size in pt-converge.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub states: Option<usize>,
    /// Histogram bins on [0, 6/N].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    /// Typical-set widths for xeb-run, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Vec<f64>>,
    /// Classical baseline C.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<f64>,
    /// Unitary dimensions for haar-test, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<Vec<usize>>,
    /// Draws per statistical check in haar-test.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    /// Test hook: leave out the QR phase fix in haar-test.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skip_phase_fix: Option<bool>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        Knobs { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl Knobs {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Flags set in `self` win over `file`.
    pub fn over(self, file: Knobs) -> Knobs {
        overlay!(
            self, file, n, cycles, m, circuits, seed, spoofer, fidelity, r, g, source, gates, ns, states, bins, epsilon,
            baseline, dim, draws, skip_phase_fix, workers, out
        )
    }

    pub fn seed(&self) -> Result<u64> {
        match self.seed {
            Some(s) => Ok(s),
            None => bail!("a seed is required (--seed or `seed = ...` in the config file)"),
        }
    }
}

#[derive(Serialize)]
struct Resolved<'a> {
    command: &'a str,
    #[serde(flatten)]
    knobs: &'a Knobs,
}

/// Writes the resolved configuration as `config.toml` in `dir`.
pub fn write_resolved(dir: &Path, command: &str, knobs: &Knobs) -> Result<()> {
    let text = toml::to_string(&Resolved { command, knobs })?;
    std::fs::write(dir.join("config.toml"), text)?;
    Ok(())
}
