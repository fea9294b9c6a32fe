//! Bitstring sampling from output distributions and `Pr(S)` bookkeeping.

use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, XebError};
use crate::rng::RngStream;

/// Normalization tolerance for tables supplied from outside.
pub const TABLE_SUM_TOL: f64 = 1e-8;

/// Full output distribution `p(x)` over `N` basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTable {
    probs: Vec<f64>,
}

impl ProbabilityTable {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(XebError::validation("empty probability table"));
        }
        if let Some(i) = probs.iter().position(|p| !p.is_finite() || *p < 0.0) {
            return Err(XebError::validation(format!(
                "entry {i} is not a probability: {}",
                probs[i]
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > TABLE_SUM_TOL {
            return Err(XebError::validation(format!(
                "probability table sums to {sum}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(XebError::validation("uniform table over zero states"));
        }
        Ok(Self {
            probs: vec![1.0 / dim as f64; dim],
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn get(&self, x: usize) -> Option<f64> {
        self.probs.get(x).copied()
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    /// Relabels basis states: entry `x` of the result is entry `perm[x]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.dim() {
            return Err(XebError::validation("permutation length mismatch"));
        }
        let mut seen = vec![false; perm.len()];
        for &j in perm {
            if j >= perm.len() || std::mem::replace(&mut seen[j], true) {
                return Err(XebError::validation("not a permutation"));
            }
        }
        Ok(Self {
            probs: perm.iter().map(|&j| self.probs[j]).collect(),
        })
    }
}

/// A multiset `S` of sampled basis indices with provenance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitstringSample {
    pub n: usize,
    pub xs: Vec<usize>,
    pub sampler_id: String,
    pub circuit_id: String,
}

impl BitstringSample {
    pub fn new(n: usize, xs: Vec<usize>, sampler_id: &str, circuit_id: &str) -> Result<Self> {
        if xs.is_empty() {
            return Err(XebError::validation("sample must contain at least one bitstring"));
        }
        let size = 1usize
            .checked_shl(n as u32)
            .ok_or_else(|| XebError::validation(format!("{n} qubits is too many")))?;
        if let Some(&x) = xs.iter().find(|&&x| x >= size) {
            return Err(XebError::Index {
                what: "bitstring",
                index: x,
                size,
            });
        }
        Ok(Self {
            n,
            xs,
            sampler_id: sampler_id.to_owned(),
            circuit_id: circuit_id.to_owned(),
        })
    }

    /// Number of bitstrings `m`.
    pub fn m(&self) -> usize {
        self.xs.len()
    }

    /// Multiset union.
    pub fn merged(&self, other: &BitstringSample) -> Result<Self> {
        if self.n != other.n {
            return Err(XebError::validation("cannot merge samples over different registers"));
        }
        let mut xs = self.xs.clone();
        xs.extend_from_slice(&other.xs);
        Ok(Self {
            n: self.n,
            xs,
            sampler_id: self.sampler_id.clone(),
            circuit_id: self.circuit_id.clone(),
        })
    }
}

/// Where a set of bitstrings comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplerKind {
    /// The noiseless circuit output.
    Ideal,
    /// `p(x) = 1/N`.
    Uniform,
    /// Global depolarizing mixture `F p + (1 - F)/N`.
    NoisyMixture { fidelity: f64 },
    External(ProbabilityTable),
}

impl SamplerKind {
    pub fn label(&self) -> String {
        match self {
            SamplerKind::Ideal => "ideal".into(),
            SamplerKind::Uniform => "uniform".into(),
            SamplerKind::NoisyMixture { fidelity } => format!("mixture(F={fidelity})"),
            SamplerKind::External(_) => "external".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SamplerKind::NoisyMixture { fidelity } if !(0.0..=1.0).contains(fidelity) => Err(
                XebError::validation(format!("mixture fidelity {fidelity} outside [0, 1]")),
            ),
            _ => Ok(()),
        }
    }
}

/// The distribution a sampler of `kind` draws from, given the ideal table.
pub fn spoofer_table(kind: &SamplerKind, ideal: &ProbabilityTable) -> Result<ProbabilityTable> {
    kind.validate()?;
    let dim = ideal.dim();
    match kind {
        SamplerKind::Ideal => Ok(ideal.clone()),
        SamplerKind::Uniform => ProbabilityTable::uniform(dim),
        SamplerKind::NoisyMixture { fidelity } => {
            let floor = (1.0 - fidelity) / dim as f64;
            Ok(ProbabilityTable::from_normalized(
                ideal.probs().iter().map(|p| fidelity * p + floor).collect(),
            ))
        }
        SamplerKind::External(table) => {
            if table.dim() != dim {
                return Err(XebError::validation(format!(
                    "external table has {} entries, ideal has {dim}",
                    table.dim()
                )));
            }
            Ok(table.clone())
        }
    }
}

/// Inverse-CDF sampler over a cumulative table.
#[derive(Clone, Debug)]
pub struct CumulativeSampler {
    cdf: Vec<f64>,
    last_nonzero: usize,
}

impl CumulativeSampler {
    pub fn new(table: &ProbabilityTable) -> Self {
        let mut acc = 0.0;
        let cdf: Vec<f64> = table
            .probs()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last_nonzero = table.probs().iter().rposition(|&p| p > 0.0).unwrap_or(0);
        Self { cdf, last_nonzero }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.cdf[self.cdf.len() - 1];
        let u = rng.random::<f64>() * total;
        self.cdf.partition_point(|&c| c <= u).min(self.last_nonzero)
    }
}

/// Draws `m` independent bitstrings from `table`.
pub fn draw_sample(
    table: &ProbabilityTable,
    m: usize,
    rng: &mut RngStream,
    sampler_id: &str,
    circuit_id: &str,
) -> Result<BitstringSample> {
    if m == 0 {
        return Err(XebError::validation("sample size m must be at least 1"));
    }
    let sum = table.sum();
    if (sum - 1.0).abs() > TABLE_SUM_TOL {
        return Err(XebError::validation(format!("table sums to {sum}")));
    }
    let sampler = CumulativeSampler::new(table);
    let xs = (0..m).map(|_| sampler.draw(rng)).collect();
    let n = table.dim().next_power_of_two().trailing_zeros() as usize;
    BitstringSample::new(n.max(1), xs, sampler_id, circuit_id)
}

/// `log Pr(S)`, with the indices of any zero-probability bitstrings.
#[derive(Clone, Debug, PartialEq)]
pub struct LogProb {
    pub value: f64,
    pub offending: Vec<usize>,
}

impl LogProb {
    pub fn is_finite(&self) -> bool {
        self.offending.is_empty()
    }
}

/// `log Pr(S) = sum_i log p(x_i)` against the ideal table, in nats.
pub fn log_pr(sample: &BitstringSample, ideal: &ProbabilityTable) -> Result<LogProb> {
    let mut value = 0.0;
    let mut offending = Vec::new();
    for &x in &sample.xs {
        let p = ideal.get(x).ok_or(XebError::Index {
            what: "bitstring",
            index: x,
            size: ideal.dim(),
        })?;
        if p > 0.0 {
            value += p.ln();
        } else if !offending.contains(&x) {
            offending.push(x);
        }
    }
    if !offending.is_empty() {
        value = f64::NEG_INFINITY;
    }
    Ok(LogProb { value, offending })
}

/// Metadata written beside a sample CSV.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct SampleRow {
    circuit_id: String,
    sampler_id: String,
    index: usize,
}

/// CSV with columns `circuit_id,sampler_id,index`.
pub fn write_sample_csv<W: Write>(sample: &BitstringSample, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for &index in &sample.xs {
        w.serialize(SampleRow {
            circuit_id: sample.circuit_id.clone(),
            sampler_id: sample.sampler_id.clone(),
            index,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sample_csv<R: Read>(input: R, sidecar: &SampleSidecar) -> Result<BitstringSample> {
    let mut r = csv::Reader::from_reader(input);
    let mut xs = Vec::new();
    let (mut circuit_id, mut sampler_id) = (String::new(), String::new());
    for row in r.deserialize() {
        let row: SampleRow = row?;
        circuit_id = row.circuit_id;
        sampler_id = row.sampler_id;
        xs.push(row.index);
    }
    if xs.len() != sidecar.m {
        return Err(XebError::validation(format!(
            "sidecar declares m={} but CSV has {} rows",
            sidecar.m,
            xs.len()
        )));
    }
    BitstringSample::new(sidecar.n, xs, &sampler_id, &circuit_id)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> RngStream {
        RngStream::new(11, 0)
    }

    #[test]
    fn deterministic_table() {
        let t = ProbabilityTable::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let s = draw_sample(&t, 10, &mut rng(), "ideal", "c0").unwrap();
        assert_eq!(s.xs, vec![0; 10]);
        assert_eq!(s.n, 2);
    }

    #[test]
    fn zero_entries_never_drawn() {
        let t = ProbabilityTable::new(vec![0.0, 0.5, 0.0, 0.5, 0.0]).unwrap();
        let s = draw_sample(&t, 5000, &mut rng(), "a", "b").unwrap();
        assert!(s.xs.iter().all(|&x| x == 1 || x == 3));
    }

    #[test]
    fn uniform_frequencies() {
        let t = ProbabilityTable::uniform(4).unwrap();
        let m = 100_000;
        let s = draw_sample(&t, m, &mut rng(), "u", "c").unwrap();
        let se = (0.25f64 * 0.75 / m as f64).sqrt();
        for k in 0..4 {
            let f = s.xs.iter().filter(|&&x| x == k).count() as f64 / m as f64;
            assert!((f - 0.25).abs() < 5.0 * se, "k={k} f={f}");
        }
    }

    #[test]
    fn table_validation() {
        assert!(ProbabilityTable::new(vec![0.5, 0.4]).is_err());
        assert!(ProbabilityTable::new(vec![1.5, -0.5]).is_err());
        assert!(ProbabilityTable::new(vec![]).is_err());
        assert!(ProbabilityTable::new(vec![0.5, 0.5 + 5e-9]).is_ok());
    }

    #[test]
    fn spoofer_tables() {
        let ideal = ProbabilityTable::new(vec![0.5, 0.25, 0.125, 0.125, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let u = spoofer_table(&SamplerKind::Uniform, &ideal).unwrap();
        assert!(u.probs().iter().all(|&p| p == 0.125));
        let f1 = spoofer_table(&SamplerKind::NoisyMixture { fidelity: 1.0 }, &ideal).unwrap();
        assert_eq!(f1, ideal);
        let f0 = spoofer_table(&SamplerKind::NoisyMixture { fidelity: 0.0 }, &ideal).unwrap();
        assert_eq!(f0, u);
        assert_eq!(spoofer_table(&SamplerKind::Ideal, &ideal).unwrap(), ideal);
        assert!(spoofer_table(&SamplerKind::NoisyMixture { fidelity: 1.5 }, &ideal).is_err());
        assert!(spoofer_table(&SamplerKind::NoisyMixture { fidelity: -0.1 }, &ideal).is_err());
    }

    #[test]
    fn log_pr_examples() {
        let t = ProbabilityTable::new(vec![0.5, 0.5]).unwrap();
        let s = BitstringSample::new(1, vec![1], "x", "c").unwrap();
        assert!((log_pr(&s, &t).unwrap().value - 0.5f64.ln()).abs() < 1e-15);

        let t = ProbabilityTable::new(vec![0.0, 1.0]).unwrap();
        let s = BitstringSample::new(1, vec![1; 7], "x", "c").unwrap();
        assert_eq!(log_pr(&s, &t).unwrap().value, 0.0);

        let t = ProbabilityTable::uniform(32).unwrap();
        let s = draw_sample(&t, 100, &mut rng(), "u", "c").unwrap();
        let lp = log_pr(&s, &t).unwrap().value;
        assert!((lp - (-100.0 * 32f64.ln())).abs() < 1e-9);
        assert!((lp + 346.57).abs() < 0.01);
    }

    #[test]
    fn log_pr_zero_probability_marker() {
        let t = ProbabilityTable::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let s = BitstringSample::new(2, vec![1, 0, 2, 0], "x", "c").unwrap();
        let lp = log_pr(&s, &t).unwrap();
        assert_eq!(lp.value, f64::NEG_INFINITY);
        assert_eq!(lp.offending, vec![0, 2]);
        assert!(!lp.is_finite());
    }

    #[test]
    fn sample_validation() {
        assert!(BitstringSample::new(2, vec![], "a", "b").is_err());
        assert!(BitstringSample::new(2, vec![4], "a", "b").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = BitstringSample::new(3, vec![1, 7, 7, 0], "uniform", "c3").unwrap();
        let mut buf = Vec::new();
        write_sample_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("circuit_id,sampler_id,index\nc3,uniform,1\n"));
        let side = SampleSidecar { m: 4, n: 3, seed: 9 };
        let back = read_sample_csv(buf.as_slice(), &side).unwrap();
        assert_eq!(back, s);
        let bad = SampleSidecar { m: 5, ..side };
        assert!(read_sample_csv(buf.as_slice(), &bad).is_err());
    }
}
