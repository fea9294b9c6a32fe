//! Per-gate error rate to circuit fidelity, `F = e^(-r g)`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, XebError};
use crate::statevector::Circuit;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Per-gate error rate.
    pub r: f64,
    /// Total gate count.
    pub g: usize,
    pub fidelity: f64,
}

impl NoiseSpec {
    pub fn new(r: f64, g: usize) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(XebError::validation(format!("error rate {r} must be finite and >= 0")));
        }
        Ok(Self {
            r,
            g,
            fidelity: (-r * g as f64).exp(),
        })
    }
}

pub fn fidelity(r: f64, g: usize) -> Result<f64> {
    NoiseSpec::new(r, g).map(|s| s.fidelity)
}

/// One spec per error rate, all sharing the circuit's gate count.
pub fn sweep(r_values: &[f64], circuit: &Circuit) -> Result<Vec<NoiseSpec>> {
    sweep_gates(r_values, circuit.gate_count())
}

pub fn sweep_gates(r_values: &[f64], g: usize) -> Result<Vec<NoiseSpec>> {
    if r_values.is_empty() {
        return Err(XebError::validation("empty error-rate sweep"));
    }
    r_values.iter().map(|&r| NoiseSpec::new(r, g)).collect()
}
