//! Random-circuit sampling simulator and cross-entropy benchmarking engine.
//!
//! * [`statevector`]: dense state vectors, gates and circuits.
//! * [`haar`]: Haar-random phases, states and unitaries; random gate circuits.
//! * [`sampling`]: bitstring sampling, spoofer distributions and `log Pr(S)`.
//! * [`ptheory`]: Porter-Thomas laws, entropy constants and histograms.
//! * [`xeb`]: cross entropy, `delta_h`, log-ratio experiments and ensembles.
//! * [`noise`]: per-gate error rate to fidelity.

pub mod error;
pub mod haar;
pub mod noise;
pub mod ptheory;
pub mod quad;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod statevector;
pub mod suite;
pub mod xeb;

pub use error::{Result, XebError};
pub use haar::{GateSetSpec, QrPhase};
pub use rng::RngStream;
pub use sampling::{BitstringSample, ProbabilityTable, SamplerKind};
pub use statevector::{Circuit, GateKind, GateOp, StateVector};
pub use xeb::{EnsembleConfig, EnsembleSummary, XebReport};
