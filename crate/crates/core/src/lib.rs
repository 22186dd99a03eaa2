//! Pilot-tone estimation of an electro-optic modulator's bias offset from
//! its minimum-transmission point.
//!
//! A small sine `-V_d sin(w_d t)` is added to the bias. Near the null the
//! detected output power carries a first harmonic proportional to the offset
//! and a second harmonic proportional to `V_d^2`; the ratio of their DFT bins
//! recovers the offset in magnitude and sign without knowledge of the
//! modulator's physical constants.
//!
//! ```
//! use eom_bias::{detector, estimator, DetectorConfig, EomParams, NormalizedAmplitude, PilotConfig};
//!
//! let eom = EomParams::new(1.0, 1.0, 0.0, 0.5).unwrap();
//! let pilot = PilotConfig::new(1e-3, 0.5e6, 0.0, 25).unwrap();
//! let det = DetectorConfig::new(0.1, 0.0, 5e6, 0.0).unwrap();
//! let trace = detector::simulate_burst(&eom, &pilot, &det, eom.v_min() - 0.002, 1).unwrap();
//! let f = NormalizedAmplitude::new(1e-3).unwrap();
//! let est = estimator::estimate_delta_v_norm(&trace, f, pilot.f_d).unwrap();
//! assert!((est - 0.002).abs() < 1e-6);
//! ```

pub mod analysis;
pub mod detector;
pub mod eom;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod pilot;

pub use analysis::{MomentSet, VariancePrediction};
pub use detector::{DetectorConfig, SampledTrace};
pub use eom::{EomParams, HarmonicComponents};
pub use error::{Error, Result};
pub use estimator::EstimateResult;
pub use harness::{AmplitudeRow, BlackLevelRow, ErrorStats, Scenario};
pub use pilot::{NormalizedAmplitude, PilotConfig, SamplingPlan};
