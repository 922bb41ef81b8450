//! Interacting random-field dipole glass of two-level-system defects near a
//! semiconductor qubit.
//!
//! Defects are Ising dipoles `s_j p0 p_j` at fixed positions, each biased by
//! a random local field and coupled to the others by the dipole-dipole
//! interaction. The crate computes the thermal average of the electric field
//! they produce at a qubit at the origin, and from it the qubit frequency
//! shift, using a closed form (no interactions), exhaustive enumeration
//! (small N) or Metropolis Monte Carlo.

pub mod analysis;
pub mod curve;
pub mod ensemble;
pub mod error;
pub mod exact;
pub mod fit;
pub mod geometry;
pub mod mc;
pub mod physics;
pub mod rng;
pub mod units;

pub use analysis::{classify, ClassifierParams, ClassifierVerdict, ConversionParams};
pub use curve::{CurveMethod, FieldCurve, TemperatureGrid};
pub use error::{IrgmError, Result};
pub use geometry::{PhysicalParams, Picture, SampleConfig};
pub use mc::McSchedule;
pub use physics::{PrecomputedSample, SpinState};

/// Version string embedded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
