//! Transfer-matrix simulation of coherent MZI-mesh accelerators, attack
//! injection, and baseline-comparison intrusion detection.
//!
//! The crate is `no_std` and only needs `alloc`. Float math goes through
//! [`num_traits::Float`] backed by `libm`, so results are identical with or
//! without the `std` feature.
//!
//! Layout:
//! - [`mzi`], [`mesh`], [`clements`], [`svd`]: the linear-optics engine.
//! - [`physics`], [`mrr`], [`detector`]: device perturbations and readout.
//! - [`attack`]: attack specifications and injection into a scenario.
//! - [`ids`]: baseline capture, runtime checking, evaluation, calibration.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod attack;
pub mod clements;
pub mod detector;
mod error;
pub mod ids;
pub mod mesh;
pub mod mrr;
pub mod mzi;
pub mod phase;
pub mod physics;
pub mod random;
pub mod signal;
pub mod svd;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use attack::{inject, trigger_fires, AttackKind, AttackSpec, PerturbedScenario, Scenario, Trigger};
pub use clements::clements_decompose;
pub use detector::{read_outputs, DetectorModel, PortReading, Readings};
pub use mesh::{MeshProgram, Placement};
pub use mzi::{coupler_transfer, mzi_transfer, MziSetting};
pub use signal::{OpticalSystem, SignalVector, TransferMatrix};
pub use svd::{svd_map, Accelerator, WeightMatrix};

// Inherent float methods shadow the trait when `std` is linked somewhere in
// the graph, which makes the import look unused in that configuration.
#[allow(unused_imports)]
pub(crate) use num_traits::Float;
