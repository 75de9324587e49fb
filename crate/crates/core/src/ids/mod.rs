//! Two-step side-channel intrusion detection.
//!
//! 1. At initialisation, a fixed probe set is launched through the system
//!    and the averaged output readings are stored as a [`BaselineRecord`].
//! 2. At runtime the same probes are replayed and every port's power and
//!    phase are compared against the record. Any deviation above its
//!    threshold raises the alarm.
//!
//! Phases are compared relative to port 0 of the same probe, which removes
//! the physically unobservable global phase.

mod evaluate;

pub use evaluate::{calibrate_thresholds, evaluate, EvalSetup, KindDetection, Metrics, WorstDeviation};

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;

use crate::detector::{read_outputs, DetectorModel, Readings};
use crate::phase::{phase_distance, wrap_phase, wrap_signed};
use crate::random::stream_seed;
use crate::signal::{OpticalSystem, SignalVector};
#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result};

/// Current on-disk layout of [`BaselineRecord`].
pub const BASELINE_FORMAT_VERSION: u32 = 1;

// seed stream tags
const SYSTEM_STREAM: u64 = 0;
const DETECTOR_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbeSet {
    pub scenario: String,
    pub probes: Vec<SignalVector>,
}

impl ProbeSet {
    /// The N basis vectors followed by the all-ones vector.
    pub fn standard(scenario: &str, ports: usize) -> Self {
        let mut probes: Vec<SignalVector> = (0..ports).map(|k| SignalVector::basis(ports, k)).collect();
        probes.push(SignalVector(alloc::vec![Complex64::new(1.0, 0.0); ports]));
        Self { scenario: String::from(scenario), probes }
    }

    pub fn validate(&self, ports: usize) -> Result<()> {
        if self.probes.is_empty() {
            return Err(Error::Invalid(String::from("probe set is empty")));
        }
        for p in &self.probes {
            p.expect_len(ports)?;
            if !p.is_finite() {
                return Err(Error::Numeric("probe amplitudes must be finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThresholdConfig {
    pub power_threshold_db: f64,
    pub phase_threshold_rad: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self { power_threshold_db: 0.5, phase_threshold_rad: 0.05 }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.power_threshold_db.is_nan() || self.power_threshold_db <= 0.0 || self.power_threshold_db.is_infinite() {
            return Err(Error::Domain { what: "power threshold", value: self.power_threshold_db });
        }
        if self.phase_threshold_rad.is_nan()
            || self.phase_threshold_rad <= 0.0
            || self.phase_threshold_rad.is_infinite()
        {
            return Err(Error::Domain { what: "phase threshold", value: self.phase_threshold_rad });
        }
        Ok(())
    }
}

/// Stored reference for one port under one probe. `phase_rad` is relative
/// to port 0.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReferenceReading {
    pub power_dbm: f64,
    pub phase_rad: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BaselineRecord {
    pub format_version: u32,
    pub scenario: String,
    pub probes: Vec<SignalVector>,
    /// `references[probe][port]`.
    pub references: Vec<Vec<ReferenceReading>>,
    pub seed: u64,
    pub repeats: u32,
}

impl BaselineRecord {
    pub fn port_count(&self) -> usize {
        self.probes.first().map_or(0, |p| p.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != BASELINE_FORMAT_VERSION {
            return Err(Error::Invalid(alloc::format!(
                "unsupported baseline format version {} (expected {BASELINE_FORMAT_VERSION})",
                self.format_version
            )));
        }
        let n = self.port_count();
        if self.references.len() != self.probes.len() {
            return Err(Error::DimensionMismatch {
                what: "baseline probe count",
                expected: self.probes.len(),
                found: self.references.len(),
            });
        }
        for (p, r) in self.probes.iter().zip(&self.references) {
            p.expect_len(n)?;
            if r.len() != n {
                return Err(Error::DimensionMismatch { what: "baseline port count", expected: n, found: r.len() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Channel {
    Power,
    Phase,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Deviation {
    pub probe: usize,
    pub port: usize,
    pub power_db: f64,
    pub phase_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Exceedance {
    pub probe: usize,
    pub port: usize,
    pub channel: Channel,
    pub deviation: f64,
    pub threshold: f64,
}

impl Exceedance {
    pub fn severity(&self) -> f64 {
        self.deviation / self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectionReport {
    pub scenario: String,
    pub thresholds: ThresholdConfig,
    pub deviations: Vec<Deviation>,
    /// Every deviation above its threshold, most severe first.
    pub exceedances: Vec<Exceedance>,
    pub alarm: bool,
}

impl DetectionReport {
    /// Recomputes the alarm from the deviation table alone.
    pub fn recompute_alarm(&self) -> bool {
        self.deviations.iter().any(|d| {
            d.power_db > self.thresholds.power_threshold_db || d.phase_rad > self.thresholds.phase_threshold_rad
        })
    }

    pub fn worst(&self) -> WorstDeviation {
        self.deviations.iter().fold(WorstDeviation::default(), |w, d| WorstDeviation {
            power_db: w.power_db.max(d.power_db),
            phase_rad: w.phase_rad.max(d.phase_rad),
        })
    }
}

/// Phases relative to port 0, wrapped into `(−π, π]`.
pub fn relative_phases(readings: &Readings) -> Vec<f64> {
    let origin = readings.ports.first().map_or(0.0, |p| p.phase_rad);
    readings.ports.iter().map(|p| wrap_signed(p.phase_rad - origin)).collect()
}

/// Runs one probe through the system and the detector.
fn observe<S: OpticalSystem + ?Sized>(
    system: &S,
    probe: &SignalVector,
    detector: &DetectorModel,
    seed: u64,
    path: &[u64],
) -> Result<Readings> {
    let mut sys_path = alloc::vec![SYSTEM_STREAM];
    sys_path.extend_from_slice(path);
    let mut det_path = alloc::vec![DETECTOR_STREAM];
    det_path.extend_from_slice(path);
    let out = system.propagate(probe, stream_seed(seed, &sys_path))?;
    Ok(read_outputs(&out, detector, stream_seed(seed, &det_path)))
}

/// Step one: averaged reference readings for every probe.
///
/// Power is averaged in dB; relative phase by circular mean.
pub fn capture_baseline<S: OpticalSystem + ?Sized>(
    system: &S,
    probes: &ProbeSet,
    detector: &DetectorModel,
    repeats: u32,
    seed: u64,
) -> Result<BaselineRecord> {
    if repeats == 0 {
        return Err(Error::Invalid(String::from("baseline needs at least one repeat")));
    }
    detector.validate()?;
    let n = system.port_count();
    probes.validate(n)?;

    let mut references = Vec::with_capacity(probes.probes.len());
    for (p, probe) in probes.probes.iter().enumerate() {
        let mut power_mean = alloc::vec![0.0; n];
        let mut first_phase = alloc::vec![0.0; n];
        let mut sin_sum = alloc::vec![0.0; n];
        let mut cos_sum = alloc::vec![0.0; n];
        for m in 0..repeats {
            let readings = observe(system, probe, detector, seed, &[p as u64, u64::from(m)])?;
            let rel = relative_phases(&readings);
            for port in 0..n {
                // incremental mean: identical samples reproduce themselves exactly
                power_mean[port] += (readings.ports[port].power_dbm - power_mean[port]) / f64::from(m + 1);
                if m == 0 {
                    first_phase[port] = rel[port];
                }
                let d = rel[port] - first_phase[port];
                sin_sum[port] += d.sin();
                cos_sum[port] += d.cos();
            }
        }
        let row = (0..n)
            .map(|port| ReferenceReading {
                power_dbm: power_mean[port],
                phase_rad: wrap_signed(first_phase[port] + sin_sum[port].atan2(cos_sum[port])),
            })
            .collect();
        references.push(row);
    }
    Ok(BaselineRecord {
        format_version: BASELINE_FORMAT_VERSION,
        scenario: probes.scenario.clone(),
        probes: probes.probes.clone(),
        references,
        seed,
        repeats,
    })
}

/// Replays every baseline probe once and returns the raw readings.
pub fn replay_probes<S: OpticalSystem + ?Sized>(
    system: &S,
    baseline: &BaselineRecord,
    detector: &DetectorModel,
    seed: u64,
) -> Result<Vec<Readings>> {
    baseline.validate()?;
    detector.validate()?;
    let n = baseline.port_count();
    if system.port_count() != n {
        return Err(Error::DimensionMismatch {
            what: "system ports vs baseline",
            expected: n,
            found: system.port_count(),
        });
    }
    baseline.probes.iter().enumerate().map(|(p, probe)| observe(system, probe, detector, seed, &[p as u64])).collect()
}

/// Compares observed readings (one per baseline probe) with the baseline.
pub fn compare(
    baseline: &BaselineRecord,
    observed: &[Readings],
    thresholds: &ThresholdConfig,
) -> Result<DetectionReport> {
    thresholds.validate()?;
    if observed.len() != baseline.references.len() {
        return Err(Error::DimensionMismatch {
            what: "observed probe count",
            expected: baseline.references.len(),
            found: observed.len(),
        });
    }
    let mut deviations = Vec::new();
    let mut exceedances = Vec::new();
    for (probe, (refs, readings)) in baseline.references.iter().zip(observed).enumerate() {
        if readings.ports.len() != refs.len() {
            return Err(Error::DimensionMismatch {
                what: "observed port count",
                expected: refs.len(),
                found: readings.ports.len(),
            });
        }
        let rel = relative_phases(readings);
        for (port, (r, reading)) in refs.iter().zip(&readings.ports).enumerate() {
            let power_db = (reading.power_dbm - r.power_dbm).abs();
            let phase_rad = phase_distance(wrap_phase(rel[port]), wrap_phase(r.phase_rad));
            if power_db > thresholds.power_threshold_db {
                exceedances.push(Exceedance {
                    probe,
                    port,
                    channel: Channel::Power,
                    deviation: power_db,
                    threshold: thresholds.power_threshold_db,
                });
            }
            if phase_rad > thresholds.phase_threshold_rad {
                exceedances.push(Exceedance {
                    probe,
                    port,
                    channel: Channel::Phase,
                    deviation: phase_rad,
                    threshold: thresholds.phase_threshold_rad,
                });
            }
            deviations.push(Deviation { probe, port, power_db, phase_rad });
        }
    }
    exceedances.sort_by(|a, b| b.severity().partial_cmp(&a.severity()).unwrap_or(Ordering::Equal));
    Ok(DetectionReport {
        scenario: baseline.scenario.clone(),
        thresholds: *thresholds,
        alarm: !exceedances.is_empty(),
        deviations,
        exceedances,
    })
}

/// Step two: replay the probes and compare with the stored baseline.
pub fn check<S: OpticalSystem + ?Sized>(
    system: &S,
    baseline: &BaselineRecord,
    thresholds: &ThresholdConfig,
    detector: &DetectorModel,
    seed: u64,
) -> Result<DetectionReport> {
    let observed = replay_probes(system, baseline, detector, seed)?;
    compare(baseline, &observed, thresholds)
}
