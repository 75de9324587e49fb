use alloc::string::String;
use alloc::vec::Vec;

use super::{capture_baseline, check, ProbeSet, ThresholdConfig};
use crate::attack::{inject, AttackKind, AttackSpec, Scenario};
use crate::detector::DetectorModel;
use crate::random::stream_seed;
use crate::signal::OpticalSystem;
#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result};

/// Safety factor applied on top of the empirical clean-deviation quantile.
pub const CALIBRATION_SAFETY_FACTOR: f64 = 1.5;
/// Floor for calibrated thresholds before the safety factor, dB or rad.
pub const CALIBRATION_MIN_THRESHOLD: f64 = 1e-9;

// seed stream tags
const BASELINE_STREAM: u64 = 10;
const CLEAN_STREAM: u64 = 11;
const ATTACK_STREAM: u64 = 12;
const INJECT_STREAM: u64 = 13;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSetup {
    pub probes: ProbeSet,
    pub detector: DetectorModel,
    pub thresholds: ThresholdConfig,
    pub baseline_repeats: u32,
}

/// Largest power and phase deviation over all probes and ports of one check.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WorstDeviation {
    pub power_db: f64,
    pub phase_rad: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KindDetection {
    pub kind: AttackKind,
    pub detected: usize,
    pub total: usize,
}

impl KindDetection {
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.detected as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metrics {
    pub scenario: String,
    pub trials: usize,
    pub clean_alarms: usize,
    pub false_positive_rate: f64,
    pub attacked_trials: usize,
    pub detections: usize,
    /// `None` when the suite is empty.
    pub true_positive_rate: Option<f64>,
    pub per_kind: Vec<KindDetection>,
    pub clean_worst: Vec<WorstDeviation>,
    /// `(suite index, worst deviation)` per attacked trial.
    pub attacked_worst: Vec<(usize, WorstDeviation)>,
}

/// Runs `trials` clean checks and, per trial, one attacked check for every
/// attack in the suite. Trial `t` injects at step `t`, so delayed triggers
/// only count from their activation step on.
pub fn evaluate(
    scenario: &Scenario,
    suite: &[AttackSpec],
    setup: &EvalSetup,
    trials: usize,
    seed: u64,
) -> Result<Metrics> {
    if trials == 0 {
        return Err(Error::Invalid(String::from("evaluation needs at least one trial")));
    }
    let baseline = capture_baseline(
        scenario,
        &setup.probes,
        &setup.detector,
        setup.baseline_repeats,
        stream_seed(seed, &[BASELINE_STREAM]),
    )?;

    let mut per_kind: Vec<KindDetection> = Vec::new();
    for a in suite {
        if !per_kind.iter().any(|k| k.kind == a.kind) {
            per_kind.push(KindDetection { kind: a.kind, detected: 0, total: 0 });
        }
    }

    let mut clean_alarms = 0;
    let mut clean_worst = Vec::with_capacity(trials);
    let mut attacked_worst = Vec::with_capacity(trials * suite.len());
    let mut detections = 0;
    for t in 0..trials {
        let t64 = t as u64;
        let report =
            check(scenario, &baseline, &setup.thresholds, &setup.detector, stream_seed(seed, &[CLEAN_STREAM, t64]))?;
        clean_alarms += usize::from(report.alarm);
        clean_worst.push(report.worst());

        for (i, attack) in suite.iter().enumerate() {
            let i64_ = i as u64;
            let perturbed = inject(scenario, attack, t64, stream_seed(seed, &[INJECT_STREAM, i64_, t64]))?;
            let report = check(
                &perturbed,
                &baseline,
                &setup.thresholds,
                &setup.detector,
                stream_seed(seed, &[ATTACK_STREAM, i64_, t64]),
            )?;
            let entry = per_kind.iter_mut().find(|k| k.kind == attack.kind).expect("kind registered");
            entry.total += 1;
            if report.alarm {
                entry.detected += 1;
                detections += 1;
            }
            attacked_worst.push((i, report.worst()));
        }
    }

    let attacked_trials = trials * suite.len();
    Ok(Metrics {
        scenario: scenario.id.clone(),
        trials,
        clean_alarms,
        false_positive_rate: clean_alarms as f64 / trials as f64,
        attacked_trials,
        detections,
        true_positive_rate: (attacked_trials > 0).then(|| detections as f64 / attacked_trials as f64),
        per_kind,
        clean_worst,
        attacked_worst,
    })
}

/// Chooses thresholds from clean replays of an unattacked system.
///
/// For each channel the per-check worst deviation is collected over
/// `trials` clean checks against a baseline of `baseline_repeats` averaged
/// captures; the threshold is the empirical `(1 − target_fpr)` quantile of
/// that worst deviation, floored at [`CALIBRATION_MIN_THRESHOLD`] and scaled
/// by [`CALIBRATION_SAFETY_FACTOR`]. Requires `trials · target_fpr ≥ 1`.
pub fn calibrate_thresholds<S: OpticalSystem + ?Sized>(
    system: &S,
    detector: &DetectorModel,
    probes: &ProbeSet,
    target_fpr: f64,
    trials: usize,
    baseline_repeats: u32,
    seed: u64,
) -> Result<ThresholdConfig> {
    if !(target_fpr > 0.0 && target_fpr < 1.0) {
        return Err(Error::Domain { what: "target false-positive rate", value: target_fpr });
    }
    if (trials as f64) * target_fpr < 1.0 {
        return Err(Error::Invalid(alloc::format!(
            "{trials} trials cannot resolve the {} quantile; need at least {}",
            1.0 - target_fpr,
            (1.0 / target_fpr).ceil()
        )));
    }
    let baseline = capture_baseline(system, probes, detector, baseline_repeats, stream_seed(seed, &[BASELINE_STREAM]))?;
    // thresholds only affect the alarm flag, not the deviations
    let probe_thresholds = ThresholdConfig::default();
    let mut power = Vec::with_capacity(trials);
    let mut phase = Vec::with_capacity(trials);
    for t in 0..trials {
        let report =
            check(system, &baseline, &probe_thresholds, detector, stream_seed(seed, &[CLEAN_STREAM, t as u64]))?;
        let w = report.worst();
        power.push(w.power_db);
        phase.push(w.phase_rad);
    }
    let pick = |mut v: Vec<f64>| {
        let q = empirical_quantile(&mut v, 1.0 - target_fpr);
        q.max(CALIBRATION_MIN_THRESHOLD) * CALIBRATION_SAFETY_FACTOR
    };
    Ok(ThresholdConfig { power_threshold_db: pick(power), phase_threshold_rad: pick(phase) })
}

/// Smallest sample `x` with at least a fraction `q` of samples `≤ x`.
pub(crate) fn empirical_quantile(samples: &mut [f64], q: f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    let rank = (q * n as f64).ceil() as usize;
    samples[rank.clamp(1, n) - 1]
}
