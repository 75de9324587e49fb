//! Time-stepped scenario runs.

use std::path::Path;

use photomesh_core::attack::{inject_all, PerturbedScenario, Scenario};
use photomesh_core::ids::{capture_baseline, check, BaselineRecord, DetectionReport, WorstDeviation};
use photomesh_core::random::stream_seed;
use photomesh_core::{read_outputs, OpticalSystem, Readings};
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{HarnessError, Result};
use crate::export::{export_deviations, export_readings, write_json};

// seed stream tags under the config's master seed
pub const BASELINE_STREAM: u64 = 1;
pub const ATTACK_STREAM: u64 = 2;
pub const READ_STREAM: u64 = 3;
pub const CHECK_STREAM: u64 = 4;
pub const EVAL_STREAM: u64 = 5;
pub const CALIBRATE_STREAM: u64 = 6;

pub const READINGS_FILE: &str = "readings.csv";
pub const REPORT_FILE: &str = "report.json";
pub const DEVIATIONS_FILE: &str = "deviations.csv";
pub const BASELINE_FILE: &str = "baseline.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub step: u64,
    pub active_attacks: Vec<String>,
    pub alarm: bool,
    pub exceedances: usize,
    pub worst: WorstDeviation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub seed: u64,
    pub steps: Vec<StepSummary>,
    pub first_alarm_step: Option<u64>,
    /// Full comparison from the last step.
    pub final_check: DetectionReport,
}

impl ScenarioReport {
    pub fn alarm(&self) -> bool {
        self.first_alarm_step.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub baseline: BaselineRecord,
    /// Operating-input readings, one per step.
    pub readings: Vec<Readings>,
    pub report: ScenarioReport,
}

pub fn baseline_for(config: &ScenarioConfig, scenario: &Scenario) -> Result<BaselineRecord> {
    capture_baseline(
        scenario,
        &config.probe_set(),
        &config.detector,
        config.ids.baseline_repeats,
        stream_seed(config.seed, &[BASELINE_STREAM]),
    )
    .map_err(|e| HarnessError::core(&config.name, e))
}

/// The scenario as it stands at `step`, with every due attack injected.
pub fn perturbed_at(config: &ScenarioConfig, scenario: &Scenario, step: u64) -> Result<PerturbedScenario> {
    inject_all(scenario, &config.attack_specs(), step, stream_seed(config.seed, &[ATTACK_STREAM, step]))
        .map_err(|e| HarnessError::core(&config.name, e))
}

/// Checks the scenario at `step` against `baseline`.
pub fn monitor_step(
    config: &ScenarioConfig,
    scenario: &Scenario,
    baseline: &BaselineRecord,
    step: u64,
) -> Result<(PerturbedScenario, DetectionReport)> {
    let perturbed = perturbed_at(config, scenario, step)?;
    let report = check(
        &perturbed,
        baseline,
        &config.thresholds(),
        &config.detector,
        stream_seed(config.seed, &[CHECK_STREAM, step]),
    )
    .map_err(|e| HarnessError::core(&config.name, e))?;
    Ok((perturbed, report))
}

/// Captures a baseline on the clean system, then for every step injects
/// the due attacks, records the operating input and runs an IDS check.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutcome> {
    config.validate()?;
    let core = |e| HarnessError::core(&config.name, e);
    let scenario = config.build_scenario()?;
    let baseline = baseline_for(config, &scenario)?;
    let input = config.operating_input();

    let mut readings = Vec::new();
    let mut steps = Vec::new();
    let mut last = None;
    for step in 0..config.run.steps {
        let (perturbed, report) = monitor_step(config, &scenario, &baseline, step)?;
        let out = perturbed.propagate(&input, step).map_err(core)?;
        readings.push(
            read_outputs(&out, &config.detector, stream_seed(config.seed, &[READ_STREAM, step]))
                .labelled(&config.name, step),
        );
        steps.push(StepSummary {
            step,
            active_attacks: perturbed.active.iter().map(|k| k.name().to_owned()).collect(),
            alarm: report.alarm,
            exceedances: report.exceedances.len(),
            worst: report.worst(),
        });
        last = Some(report);
    }
    let report = ScenarioReport {
        scenario: config.name.clone(),
        seed: config.seed,
        first_alarm_step: steps.iter().find(|s| s.alarm).map(|s| s.step),
        steps,
        final_check: last.expect("validated steps >= 1"),
    };
    Ok(RunOutcome { baseline, readings, report })
}

pub fn write_outcome(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    export_readings(&dir.join(READINGS_FILE), &outcome.readings)?;
    export_deviations(&dir.join(DEVIATIONS_FILE), &outcome.report.final_check)?;
    write_json(&dir.join(REPORT_FILE), &outcome.report)?;
    write_json(&dir.join(BASELINE_FILE), &outcome.baseline)
}
