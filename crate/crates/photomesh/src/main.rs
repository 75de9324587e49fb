use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use photomesh::config::{parse_scenario, AttackConfig, Overrides, ScenarioConfig};
use photomesh::error::{HarnessError, Result, EXIT_ALARM, EXIT_CLEAN, EXIT_USAGE};
use photomesh::export::{export_deviations, read_json, write_json};
use photomesh::inference::run_inference;
use photomesh::run::{self, baseline_for, monitor_step, run_scenario, write_outcome, ScenarioReport};
use photomesh_core::attack::{AttackKind, Trigger};
use photomesh_core::ids::{calibrate_thresholds, evaluate, EvalSetup};
use photomesh_core::ids::{BaselineRecord, DetectionReport};
use photomesh_core::random::stream_seed;

#[derive(Debug, Parser)]
#[command(name = "photomesh", version, about = "Photonic mesh accelerator and intrusion detection simulator")]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    threshold_power_db: Option<f64>,
    #[arg(long, global = true)]
    threshold_phase_rad: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every step: readings, per-step IDS checks and a report.
    Simulate,
    /// Capture an IDS baseline on the clean system.
    Baseline,
    /// Check one step against a stored baseline.
    Monitor {
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long, default_value_t = 0)]
        step: u64,
    },
    /// Detection rates over repeated trials for the configured attacks,
    /// optionally adding one from the command line.
    Attack {
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, value_delimiter = ',')]
        targets: Vec<usize>,
        #[arg(long, default_value_t = 0.0)]
        magnitude: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Classification accuracy under phase noise and attacks.
    Infer,
    /// Derive thresholds for a target false-positive rate.
    Calibrate {
        #[arg(long, default_value_t = 0.01)]
        target_fpr: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Summarise a report written by `simulate` or `monitor`.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

fn load(cli: &Cli) -> Result<ScenarioConfig> {
    let path = cli.config.as_deref().ok_or_else(|| HarnessError::invalid("--config", "a scenario file is required"))?;
    let text =
        fs::read_to_string(path).map_err(|e| HarnessError::invalid("--config", format!("{}: {e}", path.display())))?;
    let mut config = parse_scenario(&text)?;
    Overrides {
        seed: cli.seed,
        out_dir: cli.out_dir.clone(),
        power_threshold_db: cli.threshold_power_db,
        phase_threshold_rad: cli.threshold_phase_rad,
    }
    .apply(&mut config)?;
    Ok(config)
}

fn alarm_code(alarm: bool) -> i32 {
    if alarm {
        EXIT_ALARM
    } else {
        EXIT_CLEAN
    }
}

fn print_check(report: &DetectionReport) {
    println!(
        "{}: {} ({} exceedances over {} readings)",
        report.scenario,
        if report.alarm { "ALARM" } else { "clean" },
        report.exceedances.len(),
        report.deviations.len()
    );
    for e in report.exceedances.iter().take(5) {
        println!("  probe {} port {} {:?}: {:.4} > {:.4}", e.probe, e.port, e.channel, e.deviation, e.threshold);
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    if let Command::Report { input } = &cli.command {
        return report(input);
    }
    let mut config = load(cli)?;
    let dir = config.output.dir.clone();
    let core = |name: &str, e| HarnessError::core(name, e);
    match &cli.command {
        Command::Simulate => {
            let outcome = run_scenario(&config)?;
            write_outcome(&outcome, &dir)?;
            print_check(&outcome.report.final_check);
            if let Some(step) = outcome.report.first_alarm_step {
                println!("first alarm at step {step}");
            }
            Ok(alarm_code(outcome.report.alarm()))
        }
        Command::Baseline => {
            let scenario = config.build_scenario()?;
            let baseline = baseline_for(&config, &scenario)?;
            let path = dir.join(run::BASELINE_FILE);
            write_json(&path, &baseline)?;
            println!("baseline with {} probes written to {}", baseline.probes.len(), path.display());
            Ok(EXIT_CLEAN)
        }
        Command::Monitor { baseline, step } => {
            let stored: BaselineRecord = read_json(baseline)?;
            stored.validate().map_err(|e| HarnessError::Format { path: baseline.clone(), message: e.to_string() })?;
            let scenario = config.build_scenario()?;
            let (_, report) = monitor_step(&config, &scenario, &stored, *step)?;
            write_json(&dir.join(run::REPORT_FILE), &report)?;
            export_deviations(&dir.join(run::DEVIATIONS_FILE), &report)?;
            print_check(&report);
            Ok(alarm_code(report.alarm))
        }
        Command::Attack { kind, targets, magnitude, trials } => {
            if let Some(kind) = kind {
                let kind = AttackKind::from_name(kind).map_err(|e| HarnessError::invalid("--kind", e.to_string()))?;
                config.attacks.push(AttackConfig {
                    kind,
                    targets: targets.clone(),
                    magnitude: *magnitude,
                    overrides: Vec::new(),
                    trigger: Trigger::Always,
                });
                config.validate()?;
            }
            if *trials == 0 {
                return Err(HarnessError::invalid("--trials", "must be at least 1"));
            }
            let scenario = config.build_scenario()?;
            let setup = EvalSetup {
                probes: config.probe_set(),
                detector: config.detector,
                thresholds: config.thresholds(),
                baseline_repeats: config.ids.baseline_repeats,
            };
            let metrics = evaluate(
                &scenario,
                &config.attack_specs(),
                &setup,
                *trials,
                stream_seed(config.seed, &[run::EVAL_STREAM]),
            )
            .map_err(|e| core(&config.name, e))?;
            write_json(&dir.join("metrics.json"), &metrics)?;
            println!("false-positive rate {:.4} over {} clean trials", metrics.false_positive_rate, metrics.trials);
            for k in &metrics.per_kind {
                println!("{:>10}: detected {}/{} ({:.3})", k.kind, k.detected, k.total, k.rate());
            }
            Ok(EXIT_CLEAN)
        }
        Command::Infer => {
            let report = run_inference(&config)?;
            write_json(&dir.join("accuracy.json"), &report)?;
            println!("clean accuracy {:.4} (dense {:.4})", report.clean_accuracy, report.dense_accuracy);
            for p in &report.noise_curve {
                println!(
                    "sigma {:<5} mean {:.4} [{:.4}, {:.4}]",
                    p.sigma, p.mean_accuracy, p.min_accuracy, p.max_accuracy
                );
            }
            if let Some(a) = report.attacked_accuracy {
                println!("under attack {a:.4}");
            }
            Ok(EXIT_CLEAN)
        }
        Command::Calibrate { target_fpr, trials } => {
            let scenario = config.build_scenario()?;
            let t = calibrate_thresholds(
                &scenario,
                &config.detector,
                &config.probe_set(),
                *target_fpr,
                *trials,
                config.ids.baseline_repeats,
                stream_seed(config.seed, &[run::CALIBRATE_STREAM]),
            )
            .map_err(|e| HarnessError::invalid("calibrate", e.to_string()))?;
            write_json(&dir.join("thresholds.json"), &t)?;
            println!("power_threshold_db = {}\nphase_threshold_rad = {}", t.power_threshold_db, t.phase_threshold_rad);
            Ok(EXIT_CLEAN)
        }
        Command::Report { .. } => unreachable!("handled above"),
    }
}

/// Accepts either a `simulate` report or a single `monitor` check.
fn report(path: &Path) -> Result<i32> {
    if let Ok(r) = read_json::<ScenarioReport>(path) {
        println!("scenario {} (seed {}), {} steps", r.scenario, r.seed, r.steps.len());
        for s in &r.steps {
            println!(
                "  step {:>4}: {:<5} worst {:.4} dB / {:.4} rad  attacks [{}]",
                s.step,
                if s.alarm { "ALARM" } else { "clean" },
                s.worst.power_db,
                s.worst.phase_rad,
                s.active_attacks.join(", ")
            );
        }
        return Ok(alarm_code(r.alarm()));
    }
    let r: DetectionReport = read_json(path)?;
    print_check(&r);
    Ok(alarm_code(r.alarm))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_CLEAN };
            return ExitCode::from(code as u8);
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
