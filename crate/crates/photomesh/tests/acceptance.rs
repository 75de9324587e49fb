//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::FRAC_PI_2;
use std::process::ExitCode;
use std::time::Instant;

use photomesh::config::{AttackConfig, ScenarioConfig, WeightSource};
use photomesh::export::{export_readings, write_readings};
use photomesh::inference::run_inference;
use photomesh::run::{run_scenario, write_outcome};
use photomesh_core::attack::{AttackKind, AttackSpec, Scenario, Trigger};
use photomesh_core::ids::{
    calibrate_thresholds, capture_baseline, check, evaluate, EvalSetup, ProbeSet, ThresholdConfig,
};
use photomesh_core::random::{ginibre, haar_unitary, random_program, random_signal, rng_from_seed, stream_seed};
use photomesh_core::signal::frobenius_distance;
use photomesh_core::{clements_decompose, inject, svd_map, Complex64, DetectorModel, MziSetting, WeightMatrix};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn haar_scenario(seed: u64) -> Scenario {
    let w = WeightMatrix::new(haar_unitary(4, &mut rng_from_seed(seed))).unwrap();
    Scenario::new("haar4", svd_map(&w).unwrap())
}

fn unitary_round_trip() -> Outcome {
    let start = Instant::now();
    let sizes = [2, 4, 6, 8, 10];
    let mut worst: f64 = 0.0;
    for i in 0..200u64 {
        let n = sizes[i as usize % sizes.len()];
        let u = haar_unitary(n, &mut rng_from_seed(stream_seed(1, &[i])));
        let program = clements_decompose(&u).map_err(|e| e.to_string())?;
        worst = worst.max(frobenius_distance(&program.recompose(), &u));
    }
    let secs = start.elapsed().as_secs_f64();
    let msg = format!("max Frobenius error {worst:.2e} over 200 unitaries in {secs:.2} s");
    if worst < 1e-9 && secs < 10.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn svd_end_to_end() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let mut rng = rng_from_seed(stream_seed(2, &[i]));
        let w = WeightMatrix::new(ginibre(4, &mut rng)).map_err(|e| e.to_string())?;
        let acc = svd_map(&w).map_err(|e| e.to_string())?;
        let dense = w.normalized();
        for _ in 0..20 {
            let x = random_signal(4, &mut rng);
            let y = acc.forward(&x).map_err(|e| e.to_string())?;
            for r in 0..4 {
                let want: Complex64 = (0..4).map(|c| dense[(r, c)] * x[c]).sum();
                worst = worst.max((y[r] - want).norm());
            }
        }
    }
    let msg = format!("max |mesh - dense| {worst:.2e} over 100 matrices x 20 inputs");
    if worst < 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn power_conservation() -> Outcome {
    let mut worst: f64 = 0.0;
    let cases = 2000u64;
    for i in 0..cases {
        let mut rng = rng_from_seed(stream_seed(3, &[i]));
        let n = rng.random_range(1..=12);
        // half random programs, half decomposed Haar unitaries
        let program = if i % 2 == 0 {
            random_program(n, &mut rng)
        } else {
            clements_decompose(&haar_unitary(n, &mut rng)).map_err(|e| e.to_string())?
        };
        let x = random_signal(n, &mut rng);
        let y = program.forward(&x).map_err(|e| e.to_string())?;
        worst = worst.max((y.power() - x.power()).abs());
    }
    let msg = format!("max power drift {worst:.2e} over {cases} programs");
    if worst < 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ids_soundness() -> Outcome {
    let s = haar_scenario(21);
    let quiet = DetectorModel::noiseless();
    let baseline = capture_baseline(&s, &ProbeSet::standard("haar4", 4), &quiet, 1, 5).map_err(|e| e.to_string())?;
    let mut alarms = 0;
    for t in 0..1000u64 {
        let r = check(&s, &baseline, &ThresholdConfig::default(), &quiet, stream_seed(6, &[t]))
            .map_err(|e| e.to_string())?;
        alarms += usize::from(r.alarm);
    }
    let msg = format!("{alarms} alarms over 1000 clean replays");
    if alarms == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ids_completeness() -> Outcome {
    let s = haar_scenario(13);
    let node = 2;
    let orig = s.accelerator.input_mesh.placements()[node].setting;
    let hijack = MziSetting::new(orig.theta() + FRAC_PI_2, orig.phi()).map_err(|e| e.to_string())?;
    let suite = [
        AttackSpec::new(AttackKind::Flooding, vec![0], 0.1),
        AttackSpec::new(AttackKind::BlackHole, vec![node], 0.0),
        AttackSpec::new(AttackKind::Sinkhole, vec![node], 0.1),
        AttackSpec::new(AttackKind::Reroute, vec![node], 0.0),
        AttackSpec::new(AttackKind::IpHijack, vec![node], 0.0).with_overrides(vec![hijack]),
        AttackSpec::new(AttackKind::Thermal, vec![node], 25.0),
    ];
    let quiet = DetectorModel::noiseless();
    let baseline = capture_baseline(&s, &ProbeSet::standard("haar4", 4), &quiet, 1, 7).map_err(|e| e.to_string())?;
    let mut missed = Vec::new();
    for (i, spec) in suite.iter().enumerate() {
        let p = inject(&s, spec, 0, stream_seed(8, &[i as u64])).map_err(|e| e.to_string())?;
        let r = check(&p, &baseline, &ThresholdConfig::default(), &quiet, 9).map_err(|e| e.to_string())?;
        if !r.alarm {
            missed.push(spec.kind.name());
        }
    }
    let msg = format!("detected {}/6 (missed: {:?})", 6 - missed.len(), missed);
    if missed.is_empty() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn accuracy_degradation() -> Outcome {
    let start = Instant::now();
    let mut c = ScenarioConfig::minimal("toy");
    c.mesh.size = 4;
    c.mesh.weights = WeightSource::Trained;
    c.seed = 17;
    let report = run_inference(&c).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let means: Vec<f64> = report.noise_curve.iter().map(|p| p.mean_accuracy).collect();
    let monotone = means.windows(2).all(|w| w[1] <= w[0]);
    let drop = report.clean_accuracy - means.last().copied().unwrap_or(f64::NAN);
    let msg = format!(
        "clean {:.4}, means over sigma {:?}: {:?}, drop {:.1} pp, {secs:.2} s",
        report.clean_accuracy,
        c.inference.noise_sigmas,
        means.iter().map(|m| (m * 1e4).round() / 1e4).collect::<Vec<_>>(),
        drop * 100.0
    );
    if monotone && drop >= 0.10 && report.noise_seeds >= 100 && secs < 60.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn determinism() -> Outcome {
    let mut c = ScenarioConfig::minimal("det");
    c.mesh.size = 4;
    c.mesh.weights = WeightSource::Haar { seed: 3 };
    c.seed = 99;
    c.run.steps = 6;
    c.ids.baseline_repeats = 3;
    c.attacks = vec![
        AttackConfig {
            kind: AttackKind::Flooding,
            targets: vec![1],
            magnitude: 0.1,
            overrides: vec![],
            trigger: Trigger::AfterStep(2),
        },
        AttackConfig {
            kind: AttackKind::Thermal,
            targets: vec![4],
            magnitude: 25.0,
            overrides: vec![],
            trigger: Trigger::AfterStep(4),
        },
    ];
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    let mut bytes = Vec::new();
    for d in &dirs {
        let out = run_scenario(&c).map_err(|e| e.to_string())?;
        write_outcome(&out, d.path()).map_err(|e| e.to_string())?;
        export_readings(&d.path().join("again.csv"), &out.readings).map_err(|e| e.to_string())?;
        let mut mem = Vec::new();
        write_readings(&mut mem, &out.readings).map_err(|e| e.to_string())?;
        bytes.push(mem);
    }
    let mut files = 0;
    for name in ["readings.csv", "deviations.csv", "report.json", "baseline.json", "again.csv"] {
        let a = std::fs::read(dirs[0].path().join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dirs[1].path().join(name)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{name} differs between runs"));
        }
        files += 1;
    }
    if bytes[0] != bytes[1] {
        return Err("in-memory CSV differs between runs".into());
    }
    Ok(format!("{files} output files byte-identical across two runs"))
}

fn calibration_contract() -> Outcome {
    let s = haar_scenario(31);
    let detector = DetectorModel { power_noise_sigma_db: 0.1, ..DetectorModel::default() };
    let probes = ProbeSet::standard("haar4", 4);
    let repeats = 1;
    let t = calibrate_thresholds(&s, &detector, &probes, 0.01, 10_000, repeats, 41).map_err(|e| e.to_string())?;
    let setup = EvalSetup { probes, detector, thresholds: t, baseline_repeats: repeats };
    let m = evaluate(&s, &[], &setup, 10_000, 42).map_err(|e| e.to_string())?;
    let msg = format!(
        "thresholds {:.4} dB / {:.4} rad, fresh FPR {:.4} over 10000 trials",
        t.power_threshold_db, t.phase_threshold_rad, m.false_positive_rate
    );
    if m.false_positive_rate <= 0.02 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("unitary round trip", unitary_round_trip),
        ("svd end-to-end", svd_end_to_end),
        ("power conservation", power_conservation),
        ("ids soundness", ids_soundness),
        ("ids completeness", ids_completeness),
        ("accuracy degradation", accuracy_degradation),
        ("determinism", determinism),
        ("calibration contract", calibration_contract),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
