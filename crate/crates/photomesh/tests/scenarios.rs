use photomesh::config::{parse_scenario, AttackConfig, ScenarioConfig, WeightSource};
use photomesh::export::{import_readings, write_readings};
use photomesh::inference::{accuracy, ToyDataset};
use photomesh::run::{run_scenario, write_outcome, READINGS_FILE};
use photomesh_core::attack::{AttackKind, Trigger};
use photomesh_core::{svd_map, DetectorModel, TransferMatrix, WeightMatrix};

fn haar(seed: u64) -> ScenarioConfig {
    let mut c = ScenarioConfig::minimal("haar4");
    c.mesh.size = 4;
    c.mesh.weights = WeightSource::Haar { seed: 13 };
    c.seed = seed;
    c
}

fn attack(kind: AttackKind, targets: Vec<usize>, magnitude: f64) -> AttackConfig {
    AttackConfig { kind, targets, magnitude, overrides: vec![], trigger: Trigger::Always }
}

#[test]
fn clean_haar_scenario_is_quiet() {
    let mut c = haar(1);
    c.detector = DetectorModel::noiseless();
    let out = run_scenario(&c).unwrap();
    assert!(!out.report.alarm());
    assert!(out.report.final_check.deviations.iter().all(|d| d.power_db < 1e-9 && d.phase_rad < 1e-9));
}

#[test]
fn black_hole_depresses_exported_power() {
    let mut clean = haar(1);
    clean.detector = DetectorModel::noiseless();
    let mut hit = clean.clone();
    hit.attacks.push(attack(AttackKind::BlackHole, vec![2], 0.0));

    let dir = tempfile::tempdir().unwrap();
    let a = run_scenario(&clean).unwrap();
    let b = run_scenario(&hit).unwrap();
    assert!(b.report.alarm());
    write_outcome(&a, &dir.path().join("clean")).unwrap();
    write_outcome(&b, &dir.path().join("hit")).unwrap();
    let a = import_readings(&dir.path().join("clean").join(READINGS_FILE)).unwrap();
    let b = import_readings(&dir.path().join("hit").join(READINGS_FILE)).unwrap();
    let linear = |r: &photomesh_core::Readings| r.ports.iter().map(|p| 10f64.powf(p.power_dbm / 10.0)).sum::<f64>();
    assert!(linear(&b[0]) < linear(&a[0]) - 1e-3);
    assert!(a[0].ports.iter().zip(&b[0].ports).any(|(x, y)| y.power_dbm < x.power_dbm - 1.0));
}

#[test]
fn flooding_scatters_readings_more_than_clean() {
    // same config, noisy detector, over several master seeds
    let spread = |with_attack: bool| {
        let mut samples = Vec::new();
        for seed in 0..20 {
            let mut c = haar(seed);
            c.run.steps = 1;
            if with_attack {
                c.attacks.push(attack(AttackKind::Flooding, vec![0, 1, 2, 3], 0.1));
            }
            let out = run_scenario(&c).unwrap();
            samples.extend(out.readings[0].ports.iter().map(|p| p.power_dbm));
        }
        let by_port: Vec<Vec<f64>> = (0..4).map(|p| samples.iter().skip(p).step_by(4).copied().collect()).collect();
        by_port
            .iter()
            .map(|v| {
                let m = v.iter().sum::<f64>() / v.len() as f64;
                v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
            })
            .sum::<f64>()
    };
    assert!(spread(true) > spread(false));
}

#[test]
fn identity_weights_pass_one_hot_inputs_through() {
    let acc = svd_map(&WeightMatrix::new(TransferMatrix::identity(4, 4)).unwrap()).unwrap();
    let data = ToyDataset {
        classes: 4,
        features: (0..4).map(|k| (0..4).map(|j| if j == k { 1.0 } else { 0.0 }).collect()).collect(),
        labels: (0..4).collect(),
    };
    assert_eq!(accuracy(&acc, &data).unwrap(), 1.0);
}

#[test]
fn trained_classifier_is_accurate_and_matches_dense() {
    let mut c = haar(0);
    c.mesh.weights = WeightSource::Trained;
    c.inference.noise_sigmas = vec![0.0, 0.5];
    c.inference.noise_seeds = 100;
    let r = photomesh::run_inference(&c).unwrap();
    assert!(r.clean_accuracy >= 0.9);
    assert_eq!(r.clean_accuracy, r.dense_accuracy);
    assert_eq!(r.noise_curve[0].mean_accuracy, r.clean_accuracy);
    assert!(r.noise_curve[1].mean_accuracy < r.clean_accuracy);
    assert!(r.attacked_accuracy.is_none());
}

#[test]
fn readings_export_examples() {
    let mut c = ScenarioConfig::minimal("two");
    c.detector = DetectorModel::noiseless();
    let out = run_scenario(&c).unwrap();
    let mut first = Vec::new();
    write_readings(&mut first, &out.readings).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "scenario,step,port,power_dbm,phase_rad");
    for (port, line) in lines[1..].iter().enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(&cols[..3], &["two", "0", &port.to_string()]);
        // identity weights: unit power on each port, up to rounding in the mesh
        assert!(cols[3].parse::<f64>().unwrap().abs() < 1e-12);
        assert!(cols[4].parse::<f64>().unwrap().abs() < 1e-12);
    }
    let mut second = Vec::new();
    write_readings(&mut second, &out.readings).unwrap();
    assert_eq!(first, second);
}

#[test]
fn tagged_trigger_follows_scenario_tags() {
    let text = r#"
schema_version = 1
name = "tags"
tags = ["night"]

[mesh]
size = 4
weights = { source = "haar", seed = 2 }

[detector]
power_noise_sigma_db = 0.0
phase_noise_sigma_rad = 0.0

[[attacks]]
kind = "reroute"
targets = [0]
trigger = { on_scenario_tag = "night" }
"#;
    let c = parse_scenario(text).unwrap();
    assert!(run_scenario(&c).unwrap().report.alarm());
    let mut day = c.clone();
    day.tags.clear();
    assert!(!run_scenario(&day).unwrap().report.alarm());
}

#[test]
fn shipped_scenarios_parse_and_alarm() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let c = parse_scenario(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let again = parse_scenario(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again, "{}", path.display());
        let out = run_scenario(&c).unwrap();
        assert!(out.report.alarm(), "{}", path.display());
        for step in &out.report.steps {
            assert_eq!(step.alarm, !step.active_attacks.is_empty(), "{} step {}", path.display(), step.step);
        }
        seen += 1;
    }
    assert!(seen >= 3);
}
