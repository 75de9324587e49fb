//! Scenario configuration: one TOML file fully determines a run.
//!
//! ```toml
//! schema_version = 1
//! name = "haar4"
//! seed = 42
//!
//! [mesh]
//! size = 4
//! weights = { source = "haar", seed = 7 }
//!
//! [[attacks]]
//! kind = "black_hole"
//! targets = [2]
//! trigger = { after_step = 3 }
//! ```
//!
//! Every section other than `[mesh]` is optional. Unknown keys are rejected.

use std::path::PathBuf;

use photomesh_core::attack::{AttackKind, AttackSpec, Scenario, Trigger};
use photomesh_core::ids::{ProbeSet, ThresholdConfig};
use photomesh_core::physics::TuningModel;
use photomesh_core::random::{haar_unitary, rng_from_seed, stream_seed};
use photomesh_core::Complex64;
use photomesh_core::{svd_map, DetectorModel, MziSetting, SignalVector, TransferMatrix, WeightMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::inference::{train_centroid_classifier, ToyDataset};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest mesh the harness accepts.
pub const MAX_PORTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    /// Master seed; every randomized step derives its own stream from it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tags: Vec<String>,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub detector: DetectorModel,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub ids: IdsConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub inference: InferenceConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub attacks: Vec<AttackConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub size: usize,
    pub weights: WeightSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSource {
    Identity,
    Haar {
        seed: u64,
    },
    /// Row-major real and (optional) imaginary parts.
    Explicit {
        re: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        im: Vec<Vec<f64>>,
    },
    /// Centroid classifier trained on the `[dataset]` blobs.
    Trained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    pub phase_per_kelvin: f64,
    pub nominal_temperature_k: f64,
    pub pitch_um: f64,
    pub coupling_length_um: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        let t = TuningModel::default();
        Self {
            phase_per_kelvin: t.phase_per_kelvin,
            nominal_temperature_k: t.nominal_temperature_k,
            pitch_um: photomesh_core::physics::DEFAULT_PITCH_UM,
            coupling_length_um: photomesh_core::physics::DEFAULT_COUPLING_LENGTH_UM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeChoice {
    /// Basis vectors plus the all-ones vector.
    Standard,
    /// Real amplitude vectors, one per probe.
    Custom(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdsConfig {
    pub power_threshold_db: f64,
    pub phase_threshold_rad: f64,
    pub baseline_repeats: u32,
    pub probes: ProbeChoice,
}

impl Default for IdsConfig {
    fn default() -> Self {
        let t = ThresholdConfig::default();
        Self {
            power_threshold_db: t.power_threshold_db,
            phase_threshold_rad: t.phase_threshold_rad,
            baseline_repeats: 1,
            probes: ProbeChoice::Standard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub steps: u64,
    /// Operating input amplitudes recorded in the readings file; all ones
    /// when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { steps: 1, input: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub samples_per_class: usize,
    /// Standard deviation of every blob, in feature units.
    pub spread: f64,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self { samples_per_class: 100, spread: 0.2, seed: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceConfig {
    /// Phase-noise levels (rad) for the degradation curve.
    pub noise_sigmas: Vec<f64>,
    /// Independent noise realisations per level.
    pub noise_seeds: u64,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self { noise_sigmas: vec![0.0, 0.1, 0.2, 0.3, 0.5], noise_seeds: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    pub kind: AttackKind,
    pub targets: Vec<usize>,
    #[serde(default)]
    pub magnitude: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<MziSetting>,
    #[serde(default)]
    pub trigger: Trigger,
}

impl AttackConfig {
    pub fn to_spec(&self) -> AttackSpec {
        AttackSpec {
            kind: self.kind,
            targets: self.targets.clone(),
            magnitude: self.magnitude,
            overrides: self.overrides.clone(),
            trigger: self.trigger.clone(),
        }
    }
}

/// Parses and validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| HarnessError::ConfigParse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

impl ScenarioConfig {
    /// Two-port identity scenario with every other setting at its default.
    pub fn minimal(name: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: name.to_owned(),
            seed: 0,
            tags: Vec::new(),
            mesh: MeshConfig { size: 2, weights: WeightSource::Identity },
            detector: DetectorModel::default(),
            physics: PhysicsConfig::default(),
            ids: IdsConfig::default(),
            run: RunConfig::default(),
            dataset: DatasetConfig::default(),
            inference: InferenceConfig::default(),
            output: OutputConfig::default(),
            attacks: Vec::new(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::ConfigParse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::invalid(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.name.is_empty() {
            return Err(HarnessError::invalid("name", "must not be empty"));
        }
        let n = self.mesh.size;
        if !(2..=MAX_PORTS).contains(&n) {
            return Err(HarnessError::invalid("mesh.size", format!("must be in 2..={MAX_PORTS}, got {n}")));
        }
        if let WeightSource::Explicit { re, im } = &self.mesh.weights {
            check_square("mesh.weights.re", re, n)?;
            if !im.is_empty() {
                check_square("mesh.weights.im", im, n)?;
            }
        }
        self.detector.validate().map_err(|e| HarnessError::invalid("detector", e.to_string()))?;
        self.tuning().validate().map_err(|e| HarnessError::invalid("physics", e.to_string()))?;
        for (field, v) in [
            ("physics.pitch_um", self.physics.pitch_um),
            ("physics.coupling_length_um", self.physics.coupling_length_um),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(HarnessError::invalid(field, format!("must be positive, got {v}")));
            }
        }
        self.thresholds().validate().map_err(|e| HarnessError::invalid("ids", e.to_string()))?;
        if self.ids.baseline_repeats == 0 {
            return Err(HarnessError::invalid("ids.baseline_repeats", "must be at least 1"));
        }
        if let ProbeChoice::Custom(probes) = &self.ids.probes {
            if probes.is_empty() {
                return Err(HarnessError::invalid("ids.probes", "custom probe list is empty"));
            }
            for (i, p) in probes.iter().enumerate() {
                if p.len() != n || p.iter().any(|x| !x.is_finite()) {
                    return Err(HarnessError::invalid(
                        format!("ids.probes[{i}]"),
                        format!("needs {n} finite amplitudes"),
                    ));
                }
            }
        }
        if self.run.steps == 0 {
            return Err(HarnessError::invalid("run.steps", "must be at least 1"));
        }
        if let Some(input) = &self.run.input {
            if input.len() != n || input.iter().any(|x| !x.is_finite()) {
                return Err(HarnessError::invalid("run.input", format!("needs {n} finite amplitudes")));
            }
        }
        if self.dataset.samples_per_class == 0 {
            return Err(HarnessError::invalid("dataset.samples_per_class", "must be at least 1"));
        }
        if !(self.dataset.spread >= 0.0 && self.dataset.spread.is_finite()) {
            return Err(HarnessError::invalid("dataset.spread", "must be finite and >= 0"));
        }
        if let Some(s) = self.inference.noise_sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(HarnessError::invalid(
                "inference.noise_sigmas",
                format!("sigma {s} is not a finite value >= 0"),
            ));
        }
        if self.inference.noise_seeds == 0 {
            return Err(HarnessError::invalid("inference.noise_seeds", "must be at least 1"));
        }
        let nodes = n * (n - 1);
        for (i, a) in self.attacks.iter().enumerate() {
            let field = format!("attacks[{i}]");
            a.to_spec().validate().map_err(|e| HarnessError::invalid(&field, e.to_string()))?;
            let (limit, what) = if a.kind.targets_ports() { (n, "port") } else { (nodes, "node") };
            if let Some(t) = a.targets.iter().find(|&&t| t >= limit) {
                return Err(HarnessError::invalid(
                    format!("{field}.targets"),
                    format!("{what} {t} out of range (scenario has {limit})"),
                ));
            }
        }
        Ok(())
    }

    pub fn tuning(&self) -> TuningModel {
        TuningModel {
            phase_per_kelvin: self.physics.phase_per_kelvin,
            nominal_temperature_k: self.physics.nominal_temperature_k,
        }
    }

    pub fn thresholds(&self) -> ThresholdConfig {
        ThresholdConfig {
            power_threshold_db: self.ids.power_threshold_db,
            phase_threshold_rad: self.ids.phase_threshold_rad,
        }
    }

    pub fn probe_set(&self) -> ProbeSet {
        match &self.ids.probes {
            ProbeChoice::Standard => ProbeSet::standard(&self.name, self.mesh.size),
            ProbeChoice::Custom(list) => ProbeSet {
                scenario: self.name.clone(),
                probes: list.iter().map(|p| SignalVector::from_real(p)).collect(),
            },
        }
    }

    pub fn operating_input(&self) -> SignalVector {
        match &self.run.input {
            Some(v) => SignalVector::from_real(v),
            None => SignalVector::from_real(&vec![1.0; self.mesh.size]),
        }
    }

    pub fn attack_specs(&self) -> Vec<AttackSpec> {
        self.attacks.iter().map(AttackConfig::to_spec).collect()
    }

    pub fn dataset(&self) -> ToyDataset {
        ToyDataset::gaussian_blobs(
            self.mesh.size,
            self.dataset.samples_per_class,
            self.dataset.spread,
            self.dataset.seed,
        )
    }

    pub fn weight_matrix(&self) -> Result<WeightMatrix> {
        let n = self.mesh.size;
        let core = |e| HarnessError::core(&self.name, e);
        match &self.mesh.weights {
            WeightSource::Identity => WeightMatrix::new(TransferMatrix::identity(n, n)).map_err(core),
            WeightSource::Haar { seed } => {
                // the weight seed is its own stream, independent of the master seed
                let mut rng = rng_from_seed(stream_seed(*seed, &[0x57]));
                WeightMatrix::new(haar_unitary(n, &mut rng)).map_err(core)
            }
            WeightSource::Explicit { re, im } => {
                let m = TransferMatrix::from_fn(n, n, |r, c| {
                    Complex64::new(re[r][c], if im.is_empty() { 0.0 } else { im[r][c] })
                });
                WeightMatrix::new(m).map_err(core)
            }
            WeightSource::Trained => Ok(train_centroid_classifier(&self.dataset())),
        }
    }

    /// Clean scenario: weights mapped onto the three-stage mesh.
    pub fn build_scenario(&self) -> Result<Scenario> {
        let weights = self.weight_matrix()?;
        let accelerator = svd_map(&weights).map_err(|e| HarnessError::core(&self.name, e))?;
        let mut s = Scenario::new(&self.name, accelerator);
        s.tuning = self.tuning();
        s.pitch_um = self.physics.pitch_um;
        s.coupling_length_um = self.physics.coupling_length_um;
        s.tags = self.tags.clone();
        Ok(s)
    }
}

fn check_square(field: &str, rows: &[Vec<f64>], n: usize) -> Result<()> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(HarnessError::invalid(field, format!("must be a {n}x{n} matrix")));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(HarnessError::invalid(field, "entries must be finite"));
    }
    Ok(())
}

/// Command-line overrides applied on top of a parsed config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub power_threshold_db: Option<f64>,
    pub phase_threshold_rad: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ScenarioConfig) -> Result<()> {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(dir) = &self.out_dir {
            config.output.dir = dir.clone();
        }
        if let Some(t) = self.power_threshold_db {
            config.ids.power_threshold_db = t;
        }
        if let Some(t) = self.phase_threshold_rad {
            config.ids.phase_threshold_rad = t;
        }
        config.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
name = "tiny"

[mesh]
size = 2
weights = { source = "identity" }
"#;

    #[test]
    fn minimal_config_parses() {
        let c = parse_scenario(MINIMAL).unwrap();
        assert_eq!(c, ScenarioConfig::minimal("tiny"));
        assert_eq!(c.ids.power_threshold_db, 0.5);
        assert_eq!(c.run.steps, 1);
    }

    #[test]
    fn round_trip_is_lossless() {
        let text = r#"
schema_version = 1
name = "full"
seed = 99
tags = ["night"]

[mesh]
size = 3
weights = { source = "explicit", re = [[1.0, 0.5, 0.0], [0.0, 1.0, 0.25], [0.1, 0.0, 1.0]], im = [[0.0, 0.1, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -0.3]] }

[detector]
power_noise_sigma_db = 0.05

[ids]
probes = { custom = [[1.0, 0.0, 0.0], [0.5, 0.5, 0.5]] }
baseline_repeats = 4

[run]
steps = 3
input = [1.0, 0.0, 1.0]

[[attacks]]
kind = "ip_hijack"
targets = [1]
overrides = [{ theta = 7.0, phi = -1.0 }]
trigger = { after_step = 2 }

[[attacks]]
kind = "flooding"
targets = [0, 2]
magnitude = 0.1
trigger = { on_scenario_tag = "night" }
"#;
        let first = parse_scenario(text).unwrap();
        let again = parse_scenario(&first.to_toml().unwrap()).unwrap();
        assert_eq!(first, again);
        // phases are wrapped on the way in
        assert!((first.attacks[0].overrides[0].theta() - (7.0 - std::f64::consts::TAU)).abs() < 1e-12);
    }

    #[test]
    fn sinkhole_ratio_is_range_checked() {
        let text = format!("{MINIMAL}\n[[attacks]]\nkind = \"sinkhole\"\ntargets = [0]\nmagnitude = 1.5\n");
        let err = parse_scenario(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sinkhole magnitude out of (0,1]"), "{msg}");
        assert!(msg.contains("attacks[0]"), "{msg}");
        assert_eq!(err.exit_code(), crate::error::EXIT_USAGE);
    }

    #[test]
    fn unknown_keys_report_location() {
        let text = MINIMAL.replace("size = 2", "size = 2\ncolour = \"blue\"");
        let msg = parse_scenario(&text).unwrap_err().to_string();
        assert!(msg.contains("colour"), "{msg}");
        assert!(msg.contains("line 7"), "{msg}");
    }

    #[test]
    fn unknown_attack_kind_is_rejected() {
        let text = format!("{MINIMAL}\n[[attacks]]\nkind = \"wormhole\"\ntargets = [0]\n");
        let msg = parse_scenario(&text).unwrap_err().to_string();
        assert!(msg.contains("wormhole"), "{msg}");
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let msg = parse_scenario("schema_version = 1\nname = \n").unwrap_err().to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("column"), "{msg}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let cases = [
            (MINIMAL.replace("size = 2", "size = 1"), "mesh.size"),
            (MINIMAL.replace("schema_version = 1", "schema_version = 2"), "schema_version"),
            (format!("{MINIMAL}\n[ids]\npower_threshold_db = 0.0\n"), "ids"),
            (format!("{MINIMAL}\n[run]\ninput = [1.0]\n"), "run.input"),
            (format!("{MINIMAL}\n[[attacks]]\nkind = \"black_hole\"\ntargets = [2]\n"), "attacks[0].targets"),
            (
                format!("{MINIMAL}\n[[attacks]]\nkind = \"flooding\"\ntargets = [2]\nmagnitude = 0.1\n"),
                "attacks[0].targets",
            ),
            (format!("{MINIMAL}\n[detector]\npower_noise_sigma_db = -1.0\n"), "detector"),
        ];
        for (text, field) in cases {
            match parse_scenario(&text) {
                Err(HarnessError::ConfigInvalid { field: f, .. }) => assert_eq!(f, field),
                other => panic!("{field}: {other:?}"),
            }
        }
    }

    #[test]
    fn overrides_take_precedence() {
        let mut c = parse_scenario(MINIMAL).unwrap();
        Overrides { seed: Some(5), power_threshold_db: Some(0.25), ..Overrides::default() }.apply(&mut c).unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.thresholds().power_threshold_db, 0.25);
        let bad = Overrides { phase_threshold_rad: Some(-1.0), ..Overrides::default() };
        assert!(bad.apply(&mut c).is_err());
    }

    #[test]
    fn builds_each_weight_source() {
        for weights in [
            "{ source = \"identity\" }",
            "{ source = \"haar\", seed = 1 }",
            "{ source = \"trained\" }",
            "{ source = \"explicit\", re = [[2.0, 0.0], [0.0, 1.0]] }",
        ] {
            let text = MINIMAL.replace("{ source = \"identity\" }", weights);
            let c = parse_scenario(&text).unwrap();
            let s = c.build_scenario().unwrap();
            assert_eq!(s.accelerator.port_count(), 2);
        }
    }
}
