//! Attack specifications and their injection into a clean scenario.
//!
//! Photonic interpretations of the attack kinds:
//! - flooding: complex Gaussian noise added to the targeted input ports;
//! - black hole: targeted node absorbs everything leaving it;
//! - sinkhole: targeted node diverts a fraction of its output power to the
//!   attacker, who records the tapped amplitudes;
//! - reroute: targeted MZI flipped between cross and bar (θ → θ + π);
//! - IP hijack: targeted MZIs overwritten with attacker-chosen (θ, φ);
//! - thermal: a heat source at the targeted node positions, coupled into all
//!   nodes through the crosstalk kernel.
//!
//! An attack whose trigger does not fire leaves the scenario untouched
//! (idle Trojan).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::mzi::MziSetting;
use crate::physics::{apply_thermal_crosstalk_accelerator, CrosstalkField, HeatSource, TuningModel};
use crate::random::{complex_normal, rng_from_seed, stream_seed};
use crate::signal::{OpticalSystem, SignalVector};
use crate::svd::Accelerator;
#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AttackKind {
    Flooding,
    BlackHole,
    Sinkhole,
    Reroute,
    IpHijack,
    Thermal,
}

impl AttackKind {
    pub const ALL: [AttackKind; 6] = [
        AttackKind::Flooding,
        AttackKind::BlackHole,
        AttackKind::Sinkhole,
        AttackKind::Reroute,
        AttackKind::IpHijack,
        AttackKind::Thermal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::Flooding => "flooding",
            AttackKind::BlackHole => "black_hole",
            AttackKind::Sinkhole => "sinkhole",
            AttackKind::Reroute => "reroute",
            AttackKind::IpHijack => "ip_hijack",
            AttackKind::Thermal => "thermal",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::Invalid(format!("unknown attack kind `{name}`")))
    }

    /// Flooding targets input ports; every other kind targets mesh nodes.
    pub fn targets_ports(self) -> bool {
        matches!(self, AttackKind::Flooding)
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// When a dormant attack wakes up.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Trigger {
    #[default]
    Always,
    AfterStep(u64),
    OnScenarioTag(String),
}

pub fn trigger_fires(trigger: &Trigger, step: u64, tags: &[String]) -> bool {
    match trigger {
        Trigger::Always => true,
        Trigger::AfterStep(k) => step >= *k,
        Trigger::OnScenarioTag(tag) => tags.iter().any(|t| t == tag),
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttackSpec {
    pub kind: AttackKind,
    /// Input ports for flooding, node ids otherwise.
    pub targets: Vec<usize>,
    /// Noise sigma (flooding), tap ratio (sinkhole) or ΔT in K (thermal).
    /// Ignored by black hole, reroute and IP hijack.
    pub magnitude: f64,
    /// Attacker phases for IP hijack, one per target.
    pub overrides: Vec<MziSetting>,
    pub trigger: Trigger,
}

impl AttackSpec {
    pub fn new(kind: AttackKind, targets: Vec<usize>, magnitude: f64) -> Self {
        Self { kind, targets, magnitude, overrides: Vec::new(), trigger: Trigger::Always }
    }

    pub fn with_trigger(mut self, trigger: Trigger) -> Self {
        self.trigger = trigger;
        self
    }

    pub fn with_overrides(mut self, overrides: Vec<MziSetting>) -> Self {
        self.overrides = overrides;
        self
    }

    /// Range checks that do not depend on the scenario.
    pub fn validate(&self) -> Result<()> {
        let m = self.magnitude;
        if self.targets.is_empty() {
            return Err(Error::Invalid(format!("{} attack needs at least one target", self.kind)));
        }
        match self.kind {
            AttackKind::Flooding if !(m >= 0.0 && m.is_finite()) => {
                Err(Error::Invalid(format!("flooding magnitude must be a finite sigma >= 0, got {m}")))
            }
            AttackKind::Sinkhole if !(m > 0.0 && m <= 1.0) => {
                Err(Error::Invalid(format!("sinkhole magnitude out of (0,1]: {m}")))
            }
            AttackKind::Thermal if !(m >= 0.0 && m.is_finite()) => {
                Err(Error::Invalid(format!("thermal magnitude must be a finite delta_t >= 0 K, got {m}")))
            }
            AttackKind::IpHijack if self.overrides.len() != self.targets.len() => Err(Error::Invalid(format!(
                "ip_hijack needs one override per target ({} targets, {} overrides)",
                self.targets.len(),
                self.overrides.len()
            ))),
            _ => Ok(()),
        }
    }
}

/// Clean system plus the environment needed to perturb it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub accelerator: Accelerator,
    pub tuning: TuningModel,
    pub pitch_um: f64,
    pub coupling_length_um: f64,
    pub tags: Vec<String>,
}

impl Scenario {
    pub fn new(id: &str, accelerator: Accelerator) -> Self {
        Self {
            id: String::from(id),
            accelerator,
            tuning: TuningModel::default(),
            pitch_um: crate::physics::DEFAULT_PITCH_UM,
            coupling_length_um: crate::physics::DEFAULT_COUPLING_LENGTH_UM,
            tags: Vec::new(),
        }
    }

    pub fn crosstalk_field(&self) -> CrosstalkField {
        CrosstalkField {
            node_positions: self.accelerator.node_positions(self.pitch_um),
            coupling_length_um: self.coupling_length_um,
            heat_sources: Vec::new(),
        }
    }
}

impl OpticalSystem for Scenario {
    fn port_count(&self) -> usize {
        self.accelerator.port_count()
    }

    fn propagate(&self, input: &SignalVector, replay: u64) -> Result<SignalVector> {
        self.accelerator.propagate(input, replay)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputNoise {
    pub port: usize,
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeEffect {
    /// Both outputs of the node scaled by `transmission` (0 = black hole).
    Absorb { node: usize, transmission: f64 },
    /// Fraction `ratio` of the node's output power diverted to the attacker.
    Tap { node: usize, ratio: f64 },
}

impl NodeEffect {
    pub fn node(&self) -> usize {
        match *self {
            NodeEffect::Absorb { node, .. } | NodeEffect::Tap { node, .. } => node,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TappedSignal {
    pub node: usize,
    pub port: usize,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub output: SignalVector,
    /// Amplitudes recorded by sinkhole nodes, in propagation order.
    pub tapped: Vec<TappedSignal>,
}

/// A scenario after attack injection.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedScenario {
    pub accelerator: Accelerator,
    pub input_noise: Vec<InputNoise>,
    pub node_effects: Vec<NodeEffect>,
    /// Kinds that actually fired, in application order.
    pub active: Vec<AttackKind>,
}

impl PerturbedScenario {
    pub fn clean(scenario: &Scenario) -> Self {
        Self {
            accelerator: scenario.accelerator.clone(),
            input_noise: Vec::new(),
            node_effects: Vec::new(),
            active: Vec::new(),
        }
    }

    pub fn lossy_nodes(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.node_effects.iter().filter_map(|e| match *e {
            NodeEffect::Absorb { node, transmission } => Some((node, transmission)),
            NodeEffect::Tap { .. } => None,
        })
    }

    /// Applies `attack` on top of whatever is already injected.
    pub fn apply(&mut self, scenario: &Scenario, attack: &AttackSpec, step: u64, rng_seed: u64) -> Result<()> {
        attack.validate()?;
        let limit =
            if attack.kind.targets_ports() { self.accelerator.port_count() } else { self.accelerator.node_count() };
        if let Some(&bad) = attack.targets.iter().find(|&&t| t >= limit) {
            let what = if attack.kind.targets_ports() { "port" } else { "node" };
            return Err(Error::Invalid(format!(
                "{} attack targets {what} {bad}, but the scenario has {limit}",
                attack.kind
            )));
        }
        if !trigger_fires(&attack.trigger, step, &scenario.tags) {
            return Ok(());
        }

        match attack.kind {
            AttackKind::Flooding => {
                for (i, &port) in attack.targets.iter().enumerate() {
                    self.input_noise.push(InputNoise {
                        port,
                        sigma: attack.magnitude,
                        seed: stream_seed(rng_seed, &[i as u64]),
                    });
                }
            }
            AttackKind::BlackHole => {
                for &node in &attack.targets {
                    self.node_effects.push(NodeEffect::Absorb { node, transmission: 0.0 });
                }
            }
            AttackKind::Sinkhole => {
                for &node in &attack.targets {
                    self.node_effects.push(NodeEffect::Tap { node, ratio: attack.magnitude });
                }
            }
            AttackKind::Reroute => {
                for &node in &attack.targets {
                    self.edit_node(node, |s| s.offset(PI, 0.0))?;
                }
            }
            AttackKind::IpHijack => {
                for (&node, &setting) in attack.targets.iter().zip(&attack.overrides) {
                    self.edit_node(node, |_| Ok(setting))?;
                }
            }
            AttackKind::Thermal => {
                let mut field = scenario.crosstalk_field();
                field.node_positions = self.accelerator.node_positions(scenario.pitch_um);
                for &node in &attack.targets {
                    let position = field.node_positions[node];
                    field.heat_sources.push(HeatSource { position, delta_t: attack.magnitude });
                }
                self.accelerator = apply_thermal_crosstalk_accelerator(&self.accelerator, &field, &scenario.tuning)?;
            }
        }
        self.active.push(attack.kind);
        Ok(())
    }

    fn edit_node<F>(&mut self, node: usize, f: F) -> Result<()>
    where
        F: FnOnce(MziSetting) -> Result<MziSetting>,
    {
        let (second, idx) =
            self.accelerator.locate_node(node).ok_or_else(|| Error::Invalid(format!("node {node} does not exist")))?;
        let mesh = if second { &mut self.accelerator.output_mesh } else { &mut self.accelerator.input_mesh };
        let mut settings: Vec<MziSetting> = mesh.placements().iter().map(|p| p.setting).collect();
        settings[idx] = f(settings[idx])?;
        *mesh = mesh.with_settings(&settings)?;
        Ok(())
    }

    /// Forward pass recording anything the attacker taps.
    pub fn trace(&self, input: &SignalVector, replay: u64) -> Result<Trace> {
        input.expect_len(self.accelerator.port_count())?;
        let mut noisy = input.clone();
        for noise in &self.input_noise {
            let mut rng = rng_from_seed(stream_seed(noise.seed, &[replay]));
            let z = complex_normal(&mut rng);
            noisy[noise.port] += z * noise.sigma;
        }
        let mut tapped = Vec::new();
        let effects = &self.node_effects;
        let ports: Vec<usize> = self
            .accelerator
            .input_mesh
            .placements()
            .iter()
            .chain(self.accelerator.output_mesh.placements())
            .map(|p| p.port)
            .collect();
        let output = self.accelerator.forward_with(&noisy, |node, top, bottom| {
            for effect in effects.iter().filter(|e| e.node() == node) {
                match *effect {
                    NodeEffect::Absorb { transmission, .. } => {
                        *top *= transmission;
                        *bottom *= transmission;
                    }
                    NodeEffect::Tap { ratio, .. } => {
                        let keep = (1.0 - ratio).sqrt();
                        let take = ratio.sqrt();
                        tapped.push(TappedSignal { node, port: ports[node], amplitude: *top * take });
                        tapped.push(TappedSignal { node, port: ports[node] + 1, amplitude: *bottom * take });
                        *top *= keep;
                        *bottom *= keep;
                    }
                }
            }
        })?;
        Ok(Trace { output, tapped })
    }
}

impl OpticalSystem for PerturbedScenario {
    fn port_count(&self) -> usize {
        self.accelerator.port_count()
    }

    fn propagate(&self, input: &SignalVector, replay: u64) -> Result<SignalVector> {
        self.trace(input, replay).map(|t| t.output)
    }
}

/// Injects one attack into a clean scenario at `step`.
pub fn inject(clean: &Scenario, attack: &AttackSpec, step: u64, rng_seed: u64) -> Result<PerturbedScenario> {
    let mut out = PerturbedScenario::clean(clean);
    out.apply(clean, attack, step, rng_seed)?;
    Ok(out)
}

/// Injects several attacks in declaration order. Attack `i` gets its own
/// seed stream derived from `rng_seed`.
pub fn inject_all(clean: &Scenario, attacks: &[AttackSpec], step: u64, rng_seed: u64) -> Result<PerturbedScenario> {
    let mut out = PerturbedScenario::clean(clean);
    for (i, attack) in attacks.iter().enumerate() {
        out.apply(clean, attack, step, stream_seed(rng_seed, &[i as u64]))?;
    }
    Ok(out)
}
