//! Thermo-optic tuning, thermal crosstalk between nodes, and random phase
//! noise on programmed meshes.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::mesh::MeshProgram;
use crate::mzi::MziSetting;
use crate::svd::Accelerator;
#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result};

/// Linear thermo-optic phase response of a heater-tuned phase shifter.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TuningModel {
    pub phase_per_kelvin: f64,
    pub nominal_temperature_k: f64,
}

impl Default for TuningModel {
    fn default() -> Self {
        Self { phase_per_kelvin: 0.02, nominal_temperature_k: 298.15 }
    }
}

impl TuningModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.phase_per_kelvin > 0.0 && self.phase_per_kelvin.is_finite()) {
            return Err(Error::Domain { what: "phase_per_kelvin", value: self.phase_per_kelvin });
        }
        if !self.nominal_temperature_k.is_finite() {
            return Err(Error::Domain { what: "nominal temperature", value: self.nominal_temperature_k });
        }
        Ok(())
    }
}

pub fn thermal_phase_offset(model: &TuningModel, delta_t: f64) -> f64 {
    model.phase_per_kelvin * delta_t
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HeatSource {
    pub position: [f64; 2],
    pub delta_t: f64,
}

/// Node geometry (µm) and heat sources for the exponential crosstalk kernel
/// `ΔT · exp(−d / coupling_length)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrosstalkField {
    pub node_positions: Vec<[f64; 2]>,
    pub coupling_length_um: f64,
    pub heat_sources: Vec<HeatSource>,
}

/// Default grid pitch between neighbouring MZIs, µm.
pub const DEFAULT_PITCH_UM: f64 = 50.0;
/// Default crosstalk decay length, µm.
pub const DEFAULT_COUPLING_LENGTH_UM: f64 = 100.0;

impl CrosstalkField {
    /// Uniform grid layout for a single mesh: x = layer · pitch,
    /// y = (port + ½) · pitch.
    pub fn grid(program: &MeshProgram, pitch_um: f64, coupling_length_um: f64) -> Self {
        let node_positions = program
            .placements()
            .iter()
            .map(|p| [p.layer as f64 * pitch_um, (p.port as f64 + 0.5) * pitch_um])
            .collect();
        Self { node_positions, coupling_length_um, heat_sources: Vec::new() }
    }

    pub fn with_source(mut self, position: [f64; 2], delta_t: f64) -> Self {
        self.heat_sources.push(HeatSource { position, delta_t });
        self
    }

    /// Temperature rise seen at every node.
    pub fn temperature_rise(&self) -> Result<Vec<f64>> {
        if !(self.coupling_length_um > 0.0 && self.coupling_length_um.is_finite()) {
            return Err(Error::Domain { what: "coupling length", value: self.coupling_length_um });
        }
        if let Some(s) = self.heat_sources.iter().find(|s| !s.delta_t.is_finite()) {
            return Err(Error::Domain { what: "heat source delta_t", value: s.delta_t });
        }
        Ok(self
            .node_positions
            .iter()
            .map(|node| {
                self.heat_sources
                    .iter()
                    .map(|s| {
                        let dx = node[0] - s.position[0];
                        let dy = node[1] - s.position[1];
                        s.delta_t * (-(dx * dx + dy * dy).sqrt() / self.coupling_length_um).exp()
                    })
                    .sum()
            })
            .collect())
    }
}

/// Offsets both θ and φ of every placement by the thermally induced phase.
pub fn apply_thermal_crosstalk(
    program: &MeshProgram,
    field: &CrosstalkField,
    tuning: &TuningModel,
) -> Result<MeshProgram> {
    let n = program.placements().len();
    if field.node_positions.len() != n {
        return Err(Error::DimensionMismatch {
            what: "node positions",
            expected: n,
            found: field.node_positions.len(),
        });
    }
    tuning.validate()?;
    let offsets: Vec<f64> = field.temperature_rise()?.into_iter().map(|dt| thermal_phase_offset(tuning, dt)).collect();
    offset_settings(program, &offsets, &offsets)
}

/// Same as [`apply_thermal_crosstalk`] over both meshes of an accelerator,
/// with `field.node_positions` indexed by global node id.
pub fn apply_thermal_crosstalk_accelerator(
    acc: &Accelerator,
    field: &CrosstalkField,
    tuning: &TuningModel,
) -> Result<Accelerator> {
    let n = acc.node_count();
    if field.node_positions.len() != n {
        return Err(Error::DimensionMismatch {
            what: "node positions",
            expected: n,
            found: field.node_positions.len(),
        });
    }
    tuning.validate()?;
    let offsets: Vec<f64> = field.temperature_rise()?.into_iter().map(|dt| thermal_phase_offset(tuning, dt)).collect();
    let split = acc.input_mesh.placements().len();
    let mut out = acc.clone();
    out.input_mesh = offset_settings(&acc.input_mesh, &offsets[..split], &offsets[..split])?;
    out.output_mesh = offset_settings(&acc.output_mesh, &offsets[split..], &offsets[split..])?;
    Ok(out)
}

fn offset_settings(program: &MeshProgram, d_theta: &[f64], d_phi: &[f64]) -> Result<MeshProgram> {
    let settings = program
        .placements()
        .iter()
        .zip(d_theta.iter().zip(d_phi))
        .map(|(p, (&dt, &dp))| p.setting.offset(dt, dp))
        .collect::<Result<Vec<MziSetting>>>()?;
    program.with_settings(&settings)
}

/// Adds i.i.d. `N(0, σ²)` to every θ, φ and output phase.
///
/// Draws happen in a fixed order (per placement θ then φ, then the screen)
/// from unit normals scaled by σ, so the same RNG state gives perturbations
/// that grow linearly with σ.
pub fn apply_phase_noise<R: Rng + ?Sized>(program: &MeshProgram, sigma: f64, rng: &mut R) -> Result<MeshProgram> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Domain { what: "phase noise sigma", value: sigma });
    }
    let mut draw = || -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        sigma * z
    };
    let settings = program
        .placements()
        .iter()
        .map(|p| {
            let (dt, dp) = (draw(), draw());
            p.setting.offset(dt, dp)
        })
        .collect::<Result<Vec<_>>>()?;
    let phases = program.output_phases().iter().map(|&x| x + draw()).collect();
    program.with_settings(&settings)?.with_output_phases(phases)
}

pub fn apply_phase_noise_accelerator<R: Rng + ?Sized>(
    acc: &Accelerator,
    sigma: f64,
    rng: &mut R,
) -> Result<Accelerator> {
    let mut out = acc.clone();
    out.input_mesh = apply_phase_noise(&acc.input_mesh, sigma, rng)?;
    out.output_mesh = apply_phase_noise(&acc.output_mesh, sigma, rng)?;
    Ok(out)
}
