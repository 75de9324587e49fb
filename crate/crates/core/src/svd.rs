//! Weight mapping: `W / scale = U · Σ · V^H` realised as a V^H mesh, a stage
//! of ideal amplitude attenuators, and a U mesh.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::clements::clements_decompose;
use crate::mesh::MeshProgram;
use crate::signal::{OpticalSystem, SignalVector, TransferMatrix};
use crate::{Error, Result};

/// Square complex weight matrix plus the normalisation it will be run at.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    entries: TransferMatrix,
    scale: f64,
}

impl WeightMatrix {
    /// Computes `scale = max(1, σ_max)` so that `entries / scale` is
    /// passive.
    pub fn new(entries: TransferMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                what: "weight matrix columns",
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        if entries.nrows() == 0 {
            return Err(Error::Domain { what: "port count", value: 0.0 });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numeric("weight matrix has non-finite entries"));
        }
        let sigma_max = entries
            .clone()
            .try_svd(false, false, f64::EPSILON, 0)
            .ok_or(Error::Numeric("SVD did not converge"))?
            .singular_values
            .max();
        Ok(Self { entries, scale: sigma_max.max(1.0) })
    }

    pub fn from_real(n: usize, row_major: &[f64]) -> Result<Self> {
        if row_major.len() != n * n {
            return Err(Error::DimensionMismatch { what: "weight entries", expected: n * n, found: row_major.len() });
        }
        Self::new(TransferMatrix::from_fn(n, n, |r, c| Complex64::new(row_major[r * n + c], 0.0)))
    }

    pub fn entries(&self) -> &TransferMatrix {
        &self.entries
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// `entries / scale`, the matrix the optics actually implement.
    pub fn normalized(&self) -> TransferMatrix {
        self.entries.map(|z| z / self.scale)
    }
}

/// Three-stage accelerator: input mesh (V^H), attenuators (Σ/scale), output
/// mesh (U).
///
/// Node ids used by attacks and thermal models number the input-mesh
/// placements first, then the output-mesh placements.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Accelerator {
    pub input_mesh: MeshProgram,
    pub attenuations: Vec<f64>,
    pub output_mesh: MeshProgram,
    pub scale: f64,
}

impl Accelerator {
    /// Wraps a single unitary program (identity input mesh, unit
    /// attenuations).
    pub fn from_program(program: MeshProgram) -> Self {
        let n = program.port_count();
        Self {
            input_mesh: MeshProgram::identity(n),
            attenuations: alloc::vec![1.0; n],
            output_mesh: program,
            scale: 1.0,
        }
    }

    pub fn port_count(&self) -> usize {
        self.output_mesh.port_count()
    }

    pub fn node_count(&self) -> usize {
        self.input_mesh.placements().len() + self.output_mesh.placements().len()
    }

    /// Global node id → (is output mesh, index within that mesh).
    pub fn locate_node(&self, node: usize) -> Option<(bool, usize)> {
        let split = self.input_mesh.placements().len();
        if node < split {
            Some((false, node))
        } else if node < self.node_count() {
            Some((true, node - split))
        } else {
            None
        }
    }

    /// Layout coordinates in µm on a grid of `pitch_um`: x follows the layer
    /// (with one empty column for the attenuators between the meshes), y the
    /// centre of the MZI's port pair.
    pub fn node_positions(&self, pitch_um: f64) -> Vec<[f64; 2]> {
        let offset = self.input_mesh.depth() + 1;
        let first = self.input_mesh.placements().iter().map(|p| (p.layer, p.port));
        let second = self.output_mesh.placements().iter().map(|p| (p.layer + offset, p.port));
        first.chain(second).map(|(col, port)| [col as f64 * pitch_um, (port as f64 + 0.5) * pitch_um]).collect()
    }

    /// End-to-end transfer matrix (should equal `W / scale`).
    pub fn recompose(&self) -> TransferMatrix {
        let n = self.port_count();
        let sigma = TransferMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(self.attenuations[r], 0.0)
            } else {
                Complex64::ZERO
            }
        });
        self.output_mesh.recompose() * sigma * self.input_mesh.recompose()
    }

    pub fn forward(&self, input: &SignalVector) -> Result<SignalVector> {
        self.forward_with(input, |_, _, _| {})
    }

    /// Forward pass with a per-node hook using global node ids.
    pub fn forward_with<F>(&self, input: &SignalVector, mut after_node: F) -> Result<SignalVector>
    where
        F: FnMut(usize, &mut Complex64, &mut Complex64),
    {
        let split = self.input_mesh.placements().len();
        let mut mid = self.input_mesh.forward_with(input, |i, a, b| after_node(i, a, b))?;
        for (amp, &t) in mid.iter_mut().zip(&self.attenuations) {
            *amp *= t;
        }
        self.output_mesh.forward_with(&mid, |i, a, b| after_node(split + i, a, b))
    }
}

impl OpticalSystem for Accelerator {
    fn port_count(&self) -> usize {
        Accelerator::port_count(self)
    }

    fn propagate(&self, input: &SignalVector, _replay: u64) -> Result<SignalVector> {
        self.forward(input)
    }
}

/// Factors the weights by SVD and decomposes both unitary factors.
pub fn svd_map(weights: &WeightMatrix) -> Result<Accelerator> {
    let svd =
        weights.entries.clone().try_svd(true, true, f64::EPSILON, 0).ok_or(Error::Numeric("SVD did not converge"))?;
    let u = svd.u.ok_or(Error::Numeric("SVD returned no U"))?;
    let v_t = svd.v_t.ok_or(Error::Numeric("SVD returned no V^H"))?;
    let attenuations = svd.singular_values.iter().map(|&s| (s / weights.scale).clamp(0.0, 1.0)).collect();
    Ok(Accelerator {
        input_mesh: clements_decompose(&v_t)?,
        attenuations,
        output_mesh: clements_decompose(&u)?,
        scale: weights.scale,
    })
}
