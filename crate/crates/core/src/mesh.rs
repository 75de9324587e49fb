//! Programmable rectangular meshes of MZIs followed by an output phase screen.

use alloc::vec::Vec;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::mzi::{mzi_transfer, MziSetting};
use crate::phase::wrap_phase;
use crate::signal::{OpticalSystem, SignalVector, TransferMatrix};
use crate::{Error, Result};

/// One MZI acting on ports `(port, port + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Placement {
    pub layer: usize,
    pub port: usize,
    pub setting: MziSetting,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawProgram"))]
pub struct MeshProgram {
    port_count: usize,
    placements: Vec<Placement>,
    output_phases: Vec<f64>,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProgram {
    port_count: usize,
    placements: Vec<Placement>,
    output_phases: Vec<f64>,
}

#[cfg(feature = "serde")]
impl TryFrom<RawProgram> for MeshProgram {
    type Error = Error;
    fn try_from(raw: RawProgram) -> Result<Self> {
        Self::new(raw.port_count, raw.placements, raw.output_phases)
    }
}

impl MeshProgram {
    /// Builds a program, checking port ranges, layer ordering and that
    /// placements sharing a layer touch disjoint ports. Output phases are
    /// wrapped into `[0, 2π)`.
    pub fn new(port_count: usize, placements: Vec<Placement>, output_phases: Vec<f64>) -> Result<Self> {
        if port_count == 0 {
            return Err(Error::Domain { what: "port count", value: 0.0 });
        }
        if output_phases.len() != port_count {
            return Err(Error::DimensionMismatch {
                what: "output phase screen",
                expected: port_count,
                found: output_phases.len(),
            });
        }
        let mut last_layer = 0;
        let mut busy: Vec<Option<usize>> = alloc::vec![None; port_count];
        for p in &placements {
            if p.port + 1 >= port_count {
                return Err(Error::Invalid(alloc::format!(
                    "placement on ports ({}, {}) exceeds {} ports",
                    p.port,
                    p.port + 1,
                    port_count
                )));
            }
            if p.layer < last_layer {
                return Err(Error::Invalid(alloc::format!("placement layers out of order at layer {}", p.layer)));
            }
            last_layer = p.layer;
            if busy[p.port] == Some(p.layer) || busy[p.port + 1] == Some(p.layer) {
                return Err(Error::Invalid(alloc::format!(
                    "overlapping placements in layer {} at port {}",
                    p.layer,
                    p.port
                )));
            }
            busy[p.port] = Some(p.layer);
            busy[p.port + 1] = Some(p.layer);
        }
        let mut output_phases = output_phases;
        for phase in &mut output_phases {
            if !phase.is_finite() {
                return Err(Error::Domain { what: "output phase", value: *phase });
            }
            *phase = wrap_phase(*phase);
        }
        Ok(Self { port_count, placements, output_phases })
    }

    /// No MZIs, zero output phases.
    pub fn identity(port_count: usize) -> Self {
        Self { port_count, placements: Vec::new(), output_phases: alloc::vec![0.0; port_count] }
    }

    pub fn port_count(&self) -> usize {
        self.port_count
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn output_phases(&self) -> &[f64] {
        &self.output_phases
    }

    /// Number of distinct layers (0 for an empty program).
    pub fn depth(&self) -> usize {
        self.placements.last().map_or(0, |p| p.layer + 1)
    }

    /// Same topology, new settings. `settings` is indexed like `placements()`.
    pub fn with_settings(&self, settings: &[MziSetting]) -> Result<Self> {
        if settings.len() != self.placements.len() {
            return Err(Error::DimensionMismatch {
                what: "setting count",
                expected: self.placements.len(),
                found: settings.len(),
            });
        }
        let mut out = self.clone();
        for (p, s) in out.placements.iter_mut().zip(settings) {
            p.setting = *s;
        }
        Ok(out)
    }

    pub fn with_output_phases(&self, phases: Vec<f64>) -> Result<Self> {
        Self::new(self.port_count, self.placements.clone(), phases)
    }

    pub fn forward(&self, input: &SignalVector) -> Result<SignalVector> {
        self.forward_with(input, |_, _, _| {})
    }

    /// Forward propagation with a hook run right after every MZI.
    ///
    /// The hook receives the placement index and mutable access to the two
    /// output amplitudes of that MZI. Attack models use it to absorb or tap
    /// light at a node.
    pub fn forward_with<F>(&self, input: &SignalVector, mut after_node: F) -> Result<SignalVector>
    where
        F: FnMut(usize, &mut Complex64, &mut Complex64),
    {
        input.expect_len(self.port_count)?;
        let mut field = input.clone();
        for (idx, p) in self.placements.iter().enumerate() {
            let t = mzi_transfer(p.setting);
            let (a, b) = (field[p.port], field[p.port + 1]);
            let (mut top, mut bottom) = apply2(&t, a, b);
            after_node(idx, &mut top, &mut bottom);
            field[p.port] = top;
            field[p.port + 1] = bottom;
        }
        for (amp, &phase) in field.iter_mut().zip(&self.output_phases) {
            *amp *= Complex64::from_polar(1.0, phase);
        }
        Ok(field)
    }

    /// Full N×N matrix realised by the program.
    pub fn recompose(&self) -> TransferMatrix {
        let n = self.port_count;
        let mut m = TransferMatrix::identity(n, n);
        for p in &self.placements {
            let t = mzi_transfer(p.setting);
            for col in 0..n {
                let (top, bottom) = apply2(&t, m[(p.port, col)], m[(p.port + 1, col)]);
                m[(p.port, col)] = top;
                m[(p.port + 1, col)] = bottom;
            }
        }
        for (row, &phase) in self.output_phases.iter().enumerate() {
            let e = Complex64::from_polar(1.0, phase);
            for col in 0..n {
                m[(row, col)] *= e;
            }
        }
        m
    }
}

impl OpticalSystem for MeshProgram {
    fn port_count(&self) -> usize {
        self.port_count
    }

    fn propagate(&self, input: &SignalVector, _replay: u64) -> Result<SignalVector> {
        self.forward(input)
    }
}

#[inline]
pub(crate) fn apply2(t: &Matrix2<Complex64>, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    (t[(0, 0)] * a + t[(0, 1)] * b, t[(1, 0)] * a + t[(1, 1)] * b)
}

/// Assigns each placement the earliest layer after everything it depends on.
/// `pairs` lists top ports in application order.
pub(crate) fn layer_placements(port_count: usize, pairs: &[(usize, MziSetting)]) -> Vec<Placement> {
    let mut free_at = alloc::vec![0usize; port_count];
    let mut out: Vec<Placement> = pairs
        .iter()
        .map(|&(port, setting)| {
            let layer = free_at[port].max(free_at[port + 1]);
            free_at[port] = layer + 1;
            free_at[port + 1] = layer + 1;
            Placement { layer, port, setting }
        })
        .collect();
    // Placements within a layer act on disjoint ports and commute, so a
    // stable sort by layer preserves the realised matrix.
    out.sort_by_key(|p| p.layer);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{haar_unitary, random_program, random_signal};
    use crate::signal::unitarity_error;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_program_passes_through() {
        let p = MeshProgram::identity(3);
        let out = p.forward(&SignalVector::basis(3, 0)).unwrap();
        assert_eq!(out, SignalVector::basis(3, 0));
        assert_eq!(p.recompose(), TransferMatrix::identity(3, 3));
    }

    #[test]
    fn single_cross_and_bar() {
        let cross = MeshProgram::new(
            2,
            alloc::vec![Placement { layer: 0, port: 0, setting: MziSetting::CROSS }],
            alloc::vec![0.0; 2],
        )
        .unwrap();
        let out = cross.forward(&SignalVector::from_real(&[1.0, 0.0])).unwrap();
        assert!((out[0] - c(0.0, 0.0)).norm() < 1e-15);
        assert!((out[1] - c(0.0, 1.0)).norm() < 1e-15);

        let bar = MeshProgram::new(
            2,
            alloc::vec![Placement { layer: 0, port: 0, setting: MziSetting::BAR }],
            alloc::vec![0.0; 2],
        )
        .unwrap();
        let m = bar.recompose();
        let expected = TransferMatrix::from_row_slice(2, 2, &[c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(crate::signal::frobenius_distance(&m, &expected) < 1e-15);
    }

    #[test]
    fn rejects_bad_programs() {
        let s = MziSetting::CROSS;
        assert!(
            MeshProgram::new(2, alloc::vec![Placement { layer: 0, port: 1, setting: s }], alloc::vec![0.0; 2]).is_err()
        );
        assert!(MeshProgram::new(3, alloc::vec![], alloc::vec![0.0; 2]).is_err());
        let overlap =
            alloc::vec![Placement { layer: 0, port: 0, setting: s }, Placement { layer: 0, port: 1, setting: s }];
        assert!(MeshProgram::new(3, overlap, alloc::vec![0.0; 3]).is_err());
        let unordered =
            alloc::vec![Placement { layer: 1, port: 0, setting: s }, Placement { layer: 0, port: 1, setting: s }];
        assert!(MeshProgram::new(3, unordered, alloc::vec![0.0; 3]).is_err());
        assert!(matches!(
            MeshProgram::identity(3).forward(&SignalVector::zeros(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn forward_matches_recomposed_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_program(5, &mut rng);
        let x = random_signal(5, &mut rng);
        let dense = p.recompose() * nalgebra::DVector::from_column_slice(&x);
        let out = p.forward(&x).unwrap();
        for (a, b) in out.iter().zip(dense.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn random_six_port_conserves_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = random_program(6, &mut rng);
        let x = random_signal(6, &mut rng);
        let out = p.forward(&x).unwrap();
        assert!((out.power() - x.power()).abs() < 1e-10);
    }

    #[test]
    fn layering_keeps_placements_disjoint() {
        let u = haar_unitary(7, &mut ChaCha8Rng::seed_from_u64(1));
        let p = crate::clements_decompose(&u).unwrap();
        // revalidates layer order and disjointness
        MeshProgram::new(7, p.placements().to_vec(), p.output_phases().to_vec()).unwrap();
    }

    proptest! {
        #[test]
        fn recompose_is_unitary(seed in any::<u64>(), n in 1usize..9) {
            let p = random_program(n, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert!(unitarity_error(&p.recompose()) < 1e-10);
        }

        #[test]
        fn forward_is_linear(seed in any::<u64>(), a_re in -2.0f64..2.0, a_im in -2.0f64..2.0, b_re in -2.0f64..2.0, b_im in -2.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_program(5, &mut rng);
            let x = random_signal(5, &mut rng);
            let y = random_signal(5, &mut rng);
            let (a, b) = (c(a_re, a_im), c(b_re, b_im));
            let mixed: SignalVector = x.iter().zip(y.iter()).map(|(u, v)| a * u + b * v).collect::<Vec<_>>().into();
            let lhs = p.forward(&mixed).unwrap();
            let fx = p.forward(&x).unwrap();
            let fy = p.forward(&y).unwrap();
            for i in 0..5 {
                prop_assert!((lhs[i] - (a * fx[i] + b * fy[i])).norm() < 1e-12);
            }
        }
    }
}
