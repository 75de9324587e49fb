use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Dense complex transfer matrix, row-major semantics `out = M · in`.
pub type TransferMatrix = DMatrix<Complex64>;

/// Complex field amplitudes, one per waveguide port.
///
/// Amplitudes are normalised so `|a|² = 1` corresponds to the detector's
/// reference power (1 mW by default).
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct SignalVector(pub Vec<Complex64>);

impl SignalVector {
    pub fn zeros(n: usize) -> Self {
        Self(alloc::vec![Complex64::new(0.0, 0.0); n])
    }

    /// Unit amplitude on `port`, dark elsewhere.
    pub fn basis(n: usize, port: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[port] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn power(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }

    pub(crate) fn expect_len(&self, n: usize) -> Result<()> {
        if self.0.len() == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { what: "signal length", expected: n, found: self.0.len() })
        }
    }
}

impl Deref for SignalVector {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl DerefMut for SignalVector {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

impl From<Vec<Complex64>> for SignalVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

/// Anything that maps port amplitudes in to port amplitudes out.
///
/// `replay` keys any internal randomness (injected noise) so that a given
/// replay of a given input is reproducible. Deterministic systems ignore it.
pub trait OpticalSystem {
    fn port_count(&self) -> usize;

    fn propagate(&self, input: &SignalVector, replay: u64) -> Result<SignalVector>;
}

/// `‖M^H M − I‖_F`.
pub fn unitarity_error(m: &TransferMatrix) -> f64 {
    let n = m.ncols();
    let gram = m.adjoint() * m;
    let mut acc = 0.0;
    for i in 0..gram.nrows() {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            acc += (gram[(i, j)] - Complex64::new(target, 0.0)).norm_sqr();
        }
    }
    num_traits::Float::sqrt(acc)
}

/// Frobenius norm of `a − b`.
pub fn frobenius_distance(a: &TransferMatrix, b: &TransferMatrix) -> f64 {
    let acc: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum();
    num_traits::Float::sqrt(acc)
}
