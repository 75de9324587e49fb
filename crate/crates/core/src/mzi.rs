//! Two-port building blocks.
//!
//! Canonical MZI convention used everywhere in this crate:
//!
//! ```text
//! T(θ, φ) = C · P(θ) · C · E(φ)
//! C = 1/√2 [[1, i], [i, 1]]      (3-dB coupler)
//! P(θ) = diag(e^{iθ}, 1)         (internal arm phase, ΔΦ)
//! E(φ) = diag(e^{iφ}, 1)         (external input phase)
//!
//! T(θ, φ) = ½ [[e^{iφ}(e^{iθ} − 1),  i(e^{iθ} + 1)],
//!              [i·e^{iφ}(e^{iθ} + 1), 1 − e^{iθ}  ]]
//! ```
//!
//! θ = 0 is the cross state, θ = π the bar state.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::phase::wrap_phase;
#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Phase settings of one MZI, both wrapped into `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawSetting"))]
pub struct MziSetting {
    theta: f64,
    phi: f64,
}

impl MziSetting {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::Domain { what: "theta", value: theta });
        }
        if !phi.is_finite() {
            return Err(Error::Domain { what: "phi", value: phi });
        }
        Ok(Self { theta: wrap_phase(theta), phi: wrap_phase(phi) })
    }

    pub const CROSS: Self = Self { theta: 0.0, phi: 0.0 };
    pub const BAR: Self = Self { theta: core::f64::consts::PI, phi: 0.0 };

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Adds offsets to both phases and re-wraps. Non-finite offsets are
    /// rejected.
    pub fn offset(&self, d_theta: f64, d_phi: f64) -> Result<Self> {
        Self::new(self.theta + d_theta, self.phi + d_phi)
    }
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSetting {
    theta: f64,
    phi: f64,
}

#[cfg(feature = "serde")]
impl TryFrom<RawSetting> for MziSetting {
    type Error = Error;
    fn try_from(raw: RawSetting) -> Result<Self> {
        Self::new(raw.theta, raw.phi)
    }
}

/// Directional coupler with power cross-coupling `power_split`.
pub fn coupler_transfer(power_split: f64) -> Result<Matrix2<Complex64>> {
    if !(0.0..=1.0).contains(&power_split) {
        return Err(Error::Domain { what: "coupler power split", value: power_split });
    }
    let t = Complex64::new((1.0 - power_split).sqrt(), 0.0);
    let r = I * power_split.sqrt();
    Ok(Matrix2::new(t, r, r, t))
}

/// Closed-form MZI transfer matrix, see the module docs for the convention.
pub fn mzi_transfer(setting: MziSetting) -> Matrix2<Complex64> {
    mzi_matrix(setting.theta, setting.phi)
}

pub(crate) fn mzi_matrix(theta: f64, phi: f64) -> Matrix2<Complex64> {
    let e_theta = Complex64::from_polar(1.0, theta);
    let e_phi = Complex64::from_polar(1.0, phi);
    let one = Complex64::new(1.0, 0.0);
    Matrix2::new(
        e_phi * (e_theta - one) * 0.5,
        I * (e_theta + one) * 0.5,
        I * e_phi * (e_theta + one) * 0.5,
        (one - e_theta) * 0.5,
    )
}

/// Factors a 2×2 unitary as `diag(d0, d1) · T(θ, φ)`.
///
/// Used to move MZIs through a diagonal phase screen during decomposition.
/// When φ is undetermined (one column of `m` vanishes) it is set to 0.
pub(crate) fn factor_diag_mzi(m: &Matrix2<Complex64>) -> (Complex64, Complex64, MziSetting) {
    let theta = 2.0 * m[(0, 0)].norm().atan2(m[(0, 1)].norm());
    let phi = if m[(0, 0)] != Complex64::ZERO && m[(0, 1)] != Complex64::ZERO {
        (m[(0, 0)] / m[(0, 1)]).arg()
    } else if m[(1, 0)] != Complex64::ZERO && m[(1, 1)] != Complex64::ZERO {
        (-m[(1, 0)] / m[(1, 1)]).arg()
    } else {
        0.0
    };
    let setting = MziSetting { theta: wrap_phase(theta), phi: wrap_phase(phi) };
    let rest = m * mzi_transfer(setting).adjoint();
    (rest[(0, 0)], rest[(1, 1)], setting)
}
