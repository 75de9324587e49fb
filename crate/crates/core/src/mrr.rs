//! Add-drop microring resonator transfer functions.

use core::f64::consts::TAU;

use num_complex::Complex64;

#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result};

/// Two-coupler ring. `t1`/`t2` are the self-coupling (through) amplitude
/// coefficients of the input and drop couplers, `a` the single-pass
/// amplitude transmission, `round_trip_phase` the phase accumulated per
/// round trip (0 on resonance).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MrrParams {
    pub t1: f64,
    pub t2: f64,
    pub a: f64,
    pub round_trip_phase: f64,
}

impl MrrParams {
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [("t1", self.t1), ("t2", self.t2), ("round-trip loss a", self.a)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain { what, value: v });
            }
        }
        if !self.round_trip_phase.is_finite() {
            return Err(Error::Domain { what: "round-trip phase", value: self.round_trip_phase });
        }
        Ok(())
    }
}

/// `2π · n_eff · L / λ` for ring circumference `length` and wavelength
/// `wavelength` in the same units.
pub fn round_trip_phase(n_eff: f64, length: f64, wavelength: f64) -> f64 {
    TAU * n_eff * length / wavelength
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrrResponse {
    pub through: Complex64,
    pub drop: Complex64,
}

pub fn mrr_transfer(params: &MrrParams) -> Result<MrrResponse> {
    params.validate()?;
    let MrrParams { t1, t2, a, round_trip_phase: phi } = *params;
    let e = Complex64::from_polar(1.0, phi);
    let denom = Complex64::new(1.0, 0.0) - e * (t1 * t2 * a);
    if denom.norm() < 1e-12 {
        return Err(Error::Singular { magnitude: denom.norm() });
    }
    let through = (Complex64::new(t1, 0.0) - e * (t2 * a)) / denom;
    let k = ((1.0 - t1 * t1) * (1.0 - t2 * t2)).sqrt() * a.sqrt();
    let drop = -Complex64::from_polar(k, phi / 2.0) / denom;
    Ok(MrrResponse { through, drop })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    #[test]
    fn critical_coupling_null() {
        let r = mrr_transfer(&MrrParams { t1: 0.9, t2: 0.9, a: 1.0, round_trip_phase: 0.0 }).unwrap();
        assert!(r.through.norm() < 1e-12);
        assert!((r.drop.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn off_resonance_passes_through() {
        let r = mrr_transfer(&MrrParams { t1: 0.9, t2: 0.9, a: 1.0, round_trip_phase: PI }).unwrap();
        // (0.9 + 0.9) / (1 + 0.81) and (1 − 0.81) / 1.81
        assert!((r.through.norm_sqr() - (1.8f64 / 1.81).powi(2)).abs() < 1e-12);
        assert!((r.drop.norm_sqr() - (0.19f64 / 1.81).powi(2)).abs() < 1e-12);
        assert!(r.through.norm_sqr() > 0.98);
    }

    #[test]
    fn lossy_ring_drops_nothing() {
        let r = mrr_transfer(&MrrParams { t1: 0.7, t2: 0.8, a: 0.0, round_trip_phase: 1.0 }).unwrap();
        assert_eq!(r.drop, Complex64::ZERO);
        assert!((r.through - Complex64::new(0.7, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_and_invalid() {
        let lossless_closed = MrrParams { t1: 1.0, t2: 1.0, a: 1.0, round_trip_phase: 0.0 };
        assert!(matches!(mrr_transfer(&lossless_closed), Err(Error::Singular { .. })));
        assert!(mrr_transfer(&MrrParams { t1: 1.2, t2: 0.5, a: 1.0, round_trip_phase: 0.0 }).is_err());
        assert!(mrr_transfer(&MrrParams { t1: 0.5, t2: 0.5, a: 1.0, round_trip_phase: f64::NAN }).is_err());
    }

    #[test]
    fn phase_from_wavelength() {
        assert!((round_trip_phase(2.0, 1.55, 1.55) - 2.0 * TAU).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn passive(t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0, a in 0.0f64..=1.0, phi in -10.0f64..10.0) {
            if let Ok(r) = mrr_transfer(&MrrParams { t1, t2, a, round_trip_phase: phi }) {
                prop_assert!(r.through.norm_sqr() + r.drop.norm_sqr() <= 1.0 + 1e-12);
            }
        }
    }
}
