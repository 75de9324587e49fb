//! Coherent photodetector readout: power in dBm, phase in radians.

use alloc::string::String;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::phase::wrap_signed;
use crate::random::rng_from_seed;
use crate::signal::SignalVector;
#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DetectorModel {
    /// Gaussian read noise on power, dB.
    pub power_noise_sigma_db: f64,
    /// Gaussian read noise on phase, rad.
    pub phase_noise_sigma_rad: f64,
    /// Readings never go below this, dBm.
    pub power_floor_dbm: f64,
    /// Optical power of a unit amplitude, mW.
    pub reference_power_mw: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            power_noise_sigma_db: 0.1,
            phase_noise_sigma_rad: 0.005,
            power_floor_dbm: -120.0,
            reference_power_mw: 1.0,
        }
    }
}

impl DetectorModel {
    pub fn noiseless() -> Self {
        Self { power_noise_sigma_db: 0.0, phase_noise_sigma_rad: 0.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power_noise_sigma_db >= 0.0 && self.power_noise_sigma_db.is_finite()) {
            return Err(Error::Domain { what: "power noise sigma", value: self.power_noise_sigma_db });
        }
        if !(self.phase_noise_sigma_rad >= 0.0 && self.phase_noise_sigma_rad.is_finite()) {
            return Err(Error::Domain { what: "phase noise sigma", value: self.phase_noise_sigma_rad });
        }
        if !self.power_floor_dbm.is_finite() {
            return Err(Error::Domain { what: "power floor", value: self.power_floor_dbm });
        }
        if !(self.reference_power_mw > 0.0 && self.reference_power_mw.is_finite()) {
            return Err(Error::Domain { what: "reference power", value: self.reference_power_mw });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PortReading {
    pub power_dbm: f64,
    pub phase_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Readings {
    pub scenario: String,
    pub step: u64,
    pub ports: Vec<PortReading>,
}

impl Readings {
    pub fn labelled(mut self, scenario: &str, step: u64) -> Self {
        self.scenario = String::from(scenario);
        self.step = step;
        self
    }
}

/// Reads every port of `signal`.
///
/// Power is `10·log10(|a|²·P_ref) + noise`, clamped at the floor; phase is
/// `arg(a) + noise` wrapped into `(−π, π]`, and exactly 0 for a dark port.
/// Two normals are drawn per port regardless of amplitude, so the noise
/// stream for port k does not depend on other ports' values.
pub fn read_outputs(signal: &SignalVector, detector: &DetectorModel, rng_seed: u64) -> Readings {
    let mut rng = rng_from_seed(rng_seed);
    let ports = signal
        .iter()
        .map(|a| {
            let zp: f64 = StandardNormal.sample(&mut rng);
            let zf: f64 = StandardNormal.sample(&mut rng);
            let linear = a.norm_sqr() * detector.reference_power_mw;
            let clean_db = if linear > 0.0 { 10.0 * linear.log10() } else { f64::NEG_INFINITY };
            let noisy = clean_db + detector.power_noise_sigma_db * zp;
            let power_dbm = if noisy > detector.power_floor_dbm { noisy } else { detector.power_floor_dbm };
            let phase_rad = if a.re == 0.0 && a.im == 0.0 {
                0.0
            } else {
                wrap_signed(a.arg() + detector.phase_noise_sigma_rad * zf)
            };
            PortReading { power_dbm, phase_rad }
        })
        .collect();
    Readings { scenario: String::new(), step: 0, ports }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn sig(v: &[(f64, f64)]) -> SignalVector {
        SignalVector(v.iter().map(|&(r, i)| Complex64::new(r, i)).collect())
    }

    #[test]
    fn clean_readouts() {
        let d = DetectorModel::noiseless();
        let r = read_outputs(&sig(&[(1.0, 0.0), (0.0, 0.0), (0.0, 1.0)]), &d, 0);
        assert_eq!(r.ports[0], PortReading { power_dbm: 0.0, phase_rad: 0.0 });
        assert_eq!(r.ports[1], PortReading { power_dbm: -120.0, phase_rad: 0.0 });
        assert_eq!(r.ports[2].power_dbm, 0.0);
        assert!((r.ports[2].phase_rad - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn reference_power_shifts_dbm() {
        let d = DetectorModel { reference_power_mw: 10.0, ..DetectorModel::noiseless() };
        let r = read_outputs(&sig(&[(1.0, 0.0)]), &d, 0);
        assert!((r.ports[0].power_dbm - 10.0).abs() < 1e-12);
    }

    #[test]
    fn validate_rejects_negative_sigma() {
        let d = DetectorModel { power_noise_sigma_db: -0.1, ..DetectorModel::default() };
        assert!(d.validate().is_err());
        assert!(DetectorModel::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn seeded_reads_are_bit_identical(seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let s = sig(&[(re, im), (im, re), (0.0, 0.0)]);
            let d = DetectorModel::default();
            let a = read_outputs(&s, &d, seed);
            let b = read_outputs(&s, &d, seed);
            for (x, y) in a.ports.iter().zip(&b.ports) {
                prop_assert_eq!(x.power_dbm.to_bits(), y.power_dbm.to_bits());
                prop_assert_eq!(x.phase_rad.to_bits(), y.phase_rad.to_bits());
            }
            for p in &a.ports {
                prop_assert!(p.power_dbm >= d.power_floor_dbm);
                prop_assert!(p.phase_rad > -PI && p.phase_rad <= PI);
            }
        }

        #[test]
        fn zero_noise_is_exact(seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
            prop_assume!(re != 0.0 || im != 0.0);
            let a = Complex64::new(re, im);
            let r = read_outputs(&SignalVector(alloc::vec![a]), &DetectorModel::noiseless(), seed);
            prop_assert_eq!(r.ports[0].power_dbm, (10.0 * a.norm_sqr().log10()).max(-120.0));
            prop_assert_eq!(r.ports[0].phase_rad, a.arg());
        }
    }
}
