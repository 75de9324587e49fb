//! Angle bookkeeping. Stored phases live in `[0, 2π)`; reported phases in
//! `(−π, π]`. Values already in range pass through untouched so repeated
//! wrapping never perturbs the last bit.

use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use crate::Float;

/// Wraps into `[0, 2π)`.
pub fn wrap_phase(x: f64) -> f64 {
    if (0.0..TAU).contains(&x) {
        return x;
    }
    let r = x - TAU * (x / TAU).floor();
    if (0.0..TAU).contains(&r) {
        r
    } else if r < 0.0 {
        // rounding of x/TAU can land one period off
        let r = r + TAU;
        if r >= TAU {
            0.0
        } else {
            r
        }
    } else {
        0.0
    }
}

/// Wraps into `(−π, π]`.
pub fn wrap_signed(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let r = PI - wrap_phase(PI - x);
    if r <= -PI {
        PI
    } else {
        r
    }
}

/// Shortest angular distance, `min(|Δ|, 2π − |Δ|)`, always in `[0, π]`.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = wrap_phase(a - b);
    d.min(TAU - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrap_edges() {
        assert_eq!(wrap_phase(0.0), 0.0);
        assert_eq!(wrap_phase(TAU), 0.0);
        assert_eq!(wrap_phase(-1e-18), 0.0);
        assert!((wrap_phase(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert_eq!(wrap_signed(PI), PI);
        assert_eq!(wrap_signed(-PI), PI);
        assert_eq!(wrap_signed(0.0), 0.0);
        assert!((wrap_signed(1.5 * PI) + PI / 2.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn wrapped_ranges(x in -1e4f64..1e4) {
            let w = wrap_phase(x);
            prop_assert!((0.0..TAU).contains(&w));
            let s = wrap_signed(x);
            prop_assert!(s > -PI && s <= PI);
        }

        #[test]
        fn distance_is_a_metric_on_the_circle(a in -50.0f64..50.0, b in -50.0f64..50.0, k in -20i32..20) {
            let d = phase_distance(a, b);
            prop_assert!((0.0..=PI).contains(&d));
            prop_assert!((d - phase_distance(b, a)).abs() < 1e-12);
            prop_assert!(phase_distance(a, a + TAU * f64::from(k)) < 1e-11);
        }
    }
}
