//! Rectangular (Clements) decomposition of a unitary into an MZI mesh.
//!
//! Elements below the anti-diagonal are nulled by alternating column
//! operations (`U · T⁻¹`) and row operations (`T · U`) on adjacent modes.
//! What remains is a diagonal `D`. The row operations are then moved through
//! `D` one by one (`T⁻¹ · D = D' · T'`) so that the whole product reads
//! `U = D_final · T'… · T…`, i.e. a mesh followed by an output phase screen.

use alloc::vec::Vec;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::mesh::{apply2, layer_placements, MeshProgram};
use crate::mzi::{factor_diag_mzi, mzi_transfer, MziSetting};
use crate::signal::{unitarity_error, TransferMatrix};
#[allow(unused_imports)]
use crate::Float;
use crate::{Error, Result};

/// Inputs further than this from unitary (Frobenius) are rejected.
pub const UNITARY_TOLERANCE: f64 = 1e-8;

pub fn clements_decompose(unitary: &TransferMatrix) -> Result<MeshProgram> {
    let n = unitary.nrows();
    if unitary.ncols() != n {
        return Err(Error::DimensionMismatch { what: "unitary columns", expected: n, found: unitary.ncols() });
    }
    if n == 0 {
        return Err(Error::Domain { what: "port count", value: 0.0 });
    }
    let deviation = unitarity_error(unitary);
    if deviation.is_nan() || deviation > UNITARY_TOLERANCE {
        return Err(Error::NotUnitary { deviation });
    }

    let mut u = unitary.clone();
    // column operations, in the order they act on the input
    let mut right: Vec<(usize, MziSetting)> = Vec::new();
    // row operations, in the order they were applied to `u`
    let mut left: Vec<(usize, MziSetting)> = Vec::new();

    for i in 0..n.saturating_sub(1) {
        if i % 2 == 0 {
            for j in 0..=i {
                let row = n - 1 - j;
                let col = i - j;
                let s = null_from_right(u[(row, col)], u[(row, col + 1)]);
                let t_inv = mzi_transfer(s).adjoint();
                // u ← u · T⁻¹ on columns (col, col + 1)
                for r in 0..n {
                    let (a, b) = (u[(r, col)], u[(r, col + 1)]);
                    u[(r, col)] = a * t_inv[(0, 0)] + b * t_inv[(1, 0)];
                    u[(r, col + 1)] = a * t_inv[(0, 1)] + b * t_inv[(1, 1)];
                }
                right.push((col, s));
            }
        } else {
            for j in 0..=i {
                let top = n + j - i - 2;
                let s = null_from_left(u[(top, j)], u[(top + 1, j)]);
                let t = mzi_transfer(s);
                for c in 0..n {
                    let (a, b) = apply2(&t, u[(top, c)], u[(top + 1, c)]);
                    u[(top, c)] = a;
                    u[(top + 1, c)] = b;
                }
                left.push((top, s));
            }
        }
    }

    let mut diag: Vec<Complex64> = (0..n).map(|k| u[(k, k)]).collect();
    // U = L₁⁻¹ … L_k⁻¹ · D · R_m … R₁; peel from the innermost L_k outward.
    let mut moved: Vec<(usize, MziSetting)> = Vec::with_capacity(left.len());
    for &(top, s) in left.iter().rev() {
        let d = Matrix2::new(diag[top], Complex64::ZERO, Complex64::ZERO, diag[top + 1]);
        let m = mzi_transfer(s).adjoint() * d;
        let (d0, d1, s_new) = factor_diag_mzi(&m);
        diag[top] = d0;
        diag[top + 1] = d1;
        moved.push((top, s_new));
    }

    let mut sequence = right;
    sequence.extend(moved);
    let placements = layer_placements(n, &sequence);
    let phases = diag.iter().map(|d| d.arg()).collect();
    MeshProgram::new(n, placements, phases)
}

/// Settings whose inverse, applied on columns `(x, y)` of a row, zeros `x`.
fn null_from_right(x: Complex64, y: Complex64) -> MziSetting {
    if x == Complex64::ZERO && y == Complex64::ZERO {
        return MziSetting::BAR;
    }
    let theta = 2.0 * y.norm().atan2(x.norm());
    let phi = if x == Complex64::ZERO || y == Complex64::ZERO { 0.0 } else { (-x / y).arg() };
    MziSetting::new(theta, phi).expect("finite")
}

/// Settings that, applied on rows `(x, y)` of a column, zero `y`.
fn null_from_left(x: Complex64, y: Complex64) -> MziSetting {
    if x == Complex64::ZERO && y == Complex64::ZERO {
        return MziSetting::BAR;
    }
    let theta = 2.0 * x.norm().atan2(y.norm());
    let phi = if x == Complex64::ZERO || y == Complex64::ZERO { 0.0 } else { (y / x).arg() };
    MziSetting::new(theta, phi).expect("finite")
}
