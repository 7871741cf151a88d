//! The builtin `engel-so3r` frame: a rank-two structure on `SO(3) x R`.
//!
//! The ambient space is `R^10`: the first nine coordinates hold a rotation
//! matrix `R` row-major (`R[i][j] = x[3i+j]`), the tenth is the line
//! coordinate `θ`. With the so(3) generators
//!
//! ```text
//! T1 = [0 0 0; 0 0 -1; 0 1 0],  T2 = [0 0 1; 0 0 0; -1 0 0],
//! T3 = [0 -1 0; 1 0 0; 0 0 0]          ([T1,T2] = T3, cyclic),
//! ```
//!
//! the frame fields are the left-invariant
//!
//! ```text
//! X1(R, θ) = (R·(T1+T2), 2) / √2,    X2(R, θ) = (R·T1, 1) / √2.
//! ```
//!
//! The base point is `(I, 0)`; the reference curve is `γ(u) = (e^{uΩ}, √2·u)`
//! with `Ω = (T1+T2)/√2`. The structure is 4-dimensional and Engel-regular:
//! iterated brackets give `[X1,[X1,X2]] = X1/2 − X2`, so the structural
//! decomposition has constants `(α⁰, α¹, β) = (−1, 0, 1/2)`.

use super::field::{Field, LinearField, LINEAR_AMBIENT_DIM};
use super::frame::{Frame, TangentFrame};
use nalgebra::{DMatrix, DVector, Matrix3};
use std::sync::Arc;

/// so(3) generator rotating about the x-axis.
pub fn t1() -> Matrix3<f64> {
    Matrix3::new(0., 0., 0., 0., 0., -1., 0., 1., 0.)
}

/// so(3) generator rotating about the y-axis.
pub fn t2() -> Matrix3<f64> {
    Matrix3::new(0., 0., 1., 0., 0., 0., -1., 0., 0.)
}

/// so(3) generator rotating about the z-axis.
pub fn t3() -> Matrix3<f64> {
    Matrix3::new(0., -1., 0., 1., 0., 0., 0., 0., 0.)
}

/// Build the builtin frame.
pub fn engel_so3r() -> Frame {
    let s = 1.0 / 2.0_f64.sqrt();
    let x1: Field = Arc::new(LinearField::new((t1() + t2()) * s, 2.0 * s));
    let x2: Field = Arc::new(LinearField::new(t1() * s, s));
    let mut base = DVector::zeros(LINEAR_AMBIENT_DIM);
    for i in 0..3 {
        base[3 * i + i] = 1.0;
    }
    Frame {
        label: "engel-so3r".to_string(),
        ambient_dim: LINEAR_AMBIENT_DIM,
        intrinsic_dim: 4,
        x1,
        x2,
        base_point: base,
        tangent: TangentFrame::EngelSo3r,
    }
}

/// Tangent-frame matrix at an ambient point `x = (R, θ)`: columns
/// `vec(R·T1), vec(R·T2), vec(R·T3)` plus the line direction.
pub fn tangent_matrix_so3r(x: &DVector<f64>) -> DMatrix<f64> {
    let r = LinearField::unpack(x);
    let mut t = DMatrix::zeros(LINEAR_AMBIENT_DIM, 4);
    for (c, gen) in [t1(), t2(), t3()].iter().enumerate() {
        let col = r * gen;
        for i in 0..3 {
            for j in 0..3 {
                t[(3 * i + j, c)] = col[(i, j)];
            }
        }
    }
    t[(9, 3)] = 1.0;
    t
}
