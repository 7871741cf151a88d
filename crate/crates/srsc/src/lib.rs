//! Numerical toolkit for singular curves of rank-two sub-Riemannian structures.
//!
//! Given a frame of two vector fields `(X1, X2)` on a manifold (an ambient
//! embedding plus a tangent-frame map) the toolkit studies the reference curve
//! `γ` — the integral curve of `X1` from the base point — as a critical point
//! of the endpoint map `F` of the control system
//!
//! ```text
//! ξ' = (1 + v1) X1(ξ) + v2 X2(ξ),   ξ(0) = x0,
//! ```
//!
//! and of the extended map `𝓕 = (F, J)` where `J` is the control energy.
//! It provides:
//!
//! * [`vfcore`] — expression-defined and builtin vector fields, forward-mode
//!   differentiation, Lie brackets, frame loading and validation;
//! * [`flow`] — integration of the control system, variational transport along
//!   `γ`, pushforward fields, and the reparametrization map `ρ`;
//! * [`abnormal`] — the annihilating covector `λ`, its transported lift `η`,
//!   and the hypothesis battery (corank, Goh, Legendre, strictness, the
//!   projected energy gradient);
//! * [`hessian`] — the discretized second variation restricted to the kernel
//!   constraints, inertia (index/nullity) computation, and index profiles;
//! * [`jacobi`] — conjugate-point detection by Jacobi shooting and by
//!   closed-form wedge indicators on 4-dimensional (Engel) structures, with
//!   root localization;
//! * [`acceptance`] — the self-verification battery for the builtin
//!   `engel-so3r` example, shared by the test suite and the CLI.
//!
//! Two quadratic-form variants appear throughout, selected by [`Variant`]:
//! the endpoint map alone (`F`) and the energy-extended map (`Extended`).

pub mod abnormal;
pub mod acceptance;
mod error;
pub mod flow;
pub mod hessian;
pub mod jacobi;
pub mod linalg;
pub mod tol;
pub mod vfcore;

pub use error::{Error, Result};

/// Which second-variation problem a computation refers to.
///
/// `F` treats the endpoint map alone; `Extended` treats the endpoint map
/// paired with the control energy (one extra scalar constraint, one extra
/// shooting component). Conjugate-point sets and inertia indices differ
/// between the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Endpoint map `F` alone.
    F,
    /// Extended map `𝓕 = (F, J)` including the energy.
    Extended,
}

impl Variant {
    /// Short lowercase label used in reports and CSV headers.
    pub fn label(self) -> &'static str {
        match self {
            Variant::F => "f",
            Variant::Extended => "ext",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}
