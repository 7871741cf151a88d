//! Vector fields, frames, and Lie brackets.
//!
//! A *frame* is a pair of vector fields `(X1, X2)` on an ambient space
//! `R^n`, together with a base point and a *tangent-frame map* assigning to
//! each point an `n x m` matrix whose columns span the tangent space of the
//! (possibly embedded) `m`-dimensional manifold under study. Working with an
//! ambient embedding plus tangent frame avoids chart singularities on compact
//! groups; all rank and determinant decisions happen in tangent coordinates
//! obtained by least squares against the frame columns.
//!
//! Fields come in three flavors: expression-defined ([`ExprField`], parsed
//! from a small arithmetic grammar and differentiated exactly by forward-mode
//! dual numbers), matrix-linear ([`LinearField`], used by the builtin
//! `engel-so3r` frame, with exact Jacobians and exact brackets), and derived
//! bracket fields ([`bracket_field`]) that stay evaluable away from the
//! reference curve so they can be bracketed again.

mod builtin;
mod dual;
mod expr;
mod field;
mod frame;

pub use builtin::engel_so3r;
pub use dual::Dual;
pub use expr::{parse_expr, Expr};
pub use field::{
    bracket_field, iterated_ad, lie_bracket, BracketField, DiffMode, ExprField, Field, LinearField,
    VectorField,
};
pub use frame::{Frame, TangentFrame};

pub(crate) use field::fd_jvp;
