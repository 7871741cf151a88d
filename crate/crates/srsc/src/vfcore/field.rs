//! The vector-field abstraction and Lie brackets.

use super::dual::Dual;
use super::expr::Expr;
use crate::tol;
use nalgebra::{DMatrix, DVector, Matrix3};
use std::sync::Arc;

/// Differentiation mode for expression fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffMode {
    /// Forward-mode dual numbers (exact to roundoff); the default.
    Dual,
    /// Central finite differences with step `tol::FD_STEP * (1 + |x|)`.
    FiniteDifference,
}

/// A smooth vector field on ambient `R^n`.
///
/// `jvp` is the Jacobian-vector product (directional derivative of the field
/// along `v` at `x`); `jacobian` defaults to assembling it column by column.
/// `hessian_contract(x, p)` returns the symmetric matrix `H` with
/// `H[j][k] = Σ_i p_i ∂²(field_i)/∂x_j∂x_k`, needed by the cotangent-lifted
/// variational equation; the default central-differences the Jacobian, and
/// linear fields override it with an exact zero.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &DVector<f64>) -> DVector<f64>;

    fn jvp(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64>;

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut j = DMatrix::zeros(n, n);
        let mut e = DVector::zeros(n);
        for c in 0..n {
            e[c] = 1.0;
            j.set_column(c, &self.jvp(x, &e));
            e[c] = 0.0;
        }
        j
    }

    fn hessian_contract(&self, x: &DVector<f64>, p: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let h = tol::FD_STEP * (1.0 + x.norm());
        let mut out = DMatrix::zeros(n, n);
        let mut xp = x.clone();
        for c in 0..n {
            xp[c] = x[c] + h;
            let jp = self.jacobian(&xp).transpose() * p;
            xp[c] = x[c] - h;
            let jm = self.jacobian(&xp).transpose() * p;
            xp[c] = x[c];
            out.set_column(c, &((jp - jm) / (2.0 * h)));
        }
        // Symmetrize: mixed partials commute for smooth fields.
        let out_t = out.transpose();
        (out + out_t) * 0.5
    }

    /// Downcast hook letting bracket construction stay exact on
    /// matrix-linear fields.
    fn as_linear(&self) -> Option<&LinearField> {
        None
    }
}

/// Shared, immutable handle to a vector field.
pub type Field = Arc<dyn VectorField>;

/// A field whose components are parsed expressions.
pub struct ExprField {
    comps: Vec<Expr>,
    dim: usize,
    mode: DiffMode,
}

impl ExprField {
    pub fn new(comps: Vec<Expr>, dim: usize, mode: DiffMode) -> Self {
        assert_eq!(comps.len(), dim, "one component per ambient coordinate");
        ExprField { comps, dim, mode }
    }
}

impl VectorField for ExprField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        let xs = x.as_slice();
        DVector::from_iterator(self.dim, self.comps.iter().map(|c| c.eval(xs)))
    }

    fn jvp(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        match self.mode {
            DiffMode::Dual => {
                let seeded: Vec<Dual> =
                    x.iter().zip(v.iter()).map(|(&xi, &vi)| Dual::seeded(xi, vi)).collect();
                DVector::from_iterator(self.dim, self.comps.iter().map(|c| c.eval(&seeded).d))
            }
            DiffMode::FiniteDifference => fd_jvp(self, x, v),
        }
    }
}

/// Central finite-difference directional derivative; used by derived fields
/// whose evaluation is itself numerical.
pub(crate) fn fd_jvp(f: &dyn VectorField, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let vn = v.norm();
    if vn == 0.0 {
        return DVector::zeros(f.dim());
    }
    let h = tol::FD_STEP * (1.0 + x.norm()) / vn;
    let fp = f.eval(&(x + v * h));
    let fm = f.eval(&(x - v * h));
    (fp - fm) / (2.0 * h)
}

/// A field on the ambient space `R^10 = R^{3x3} ⊕ R` (row-major rotation
/// block plus a line coordinate) of the form `x = (R, θ) ↦ (R·A, r)` with a
/// constant matrix `A` and constant rate `r`. Linear in `x`, so Jacobians
/// are exact and brackets close in the class:
/// `[(·A, a), (·B, b)] = (·(AB − BA), 0)`.
#[derive(Debug, Clone)]
pub struct LinearField {
    pub mat: Matrix3<f64>,
    pub rate: f64,
}

/// Ambient dimension of [`LinearField`]s: a flattened 3x3 block plus one
/// line coordinate.
pub const LINEAR_AMBIENT_DIM: usize = 10;

impl LinearField {
    pub fn new(mat: Matrix3<f64>, rate: f64) -> Self {
        LinearField { mat, rate }
    }

    /// Exact Lie bracket within the class (the matrix commutator; the line
    /// component is constant, so it drops).
    pub fn bracket(&self, other: &LinearField) -> LinearField {
        LinearField { mat: self.mat * other.mat - other.mat * self.mat, rate: 0.0 }
    }

    /// View the leading 9 ambient coordinates as a 3x3 row-major matrix.
    pub fn unpack(x: &DVector<f64>) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| x[3 * i + j])
    }

    fn pack(m: &Matrix3<f64>, rate: f64) -> DVector<f64> {
        let mut out = DVector::zeros(LINEAR_AMBIENT_DIM);
        for i in 0..3 {
            for j in 0..3 {
                out[3 * i + j] = m[(i, j)];
            }
        }
        out[9] = rate;
        out
    }
}

impl VectorField for LinearField {
    fn dim(&self) -> usize {
        LINEAR_AMBIENT_DIM
    }

    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        let r = Self::unpack(x);
        Self::pack(&(r * self.mat), self.rate)
    }

    fn jvp(&self, _x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let dv = Self::unpack(v);
        Self::pack(&(dv * self.mat), 0.0)
    }

    fn hessian_contract(&self, _x: &DVector<f64>, _p: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(LINEAR_AMBIENT_DIM, LINEAR_AMBIENT_DIM)
    }

    fn as_linear(&self) -> Option<&LinearField> {
        Some(self)
    }
}

/// The bracket `[A, B]` kept as an evaluable field, so it can be bracketed
/// again or transported. Evaluation uses the defining formula
/// `[A,B](x) = DB(x)·A(x) − DA(x)·B(x)`; its own derivatives fall back to
/// central differences of that evaluation.
pub struct BracketField {
    a: Field,
    b: Field,
}

impl VectorField for BracketField {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        self.b.jvp(x, &self.a.eval(x)) - self.a.jvp(x, &self.b.eval(x))
    }

    fn jvp(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        fd_jvp(self, x, v)
    }
}

/// Pointwise Lie bracket `[a, b](x) = Db(x)·a(x) − Da(x)·b(x)`.
pub fn lie_bracket(a: &Field, b: &Field, x: &DVector<f64>) -> DVector<f64> {
    b.jvp(x, &a.eval(x)) - a.jvp(x, &b.eval(x))
}

/// The bracket `[a, b]` as a field. Exact (and cheap) when both arguments
/// are matrix-linear; otherwise an evaluable [`BracketField`].
pub fn bracket_field(a: &Field, b: &Field) -> Field {
    if let (Some(la), Some(lb)) = (a.as_linear(), b.as_linear()) {
        return Arc::new(la.bracket(lb));
    }
    Arc::new(BracketField { a: Arc::clone(a), b: Arc::clone(b) })
}

/// Iterated adjoint: `(ad a)^k b`, i.e. `b`, `[a,b]`, `[a,[a,b]]`, ... as an
/// evaluable field.
pub fn iterated_ad(a: &Field, b: &Field, k: usize) -> Field {
    let mut cur = Arc::clone(b);
    for _ in 0..k {
        cur = bracket_field(a, &cur);
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vfcore::parse_expr;

    fn expr_field(comps: &[&str], dim: usize, mode: DiffMode) -> Field {
        let parsed = comps.iter().map(|c| parse_expr(c, dim).unwrap()).collect();
        Arc::new(ExprField::new(parsed, dim, mode))
    }

    #[test]
    fn dual_jvp_matches_fd_on_nonlinear_field() {
        let fd = expr_field(&["sin(x0*x1)", "x1*x1", "exp(x0)"], 3, DiffMode::FiniteDifference);
        let du = expr_field(&["sin(x0*x1)", "x1*x1", "exp(x0)"], 3, DiffMode::Dual);
        let x = DVector::from_column_slice(&[0.3, -0.7, 0.2]);
        let v = DVector::from_column_slice(&[1.0, 0.5, -2.0]);
        let a = du.jvp(&x, &v);
        let b = fd.jvp(&x, &v);
        assert!((a - b).amax() < 1e-8);
    }

    #[test]
    fn bracket_on_flat_linear_fields_matches_commutator() {
        // a(x) = M x, b(x) = N x on R^3 written as expressions; the bracket
        // is (NM − MN) x.
        let a = expr_field(&["x1", "x2", "0"], 3, DiffMode::Dual); // shift up
        let b = expr_field(&["0", "x0", "2*x1"], 3, DiffMode::Dual);
        let x = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        let m = DMatrix::from_row_slice(3, 3, &[0., 1., 0., 0., 0., 1., 0., 0., 0.]);
        let n = DMatrix::from_row_slice(3, 3, &[0., 0., 0., 1., 0., 0., 0., 2., 0.]);
        let expect = (&n * &m - &m * &n) * &x;
        let got = lie_bracket(&a, &b, &x);
        assert!((got - expect).amax() < 1e-9);
    }

    #[test]
    fn bracket_antisymmetry_pointwise() {
        let a = expr_field(&["sin(x1)", "x0*x2", "1"], 3, DiffMode::Dual);
        let b = expr_field(&["x2*x2", "cos(x0)", "x1"], 3, DiffMode::Dual);
        let x = DVector::from_column_slice(&[0.4, 1.1, -0.3]);
        let ab = lie_bracket(&a, &b, &x);
        let ba = lie_bracket(&b, &a, &x);
        assert!((ab + ba).amax() < 1e-9);
    }

    #[test]
    fn iterated_ad_zero_is_identity() {
        let a = expr_field(&["1", "0"], 2, DiffMode::Dual);
        let b = expr_field(&["x0", "x1"], 2, DiffMode::Dual);
        let ad0 = iterated_ad(&a, &b, 0);
        let x = DVector::from_column_slice(&[2.0, -1.0]);
        assert!((ad0.eval(&x) - b.eval(&x)).amax() < 1e-14);
    }

    #[test]
    fn linear_field_bracket_is_exact() {
        let t1 = Matrix3::new(0., 0., 0., 0., 0., -1., 0., 1., 0.);
        let t2 = Matrix3::new(0., 0., 1., 0., 0., 0., -1., 0., 0.);
        let t3 = Matrix3::new(0., -1., 0., 1., 0., 0., 0., 0., 0.);
        let a: Field = Arc::new(LinearField::new(t1, 0.3));
        let b: Field = Arc::new(LinearField::new(t2, -0.9));
        let br = bracket_field(&a, &b);
        let lin = br.as_linear().expect("closed under brackets");
        assert!((lin.mat - t3).abs().max() < 1e-15);
        assert_eq!(lin.rate, 0.0);
        // And the generic pointwise bracket agrees at a sample point.
        let mut x = DVector::zeros(10);
        for i in 0..3 {
            x[3 * i + i] = 1.0;
        }
        let generic = lie_bracket(&a, &b, &x);
        assert!((br.eval(&x) - generic).amax() < 1e-9);
    }

    #[test]
    fn hessian_contract_of_linear_field_is_zero() {
        let a = LinearField::new(Matrix3::identity(), 1.0);
        let x = DVector::from_fn(10, |i, _| i as f64 * 0.1);
        let p = DVector::from_fn(10, |i, _| 1.0 - i as f64 * 0.05);
        assert_eq!(a.hessian_contract(&x, &p).amax(), 0.0);
    }

    #[test]
    fn hessian_contract_fd_matches_known_quadratic() {
        // f(x) = (x0^2 * x1, 0): contraction with p = (p0, 0) gives
        // H = p0 * [[2 x1, 2 x0], [2 x0, 0]].
        let f = expr_field(&["x0^2*x1", "0"], 2, DiffMode::Dual);
        let x = DVector::from_column_slice(&[1.5, -0.8]);
        let p = DVector::from_column_slice(&[2.0, 0.0]);
        let h = f.hessian_contract(&x, &p);
        let expect = DMatrix::from_row_slice(2, 2, &[
            2.0 * x[1] * p[0],
            2.0 * x[0] * p[0],
            2.0 * x[0] * p[0],
            0.0,
        ]);
        assert!((h - expect).amax() < 1e-6);
    }
}
