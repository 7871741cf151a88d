//! Singular-curve diagnostics: the abnormal covector and the structural
//! hypotheses the index theory needs.
//!
//! The reference curve is *singular* when the differential of the endpoint
//! map at the zero control fails to be surjective; a covector annihilating
//! its image is the *abnormal covector* `λ`.  This module assembles that
//! differential on a control grid, extracts `λ` and its adjoint transport
//! `η(t)` along the curve, and reports four diagnostics:
//!
//! * `goh_residual` — how far `η(t)` is from annihilating `[X1, X2]` along
//!   the curve (the Goh condition);
//! * `legendre_min` — the minimum of `⟨η(t), [[X1, X2], X2](γ(t))⟩`, which
//!   must stay positive after sign normalization (strong generalized
//!   Legendre condition);
//! * `strictness_residual` — how far the curve is from admitting a
//!   normal multiplier (zero means strictly abnormal);
//! * `j_projection_norm` — the norm of the energy gradient projected onto
//!   the kernel of the endpoint differential, which must stay away from
//!   zero for the constrained index theory to apply.

use crate::flow::ReferenceCurve;
use crate::linalg;
use crate::vfcore::bracket_field;
use crate::{tol, Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Scalar diagnostics of the singular structure.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Diagnostics {
    pub goh_residual: f64,
    pub legendre_min: f64,
    pub strictness_residual: f64,
    pub j_projection_norm: f64,
}

/// Abnormal covector data along the reference curve.
#[derive(Debug, Clone)]
pub struct AbnormalData {
    pub s: f64,
    /// Corank of the endpoint differential (1 for everything downstream).
    pub corank: usize,
    /// Covector at `γ(s)` in tangent coordinates, unit norm,
    /// sign-normalized so the Legendre quantity is positive at `t = 0`.
    pub lambda_s: DVector<f64>,
    /// Ambient representative of `lambda_s` (lies in the tangent span).
    pub lambda_amb: DVector<f64>,
    /// Adjoint transport `η(t)` of the ambient covector on the eighth
    /// grid (`e = 0..=8n`, time `e·h/8`).
    pub eta_eighth: Vec<DVector<f64>>,
    /// Singular values of the endpoint differential, descending.
    pub singular_values: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl AbnormalData {
    /// `η` at the midpoint of cell `j`.
    pub fn eta_mid(&self, j: usize) -> &DVector<f64> {
        &self.eta_eighth[8 * j + 4]
    }

    /// `η` at half node `k`.
    pub fn eta_half(&self, k: usize) -> &DVector<f64> {
        &self.eta_eighth[4 * k]
    }
}

/// Discretized differential of the endpoint map at the zero control, in
/// tangent coordinates at `γ(s)`: column 0 is `X1(γ(s))` (the direction
/// multiplying the mean of `v1`), column `j+1` is the transport of
/// `X2(γ(t_j))` from the midpoint `t_j` to `s`, weighted by the cell width.
pub fn differential_matrix(rc: &ReferenceCurve) -> DMatrix<f64> {
    let frame = &rc.frame;
    let m = frame.intrinsic_dim;
    let n = rc.n;
    let h = rc.h();
    let end = rc.endpoint_state();
    let mut d = DMatrix::<f64>::zeros(m, n + 1);
    d.set_column(0, &frame.coords(end, &frame.x1.eval(end)));
    for j in 0..n {
        let g = rc.transport_to_end(2 * j + 1, &frame.x2.eval(rc.state_mid(j)));
        d.set_column(j + 1, &(frame.coords(end, &g) * h));
    }
    d
}

/// Extract the abnormal covector and all diagnostics.
///
/// Errors with [`Error::NotSingular`] when the endpoint differential is
/// surjective at the rank tolerance, and with [`Error::CorankTooHigh`]
/// when its corank exceeds one.
pub fn abnormal_covector(rc: &ReferenceCurve) -> Result<AbnormalData> {
    let frame = &rc.frame;
    let m = frame.intrinsic_dim;
    let d = differential_matrix(rc);
    let singular_values = linalg::singular_values(&d);
    let rank = linalg::rank_from_singulars(&singular_values, tol::RANK_REL_TOL);
    let corank = m - rank;
    if corank == 0 {
        return Err(Error::NotSingular);
    }
    if corank > 1 {
        return Err(Error::CorankTooHigh(corank));
    }
    let left_null = linalg::left_null_basis(&d, tol::RANK_REL_TOL);
    let mut lambda_s: DVector<f64> = left_null.column(0).into_owned();
    lambda_s /= lambda_s.norm();
    let end = rc.endpoint_state();
    let mut lambda_amb = frame.covector_ambient(end, &lambda_s);
    let mut eta = rc.adjoint_pass(&lambda_amb)?;

    // Bracket fields for the diagnostics.
    let e1 = bracket_field(&frame.x1, &frame.x2);
    let w = bracket_field(&e1, &frame.x2);

    // Sign normalization: the Legendre quantity at t = 0 must be positive.
    let l0 = eta[0].dot(&w.eval(rc.state_half(0)));
    if l0.abs() < 1e-12 {
        return Err(Error::Hypothesis(
            "Legendre quantity vanishes at t = 0; no sign normalization".into(),
        ));
    }
    if l0 < 0.0 {
        lambda_s = -lambda_s;
        lambda_amb = -lambda_amb;
        for v in &mut eta {
            *v = -v.clone();
        }
    }

    let mut goh_residual: f64 = 0.0;
    let mut legendre_min = f64::INFINITY;
    for k in 0..=2 * rc.n {
        let x = rc.state_half(k);
        let eta_k = &eta[4 * k];
        goh_residual = goh_residual.max(eta_k.dot(&e1.eval(x)).abs());
        legendre_min = legendre_min.min(eta_k.dot(&w.eval(x)));
    }

    let diagnostics = Diagnostics {
        goh_residual,
        legendre_min,
        strictness_residual: strictness_check(rc)?,
        j_projection_norm: j_projection(rc)?,
    };

    Ok(AbnormalData {
        s: rc.s,
        corank,
        lambda_s,
        lambda_amb,
        eta_eighth: eta,
        singular_values,
        diagnostics,
    })
}

/// Strict-abnormality residual.
///
/// Appends the energy-differential row to the endpoint differential and
/// measures the largest possible last-coordinate component over unit
/// covectors in the left null space of the extended matrix.  Zero means
/// every multiplier is purely abnormal.
pub fn strictness_check(rc: &ReferenceCurve) -> Result<f64> {
    let d = differential_matrix(rc);
    let m = d.nrows();
    let cols = d.ncols();
    let mut ext = DMatrix::<f64>::zeros(m + 1, cols);
    ext.view_mut((0, 0), (m, cols)).copy_from(&d);
    // The energy differential at the zero control is the mean of v1, which
    // is exactly the coefficient carried by column 0.
    ext[(m, 0)] = 1.0;
    let left_null = linalg::left_null_basis(&ext, tol::RANK_REL_TOL);
    let mut residual: f64 = 0.0;
    for c in 0..left_null.ncols() {
        residual = residual.hypot(left_null[(m, c)]);
    }
    Ok(residual)
}

/// Norm of the energy gradient projected onto the kernel of the endpoint
/// differential on the grid.
///
/// The projection certifies that the energy differential does not vanish
/// on the kernel.  The returned value is the Euclidean norm of the
/// projected grid vector; the corresponding control-space (L2) norm is
/// smaller by `sqrt(h)`, so the grid norm is the quantity compared
/// against the hypothesis floor.
pub fn j_projection(rc: &ReferenceCurve) -> Result<f64> {
    let frame = &rc.frame;
    let m = frame.intrinsic_dim;
    let n = rc.n;
    let h = rc.h();
    let end = rc.endpoint_state();
    // Full control-space differential: one column per (v1, v2) cell value.
    let x1_col = frame.coords(end, &frame.x1.eval(end)) * h;
    let mut d = DMatrix::<f64>::zeros(m, 2 * n);
    for j in 0..n {
        d.set_column(j, &x1_col);
        let g = rc.transport_to_end(2 * j + 1, &frame.x2.eval(rc.state_mid(j)));
        d.set_column(n + j, &(frame.coords(end, &g) * h));
    }
    let mut grad = DVector::<f64>::zeros(2 * n);
    for j in 0..n {
        grad[j] = 1.0;
    }
    let p = linalg::project_onto_null(&d, &grad, tol::RANK_REL_TOL);
    Ok(p.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vfcore::engel_so3r;

    fn data(s: f64, n: usize) -> AbnormalData {
        let frame = engel_so3r();
        let rc = ReferenceCurve::new(&frame, s, n).unwrap();
        abnormal_covector(&rc).unwrap()
    }

    #[test]
    fn builtin_frame_is_corank_one_with_clean_diagnostics() {
        let d = data(1.0, 50);
        assert_eq!(d.corank, 1);
        assert!(d.diagnostics.goh_residual < 1e-8, "goh {}", d.diagnostics.goh_residual);
        assert!(d.diagnostics.legendre_min > 0.0);
        // Closed form: the Legendre quantity is constant 1/(2*sqrt(6)).
        let l = 1.0 / (2.0 * 6.0_f64.sqrt());
        assert!((d.diagnostics.legendre_min - l).abs() < 1e-7);
        assert!(d.diagnostics.strictness_residual < 1e-8);
        assert!(d.diagnostics.j_projection_norm > 0.1);
    }

    #[test]
    fn covector_matches_closed_form_in_tangent_coordinates() {
        let d = data(1.0, 40);
        let r3 = 3.0_f64.sqrt();
        let oracle = DVector::from_column_slice(&[-1.0 / r3, -1.0 / r3, 0.0, 1.0 / r3]);
        assert!((d.lambda_s - oracle).amax() < 1e-6);
    }

    #[test]
    fn eta_annihilates_the_distribution_along_the_curve() {
        let frame = engel_so3r();
        let rc = ReferenceCurve::new(&frame, 2.0, 40).unwrap();
        let d = abnormal_covector(&rc).unwrap();
        for k in 0..=2 * rc.n {
            let x = rc.state_half(k);
            let eta = d.eta_half(k);
            assert!(eta.dot(&frame.x1.eval(x)).abs() < 1e-8);
            assert!(eta.dot(&frame.x2.eval(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn corank_is_stable_under_refinement() {
        for n in [25, 50, 100] {
            assert_eq!(data(1.0, n).corank, 1);
        }
    }

    #[test]
    fn rank_does_not_change_with_duplicate_columns() {
        let frame = engel_so3r();
        let a = differential_matrix(&ReferenceCurve::new(&frame, 1.0, 30).unwrap());
        let b = differential_matrix(&ReferenceCurve::new(&frame, 1.0, 60).unwrap());
        let ra = linalg::rank_from_singulars(&linalg::singular_values(&a), tol::RANK_REL_TOL);
        let rb = linalg::rank_from_singulars(&linalg::singular_values(&b), tol::RANK_REL_TOL);
        assert_eq!(ra, rb);
        assert_eq!(ra, 3);
    }

    #[test]
    fn projection_is_idempotent_and_gradient_has_unit_norm_at_s_one() {
        let frame = engel_so3r();
        let rc = ReferenceCurve::new(&frame, 1.0, 40).unwrap();
        // Projecting the already-projected vector changes nothing.
        let m = frame.intrinsic_dim;
        let n = rc.n;
        let h = rc.h();
        let end = rc.endpoint_state();
        let x1_col = frame.coords(end, &frame.x1.eval(end)) * h;
        let mut dmat = DMatrix::<f64>::zeros(m, 2 * n);
        for j in 0..n {
            dmat.set_column(j, &x1_col);
            let g = rc.transport_to_end(2 * j + 1, &frame.x2.eval(rc.state_mid(j)));
            dmat.set_column(n + j, &(frame.coords(end, &g) * h));
        }
        let mut grad = DVector::<f64>::zeros(2 * n);
        for j in 0..n {
            grad[j] = 1.0;
        }
        // The gradient control (v1 ≡ 1, v2 ≡ 0) has L2 norm sqrt(s) = 1.
        assert!(((h * grad.norm_squared()).sqrt() - 1.0).abs() < 1e-12);
        let p1 = linalg::project_onto_null(&dmat, &grad, tol::RANK_REL_TOL);
        let p2 = linalg::project_onto_null(&dmat, &p1, tol::RANK_REL_TOL);
        assert!((p1 - p2).amax() < 1e-10);
    }
}
