//! Conjugate-time detection by Jacobi shooting and closed-form wedge
//! indicators.
//!
//! For a regular structure the top iterated bracket of the frame decomposes
//! along the reference curve as
//!
//! ```text
//! (ad X1)^m X2 = β X1 + Σ_{i<m} αⁱ (ad X1)ⁱ X2,    m = intrinsic_dim − 2,
//! ```
//!
//! with scalar structural functions `β, αⁱ` recovered pointwise by least
//! squares ([`structural_functions`]).  They close the variational problem
//! into a small linear ODE system: for each admissible boundary covector
//! `θ₀` the system is integrated backward from zero terminal data, driven
//! by the directly transported pairings `ζ⁽ⁱ⁾(t) = ⟨θ₀, (adX1)ⁱX2
//! transported to γ(s)⟩`, and a horizon `s` is conjugate exactly when the
//! matrix of boundary values at `t = 0` is singular
//! ([`shooting_determinant`]).  On 4-dimensional (Engel) structures the
//! same condition collapses to a closed-form 4×4 wedge determinant
//! ([`engel_indicator`]).  [`locate_zeros`] turns any scalar indicator
//! into located zeros with multiplicities, and [`conjugate_points`]
//! dispatches between the detection routes (including the independent
//! inertia-jump route of [`crate::hessian`]).

use crate::abnormal::{abnormal_covector, AbnormalData};
use crate::flow::ReferenceCurve;
use crate::linalg;
use crate::vfcore::{bracket_field, iterated_ad, Field, Frame};
use crate::{tol, Error, Result, Variant};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// Structural functions of a regular structure, tabulated on the half grid.
#[derive(Debug, Clone)]
pub struct StructuralFunctions {
    /// Structural order `m = intrinsic_dim − 2`.
    pub m: usize,
    /// Half-grid times `t_k = k h/2`, `k = 0..=2n`.
    pub t: Vec<f64>,
    /// `alpha[i][k]`: the coefficient of `(ad X1)ⁱ X2` at half node `k`.
    pub alpha: Vec<Vec<f64>>,
    /// `beta[k]`: the coefficient of `X1` at half node `k`.
    pub beta: Vec<f64>,
    /// Relative least-squares residual of the decomposition per node.
    pub residual: Vec<f64>,
    /// Largest entry of [`StructuralFunctions::residual`].
    pub max_residual: f64,
    /// Smallest relative singular value of the bracket basis over the
    /// grid (the margin of the independence hypothesis).
    pub min_independence: f64,
}

/// One assembled shooting problem: boundary covector basis, boundary
/// matrix, and its degeneracy data.
#[derive(Debug, Clone)]
pub struct ShootingProblem {
    pub variant: Variant,
    pub s: f64,
    /// Columns: covectors `θ₀` in tangent coordinates at `γ(s)`,
    /// orthonormal and orthogonal to the annihilated directions of the
    /// variant (and to `λ(s)`, which carries no boundary information).
    pub theta_basis: DMatrix<f64>,
    /// Boundary values at `t = 0` of the integrated components, one row
    /// per basis covector.
    pub boundary_matrix: DMatrix<f64>,
    /// Determinant of the boundary matrix — the conjugate-point indicator.
    pub det: f64,
    /// Rank deficiency of the boundary matrix at the multiplicity
    /// tolerance (0 away from conjugate times).
    pub rank_deficiency: usize,
    /// Largest relative residual of the ζ-table consistency check.
    pub zeta_residual: f64,
}

/// A located zero of a conjugate-point indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero {
    pub s: f64,
    pub multiplicity: usize,
    /// True when the indicator touches zero without changing sign
    /// (even-order contact located through a minimum of the magnitude).
    pub tangential: bool,
}

/// Conjugate-point detection route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionMethod {
    /// Jumps of the negative inertia count of the constrained Hessian.
    Hessian,
    /// Sign changes of the shooting boundary determinant.
    Jacobi,
    /// Sign changes of the closed-form Engel wedge determinant.
    Engel,
}

impl DetectionMethod {
    /// Short lowercase label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            DetectionMethod::Hessian => "hessian",
            DetectionMethod::Jacobi => "jacobi",
            DetectionMethod::Engel => "engel",
        }
    }
}

impl std::fmt::Display for DetectionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Recover the structural functions on the half grid of the curve.
///
/// At each node the top bracket `(ad X1)^m X2` is decomposed over the
/// basis `{X1, X2, (ad X1) X2, .., (ad X1)^{m−1} X2}` in tangent
/// coordinates by least squares.  Fails when the basis loses independence
/// or the decomposition leaves a residual — either way the structure is
/// not regular and the shooting machinery does not apply to it.
pub fn structural_functions(rc: &ReferenceCurve) -> Result<StructuralFunctions> {
    let frame = &rc.frame;
    let dim = frame.intrinsic_dim;
    if dim < 3 {
        return Err(Error::MethodInapplicable(format!(
            "structural decomposition needs intrinsic dimension >= 3, frame has {dim}"
        )));
    }
    let m = dim - 2;
    let ads: Vec<Field> =
        (0..=m).map(|i| iterated_ad(&frame.x1, &frame.x2, i)).collect();

    let nodes = 2 * rc.n + 1;
    let mut t = Vec::with_capacity(nodes);
    let mut alpha = vec![Vec::with_capacity(nodes); m];
    let mut beta = Vec::with_capacity(nodes);
    let mut residual = Vec::with_capacity(nodes);
    let mut min_independence = f64::INFINITY;

    for k in 0..nodes {
        let x = rc.state_half(k);
        let mut basis = DMatrix::<f64>::zeros(dim, m + 1);
        basis.set_column(0, &frame.coords(x, &frame.x1.eval(x)));
        for (i, ad) in ads.iter().take(m).enumerate() {
            basis.set_column(i + 1, &frame.coords(x, &ad.eval(x)));
        }
        let svals = linalg::singular_values(&basis);
        let spread = svals.last().copied().unwrap_or(0.0)
            / svals.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
        if linalg::rank_from_singulars(&svals, tol::RANK_REL_TOL) < m + 1 {
            return Err(Error::Hypothesis(format!(
                "bracket basis {{X1, X2, .., (adX1)^{} X2}} loses independence at t = {:.6} \
                 (relative smallest singular value {spread:.3e})",
                m - 1,
                rc.half_time(k)
            )));
        }
        min_independence = min_independence.min(spread);

        let target = frame.coords(x, &ads[m].eval(x));
        let coef = linalg::lstsq(&basis, &target, tol::RANK_REL_TOL);
        let res = linalg::lstsq_residual(&basis, &target, tol::RANK_REL_TOL)
            / target.norm().max(1.0);

        t.push(rc.half_time(k));
        beta.push(coef[0]);
        for i in 0..m {
            alpha[i].push(coef[i + 1]);
        }
        residual.push(res);
    }

    let max_residual = residual.iter().fold(0.0_f64, |a, &r| a.max(r));
    if max_residual > tol::STRUCTURAL_RESIDUAL_TOL {
        return Err(Error::Hypothesis(format!(
            "structural decomposition leaves residual {max_residual:.3e} \
             (tolerance {:.1e}); the structure is not regular",
            tol::STRUCTURAL_RESIDUAL_TOL
        )));
    }

    Ok(StructuralFunctions { m, t, alpha, beta, residual, max_residual, min_independence })
}

/// Assemble and solve the shooting problem for one variant.
///
/// The boundary covector basis is an orthonormal complement of `λ(s)` and
/// `X2(γ(s))` (plus `X1(γ(s))` for the endpoint variant) in tangent
/// coordinates.  Per basis covector the tables `ζ⁽ⁱ⁾` are evaluated by
/// direct pairing with the transported iterated brackets — the structural
/// ODE row that would otherwise produce them is demoted to a consistency
/// check — and the `z`-system is integrated backward from zero terminal
/// data by cell-wise Runge–Kutta with stages on the half grid.
pub fn shooting_problem(
    rc: &ReferenceCurve,
    ab: &AbnormalData,
    sf: &StructuralFunctions,
    variant: Variant,
) -> Result<ShootingProblem> {
    let frame = &rc.frame;
    let dim = frame.intrinsic_dim;
    let m = sf.m;
    if m < 2 {
        return Err(Error::MethodInapplicable(format!(
            "shooting needs at least two structural levels (intrinsic dimension >= 4), \
             this structure has {m}"
        )));
    }
    let n = rc.n;
    let h = rc.h();
    let nodes = 2 * n + 1;
    let end = rc.endpoint_state();

    let ads: Vec<Field> =
        (0..=m).map(|i| iterated_ad(&frame.x1, &frame.x2, i)).collect();

    // Legendre table l(t) = ⟨η, [[X1,X2],X2]⟩ on the half grid; the third
    // system row divides by it, so it must stay away from zero.
    let w_field = bracket_field(&ads[1], &frame.x2);
    let ell: Vec<f64> = (0..nodes)
        .map(|k| ab.eta_half(k).dot(&w_field.eval(rc.state_half(k))))
        .collect();
    let ell_max = ell.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    for (k, &v) in ell.iter().enumerate() {
        if v <= ell_max * 1e-8 {
            return Err(Error::Hypothesis(format!(
                "Legendre quantity vanishes at t = {:.6} (l = {v:.3e}); \
                 the shooting system is singular",
                rc.half_time(k)
            )));
        }
    }

    // Higher bracket tables l⁽ʲ⁾ = ⟨η, [(adX1)X2, (adX1)ʲX2]⟩ entering the
    // third row for structural order above two.
    let mut lj = vec![vec![0.0_f64; nodes]; m];
    for (j, table) in lj.iter_mut().enumerate().take(m).skip(2) {
        let bf = bracket_field(&ads[1], &ads[j]);
        for (k, slot) in table.iter_mut().enumerate() {
            *slot = ab.eta_half(k).dot(&bf.eval(rc.state_half(k)));
        }
    }

    // Transported iterated brackets in tangent coordinates at γ(s).
    let vc: Vec<Vec<DVector<f64>>> = ads
        .iter()
        .map(|ad| {
            (0..nodes)
                .map(|k| {
                    let v = rc.transport_to_end(k, &ad.eval(rc.state_half(k)));
                    frame.coords(end, &v)
                })
                .collect()
        })
        .collect();
    let x1c = frame.coords(end, &frame.x1.eval(end));
    let x2c = frame.coords(end, &frame.x2.eval(end));

    let span = match variant {
        Variant::F => {
            linalg::from_columns(dim, &[ab.lambda_s.clone(), x1c.clone(), x2c.clone()])
        }
        Variant::Extended => linalg::from_columns(dim, &[ab.lambda_s.clone(), x2c.clone()]),
    };
    let mut theta = linalg::orthonormal_complement(&span);
    let expect = match variant {
        Variant::F => m - 1,
        Variant::Extended => m,
    };
    if theta.ncols() != expect {
        return Err(Error::Degenerate(format!(
            "boundary covector space has dimension {} (expected {expect}); \
             the frame directions at γ(s) are degenerate",
            theta.ncols()
        )));
    }
    // Canonicalize the orientation of the full frame [span | theta]: the
    // determinant of the boundary matrix changes sign with the orientation
    // of the theta basis, so pinning the orientation makes it a continuous
    // function of the horizon (the spanning directions themselves vary
    // continuously once the covector sign is fixed by the Legendre
    // convention).
    {
        let span_on = linalg::orthonormalize(&span);
        let mut full = DMatrix::<f64>::zeros(dim, span_on.ncols() + theta.ncols());
        full.view_mut((0, 0), (dim, span_on.ncols())).copy_from(&span_on);
        full.view_mut((0, span_on.ncols()), (dim, theta.ncols())).copy_from(&theta);
        if full.is_square() && full.determinant() < 0.0 {
            let last = theta.ncols() - 1;
            let flipped = -theta.column(last);
            theta.set_column(last, &flipped);
        }
    }

    // State layout: index 0 = z^f, index 1+i = zⁱ for i = 0..m−1.
    let dim_z = m + 1;
    let mut mtx = DMatrix::<f64>::zeros(expect, expect);
    let mut worst = 0.0_f64;

    for d in 0..expect {
        let th = theta.column(d);
        let zeta: Vec<Vec<f64>> = vc
            .iter()
            .map(|col| col.iter().map(|v| th.dot(v)).collect())
            .collect();

        // The structural ODE row predicts the top table from the lower
        // ones; the direct pairings must reproduce it.
        let thx1 = th.dot(&x1c);
        let scale = zeta[m].iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        for k in 0..nodes {
            let mut pred = sf.beta[k] * thx1;
            for i in 0..m {
                pred += sf.alpha[i][k] * zeta[i][k];
            }
            worst = worst.max((zeta[m][k] - pred).abs() / scale);
        }

        let deriv = |k: usize, z: &DVector<f64>| -> DVector<f64> {
            let top = z[dim_z - 1];
            let mut dz = DVector::<f64>::zeros(dim_z);
            dz[0] = -sf.beta[k] * top;
            dz[1] = -sf.alpha[0][k] * top;
            let mut drive = zeta[1][k];
            for j in 2..m {
                drive += lj[j][k] * z[1 + j];
            }
            dz[2] = -sf.alpha[1][k] * top + drive / ell[k];
            for j in 2..m {
                dz[1 + j] = -sf.alpha[j][k] * top - z[j];
            }
            dz
        };

        // Backward RK4 over the cells, all stages on cached half nodes.
        let mut z = DVector::<f64>::zeros(dim_z);
        for cell in (0..n).rev() {
            let f1 = deriv(2 * cell + 2, &z);
            let f2 = deriv(2 * cell + 1, &(&z - &f1 * (h / 2.0)));
            let f3 = deriv(2 * cell + 1, &(&z - &f2 * (h / 2.0)));
            let f4 = deriv(2 * cell, &(&z - &f3 * h));
            z -= (f1 + f2 * 2.0 + f3 * 2.0 + f4) * (h / 6.0);
        }

        match variant {
            Variant::F => {
                for j in 1..m {
                    mtx[(d, j - 1)] = z[1 + j];
                }
            }
            Variant::Extended => {
                mtx[(d, 0)] = z[0];
                for j in 1..m {
                    mtx[(d, j)] = z[1 + j];
                }
            }
        }
    }

    if worst > tol::ZETA_CONSISTENCY_TOL {
        return Err(Error::Numerical(format!(
            "ζ-table consistency residual {worst:.3e} exceeds {:.1e}; transported \
             tables and the structural decomposition disagree",
            tol::ZETA_CONSISTENCY_TOL
        )));
    }

    let det = mtx.clone().lu().determinant();
    let svals = linalg::singular_values(&mtx);
    let rank_deficiency =
        expect - linalg::rank_from_singulars(&svals, tol::MULTIPLICITY_REL_TOL);

    Ok(ShootingProblem {
        variant,
        s: rc.s,
        theta_basis: theta,
        boundary_matrix: mtx,
        det,
        rank_deficiency,
        zeta_residual: worst,
    })
}

/// Boundary determinant and rank deficiency of the shooting problem.
pub fn shooting_determinant(
    rc: &ReferenceCurve,
    ab: &AbnormalData,
    sf: &StructuralFunctions,
    variant: Variant,
) -> Result<(f64, usize)> {
    let sp = shooting_problem(rc, ab, sf, variant)?;
    Ok((sp.det, sp.rank_deficiency))
}

/// Closed-form wedge indicator on a 4-dimensional (Engel) structure.
///
/// The conjugate-point condition reduces to the vanishing of a wedge of
/// three tangent vectors at `γ(s)`; appending the transversal bracket
/// `W = [[X1,X2],X2]` scalarizes it into a sign-changing 4×4 determinant.
/// The wedge factors are `X1, X2` and the transported `g_0^s` for the
/// endpoint variant; `X2`, `g_0^s` and the weighted transport integral
/// `Ψ = ∫ β_t exp(−∫₀ᵗ α¹) g_t^s dt` for the extended variant.
pub fn engel_indicator(
    rc: &ReferenceCurve,
    _ab: &AbnormalData,
    sf: &StructuralFunctions,
    variant: Variant,
) -> Result<f64> {
    let frame = &rc.frame;
    if frame.intrinsic_dim != 4 {
        return Err(Error::MethodInapplicable(format!(
            "closed-form wedge indicators need an Engel (intrinsic dimension 4) \
             structure, frame has {}",
            frame.intrinsic_dim
        )));
    }
    let end = rc.endpoint_state();
    let n = rc.n;
    let h = rc.h();

    let e1 = bracket_field(&frame.x1, &frame.x2);
    let w_field = bracket_field(&e1, &frame.x2);
    let x1c = frame.coords(end, &frame.x1.eval(end));
    let x2c = frame.coords(end, &frame.x2.eval(end));
    let wc = frame.coords(end, &w_field.eval(end));
    let g0 = frame.coords(end, &rc.transport_to_end(0, &frame.x2.eval(rc.state_half(0))));

    let col_scale = x1c.norm().max(x2c.norm()).max(g0.norm()).max(1.0);
    if wc.norm() <= 1e-10 * col_scale {
        return Err(Error::Degenerate(
            "transversal bracket [[X1,X2],X2] degenerates at the endpoint".into(),
        ));
    }

    let wedge = match variant {
        Variant::F => linalg::from_columns(4, &[x1c, x2c, g0, wc]),
        Variant::Extended => {
            // Trapezoidal cumulative ∫₀ᵗ α¹ on the half grid, then
            // per-cell Simpson for the weighted transport integral.
            let nodes = 2 * n + 1;
            let mut cum = vec![0.0_f64; nodes];
            for k in 1..nodes {
                cum[k] = cum[k - 1] + (h / 4.0) * (sf.alpha[1][k - 1] + sf.alpha[1][k]);
            }
            let integrand: Vec<DVector<f64>> = (0..nodes)
                .map(|k| {
                    let g = rc.transport_to_end(k, &frame.x2.eval(rc.state_half(k)));
                    frame.coords(end, &g) * (sf.beta[k] * (-cum[k]).exp())
                })
                .collect();
            let mut psi = DVector::<f64>::zeros(4);
            for j in 0..n {
                psi += (&integrand[2 * j] + &integrand[2 * j + 1] * 4.0
                    + &integrand[2 * j + 2])
                    * (h / 6.0);
            }
            linalg::from_columns(4, &[x2c, g0, psi, wc])
        }
    };
    Ok(wedge.lu().determinant())
}

/// End-to-end shooting determinant at one horizon.
pub fn shooting_at(frame: &Frame, s: f64, n: usize, variant: Variant) -> Result<(f64, usize)> {
    let rc = ReferenceCurve::new(frame, s, n)?;
    let ab = abnormal_covector(&rc)?;
    let sf = structural_functions(&rc)?;
    shooting_determinant(&rc, &ab, &sf, variant)
}

/// End-to-end Engel wedge indicator at one horizon.
pub fn engel_at(frame: &Frame, s: f64, n: usize, variant: Variant) -> Result<f64> {
    let rc = ReferenceCurve::new(frame, s, n)?;
    let ab = abnormal_covector(&rc)?;
    let sf = structural_functions(&rc)?;
    engel_indicator(&rc, &ab, &sf, variant)
}

/// Locate the zeros of a scalar indicator on `[lo, hi]`.
///
/// Scans with the given step, bisects every sign change to `tol`, and
/// additionally investigates same-sign local minima of the magnitude: a
/// minimum that refines to below [`tol::TANGENCY_REL_TOL`] times the scan
/// scale is reported as a tangential (even-order) zero.  Simple sign
/// changes carry multiplicity 1, tangential zeros 2; use the shooting
/// rank deficiency (as [`conjugate_points`] does) for a structural
/// multiplicity.  Indicator evaluations run in parallel.
pub fn locate_zeros<I>(
    indicator: &I,
    lo: f64,
    hi: f64,
    scan_step: f64,
    tol_: f64,
) -> Result<Vec<Zero>>
where
    I: Fn(f64) -> Result<f64> + Sync,
{
    if !(hi > lo && scan_step > 0.0 && tol_ > 0.0) {
        return Err(Error::Grid("invalid scan parameters".into()));
    }
    let steps = ((hi - lo) / scan_step).ceil() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| (lo + i as f64 * scan_step).min(hi)).collect();
    let values: Vec<f64> =
        grid.par_iter().map(|&s| indicator(s)).collect::<Result<Vec<_>>>()?;
    let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::Degenerate(
            "indicator vanishes identically on the scan grid".into(),
        ));
    }

    let mut zeros: Vec<Zero> = Vec::new();

    // Exact grid hits (measure zero, but cheap to honor).
    for i in 0..grid.len() {
        if values[i] == 0.0 {
            let left = if i > 0 { values[i - 1] } else { 0.0 };
            let right = if i + 1 < values.len() { values[i + 1] } else { 0.0 };
            let tangential = left * right > 0.0;
            zeros.push(Zero {
                s: grid[i],
                multiplicity: if tangential { 2 } else { 1 },
                tangential,
            });
        }
    }

    // Sign changes, bisected in parallel.
    let brackets: Vec<(f64, f64, f64)> = (0..grid.len() - 1)
        .filter(|&i| values[i] * values[i + 1] < 0.0)
        .map(|i| (grid[i], grid[i + 1], values[i]))
        .collect();
    let bisected: Vec<f64> = brackets
        .par_iter()
        .map(|&(mut a, mut b, mut fa)| -> Result<f64> {
            while b - a > tol_ {
                let mid = 0.5 * (a + b);
                let fm = indicator(mid)?;
                if fm == 0.0 {
                    return Ok(mid);
                }
                if fa * fm < 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            Ok(0.5 * (a + b))
        })
        .collect::<Result<Vec<_>>>()?;
    zeros.extend(bisected.into_iter().map(|s| Zero { s, multiplicity: 1, tangential: false }));

    // Tangential zeros: same-sign local minima of the magnitude, refined
    // by trisection and accepted only when the magnitude actually reaches
    // the tangency threshold.
    let investigate = 0.05 * scale;
    let accept = tol::TANGENCY_REL_TOL * scale;
    let candidates: Vec<usize> = (1..grid.len().saturating_sub(1))
        .filter(|&i| {
            let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
            a * b > 0.0
                && b * c > 0.0
                && b.abs() <= a.abs()
                && b.abs() <= c.abs()
                && b.abs() < investigate
        })
        .collect();
    let refined: Vec<Option<Zero>> = candidates
        .par_iter()
        .map(|&i| -> Result<Option<Zero>> {
            let (mut a, mut b) = (grid[i - 1], grid[i + 1]);
            while b - a > tol_ {
                let m1 = a + (b - a) / 3.0;
                let m2 = b - (b - a) / 3.0;
                if indicator(m1)?.abs() <= indicator(m2)?.abs() {
                    b = m2;
                } else {
                    a = m1;
                }
            }
            let s_star = 0.5 * (a + b);
            Ok((indicator(s_star)?.abs() < accept)
                .then_some(Zero { s: s_star, multiplicity: 2, tangential: true }))
        })
        .collect::<Result<Vec<_>>>()?;
    zeros.extend(refined.into_iter().flatten());

    zeros.sort_by(|x, y| x.s.partial_cmp(&y.s).unwrap());
    zeros.dedup_by(|b, a| (b.s - a.s).abs() <= 2.0 * tol_);
    Ok(zeros)
}

/// Locate the conjugate points of one variant on `[lo, hi]` by the chosen
/// detection route; `n` is the grid resolution per indicator evaluation
/// and `tol` the localization tolerance.  For the shooting-based routes
/// the reported multiplicity is the rank deficiency of the shooting
/// matrix at the located zero when that deficiency is positive.
pub fn conjugate_points(
    frame: &Frame,
    variant: Variant,
    method: DetectionMethod,
    lo: f64,
    hi: f64,
    scan_step: f64,
    n: usize,
    tol_: f64,
) -> Result<Vec<Zero>> {
    match method {
        DetectionMethod::Hessian => {
            let zs = crate::hessian::hessian_zeros(frame, lo, hi, scan_step, n, variant, tol_)?;
            Ok(zs
                .into_iter()
                .map(|(s, multiplicity)| Zero { s, multiplicity, tangential: false })
                .collect())
        }
        DetectionMethod::Jacobi => {
            let ind = |s: f64| shooting_at(frame, s, n, variant).map(|(d, _)| d);
            let mut zs = locate_zeros(&ind, lo, hi, scan_step, tol_)?;
            attach_shooting_multiplicity(frame, n, variant, &mut zs);
            Ok(zs)
        }
        DetectionMethod::Engel => {
            let ind = |s: f64| engel_at(frame, s, n, variant);
            let mut zs = locate_zeros(&ind, lo, hi, scan_step, tol_)?;
            attach_shooting_multiplicity(frame, n, variant, &mut zs);
            Ok(zs)
        }
    }
}

/// Overwrite located multiplicities with the shooting rank deficiency
/// where it is positive; keep the scan's answer where the shooting
/// machinery is unavailable or reports full rank.
fn attach_shooting_multiplicity(frame: &Frame, n: usize, variant: Variant, zeros: &mut [Zero]) {
    for z in zeros.iter_mut() {
        if let Ok((_, deficiency)) = shooting_at(frame, z.s, n, variant) {
            if deficiency > 0 {
                z.multiplicity = deficiency;
            }
        }
    }
}

/// A zero entry of an indicator profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileZero {
    pub s: f64,
    pub multiplicity: usize,
    pub tangential: bool,
    pub variant: Variant,
}

/// Sampled conjugate-point indicators for both variants, with the located
/// zeros of each.
#[derive(Debug, Clone)]
pub struct IndicatorProfile {
    /// Sample horizons.
    pub s: Vec<f64>,
    /// Endpoint-variant indicator values.
    pub a_f: Vec<f64>,
    /// Extended-variant indicator values.
    pub a_ext: Vec<f64>,
    /// Zeros of both variants, merged in increasing order.
    pub zeros: Vec<ProfileZero>,
    /// Route that produced the values and zeros.
    pub method: DetectionMethod,
}

/// Indicator values for both variants at one horizon: the Engel wedge
/// determinants on 4-dimensional structures, the shooting boundary
/// determinants otherwise.
pub fn indicator_pair(frame: &Frame, s: f64, n: usize) -> Result<(f64, f64)> {
    let rc = ReferenceCurve::new(frame, s, n)?;
    let ab = abnormal_covector(&rc)?;
    let sf = structural_functions(&rc)?;
    if frame.intrinsic_dim == 4 {
        Ok((
            engel_indicator(&rc, &ab, &sf, Variant::F)?,
            engel_indicator(&rc, &ab, &sf, Variant::Extended)?,
        ))
    } else {
        Ok((
            shooting_determinant(&rc, &ab, &sf, Variant::F)?.0,
            shooting_determinant(&rc, &ab, &sf, Variant::Extended)?.0,
        ))
    }
}

/// Sample both indicators on `lo, lo + step, ..` up to `hi` and locate
/// their zeros at the same resolution.  A step larger than the range
/// produces the single sample at `lo`.
pub fn indicator_profile(
    frame: &Frame,
    lo: f64,
    hi: f64,
    step: f64,
    n: usize,
) -> Result<IndicatorProfile> {
    if !(step > 0.0) || !(hi >= lo) {
        return Err(Error::Grid("profile range must satisfy hi >= lo with step > 0".into()));
    }
    let mut grid = Vec::new();
    let mut i = 0usize;
    loop {
        let s = lo + i as f64 * step;
        if s > hi + 1e-12 {
            break;
        }
        grid.push(s);
        i += 1;
    }
    let pairs: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&s| indicator_pair(frame, s, n))
        .collect::<Result<Vec<_>>>()?;

    let method = if frame.intrinsic_dim == 4 {
        DetectionMethod::Engel
    } else {
        DetectionMethod::Jacobi
    };
    let mut zeros = Vec::new();
    if hi > lo {
        for variant in [Variant::F, Variant::Extended] {
            for z in
                conjugate_points(frame, variant, method, lo, hi, step, n, tol::ZERO_LOCATION_TOL)?
            {
                zeros.push(ProfileZero {
                    s: z.s,
                    multiplicity: z.multiplicity,
                    tangential: z.tangential,
                    variant,
                });
            }
        }
        zeros.sort_by(|x, y| x.s.partial_cmp(&y.s).unwrap());
    }

    Ok(IndicatorProfile {
        s: grid,
        a_f: pairs.iter().map(|p| p.0).collect(),
        a_ext: pairs.iter().map(|p| p.1).collect(),
        zeros,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vfcore::Frame;
    use std::f64::consts::PI;

    fn builtin() -> std::sync::Arc<Frame> {
        Frame::builtin("engel-so3r").unwrap()
    }

    fn martinet() -> std::sync::Arc<Frame> {
        Frame::from_json_str(
            r#"{
                "ambient_dim": 3,
                "fields": { "X1": ["0", "1", "0.5*x0*x0"], "X2": ["1", "0", "0"] },
                "base_point": [0, 0, 0],
                "tangent_frame": "identity"
            }"#,
        )
        .unwrap()
    }

    /// Closed-form extended-variant indicator of the builtin example.
    fn a_ext(s: f64) -> f64 {
        s * s.sin() + 2.0 * (s.cos() - 1.0)
    }

    #[test]
    fn structural_functions_match_the_builtin_constants() {
        let frame = builtin();
        let rc = ReferenceCurve::new(&frame, 2.0, 40).unwrap();
        let sf = structural_functions(&rc).unwrap();
        assert_eq!(sf.m, 2);
        for k in 0..sf.t.len() {
            assert!((sf.alpha[0][k] + 1.0).abs() < 1e-8, "alpha0 = {}", sf.alpha[0][k]);
            assert!(sf.alpha[1][k].abs() < 1e-8, "alpha1 = {}", sf.alpha[1][k]);
            assert!((sf.beta[k] - 0.5).abs() < 1e-8, "beta = {}", sf.beta[k]);
        }
        assert!(sf.max_residual < 1e-10, "residual = {:.3e}", sf.max_residual);
        assert!(sf.min_independence > 1e-3);
    }

    #[test]
    fn dependent_bracket_basis_fails_the_independence_check() {
        // Commuting fields: {X1, X2, [X1, X2]} has rank two everywhere.
        let frame = Frame::from_json_str(
            r#"{
                "ambient_dim": 4,
                "fields": { "X1": ["1", "0", "0", "0"], "X2": ["0", "1", "0", "0"] },
                "base_point": [0, 0, 0, 0],
                "tangent_frame": "identity"
            }"#,
        )
        .unwrap();
        let rc = ReferenceCurve::new(&frame, 1.0, 10).unwrap();
        let err = structural_functions(&rc).unwrap_err();
        assert!(err.to_string().contains("independence"), "got: {err}");
        assert!(err.is_hypothesis());
    }

    #[test]
    fn shooting_is_inapplicable_below_two_structural_levels() {
        let frame = martinet();
        let err = shooting_at(&frame, 1.0, 30, Variant::F).unwrap_err();
        assert!(matches!(err, Error::MethodInapplicable(_)), "got: {err}");
        let err = engel_at(&frame, 1.0, 30, Variant::F).unwrap_err();
        assert!(matches!(err, Error::MethodInapplicable(_)), "got: {err}");
    }

    #[test]
    fn case_a_determinant_is_proportional_to_sin() {
        // On the builtin frame the endpoint-variant boundary matrix is the
        // 1×1 value ⟨θ, e1⟩ (ζ(0) − ζ(s)) / l with ζ(t) = −sin(s−t)⟨θ, e1⟩,
        // giving |det| = sin(s) ‖e1‖² / (2 l ‖e1‖) = √6 sin(s) for a unit θ.
        let frame = builtin();
        let expected = 6.0_f64.sqrt();
        let mut ratios = Vec::new();
        for &s in &[1.0, 2.0, 2.5] {
            let (det, deficiency) = shooting_at(&frame, s, 40, Variant::F).unwrap();
            assert_eq!(deficiency, 0, "full rank away from conjugate times");
            ratios.push(det / s.sin());
        }
        for r in &ratios {
            assert!(
                (r.abs() - expected).abs() < 1e-5 * expected,
                "|ratio| = {}, expected {expected}",
                r.abs()
            );
            assert!(
                (r - ratios[0]).abs() < 1e-5 * expected,
                "ratio drifts across horizons: {ratios:?}"
            );
        }
    }

    #[test]
    fn case_b_determinant_matches_the_closed_form() {
        // |det| = (3√3/2) |s sin s + 2(cos s − 1)| for an orthonormal θ
        // basis on the builtin frame.
        let frame = builtin();
        let expected = 1.5 * 3.0_f64.sqrt();
        let mut ratios = Vec::new();
        for &s in &[2.0, 5.0] {
            let (det, deficiency) = shooting_at(&frame, s, 40, Variant::Extended).unwrap();
            assert_eq!(deficiency, 0);
            ratios.push(det / a_ext(s));
        }
        assert!(
            (ratios[0].abs() - expected).abs() < 1e-5 * expected,
            "|ratio| = {}, expected {expected}",
            ratios[0].abs()
        );
        assert!((ratios[0] - ratios[1]).abs() < 1e-5 * expected, "{ratios:?}");
    }

    #[test]
    fn zeta_tables_satisfy_the_structural_row() {
        let frame = builtin();
        let rc = ReferenceCurve::new(&frame, 3.0, 40).unwrap();
        let ab = abnormal_covector(&rc).unwrap();
        let sf = structural_functions(&rc).unwrap();
        for variant in [Variant::F, Variant::Extended] {
            let sp = shooting_problem(&rc, &ab, &sf, variant).unwrap();
            assert!(sp.zeta_residual < tol::ZETA_CONSISTENCY_TOL);
        }
    }

    #[test]
    fn engel_indicators_match_the_closed_forms() {
        // Exact coordinate determinants on the builtin frame:
        // F-variant −sin(s)/(8√2), extended variant −a_ext(s)/(32√2).
        let frame = builtin();
        let f_const = 1.0 / (8.0 * 2.0_f64.sqrt());
        let x_const = 1.0 / (32.0 * 2.0_f64.sqrt());
        for &s in &[1.0, 2.0, 2.5, 5.0] {
            let f = engel_at(&frame, s, 80, Variant::F).unwrap();
            assert!(
                (f + s.sin() * f_const).abs() < 1e-8,
                "F indicator at s = {s}: {f} vs {}",
                -s.sin() * f_const
            );
            let x = engel_at(&frame, s, 80, Variant::Extended).unwrap();
            assert!(
                (x + a_ext(s) * x_const).abs() < 1e-6,
                "extended indicator at s = {s}: {x} vs {}",
                -a_ext(s) * x_const
            );
        }
    }

    #[test]
    fn locate_zeros_finds_the_zeros_of_sine() {
        let zs = locate_zeros(&|s: f64| Ok(s.sin()), 1e-3, 10.0, 0.1, 1e-9).unwrap();
        assert_eq!(zs.len(), 3);
        for (z, expect) in zs.iter().zip([PI, 2.0 * PI, 3.0 * PI]) {
            assert!((z.s - expect).abs() < 1e-8, "{} vs {expect}", z.s);
            assert_eq!(z.multiplicity, 1);
            assert!(!z.tangential);
        }
    }

    #[test]
    fn locate_zeros_ignores_a_constant_indicator() {
        let zs = locate_zeros(&|_| Ok(1.0), 0.5, 5.0, 0.25, 1e-9).unwrap();
        assert!(zs.is_empty());
    }

    #[test]
    fn locate_zeros_flags_a_tangential_zero() {
        let zs = locate_zeros(&|s: f64| Ok((s - 2.0) * (s - 2.0)), 0.5, 3.5, 0.4, 1e-8).unwrap();
        assert_eq!(zs.len(), 1);
        assert!((zs[0].s - 2.0).abs() < 1e-3, "located at {}", zs[0].s);
        assert!(zs[0].tangential);
        assert_eq!(zs[0].multiplicity, 2);
    }

    #[test]
    fn extended_zeros_match_the_oracle_roots() {
        // Roots of s sin s + 2(cos s − 1) on (0, 13]: 2π, 8.98681891...,
        // and 4π.
        let frame = builtin();
        let zs = conjugate_points(
            &frame,
            Variant::Extended,
            DetectionMethod::Jacobi,
            0.5,
            13.0,
            0.05,
            60,
            1e-8,
        )
        .unwrap();
        let expected = [2.0 * PI, 8.986818915818128, 4.0 * PI];
        assert_eq!(zs.len(), 3, "zeros: {zs:?}");
        for (z, e) in zs.iter().zip(expected) {
            assert!((z.s - e).abs() < 2e-4, "{} vs {e}", z.s);
            assert_eq!(z.multiplicity, 1);
            assert!(!z.tangential);
        }
    }

    #[test]
    fn engel_and_jacobi_zero_sets_agree_under_refinement() {
        let frame = builtin();
        let mut located = Vec::new();
        for (method, n) in [
            (DetectionMethod::Jacobi, 80),
            (DetectionMethod::Jacobi, 160),
            (DetectionMethod::Engel, 80),
        ] {
            let zs = conjugate_points(
                &frame,
                Variant::F,
                method,
                2.0,
                7.0,
                0.1,
                n,
                1e-8,
            )
            .unwrap();
            assert_eq!(zs.len(), 2, "{method} at n = {n}: {zs:?}");
            located.push((zs[0].s, zs[1].s));
        }
        for &(z1, z2) in &located {
            assert!((z1 - PI).abs() < 1e-4);
            assert!((z2 - 2.0 * PI).abs() < 1e-4);
        }
    }

    #[test]
    fn indicator_profile_samples_and_locates() {
        let frame = builtin();
        let p = indicator_profile(&frame, 1.0, 7.0, 0.25, 50).unwrap();
        assert_eq!(p.method, DetectionMethod::Engel);
        assert_eq!(p.s.len(), 25);
        assert_eq!(p.a_f.len(), p.s.len());
        assert_eq!(p.a_ext.len(), p.s.len());
        // F zeros π and 2π, extended zero 2π on this range.
        let f_zeros: Vec<f64> =
            p.zeros.iter().filter(|z| z.variant == Variant::F).map(|z| z.s).collect();
        let ext_zeros: Vec<f64> =
            p.zeros.iter().filter(|z| z.variant == Variant::Extended).map(|z| z.s).collect();
        assert_eq!(f_zeros.len(), 2);
        assert!((f_zeros[0] - PI).abs() < 1e-4 && (f_zeros[1] - 2.0 * PI).abs() < 1e-4);
        assert_eq!(ext_zeros.len(), 1);
        assert!((ext_zeros[0] - 2.0 * PI).abs() < 1e-4);
    }

    #[test]
    fn profile_with_step_beyond_range_has_a_single_row() {
        let frame = builtin();
        let p = indicator_profile(&frame, 2.0, 3.0, 5.0, 30).unwrap();
        assert_eq!(p.s.len(), 1);
        assert_eq!(p.s[0], 2.0);
    }
}
