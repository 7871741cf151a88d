//! Reference trajectory cache.
//!
//! All second-variation and shooting computations sample the flow of `X1`,
//! its linearization, and adjoint/lifted transports on nested grids derived
//! from one uniform partition of `[0, s]` into `n` cells of width `h`:
//!
//! * micro grid, spacing `h/16`: cached states and Jacobians, fine enough
//!   that every Runge-Kutta stage below lands on a cached point;
//! * eighth grid, spacing `h/8`: the adjoint covector pass;
//! * half grid, spacing `h/2`: fundamental-solution factors and their
//!   suffix products (transports to the endpoint);
//! * cell midpoints `(j + 1/2) h`, which are exactly the odd half-grid
//!   nodes, where piecewise-constant control variations are sampled.

use crate::flow::integrate::{integrate, rk4_step, IntegratorConfig};
use crate::vfcore::Frame;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Number of micro intervals per cell; stage times of every fixed-step
/// scheme used on the cached grids fall on micro nodes.
const MICRO_PER_CELL: usize = 16;

/// Cached reference trajectory data over `[0, s]` with `n` uniform cells.
pub struct ReferenceCurve {
    pub frame: Frame,
    pub s: f64,
    pub n: usize,
    /// States at micro nodes `i * h/16`, `i = 0..=16n`.
    micro: Vec<DVector<f64>>,
    /// Jacobian of `X1` at each micro node.
    jac_micro: Vec<DMatrix<f64>>,
    /// Fundamental solution of the linearization over half-cell
    /// `[k h/2, (k+1) h/2]`, `k = 0..2n`.
    prop_half: Vec<DMatrix<f64>>,
    /// Suffix products: `suf[k]` maps tangent vectors at half node `k`
    /// to tangent vectors at the endpoint; `suf[2n] = I`.
    suf: Vec<DMatrix<f64>>,
}

impl ReferenceCurve {
    /// Integrate the flow of `X1` from the frame base point and cache all
    /// grid tables.
    pub fn new(frame: &Frame, s: f64, n: usize) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Grid(format!("horizon must be positive, got {s}")));
        }
        if n == 0 {
            return Err(Error::Grid("grid must have at least one cell".into()));
        }
        let dim = frame.ambient_dim;
        let h = s / n as f64;
        let micro_h = h / MICRO_PER_CELL as f64;
        let n_micro = MICRO_PER_CELL * n;

        let f = |_t: f64, y: &DVector<f64>| frame.x1.eval(y);
        let mut micro = Vec::with_capacity(n_micro + 1);
        micro.push(frame.base_point.clone());
        for i in 0..n_micro {
            let next = rk4_step(&f, i as f64 * micro_h, &micro[i], micro_h);
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::Integration(format!(
                    "reference flow became non-finite near t = {}",
                    (i + 1) as f64 * micro_h
                )));
            }
            micro.push(next);
        }

        let jac_micro: Vec<DMatrix<f64>> =
            micro.iter().map(|x| frame.x1.jacobian(x)).collect();

        // Fundamental solution per half-cell: two RK4 matrix steps of h/4,
        // stages on micro nodes 8k, 8k+2, 8k+4 and 8k+4, 8k+6, 8k+8.
        let quarter = h / 4.0;
        let mut prop_half = Vec::with_capacity(2 * n);
        for k in 0..2 * n {
            let mut m = DMatrix::<f64>::identity(dim, dim);
            for step in 0..2 {
                let base = 8 * k + 4 * step;
                m = rk4_matrix_step(
                    &m,
                    quarter,
                    &jac_micro[base],
                    &jac_micro[base + 2],
                    &jac_micro[base + 4],
                );
            }
            prop_half.push(m);
        }

        let mut suf = vec![DMatrix::<f64>::identity(dim, dim); 2 * n + 1];
        for k in (0..2 * n).rev() {
            suf[k] = &suf[k + 1] * &prop_half[k];
        }

        Ok(ReferenceCurve { frame: frame.clone(), s, n, micro, jac_micro, prop_half, suf })
    }

    /// Cell width.
    pub fn h(&self) -> f64 {
        self.s / self.n as f64
    }

    /// Time of half node `k` (`k = 0..=2n`).
    pub fn half_time(&self, k: usize) -> f64 {
        0.5 * self.h() * k as f64
    }

    /// Midpoint time of cell `j`.
    pub fn mid_time(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h()
    }

    /// State at half node `k`.
    pub fn state_half(&self, k: usize) -> &DVector<f64> {
        &self.micro[8 * k]
    }

    /// State at the midpoint of cell `j`.
    pub fn state_mid(&self, j: usize) -> &DVector<f64> {
        &self.micro[8 * (2 * j + 1)]
    }

    /// State at `t = s`.
    pub fn endpoint_state(&self) -> &DVector<f64> {
        &self.micro[MICRO_PER_CELL * self.n]
    }

    /// Jacobian of `X1` at half node `k`.
    pub fn jac_half(&self, k: usize) -> &DMatrix<f64> {
        &self.jac_micro[8 * k]
    }

    /// Transport a tangent vector from half node `k` to the endpoint
    /// along the linearized flow.
    pub fn transport_to_end(&self, k: usize, v: &DVector<f64>) -> DVector<f64> {
        &self.suf[k] * v
    }

    /// Fundamental-solution factor over half-cell `k`.
    pub fn prop_half(&self, k: usize) -> &DMatrix<f64> {
        &self.prop_half[k]
    }

    /// Adjoint covector pass: integrate `mu' = -J(t)^T mu` backward from
    /// `mu(s) = lam_end`, returning values on the eighth grid
    /// (`e = 0..=8n`, time `e * h/8`, micro node `2e`).
    pub fn adjoint_pass(&self, lam_end: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        let n8 = 8 * self.n;
        let eighth = self.h() / 8.0;
        let mut eta = vec![DVector::<f64>::zeros(self.frame.ambient_dim); n8 + 1];
        eta[n8] = lam_end.clone();
        for e in (0..n8).rev() {
            // Backward RK4 step of -h/8 from eighth node e+1 to e; stage
            // Jacobians at micro nodes 2e+2, 2e+1, 2e.
            let j_hi = &self.jac_micro[2 * e + 2];
            let j_mid = &self.jac_micro[2 * e + 1];
            let j_lo = &self.jac_micro[2 * e];
            let y = &eta[e + 1];
            let hh = -eighth;
            let k1 = -(j_hi.transpose() * y);
            let k2 = -(j_mid.transpose() * (y + &k1 * (0.5 * hh)));
            let k3 = -(j_mid.transpose() * (y + &k2 * (0.5 * hh)));
            let k4 = -(j_lo.transpose() * (y + &k3 * hh));
            eta[e] = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (hh / 6.0);
            if eta[e].iter().any(|v| !v.is_finite()) {
                return Err(Error::Integration("adjoint pass became non-finite".into()));
            }
        }
        Ok(eta)
    }

    /// Covector value at the midpoint of cell `j` from an adjoint pass
    /// result (eighth node `8j + 4`).
    pub fn adjoint_mid<'a>(&self, eta: &'a [DVector<f64>], j: usize) -> &'a DVector<f64> {
        &eta[8 * j + 4]
    }

    /// Fundamental solutions of the cotangent-lifted linearization per
    /// half-cell.  The lift evolves `(dx, dp)` by
    /// `dx' = J dx`, `dp' = -H_eta dx - J^T dp`, where `H_eta` is the
    /// Hessian of `X1` contracted with the adjoint covector `eta(t)`.
    pub fn lifted_half_props(&self, eta: &[DVector<f64>]) -> Result<Vec<DMatrix<f64>>> {
        let dim = self.frame.ambient_dim;
        let quarter = self.h() / 4.0;
        let mut props = Vec::with_capacity(2 * self.n);
        for k in 0..2 * self.n {
            let mut top = DMatrix::<f64>::identity(2 * dim, 2 * dim)
                .view((0, 0), (dim, 2 * dim))
                .into_owned();
            let mut bot = DMatrix::<f64>::identity(2 * dim, 2 * dim)
                .view((dim, 0), (dim, 2 * dim))
                .into_owned();
            for step in 0..2 {
                let micro_base = 8 * k + 4 * step;
                let eighth_base = 4 * k + 2 * step;
                let stages = [
                    (micro_base, eighth_base),
                    (micro_base + 2, eighth_base + 1),
                    (micro_base + 4, eighth_base + 2),
                ];
                let js: Vec<&DMatrix<f64>> =
                    stages.iter().map(|&(m, _)| &self.jac_micro[m]).collect();
                let hs: Vec<DMatrix<f64>> = stages
                    .iter()
                    .map(|&(m, e)| self.frame.x1.hessian_contract(&self.micro[m], &eta[e]))
                    .collect();
                let rhs = |j: &DMatrix<f64>,
                           hm: &DMatrix<f64>,
                           t: &DMatrix<f64>,
                           b: &DMatrix<f64>| { (j * t, -(hm * t) - j.transpose() * b) };
                let (k1t, k1b) = rhs(js[0], &hs[0], &top, &bot);
                let (k2t, k2b) = rhs(
                    js[1],
                    &hs[1],
                    &(&top + &k1t * (0.5 * quarter)),
                    &(&bot + &k1b * (0.5 * quarter)),
                );
                let (k3t, k3b) = rhs(
                    js[1],
                    &hs[1],
                    &(&top + &k2t * (0.5 * quarter)),
                    &(&bot + &k2b * (0.5 * quarter)),
                );
                let (k4t, k4b) = rhs(
                    js[2],
                    &hs[2],
                    &(&top + &k3t * quarter),
                    &(&bot + &k3b * quarter),
                );
                top = &top + (k1t + k2t * 2.0 + k3t * 2.0 + k4t) * (quarter / 6.0);
                bot = &bot + (k1b + k2b * 2.0 + k3b * 2.0 + k4b) * (quarter / 6.0);
            }
            let mut m = DMatrix::<f64>::zeros(2 * dim, 2 * dim);
            m.view_mut((0, 0), (dim, 2 * dim)).copy_from(&top);
            m.view_mut((dim, 0), (dim, 2 * dim)).copy_from(&bot);
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::Integration("lifted transport became non-finite".into()));
            }
            props.push(m);
        }
        Ok(props)
    }

    /// Suffix products of lifted half-cell factors: entry `k` maps lifted
    /// vectors at half node `k` to lifted vectors at the endpoint.
    pub fn lifted_suffix(&self, props: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
        let dim2 = 2 * self.frame.ambient_dim;
        let mut suf = vec![DMatrix::<f64>::identity(dim2, dim2); props.len() + 1];
        for k in (0..props.len()).rev() {
            suf[k] = &suf[k + 1] * &props[k];
        }
        suf
    }
}

/// One RK4 step for the matrix equation `M' = A(t) M` with the three
/// stage matrices `A(t0)`, `A(t0 + h/2)`, `A(t0 + h)`.
fn rk4_matrix_step(
    m: &DMatrix<f64>,
    h: f64,
    a0: &DMatrix<f64>,
    a_mid: &DMatrix<f64>,
    a1: &DMatrix<f64>,
) -> DMatrix<f64> {
    let k1 = a0 * m;
    let k2 = a_mid * (m + &k1 * (0.5 * h));
    let k3 = a_mid * (m + &k2 * (0.5 * h));
    let k4 = a1 * (m + &k3 * h);
    m + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Transport a tangent vector along the reference flow from time `t0` to
/// `t1` by integrating the coupled state/variational system from the frame
/// base point.  Independent of the cached grid; used for cross-checks.
pub fn transport(
    frame: &Frame,
    t0: f64,
    t1: f64,
    v: &DVector<f64>,
    cfg: &IntegratorConfig,
) -> Result<DVector<f64>> {
    let dim = frame.ambient_dim;
    let x0 = integrate(
        &|_t: f64, y: &DVector<f64>| frame.x1.eval(y),
        0.0,
        t0,
        &frame.base_point,
        cfg,
    )?;
    let mut y0 = DVector::<f64>::zeros(2 * dim);
    y0.rows_mut(0, dim).copy_from(&x0);
    y0.rows_mut(dim, dim).copy_from(v);
    let f = |_t: f64, y: &DVector<f64>| {
        let x = y.rows(0, dim).into_owned();
        let w = y.rows(dim, dim).into_owned();
        let mut dy = DVector::<f64>::zeros(2 * dim);
        dy.rows_mut(0, dim).copy_from(&frame.x1.eval(&x));
        dy.rows_mut(dim, dim).copy_from(&frame.x1.jvp(&x, &w));
        dy
    };
    let y1 = integrate(&f, t0, t1, &y0, cfg)?;
    Ok(y1.rows(dim, dim).into_owned())
}

/// Transport a covector along the reference flow from time `t0` to `t1`
/// (adjoint system `mu' = -J^T mu`).
pub fn cotransport(
    frame: &Frame,
    t0: f64,
    t1: f64,
    mu: &DVector<f64>,
    cfg: &IntegratorConfig,
) -> Result<DVector<f64>> {
    let dim = frame.ambient_dim;
    let x0 = integrate(
        &|_t: f64, y: &DVector<f64>| frame.x1.eval(y),
        0.0,
        t0,
        &frame.base_point,
        cfg,
    )?;
    let mut y0 = DVector::<f64>::zeros(2 * dim);
    y0.rows_mut(0, dim).copy_from(&x0);
    y0.rows_mut(dim, dim).copy_from(mu);
    let f = |_t: f64, y: &DVector<f64>| {
        let x = y.rows(0, dim).into_owned();
        let m = y.rows(dim, dim).into_owned();
        let jac = frame.x1.jacobian(&x);
        let mut dy = DVector::<f64>::zeros(2 * dim);
        dy.rows_mut(0, dim).copy_from(&frame.x1.eval(&x));
        dy.rows_mut(dim, dim).copy_from(&(-(jac.transpose() * m)));
        dy
    };
    let y1 = integrate(&f, t0, t1, &y0, cfg)?;
    Ok(y1.rows(dim, dim).into_owned())
}
