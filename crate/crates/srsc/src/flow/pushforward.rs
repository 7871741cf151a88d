//! Pushforward of a field along the `X1`-flow, as an evaluable field.
//!
//! `pushforward_field(frame, tau, t, z)` represents the field whose value
//! at a point `x` is obtained by flowing `x` backward along `X1` for time
//! `t - tau`, evaluating `z` there, and transporting the resulting vector
//! forward along the variational equation.  The result implements
//! [`VectorField`], so it can be fed back into bracket construction.

use crate::flow::integrate::{integrate, IntegratorConfig};
use crate::vfcore::{fd_jvp, Field, Frame, VectorField};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

struct PushforwardField {
    frame: Frame,
    /// Flow duration `t - tau`.
    u: f64,
    inner: Field,
    cfg: IntegratorConfig,
}

impl VectorField for PushforwardField {
    fn dim(&self) -> usize {
        self.frame.ambient_dim
    }

    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        let dim = self.dim();
        let back = integrate(
            &|_t: f64, y: &DVector<f64>| self.frame.x1.eval(y),
            0.0,
            -self.u,
            x,
            &self.cfg,
        )
        .expect("pushforward backward flow failed");
        let w = self.inner.eval(&back);
        let mut y0 = DVector::<f64>::zeros(2 * dim);
        y0.rows_mut(0, dim).copy_from(&back);
        y0.rows_mut(dim, dim).copy_from(&w);
        let f = |_t: f64, y: &DVector<f64>| {
            let p = y.rows(0, dim).into_owned();
            let q = y.rows(dim, dim).into_owned();
            let mut dy = DVector::<f64>::zeros(2 * dim);
            dy.rows_mut(0, dim).copy_from(&self.frame.x1.eval(&p));
            dy.rows_mut(dim, dim).copy_from(&self.frame.x1.jvp(&p, &q));
            dy
        };
        let y1 = integrate(&f, 0.0, self.u, &y0, &self.cfg)
            .expect("pushforward forward transport failed");
        y1.rows(dim, dim).into_owned()
    }

    fn jvp(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        fd_jvp(self, x, v)
    }

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let dim = self.dim();
        let mut out = DMatrix::<f64>::zeros(dim, dim);
        for j in 0..dim {
            let mut e = DVector::<f64>::zeros(dim);
            e[j] = 1.0;
            out.set_column(j, &self.jvp(x, &e));
        }
        out
    }
}

/// Field `x -> (flow of X1 for time t - tau, pushforward)(z)(x)`.
pub fn pushforward_field(
    frame: &Frame,
    tau: f64,
    t: f64,
    z: &Field,
    cfg: &IntegratorConfig,
) -> Field {
    Arc::new(PushforwardField { frame: frame.clone(), u: t - tau, inner: z.clone(), cfg: *cfg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::curve::transport;
    use crate::flow::integrate::flow_x1;
    use crate::vfcore::{engel_so3r, lie_bracket};

    #[test]
    fn zero_duration_is_identity() {
        let frame = engel_so3r();
        let cfg = IntegratorConfig::rk45_accurate();
        let pf = pushforward_field(&frame, 0.7, 0.7, &frame.x2, &cfg);
        let x = &frame.base_point;
        assert!((pf.eval(x) - frame.x2.eval(x)).amax() < 1e-12);
    }

    #[test]
    fn matches_transport_on_the_reference_curve() {
        let frame = engel_so3r();
        let cfg = IntegratorConfig::rk45_accurate();
        let (tau, t) = (0.4, 1.1);
        let pf = pushforward_field(&frame, tau, t, &frame.x2, &cfg);
        let x_t = flow_x1(&frame, &frame.base_point, t, &cfg).unwrap();
        let x_tau = flow_x1(&frame, &frame.base_point, tau, &cfg).unwrap();
        let direct = transport(&frame, tau, t, &frame.x2.eval(&x_tau), &cfg).unwrap();
        assert!((pf.eval(&x_t) - direct).amax() < 1e-8);
    }

    #[test]
    fn bracket_with_itself_vanishes() {
        let frame = engel_so3r();
        let cfg = IntegratorConfig::rk45_accurate();
        let pf = pushforward_field(&frame, 0.2, 0.9, &frame.x2, &cfg);
        let x = flow_x1(&frame, &frame.base_point, 0.9, &cfg).unwrap();
        let b = lie_bracket(&pf, &pf, &x);
        assert!(b.amax() < 1e-6, "self-bracket {}", b.amax());
    }
}
