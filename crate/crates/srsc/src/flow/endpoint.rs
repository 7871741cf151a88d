//! Controlled trajectories and the endpoint map.
//!
//! The controlled system is `x' = (1 + v1(t)) X1(x) + v2(t) X2(x)` with
//! piecewise-constant controls; the endpoint map sends a control to the
//! state at `t = s`.

use crate::flow::control::Control;
use crate::flow::integrate::{integrate, IntegratorConfig};
use crate::vfcore::Frame;
use crate::Result;
use nalgebra::DVector;

/// A controlled trajectory sampled at the control breakpoints.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Control breakpoints, including both endpoints.
    pub times: Vec<f64>,
    /// States at the breakpoints.
    pub states: Vec<DVector<f64>>,
    /// Control energy `1/2 * integral of (1+v1)^2 + v2^2`.
    pub cost: f64,
}

impl Trajectory {
    pub fn endpoint(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory has at least the initial state")
    }
}

/// Integrate the controlled system from the frame base point.
pub fn trajectory(frame: &Frame, control: &Control, cfg: &IntegratorConfig) -> Result<Trajectory> {
    control.validate()?;
    let mut states = Vec::with_capacity(control.cells() + 1);
    let mut cost = 0.0;
    states.push(frame.base_point.clone());
    for j in 0..control.cells() {
        let (a, b) = (control.breaks[j], control.breaks[j + 1]);
        let (u1, u2) = (1.0 + control.v1[j], control.v2[j]);
        let f = |_t: f64, y: &DVector<f64>| frame.x1.eval(y) * u1 + frame.x2.eval(y) * u2;
        let next = integrate(&f, a, b, &states[j], cfg)?;
        states.push(next);
        cost += 0.5 * (u1 * u1 + u2 * u2) * (b - a);
    }
    Ok(Trajectory { times: control.breaks.clone(), states, cost })
}

/// Endpoint map: the state at `t = s`.
pub fn endpoint(frame: &Frame, control: &Control, cfg: &IntegratorConfig) -> Result<DVector<f64>> {
    Ok(trajectory(frame, control, cfg)?.endpoint().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::integrate::flow_x1;
    use crate::vfcore::engel_so3r;

    #[test]
    fn zero_control_follows_reference_curve() {
        let frame = engel_so3r();
        let s = 1.3;
        let cfg = IntegratorConfig::rk45_accurate();
        let v = Control::zero(s, 8);
        let via_endpoint = endpoint(&frame, &v, &cfg).unwrap();
        let via_flow = flow_x1(&frame, &frame.base_point, s, &cfg).unwrap();
        assert!((via_endpoint - via_flow).amax() < 1e-9);
    }

    #[test]
    fn rotation_block_stays_orthogonal() {
        let frame = engel_so3r();
        let cfg = IntegratorConfig::rk45_accurate();
        let mut v = Control::zero(2.0, 5);
        v.v1 = vec![0.2, -0.1, 0.0, 0.3, -0.2];
        v.v2 = vec![0.5, 0.1, -0.4, 0.2, 0.0];
        let x = endpoint(&frame, &v, &cfg).unwrap();
        let r = nalgebra::Matrix3::from_row_slice(&x.as_slice()[0..9]);
        let defect = (r.transpose() * r - nalgebra::Matrix3::identity()).amax();
        assert!(defect < 1e-9, "orthogonality defect {defect}");
        assert!((r.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_mean_v1_alone_is_pure_reparametrization() {
        let frame = engel_so3r();
        let cfg = IntegratorConfig::rk45_accurate();
        let mut v = Control::zero(1.0, 4);
        v.v1 = vec![0.3, -0.1, -0.3, 0.1];
        let x = endpoint(&frame, &v, &cfg).unwrap();
        let gamma_s = flow_x1(&frame, &frame.base_point, 1.0, &cfg).unwrap();
        assert!((x - gamma_s).amax() < 1e-9);
    }

    #[test]
    fn cost_is_exact_for_piecewise_constant_controls() {
        let frame = engel_so3r();
        let cfg = IntegratorConfig::rk4(1e-2);
        let mut v = Control::zero(2.0, 2);
        v.v1 = vec![1.0, 0.0];
        v.v2 = vec![0.0, 2.0];
        // cells of width 1: 1/2 [(4 + 0) + (1 + 4)] = 4.5
        let traj = trajectory(&frame, &v, &cfg).unwrap();
        assert!((traj.cost - 4.5).abs() < 1e-12);
    }
}
