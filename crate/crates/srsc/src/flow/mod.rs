//! Integration of the control system and transport along the reference curve.
//!
//! The control system is `ξ' = (1 + v1)X1(ξ) + v2 X2(ξ)` from the frame's
//! base point. This module provides the endpoint map and trajectories,
//! variational transport (pushforward) and adjoint transport (pullback) along
//! the reference curve `γ` (the flow of `X1`), evaluable pushforward fields,
//! cached per-curve propagator tables used by the quadratic-form and shooting
//! modules, and the reparametrization map `ρ` that absorbs the zero-mean part
//! of `v1` into time.

mod control;
mod curve;
mod endpoint;
mod integrate;
mod pushforward;
mod rho;

pub use control::Control;
pub use curve::{cotransport, transport, ReferenceCurve};
pub use endpoint::{endpoint, trajectory, Trajectory};
pub use integrate::{flow_x1, integrate, IntegratorConfig, Method};
pub use pushforward::pushforward_field;
pub use rho::{rho, rho_inverse};
