//! Centralized numerical tolerances and discretization defaults.
//!
//! Every threshold that affects a mathematical decision is named here with a
//! justification, so that tests, the CLI defaults, and the self-verification
//! battery agree on one set of numbers.

/// Relative rank tolerance: singular values below `RANK_REL_TOL * σ_max`
/// count as zero. Transport/integration noise sits near 1e-9; the factor
/// 100 margin makes rank decisions insensitive to it.
pub const RANK_REL_TOL: f64 = 1e-7;

/// Relative eigenvalue zero-threshold for inertia counts: eigenvalues with
/// `|e| <= EIG_ZERO_REL_TOL * max|e|` count as null. Conjugate-point
/// boundaries are resolution-limited, so this is exposed as a CLI flag.
pub const EIG_ZERO_REL_TOL: f64 = 1e-6;

/// Residual threshold certifying the Goh property (the transported covector
/// annihilates the bracket `[X1, X2]` along the curve).
pub const GOH_TOL: f64 = 1e-8;

/// Residual threshold certifying strict abnormality (no energy-normal
/// multiplier: the last component of every unit left-null vector of the
/// extended differential is below this).
pub const STRICT_TOL: f64 = 1e-8;

/// Lower bound certifying that the projected energy gradient is bounded away
/// from zero on the kernel of the endpoint differential.
pub const J_PROJECTION_MIN: f64 = 0.1;

/// Relative residual threshold for the consistency check between directly
/// paired `ζ` derivative tables and the last row of the shooting system.
pub const ZETA_CONSISTENCY_TOL: f64 = 1e-6;

/// Relative residual threshold for the structural-function least-squares
/// decomposition `(ad X1)^m X2 = β X1 + Σ αⁱ (ad X1)ⁱ X2`.
pub const STRUCTURAL_RESIDUAL_TOL: f64 = 1e-6;

/// Admissibility margin for the reparametrization map: controls must satisfy
/// `1 + v1_zero_mean > DEFAULT_ALPHA`. Any positive value works in theory;
/// 0.5 keeps time reparametrizations well-conditioned.
pub const DEFAULT_ALPHA: f64 = 0.5;

/// Default number of uniform grid cells for discretized quadratic forms.
pub const DEFAULT_GRID: usize = 200;

/// Default fixed RK4 step is `s / RK4_STEP_DIVISOR` over horizon `s`.
pub const RK4_STEP_DIVISOR: f64 = 2000.0;

/// Absolute tolerance of the adaptive RK45 integrator used by verification
/// runs.
pub const RK45_ABS_TOL: f64 = 1e-10;

/// Relative tolerance of the adaptive RK45 integrator used by verification
/// runs.
pub const RK45_REL_TOL: f64 = 1e-9;

/// Bisection stops when the bracketing interval of a root is shorter than
/// this.
pub const ZERO_LOCATION_TOL: f64 = 1e-6;

/// Default scan step for sign-change root isolation.
pub const DEFAULT_SCAN_STEP: f64 = 0.02;

/// Relative singular-value threshold used when reading a conjugate-point
/// multiplicity off the shooting boundary matrix.
pub const MULTIPLICITY_REL_TOL: f64 = 1e-3;

/// A local minimum of `|indicator|` below `TANGENCY_REL_TOL * scan_scale`
/// without a sign change is flagged as a tangential (even-order) zero.
pub const TANGENCY_REL_TOL: f64 = 1e-4;

/// Central finite-difference step, scaled by `1 + |x|` at the evaluation
/// point; the fallback when forward-mode differentiation is unavailable.
pub const FD_STEP: f64 = 1e-5;

/// Micro-grid resolution for cached reference-curve tables: states stored
/// every `h/MICRO_PER_CELL` so that all propagator and adjoint Runge-Kutta
/// stages land on cached points.
pub const MICRO_PER_CELL: usize = 16;
