//! Acceptance battery for the builtin `engel-so3r` example.
//!
//! Nine numbered criteria exercise the toolkit end to end against
//! independently computable ground truth: the example's conjugate times are
//! the zeros of `sin(s)` for the endpoint variant and of
//! `s·sin(s) + 2(cos(s) − 1)` for the extended variant, its iterated
//! brackets close in the frame, and its index pairs follow a known
//! staircase. Each criterion is a self-contained check returning a pass
//! flag and a human-readable detail line; [`run`] executes a subset and
//! never panics — a criterion that errors is recorded as failed with the
//! error text.
//!
//! The expected values are frozen here as literals on purpose: they are
//! the contract this crate is tested against, not quantities recomputed
//! from the code under test. Root locations are cross-checked against a
//! scalar bisection oracle that shares no code with the detection paths.

use crate::abnormal::abnormal_covector;
use crate::flow::{endpoint, rho, rho_inverse, Control, IntegratorConfig, ReferenceCurve};
use crate::hessian::{hessian_zeros, index_profile, inertia_at};
use crate::jacobi::{conjugate_points, structural_functions, DetectionMethod};
use crate::vfcore::{iterated_ad, Frame};
use crate::{tol, Result, Variant};
use nalgebra::{DVector, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// Tunable tolerances of the battery. The defaults are the pinned
/// acceptance values; tightening them below the discretization resolution
/// (for example `zero_tol = 1e-12`) demonstrates honest failure reporting.
#[derive(Debug, Clone)]
pub struct AcceptanceConfig {
    /// Agreement tolerance between located zeros and the oracle roots
    /// (criteria 1 and 2).
    pub zero_tol: f64,
    /// Pairwise agreement tolerance between detection methods
    /// (criterion 9).
    pub cross_tol: f64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig { zero_tol: 1e-4, cross_tol: 2e-4 }
    }
}

/// Stable names for the nine criteria, indexable by `id − 1`.
pub const CRITERION_NAMES: [&str; 9] = [
    "conjugate-times-f",
    "conjugate-times-ext",
    "index-sequence",
    "morse-identity",
    "hypotheses",
    "bracket-truth",
    "rho-invariance",
    "degeneracy-onset",
    "cross-method",
];

/// Run the criteria with the given ids (1-based, deduplicated, in
/// ascending order). Unknown ids are ignored.
pub fn run(ids: &[usize], cfg: &AcceptanceConfig) -> Vec<CriterionResult> {
    let mut wanted: Vec<usize> = ids.iter().copied().filter(|&i| (1..=9).contains(&i)).collect();
    wanted.sort_unstable();
    wanted.dedup();
    let frame = match Frame::builtin("engel-so3r") {
        Ok(f) => f,
        Err(e) => {
            return wanted
                .into_iter()
                .map(|id| CriterionResult {
                    id,
                    name: CRITERION_NAMES[id - 1],
                    passed: false,
                    detail: format!("builtin frame unavailable: {e}"),
                    seconds: 0.0,
                })
                .collect();
        }
    };
    wanted
        .into_iter()
        .map(|id| {
            let t0 = Instant::now();
            let outcome = match id {
                1 => criterion_1(&frame, cfg),
                2 => criterion_2(&frame, cfg),
                3 => criterion_3(&frame),
                4 => criterion_4(&frame),
                5 => criterion_5(&frame),
                6 => criterion_6(&frame),
                7 => criterion_7(&frame),
                8 => criterion_8(&frame),
                _ => criterion_9(&frame, cfg),
            };
            let (passed, detail) = match outcome {
                Ok(pd) => pd,
                Err(e) => (false, format!("error: {e}")),
            };
            CriterionResult {
                id,
                name: CRITERION_NAMES[id - 1],
                passed,
                detail,
                seconds: t0.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

/// All nine ids.
pub fn all_ids() -> Vec<usize> {
    (1..=9).collect()
}

// ---------------------------------------------------------------------------
// Scalar oracles
// ---------------------------------------------------------------------------

/// The extended variant's closed-form indicator.
fn a_ext(s: f64) -> f64 {
    s * s.sin() + 2.0 * (s.cos() - 1.0)
}

/// Bisect a bracketed sign change down to machine-level width.
fn bisect_scalar(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        if b - a < 1e-13 {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Roots of a scalar function on `(lo, hi]` found by sign-change scanning
/// plus bisection; assumes simple crossings separated by more than `step`.
fn scan_roots(f: impl Fn(f64) -> f64 + Copy, lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut a = lo;
    let mut fa = f(a);
    while a < hi {
        let b = (a + step).min(hi);
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fb != 0.0 && (fa < 0.0) != (fb < 0.0) {
            roots.push(bisect_scalar(f, a, b));
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        roots.push(hi);
    }
    roots.retain(|&r| r > lo);
    roots
}

/// Oracle roots for the endpoint variant: zeros of `sin` on `(0, hi]`.
pub fn oracle_f_roots(hi: f64) -> Vec<f64> {
    scan_roots(f64::sin, 0.5, hi, 0.05)
}

/// Oracle roots for the extended variant: zeros of
/// `s·sin(s) + 2(cos(s) − 1)` on `(0, hi]`, excluding the tangential root
/// at the origin.
pub fn oracle_ext_roots(hi: f64) -> Vec<f64> {
    scan_roots(a_ext, 0.5, hi, 0.05)
}

/// Compare a located zero set against expectations: equal cardinality and
/// elementwise agreement within `tolerance`. Returns the worst deviation
/// on success.
fn match_zero_sets(found: &[f64], expected: &[f64], tolerance: f64) -> std::result::Result<f64, String> {
    if found.len() != expected.len() {
        return Err(format!(
            "found {} zeros, expected {} ({:?} vs {:?})",
            found.len(),
            expected.len(),
            found,
            expected
        ));
    }
    let mut worst = 0.0_f64;
    for (f, e) in found.iter().zip(expected) {
        let dev = (f - e).abs();
        if dev > tolerance {
            return Err(format!("zero at {f:.8} deviates from {e:.8} by {dev:.3e} > {tolerance:.1e}"));
        }
        worst = worst.max(dev);
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

/// Criterion 1: both endpoint-variant detectors reproduce `{π, 2π, 3π}` on
/// `(0, 3π]` at resolution 400 with scan step 0.02, inside the runtime
/// budget of 60 seconds.
fn criterion_1(frame: &Frame, cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let hi = 3.0 * PI + 0.05;
    let expected = oracle_f_roots(3.0 * PI + 1e-9);
    let t0 = Instant::now();
    let jacobi = conjugate_points(frame, Variant::F, DetectionMethod::Jacobi, 0.02, hi, 0.02, 400, tol::ZERO_LOCATION_TOL)?;
    let engel = conjugate_points(frame, Variant::F, DetectionMethod::Engel, 0.02, hi, 0.02, 400, tol::ZERO_LOCATION_TOL)?;
    let elapsed = t0.elapsed().as_secs_f64();
    let jz: Vec<f64> = jacobi.iter().map(|z| z.s).collect();
    let ez: Vec<f64> = engel.iter().map(|z| z.s).collect();
    let jm = match_zero_sets(&jz, &expected, cfg.zero_tol);
    let em = match_zero_sets(&ez, &expected, cfg.zero_tol);
    let within_budget = elapsed < 60.0;
    match (jm, em) {
        (Ok(wj), Ok(we)) => Ok((
            within_budget,
            format!(
                "shooting/Engel zeros match {{π, 2π, 3π}} (worst dev {:.2e} / {:.2e}); {:.1} s (budget 60 s)",
                wj, we, elapsed
            ),
        )),
        (jm, em) => {
            let mut msgs = Vec::new();
            if let Err(m) = jm {
                msgs.push(format!("shooting: {m}"));
            }
            if let Err(m) = em {
                msgs.push(format!("Engel: {m}"));
            }
            Ok((false, msgs.join("; ")))
        }
    }
}

/// Criterion 2: both extended-variant detectors reproduce the bisection
/// oracle's roots of `s·sin(s) + 2(cos(s) − 1)` on `(0, 4π]`.
fn criterion_2(frame: &Frame, cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let hi = 4.0 * PI + 0.05;
    let expected = oracle_ext_roots(4.0 * PI + 1e-9);
    let jacobi = conjugate_points(frame, Variant::Extended, DetectionMethod::Jacobi, 0.1, hi, 0.05, 200, tol::ZERO_LOCATION_TOL)?;
    let engel = conjugate_points(frame, Variant::Extended, DetectionMethod::Engel, 0.1, hi, 0.05, 200, tol::ZERO_LOCATION_TOL)?;
    let jz: Vec<f64> = jacobi.iter().map(|z| z.s).collect();
    let ez: Vec<f64> = engel.iter().map(|z| z.s).collect();
    match (match_zero_sets(&jz, &expected, cfg.zero_tol), match_zero_sets(&ez, &expected, cfg.zero_tol)) {
        (Ok(wj), Ok(we)) => Ok((
            true,
            format!(
                "both detectors match the oracle roots {:?} (worst dev {:.2e} / {:.2e})",
                expected.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>(),
                wj,
                we
            ),
        )),
        (jm, em) => {
            let mut msgs = Vec::new();
            if let Err(m) = jm {
                msgs.push(format!("shooting: {m}"));
            }
            if let Err(m) = em {
                msgs.push(format!("Engel: {m}"));
            }
            Ok((false, msgs.join("; ")))
        }
    }
}

/// Criterion 3: the `(indF, indExt)` staircase over the oracle-delimited
/// intervals equals the known nine-pair sequence at resolution 200, inside
/// the runtime budget of five minutes.
fn criterion_3(frame: &Frame) -> Result<(bool, String)> {
    let hi = 6.0 * PI;
    let mut boundaries = oracle_f_roots(hi + 1e-9);
    boundaries.extend(oracle_ext_roots(hi + 1e-9));
    boundaries.sort_by(|a, b| a.partial_cmp(b).unwrap());
    boundaries.dedup_by(|b, a| (*b - *a).abs() < 1e-6);

    let mut samples = Vec::with_capacity(boundaries.len() + 1);
    let mut prev = 0.0;
    for &b in &boundaries {
        samples.push(0.5 * (prev + b));
        prev = b;
    }
    samples.push(prev + 0.3);

    let expected: [(usize, usize); 9] =
        [(0, 0), (1, 0), (2, 1), (2, 2), (3, 2), (4, 3), (4, 4), (5, 4), (6, 5)];
    if samples.len() != expected.len() {
        return Ok((false, format!("expected {} intervals, got {}", expected.len(), samples.len())));
    }

    let t0 = Instant::now();
    let profile = index_profile(frame, &samples, 200, tol::EIG_ZERO_REL_TOL);
    let elapsed = t0.elapsed().as_secs_f64();

    let mut got = Vec::with_capacity(profile.len());
    for (s, row) in &profile {
        match row {
            Ok(pair) => got.push((pair.ind_f, pair.ind_ext)),
            Err(e) => return Ok((false, format!("index computation failed at s = {s:.4}: {e}"))),
        }
    }
    let matches = got.as_slice() == expected.as_slice();
    let within_budget = elapsed < 300.0;
    Ok((
        matches && within_budget,
        if matches {
            format!("index pairs {:?}; {:.1} s (budget 300 s)", got, elapsed)
        } else {
            format!("index pairs {:?} differ from {:?}", got, expected)
        },
    ))
}

/// Criterion 4: at sampled horizons away from all conjugate times, the
/// negative index equals the number of conjugate times passed, per
/// variant (all of the example's zeros are simple, so the
/// multiplicity-weighted count is the plain count).
fn criterion_4(frame: &Frame) -> Result<(bool, String)> {
    let hi = 6.0 * PI;
    let roots_f = oracle_f_roots(hi);
    let roots_ext = oracle_ext_roots(hi);
    let mut all = roots_f.clone();
    all.extend(roots_ext.iter().copied());

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut samples = Vec::with_capacity(20);
    while samples.len() < 20 {
        let s: f64 = rng.gen_range(0.5..hi);
        if all.iter().all(|r| (s - r).abs() > 0.1) {
            samples.push(s);
        }
    }

    for &s in &samples {
        let expected_f = roots_f.iter().filter(|&&r| r < s).count();
        let expected_ext = roots_ext.iter().filter(|&&r| r < s).count();
        let ind_f = inertia_at(frame, s, 200, Variant::F, 1e-9)?.negative;
        let ind_ext = inertia_at(frame, s, 200, Variant::Extended, 1e-9)?.negative;
        if ind_f != expected_f || ind_ext != expected_ext {
            return Ok((
                false,
                format!(
                    "at s = {s:.6}: indices ({ind_f}, {ind_ext}) vs zero counts ({expected_f}, {expected_ext})"
                ),
            ));
        }
    }
    Ok((true, "20 samples: negative index equals the passed-zero count for both variants".into()))
}

/// Criterion 5: the hypothesis battery on the reference curve.
fn criterion_5(frame: &Frame) -> Result<(bool, String)> {
    let rc = ReferenceCurve::new(frame, 1.0, tol::DEFAULT_GRID)?;
    let ab = abnormal_covector(&rc)?;
    let d = &ab.diagnostics;
    let checks = [
        (ab.corank == 1, format!("corank = {}", ab.corank)),
        (d.goh_residual < tol::GOH_TOL, format!("Goh residual {:.2e}", d.goh_residual)),
        (d.legendre_min > 0.0, format!("Legendre min {:.4e}", d.legendre_min)),
        (
            d.strictness_residual < tol::STRICT_TOL,
            format!("strictness residual {:.2e}", d.strictness_residual),
        ),
        (
            d.j_projection_norm > tol::J_PROJECTION_MIN,
            format!("energy-projection norm {:.3}", d.j_projection_norm),
        ),
    ];
    let passed = checks.iter().all(|(ok, _)| *ok);
    let detail =
        checks.iter().map(|(_, msg)| msg.as_str()).collect::<Vec<_>>().join("; ");
    Ok((passed, detail))
}

/// Criterion 6: the closed bracket relations at random ambient points and
/// the constant structural functions.
fn criterion_6(frame: &Frame) -> Result<(bool, String)> {
    let double = iterated_ad(&frame.x1, &frame.x2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let raw = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let qr = raw.qr();
        let mut q = qr.q();
        if q.determinant() < 0.0 {
            let flipped = -q.column(0);
            q.set_column(0, &flipped);
        }
        let mut p = DVector::<f64>::zeros(frame.ambient_dim);
        for i in 0..3 {
            for j in 0..3 {
                p[3 * i + j] = q[(i, j)];
            }
        }
        p[9] = rng.gen_range(-5.0..5.0);

        let got = double.eval(&p);
        let want = frame.x1.eval(&p) * 0.5 - frame.x2.eval(&p);
        worst = worst.max((got - want).norm());
    }
    if worst >= 1e-10 {
        return Ok((false, format!("bracket relation residual {worst:.3e} >= 1e-10")));
    }

    let rc = ReferenceCurve::new(frame, 2.0, 40)?;
    let sf = structural_functions(&rc)?;
    let dev_a0 = sf.alpha[0].iter().map(|v| (v + 1.0).abs()).fold(0.0_f64, f64::max);
    let dev_a1 = sf.alpha[1].iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
    let dev_b = sf.beta.iter().map(|v| (v - 0.5).abs()).fold(0.0_f64, f64::max);
    let structural_ok = dev_a0 < 1e-8 && dev_a1 < 1e-8 && dev_b < 1e-8;
    Ok((
        structural_ok,
        format!(
            "bracket residual {worst:.2e} over 50 points; structural deviations ({dev_a0:.2e}, {dev_a1:.2e}, {dev_b:.2e})"
        ),
    ))
}

/// Summary of a reparametrization-invariance battery.
#[derive(Debug, Clone, Copy)]
pub struct RhoBattery {
    pub trials: usize,
    /// Largest endpoint deviation between `ρ(v)` and `(v1 ≡ mean, v2)`.
    pub max_endpoint_dev: f64,
    /// Largest `L²` round-trip residual of `ρ⁻¹ ∘ ρ`.
    pub max_round_trip: f64,
}

/// Random-control battery for the reparametrization map, shared by the
/// acceptance criterion and the command-line `rho-check`: draws admissible
/// piecewise-constant controls, compares the endpoint of `ρ(v)` with the
/// endpoint of the mean-`v1` control, and measures the round trip.
pub fn rho_battery(frame: &Frame, trials: usize, seed: u64) -> Result<RhoBattery> {
    let cfg = IntegratorConfig::rk45_accurate();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = 16;
    let mut max_dev = 0.0_f64;
    let mut max_rt = 0.0_f64;
    for _ in 0..trials {
        let c: f64 = rng.gen_range(-0.2..0.3);
        let mut z: Vec<f64> = (0..cells).map(|_| rng.gen_range(-0.1..0.1)).collect();
        let mean = z.iter().sum::<f64>() / cells as f64;
        for zj in &mut z {
            *zj -= mean;
        }
        let v1: Vec<f64> = z.iter().map(|zj| c + zj).collect();
        let v2: Vec<f64> = (0..cells).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let v = Control::uniform(1.0, v1, v2)?;

        let w = rho(&v, tol::DEFAULT_ALPHA)?;
        let a = endpoint(frame, &w, &cfg)?;
        let b = endpoint(frame, &v.with_constant_v1(), &cfg)?;
        max_dev = max_dev.max((a - b).norm());

        let back = rho_inverse(&w, tol::DEFAULT_ALPHA)?;
        max_rt = max_rt.max(v.l2_distance(&back));
    }
    Ok(RhoBattery { trials, max_endpoint_dev: max_dev, max_round_trip: max_rt })
}

/// Criterion 7: reparametrization invariance of the endpoint and exactness
/// of the round trip on merged grids.
fn criterion_7(frame: &Frame) -> Result<(bool, String)> {
    let battery = rho_battery(frame, 100, 0x5eed_0007)?;
    let passed = battery.max_endpoint_dev < 1e-7 && battery.max_round_trip < 1e-10;
    Ok((
        passed,
        format!(
            "{} trials: max endpoint deviation {:.2e} (< 1e-7), max round trip {:.2e} (< 1e-10)",
            battery.trials, battery.max_endpoint_dev, battery.max_round_trip
        ),
    ))
}

/// Criterion 8: one eigenvalue of the endpoint-variant form crosses zero
/// at the first conjugate time, and the crossing magnitude at the
/// conjugate time shrinks by at least 4x when the resolution doubles.
fn criterion_8(frame: &Frame) -> Result<(bool, String)> {
    let below = inertia_at(frame, PI - 0.001, 200, Variant::F, tol::EIG_ZERO_REL_TOL)?;
    let above = inertia_at(frame, PI + 0.001, 200, Variant::F, tol::EIG_ZERO_REL_TOL)?;
    let category_change = below.negative == 0 && above.negative == 1;

    let coarse = inertia_at(frame, PI, 200, Variant::F, tol::EIG_ZERO_REL_TOL)?;
    let fine = inertia_at(frame, PI, 400, Variant::F, tol::EIG_ZERO_REL_TOL)?;
    let ratio = coarse.min_abs_eig / fine.min_abs_eig;
    let converges = ratio >= 4.0;

    Ok((
        category_change && converges,
        format!(
            "negative count {} -> {} across π; smallest |eigenvalue| {:.3e} (N=200) vs {:.3e} (N=400), ratio {:.2} (>= 4 required)",
            below.negative, above.negative, coarse.min_abs_eig, fine.min_abs_eig, ratio
        ),
    ))
}

/// Criterion 9: Hessian counting, shooting, and the Engel indicators
/// locate identical zero sets on `(0, 6π]` for both variants.
fn criterion_9(frame: &Frame, cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let lo = 0.1;
    let hi = 6.0 * PI + 0.1;
    let mut details = Vec::new();
    for variant in [Variant::F, Variant::Extended] {
        let hessian: Vec<f64> =
            hessian_zeros(frame, lo, hi, 0.3, 280, variant, 1e-5)?.iter().map(|z| z.0).collect();
        let jacobi: Vec<f64> =
            conjugate_points(frame, variant, DetectionMethod::Jacobi, lo, hi, 0.1, 200, tol::ZERO_LOCATION_TOL)?
                .iter()
                .map(|z| z.s)
                .collect();
        let engel: Vec<f64> =
            conjugate_points(frame, variant, DetectionMethod::Engel, lo, hi, 0.1, 200, tol::ZERO_LOCATION_TOL)?
                .iter()
                .map(|z| z.s)
                .collect();
        let mut worst = 0.0_f64;
        for (label, a, b) in [
            ("hessian/shooting", &hessian, &jacobi),
            ("shooting/Engel", &jacobi, &engel),
            ("hessian/Engel", &hessian, &engel),
        ] {
            match match_zero_sets(a, b, cfg.cross_tol) {
                Ok(w) => worst = worst.max(w),
                Err(m) => {
                    return Ok((false, format!("{variant} variant, {label}: {m}")));
                }
            }
        }
        details.push(format!("{variant}: {} zeros, worst pairwise dev {:.2e}", hessian.len(), worst));
    }
    Ok((true, details.join("; ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_roots_match_the_closed_forms() {
        let f = oracle_f_roots(3.0 * PI + 1e-9);
        assert_eq!(f.len(), 3);
        for (k, r) in f.iter().enumerate() {
            assert!((r - (k + 1) as f64 * PI).abs() < 1e-10);
        }
        let ext = oracle_ext_roots(4.0 * PI + 1e-9);
        assert_eq!(ext.len(), 3);
        assert!((ext[0] - 2.0 * PI).abs() < 1e-10);
        assert!((ext[1] - 8.986818915818128).abs() < 1e-9);
        assert!((ext[2] - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn zero_set_comparison_reports_deviations() {
        assert!(match_zero_sets(&[1.0, 2.0], &[1.0], 1e-3).is_err());
        assert!(match_zero_sets(&[1.0, 2.01], &[1.0, 2.0], 1e-3).is_err());
        let worst = match_zero_sets(&[1.0, 2.0001], &[1.0, 2.0], 1e-3).unwrap();
        assert!((worst - 1e-4).abs() < 1e-12);
    }

    #[test]
    fn unknown_ids_are_ignored() {
        let out = run(&[42], &AcceptanceConfig::default());
        assert!(out.is_empty());
    }

    #[test]
    fn fast_criteria_pass() {
        let cfg = AcceptanceConfig::default();
        for r in run(&[5, 6], &cfg) {
            assert!(r.passed, "criterion {} failed: {}", r.id, r.detail);
        }
    }
}
