//! Conjugate-point location by shooting and by the closed-form wedge
//! indicator, through the public API.

mod common;

use srsc::jacobi::{conjugate_points, indicator_profile, DetectionMethod};
use srsc::vfcore::engel_so3r;
use srsc::{tol, Variant};
use std::f64::consts::PI;

#[test]
fn shooting_locates_the_first_conjugate_time() {
    let frame = engel_so3r();
    let zeros = conjugate_points(
        &frame,
        Variant::F,
        DetectionMethod::Jacobi,
        2.9,
        3.4,
        0.1,
        120,
        tol::ZERO_LOCATION_TOL,
    )
    .unwrap();
    assert_eq!(zeros.len(), 1, "one zero in the window: {zeros:?}");
    assert!((zeros[0].s - PI).abs() < 1e-4, "zero at {}", zeros[0].s);
}

#[test]
fn shooting_and_wedge_indicator_agree_near_the_extended_zero() {
    let frame = engel_so3r();
    let window = (5.9, 6.6);
    let mut located = Vec::new();
    for method in [DetectionMethod::Jacobi, DetectionMethod::Engel] {
        let zeros = conjugate_points(
            &frame,
            Variant::Extended,
            method,
            window.0,
            window.1,
            0.1,
            120,
            tol::ZERO_LOCATION_TOL,
        )
        .unwrap();
        assert_eq!(zeros.len(), 1, "{method:?} zeros: {zeros:?}");
        located.push(zeros[0].s);
    }
    assert!((located[0] - 2.0 * PI).abs() < 1e-4);
    assert!((located[0] - located[1]).abs() < 1e-5, "methods disagree: {located:?}");
}

#[test]
fn indicator_profiles_are_proportional_to_the_closed_forms() {
    // Both indicator columns must be scalar multiples of the closed forms
    // of the builtin example; the scale itself is a convention.
    let frame = engel_so3r();
    let prof = indicator_profile(&frame, 0.8, 4.9, 0.8, 100).unwrap();
    let mut ratio_f = Vec::new();
    let mut ratio_ext = Vec::new();
    for (i, &s) in prof.s.iter().enumerate() {
        ratio_f.push(prof.a_f[i] / common::a_f(s));
        ratio_ext.push(prof.a_ext[i] / common::a_ext(s));
    }
    for ratios in [&ratio_f, &ratio_ext] {
        let first = ratios[0];
        assert!(first.abs() > 1e-12, "indicator vanishes identically");
        for r in ratios {
            assert!(
                (r - first).abs() < 1e-3 * first.abs(),
                "ratio drifts: {ratios:?}"
            );
        }
    }
}

#[test]
fn both_dynamic_methods_are_inapplicable_to_the_martinet_frame() {
    let frame = common::load_fixture("martinet.json");
    for method in [DetectionMethod::Jacobi, DetectionMethod::Engel] {
        let err = conjugate_points(
            &frame,
            Variant::F,
            method,
            0.5,
            1.5,
            0.2,
            60,
            tol::ZERO_LOCATION_TOL,
        )
        .unwrap_err();
        assert!(
            matches!(err, srsc::Error::MethodInapplicable(_)),
            "{method:?} gave {err}"
        );
        assert!(err.is_hypothesis());
    }
}
