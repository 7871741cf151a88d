//! Shared helpers for the integration tests: fixture paths and the
//! closed-form indicator roots of the builtin example.
//!
//! Each integration-test binary compiles this module independently and
//! uses a different subset of it.
#![allow(dead_code)]

use srsc::vfcore::Frame;
use std::path::PathBuf;
use std::sync::Arc;

/// Absolute path of a JSON fixture under `tests/fixtures/`.
pub fn fixture_path(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

pub fn load_fixture(name: &str) -> Arc<Frame> {
    Frame::from_source(&fixture_path(name)).expect("fixture loads")
}

/// Endpoint-variant indicator of the builtin example, up to scale.
pub fn a_f(s: f64) -> f64 {
    s.sin()
}

/// Extended-variant indicator of the builtin example, up to scale.
pub fn a_ext(s: f64) -> f64 {
    s * s.sin() + 2.0 * (s.cos() - 1.0)
}

/// First positive root of `a_ext` that is not a multiple of `2π`
/// (solves `tan x = x` at `x = r/2`).
pub const EXT_ROOT_1: f64 = 8.986818915818128;
