//! Frames: the pair `(X1, X2)` with a base point and tangent-frame map.

use super::builtin;
use super::field::{DiffMode, ExprField, Field, LINEAR_AMBIENT_DIM};
use super::parse_expr;
use crate::{linalg, tol, Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use std::sync::Arc;

/// How tangent spaces are spanned at each ambient point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TangentFrame {
    /// The ambient space is the manifold: the tangent frame is the identity.
    Identity,
    /// The builtin frame on `SO(3) x R` embedded in `R^10`: columns
    /// `vec(R·T1), vec(R·T2), vec(R·T3)` (the rotated so(3) generators)
    /// plus the line direction.
    EngelSo3r,
}

/// A rank-two structure: two fields on ambient `R^n`, a base point, and the
/// tangent-frame map of the `m`-dimensional manifold carrying them.
#[derive(Clone)]
pub struct Frame {
    pub label: String,
    pub ambient_dim: usize,
    pub intrinsic_dim: usize,
    pub x1: Field,
    pub x2: Field,
    pub base_point: DVector<f64>,
    pub tangent: TangentFrame,
}

#[derive(Deserialize)]
struct FrameFile {
    ambient_dim: usize,
    fields: FieldsFile,
    base_point: Vec<f64>,
    tangent_frame: String,
}

#[derive(Deserialize)]
struct FieldsFile {
    #[serde(rename = "X1")]
    x1: Vec<String>,
    #[serde(rename = "X2")]
    x2: Vec<String>,
}

impl Frame {
    /// The builtin frame registry. Currently one entry: `engel-so3r`.
    pub fn builtin(name: &str) -> Result<Arc<Frame>> {
        match name {
            "engel-so3r" => Ok(Arc::new(builtin::engel_so3r())),
            other => Err(Error::Frame(format!("unknown builtin frame '{other}'"))),
        }
    }

    /// Load a frame from its JSON definition:
    ///
    /// ```json
    /// {
    ///   "ambient_dim": 3,
    ///   "fields": { "X1": ["0", "1", "0.5*x0*x0"], "X2": ["1", "0", "0"] },
    ///   "base_point": [0, 0, 0],
    ///   "tangent_frame": "identity"
    /// }
    /// ```
    ///
    /// `tangent_frame` is `"identity"` or `"builtin:<name>"`.
    pub fn from_json_str(src: &str) -> Result<Arc<Frame>> {
        let file: FrameFile = serde_json::from_str(src)?;
        let n = file.ambient_dim;
        if n == 0 {
            return Err(Error::Frame("ambient_dim must be positive".into()));
        }
        if file.base_point.len() != n {
            return Err(Error::Frame(format!(
                "base_point has {} entries, ambient_dim is {n}",
                file.base_point.len()
            )));
        }
        for (name, comps) in [("X1", &file.fields.x1), ("X2", &file.fields.x2)] {
            if comps.len() != n {
                return Err(Error::Frame(format!(
                    "{name} has {} components, ambient_dim is {n}",
                    comps.len()
                )));
            }
        }
        let parse_field = |comps: &[String]| -> Result<Field> {
            let parsed: Result<Vec<_>> = comps.iter().map(|c| parse_expr(c, n)).collect();
            Ok(Arc::new(ExprField::new(parsed?, n, DiffMode::Dual)))
        };
        let (tangent, intrinsic_dim) = match file.tangent_frame.as_str() {
            "identity" => (TangentFrame::Identity, n),
            "builtin:engel-so3r" => {
                if n != LINEAR_AMBIENT_DIM {
                    return Err(Error::Frame(format!(
                        "tangent frame 'builtin:engel-so3r' requires ambient_dim {LINEAR_AMBIENT_DIM}"
                    )));
                }
                (TangentFrame::EngelSo3r, 4)
            }
            other => return Err(Error::Frame(format!("unknown tangent_frame '{other}'"))),
        };
        let frame = Frame {
            label: "file".to_string(),
            ambient_dim: n,
            intrinsic_dim,
            x1: parse_field(&file.fields.x1)?,
            x2: parse_field(&file.fields.x2)?,
            base_point: DVector::from_vec(file.base_point),
            tangent,
        };
        frame.validate()?;
        Ok(Arc::new(frame))
    }

    /// Load a frame definition file from disk.
    pub fn from_json_file(path: &std::path::Path) -> Result<Arc<Frame>> {
        let src = std::fs::read_to_string(path)?;
        Self::from_json_str(&src)
    }

    /// Resolve a frame source string: `builtin:<name>` or a file path.
    pub fn from_source(src: &str) -> Result<Arc<Frame>> {
        match src.strip_prefix("builtin:") {
            Some(name) => Self::builtin(name),
            None => Self::from_json_file(std::path::Path::new(src)),
        }
    }

    /// The `n x m` tangent-frame matrix at an ambient point.
    pub fn tangent_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match self.tangent {
            TangentFrame::Identity => DMatrix::identity(self.ambient_dim, self.ambient_dim),
            TangentFrame::EngelSo3r => builtin::tangent_matrix_so3r(x),
        }
    }

    /// Tangent coordinates of an ambient vector at `x` (least squares
    /// against the frame columns; exact for vectors in the span).
    pub fn coords(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        match self.tangent {
            TangentFrame::Identity => v.clone(),
            _ => linalg::lstsq(&self.tangent_matrix(x), v, 1e-12),
        }
    }

    /// Minimal-norm ambient representative of a covector given in tangent
    /// coordinates: the functional `c ↦ λ·c` on coordinates becomes
    /// `w ↦ λ_amb·w` on tangent vectors, with `λ_amb = T (TᵀT)⁻¹ λ`.
    pub fn covector_ambient(&self, x: &DVector<f64>, lam_coords: &DVector<f64>) -> DVector<f64> {
        match self.tangent {
            TangentFrame::Identity => lam_coords.clone(),
            _ => {
                let t = self.tangent_matrix(x);
                let gram = t.transpose() * &t;
                let sol = gram
                    .lu()
                    .solve(lam_coords)
                    .expect("tangent frame has full column rank");
                t * sol
            }
        }
    }

    /// Structural validation: finite data, full-rank tangent frame at the
    /// base point, both fields tangent to the manifold there, and `X1, X2`
    /// linearly independent there.
    pub fn validate(&self) -> Result<()> {
        let x0 = &self.base_point;
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Frame("base point has non-finite entries".into()));
        }
        let t = self.tangent_matrix(x0);
        let sv = linalg::singular_values(&t);
        if linalg::rank_from_singulars(&sv, tol::RANK_REL_TOL) < self.intrinsic_dim {
            return Err(Error::Frame("tangent frame is rank-deficient at the base point".into()));
        }
        let v1 = self.x1.eval(x0);
        let v2 = self.x2.eval(x0);
        for (name, v) in [("X1", &v1), ("X2", &v2)] {
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::Frame(format!("{name} is non-finite at the base point")));
            }
            let res = linalg::lstsq_residual(&t, v, 1e-12);
            if res > 1e-8 * (1.0 + v.norm()) {
                return Err(Error::Frame(format!(
                    "{name} is not tangent to the manifold at the base point (residual {res:.2e})"
                )));
            }
        }
        let pair = linalg::from_columns(self.ambient_dim, &[v1.clone(), v2.clone()]);
        let psv = linalg::singular_values(&pair);
        if linalg::rank_from_singulars(&psv, tol::RANK_REL_TOL) < 2 {
            return Err(Error::Frame("X1 and X2 are dependent at the base point".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MARTINET: &str = r#"{
        "ambient_dim": 3,
        "fields": { "X1": ["0", "1", "0.5*x0*x0"], "X2": ["1", "0", "0"] },
        "base_point": [0, 0, 0],
        "tangent_frame": "identity"
    }"#;

    #[test]
    fn loads_identity_frame_from_json() {
        let f = Frame::from_json_str(MARTINET).unwrap();
        assert_eq!(f.ambient_dim, 3);
        assert_eq!(f.intrinsic_dim, 3);
        let x = DVector::from_column_slice(&[2.0, 0.0, 0.0]);
        let v1 = f.x1.eval(&x);
        assert!((v1[2] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_component_count_mismatch() {
        let bad = r#"{
            "ambient_dim": 3,
            "fields": { "X1": ["0", "1"], "X2": ["1", "0", "0"] },
            "base_point": [0, 0, 0],
            "tangent_frame": "identity"
        }"#;
        assert!(matches!(Frame::from_json_str(bad), Err(Error::Frame(_))));
    }

    #[test]
    fn rejects_base_point_dimension_mismatch() {
        let bad = r#"{
            "ambient_dim": 3,
            "fields": { "X1": ["0", "1", "0"], "X2": ["1", "0", "0"] },
            "base_point": [0, 0],
            "tangent_frame": "identity"
        }"#;
        assert!(matches!(Frame::from_json_str(bad), Err(Error::Frame(_))));
    }

    #[test]
    fn rejects_dependent_fields() {
        let bad = r#"{
            "ambient_dim": 2,
            "fields": { "X1": ["1", "0"], "X2": ["2", "0"] },
            "base_point": [0, 0],
            "tangent_frame": "identity"
        }"#;
        assert!(matches!(Frame::from_json_str(bad), Err(Error::Frame(_))));
    }

    #[test]
    fn unknown_builtin_is_an_error() {
        assert!(Frame::builtin("nope").is_err());
    }
}
