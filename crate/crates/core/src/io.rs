//! JSON correspondence files and JSON pose reports.
//!
//! A correspondence file looks like
//!
//! ```json
//! {
//!   "intrinsics1": [[424.9, 0, 176], [0, 424.9, 144], [0, 0, 1]],
//!   "intrinsics2": [424.9, 0, 176, 0, 424.9, 144, 0, 0, 1],
//!   "vertical1": [0.0, 0.96, 0.28],
//!   "vertical2": {"alpha_deg": 2.0, "gamma_deg": -1.5},
//!   "matches": [{"u1": 10.0, "v1": 20.0, "u2": 12.5, "v2": 19.0}]
//! }
//! ```
//!
//! Intrinsics are row-major, nested or flat. A vertical is either the unit
//! vanishing direction in camera coordinates or an IMU attitude.

use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::coplanarity::Correspondence;
use crate::error::{Error, Result};
use crate::geometry::{
    normalize_point, CameraIntrinsics, PixelPoint, PoseHypothesis, Rotation3, Stage,
};
use crate::ransac::RansacResult;
use crate::sim::SyntheticInstance;
use crate::vertical::{r_ver_from_imu, r_ver_from_vanishing, ImuAttitude, VerticalDirection};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Nested([[f64; 3]; 3]),
    Flat([f64; 9]),
}

impl MatrixSpec {
    pub fn to_matrix(&self) -> Matrix3<f64> {
        match self {
            MatrixSpec::Nested(r) => Matrix3::from_fn(|i, j| r[i][j]),
            MatrixSpec::Flat(v) => Matrix3::from_row_slice(v),
        }
    }

    pub fn nested(m: &Matrix3<f64>) -> Self {
        MatrixSpec::Nested(std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)])))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VerticalSpec {
    Direction([f64; 3]),
    Attitude { alpha_deg: f64, gamma_deg: f64 },
}

impl VerticalSpec {
    /// Gravity-alignment rotation; `field` names the entry in errors.
    pub fn r_ver(&self, field: &str) -> Result<Rotation3> {
        match *self {
            VerticalSpec::Direction(v) => {
                let dir = VerticalDirection::named(Vector3::from(v), field)?;
                Ok(r_ver_from_vanishing(&dir))
            }
            VerticalSpec::Attitude {
                alpha_deg,
                gamma_deg,
            } => {
                if !(alpha_deg.is_finite() && gamma_deg.is_finite()) {
                    return Err(Error::Parse(format!(
                        "{field}: attitude angles must be finite"
                    )));
                }
                Ok(r_ver_from_imu(&ImuAttitude::from_degrees(
                    alpha_deg, gamma_deg,
                )))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Match {
    pub u1: f64,
    pub v1: f64,
    pub u2: f64,
    pub v2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrespondenceFile {
    pub intrinsics1: MatrixSpec,
    pub intrinsics2: MatrixSpec,
    pub vertical1: VerticalSpec,
    pub vertical2: VerticalSpec,
    pub matches: Vec<Match>,
}

impl CorrespondenceFile {
    /// The noisy pixels and measured verticals of a synthetic scene.
    pub fn from_instance(inst: &SyntheticInstance) -> Self {
        let k = MatrixSpec::nested(inst.intrinsics.matrix());
        let v = |d: &VerticalDirection| {
            let a = d.as_vector();
            VerticalSpec::Direction([a.x, a.y, a.z])
        };
        Self {
            intrinsics1: k,
            intrinsics2: k,
            vertical1: v(&inst.vertical1),
            vertical2: v(&inst.vertical2),
            matches: inst
                .pixels1
                .iter()
                .zip(&inst.pixels2)
                .map(|(a, b)| Match {
                    u1: a.u,
                    v1: a.v,
                    u2: b.u,
                    v2: b.v,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Validated contents of a correspondence file.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub file: CorrespondenceFile,
    pub k1: CameraIntrinsics,
    pub k2: CameraIntrinsics,
    pub r_ver1: Rotation3,
    pub r_ver2: Rotation3,
    pub correspondences: Vec<Correspondence>,
}

fn intrinsics(spec: &MatrixSpec, field: &str) -> Result<CameraIntrinsics> {
    CameraIntrinsics::new(spec.to_matrix()).map_err(|e| Error::Parse(format!("{field}: {e}")))
}

pub fn parse_correspondences(text: &str) -> Result<Ingested> {
    let file: CorrespondenceFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let k1 = intrinsics(&file.intrinsics1, "intrinsics1")?;
    let k2 = intrinsics(&file.intrinsics2, "intrinsics2")?;
    let r_ver1 = file.vertical1.r_ver("vertical1")?;
    let r_ver2 = file.vertical2.r_ver("vertical2")?;
    let mut correspondences = Vec::with_capacity(file.matches.len());
    for (i, m) in file.matches.iter().enumerate() {
        if ![m.u1, m.v1, m.u2, m.v2].iter().all(|x| x.is_finite()) {
            return Err(Error::Parse(format!(
                "matches[{i}]: coordinates must be finite"
            )));
        }
        correspondences.push(Correspondence::new(
            normalize_point(&k1, PixelPoint::new(m.u1, m.v1)),
            normalize_point(&k2, PixelPoint::new(m.u2, m.v2)),
        ));
    }
    Ok(Ingested {
        file,
        k1,
        k2,
        r_ver1,
        r_ver2,
        correspondences,
    })
}

/// Reads and validates a correspondence file. Errors carry the path and,
/// for syntax errors, the line and column.
pub fn ingest_correspondences(path: &Path) -> Result<Ingested> {
    let text = std::fs::read_to_string(path)?;
    parse_correspondences(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_correspondences(path: &Path, file: &CorrespondenceFile) -> Result<()> {
    std::fs::write(path, file.to_json())?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseJson {
    /// Row-major.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    pub residual: f64,
    pub stage: Stage,
}

impl From<&PoseHypothesis> for PoseJson {
    fn from(p: &PoseHypothesis) -> Self {
        let r = p.rotation.matrix();
        let t = p.translation.as_vector();
        Self {
            rotation: std::array::from_fn(|i| std::array::from_fn(|j| r[(i, j)])),
            translation: [t.x, t.y, t.z],
            residual: p.residual,
            stage: p.stage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub hypotheses: Vec<PoseJson>,
    /// Index into `hypotheses` of the cheirality-selected pose, if any.
    pub selected: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RansacReport {
    pub pose: PoseJson,
    pub inliers: Vec<bool>,
    pub inlier_count: usize,
    pub iterations: usize,
}

impl From<&RansacResult> for RansacReport {
    fn from(r: &RansacResult) -> Self {
        Self {
            pose: PoseJson::from(&r.pose),
            inliers: r.inliers.clone(),
            inlier_count: r.inlier_count,
            iterations: r.iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_scene, trial_rng, SceneConfig};

    const MINIMAL: &str = r#"{
        "intrinsics1": [[400, 0, 176], [0, 400, 144], [0, 0, 1]],
        "intrinsics2": [400, 0, 176, 0, 400, 144, 0, 0, 1],
        "vertical1": [0, 1, 0],
        "vertical2": {"alpha_deg": 1.0, "gamma_deg": -2.0},
        "matches": [
            {"u1": 10, "v1": 20, "u2": 11, "v2": 21},
            {"u1": 100, "v1": 120, "u2": 98, "v2": 119},
            {"u1": 300, "v1": 40, "u2": 290, "v2": 45}
        ]
    }"#;

    #[test]
    fn minimal_file() {
        let ing = parse_correspondences(MINIMAL).unwrap();
        assert_eq!(ing.correspondences.len(), 3);
        assert_eq!(ing.k1.matrix(), ing.k2.matrix());
        assert_eq!(*ing.r_ver1.matrix(), Matrix3::identity());
        let m = ing.correspondences[0].m1;
        assert!((m.x() - (10.0 - 176.0) / 400.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_unit_vertical_by_name() {
        let text = MINIMAL.replace(r#""vertical1": [0, 1, 0]"#, r#""vertical1": [0, 0.9, 0]"#);
        let err = parse_correspondences(&text).unwrap_err().to_string();
        assert!(err.contains("vertical1"), "{err}");
    }

    #[test]
    fn rejects_singular_intrinsics_and_bad_rows() {
        let text = MINIMAL.replace(
            "[400, 0, 176, 0, 400, 144, 0, 0, 1]",
            "[400, 0, 176, 0, 0, 144, 0, 0, 1]",
        );
        let err = parse_correspondences(&text).unwrap_err().to_string();
        assert!(err.contains("intrinsics2"), "{err}");

        let text = MINIMAL.replace(r#""u2": 11,"#, "");
        let err = parse_correspondences(&text).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn instance_round_trip_is_bit_identical() {
        let cfg = SceneConfig {
            sigma: 0.7,
            vertical_error_deg: 0.3,
            ..Default::default()
        };
        let inst = generate_scene(&cfg, &mut trial_rng(11, 2)).unwrap();
        let file = CorrespondenceFile::from_instance(&inst);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        write_correspondences(&path, &file).unwrap();
        let back = ingest_correspondences(&path).unwrap();
        assert_eq!(back.file, file);
        for (a, b) in back.correspondences.iter().zip(&inst.correspondences) {
            assert_eq!(a, b);
        }
    }
}
