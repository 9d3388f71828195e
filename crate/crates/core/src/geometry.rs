//! Geometric primitives shared by every stage of the solver: calibrated
//! rays, rotations, scale-free baselines and the error metrics used to
//! compare poses.

use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Image point in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
}

impl PixelPoint {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }
}

/// Upper-triangular pinhole calibration matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    k: Matrix3<f64>,
    k_inv: Matrix3<f64>,
}

impl CameraIntrinsics {
    /// Validates that `k` is upper triangular with a strictly positive
    /// diagonal, which also makes it invertible.
    pub fn new(k: Matrix3<f64>) -> Result<Self> {
        if k.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidCalibration("non-finite entry".into()));
        }
        if k[(1, 0)] != 0.0 || k[(2, 0)] != 0.0 || k[(2, 1)] != 0.0 {
            return Err(Error::InvalidCalibration(
                "matrix is not upper triangular".into(),
            ));
        }
        if (0..3).any(|i| k[(i, i)] <= 0.0) {
            return Err(Error::InvalidCalibration(
                "diagonal entries must be positive".into(),
            ));
        }
        let k_inv = k
            .try_inverse()
            .ok_or_else(|| Error::InvalidCalibration("matrix is singular".into()))?;
        Ok(Self { k, k_inv })
    }

    pub fn from_focal(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        Self::new(Matrix3::new(fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0))
    }

    /// Square-pixel camera whose horizontal field of view spans the image
    /// width, principal point at the image centre.
    pub fn from_fov(width: f64, height: f64, fov_deg: f64) -> Result<Self> {
        let f = focal_from_fov(width, fov_deg);
        Self::from_focal(f, f, width / 2.0, height / 2.0)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.k
    }

    pub fn inverse(&self) -> &Matrix3<f64> {
        &self.k_inv
    }

    pub fn focal_x(&self) -> f64 {
        self.k[(0, 0)]
    }

    /// Projects a ray with positive third component back to pixels.
    pub fn project(&self, ray: &BearingVector) -> PixelPoint {
        let p = self.k * ray.0;
        PixelPoint::new(p.x / p.z, p.y / p.z)
    }
}

/// Pixel focal length giving a horizontal field of view `fov_deg` across `width` pixels.
pub fn focal_from_fov(width: f64, fov_deg: f64) -> f64 {
    (width / 2.0) / (fov_deg.to_radians() / 2.0).tan()
}

/// Homogeneous image ray. Rays built from pixels have `z == 1`; rays
/// rotated into the gravity-aligned frame keep all three components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BearingVector(pub Vector3<f64>);

impl BearingVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vector3::new(x, y, z))
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Proper rotation stored as a 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3(Matrix3<f64>);

impl Rotation3 {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Wraps `m` without checking orthonormality.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    /// Wraps `m` after checking `RᵀR = I` and `det R = 1` within `tol`.
    pub fn from_matrix(m: Matrix3<f64>, tol: f64) -> Result<Self> {
        let r = Self(m);
        if r.orthonormality_error() > tol || (m.determinant() - 1.0).abs() > tol {
            return Err(Error::Degenerate("matrix is not a proper rotation".into()));
        }
        Ok(r)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Max-abs entry of `RᵀR - I`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity()).amax()
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    /// Rotation angle in radians, in `[0, π]`.
    ///
    /// Uses `atan2(sin, cos)` with the sine taken from the skew part, which
    /// stays accurate for tiny angles where `acos` of the trace bottoms out
    /// near 1e-8 rad.
    pub fn angle(&self) -> f64 {
        let m = &self.0;
        let s = 0.5
            * Vector3::new(
                m[(2, 1)] - m[(1, 2)],
                m[(0, 2)] - m[(2, 0)],
                m[(1, 0)] - m[(0, 1)],
            )
            .norm();
        let c = 0.5 * (m.trace() - 1.0);
        s.atan2(c)
    }
}

impl Mul for Rotation3 {
    type Output = Rotation3;

    fn mul(self, rhs: Rotation3) -> Rotation3 {
        Rotation3(self.0 * rhs.0)
    }
}

/// Scale-free baseline direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Translation3(pub Vector3<f64>);

impl Translation3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vector3::new(x, y, z))
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.0.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(Self(self.0 / n))
    }
}

impl std::ops::Neg for Translation3 {
    type Output = Translation3;

    fn neg(self) -> Translation3 {
        Translation3(-self.0)
    }
}

/// Where a hypothesis sits in the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Yaw rotation and baseline in the gravity-aligned frames.
    RawCandidate,
    /// Relative pose between the original camera frames.
    FinalComposed,
}

/// Relative pose `X2 = R X1 + T` with the max epipolar residual (radians)
/// over the sample it was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseHypothesis {
    pub rotation: Rotation3,
    pub translation: Translation3,
    pub residual: f64,
    pub stage: Stage,
}

/// `K⁻¹ (u, v, 1)ᵀ`, rescaled so the third component is exactly one.
pub fn normalize_point(k: &CameraIntrinsics, m: PixelPoint) -> BearingVector {
    let r = k.inverse() * Vector3::new(m.u, m.v, 1.0);
    BearingVector(r / r.z)
}

/// Skew matrix of the baseline in the coplanarity layout
/// `[[0, Tz, -Ty], [-Tz, 0, Tx], [Ty, -Tx, 0]]`.
pub fn coplanarity_skew(t: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, t.z, -t.y, -t.z, 0.0, t.x, t.y, -t.x, 0.0)
}

/// Standard cross-product matrix, `[v]ₓ w = v × w`.
pub fn cross_matrix(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rotation of `angle` radians about the unit `axis`.
pub fn rodrigues(axis: &Vector3<f64>, angle: f64) -> Result<Rotation3> {
    let norm = axis.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitAxis { norm });
    }
    let (s, c) = angle.sin_cos();
    let m = Matrix3::identity() * c + cross_matrix(axis) * s + axis * axis.transpose() * (1.0 - c);
    Ok(Rotation3(m))
}

/// Essential matrix for `X2 = R X1 + T`, built with [`coplanarity_skew`].
pub fn essential_from_pose(r: &Rotation3, t: &Translation3) -> Matrix3<f64> {
    coplanarity_skew(&t.0) * r.0
}

/// Angle of `R_trueᵀ R_est` in degrees.
pub fn rotation_angle_error(r_true: &Rotation3, r_est: &Rotation3) -> f64 {
    (r_true.transpose() * *r_est).angle().to_degrees()
}

/// Angle between two baseline directions in degrees, folded to `[0, 90]`
/// since the sign of a scale-free baseline is not observable from the
/// epipolar constraint alone.
pub fn translation_angle_error(t_true: &Translation3, t_est: &Translation3) -> Result<f64> {
    let (a, b) = (t_true.norm(), t_est.norm());
    if a == 0.0 || b == 0.0 {
        return Err(Error::ZeroVector);
    }
    let theta = t_true
        .0
        .cross(&t_est.0)
        .norm()
        .atan2(t_true.0.dot(&t_est.0))
        .to_degrees();
    Ok(theta.min(180.0 - theta))
}

pub(crate) fn clamped_acos(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    #[test]
    fn normalize_identity_and_focal() {
        let id = CameraIntrinsics::new(Matrix3::identity()).unwrap();
        let r = normalize_point(&id, PixelPoint::new(3.0, 4.0));
        assert_eq!(r, BearingVector::new(3.0, 4.0, 1.0));

        let k = CameraIntrinsics::from_focal(2.0, 2.0, 0.0, 0.0).unwrap();
        let r = normalize_point(&k, PixelPoint::new(4.0, 6.0));
        assert_eq!(r, BearingVector::new(2.0, 3.0, 1.0));
    }

    #[test]
    fn principal_point_maps_to_optical_axis() {
        let k = CameraIntrinsics::from_focal(424.9, 424.9, 176.0, 144.0).unwrap();
        // direct inverse of the matrix, independent of the cached one
        let inv = k.matrix().try_inverse().unwrap();
        let direct = inv * Vector3::new(176.0, 144.0, 1.0);
        let r = normalize_point(&k, PixelPoint::new(176.0, 144.0));
        assert_abs_diff_eq!(r.0, direct, epsilon = 1e-15);
        assert_abs_diff_eq!(r.0, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_calibration() {
        let singular = Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert!(matches!(
            CameraIntrinsics::new(singular),
            Err(Error::InvalidCalibration(_))
        ));
        let lower = Matrix3::new(1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(CameraIntrinsics::new(lower).is_err());
    }

    #[test]
    fn fov_focal() {
        let f = focal_from_fov(352.0, 45.0);
        assert_abs_diff_eq!(f, 424.9, epsilon = 0.05);
        assert_abs_diff_eq!(1.0 / f, 2.35e-3, epsilon = 1e-5);
    }

    #[test]
    fn rodrigues_cases() {
        let axis = Vector3::new(0.0, 0.6, 0.8);
        assert_abs_diff_eq!(
            *rodrigues(&axis, 0.0).unwrap().matrix(),
            Matrix3::identity()
        );

        let r = rodrigues(&Vector3::z(), FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(r.apply(&Vector3::x()), Vector3::y(), epsilon = 1e-15);

        let r = rodrigues(&Vector3::x(), FRAC_PI_3).unwrap();
        assert_abs_diff_eq!(r.matrix().trace(), 2.0, epsilon = 1e-15);

        assert!(matches!(
            rodrigues(&Vector3::new(1.0, 1.0, 0.0), 0.3),
            Err(Error::NonUnitAxis { .. })
        ));
    }

    #[test]
    fn essential_identity_forward() {
        let e = essential_from_pose(&Rotation3::identity(), &Translation3::new(0.0, 0.0, 1.0));
        let expected = Matrix3::new(0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(e, expected);
    }

    #[test]
    fn angle_errors() {
        let a = rodrigues(&Vector3::new(0.0, 0.0, 1.0), 0.4).unwrap();
        assert_abs_diff_eq!(rotation_angle_error(&a, &a), 0.0, epsilon = 1e-6);

        let axis = Vector3::new(1.0, 2.0, 2.0) / 3.0;
        let ten = rodrigues(&axis, 10f64.to_radians()).unwrap();
        assert_abs_diff_eq!(rotation_angle_error(&a, &(a * ten)), 10.0, epsilon = 1e-9);

        let half = rodrigues(&axis, PI).unwrap();
        assert_abs_diff_eq!(rotation_angle_error(&a, &(a * half)), 180.0, epsilon = 1e-6);

        let t = Translation3::new(1.0, 0.0, 0.0);
        assert_eq!(translation_angle_error(&t, &t).unwrap(), 0.0);
        assert_eq!(translation_angle_error(&t, &-t).unwrap(), 0.0);
        let diag = Translation3::new(1.0, 1.0, 0.0).normalized().unwrap();
        assert_abs_diff_eq!(
            translation_angle_error(&t, &diag).unwrap(),
            45.0,
            epsilon = 1e-12
        );
        assert!(matches!(
            translation_angle_error(&t, &Translation3::new(0.0, 0.0, 0.0)),
            Err(Error::ZeroVector)
        ));
    }
}
