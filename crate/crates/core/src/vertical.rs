//! Gravity alignment: the rotation that maps a camera's vertical direction
//! onto the world `Y` axis, from either an IMU attitude or a vertical
//! vanishing direction.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{clamped_acos, rodrigues, BearingVector, Rotation3};

/// Norm deviation up to which a vertical direction is silently renormalized.
pub const VERTICAL_NORM_TOLERANCE: f64 = 1e-6;

/// Pitch (about X) and roll (about Z) in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuAttitude {
    pub alpha: f64,
    pub gamma: f64,
}

impl ImuAttitude {
    pub fn from_degrees(alpha_deg: f64, gamma_deg: f64) -> Self {
        Self {
            alpha: alpha_deg.to_radians(),
            gamma: gamma_deg.to_radians(),
        }
    }
}

/// Unit vector, in camera coordinates, pointing at the vertical vanishing point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalDirection(Vector3<f64>);

impl VerticalDirection {
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        Self::named(v, "vertical")
    }

    /// Like [`VerticalDirection::new`], reporting `field` on rejection.
    pub fn named(v: Vector3<f64>, field: &str) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > VERTICAL_NORM_TOLERANCE {
            return Err(Error::NonUnitVertical {
                field: field.to_string(),
                norm,
            });
        }
        Ok(Self(v / norm))
    }

    /// Camera-frame vertical implied by an attitude: `R_verᵀ (0, 1, 0)ᵀ`.
    pub fn from_attitude(att: &ImuAttitude) -> Self {
        let r = r_ver_from_imu(att);
        Self(r.transpose().apply(&Vector3::y()))
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }
}

/// `Rz(γ) · Rx(α)`.
pub fn r_ver_from_imu(att: &ImuAttitude) -> Rotation3 {
    let (sg, cg) = att.gamma.sin_cos();
    let (sa, ca) = att.alpha.sin_cos();
    let rz = Matrix3::new(cg, -sg, 0.0, sg, cg, 0.0, 0.0, 0.0, 1.0);
    let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, ca, -sa, 0.0, sa, ca);
    Rotation3::from_matrix_unchecked(rz * rx)
}

/// Rotation taking `v` onto `(0, 1, 0)`.
///
/// The axis is `v × Y / ‖v × Y‖ = (-Vz, 0, Vx) / d`, which is the sign that
/// makes `R v = Y` hold. When `v` is (anti)parallel to `Y` the axis is
/// undefined: `+Y` gives the identity, `-Y` a half turn about X.
pub fn r_ver_from_vanishing(v: &VerticalDirection) -> Rotation3 {
    let v = v.0;
    let d = (v.z * v.z + v.x * v.x).sqrt();
    if d < 1e-12 {
        if v.y > 0.0 {
            return Rotation3::identity();
        }
        return Rotation3::from_matrix_unchecked(Matrix3::new(
            1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0,
        ));
    }
    let axis = Vector3::new(-v.z / d, 0.0, v.x / d);
    let theta = clamped_acos(v.y);
    rodrigues(&axis, theta).expect("axis is unit by construction")
}

/// Rotates a ray into the gravity-aligned frame, keeping all three
/// components (no division by the third coordinate).
pub fn apply_vertical(r_ver: &Rotation3, m: &BearingVector) -> BearingVector {
    BearingVector(r_ver.apply(&m.0))
}
