//! From algebraic solutions to relative poses: yaw rotation, composition
//! with the vertical alignments, cheirality and epipolar scoring.

use nalgebra::{Matrix3, Vector3};

use crate::coplanarity::{build_system, Correspondence, Solution};
use crate::error::Result;
use crate::geometry::{essential_from_pose, PoseHypothesis, Rotation3, Stage, Translation3};
use crate::solver::{solve_system_with, SolverOptions};
use crate::vertical::apply_vertical;

/// Rotation about `Y` by `φ = 2 atan(t)`, in the layout
/// `[[c, 0, -s], [0, 1, 0], [s, 0, c]]`.
pub fn r_phi(t: f64) -> Rotation3 {
    let w = 1.0 + t * t;
    let c = (1.0 - t * t) / w;
    let s = 2.0 * t / w;
    Rotation3::from_matrix_unchecked(Matrix3::new(c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c))
}

/// `R = R_ver2ᵀ R_φ R_ver1`, `T = R_ver2ᵀ T_aligned`.
pub fn compose_final(
    r_ver1: &Rotation3,
    r_ver2: &Rotation3,
    r_phi: &Rotation3,
    t: &Translation3,
) -> PoseHypothesis {
    let r2t = r_ver2.transpose();
    PoseHypothesis {
        rotation: r2t * *r_phi * *r_ver1,
        translation: Translation3(r2t.apply(t.as_vector())),
        residual: 0.0,
        stage: Stage::FinalComposed,
    }
}

/// Gravity-aligned pose of a raw solution `(Tx, Ty, Tz, t)`.
pub fn raw_candidate(s: &Solution) -> PoseHypothesis {
    PoseHypothesis {
        rotation: r_phi(s[3]),
        translation: Translation3::new(s[0], s[1], s[2]),
        residual: 0.0,
        stage: Stage::RawCandidate,
    }
}

/// Rotates both rays of a correspondence into the gravity-aligned frames.
pub fn align(c: &Correspondence, r_ver1: &Rotation3, r_ver2: &Rotation3) -> Correspondence {
    Correspondence::new(apply_vertical(r_ver1, &c.m1), apply_vertical(r_ver2, &c.m2))
}

/// Every pose consistent with a minimal sample given in the original
/// camera frames. Each hypothesis carries its max epipolar residual over
/// the sample.
pub fn solve_minimal(
    samples: &[Correspondence; 3],
    r_ver1: &Rotation3,
    r_ver2: &Rotation3,
) -> Result<Vec<PoseHypothesis>> {
    solve_minimal_with(samples, r_ver1, r_ver2, &SolverOptions::default())
}

pub fn solve_minimal_with(
    samples: &[Correspondence; 3],
    r_ver1: &Rotation3,
    r_ver2: &Rotation3,
    opts: &SolverOptions,
) -> Result<Vec<PoseHypothesis>> {
    let aligned = samples.map(|c| align(&c, r_ver1, r_ver2));
    let sys = build_system(&aligned);
    let sols = solve_system_with(&sys, opts)?;
    Ok(sols
        .iter()
        .map(|s| {
            let raw = raw_candidate(s);
            let mut pose = compose_final(r_ver1, r_ver2, &raw.rotation, &raw.translation);
            pose.residual = samples
                .iter()
                .map(|c| epipolar_residual(&pose, c))
                .fold(0.0, f64::max);
            pose
        })
        .collect())
}

/// Angle between a ray and a plane with normal `n`; `None` if either is zero.
fn ray_plane_angle(ray: &Vector3<f64>, n: &Vector3<f64>) -> Option<f64> {
    let d = ray.norm() * n.norm();
    (d > 0.0).then(|| (ray.dot(n).abs() / d).min(1.0).asin())
}

/// Symmetric angular epipolar residual in radians: the angle of `m2` to the
/// epipolar plane `E m1` and of `m1` to `Eᵀ m2`, averaged.
pub fn epipolar_residual(pose: &PoseHypothesis, c: &Correspondence) -> f64 {
    let e = essential_from_pose(&pose.rotation, &pose.translation);
    let m1 = c.m1.as_vector();
    let m2 = c.m2.as_vector();
    let a = ray_plane_angle(m2, &(e * m1));
    let b = ray_plane_angle(m1, &(e.transpose() * m2));
    match (a, b) {
        (Some(a), Some(b)) => 0.5 * (a + b),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => 0.0,
    }
}

/// Distances along both rays of the midpoint of closest approach, or
/// `None` when the rays are parallel.
pub fn midpoint_depths(pose: &PoseHypothesis, c: &Correspondence) -> Option<(f64, f64)> {
    let r = pose.rotation.matrix();
    let d1 = *c.m1.as_vector();
    // camera 2 centre and ray direction in camera 1 coordinates
    let c2 = -(r.transpose() * pose.translation.as_vector());
    let d2 = r.transpose() * c.m2.as_vector();
    let (a, b, cc) = (d1.dot(&d1), d1.dot(&d2), d2.dot(&d2));
    let (e, f) = (d1.dot(&c2), d2.dot(&c2));
    let denom = a * cc - b * b;
    if denom <= 1e-12 * a * cc {
        return None;
    }
    let l1 = (cc * e - b * f) / denom;
    let l2 = (b * e - a * f) / denom;
    let p = 0.5 * (d1 * l1 + c2 + d2 * l2);
    let depth1 = p.dot(&d1) / a;
    let q = r * p + pose.translation.as_vector();
    let m2 = c.m2.as_vector();
    let depth2 = q.dot(m2) / m2.dot(m2);
    Some((depth1, depth2))
}

/// Number of correspondences triangulated in front of both cameras. Rays
/// that do not meet (parallel) count as points at infinity, i.e. in front.
pub fn positive_depth_count(pose: &PoseHypothesis, samples: &[Correspondence]) -> usize {
    samples
        .iter()
        .filter(|c| match midpoint_depths(pose, c) {
            Some((z1, z2)) => z1 > 0.0 && z2 > 0.0,
            None => true,
        })
        .count()
}

/// Picks the candidate, trying both baseline signs, with the most points in
/// front of both cameras and then the smallest mean epipolar residual.
/// Returns `None` unless the winner has every sample in front.
pub fn cheirality_select(
    candidates: &[PoseHypothesis],
    samples: &[Correspondence],
) -> Option<PoseHypothesis> {
    let mut best: Option<(usize, f64, PoseHypothesis)> = None;
    for cand in candidates {
        for sign in [1.0, -1.0] {
            let mut pose = *cand;
            pose.translation = Translation3(cand.translation.0 * sign);
            let count = positive_depth_count(&pose, samples);
            let mean = if samples.is_empty() {
                0.0
            } else {
                samples
                    .iter()
                    .map(|c| epipolar_residual(&pose, c))
                    .sum::<f64>()
                    / samples.len() as f64
            };
            let better = match &best {
                None => true,
                Some((bc, bm, _)) => count > *bc || (count == *bc && mean < *bm),
            };
            if better {
                best = Some((count, mean, pose));
            }
        }
    }
    best.filter(|(count, _, _)| *count == samples.len())
        .map(|(_, _, pose)| pose)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rodrigues, rotation_angle_error, BearingVector};
    use approx::assert_abs_diff_eq;

    fn project(r: &Rotation3, t: &Vector3<f64>, x: &Vector3<f64>) -> Correspondence {
        let x2 = r.apply(x) + t;
        Correspondence::new(BearingVector(x / x.z), BearingVector(x2 / x2.z))
    }

    #[test]
    fn r_phi_cases() {
        assert_eq!(*r_phi(0.0).matrix(), Matrix3::identity());
        let q = r_phi(1.0);
        assert_abs_diff_eq!(q.angle(), std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(q.apply(&Vector3::y()), Vector3::y(), epsilon = 1e-15);
        let fifteen = 15f64.to_radians().tan();
        assert_abs_diff_eq!(
            rotation_angle_error(&Rotation3::identity(), &r_phi(fifteen)),
            30.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn compose_identity_verticals() {
        let rp = r_phi(0.3);
        let t = Translation3::new(0.6, 0.0, 0.8);
        let id = Rotation3::identity();
        let pose = compose_final(&id, &id, &rp, &t);
        assert_eq!(pose.rotation, rp);
        assert_eq!(pose.translation, t);
        assert_eq!(pose.stage, Stage::FinalComposed);
    }

    #[test]
    fn cheirality_prefers_true_sign() {
        let r = rodrigues(&Vector3::y(), 0.1).unwrap();
        let t = Vector3::new(0.3, 0.0, 0.05);
        let pts = [
            Vector3::new(0.2, 0.1, 2.0),
            Vector3::new(-0.4, 0.3, 1.5),
            Vector3::new(0.1, -0.2, 2.4),
            Vector3::new(0.5, 0.4, 1.1),
        ];
        let samples: Vec<_> = pts.iter().map(|x| project(&r, &t, x)).collect();
        let truth = PoseHypothesis {
            rotation: r,
            translation: Translation3(t.normalize()),
            residual: 0.0,
            stage: Stage::FinalComposed,
        };
        let mut flipped = truth;
        flipped.translation = -truth.translation;
        assert_eq!(positive_depth_count(&truth, &samples), 4);
        assert_eq!(positive_depth_count(&flipped, &samples), 0);
        let chosen = cheirality_select(&[flipped], &samples).unwrap();
        assert_abs_diff_eq!(chosen.translation.0, truth.translation.0, epsilon = 1e-15);
        assert!(cheirality_select(&[], &samples).is_none());
        for c in &samples {
            assert!(epipolar_residual(&truth, c) < 1e-12);
        }
    }

    #[test]
    fn residual_of_out_of_plane_perturbation() {
        let pose = PoseHypothesis {
            rotation: Rotation3::identity(),
            translation: Translation3::new(1.0, 0.0, 0.0),
            residual: 0.0,
            stage: Stage::FinalComposed,
        };
        // epipolar plane of m1 = (0, 0, 1) is y = 0; tilt m2 out of it by 1 mrad
        let eps: f64 = 1e-3;
        let m1 = BearingVector::new(0.0, 0.0, 1.0);
        let m2 = BearingVector::new(0.0, eps.sin(), eps.cos());
        let r = epipolar_residual(&pose, &Correspondence::new(m1, m2));
        assert_abs_diff_eq!(r, eps, epsilon = 1e-9);
    }

    #[test]
    fn minimal_solve_recovers_pose_with_tilted_views() {
        let r_ver1 = rodrigues(&Vector3::new(1.0, 0.0, 1.0).normalize(), 0.12).unwrap();
        let r_ver2 = rodrigues(&Vector3::new(1.0, 0.0, -1.0).normalize(), -0.07).unwrap();
        let rp = r_phi(0.08);
        let ta = Vector3::new(0.9, 0.1, 0.3).normalize();
        let pose = compose_final(&r_ver1, &r_ver2, &rp, &Translation3(ta));
        let pts = [
            Vector3::new(0.2, 0.1, 2.0),
            Vector3::new(-0.4, 0.3, 1.5),
            Vector3::new(0.1, -0.2, 2.4),
        ];
        let samples = pts.map(|x| project(&pose.rotation, pose.translation.as_vector(), &x));
        let hyps = solve_minimal(&samples, &r_ver1, &r_ver2).unwrap();
        let best = hyps
            .iter()
            .map(|h| {
                rotation_angle_error(&pose.rotation, &h.rotation)
                    + (h.translation.0 - pose.translation.0).norm().to_degrees()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-8, "{best}");
        for h in &hyps {
            assert!(h.residual < 1e-9);
            assert!(h.rotation.orthonormality_error() < 1e-10);
            assert_abs_diff_eq!(h.translation.norm(), 1.0, epsilon = 1e-10);
        }
    }
}
