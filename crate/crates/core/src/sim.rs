//! Synthetic two-view scenes and the noise / vertical-error sweeps run on
//! them.

use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coplanarity::Correspondence;
use crate::error::{Error, Result};
use crate::geometry::{
    normalize_point, rodrigues, rotation_angle_error, translation_angle_error, BearingVector,
    CameraIntrinsics, PixelPoint, PoseHypothesis, Rotation3, Translation3,
};
use crate::pipeline::{cheirality_select, compose_final, r_phi, solve_minimal};
use crate::vertical::{r_ver_from_imu, r_ver_from_vanishing, ImuAttitude, VerticalDirection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Motion {
    /// Camera 2 displaced along camera 1's X axis.
    #[default]
    Sideway,
    /// Camera 2 displaced along the optical axis.
    Forward,
}

impl std::str::FromStr for Motion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sideway" | "sideways" => Ok(Motion::Sideway),
            "forward" => Ok(Motion::Forward),
            other => Err(Error::InvalidConfig(format!("unknown motion `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub motion: Motion,
    /// In units of the scene distance.
    pub baseline: f64,
    pub fov_deg: f64,
    pub width: f64,
    pub height: f64,
    pub depth_min: f64,
    pub depth_max: f64,
    pub planar: bool,
    pub plane_depth: f64,
    /// Pixel noise standard deviation.
    pub sigma: f64,
    /// Angle by which each measured vertical is tilted away from the truth.
    pub vertical_error_deg: f64,
    /// Yaw between the views is uniform in `±yaw_range_deg`.
    pub yaw_range_deg: f64,
    /// Pitch and roll of each camera are uniform in `±tilt_range_deg`.
    pub tilt_range_deg: f64,
    /// Correspondences per scene. The first three form the minimal sample;
    /// all of them are used to pick among the candidate poses.
    pub points: usize,
    pub trials: usize,
    pub seed: u64,
    /// Adds wall-clock solve times to experiment records. Off by default so
    /// records are byte-for-byte reproducible.
    pub record_timing: bool,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            motion: Motion::Sideway,
            baseline: 0.3,
            fov_deg: 45.0,
            width: 352.0,
            height: 288.0,
            depth_min: 0.5,
            depth_max: 2.5,
            planar: false,
            plane_depth: 2.0,
            sigma: 0.0,
            vertical_error_deg: 0.0,
            yaw_range_deg: 10.0,
            tilt_range_deg: 10.0,
            points: 20,
            trials: 2500,
            seed: 0,
            record_timing: false,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("baseline", self.baseline),
            ("fov_deg", self.fov_deg),
            ("width", self.width),
            ("height", self.height),
            ("depth_min", self.depth_min),
            ("plane_depth", self.plane_depth),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.fov_deg < 180.0) {
            return Err(Error::InvalidConfig("fov_deg must be below 180".into()));
        }
        if !(self.depth_max >= self.depth_min) {
            return Err(Error::InvalidConfig(
                "depth_max must be at least depth_min".into(),
            ));
        }
        let non_negative = [
            ("sigma", self.sigma),
            ("vertical_error_deg", self.vertical_error_deg),
            ("yaw_range_deg", self.yaw_range_deg),
            ("tilt_range_deg", self.tilt_range_deg),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if self.points < 3 {
            return Err(Error::InvalidConfig("points must be at least 3".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        Ok(())
    }

    pub fn intrinsics(&self) -> Result<CameraIntrinsics> {
        CameraIntrinsics::from_fov(self.width, self.height, self.fov_deg)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    /// True relative pose, `X2 = R X1 + T` with unit `T`.
    pub rotation: Rotation3,
    pub translation: Translation3,
    /// True gravity alignments of both views.
    pub r_ver1: Rotation3,
    pub r_ver2: Rotation3,
    /// Measured verticals (perturbed by the configured error).
    pub vertical1: VerticalDirection,
    pub vertical2: VerticalDirection,
    pub intrinsics: CameraIntrinsics,
    /// Points in camera 1 coordinates.
    pub points: Vec<Vector3<f64>>,
    pub pixels1: Vec<PixelPoint>,
    pub pixels2: Vec<PixelPoint>,
    pub clean_pixels1: Vec<PixelPoint>,
    pub clean_pixels2: Vec<PixelPoint>,
    /// Bearing vectors from the noisy pixels.
    pub correspondences: Vec<Correspondence>,
    pub clean_correspondences: Vec<Correspondence>,
}

impl SyntheticInstance {
    pub fn minimal_sample(&self) -> [Correspondence; 3] {
        [
            self.correspondences[0],
            self.correspondences[1],
            self.correspondences[2],
        ]
    }
}

/// Random generator for trial `trial` of a run seeded with `seed`: one
/// ChaCha stream per trial, so trials can run in any order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn symmetric(rng: &mut ChaCha8Rng, half: f64) -> f64 {
    rng.random_range(-1.0..=1.0) * half
}

/// Tilts `v` by `angle` radians about a random axis perpendicular to it.
fn perturb_vertical(rng: &mut ChaCha8Rng, v: &Vector3<f64>, angle: f64) -> Vector3<f64> {
    let helper = if v.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::z()
    };
    let u = v.cross(&helper).normalize();
    let w = v.cross(&u);
    let psi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let axis = u * psi.cos() + w * psi.sin();
    rodrigues(&axis, angle).expect("axis is unit").apply(v)
}

/// Draws a scene. The random stream is consumed identically for every
/// noise level and vertical error, so sweeping either reuses the geometry.
pub fn generate_scene(cfg: &SceneConfig, rng: &mut ChaCha8Rng) -> Result<SyntheticInstance> {
    cfg.validate()?;
    let k = cfg.intrinsics()?;
    let tilt = cfg.tilt_range_deg.to_radians();
    let r_ver1 = r_ver_from_imu(&ImuAttitude {
        alpha: symmetric(rng, tilt),
        gamma: symmetric(rng, tilt),
    });
    let r_ver2 = r_ver_from_imu(&ImuAttitude {
        alpha: symmetric(rng, tilt),
        gamma: symmetric(rng, tilt),
    });
    let phi = symmetric(rng, cfg.yaw_range_deg.to_radians());
    let rp = r_phi((phi / 2.0).tan());

    // Camera 2's centre along camera 1's x or optical axis, then expressed
    // in camera 1's gravity-aligned frame.
    let centre = match cfg.motion {
        Motion::Sideway => Vector3::new(cfg.baseline, 0.0, 0.0),
        Motion::Forward => Vector3::new(0.0, 0.0, cfg.baseline),
    };
    let centre = r_ver1.apply(&centre);
    let t_aligned = -rp.apply(&centre);
    let truth = compose_final(&r_ver1, &r_ver2, &rp, &Translation3(t_aligned));
    let (rotation, t_full) = (truth.rotation, truth.translation);

    let in_image =
        |p: &PixelPoint| p.u >= 0.0 && p.u <= cfg.width && p.v >= 0.0 && p.v <= cfg.height;
    let mut points = Vec::with_capacity(cfg.points);
    let max_attempts = 200 * cfg.points;
    for _ in 0..max_attempts {
        if points.len() == cfg.points {
            break;
        }
        let u = rng.random_range(0.0..cfg.width);
        let v = rng.random_range(0.0..cfg.height);
        let depth = if cfg.planar {
            cfg.plane_depth
        } else {
            rng.random_range(cfg.depth_min..=cfg.depth_max)
        };
        let ray = normalize_point(&k, PixelPoint::new(u, v));
        let x1 = ray.as_vector() * depth;
        let x2 = rotation.apply(&x1) + t_full.as_vector();
        if x2.z <= 0.0 || !in_image(&k.project(&BearingVector(x2))) {
            continue;
        }
        points.push(x1);
    }
    if points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "only {} of the requested points are visible in both views",
            points.len()
        )));
    }

    let translation = t_full.normalized()?;
    let mut clean_pixels1 = Vec::with_capacity(points.len());
    let mut clean_pixels2 = Vec::with_capacity(points.len());
    let mut pixels1 = Vec::with_capacity(points.len());
    let mut pixels2 = Vec::with_capacity(points.len());
    for x1 in &points {
        let x2 = rotation.apply(x1) + t_full.as_vector();
        let p1 = k.project(&BearingVector(*x1));
        let p2 = k.project(&BearingVector(x2));
        let n: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        pixels1.push(PixelPoint::new(
            p1.u + cfg.sigma * n[0],
            p1.v + cfg.sigma * n[1],
        ));
        pixels2.push(PixelPoint::new(
            p2.u + cfg.sigma * n[2],
            p2.v + cfg.sigma * n[3],
        ));
        clean_pixels1.push(p1);
        clean_pixels2.push(p2);
    }
    let to_corr = |a: &[PixelPoint], b: &[PixelPoint]| -> Vec<Correspondence> {
        a.iter()
            .zip(b)
            .map(|(p, q)| Correspondence::new(normalize_point(&k, *p), normalize_point(&k, *q)))
            .collect()
    };
    let correspondences = to_corr(&pixels1, &pixels2);
    // exact bearings, without the round trip through pixels
    let clean_correspondences = points
        .iter()
        .map(|x1| {
            let x2 = rotation.apply(x1) + t_full.as_vector();
            Correspondence::new(BearingVector(x1 / x1.z), BearingVector(x2 / x2.z))
        })
        .collect();

    let err = cfg.vertical_error_deg.to_radians();
    let v1_true = r_ver1.transpose().apply(&Vector3::y());
    let v2_true = r_ver2.transpose().apply(&Vector3::y());
    let v1 = perturb_vertical(rng, &v1_true, err);
    let v2 = perturb_vertical(rng, &v2_true, err);

    Ok(SyntheticInstance {
        rotation,
        translation,
        r_ver1,
        r_ver2,
        vertical1: VerticalDirection::named(v1, "vertical1")?,
        vertical2: VerticalDirection::named(v2, "vertical2")?,
        intrinsics: k,
        points,
        pixels1,
        pixels2,
        clean_pixels1,
        clean_pixels2,
        correspondences,
        clean_correspondences,
    })
}

/// Outcome of one trial: pose errors in degrees and solve time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub rot_err_deg: f64,
    pub trans_err_deg: f64,
    pub solve_us: f64,
}

/// Minimal solve on the first three correspondences, candidate selection
/// over all of them, and comparison with the ground truth. `None` marks a
/// failed trial.
pub fn run_trial(inst: &SyntheticInstance) -> Option<TrialOutcome> {
    let r1 = r_ver_from_vanishing(&inst.vertical1);
    let r2 = r_ver_from_vanishing(&inst.vertical2);
    let start = Instant::now();
    let hyps = solve_minimal(&inst.minimal_sample(), &r1, &r2).ok()?;
    let solve_us = start.elapsed().as_secs_f64() * 1e6;
    let pose: PoseHypothesis = cheirality_select(&hyps, &inst.correspondences)?;
    Some(TrialOutcome {
        rot_err_deg: rotation_angle_error(&inst.rotation, &pose.rotation),
        trans_err_deg: translation_angle_error(&inst.translation, &pose.translation).ok()?,
        solve_us,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Levels are pixel noise sigmas.
    Noise,
    /// Levels are vertical errors in degrees.
    Vertical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub level: f64,
    pub mean_rot_err_deg: f64,
    pub median_rot_err_deg: f64,
    pub mean_trans_err_deg: f64,
    pub median_trans_err_deg: f64,
    pub failures: usize,
    pub mean_solve_us: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub config: SceneConfig,
    pub sweep: SweepKind,
    pub rows: Vec<ExperimentRow>,
}

pub const CSV_HEADER: &str = "sigma_or_vertical_err,mean_rot_err_deg,median_rot_err_deg,mean_trans_err_deg,median_trans_err_deg,failures,mean_solve_us";

impl ExperimentRecord {
    /// One header line, then one line per level. `mean_solve_us` is left
    /// empty when timing was not recorded.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let timing = r.mean_solve_us.map_or(String::new(), |t| format!("{t:.3}"));
            writeln!(
                out,
                "{},{:e},{:e},{:e},{:e},{},{}",
                r.level,
                r.mean_rot_err_deg,
                r.median_rot_err_deg,
                r.mean_trans_err_deg,
                r.median_trans_err_deg,
                r.failures,
                timing
            )
            .expect("writing to a String cannot fail");
        }
        out
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn run_level(cfg: &SceneConfig, level: f64) -> ExperimentRow {
    let outcomes: Vec<Option<TrialOutcome>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, trial);
            generate_scene(cfg, &mut rng)
                .ok()
                .and_then(|inst| run_trial(&inst))
        })
        .collect();
    let ok: Vec<TrialOutcome> = outcomes.iter().flatten().copied().collect();
    let rot: Vec<f64> = ok.iter().map(|o| o.rot_err_deg).collect();
    let trans: Vec<f64> = ok.iter().map(|o| o.trans_err_deg).collect();
    let times: Vec<f64> = ok.iter().map(|o| o.solve_us).collect();
    ExperimentRow {
        level,
        mean_rot_err_deg: mean(&rot),
        median_rot_err_deg: median(&rot),
        mean_trans_err_deg: mean(&trans),
        median_trans_err_deg: median(&trans),
        failures: outcomes.len() - ok.len(),
        mean_solve_us: cfg.record_timing.then(|| mean(&times)),
    }
}

/// Runs `cfg.trials` scenes per pixel noise level.
pub fn run_noise_sweep(cfg: &SceneConfig, sigmas: &[f64]) -> Result<ExperimentRecord> {
    cfg.validate()?;
    let rows = sigmas
        .iter()
        .map(|&s| {
            let level_cfg = SceneConfig {
                sigma: s,
                ..cfg.clone()
            };
            level_cfg.validate().map(|_| run_level(&level_cfg, s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentRecord {
        config: cfg.clone(),
        sweep: SweepKind::Noise,
        rows,
    })
}

/// Runs `cfg.trials` scenes per vertical error (degrees) at `cfg.sigma`.
pub fn run_vertical_sweep(cfg: &SceneConfig, errors_deg: &[f64]) -> Result<ExperimentRecord> {
    cfg.validate()?;
    let rows = errors_deg
        .iter()
        .map(|&e| {
            let level_cfg = SceneConfig {
                vertical_error_deg: e,
                ..cfg.clone()
            };
            level_cfg.validate().map(|_| run_level(&level_cfg, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentRecord {
        config: cfg.clone(),
        sweep: SweepKind::Vertical,
        rows,
    })
}

/// `start, start + step, …` up to and including `stop` (within rounding).
pub fn levels(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) {
        return Err(Error::InvalidConfig(format!(
            "invalid level range {start}..{stop} step {step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    // round to the step's decimal grid so 0.6000000000000001 prints as 0.6
    Ok((0..=n)
        .map(|i| {
            let x = start + i as f64 * step;
            (x * 1e9).round() / 1e9
        })
        .collect())
}
