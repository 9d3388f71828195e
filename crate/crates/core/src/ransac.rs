//! Hypothesize-and-verify estimation over many correspondences with the
//! three-point solver.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coplanarity::Correspondence;
use crate::error::{Error, Result};
use crate::geometry::{PoseHypothesis, Rotation3, Translation3};
use crate::pipeline::{epipolar_residual, positive_depth_count, solve_minimal};

/// Minimal samples evaluated together; the stopping rule is checked between
/// batches so that parallel evaluation cannot change the result.
const BATCH: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RansacConfig {
    /// Inlier threshold on the angular epipolar residual, radians.
    pub threshold: f64,
    pub confidence: f64,
    pub max_iterations: usize,
    /// Extra minimal samples drawn from the best consensus set when
    /// re-selecting the final pose.
    pub reselect_samples: usize,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            threshold: 4e-3,
            confidence: 0.999,
            max_iterations: 1000,
            reselect_samples: 200,
            seed: 0,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "threshold must be positive, got {}",
                self.threshold
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacResult {
    pub pose: PoseHypothesis,
    pub inliers: Vec<bool>,
    pub iterations: usize,
    pub inlier_count: usize,
}

/// Consensus of one hypothesis: inlier count and truncated quadratic cost.
#[derive(Debug, Clone, Copy)]
struct Score {
    count: usize,
    cost: f64,
}

impl Score {
    fn beats(&self, other: &Score) -> bool {
        self.count > other.count || (self.count == other.count && self.cost < other.cost)
    }
}

fn score(pose: &PoseHypothesis, data: &[Correspondence], threshold: f64) -> Score {
    let mut count = 0;
    let mut cost = 0.0;
    for c in data {
        let r = epipolar_residual(pose, c);
        if r < threshold {
            count += 1;
            cost += r * r;
        } else {
            cost += threshold * threshold;
        }
    }
    Score { count, cost }
}

/// Best hypothesis from one minimal sample: candidates are kept only with
/// the baseline sign that puts all three sample points in front.
fn evaluate(
    idx: &[usize; 3],
    data: &[Correspondence],
    r_ver1: &Rotation3,
    r_ver2: &Rotation3,
    threshold: f64,
) -> Option<(Score, PoseHypothesis)> {
    let sample = idx.map(|i| data[i]);
    let hyps = solve_minimal(&sample, r_ver1, r_ver2).ok()?;
    let mut best: Option<(Score, PoseHypothesis)> = None;
    for h in hyps {
        // the solver emits both signs of every baseline
        if positive_depth_count(&h, &sample) < 3 {
            continue;
        }
        let s = score(&h, data, threshold);
        if best.as_ref().is_none_or(|(b, _)| s.beats(b)) {
            best = Some((s, h));
        }
    }
    best
}

fn best_of(
    samples: &[[usize; 3]],
    data: &[Correspondence],
    r_ver1: &Rotation3,
    r_ver2: &Rotation3,
    threshold: f64,
) -> Option<(Score, PoseHypothesis)> {
    let results: Vec<_> = samples
        .par_iter()
        .map(|idx| evaluate(idx, data, r_ver1, r_ver2, threshold))
        .collect();
    // sequential reduction keeps ties resolved by sample order
    let mut best: Option<(Score, PoseHypothesis)> = None;
    for (s, h) in results.into_iter().flatten() {
        if best.as_ref().is_none_or(|(b, _)| s.beats(b)) {
            best = Some((s, h));
        }
    }
    best
}

/// Lowest truncated cost; used once the consensus set is fixed and inlier
/// counts no longer discriminate between good hypotheses.
fn best_by_cost(
    samples: &[[usize; 3]],
    data: &[Correspondence],
    r_ver1: &Rotation3,
    r_ver2: &Rotation3,
    threshold: f64,
) -> Option<(Score, PoseHypothesis)> {
    let results: Vec<_> = samples
        .par_iter()
        .map(|idx| evaluate(idx, data, r_ver1, r_ver2, threshold))
        .collect();
    let mut best: Option<(Score, PoseHypothesis)> = None;
    for (s, h) in results.into_iter().flatten() {
        if best.as_ref().is_none_or(|(b, _)| s.cost < b.cost) {
            best = Some((s, h));
        }
    }
    best
}

fn draw_samples(rng: &mut ChaCha8Rng, pool: &[usize], count: usize) -> Vec<[usize; 3]> {
    (0..count)
        .map(|_| {
            let s = sample(rng, pool.len(), 3);
            [pool[s.index(0)], pool[s.index(1)], pool[s.index(2)]]
        })
        .collect()
}

/// Iterations needed to draw an all-inlier triple with probability
/// `confidence` when a fraction `w` of the data are inliers.
pub fn adaptive_bound(w: f64, confidence: f64) -> f64 {
    let p = w.powi(3);
    if p >= 1.0 {
        return 1.0;
    }
    if p <= 0.0 {
        return f64::INFINITY;
    }
    ((1.0 - confidence).ln() / (1.0 - p).ln()).ceil()
}

pub fn ransac_3pt(
    data: &[Correspondence],
    r_ver1: &Rotation3,
    r_ver2: &Rotation3,
    cfg: &RansacConfig,
) -> Result<RansacResult> {
    cfg.validate()?;
    if data.len() < 3 {
        return Err(Error::TooFewCorrespondences {
            needed: 3,
            got: data.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let all: Vec<usize> = (0..data.len()).collect();
    let samples = draw_samples(&mut rng, &all, cfg.max_iterations);

    let mut best: Option<(Score, PoseHypothesis)> = None;
    let mut iterations = 0;
    for batch in samples.chunks(BATCH) {
        if let Some((s, h)) = best_of(batch, data, r_ver1, r_ver2, cfg.threshold) {
            if best.as_ref().is_none_or(|(b, _)| s.beats(b)) {
                best = Some((s, h));
            }
        }
        iterations += batch.len();
        let w = best
            .as_ref()
            .map_or(0.0, |(s, _)| s.count as f64 / data.len() as f64);
        if iterations as f64 >= adaptive_bound(w, cfg.confidence) {
            break;
        }
    }
    let (best_score, mut pose) = best.ok_or(Error::NoConsensus)?;
    if best_score.count < 3 {
        return Err(Error::NoConsensus);
    }

    // Re-select on the consensus set: minimal samples drawn only from the
    // inliers usually contain a better-conditioned triple.
    let inliers: Vec<usize> = (0..data.len())
        .filter(|&i| epipolar_residual(&pose, &data[i]) < cfg.threshold)
        .collect();
    if cfg.reselect_samples > 0 && inliers.len() > 3 {
        let local = draw_samples(&mut rng, &inliers, cfg.reselect_samples);
        if let Some((s, h)) = best_by_cost(&local, data, r_ver1, r_ver2, cfg.threshold) {
            if s.cost < best_score.cost {
                pose = h;
            }
        }
    }

    let mask: Vec<bool> = data
        .iter()
        .map(|c| epipolar_residual(&pose, c) < cfg.threshold)
        .collect();
    let inlier_count = mask.iter().filter(|&&b| b).count();
    pose.residual = data
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|(c, _)| epipolar_residual(&pose, c))
        .fold(0.0, f64::max);
    pose.translation = Translation3(pose.translation.0.normalize());
    Ok(RansacResult {
        pose,
        inliers: mask,
        iterations,
        inlier_count,
    })
}
