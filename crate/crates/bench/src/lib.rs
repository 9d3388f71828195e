//! Fixtures for the criterion benches.

use upright_core::sim::{generate_scene, trial_rng, SceneConfig, SyntheticInstance};
use upright_core::{
    align, build_system, r_ver_from_vanishing, CoplanaritySystem, Correspondence, Rotation3,
};

/// Aligned minimal systems from `n` default synthetic scenes.
pub fn minimal_systems(n: usize, seed: u64) -> Vec<CoplanaritySystem> {
    (0..n as u64)
        .map(|i| {
            let inst = scene(&SceneConfig::default(), seed, i);
            let (r1, r2) = verticals(&inst);
            build_system(&inst.minimal_sample().map(|c| align(&c, &r1, &r2)))
        })
        .collect()
}

/// Correspondences and verticals of a noisy scene whose last entries are
/// mismatched.
pub struct RansacProblem {
    pub data: Vec<Correspondence>,
    pub r_ver1: Rotation3,
    pub r_ver2: Rotation3,
}

pub fn ransac_problem(inliers: usize, outliers: usize, seed: u64) -> RansacProblem {
    let cfg = SceneConfig {
        points: inliers + outliers,
        sigma: 0.5,
        ..Default::default()
    };
    let inst = scene(&cfg, seed, 0);
    let (r_ver1, r_ver2) = verticals(&inst);
    let mut data = inst.correspondences.clone();
    // pair the last `outliers` first-view rays with shuffled second-view rays
    for k in 0..outliers {
        let i = inliers + k;
        let j = inliers + (k + 1) % outliers;
        data[i] = Correspondence::new(inst.correspondences[i].m1, inst.correspondences[j].m2);
    }
    RansacProblem {
        data,
        r_ver1,
        r_ver2,
    }
}

fn scene(cfg: &SceneConfig, seed: u64, trial: u64) -> SyntheticInstance {
    generate_scene(cfg, &mut trial_rng(seed, trial)).expect("default scene configuration is valid")
}

fn verticals(inst: &SyntheticInstance) -> (Rotation3, Rotation3) {
    (
        r_ver_from_vanishing(&inst.vertical1),
        r_ver_from_vanishing(&inst.vertical2),
    )
}
