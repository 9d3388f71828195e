use std::path::Path;
use std::process::{Command, Output};

use rand::Rng;
use upright_core::io::{
    write_correspondences, CorrespondenceFile, Match, RansacReport, SolveReport,
};
use upright_core::sim::CSV_HEADER;
use upright_core::{
    generate_scene, rotation_angle_error, translation_angle_error, trial_rng, Rotation3,
    SceneConfig, SyntheticInstance, Translation3,
};

fn upright(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_upright"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scene(cfg: &SceneConfig, trial: u64) -> SyntheticInstance {
    generate_scene(cfg, &mut trial_rng(42, trial)).unwrap()
}

fn pose_errors(
    inst: &SyntheticInstance,
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
) -> (f64, f64) {
    let r = Rotation3::from_matrix_unchecked(nalgebra::Matrix3::from_fn(|i, j| rotation[i][j]));
    let t = Translation3::new(translation[0], translation[1], translation[2]);
    (
        rotation_angle_error(&inst.rotation, &r),
        translation_angle_error(&inst.translation, &t).unwrap(),
    )
}

#[test]
fn solve_recovers_ground_truth_from_file() {
    let inst = scene(&SceneConfig::default(), 0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scene.json");
    write_correspondences(&path, &CorrespondenceFile::from_instance(&inst)).unwrap();

    let out = upright(&["solve", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: SolveReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(!report.hypotheses.is_empty());
    let best = &report.hypotheses[report.selected.expect("a pose passes cheirality")];
    let (rot, trans) = pose_errors(&inst, best.rotation, best.translation);
    assert!(
        rot < 1e-6 && trans < 1e-6,
        "rotation {rot} deg, baseline {trans} deg"
    );

    let full = upright(&["solve", path.to_str().unwrap(), "--template", "full"]);
    assert!(full.status.success(), "{}", stderr(&full));
    let full: SolveReport = serde_json::from_str(&stdout(&full)).unwrap();
    assert_eq!(full.hypotheses.len(), report.hypotheses.len());
}

#[test]
fn ransac_finds_pose_and_outliers() {
    let cfg = SceneConfig {
        points: 40,
        sigma: 0.3,
        ..Default::default()
    };
    let inst = scene(&cfg, 1);
    let mut file = CorrespondenceFile::from_instance(&inst);
    let mut rng = trial_rng(7, 0);
    for _ in 0..10 {
        file.matches.push(Match {
            u1: rng.random_range(0.0..cfg.width),
            v1: rng.random_range(0.0..cfg.height),
            u2: rng.random_range(0.0..cfg.width),
            v2: rng.random_range(0.0..cfg.height),
        });
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scene.json");
    let out_path = dir.path().join("pose.json");
    write_correspondences(&path, &file).unwrap();

    let args = [
        "ransac",
        path.to_str().unwrap(),
        "--seed",
        "3",
        "-o",
        out_path.to_str().unwrap(),
    ];
    let out = upright(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let report: RansacReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.inliers.len(), 50);
    let recall = report.inliers[..40].iter().filter(|&&b| b).count();
    assert!(recall >= 38, "recall {recall}/40");
    let (rot, trans) = pose_errors(&inst, report.pose.rotation, report.pose.translation);
    assert!(
        rot < 2.0 && trans < 5.0,
        "rotation {rot} deg, baseline {trans} deg"
    );

    // same seed, same answer
    upright(&args);
    assert_eq!(std::fs::read_to_string(&out_path).unwrap(), text);
}

#[test]
fn simulate_writes_one_row_per_level() {
    let out = upright(&[
        "simulate", "--trials", "20", "--max", "0.4", "--step", "0.2", "--seed", "5",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 4);
    let levels: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(levels, ["0", "0.2", "0.4"]);
    // reproducible without --timing
    assert_eq!(
        stdout(&upright(&[
            "simulate", "--trials", "20", "--max", "0.4", "--step", "0.2", "--seed", "5"
        ])),
        text
    );

    let vert = upright(&[
        "simulate", "--sweep", "vertical", "--motion", "forward", "--planar", "--trials", "10",
    ]);
    assert!(vert.status.success(), "{}", stderr(&vert));
    assert_eq!(stdout(&vert).lines().count(), 7);
}

#[test]
fn selftest_reports_every_fact() {
    let out = upright(&["selftest", "--timing-runs", "0"]);
    let text = stdout(&out);
    assert!(
        text.contains("[PASS] Macaulay matrix shape: expected 65x77, observed 65x77"),
        "{text}"
    );
    assert!(text.contains("quotient basis"), "{text}");
    // the exit status tracks the printed verdicts
    assert_eq!(out.status.success(), !text.contains("[FAIL]"));
    if !out.status.success() {
        assert!(stderr(&out).contains("selftest failed"));
    }
}

#[test]
fn missing_or_bad_input_is_reported() {
    let out = upright(&["solve", "/nonexistent/matches.json"]);
    assert!(!out.status.success());
    assert!(stderr(&out).starts_with("error:"), "{}", stderr(&out));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.json");
    let inst = scene(&SceneConfig::default(), 2);
    let mut file = CorrespondenceFile::from_instance(&inst);
    file.matches.truncate(2);
    write_correspondences(&path, &file).unwrap();
    let out = upright(&["solve", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("need at least 3 matches"),
        "{}",
        stderr(&out)
    );

    std::fs::write(&path, "{\"intrinsics1\": ").unwrap();
    let out = upright(&["ransac", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains(path.file_name().unwrap().to_str().unwrap()));
    assert!(Path::new(&path).exists());
}
