use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use upright_core::io::{ingest_correspondences, PoseJson, RansacReport, SolveReport};
use upright_core::sim::levels;
use upright_core::solver::selftest::{selftest_with, DEFAULT_SEED};
use upright_core::solver::TemplateKind;
use upright_core::{
    cheirality_select, ransac_3pt, run_noise_sweep, run_vertical_sweep, Motion, RansacConfig,
    SceneConfig, SolverOptions,
};

#[derive(Parser)]
#[command(
    name = "upright",
    version,
    about = "Relative pose from three points and a known vertical direction"
)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// All pose hypotheses from the first three matches of a correspondence file.
    Solve {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = TemplateArg::Compact)]
        template: TemplateArg,
        #[command(flatten)]
        out: Output,
    },
    /// Robust pose and inlier mask from all matches of a correspondence file.
    Ransac {
        input: PathBuf,
        /// Inlier threshold on the angular epipolar residual, radians.
        #[arg(long, default_value_t = RansacConfig::default().threshold)]
        threshold: f64,
        #[arg(long, default_value_t = RansacConfig::default().confidence)]
        confidence: f64,
        #[arg(long, default_value_t = RansacConfig::default().max_iterations)]
        max_iterations: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Synthetic accuracy sweep over pixel noise or vertical error, as CSV.
    Simulate(Simulate),
    /// Structural checks of the solver on a built-in instance.
    Selftest {
        /// Minimal solves to time; 0 skips timing.
        #[arg(long, default_value_t = 2000)]
        timing_runs: usize,
    },
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TemplateArg {
    Compact,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    Noise,
    Vertical,
}

#[derive(Clone, Copy, ValueEnum)]
enum MotionArg {
    Sideway,
    Forward,
}

#[derive(Args)]
struct Simulate {
    #[arg(long, value_enum, default_value_t = SweepArg::Noise)]
    sweep: SweepArg,
    #[arg(long, value_enum, default_value_t = MotionArg::Sideway)]
    motion: MotionArg,
    /// Put every scene point on a fronto-parallel plane.
    #[arg(long)]
    planar: bool,
    #[arg(long, default_value_t = 2500)]
    trials: usize,
    /// Largest swept level: pixels for noise, degrees for vertical error.
    #[arg(long)]
    max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Pixel noise held fixed during a vertical-error sweep.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Vertical error held fixed during a noise sweep, degrees.
    #[arg(long, default_value_t = 0.0)]
    vertical_error: f64,
    #[arg(long, default_value_t = SceneConfig::default().baseline)]
    baseline: f64,
    #[arg(long, default_value_t = SceneConfig::default().fov_deg)]
    fov: f64,
    #[arg(long, default_value_t = SceneConfig::default().points)]
    points: usize,
    /// Adds a mean solve time column; makes the output machine dependent.
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    out: Output,
}

fn emit(out: &Output, text: &str) -> Result<()> {
    match &out.output {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn solve(input: &Path, template: TemplateArg, out: &Output) -> Result<()> {
    let ing = ingest_correspondences(input)?;
    let Some(sample) = ing.correspondences.first_chunk::<3>() else {
        bail!(
            "{}: need at least 3 matches, found {}",
            input.display(),
            ing.correspondences.len()
        );
    };
    let opts = SolverOptions {
        template: match template {
            TemplateArg::Compact => TemplateKind::Compact,
            TemplateArg::Full => TemplateKind::Full,
        },
        ..Default::default()
    };
    let hyps = upright_core::pipeline::solve_minimal_with(sample, &ing.r_ver1, &ing.r_ver2, &opts)?;
    let mut hypotheses: Vec<PoseJson> = hyps.iter().map(PoseJson::from).collect();
    // the selected pose is one of the hypotheses, possibly with its baseline flipped
    let selected = cheirality_select(&hyps, &ing.correspondences).and_then(|best| {
        let json = PoseJson::from(&best);
        hypotheses.iter().position(|h| *h == json).or_else(|| {
            hypotheses.push(json);
            Some(hypotheses.len() - 1)
        })
    });
    emit(
        out,
        &to_json(&SolveReport {
            hypotheses,
            selected,
        })?,
    )
}

fn simulate(s: &Simulate, seed: u64) -> Result<()> {
    let cfg = SceneConfig {
        motion: match s.motion {
            MotionArg::Sideway => Motion::Sideway,
            MotionArg::Forward => Motion::Forward,
        },
        planar: s.planar,
        trials: s.trials,
        sigma: s.sigma,
        vertical_error_deg: s.vertical_error,
        baseline: s.baseline,
        fov_deg: s.fov,
        points: s.points,
        seed,
        record_timing: s.timing,
        ..Default::default()
    };
    let record = match s.sweep {
        SweepArg::Noise => {
            let grid = levels(0.0, s.max.unwrap_or(1.0), s.step.unwrap_or(0.2))?;
            run_noise_sweep(&cfg, &grid)?
        }
        SweepArg::Vertical => {
            let grid = levels(0.0, s.max.unwrap_or(0.5), s.step.unwrap_or(0.1))?;
            run_vertical_sweep(&cfg, &grid)?
        }
    };
    emit(&s.out, &record.to_csv())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve {
            input,
            template,
            out,
        } => solve(&input, template, &out)?,
        Command::Ransac {
            input,
            threshold,
            confidence,
            max_iterations,
            out,
        } => {
            let ing = ingest_correspondences(&input)?;
            let cfg = RansacConfig {
                threshold,
                confidence,
                max_iterations,
                seed: cli.seed.unwrap_or(0),
                ..Default::default()
            };
            let result = ransac_3pt(&ing.correspondences, &ing.r_ver1, &ing.r_ver2, &cfg)?;
            emit(&out, &to_json(&RansacReport::from(&result))?)?;
        }
        Command::Simulate(s) => simulate(&s, cli.seed.unwrap_or(0))?,
        Command::Selftest { timing_runs } => {
            let report = selftest_with(cli.seed.unwrap_or(DEFAULT_SEED), timing_runs)?;
            print!("{report}");
            if !report.passed() {
                let names: Vec<&str> = report.failures().map(|f| f.name).collect();
                eprintln!("selftest failed: {}", names.join(", "));
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
