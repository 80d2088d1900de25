//! Command-line surface: solve from correspondence files, robust
//! estimation, and benchmark sweeps.
//!
//! All results go to stdout as JSON lines or CSV; diagnostics (including
//! wall-clock timings, which are not reproducible) go to stderr. Exit
//! codes: 0 success, 2 parse/usage, 3 degenerate input, 4 no solution,
//! 5 no robust model, 6 output not writable.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::geom::{gravity_alignment, Correspondence, DistortedPoint, StitchModel, Vec3};
use crate::robust::{iteration_budget, ransac, RansacConfig, RobustError};
use crate::solvers::{model_residual, solve, SolveError, SolverId, SolverOptions};
use crate::synth::{records_to_csv, run_sweep, SceneConfig, SweepAxis, SynthError};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or input violating a command precondition.
    Usage(String),
    /// Correspondence file rejected, with the offending line when known.
    Parse { line: usize, message: String },
    /// The input is degenerate for the chosen solver.
    Degenerate(String),
    /// The solver ran but produced no admissible candidate.
    NoSolution(String),
    /// Robust estimation found no model above the inlier floor.
    NoModel(String),
    /// The output location cannot be created or written.
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => 2,
            CliError::Degenerate(_) => 3,
            CliError::NoSolution(_) => 4,
            CliError::NoModel(_) => 5,
            CliError::Output(_) => 6,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Parse { line, message } => {
                if *line == 0 {
                    write!(f, "parse error: {message}")
                } else {
                    write!(f, "parse error at line {line}: {message}")
                }
            }
            CliError::Degenerate(m) => write!(f, "degenerate input: {m}"),
            CliError::NoSolution(m) => write!(f, "no solution: {m}"),
            CliError::NoModel(m) => write!(f, "no model: {m}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

fn solve_error(e: SolveError) -> CliError {
    match e {
        // SolveError::Degenerate's display already carries the "degenerate
        // input" prefix CliError::Degenerate adds, so unwrap the bare reason.
        SolveError::Degenerate(reason) => CliError::Degenerate(reason.to_string()),
        SolveError::AtDistortionCenter { .. } => CliError::Degenerate(e.to_string()),
        SolveError::SampleSize { .. } | SolveError::NotAligned { .. } => {
            CliError::Usage(e.to_string())
        }
        SolveError::Poly(_) | SolveError::Geom(_) => CliError::NoSolution(e.to_string()),
    }
}

/// Parsed correspondence file: header-provided gravity priors and scale
/// applied to every row.
#[derive(Debug)]
pub struct CorrespondenceFile {
    pub corrs: Vec<Correspondence>,
    pub norm_scale: f64,
}

/// Parses the plain-text correspondence format:
///
/// ```text
/// # gravity1 gx gy gz
/// # gravity2 gx gy gz
/// # norm_scale n
/// u1,v1,u2,v2
/// ...
/// ```
///
/// Unrecognized `#` lines are comments. All values must be finite; the
/// gravity vectors must be nonzero; at least one data row is required.
pub fn parse_correspondence_file(text: &str) -> Result<CorrespondenceFile, CliError> {
    let mut g1: Option<Vec3> = None;
    let mut g2: Option<Vec3> = None;
    let mut norm_scale: Option<f64> = None;
    let mut rows: Vec<(usize, [f64; 4])> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut tokens = rest.split_whitespace();
            let key = tokens.next().unwrap_or("");
            let parse_vec = |tokens: &mut dyn Iterator<Item = &str>| -> Result<Vec3, CliError> {
                let mut v = [0.0; 3];
                for slot in &mut v {
                    let tok = tokens.next().ok_or(CliError::Parse {
                        line: line_no,
                        message: "expected three components".into(),
                    })?;
                    *slot = f64::from_str(tok).map_err(|e| CliError::Parse {
                        line: line_no,
                        message: format!("bad number {tok:?}: {e}"),
                    })?;
                }
                Ok(Vec3::new(v[0], v[1], v[2]))
            };
            match key {
                "gravity1" => g1 = Some(parse_vec(&mut tokens)?),
                "gravity2" => g2 = Some(parse_vec(&mut tokens)?),
                "norm_scale" => {
                    let tok = tokens.next().ok_or(CliError::Parse {
                        line: line_no,
                        message: "expected a value after norm_scale".into(),
                    })?;
                    norm_scale = Some(f64::from_str(tok).map_err(|e| CliError::Parse {
                        line: line_no,
                        message: format!("bad number {tok:?}: {e}"),
                    })?);
                }
                _ => {} // free-form comment
            }
            continue;
        }
        let mut values = [0.0; 4];
        let mut fields = line.split(',');
        for slot in &mut values {
            let tok = fields.next().map(str::trim).ok_or(CliError::Parse {
                line: line_no,
                message: "expected u1,v1,u2,v2".into(),
            })?;
            *slot = f64::from_str(tok).map_err(|e| CliError::Parse {
                line: line_no,
                message: format!("bad number {tok:?}: {e}"),
            })?;
        }
        if fields.next().is_some() {
            return Err(CliError::Parse {
                line: line_no,
                message: "expected exactly four comma-separated values".into(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Parse {
                line: line_no,
                message: "coordinates must be finite".into(),
            });
        }
        rows.push((line_no, values));
    }

    let missing = |what: &str| CliError::Parse {
        line: 0,
        message: format!("missing required header line '# {what} ...'"),
    };
    let g1 = g1.ok_or_else(|| missing("gravity1"))?;
    let g2 = g2.ok_or_else(|| missing("gravity2"))?;
    let norm_scale = norm_scale.ok_or_else(|| missing("norm_scale"))?;
    if !(norm_scale > 0.0 && norm_scale.is_finite()) {
        return Err(CliError::Parse {
            line: 0,
            message: "norm_scale must be positive and finite".into(),
        });
    }
    if rows.is_empty() {
        return Err(CliError::Parse {
            line: 0,
            message: "file contains no correspondence rows".into(),
        });
    }
    let prior = |g: Vec3, which: &str| {
        gravity_alignment(g).map_err(|e| CliError::Parse {
            line: 0,
            message: format!("invalid {which} vector: {e}"),
        })
    };
    let (p1, p2) = (prior(g1, "gravity1")?, prior(g2, "gravity2")?);
    let corrs = rows
        .into_iter()
        .map(|(_, [u1, v1, u2, v2])| Correspondence {
            p1: DistortedPoint::new(u1, v1, norm_scale),
            p2: DistortedPoint::new(u2, v2, norm_scale),
            g1: p1,
            g2: p2,
        })
        .collect();
    Ok(CorrespondenceFile { corrs, norm_scale })
}

/// Serializes correspondences in the file format `parse_correspondence_file`
/// reads, with the gravity vectors recovered from the priors and optional
/// extra comment lines (for embedding ground truth in fixtures).
pub fn format_correspondence_file(
    corrs: &[Correspondence],
    extra_comments: &[String],
) -> String {
    let mut out = String::new();
    let down = Vec3::new(0.0, -1.0, 0.0);
    if let Some(first) = corrs.first() {
        let g1 = first.g1.rotation().transpose() * down;
        let g2 = first.g2.rotation().transpose() * down;
        let _ = writeln!(out, "# gravity1 {} {} {}", g1.x, g1.y, g1.z);
        let _ = writeln!(out, "# gravity2 {} {} {}", g2.x, g2.y, g2.z);
        let _ = writeln!(out, "# norm_scale {}", first.p1.norm_scale);
    }
    for comment in extra_comments {
        let _ = writeln!(out, "# {comment}");
    }
    for c in corrs {
        let _ = writeln!(out, "{},{},{},{}", c.p1.u, c.p1.v, c.p2.u, c.p2.v);
    }
    out
}

fn resolve_solver(flag: &str, aligned: bool, rows: usize) -> Result<SolverId, CliError> {
    let base = if flag == "auto" {
        match rows {
            1 => SolverId::H1f,
            2 => SolverId::H2lambda,
            3 => SolverId::H3l1l2,
            _ => SolverId::H4dlt,
        }
    } else {
        SolverId::from_str(flag).map_err(CliError::Usage)?
    };
    if !aligned {
        return Ok(base);
    }
    match base {
        SolverId::H1f => Ok(SolverId::H1fAligned),
        SolverId::H2f1f2 => Ok(SolverId::H2f1f2Aligned),
        SolverId::H2lambda => Ok(SolverId::H2lambdaAligned),
        SolverId::H3l1l2 => Ok(SolverId::H3l1l2Aligned),
        already_aligned if already_aligned.is_aligned() => Ok(already_aligned),
        SolverId::H4dlt => Err(CliError::Usage(
            "the 4-point linear baseline has no aligned variant".into(),
        )),
        _ => unreachable!(),
    }
}

fn candidate_json(solver_id: SolverId, m: &StitchModel, residual: f64) -> serde_json::Value {
    json!({
        "solver": solver_id.to_string(),
        "s": m.s,
        "theta_deg": m.theta.to_degrees(),
        "f1": m.f1,
        "f2": m.f2,
        "lambda1": m.lambda1,
        "lambda2": m.lambda2,
        "residual": residual,
    })
}

fn cmd_solve(file: &Path, solver_flag: &str, aligned: bool) -> Result<String, CliError> {
    let text = std::fs::read_to_string(file).map_err(|e| CliError::Parse {
        line: 0,
        message: format!("cannot read {}: {e}", file.display()),
    })?;
    let parsed = parse_correspondence_file(&text)?;
    let solver_id = resolve_solver(solver_flag, aligned, parsed.corrs.len())?;
    let take = if solver_id == SolverId::H4dlt {
        parsed.corrs.len()
    } else {
        let m = solver_id.sample_size();
        if parsed.corrs.len() < m {
            return Err(CliError::Usage(format!(
                "{solver_id} needs {m} correspondences, file has {}",
                parsed.corrs.len()
            )));
        }
        m
    };
    let sample = &parsed.corrs[..take];
    let set = solve(solver_id, sample, &SolverOptions::default()).map_err(solve_error)?;
    if set.candidates.is_empty() {
        return Err(CliError::NoSolution(
            "all candidates were rejected by the admissibility filters".into(),
        ));
    }
    let mut out = String::new();
    for m in &set.candidates {
        let residual = model_residual(m, sample);
        let _ = writeln!(out, "{}", candidate_json(solver_id, m, residual));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_ransac(
    file: &Path,
    solver_flag: &str,
    threshold: f64,
    confidence: f64,
    seed: u64,
    lo: bool,
    max_iterations: usize,
) -> Result<String, CliError> {
    let text = std::fs::read_to_string(file).map_err(|e| CliError::Parse {
        line: 0,
        message: format!("cannot read {}: {e}", file.display()),
    })?;
    let parsed = parse_correspondence_file(&text)?;
    let solver_id = if solver_flag == "auto" {
        SolverId::H2lambda
    } else {
        SolverId::from_str(solver_flag).map_err(CliError::Usage)?
    };
    let config = RansacConfig {
        confidence,
        inlier_threshold: threshold,
        max_iterations,
        lo_enabled: lo,
        seed,
        ..Default::default()
    };
    let started = std::time::Instant::now();
    let result = ransac(&parsed.corrs, solver_id, &config).map_err(|e| match e {
        RobustError::InvalidConfig { .. } | RobustError::TooFewCorrespondences { .. } => {
            CliError::Usage(e.to_string())
        }
        RobustError::NoModel { .. } => CliError::NoModel(e.to_string()),
    })?;
    // Wall time is a diagnostic: it goes to stderr so stdout stays byte-
    // reproducible under a fixed seed.
    eprintln!(
        "ransac: {} iterations in {:.3} ms",
        result.iterations_run,
        started.elapsed().as_secs_f64() * 1e3
    );
    let m = &result.model;
    let inlier_indices: Vec<usize> = result
        .inlier_mask
        .iter()
        .enumerate()
        .filter_map(|(i, &keep)| keep.then_some(i))
        .collect();
    let value = json!({
        "solver": solver_id.to_string(),
        "s": m.s,
        "theta_deg": m.theta.to_degrees(),
        "f1": m.f1,
        "f2": m.f2,
        "lambda1": m.lambda1,
        "lambda2": m.lambda2,
        "inlier_count": result.inlier_count,
        "inlier_indices": inlier_indices,
        "iterations": result.iterations_run,
        "score": result.score,
    });
    Ok(format!("{value}\n"))
}

/// Noise levels swept by the benchmark presets.
const IMAGE_NOISE_LEVELS: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 2.0];
const ANGLE_NOISE_LEVELS: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];

fn bench_config(trials: usize, seed: u64, lambda: f64) -> SceneConfig {
    SceneConfig {
        lambda1_gt: lambda,
        lambda2_gt: lambda,
        n_trials: trials,
        seed,
        ..Default::default()
    }
}

fn synth_error(e: SynthError) -> CliError {
    match e {
        SynthError::InvalidConfig { .. } | SynthError::EmptyRecords => {
            CliError::Usage(e.to_string())
        }
        SynthError::Infeasible { .. } => CliError::Degenerate(e.to_string()),
        SynthError::Geom(_) => CliError::NoSolution(e.to_string()),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run_preset_sweeps(
    out: &Path,
    prefix: &str,
    config: &SceneConfig,
    solvers: &[SolverId],
    timing: bool,
) -> Result<(), CliError> {
    // Roll/pitch sweeps run at a fixed 2 px image noise so prior error is
    // measured on realistically noisy observations.
    let angle_base = SceneConfig {
        image_noise_sigma: 2.0,
        ..config.clone()
    };
    for (axis, base, levels, name) in [
        (
            SweepAxis::ImageNoise,
            config,
            &IMAGE_NOISE_LEVELS[..],
            "image_noise",
        ),
        (
            SweepAxis::RollNoise,
            &angle_base,
            &ANGLE_NOISE_LEVELS[..],
            "roll_noise",
        ),
        (
            SweepAxis::PitchNoise,
            &angle_base,
            &ANGLE_NOISE_LEVELS[..],
            "pitch_noise",
        ),
    ] {
        let records = run_sweep(base, axis, levels, solvers, timing).map_err(synth_error)?;
        write_file(out, &format!("{prefix}_{name}.csv"), &records_to_csv(&records))?;
    }
    Ok(())
}

fn cmd_bench(
    preset: &str,
    trials: usize,
    seed: u64,
    out: &Path,
    timing: bool,
) -> Result<String, CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Output(format!("cannot create {}: {e}", out.display())))?;
    match preset {
        "fig3a" => {
            let config = bench_config(trials, seed, 0.0);
            run_preset_sweeps(
                out,
                "fig3a",
                &config,
                &[SolverId::H1f, SolverId::H2f1f2, SolverId::H4dlt],
                timing,
            )?;
        }
        "fig3b" => {
            let config = bench_config(trials, seed, -0.4);
            run_preset_sweeps(
                out,
                "fig3b",
                &config,
                &[SolverId::H2lambda, SolverId::H3l1l2],
                timing,
            )?;
        }
        "iterations" => {
            let mut csv = String::from("outlier_ratio,sample_size,iterations\n");
            for step in 0..=18 {
                let outlier_ratio = step as f64 * 0.05;
                for sample_size in 1..=6 {
                    let budget =
                        iteration_budget(0.99, 1.0 - outlier_ratio, sample_size, usize::MAX);
                    let _ = writeln!(csv, "{outlier_ratio},{sample_size},{budget}");
                }
            }
            write_file(out, "iterations.csv", &csv)?;
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown preset {other:?}; expected fig3a, fig3b, or iterations"
            )))
        }
    }
    Ok(String::new())
}

#[derive(Parser)]
#[command(
    name = "gravpano",
    about = "Gravity-prior minimal solvers for rotation-only panorama stitching",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one minimal solver on a correspondence file and list candidates.
    Solve {
        /// Correspondence file (see docs for the format).
        file: PathBuf,
        /// h1f | h2f1f2 | h2lambda | h3l1l2 | h4dlt | *_aligned | auto.
        /// `auto` picks by row count: 1 -> h1f, 2 -> h2lambda, 3 -> h3l1l2,
        /// 4+ -> h4dlt.
        #[arg(long, default_value = "auto")]
        solver: String,
        /// Use the reduced solvers that require identity gravity priors.
        #[arg(long)]
        aligned: bool,
    },
    /// Robustly estimate a model from contaminated correspondences.
    Ransac {
        file: PathBuf,
        /// Solver drawn for minimal samples (default h2lambda).
        #[arg(long, default_value = "h2lambda")]
        solver: String,
        /// Inlier threshold on the symmetric transfer error, pixels.
        #[arg(long, default_value_t = 3.0)]
        threshold: f64,
        #[arg(long, default_value_t = 0.99)]
        confidence: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Locally optimize each new best hypothesis (disable with
        /// --lo=false).
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        lo: bool,
        #[arg(long, default_value_t = 10_000)]
        max_iterations: usize,
    },
    /// Run a benchmark preset and write CSV tables.
    Bench {
        /// fig3a (no-distortion solvers), fig3b (distortion solvers), or
        /// iterations (theoretical RANSAC budget curve).
        #[arg(long)]
        preset: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for the CSV files (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Record per-solve wall time in the CSVs (breaks byte-for-byte
        /// reproducibility of the output).
        #[arg(long)]
        timing: bool,
    },
}

fn dispatch(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Solve {
            file,
            solver,
            aligned,
        } => cmd_solve(&file, &solver, aligned),
        Command::Ransac {
            file,
            solver,
            threshold,
            confidence,
            seed,
            lo,
            max_iterations,
        } => cmd_ransac(
            &file,
            &solver,
            threshold,
            confidence,
            seed,
            lo,
            max_iterations,
        ),
        Command::Bench {
            preset,
            trials,
            seed,
            out,
            timing,
        } => cmd_bench(&preset, trials, seed, &out, timing),
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let run = || match dispatch(cli) {
        Ok(stdout) => {
            print!("{stdout}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    match std::env::var("GRAVPANO_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build();
                match pool {
                    Ok(pool) => pool.install(run),
                    Err(e) => {
                        eprintln!("error: cannot build a {n}-thread pool: {e}");
                        2
                    }
                }
            }
            _ => {
                eprintln!("error: GRAVPANO_THREADS must be a positive integer, got {v:?}");
                2
            }
        },
        Err(_) => run(),
    }
}
