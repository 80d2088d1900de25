//! A small image-noise sweep with median error tables.
//!
//! Runs the distortion solvers over increasing pixel noise and prints the
//! median focal, rotation, and distortion errors per level — a scaled-down
//! version of what `gravpano bench --preset fig3b` writes as CSV.

use gravpano::solvers::SolverId;
use gravpano::synth::{median_of, run_sweep, RecordField, SceneConfig, SweepAxis};

fn main() {
    let config = SceneConfig {
        n_trials: 200,
        ..Default::default()
    };
    let levels = [0.0, 0.5, 1.0, 1.5, 2.0];
    let solvers = [SolverId::H2lambda, SolverId::H3l1l2];
    let records =
        run_sweep(&config, SweepAxis::ImageNoise, &levels, &solvers, false).expect("sweep");

    for solver in solvers {
        println!("{solver}");
        println!("  noise px   median |df|/f   median drot (rad)   median dlambda");
        for &level in &levels {
            let slice: Vec<_> = records
                .iter()
                .filter(|r| r.solver_id == solver && r.level == level)
                .cloned()
                .collect();
            let focal = median_of(&slice, RecordField::FocalError).unwrap_or(f64::NAN);
            let rot = median_of(&slice, RecordField::RotationError).unwrap_or(f64::NAN);
            let dist = median_of(&slice, RecordField::DistortionError).unwrap_or(f64::NAN);
            println!("  {level:8.1}   {focal:13.3e}   {rot:17.3e}   {dist:14.3e}");
        }
    }
}
