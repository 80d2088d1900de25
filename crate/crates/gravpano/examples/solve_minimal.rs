//! Solve a two-correspondence distortion problem and print every candidate.
//!
//! Generates a noise-free synthetic pair (focal 1000 px, division-model
//! distortion -0.4, random yaw and tilts), hands two correspondences to the
//! shared-distortion solver, and shows how the admissible candidates relate
//! to the ground truth.

use gravpano::solvers::{solve, SolverId, SolverOptions};
use gravpano::synth::{generate_scene, SceneConfig};

fn main() {
    let config = SceneConfig {
        n_points: 2,
        n_holdout: 0,
        ..Default::default()
    };
    let scene = generate_scene(&config, 7).expect("scene generation");
    let set = solve(SolverId::H2lambda, &scene.corrs, &SolverOptions::default())
        .expect("solver failure");

    println!(
        "ground truth: theta {:+.4} deg  f {:.1} px  lambda {:+.3}",
        scene.gt.theta.to_degrees(),
        scene.gt.f1,
        scene.gt.lambda1
    );
    println!(
        "{} raw roots, {} admissible candidates:",
        set.raw_count,
        set.candidates.len()
    );
    for (i, m) in set.candidates.iter().enumerate() {
        println!(
            "  #{i}: theta {:+9.4} deg  f1 {:8.2}  f2 {:8.2}  lambda {:+.4} / {:+.4}",
            m.theta.to_degrees(),
            m.f1,
            m.f2,
            m.lambda1,
            m.lambda2
        );
    }
}
