//! The reduced solvers for cameras that are already gravity-aligned.
//!
//! When both images were captured upright (identity gravity priors), every
//! elimination polynomial collapses to a quadratic, so the solvers return
//! closed-form answers with at most two candidates. This example compares
//! the general and aligned solver variants on the same upright scene.

use gravpano::solvers::{solve, SolverId, SolverOptions};
use gravpano::synth::{generate_scene, SceneConfig};

fn main() {
    // tilt_range 0 keeps both cameras exactly upright.
    let config = SceneConfig {
        n_points: 3,
        n_holdout: 0,
        tilt_range_deg: 0.0,
        ..Default::default()
    };
    let scene = generate_scene(&config, 11).expect("scene generation");
    let opts = SolverOptions::default();

    println!(
        "ground truth: theta {:+.4} deg  f {:.1} px  lambda {:+.3}",
        scene.gt.theta.to_degrees(),
        scene.gt.f1,
        scene.gt.lambda1
    );
    for (general, aligned) in [
        (SolverId::H2lambda, SolverId::H2lambdaAligned),
        (SolverId::H3l1l2, SolverId::H3l1l2Aligned),
    ] {
        let n = general.sample_size();
        let sample = &scene.corrs[..n];
        let full = solve(general, sample, &opts).expect("general solver");
        let fast = solve(aligned, sample, &opts).expect("aligned solver");
        println!(
            "{general:>16}: {} candidates | {aligned:>16}: {} candidates",
            full.candidates.len(),
            fast.candidates.len()
        );
        for m in &fast.candidates {
            println!(
                "    aligned candidate: theta {:+9.4} deg  f1 {:8.2}  lambda1 {:+.4}",
                m.theta.to_degrees(),
                m.f1,
                m.lambda1
            );
        }
    }
}
