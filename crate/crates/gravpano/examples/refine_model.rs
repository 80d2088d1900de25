//! Non-minimal refinement: polish a deliberately wrong starting model.
//!
//! Perturbs the ground-truth focal lengths by 10% and the yaw by a few
//! degrees, then lets the Levenberg-Marquardt refit pull the model back
//! onto the noise-free correspondences.

use gravpano::geom::compose_model;
use gravpano::refine::{refine_nonminimal, RefineMode};
use gravpano::synth::{generate_scene, SceneConfig};

fn main() {
    let config = SceneConfig {
        n_points: 50,
        n_holdout: 0,
        ..Default::default()
    };
    let scene = generate_scene(&config, 21).expect("scene generation");
    let gt = &scene.gt;
    let skewed = compose_model(
        ((gt.theta + 0.05) / 2.0).tan(),
        gt.f1 * 1.1,
        gt.f2 * 1.1,
        gt.lambda1,
        gt.lambda2,
        &gt.r1,
        &gt.r2,
        gt.norm_scale,
    )
    .expect("perturbed model");

    let out = refine_nonminimal(&scene.corrs, &skewed, RefineMode::Distortion)
        .expect("refinement");
    println!(
        "initial cost {:10.3e} -> final cost {:10.3e} in {} iterations (converged: {})",
        out.initial_cost, out.final_cost, out.iterations, out.converged
    );
    println!(
        "true  f1 {:8.2}  f2 {:8.2}  theta {:+.5} deg  lambda1 {:+.5}",
        gt.f1,
        gt.f2,
        gt.theta.to_degrees(),
        gt.lambda1
    );
    println!(
        "start f1 {:8.2}  f2 {:8.2}  theta {:+.5} deg  lambda1 {:+.5}",
        skewed.f1,
        skewed.f2,
        skewed.theta.to_degrees(),
        skewed.lambda1
    );
    println!(
        "final f1 {:8.2}  f2 {:8.2}  theta {:+.5} deg  lambda1 {:+.5}",
        out.model.f1,
        out.model.f2,
        out.model.theta.to_degrees(),
        out.model.lambda1
    );
}
