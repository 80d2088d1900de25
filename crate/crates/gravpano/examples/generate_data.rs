//! Writes sample correspondence files in the CLI's input format.
//!
//! Usage: `cargo run --example generate_data -- <output-dir>`
//!
//! Produces three deterministic files:
//!   pair_distortion.csv    two noise-free rows for `solve --solver h2lambda`
//!   triplet_distortion.csv three noise-free rows for `solve --solver h3l1l2`
//!   contaminated.csv       200 rows, first 80 corrupted, for `ransac`
//!
//! Each file embeds its ground truth as `# truth ...` comment lines that
//! the parser ignores but tests and humans can read.

use gravpano::cli::format_correspondence_file;
use gravpano::geom::DistortedPoint;
use gravpano::synth::{generate_scene, Scene, SceneConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn truth_comments(scene: &Scene, extra: Vec<String>) -> Vec<String> {
    let gt = &scene.gt;
    let mut comments = vec![format!(
        "truth theta_deg {} f1 {} f2 {} lambda1 {} lambda2 {}",
        gt.theta.to_degrees(),
        gt.f1,
        gt.f2,
        gt.lambda1,
        gt.lambda2
    )];
    comments.extend(extra);
    comments
}

fn main() {
    let dir = std::env::args()
        .nth(1)
        .expect("usage: generate_data <output-dir>");
    let dir = std::path::PathBuf::from(dir);
    std::fs::create_dir_all(&dir).expect("create output dir");

    let pair = generate_scene(
        &SceneConfig {
            n_points: 2,
            n_holdout: 0,
            ..Default::default()
        },
        5,
    )
    .expect("pair scene");
    std::fs::write(
        dir.join("pair_distortion.csv"),
        format_correspondence_file(&pair.corrs, &truth_comments(&pair, vec![])),
    )
    .expect("write pair file");

    let triplet = generate_scene(
        &SceneConfig {
            n_points: 3,
            n_holdout: 0,
            f2_gt: 1200.0,
            lambda2_gt: -0.25,
            ..Default::default()
        },
        8,
    )
    .expect("triplet scene");
    std::fs::write(
        dir.join("triplet_distortion.csv"),
        format_correspondence_file(&triplet.corrs, &truth_comments(&triplet, vec![])),
    )
    .expect("write triplet file");

    let mut contaminated = generate_scene(
        &SceneConfig {
            n_points: 200,
            n_holdout: 0,
            lambda1_gt: 0.0,
            lambda2_gt: 0.0,
            ..Default::default()
        },
        13,
    )
    .expect("contaminated scene");
    let n_outliers = 80;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for c in contaminated.corrs.iter_mut().take(n_outliers) {
        let bound = c.p2.norm_scale;
        c.p2 = DistortedPoint::new(
            rng.gen_range(-bound..bound),
            rng.gen_range(-bound..bound),
            bound,
        );
    }
    let comments = truth_comments(
        &contaminated,
        vec![format!("outliers_first {n_outliers}")],
    );
    std::fs::write(
        dir.join("contaminated.csv"),
        format_correspondence_file(&contaminated.corrs, &comments),
    )
    .expect("write contaminated file");

    println!("wrote 3 files to {}", dir.display());
}
