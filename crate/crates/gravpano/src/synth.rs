//! Synthetic-scene generation and the benchmark protocol built on it.
//!
//! Scenes are random 3D boxes viewed by two rotationally related cameras
//! with known ground truth, contaminated by configurable image noise and
//! gravity-prior (roll/pitch) noise. Sweep runners produce per-trial error
//! records and CDF tables ready for external plotting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

use crate::geom::{
    cayley_yaw, distort, gravity_alignment, relative_rotation, rotation_distance,
    transfer_error, Correspondence, DistortedPoint, ErrorMode, GeomError, GravityPrior, Mat3,
    StitchModel, Vec3,
};
use crate::solvers::{solve, SolverCandidateSet, SolverId, SolverOptions};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scene configuration: {reason}")]
    InvalidConfig { reason: &'static str },
    #[error("only {visible} of {needed} points were visible within the attempt budget")]
    Infeasible { visible: usize, needed: usize },
    #[error("cannot aggregate an empty record table")]
    EmptyRecords,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Ground-truth scene parameters and noise levels for synthetic trials.
#[derive(Debug, Clone)]
pub struct SceneConfig {
    pub n_points: usize,
    /// Held-out noise-free correspondences used only for reprojection error.
    pub n_holdout: usize,
    /// Axis-aligned box containing the 3D points, in the first camera frame.
    pub box_min: [f64; 3],
    pub box_max: [f64; 3],
    pub f1_gt: f64,
    pub f2_gt: f64,
    pub lambda1_gt: f64,
    pub lambda2_gt: f64,
    /// Yaw magnitude is uniform in this range (degrees); its sign is random.
    pub yaw_range_deg: (f64, f64),
    /// Roll and pitch of each camera are uniform in +-this value (degrees);
    /// zero keeps the gravity priors exactly aligned.
    pub tilt_range_deg: f64,
    /// Isotropic Gaussian pixel noise added to every observation.
    pub image_noise_sigma: f64,
    /// Gaussian noise (degrees) applied to each prior as a small rotation
    /// about the camera x-axis (roll) and z-axis (pitch).
    pub roll_noise_sigma_deg: f64,
    pub pitch_noise_sigma_deg: f64,
    /// Points projecting outside +-this bound (pixels) are resampled.
    pub image_bound: f64,
    pub n_trials: usize,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            n_points: 200,
            n_holdout: 50,
            box_min: [-3.0, -3.0, 4.0],
            box_max: [3.0, 3.0, 6.0],
            f1_gt: 1000.0,
            f2_gt: 1000.0,
            lambda1_gt: -0.4,
            lambda2_gt: -0.4,
            yaw_range_deg: (5.0, 60.0),
            tilt_range_deg: 30.0,
            image_noise_sigma: 0.0,
            roll_noise_sigma_deg: 0.0,
            pitch_noise_sigma_deg: 0.0,
            image_bound: 1000.0,
            n_trials: 1000,
            seed: 0,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_points == 0 || self.n_trials == 0 {
            return Err(SynthError::InvalidConfig {
                reason: "point and trial counts must be positive",
            });
        }
        if self.box_min[2] <= 0.0 {
            return Err(SynthError::InvalidConfig {
                reason: "the box must lie strictly in front of the camera (z > 0)",
            });
        }
        if (0..3).any(|i| self.box_max[i] < self.box_min[i]) {
            return Err(SynthError::InvalidConfig {
                reason: "box_max must dominate box_min",
            });
        }
        if self.f1_gt <= 0.0 || self.f2_gt <= 0.0 {
            return Err(SynthError::InvalidConfig {
                reason: "ground-truth focal lengths must be positive",
            });
        }
        if self.image_noise_sigma < 0.0
            || self.roll_noise_sigma_deg < 0.0
            || self.pitch_noise_sigma_deg < 0.0
        {
            return Err(SynthError::InvalidConfig {
                reason: "noise sigmas must be non-negative",
            });
        }
        if self.yaw_range_deg.0 < 0.0
            || self.yaw_range_deg.1 < self.yaw_range_deg.0
            || self.yaw_range_deg.1 >= 180.0
        {
            return Err(SynthError::InvalidConfig {
                reason: "yaw range must satisfy 0 <= lo <= hi < 180 degrees",
            });
        }
        if self.image_bound <= 0.0 {
            return Err(SynthError::InvalidConfig {
                reason: "image bound must be positive",
            });
        }
        Ok(())
    }
}

/// One generated trial: ground truth plus observed correspondences.
#[derive(Debug, Clone)]
pub struct Scene {
    pub gt: StitchModel,
    /// Observations with image noise applied and the (possibly perturbed)
    /// gravity priors the solvers are given.
    pub corrs: Vec<Correspondence>,
    /// Noise-free correspondences excluded from solving, for reprojection
    /// error.
    pub holdout: Vec<Correspondence>,
}

fn rot_x(a: f64) -> Mat3 {
    Mat3::new(1.0, 0.0, 0.0, 0.0, a.cos(), -a.sin(), 0.0, a.sin(), a.cos())
}

fn rot_z(a: f64) -> Mat3 {
    Mat3::new(a.cos(), -a.sin(), 0.0, a.sin(), a.cos(), 0.0, 0.0, 0.0, 1.0)
}

/// Generates one synthetic trial.
///
/// Point visibility is decided on the noise-free projections and the RNG
/// consumes the same draws regardless of the sigma values, so two
/// configurations differing only in noise levels share identical geometry
/// for a given seed.
pub fn generate_scene(config: &SceneConfig, trial_seed: u64) -> Result<Scene, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(crate::mix_seed(config.seed, trial_seed));
    let n = 1000.0;

    let tilt_range = config.tilt_range_deg.to_radians();
    let tilt = |rng: &mut ChaCha8Rng| -> Mat3 {
        if tilt_range == 0.0 {
            Mat3::identity()
        } else {
            rot_x(rng.gen_range(-tilt_range..tilt_range))
                * rot_z(rng.gen_range(-tilt_range..tilt_range))
        }
    };
    let tilt1 = tilt(&mut rng);
    let tilt2 = tilt(&mut rng);
    let down = Vec3::new(0.0, -1.0, 0.0);
    let g1_true = gravity_alignment(tilt1 * down)?;
    let g2_true = gravity_alignment(tilt2 * down)?;

    let (yaw_lo, yaw_hi) = (
        config.yaw_range_deg.0.to_radians(),
        config.yaw_range_deg.1.to_radians(),
    );
    let yaw_mag = if yaw_hi > yaw_lo {
        rng.gen_range(yaw_lo..yaw_hi)
    } else {
        yaw_lo
    };
    let theta = yaw_mag * if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
    let s = (theta / 2.0).tan();
    // Directions map from camera 1 to camera 2 through the model rotation,
    // so the generated data satisfies the estimated parameterization
    // exactly at zero noise.
    let r_rel = g2_true.rotation().transpose() * cayley_yaw(s) * g1_true.rotation();

    // Prior noise is per image, drawn once per scene.
    let unit_normal = Normal::new(0.0, 1.0).expect("unit sigma is valid");
    let prior_noise = |rng: &mut ChaCha8Rng| -> [f64; 2] {
        [
            unit_normal.sample(rng) * config.roll_noise_sigma_deg.to_radians(),
            unit_normal.sample(rng) * config.pitch_noise_sigma_deg.to_radians(),
        ]
    };
    let [roll1, pitch1] = prior_noise(&mut rng);
    let [roll2, pitch2] = prior_noise(&mut rng);
    let perturb = |g: &GravityPrior, roll: f64, pitch: f64| -> Result<GravityPrior, GeomError> {
        if roll == 0.0 && pitch == 0.0 {
            return Ok(*g);
        }
        GravityPrior::new(g.rotation() * rot_x(roll) * rot_z(pitch))
    };
    let g1_noisy = perturb(&g1_true, roll1, pitch1)?;
    let g2_noisy = perturb(&g2_true, roll2, pitch2)?;

    let gt = crate::geom::compose_model(
        s,
        config.f1_gt,
        config.f2_gt,
        config.lambda1_gt,
        config.lambda2_gt,
        &g1_true,
        &g2_true,
        n,
    )?;

    let needed = config.n_points + config.n_holdout;
    let max_attempts = 100 * needed;
    let mut corrs = Vec::with_capacity(config.n_points);
    let mut holdout = Vec::with_capacity(config.n_holdout);
    let mut attempts = 0usize;
    while corrs.len() + holdout.len() < needed {
        attempts += 1;
        if attempts > max_attempts {
            return Err(SynthError::Infeasible {
                visible: corrs.len() + holdout.len(),
                needed,
            });
        }
        let d1 = Vec3::new(
            rng.gen_range(config.box_min[0]..=config.box_max[0]),
            rng.gen_range(config.box_min[1]..=config.box_max[1]),
            rng.gen_range(config.box_min[2]..=config.box_max[2]),
        );
        let d2 = r_rel * d1;
        if d2.z <= 1e-6 {
            continue;
        }
        let project = |d: Vec3, f: f64, lambda: f64| -> Option<DistortedPoint> {
            let q = Vec3::new(f / n * d.x / d.z, f / n * d.y / d.z, 1.0);
            distort(&q, lambda, n).ok()
        };
        let (Some(p1), Some(p2)) = (
            project(d1, config.f1_gt, config.lambda1_gt),
            project(d2, config.f2_gt, config.lambda2_gt),
        ) else {
            continue;
        };
        if p1.u.abs() > config.image_bound
            || p1.v.abs() > config.image_bound
            || p2.u.abs() > config.image_bound
            || p2.v.abs() > config.image_bound
        {
            continue;
        }
        if corrs.len() < config.n_points {
            let mut jitter =
                |p: &DistortedPoint| -> DistortedPoint {
                    DistortedPoint::new(
                        p.u + unit_normal.sample(&mut rng) * config.image_noise_sigma,
                        p.v + unit_normal.sample(&mut rng) * config.image_noise_sigma,
                        p.norm_scale,
                    )
                };
            let (p1, p2) = (jitter(&p1), jitter(&p2));
            corrs.push(Correspondence {
                p1,
                p2,
                g1: g1_noisy,
                g2: g2_noisy,
            });
        } else {
            holdout.push(Correspondence {
                p1,
                p2,
                g1: g1_true,
                g2: g2_true,
            });
        }
    }
    Ok(Scene { gt, corrs, holdout })
}

/// Per-trial benchmark record. Failed trials carry infinite error fields.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub solver_id: SolverId,
    /// Value of the swept noise parameter for this trial.
    pub level: f64,
    pub trial: usize,
    /// `|gm(f) - gm(f_gt)| / gm(f_gt)` with the geometric mean `gm`.
    pub focal_error: f64,
    /// Angle between the estimated and true relative rotations, radians.
    pub rotation_error: f64,
    /// Signed `gm(lambda_gt) - gm(lambda_est)` where `gm` is the
    /// absolute-value geometric mean carrying the sign of the sum.
    pub distortion_error: f64,
    /// Mean symmetric transfer error over the held-out points, pixels.
    pub reprojection_error: f64,
    pub solve_time_us: u64,
    pub candidate_count: usize,
    pub failed: bool,
}

fn signed_geometric_mean(a: f64, b: f64) -> f64 {
    let sign = if a + b < 0.0 { -1.0 } else { 1.0 };
    sign * (a * b).abs().sqrt()
}

/// Scores a candidate set against ground truth, selecting the candidate
/// nearest to the true relative rotation. An absent or empty set yields a
/// failure record with sentinel errors.
pub fn compute_errors(
    solver_id: SolverId,
    set: Option<&SolverCandidateSet>,
    gt: &StitchModel,
    holdout: &[Correspondence],
) -> TrialRecord {
    let failure = TrialRecord {
        solver_id,
        level: 0.0,
        trial: 0,
        focal_error: f64::INFINITY,
        rotation_error: f64::INFINITY,
        distortion_error: f64::INFINITY,
        reprojection_error: f64::INFINITY,
        solve_time_us: 0,
        candidate_count: 0,
        failed: true,
    };
    let Some(set) = set else {
        return failure;
    };
    let r_gt = relative_rotation(gt);
    let best = set.candidates.iter().min_by(|a, b| {
        rotation_distance(&relative_rotation(a), &r_gt)
            .total_cmp(&rotation_distance(&relative_rotation(b), &r_gt))
    });
    let Some(model) = best else {
        return failure;
    };
    let gm_gt = (gt.f1 * gt.f2).sqrt();
    let focal_error = ((model.f1 * model.f2).sqrt() - gm_gt).abs() / gm_gt;
    let rotation_error = rotation_distance(&relative_rotation(model), &r_gt);
    let distortion_error = signed_geometric_mean(gt.lambda1, gt.lambda2)
        - signed_geometric_mean(model.lambda1, model.lambda2);
    let reprojection_error = if holdout.is_empty() {
        0.0
    } else {
        holdout
            .iter()
            .map(|c| transfer_error(model, c, ErrorMode::Symmetric))
            .sum::<f64>()
            / holdout.len() as f64
    };
    TrialRecord {
        solver_id,
        level: 0.0,
        trial: 0,
        focal_error,
        rotation_error,
        distortion_error,
        reprojection_error,
        solve_time_us: 0,
        candidate_count: set.candidates.len(),
        failed: false,
    }
}

/// Which noise parameter a sweep varies; the other two stay at the values
/// in the base configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    ImageNoise,
    RollNoise,
    PitchNoise,
}

impl SweepAxis {
    fn apply(self, config: &SceneConfig, level: f64) -> SceneConfig {
        let mut c = config.clone();
        match self {
            SweepAxis::ImageNoise => c.image_noise_sigma = level,
            SweepAxis::RollNoise => c.roll_noise_sigma_deg = level,
            SweepAxis::PitchNoise => c.pitch_noise_sigma_deg = level,
        }
        c
    }
}

/// Runs `n_trials` trials per level and solver. Each trial generates one
/// scene shared by all solvers; every solver then draws its own minimal
/// sample from the scene's correspondences. Records are ordered by level,
/// then trial, then solver, and are reproducible from the configuration
/// seed alone. Timing is opt-in because measured durations are not
/// reproducible across machines.
pub fn run_sweep(
    config: &SceneConfig,
    axis: SweepAxis,
    levels: &[f64],
    solver_ids: &[SolverId],
    timing: bool,
) -> Result<Vec<TrialRecord>, SynthError> {
    config.validate()?;
    let opts = SolverOptions::default();
    let mut records = Vec::with_capacity(levels.len() * config.n_trials * solver_ids.len());
    for (level_idx, &level) in levels.iter().enumerate() {
        let level_config = axis.apply(config, level);
        level_config.validate()?;
        let trial_records: Vec<Result<Vec<TrialRecord>, SynthError>> = (0..config.n_trials)
            .into_par_iter()
            .map(|trial| {
                let trial_seed = (level_idx * config.n_trials + trial) as u64;
                let scene = generate_scene(&level_config, trial_seed)?;
                let mut out = Vec::with_capacity(solver_ids.len());
                for (solver_idx, &solver_id) in solver_ids.iter().enumerate() {
                    let mut rng = ChaCha8Rng::seed_from_u64(crate::mix_seed(
                        crate::mix_seed(level_config.seed, trial_seed),
                        solver_idx as u64,
                    ));
                    let m = solver_id.sample_size();
                    let picks = rand::seq::index::sample(&mut rng, scene.corrs.len(), m);
                    let sample: Vec<Correspondence> =
                        picks.iter().map(|i| scene.corrs[i]).collect();
                    let start = timing.then(std::time::Instant::now);
                    let set = solve(solver_id, &sample, &opts).ok();
                    let elapsed = start.map_or(0, |t| t.elapsed().as_micros() as u64);
                    let mut record =
                        compute_errors(solver_id, set.as_ref(), &scene.gt, &scene.holdout);
                    record.level = level;
                    record.trial = trial;
                    record.solve_time_us = elapsed;
                    out.push(record);
                }
                Ok(out)
            })
            .collect();
        for trial in trial_records {
            records.extend(trial?);
        }
    }
    Ok(records)
}

/// Record field selectors for aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordField {
    FocalError,
    RotationError,
    DistortionError,
    ReprojectionError,
    SolveTimeUs,
}

impl RecordField {
    fn get(self, r: &TrialRecord) -> f64 {
        match self {
            RecordField::FocalError => r.focal_error,
            RecordField::RotationError => r.rotation_error,
            RecordField::DistortionError => r.distortion_error,
            RecordField::ReprojectionError => r.reprojection_error,
            RecordField::SolveTimeUs => r.solve_time_us as f64,
        }
    }
}

/// Empirical CDF of one field. Failures (non-finite values) count in the
/// denominator but produce no finite point, so the curve saturates below 1
/// when failures exist.
pub fn aggregate_cdf(
    records: &[TrialRecord],
    field: RecordField,
) -> Result<Vec<(f64, f64)>, SynthError> {
    if records.is_empty() {
        return Err(SynthError::EmptyRecords);
    }
    let mut values: Vec<f64> = records
        .iter()
        .map(|r| field.get(r))
        .filter(|v| v.is_finite())
        .collect();
    values.sort_by(f64::total_cmp);
    let n = records.len() as f64;
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, (i + 1) as f64 / n))
        .collect())
}

/// Smallest value whose cumulative fraction reaches one half; `None` when
/// failures push the median off the finite part of the curve.
pub fn cdf_median(cdf: &[(f64, f64)]) -> Option<f64> {
    cdf.iter().find(|(_, f)| *f >= 0.5).map(|(v, _)| *v)
}

/// Median of one finite-valued field across records; failures count as
/// infinite.
pub fn median_of(records: &[TrialRecord], field: RecordField) -> Option<f64> {
    aggregate_cdf(records, field).ok().and_then(|c| cdf_median(&c))
}

/// Serializes records as CSV with a fixed header; row order is preserved.
pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(
        "solver_id,level,trial,focal_error,rotation_error,distortion_error,\
         reprojection_error,solve_time_us,candidate_count,failed\n",
    );
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.solver_id,
            r.level,
            r.trial,
            r.focal_error,
            r.rotation_error,
            r.distortion_error,
            r.reprojection_error,
            r.solve_time_us,
            r.candidate_count,
            r.failed
        ));
    }
    out
}

/// Serializes a CDF as `value,fraction` CSV rows.
pub fn cdf_to_csv(cdf: &[(f64, f64)]) -> String {
    let mut out = String::from("value,fraction\n");
    for (v, f) in cdf {
        out.push_str(&format!("{v},{f}\n"));
    }
    out
}
