//! Locally optimized RANSAC over the minimal solvers.
//!
//! Hypotheses are drawn as uniform minimal samples, every candidate a
//! solver returns is scored against all correspondences, and each new best
//! hypothesis is polished by refitting the non-minimal model to its inliers.
//! Iterations are seeded individually from the master seed, so results are
//! bitwise reproducible regardless of thread count or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::geom::{transfer_error, Correspondence, ErrorMode, StitchModel};
use crate::refine::{refine_nonminimal, RefineMode, MIN_REFINE_POINTS};
use crate::solvers::{solve, SolverId, SolverOptions};

/// Fewest inliers a model may have and still be reported.
pub const MIN_INLIERS: usize = 4;
/// Upper bound on local-optimization rounds per new best hypothesis.
const MAX_LO_ROUNDS: usize = 10;

#[derive(Debug, Error)]
pub enum RobustError {
    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: &'static str },
    #[error("robust estimation needs at least {needed} correspondences, got {got}")]
    TooFewCorrespondences { needed: usize, got: usize },
    #[error(
        "no model with {MIN_INLIERS} or more inliers after {iterations_run} iterations \
         (best had {best_inliers})"
    )]
    NoModel {
        iterations_run: usize,
        best_inliers: usize,
    },
}

/// How a hypothesis is scored against the full correspondence set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scoring {
    /// Number of correspondences within the inlier threshold.
    #[default]
    InlierCount,
    /// Truncated quadratic gain `sum(max(0, 1 - (e/t)^2))`; ranks models
    /// with equal inlier counts by how tightly the inliers fit.
    TruncatedQuadratic,
}

#[derive(Debug, Clone)]
pub struct RansacConfig {
    /// Target probability of having drawn at least one all-inlier sample.
    pub confidence: f64,
    /// Symmetric transfer error bound, in pixels, for counting a
    /// correspondence as an inlier.
    pub inlier_threshold: f64,
    /// Hard cap on hypothesis iterations.
    pub max_iterations: usize,
    /// Whether each new best hypothesis is refined on its inliers.
    pub lo_enabled: bool,
    pub scoring: Scoring,
    /// Master seed; all per-iteration randomness derives from it.
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            confidence: 0.99,
            inlier_threshold: 3.0,
            max_iterations: 10_000,
            lo_enabled: true,
            scoring: Scoring::default(),
            seed: 0,
        }
    }
}

impl RansacConfig {
    fn validate(&self) -> Result<(), RobustError> {
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(RobustError::InvalidConfig {
                reason: "confidence must lie strictly between 0 and 1",
            });
        }
        if !(self.inlier_threshold > 0.0 && self.inlier_threshold.is_finite()) {
            return Err(RobustError::InvalidConfig {
                reason: "inlier threshold must be positive and finite",
            });
        }
        if self.max_iterations == 0 {
            return Err(RobustError::InvalidConfig {
                reason: "iteration cap must be at least 1",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RansacResult {
    pub model: StitchModel,
    /// One flag per input correspondence; `true` means its symmetric
    /// transfer error under `model` is within the threshold.
    pub inlier_mask: Vec<bool>,
    pub inlier_count: usize,
    pub score: f64,
    pub iterations_run: usize,
}

/// Number of iterations needed to see an all-inlier sample with the given
/// confidence, clamped to `[1, cap]`. Degenerate ratios (zero, or so small
/// the success probability underflows) return the cap.
pub fn iteration_budget(
    confidence: f64,
    inlier_ratio: f64,
    sample_size: usize,
    cap: usize,
) -> usize {
    if inlier_ratio <= 0.0 || inlier_ratio.is_nan() {
        return cap;
    }
    let p_good = inlier_ratio.min(1.0).powi(sample_size as i32);
    if p_good >= 1.0 {
        return 1;
    }
    // ln(1 - p_good), stable for small p_good.
    let denom = (-p_good).ln_1p();
    let raw = ((1.0 - confidence).ln() / denom).ceil();
    if !raw.is_finite() {
        return cap;
    }
    (raw as usize).clamp(1, cap)
}

struct Hypothesis {
    model: StitchModel,
    score: f64,
    inlier_count: usize,
    /// Iteration that produced the model; breaks score ties toward the
    /// earliest iteration so reductions are order-independent.
    iteration: u64,
}

fn score_model(
    model: &StitchModel,
    corrs: &[Correspondence],
    threshold: f64,
    scoring: Scoring,
) -> (f64, Vec<bool>, usize) {
    let mut mask = vec![false; corrs.len()];
    let mut count = 0usize;
    let mut score = 0.0f64;
    for (flag, c) in mask.iter_mut().zip(corrs) {
        let e = transfer_error(model, c, ErrorMode::Symmetric);
        if e <= threshold {
            *flag = true;
            count += 1;
            score += match scoring {
                Scoring::InlierCount => 1.0,
                Scoring::TruncatedQuadratic => 1.0 - (e / threshold) * (e / threshold),
            };
        }
    }
    (score, mask, count)
}

fn better(a: &Hypothesis, b: &Hypothesis) -> bool {
    a.score > b.score || (a.score == b.score && a.iteration < b.iteration)
}

/// Runs one hypothesis iteration: draw a minimal sample, solve, score every
/// candidate, and return the iteration's best model if any.
fn run_iteration(
    corrs: &[Correspondence],
    solver_id: SolverId,
    opts: &SolverOptions,
    config: &RansacConfig,
    iteration: u64,
) -> Option<Hypothesis> {
    let m = solver_id.sample_size();
    let mut rng = ChaCha8Rng::seed_from_u64(crate::mix_seed(config.seed, iteration));
    let picks = rand::seq::index::sample(&mut rng, corrs.len(), m);
    let sample: Vec<Correspondence> = picks.iter().map(|i| corrs[i]).collect();
    let set = solve(solver_id, &sample, opts).ok()?;
    let mut best: Option<Hypothesis> = None;
    for cand in &set.candidates {
        let (score, _, count) =
            score_model(cand, corrs, config.inlier_threshold, config.scoring);
        let h = Hypothesis {
            model: *cand,
            score,
            inlier_count: count,
            iteration,
        };
        if best.as_ref().is_none_or(|b| better(&h, b)) {
            best = Some(h);
        }
    }
    best
}

/// Refits the model to the current inlier set until the score stops
/// improving. The returned hypothesis never scores below the input.
fn local_optimization(
    corrs: &[Correspondence],
    best: Hypothesis,
    solver_id: SolverId,
    config: &RansacConfig,
) -> Hypothesis {
    let mode = if solver_id.estimates_distortion() {
        RefineMode::Distortion
    } else {
        RefineMode::NoDistortion
    };
    let mut best = best;
    for _ in 0..MAX_LO_ROUNDS {
        if best.inlier_count < MIN_REFINE_POINTS {
            break;
        }
        let (_, mask, _) = score_model(
            &best.model,
            corrs,
            config.inlier_threshold,
            config.scoring,
        );
        let inliers: Vec<Correspondence> = corrs
            .iter()
            .zip(&mask)
            .filter_map(|(c, &keep)| keep.then_some(*c))
            .collect();
        let Ok(outcome) = refine_nonminimal(&inliers, &best.model, mode) else {
            break;
        };
        let (score, _, count) = score_model(
            &outcome.model,
            corrs,
            config.inlier_threshold,
            config.scoring,
        );
        if score > best.score {
            best = Hypothesis {
                model: outcome.model,
                score,
                inlier_count: count,
                iteration: best.iteration,
            };
        } else {
            break;
        }
    }
    best
}

/// Robustly estimates a stitching model from correspondences contaminated
/// by outliers.
///
/// All correspondences must share the per-image gravity priors and
/// normalization scale of the first one. The iteration count adapts to the
/// best inlier ratio found so far; identical inputs and configuration give
/// bitwise identical results.
pub fn ransac(
    corrs: &[Correspondence],
    solver_id: SolverId,
    config: &RansacConfig,
) -> Result<RansacResult, RobustError> {
    config.validate()?;
    let m = solver_id.sample_size();
    let needed = m.max(MIN_INLIERS);
    if corrs.len() < needed {
        return Err(RobustError::TooFewCorrespondences {
            needed,
            got: corrs.len(),
        });
    }
    let opts = SolverOptions::default();
    let mut best: Option<Hypothesis> = None;
    let mut budget = config.max_iterations;
    let mut done: u64 = 0;
    // Batches double from 1 so clean data can stop after a single
    // iteration, while contaminated data soon runs wide in parallel.
    let mut batch = 1u64;
    while (done as usize) < budget {
        let remaining = budget - done as usize;
        let take = batch.min(remaining as u64);
        let batch_best = (done..done + take)
            .into_par_iter()
            .map(|i| run_iteration(corrs, solver_id, &opts, config, i))
            .reduce(
                || None,
                |a, b| match (a, b) {
                    (Some(x), Some(y)) => Some(if better(&x, &y) { x } else { y }),
                    (x, None) => x,
                    (None, y) => y,
                },
            );
        done += take;
        batch = (batch * 2).min(64);
        let Some(candidate) = batch_best else {
            continue;
        };
        if best.as_ref().is_some_and(|b| !better(&candidate, b)) {
            continue;
        }
        let mut new_best = candidate;
        if config.lo_enabled {
            new_best = local_optimization(corrs, new_best, solver_id, config);
        }
        let ratio = new_best.inlier_count as f64 / corrs.len() as f64;
        budget = iteration_budget(config.confidence, ratio, m, config.max_iterations);
        best = Some(new_best);
    }
    let iterations_run = done as usize;
    let best = match best {
        Some(b) if b.inlier_count >= MIN_INLIERS => b,
        other => {
            return Err(RobustError::NoModel {
                iterations_run,
                best_inliers: other.map_or(0, |b| b.inlier_count),
            })
        }
    };
    // Report the mask recomputed under the returned model so callers can
    // reproduce it exactly.
    let (score, mask, count) = score_model(
        &best.model,
        corrs,
        config.inlier_threshold,
        config.scoring,
    );
    Ok(RansacResult {
        model: best.model,
        inlier_mask: mask,
        inlier_count: count,
        score,
        iterations_run,
    })
}
