//! Non-minimal refinement of a stitching model over an inlier set.
//!
//! Levenberg–Marquardt over `(theta, f1, f2)` or `(theta, f1, f2, lambda1,
//! lambda2)`, minimizing the summed squared symmetric transfer error in
//! pixels. Residual Jacobians come from forward-mode dual numbers carrying
//! one partial per parameter, so they are exact to rounding rather than
//! difference approximations.

use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::constraints::CorrExpansion;
use crate::geom::{compose_model, Correspondence, GeomError, StitchModel};

/// Minimum number of correspondences for a meaningful non-minimal fit.
pub const MIN_REFINE_POINTS: usize = 4;
/// Maximum outer Levenberg-Marquardt iterations.
pub const MAX_LM_ITERATIONS: usize = 100;
/// A run converged when the gradient norm drops below `1e-6 * (1 + cost)`.
pub const GRADIENT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum RefineError {
    #[error("non-minimal refinement needs at least {needed} correspondences, got {got}")]
    TooFewCorrespondences { needed: usize, got: usize },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Which parameters the refinement frees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineMode {
    /// `(theta, f1, f2)`; distortion coefficients stay at their initial
    /// values.
    NoDistortion,
    /// `(theta, f1, f2, lambda1, lambda2)`.
    Distortion,
}

impl RefineMode {
    fn active(self) -> &'static [usize] {
        match self {
            RefineMode::NoDistortion => &[0, 1, 2],
            RefineMode::Distortion => &[0, 1, 2, 3, 4],
        }
    }
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub model: StitchModel,
    /// Whether the gradient-norm criterion was met within the iteration
    /// budget; `false` means best-so-far was returned.
    pub converged: bool,
    pub initial_cost: f64,
    pub final_cost: f64,
    /// Norm of the cost gradient at the returned parameters.
    pub gradient_norm: f64,
    pub iterations: usize,
}

/// Forward-mode dual number with one partial derivative per refinement
/// parameter `[theta, phi1, phi2, lambda1, lambda2]`.
#[derive(Debug, Clone, Copy)]
struct Dual5 {
    v: f64,
    d: [f64; 5],
}

impl Dual5 {
    fn constant(v: f64) -> Self {
        Self { v, d: [0.0; 5] }
    }

    fn variable(v: f64, slot: usize) -> Self {
        let mut d = [0.0; 5];
        d[slot] = 1.0;
        Self { v, d }
    }

    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        let g = 0.5 / r;
        Self {
            v: r,
            d: self.d.map(|x| x * g),
        }
    }

    fn recip(self) -> Self {
        let r = 1.0 / self.v;
        let g = -r * r;
        Self {
            v: r,
            d: self.d.map(|x| x * g),
        }
    }
}

impl Add for Dual5 {
    type Output = Dual5;
    fn add(self, o: Dual5) -> Dual5 {
        Dual5 {
            v: self.v + o.v,
            d: std::array::from_fn(|i| self.d[i] + o.d[i]),
        }
    }
}

impl Add<f64> for Dual5 {
    type Output = Dual5;
    fn add(self, o: f64) -> Dual5 {
        Dual5 {
            v: self.v + o,
            d: self.d,
        }
    }
}

impl Sub for Dual5 {
    type Output = Dual5;
    fn sub(self, o: Dual5) -> Dual5 {
        Dual5 {
            v: self.v - o.v,
            d: std::array::from_fn(|i| self.d[i] - o.d[i]),
        }
    }
}

impl Sub<f64> for Dual5 {
    type Output = Dual5;
    fn sub(self, o: f64) -> Dual5 {
        Dual5 {
            v: self.v - o,
            d: self.d,
        }
    }
}

impl Mul for Dual5 {
    type Output = Dual5;
    // Product rule: the derivative of a product is a sum.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, o: Dual5) -> Dual5 {
        Dual5 {
            v: self.v * o.v,
            d: std::array::from_fn(|i| self.d[i] * o.v + self.v * o.d[i]),
        }
    }
}

impl Mul<f64> for Dual5 {
    type Output = Dual5;
    fn mul(self, o: f64) -> Dual5 {
        Dual5 {
            v: self.v * o,
            d: self.d.map(|x| x * o),
        }
    }
}

impl Div for Dual5 {
    type Output = Dual5;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Dual5) -> Dual5 {
        self * o.recip()
    }
}

impl Neg for Dual5 {
    type Output = Dual5;
    fn neg(self) -> Dual5 {
        Dual5 {
            v: -self.v,
            d: self.d.map(|x| -x),
        }
    }
}

/// Precomputed per-correspondence data: the expansion of the forward map
/// and of the reversed correspondence (whose rows, evaluated at `-s`, give
/// the backward map).
struct CorrData {
    fwd: CorrExpansion,
    bwd: CorrExpansion,
    obs1: (f64, f64),
    obs2: (f64, f64),
    norm_scale: f64,
}

impl CorrData {
    fn new(c: &Correspondence) -> Self {
        let reversed = Correspondence {
            p1: c.p2,
            p2: c.p1,
            g1: c.g2,
            g2: c.g1,
        };
        Self {
            fwd: CorrExpansion::new(c),
            bwd: CorrExpansion::new(&reversed),
            obs1: c.p1.normalized(),
            obs2: c.p2.normalized(),
            norm_scale: c.p1.norm_scale,
        }
    }
}

/// Evaluates the mapped (pre-division) rows `point_r(s) + phi z focal_r(s)`.
fn mapped_rows(e: &CorrExpansion, s: Dual5, phi: Dual5, lambda: Dual5) -> [Dual5; 3] {
    let fz = phi * (lambda * e.rho1 + 1.0);
    let s2 = s * s;
    std::array::from_fn(|r| {
        let pt = s2 * e.point[r][2] + s * e.point[r][1] + Dual5::constant(e.point[r][0]);
        let fc = s2 * e.focal[r][2] + s * e.focal[r][1] + Dual5::constant(e.focal[r][0]);
        pt + fz * fc
    })
}

/// Pixel residual of mapping one correspondence in one direction: project
/// through the yaw homography, re-distort, and compare with the observed
/// point. `None` when the mapped point lands behind the camera or outside
/// the distortion model's range.
#[allow(clippy::too_many_arguments)]
fn direction_residual(
    e: &CorrExpansion,
    s: Dual5,
    phi_src: Dual5,
    lambda_src: Dual5,
    phi_dst: Dual5,
    lambda_dst: Dual5,
    obs: (f64, f64),
    norm_scale: f64,
) -> Option<[Dual5; 2]> {
    let u = mapped_rows(e, s, phi_src, lambda_src);
    if u[2].v <= 1e-12 {
        return None;
    }
    let inv = u[2].recip();
    let x = phi_dst * u[0] * inv;
    let y = phi_dst * u[1] * inv;
    let disc = -((x * x + y * y) * lambda_dst * 4.0) + 1.0;
    if disc.v <= 1e-12 {
        return None;
    }
    let scale = (disc.sqrt() + 1.0).recip() * 2.0;
    Some([
        (x * scale - obs.0) * norm_scale,
        (y * scale - obs.1) * norm_scale,
    ])
}

/// All residuals (4 per correspondence: forward and backward, x and y) at
/// the parameter vector `[theta, phi1, phi2, lambda1, lambda2]`.
fn residuals(data: &[CorrData], u: &[f64; 5]) -> Option<Vec<Dual5>> {
    if u[1] <= 0.0 || u[2] <= 0.0 {
        return None;
    }
    let s = {
        let t = (u[0] / 2.0).tan();
        let mut d = [0.0; 5];
        d[0] = 0.5 * (1.0 + t * t);
        Dual5 { v: t, d }
    };
    let phi1 = Dual5::variable(u[1], 1);
    let phi2 = Dual5::variable(u[2], 2);
    let l1 = Dual5::variable(u[3], 3);
    let l2 = Dual5::variable(u[4], 4);
    let mut out = Vec::with_capacity(4 * data.len());
    for c in data {
        let fwd =
            direction_residual(&c.fwd, s, phi1, l1, phi2, l2, c.obs2, c.norm_scale)?;
        let bwd =
            direction_residual(&c.bwd, -s, phi2, l2, phi1, l1, c.obs1, c.norm_scale)?;
        out.extend_from_slice(&fwd);
        out.extend_from_slice(&bwd);
    }
    Some(out)
}

fn cost_of(res: &[Dual5]) -> f64 {
    0.5 * res.iter().map(|r| r.v * r.v).sum::<f64>()
}

/// Packs residual values and the Jacobian over the active columns.
fn pack(res: &[Dual5], active: &[usize]) -> (DVector<f64>, DMatrix<f64>) {
    let r = DVector::from_iterator(res.len(), res.iter().map(|d| d.v));
    let j = DMatrix::from_fn(res.len(), active.len(), |i, c| res[i].d[active[c]]);
    (r, j)
}

pub fn refine_nonminimal(
    corrs: &[Correspondence],
    initial: &StitchModel,
    mode: RefineMode,
) -> Result<RefineOutcome, RefineError> {
    if corrs.len() < MIN_REFINE_POINTS {
        return Err(RefineError::TooFewCorrespondences {
            needed: MIN_REFINE_POINTS,
            got: corrs.len(),
        });
    }
    let data: Vec<CorrData> = corrs.iter().map(CorrData::new).collect();
    let active = mode.active();
    let n = initial.norm_scale;
    let mut u = [
        initial.theta,
        initial.f1 / n,
        initial.f2 / n,
        initial.lambda1,
        initial.lambda2,
    ];

    let build = |u: &[f64; 5]| -> Result<StitchModel, GeomError> {
        compose_model(
            (u[0] / 2.0).tan(),
            u[1] * n,
            u[2] * n,
            u[3],
            u[4],
            &corrs[0].g1,
            &corrs[0].g2,
            n,
        )
    };

    let Some(mut res) = residuals(&data, &u) else {
        // The initial model does not validly map every inlier; nothing to
        // minimize over, so hand it back unchanged.
        return Ok(RefineOutcome {
            model: *initial,
            converged: false,
            initial_cost: f64::INFINITY,
            final_cost: f64::INFINITY,
            gradient_norm: f64::INFINITY,
            iterations: 0,
        });
    };
    let initial_cost = cost_of(&res);
    let mut cost = initial_cost;
    let mut mu = -1.0; // initialized from the first normal matrix below
    let mut converged = false;
    let mut gradient_norm = f64::INFINITY;
    let mut iterations = 0;

    for _ in 0..MAX_LM_ITERATIONS {
        iterations += 1;
        let (r, j) = pack(&res, active);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        gradient_norm = g.norm();
        if gradient_norm < GRADIENT_TOL * (1.0 + cost) {
            converged = true;
            break;
        }
        let max_diag = (0..active.len())
            .map(|i| jtj[(i, i)])
            .fold(0.0f64, f64::max);
        if mu < 0.0 {
            mu = 1e-3 * max_diag.max(1e-12);
        }
        let mut stepped = false;
        for _ in 0..20 {
            let mut a = jtj.clone();
            for i in 0..active.len() {
                a[(i, i)] += mu * jtj[(i, i)].max(1e-12);
            }
            let Some(delta) = a.lu().solve(&g) else {
                mu *= 10.0;
                continue;
            };
            let mut trial = u;
            for (c, &slot) in active.iter().enumerate() {
                trial[slot] -= delta[c];
            }
            if let Some(trial_res) = residuals(&data, &trial) {
                let trial_cost = cost_of(&trial_res);
                if trial_cost < cost {
                    u = trial;
                    res = trial_res;
                    cost = trial_cost;
                    mu = (mu / 3.0).max(1e-12);
                    stepped = true;
                    break;
                }
            }
            mu *= 10.0;
            if mu > 1e15 {
                break;
            }
        }
        if !stepped {
            break;
        }
    }

    // Cost never increases across accepted steps, so this only fires if the
    // refit model itself cannot be composed (e.g. focal driven to the
    // boundary); fall back to the input as promised.
    let model = match build(&u) {
        Ok(m) if cost <= initial_cost => m,
        _ => *initial,
    };
    let final_cost = if cost <= initial_cost {
        cost
    } else {
        initial_cost
    };
    Ok(RefineOutcome {
        model,
        converged,
        initial_cost,
        final_cost,
        gradient_norm,
        iterations,
    })
}
