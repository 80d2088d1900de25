//! Minimal solvers mapping 1-3 correspondences (or >= 4 for the DLT
//! baseline) to candidate stitching models.
//!
//! Each solver eliminates unknowns from the constraint rows of
//! [`crate::constraints`] down to one univariate polynomial in the yaw
//! parameter, then back-substitutes the remaining unknowns per root.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::constraints::CorrExpansion;
use crate::geom::{
    compose_model, undistort, unscaled_homography, Correspondence, GeomError, StitchModel,
};
use crate::poly::{PolyError, UniPoly};
use thiserror::Error;

pub mod aligned;
pub mod h1f;
pub mod h2f1f2;
pub mod h2lambda;
pub mod h3l1l2;
pub mod h4dlt;

/// Relative residual above which the strict filter drops a candidate.
pub const STRICT_RESIDUAL_TOL: f64 = 1e-6;
/// Relative coefficient norm below which an elimination is degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Priors must be within this of identity for the aligned solvers.
pub const ALIGNED_PRIOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverId {
    H1f,
    H2f1f2,
    H2lambda,
    H3l1l2,
    H1fAligned,
    H2f1f2Aligned,
    H2lambdaAligned,
    H3l1l2Aligned,
    H4dlt,
}

impl SolverId {
    pub const ALL: [SolverId; 9] = [
        SolverId::H1f,
        SolverId::H2f1f2,
        SolverId::H2lambda,
        SolverId::H3l1l2,
        SolverId::H1fAligned,
        SolverId::H2f1f2Aligned,
        SolverId::H2lambdaAligned,
        SolverId::H3l1l2Aligned,
        SolverId::H4dlt,
    ];

    /// Number of correspondences the solver consumes (minimum for H4dlt).
    pub fn sample_size(self) -> usize {
        match self {
            SolverId::H1f | SolverId::H1fAligned => 1,
            SolverId::H2f1f2
            | SolverId::H2lambda
            | SolverId::H2f1f2Aligned
            | SolverId::H2lambdaAligned => 2,
            SolverId::H3l1l2 | SolverId::H3l1l2Aligned => 3,
            SolverId::H4dlt => 4,
        }
    }

    /// Whether the solver estimates radial distortion.
    pub fn estimates_distortion(self) -> bool {
        matches!(
            self,
            SolverId::H2lambda
                | SolverId::H3l1l2
                | SolverId::H2lambdaAligned
                | SolverId::H3l1l2Aligned
        )
    }

    /// Upper bound on real roots of the elimination polynomial.
    pub fn max_raw_count(self) -> usize {
        match self {
            SolverId::H1f | SolverId::H2f1f2 => 4,
            SolverId::H2lambda => 8,
            SolverId::H3l1l2 => 6,
            SolverId::H4dlt => 1,
            _ => 2,
        }
    }

    /// Upper bound on feasible candidates.
    pub fn max_candidates(self) -> usize {
        match self {
            SolverId::H1f | SolverId::H2f1f2 => 4,
            SolverId::H2lambda | SolverId::H3l1l2 => 6,
            SolverId::H4dlt => 1,
            _ => 2,
        }
    }

    pub fn is_aligned(self) -> bool {
        matches!(
            self,
            SolverId::H1fAligned
                | SolverId::H2f1f2Aligned
                | SolverId::H2lambdaAligned
                | SolverId::H3l1l2Aligned
        )
    }
}

impl fmt::Display for SolverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SolverId::H1f => "H1f",
            SolverId::H2f1f2 => "H2f1f2",
            SolverId::H2lambda => "H2lambda",
            SolverId::H3l1l2 => "H3l1l2",
            SolverId::H1fAligned => "H1f_aligned",
            SolverId::H2f1f2Aligned => "H2f1f2_aligned",
            SolverId::H2lambdaAligned => "H2lambda_aligned",
            SolverId::H3l1l2Aligned => "H3l1l2_aligned",
            SolverId::H4dlt => "H4dlt",
        };
        f.write_str(name)
    }
}

impl FromStr for SolverId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "h1f" => Ok(SolverId::H1f),
            "h2f1f2" => Ok(SolverId::H2f1f2),
            "h2lambda" => Ok(SolverId::H2lambda),
            "h3l1l2" => Ok(SolverId::H3l1l2),
            "h1f_aligned" => Ok(SolverId::H1fAligned),
            "h2f1f2_aligned" => Ok(SolverId::H2f1f2Aligned),
            "h2lambda_aligned" => Ok(SolverId::H2lambdaAligned),
            "h3l1l2_aligned" => Ok(SolverId::H3l1l2Aligned),
            "h4dlt" => Ok(SolverId::H4dlt),
            other => Err(format!("unknown solver id: {other}")),
        }
    }
}

/// How candidates violating the spare-equation residual are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualFilter {
    /// Drop candidates whose relative residual exceeds
    /// [`STRICT_RESIDUAL_TOL`] (noise-free data).
    Strict,
    /// Keep all candidates, sorted by residual (noisy data).
    Ranked,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Feasibility window for division-model coefficients.
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub residual_filter: ResidualFilter,
    /// Require a positive projective depth for every sample correspondence.
    pub cheirality: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            lambda_min: -2.0,
            lambda_max: 0.5,
            residual_filter: ResidualFilter::Ranked,
            cheirality: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverCandidateSet {
    pub candidates: Vec<StitchModel>,
    /// Real-root count of the elimination polynomial before filtering.
    pub raw_count: usize,
    pub solver_id: SolverId,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("solver {solver} needs {expected} correspondences, got {got}")]
    SampleSize {
        solver: SolverId,
        expected: usize,
        got: usize,
    },
    #[error("aligned solver requires identity gravity priors (deviation {deviation:.3e})")]
    NotAligned { deviation: f64 },
    #[error("observation too close to the distortion center (radius {radius:.3e} normalized)")]
    AtDistortionCenter { radius: f64 },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Runs the solver identified by `id` on `corrs`.
pub fn solve(
    id: SolverId,
    corrs: &[Correspondence],
    opts: &SolverOptions,
) -> Result<SolverCandidateSet, SolveError> {
    let expected = id.sample_size();
    let enough = if id == SolverId::H4dlt {
        corrs.len() >= expected
    } else {
        corrs.len() == expected
    };
    if !enough {
        return Err(SolveError::SampleSize {
            solver: id,
            expected,
            got: corrs.len(),
        });
    }
    let set = match id {
        SolverId::H1f => h1f::solve_h1f(&corrs[0], opts)?,
        SolverId::H2f1f2 => h2f1f2::solve_h2f1f2(&corrs[0], &corrs[1], opts)?,
        SolverId::H2lambda => h2lambda::solve_h2lambda(&corrs[0], &corrs[1], opts)?,
        SolverId::H3l1l2 => h3l1l2::solve_h3l1l2(&corrs[0], &corrs[1], &corrs[2], opts)?,
        SolverId::H4dlt => h4dlt::solve_h4dlt(corrs, opts)?,
        aligned_id => aligned::solve_aligned(aligned_id, corrs, opts)?,
    };
    assert!(
        set.raw_count <= id.max_raw_count(),
        "{id}: raw count {} exceeds bound {}",
        set.raw_count,
        id.max_raw_count()
    );
    assert!(
        set.candidates.len() <= id.max_candidates(),
        "{id}: candidate count {} exceeds bound {}",
        set.candidates.len(),
        id.max_candidates()
    );
    Ok(set)
}

/// Scalar parameter bundle shared by the back-substitution helpers.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Params {
    pub s: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

pub(crate) fn point_poly(e: &CorrExpansion, r: usize) -> UniPoly {
    UniPoly::new(e.point[r].to_vec())
}

pub(crate) fn focal_poly(e: &CorrExpansion, r: usize) -> UniPoly {
    UniPoly::new(e.focal[r].to_vec())
}

/// `a * pa + b * pb`.
pub(crate) fn lin2(a: f64, pa: &UniPoly, b: f64, pb: &UniPoly) -> UniPoly {
    pa.scaled(a).add(&pb.scaled(b))
}

/// Coefficients `(c1, c0)` of the third constraint equation
/// `c1(s) * f + c0(s) = 0`, the one free of the second image's unknowns.
pub(crate) fn third_equation_line(e: &CorrExpansion) -> (UniPoly, UniPoly) {
    let c1 = lin2(e.x2, &focal_poly(e, 1), -e.y2, &focal_poly(e, 0));
    let c0 = lin2(e.x2, &point_poly(e, 1), -e.y2, &point_poly(e, 0));
    (c1, c0)
}

fn eval_quad(row: &[f64; 3], s: f64) -> f64 {
    row[0] + s * (row[1] + s * row[2])
}

/// Rows of the mapped point split into their constant and focal parts:
/// `nq[r] = points[r] + phi1 * z1 * focals[r]`.
pub(crate) struct MappedRows {
    pub points: [f64; 3],
    pub focals: [f64; 3],
}

impl MappedRows {
    pub fn new(e: &CorrExpansion, s: f64, phi1: f64, lambda1: f64) -> Self {
        let z1 = 1.0 + lambda1 * e.rho1;
        let mut points = [0.0; 3];
        let mut focals = [0.0; 3];
        for r in 0..3 {
            points[r] = eval_quad(&e.point[r], s);
            focals[r] = phi1 * z1 * eval_quad(&e.focal[r], s);
        }
        Self { points, focals }
    }

    pub fn nq(&self, r: usize) -> f64 {
        self.points[r] + self.focals[r]
    }
}

/// One cross-product constraint equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Equation {
    E1,
    E2,
    E3,
}

/// Signed value and largest absolute term of one constraint equation at the
/// given parameters; the ratio is the relative residual used for ranking.
pub(crate) fn equation_residual(e: &CorrExpansion, eq: Equation, p: &Params) -> (f64, f64) {
    let rows = MappedRows::new(e, p.s, p.phi1, p.lambda1);
    let z2 = 1.0 + p.lambda2 * e.rho2;
    let w = 1.0 / p.phi2;
    let terms = match eq {
        Equation::E1 => [
            e.y2 * w * rows.points[2],
            e.y2 * w * rows.focals[2],
            -z2 * rows.points[1],
            -z2 * rows.focals[1],
        ],
        Equation::E2 => [
            z2 * rows.points[0],
            z2 * rows.focals[0],
            -e.x2 * w * rows.points[2],
            -e.x2 * w * rows.focals[2],
        ],
        Equation::E3 => [
            e.x2 * rows.points[1],
            e.x2 * rows.focals[1],
            -e.y2 * rows.points[0],
            -e.y2 * rows.focals[0],
        ],
    };
    let value: f64 = terms.iter().sum();
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    (value, scale)
}

/// Relative residual of one equation, `+inf` when the equation is all-zero.
pub(crate) fn relative_residual(e: &CorrExpansion, eq: Equation, p: &Params) -> f64 {
    let (value, scale) = equation_residual(e, eq, p);
    if scale <= 0.0 {
        return f64::INFINITY;
    }
    value.abs() / scale
}

/// The better-conditioned of the two scale-involving equations for this
/// correspondence: the first when the second image's y component dominates.
pub(crate) fn scale_equation(e: &CorrExpansion) -> Equation {
    if e.y2.abs() >= e.x2.abs() {
        Equation::E1
    } else {
        Equation::E2
    }
}

/// Worst relative constraint residual of a model over a set of
/// correspondences; zero means every constraint equation is satisfied to
/// rounding.
pub fn model_residual(model: &StitchModel, corrs: &[Correspondence]) -> f64 {
    let p = Params {
        s: model.s,
        phi1: model.f1 / model.norm_scale,
        phi2: model.f2 / model.norm_scale,
        lambda1: model.lambda1,
        lambda2: model.lambda2,
    };
    corrs
        .iter()
        .map(|c| {
            let e = CorrExpansion::new(c);
            relative_residual(&e, Equation::E3, &p)
                .max(relative_residual(&e, scale_equation(&e), &p))
        })
        .fold(0.0, f64::max)
}

/// Newton-polishes solver parameters on a square system of constraint
/// equations. Expanding the elimination polynomial costs a few digits to
/// cancellation, and back-substitution amplifies the remaining root error;
/// a couple of steps on the original bilinear equations restore
/// machine-precision parameters. Jacobians use central differences; the
/// iteration keeps the best iterate by residual norm and stops once it no
/// longer improves.
pub(crate) fn polish_on_equations(
    expansions: &[&CorrExpansion],
    eqs: &[(usize, Equation)],
    to_params: impl Fn(&[f64]) -> Params,
    u0: &[f64],
) -> Vec<f64> {
    let k = eqs.len();
    debug_assert_eq!(u0.len(), k);
    let eval_all = |u: &[f64]| -> Option<DVector<f64>> {
        let p = to_params(u);
        if p.phi1.abs() <= 1e-12 || p.phi2.abs() <= 1e-12 {
            return None;
        }
        let v = DVector::from_iterator(
            k,
            eqs.iter()
                .map(|(ci, eq)| equation_residual(expansions[*ci], *eq, &p).0),
        );
        v.iter().all(|x| x.is_finite()).then_some(v)
    };
    let mut u = DVector::from_column_slice(u0);
    let Some(mut f) = eval_all(u.as_slice()) else {
        return u0.to_vec();
    };
    let mut best = (u.clone(), f.norm());
    for _ in 0..4 {
        let mut jac = DMatrix::zeros(k, k);
        let mut ok = true;
        for c in 0..k {
            let h = 6e-6 * u[c].abs().max(1e-2);
            let mut up = u.clone();
            up[c] += h;
            let mut um = u.clone();
            um[c] -= h;
            match (eval_all(up.as_slice()), eval_all(um.as_slice())) {
                (Some(fp), Some(fm)) => jac.set_column(c, &((fp - fm) / (2.0 * h))),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let Some(delta) = jac.lu().solve(&f) else {
            break;
        };
        u -= &delta;
        let Some(fu) = eval_all(u.as_slice()) else {
            break;
        };
        f = fu;
        let n = f.norm();
        if n < best.1 {
            best = (u.clone(), n);
        } else {
            break;
        }
    }
    best.0.as_slice().to_vec()
}

/// Recovers the inverse focal `w` of image 2 from the better-conditioned of
/// the first two equations; `None` when both denominators vanish.
pub(crate) fn recover_w(
    e: &CorrExpansion,
    s: f64,
    phi1: f64,
    lambda1: f64,
    lambda2: f64,
) -> Option<f64> {
    let rows = MappedRows::new(e, s, phi1, lambda1);
    let z2 = 1.0 + lambda2 * e.rho2;
    let nq2 = rows.nq(2);
    let den1 = e.y2 * nq2;
    let den2 = e.x2 * nq2;
    let (num, den) = if den1.abs() >= den2.abs() {
        (z2 * rows.nq(1), den1)
    } else {
        (z2 * rows.nq(0), den2)
    };
    // Relative guard: the numerator terms set the scale.
    if den.abs() <= 1e-14 * num.abs().max(1.0) {
        return None;
    }
    Some(num / den)
}

/// Recovers `(w, lambda2)` from one non-third equation of each of two
/// correspondences, chosen per correspondence for conditioning.
pub(crate) fn recover_w_lambda2(
    ea: &CorrExpansion,
    eb: &CorrExpansion,
    s: f64,
    phi1: f64,
    lambda1: f64,
) -> Option<(f64, f64)> {
    // E1: y2 * nq2 * w - rho2 * nq1 * lambda2 = nq1
    // E2: x2 * nq2 * w - rho2 * nq0 * lambda2 = nq0
    let row = |e: &CorrExpansion| -> (f64, f64, f64) {
        let rows = MappedRows::new(e, s, phi1, lambda1);
        if e.y2.abs() >= e.x2.abs() {
            let nq1 = rows.nq(1);
            (e.y2 * rows.nq(2), -e.rho2 * nq1, nq1)
        } else {
            let nq0 = rows.nq(0);
            (e.x2 * rows.nq(2), -e.rho2 * nq0, nq0)
        }
    };
    let (a1, b1, c1) = row(ea);
    let (a2, b2, c2) = row(eb);
    let det = a1 * b2 - a2 * b1;
    let scale = (a1.abs().max(a2.abs())) * (b1.abs().max(b2.abs()));
    if det.abs() <= 1e-12 * scale.max(1e-300) {
        return None;
    }
    let w = (c1 * b2 - c2 * b1) / det;
    let lambda2 = (a1 * c2 - a2 * c1) / det;
    Some((w, lambda2))
}

/// Applies the feasibility filters and composes a model; `None` when any
/// filter rejects the parameters.
pub(crate) fn assemble_candidate(
    p: &Params,
    corrs: &[Correspondence],
    opts: &SolverOptions,
) -> Option<StitchModel> {
    if !(p.phi1 > 0.0 && p.phi2 > 0.0) {
        return None;
    }
    if !(p.phi1.is_finite() && p.phi2.is_finite() && p.s.is_finite()) {
        return None;
    }
    for lambda in [p.lambda1, p.lambda2] {
        if !(opts.lambda_min..=opts.lambda_max).contains(&lambda) {
            return None;
        }
    }
    let g1 = &corrs[0].g1;
    let g2 = &corrs[0].g2;
    if opts.cheirality {
        // Positive projective depth on the raw (un-scale-fixed) map: the
        // mapped point must lie on the same side as the lifted observation.
        let raw = unscaled_homography(p.s, p.phi1, p.phi2, g1, g2);
        for c in corrs {
            let mapped = raw * undistort(&c.p1, p.lambda1);
            let z2 = 1.0 + p.lambda2 * {
                let (x2, y2) = c.p2.normalized();
                x2 * x2 + y2 * y2
            };
            if mapped.z * z2 <= 0.0 {
                return None;
            }
        }
    }
    let n = corrs[0].p1.norm_scale;
    compose_model(
        p.s,
        p.phi1 * n,
        p.phi2 * n,
        p.lambda1,
        p.lambda2,
        g1,
        g2,
        n,
    )
    .ok()
}

/// Sorts candidates by their spare-equation residual and, in strict mode,
/// drops those above the tolerance.
pub(crate) fn apply_residual_filter(
    mut scored: Vec<(f64, StitchModel)>,
    filter: ResidualFilter,
) -> Vec<StitchModel> {
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    if filter == ResidualFilter::Strict {
        scored.retain(|(r, _)| *r <= STRICT_RESIDUAL_TOL);
    }
    scored.into_iter().map(|(_, m)| m).collect()
}

/// Largest deviation of the sample's gravity priors from identity.
pub(crate) fn prior_deviation(corrs: &[Correspondence]) -> f64 {
    let mut dev = 0.0f64;
    for c in corrs {
        for g in [&c.g1, &c.g2] {
            let d = (g.rotation() - crate::geom::Mat3::identity())
                .abs()
                .max();
            dev = dev.max(d);
        }
    }
    dev
}

#[cfg(test)]
pub(crate) mod testutil {
    //! Synthetic noise-free instance generation shared by the solver tests.

    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    use crate::geom::{
        cayley_yaw, distort, gravity_alignment, yaw_angle, Correspondence, DistortedPoint,
        GravityPrior, Mat3, Vec3,
    };

    pub struct Instance {
        pub corrs: Vec<Correspondence>,
        pub s: f64,
        pub theta: f64,
        pub f1: f64,
        pub f2: f64,
        pub lambda1: f64,
        pub lambda2: f64,
    }

    pub struct InstanceSpec {
        pub f1: f64,
        pub f2: f64,
        pub lambda1: f64,
        pub lambda2: f64,
        pub n_points: usize,
        pub aligned: bool,
    }

    fn rot_x(a: f64) -> Mat3 {
        Mat3::new(
            1.0,
            0.0,
            0.0,
            0.0,
            a.cos(),
            -a.sin(),
            0.0,
            a.sin(),
            a.cos(),
        )
    }

    fn rot_z(a: f64) -> Mat3 {
        Mat3::new(
            a.cos(),
            -a.sin(),
            0.0,
            a.sin(),
            a.cos(),
            0.0,
            0.0,
            0.0,
            1.0,
        )
    }

    /// Noise-free random instance; `None` when the draw fails visibility.
    pub fn random_instance(rng: &mut ChaCha8Rng, spec: &InstanceSpec) -> Option<Instance> {
        let n = 1000.0;
        let (tilt1, tilt2) = if spec.aligned {
            (Mat3::identity(), Mat3::identity())
        } else {
            (
                rot_x(rng.gen_range(-0.5..0.5)) * rot_z(rng.gen_range(-0.5..0.5)),
                rot_x(rng.gen_range(-0.5..0.5)) * rot_z(rng.gen_range(-0.5..0.5)),
            )
        };
        let yaw_mag = rng.gen_range(5f64.to_radians()..80f64.to_radians());
        let yaw = yaw_mag * if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
        let h1 = rng.gen_range(-0.4..0.4);
        let m1 = tilt1 * cayley_yaw((h1 / 2.0_f64).tan());
        let m2 = tilt2 * cayley_yaw(((h1 + yaw) / 2.0_f64).tan());
        let down = Vec3::new(0.0, -1.0, 0.0);
        let (g1, g2) = if spec.aligned {
            (GravityPrior::identity(), GravityPrior::identity())
        } else {
            (
                gravity_alignment(tilt1 * down).ok()?,
                gravity_alignment(tilt2 * down).ok()?,
            )
        };
        let theta = yaw_angle(&(g2.rotation() * m2)) - yaw_angle(&(g1.rotation() * m1));
        let mut corrs = Vec::with_capacity(spec.n_points);
        let mut attempts = 0;
        while corrs.len() < spec.n_points {
            attempts += 1;
            if attempts > 200 * spec.n_points {
                return None;
            }
            let x = Vec3::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(4.0..6.0),
            );
            // Place the scene in front of the mean heading so both views
            // plausibly see it.
            let mid = tilt1 * cayley_yaw(((h1 + yaw / 2.0) / 2.0_f64).tan());
            let x = mid.transpose() * x;
            let d1 = m1 * x;
            let d2 = m2 * x;
            if d1.z < 0.5 || d2.z < 0.5 {
                continue;
            }
            let project = |d: Vec3, f: f64, lambda: f64| -> Option<DistortedPoint> {
                let q = Vec3::new(f / n * d.x / d.z, f / n * d.y / d.z, 1.0);
                distort(&q, lambda, n).ok()
            };
            let (Some(p1), Some(p2)) = (
                project(d1, spec.f1, spec.lambda1),
                project(d2, spec.f2, spec.lambda2),
            ) else {
                continue;
            };
            // Keep radial information meaningful for distortion solvers.
            if p1.u.hypot(p1.v) < 30.0 || p2.u.hypot(p2.v) < 30.0 {
                continue;
            }
            corrs.push(Correspondence { p1, p2, g1, g2 });
        }
        Some(Instance {
            corrs,
            s: (theta / 2.0_f64).tan(),
            theta,
            f1: spec.f1,
            f2: spec.f2,
            lambda1: spec.lambda1,
            lambda2: spec.lambda2,
        })
    }

    /// Whether some candidate matches the ground truth within the exact-
    /// recovery tolerances.
    pub fn has_exact_match(
        set: &crate::solvers::SolverCandidateSet,
        inst: &Instance,
    ) -> bool {
        set.candidates.iter().any(|m| {
            (m.f1 - inst.f1).abs() / inst.f1 < 1e-6
                && (m.f2 - inst.f2).abs() / inst.f2 < 1e-6
                && (m.lambda1 - inst.lambda1).abs() < 1e-6
                && (m.lambda2 - inst.lambda2).abs() < 1e-6
                && (m.theta - inst.theta).abs() < 1e-6
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_id_round_trips_through_strings() {
        for id in SolverId::ALL {
            let s = id.to_string();
            assert_eq!(s.parse::<SolverId>().unwrap(), id);
        }
        assert!("h9x".parse::<SolverId>().is_err());
    }

    #[test]
    fn dispatcher_rejects_wrong_sample_size() {
        let id = crate::geom::GravityPrior::identity();
        let p = crate::geom::DistortedPoint::new(10.0, 20.0, 1000.0);
        let c = Correspondence {
            p1: p,
            p2: p,
            g1: id,
            g2: id,
        };
        let err = solve(SolverId::H2f1f2, &[c], &SolverOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            SolveError::SampleSize {
                expected: 2,
                got: 1,
                ..
            }
        ));
    }
}
