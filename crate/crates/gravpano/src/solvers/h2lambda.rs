//! Two-correspondence solver for yaw, a shared focal length, and a shared
//! division-model distortion coefficient.
//!
//! In the monomials `X = f`, `Y = f * lambda`, the third equations of both
//! correspondences are linear; Cramer's rule expresses `X` and `Y` as
//! rational functions of `s`. Substituting them into the focal-cleared
//! first (or second) equation of the first correspondence and clearing the
//! denominator yields a degree-10 polynomial with a structural `(1 + s^2)`
//! factor, leaving a degree-8 polynomial solved by Sturm bisection.

use nalgebra::{Matrix2, Vector2};

use crate::constraints::CorrExpansion;
use crate::geom::Correspondence;
use crate::poly::{deflate_one_plus_s2, sturm_roots, UniPoly};

use super::{
    apply_residual_filter, assemble_candidate, focal_poly, lin2, point_poly,
    polish_on_equations, relative_residual, scale_equation, third_equation_line, Equation,
    Params, SolveError, SolverCandidateSet, SolverId, SolverOptions, DEGENERACY_TOL,
};

/// Minimum normalized radius for a point to carry distortion information.
const MIN_RADIUS: f64 = 1e-6;

/// Coefficients of one focal-cleared equation as a quadratic form in
/// `(X, Y) = (f, f * lambda)`:
/// `g0 + gx X + gy Y + gxx X^2 + gxy X Y + gyy Y^2 = 0`.
struct QuadForm {
    g0: UniPoly,
    gx: UniPoly,
    gy: UniPoly,
    gxx: UniPoly,
    gxy: UniPoly,
    gyy: UniPoly,
}

/// Builds the cleared first or second equation of `e` (whichever multiplier
/// is better conditioned) including both images' distortion lifts.
fn quad_form(e: &CorrExpansion) -> QuadForm {
    let (r1, r2) = (e.rho1, e.rho2);
    if e.y2.abs() >= e.x2.abs() {
        // X * E1 = y2 (point2 + (X + r1 Y) focal2)
        //        - (X + r2 Y)(point1 + (X + r1 Y) focal1)
        let f1p = focal_poly(e, 1);
        QuadForm {
            g0: point_poly(e, 2).scaled(e.y2),
            gx: lin2(e.y2, &focal_poly(e, 2), -1.0, &point_poly(e, 1)),
            gy: lin2(r1 * e.y2, &focal_poly(e, 2), -r2, &point_poly(e, 1)),
            gxx: f1p.scaled(-1.0),
            gxy: f1p.scaled(-(r1 + r2)),
            gyy: f1p.scaled(-r1 * r2),
        }
    } else {
        // X * E2 = (X + r2 Y)(point0 + (X + r1 Y) focal0)
        //        - x2 (point2 + (X + r1 Y) focal2)
        let f0p = focal_poly(e, 0);
        QuadForm {
            g0: point_poly(e, 2).scaled(-e.x2),
            gx: lin2(1.0, &point_poly(e, 0), -e.x2, &focal_poly(e, 2)),
            gy: lin2(r2, &point_poly(e, 0), -r1 * e.x2, &focal_poly(e, 2)),
            gxx: f0p.clone(),
            gxy: f0p.scaled(r1 + r2),
            gyy: f0p.scaled(r1 * r2),
        }
    }
}

struct Elimination {
    /// Degree-8 polynomial in `s`.
    poly: UniPoly,
    /// Third-equation lines of both correspondences.
    lines: [(UniPoly, UniPoly); 2],
}

fn check_radii(corrs: &[&Correspondence]) -> Result<(), SolveError> {
    for c in corrs {
        for p in [&c.p1, &c.p2] {
            let (x, y) = p.normalized();
            let radius = x.hypot(y);
            if radius <= MIN_RADIUS {
                return Err(SolveError::AtDistortionCenter { radius });
            }
        }
    }
    Ok(())
}

fn build(c1: &Correspondence, c2: &Correspondence) -> Result<Elimination, SolveError> {
    check_radii(&[c1, c2])?;
    let ea = CorrExpansion::new(c1);
    let eb = CorrExpansion::new(c2);
    if (ea.rho1 - eb.rho1).abs() <= 1e-9 * ea.rho1.max(eb.rho1) {
        return Err(SolveError::Degenerate(
            "equal first-image radii leave the distortion split unobservable",
        ));
    }
    let (c1a, c0a) = third_equation_line(&ea);
    let (c1b, c0b) = third_equation_line(&eb);
    // Cramer solution of the two third equations for (X, Y):
    //   [c1a, rho1a c1a; c1b, rho1b c1b] [X, Y]^T = [-c0a, -c0b]^T.
    let d = c1a.mul(&c1b).scaled(eb.rho1 - ea.rho1);
    let nx = lin2(ea.rho1, &c0b.mul(&c1a), -eb.rho1, &c0a.mul(&c1b));
    let ny = lin2(1.0, &c0a.mul(&c1b), -1.0, &c0b.mul(&c1a));
    let q = quad_form(&ea);
    let p10 = q
        .g0
        .mul(&d.mul(&d))
        .add(&q.gx.mul(&nx.mul(&d)))
        .add(&q.gy.mul(&ny.mul(&d)))
        .add(&q.gxx.mul(&nx.mul(&nx)))
        .add(&q.gxy.mul(&nx.mul(&ny)))
        .add(&q.gyy.mul(&ny.mul(&ny)));
    let gnorm = [&q.g0, &q.gx, &q.gy, &q.gxx, &q.gxy, &q.gyy]
        .iter()
        .fold(0.0f64, |m, p| m.max(p.inf_norm()));
    let dn = d.inf_norm().max(nx.inf_norm()).max(ny.inf_norm());
    if p10.inf_norm() <= DEGENERACY_TOL * (gnorm * dn * dn).max(1e-300) {
        return Err(SolveError::Degenerate(
            "distortion elimination collapses to the zero polynomial",
        ));
    }
    let poly = deflate_one_plus_s2(&p10)?;
    Ok(Elimination {
        poly,
        lines: [(c1a, c0a), (c1b, c0b)],
    })
}

/// Degree-8 elimination polynomial, exposed for degree checks.
pub fn elimination_h2lambda(
    c1: &Correspondence,
    c2: &Correspondence,
) -> Result<UniPoly, SolveError> {
    Ok(build(c1, c2)?.poly)
}

pub fn solve_h2lambda(
    c1: &Correspondence,
    c2: &Correspondence,
    opts: &SolverOptions,
) -> Result<SolverCandidateSet, SolveError> {
    let elim = build(c1, c2)?;
    let ea = CorrExpansion::new(c1);
    let eb = CorrExpansion::new(c2);
    let roots = sturm_roots(&elim.poly, None, 1e-12)?;
    let raw_count = roots.len();
    let mut scored = Vec::new();
    for s in roots {
        // Numeric 2x2 back-substitution for (X, Y) at this root.
        let [(c1a, c0a), (c1b, c0b)] = &elim.lines;
        let a = Matrix2::new(
            c1a.eval(s),
            ea.rho1 * c1a.eval(s),
            c1b.eval(s),
            eb.rho1 * c1b.eval(s),
        );
        let rhs = Vector2::new(-c0a.eval(s), -c0b.eval(s));
        let det = a.determinant();
        let a_scale = a.amax();
        if det.abs() <= 1e-12 * (a_scale * a_scale).max(1e-300) {
            continue;
        }
        let Some(xy) = a.lu().solve(&rhs) else {
            continue;
        };
        let (x, y) = (xy[0], xy[1]);
        if x.abs() <= 1e-12 {
            continue;
        }
        let shared = |u: &[f64]| Params {
            s: u[0],
            phi1: u[1],
            phi2: u[1],
            lambda1: u[2],
            lambda2: u[2],
        };
        let u = polish_on_equations(
            &[&ea, &eb],
            &[
                (0, Equation::E3),
                (1, Equation::E3),
                (0, scale_equation(&ea)),
            ],
            shared,
            &[s, x, y / x],
        );
        let params = shared(&u);
        // Spare equation: the scale-involving equation of the second
        // correspondence never entered the elimination.
        let residual = relative_residual(&eb, scale_equation(&eb), &params);
        if let Some(model) = assemble_candidate(&params, &[*c1, *c2], opts) {
            scored.push((residual, model));
        }
    }
    let mut candidates = apply_residual_filter(scored, opts.residual_filter);
    candidates.truncate(SolverId::H2lambda.max_candidates());
    Ok(SolverCandidateSet {
        candidates,
        raw_count,
        solver_id: SolverId::H2lambda,
    })
}
