//! Single-correspondence solver for yaw and a shared focal length.
//!
//! The third constraint equation is linear in the focal: `c1(s) f + c0(s) =
//! 0`. Substituting `f = -c0/c1` into the focal-cleared first (or second)
//! equation and multiplying by `c1^2` yields a degree-6 polynomial with a
//! structural `(1 + s^2)` factor; the remaining quartic is solved in closed
//! form.

use crate::constraints::CorrExpansion;
use crate::geom::Correspondence;
use crate::poly::{deflate_one_plus_s2, solve_quartic, UniPoly};

use super::{
    assemble_candidate, focal_poly, lin2, point_poly, polish_on_equations, scale_equation,
    third_equation_line, Equation, Params, SolveError, SolverCandidateSet, SolverId,
    SolverOptions, DEGENERACY_TOL,
};

/// Coefficient polynomials of one focal-cleared equation,
/// `e2 f^2 + e1 f + e0 = 0` after multiplying the equation by `f`.
struct ClearedEq {
    e2: UniPoly,
    e1: UniPoly,
    e0: UniPoly,
}

fn cleared_equations(e: &CorrExpansion) -> [ClearedEq; 2] {
    // First equation times f, using w = 1/f:
    //   y2 (point2 + f focal2) - f (point1 + f focal1).
    let first = ClearedEq {
        e2: focal_poly(e, 1).scaled(-1.0),
        e1: lin2(e.y2, &focal_poly(e, 2), -1.0, &point_poly(e, 1)),
        e0: point_poly(e, 2).scaled(e.y2),
    };
    // Second equation times f:
    //   f (point0 + f focal0) - x2 (point2 + f focal2).
    let second = ClearedEq {
        e2: focal_poly(e, 0),
        e1: lin2(1.0, &point_poly(e, 0), -e.x2, &focal_poly(e, 2)),
        e0: point_poly(e, 2).scaled(-e.x2),
    };
    [first, second]
}

/// Substitutes `f = -c0/c1` into a cleared equation and clears `c1^2`.
fn eliminate(eq: &ClearedEq, c0: &UniPoly, c1: &UniPoly) -> UniPoly {
    let t2 = eq.e2.mul(&c0.mul(c0));
    let t1 = eq.e1.mul(&c0.mul(c1));
    let t0 = eq.e0.mul(&c1.mul(c1));
    t2.sub(&t1).add(&t0)
}

/// Identity-motion degeneracy: every equation is satisfied at `s = 0` for
/// arbitrary focal, so the instance carries no focal information.
fn identity_degenerate(c0: &UniPoly, c1: &UniPoly, eqs: &[ClearedEq; 2]) -> bool {
    let mut scale = c0.inf_norm().max(c1.inf_norm());
    let mut at_zero = c0.eval(0.0).abs().max(c1.eval(0.0).abs());
    for eq in eqs {
        for p in [&eq.e2, &eq.e1, &eq.e0] {
            scale = scale.max(p.inf_norm());
            at_zero = at_zero.max(p.eval(0.0).abs());
        }
    }
    scale > 0.0 && at_zero <= DEGENERACY_TOL * scale
}

/// Deflated quartic elimination polynomial, exposed for degree checks.
pub fn elimination_h1f(c: &Correspondence) -> Result<UniPoly, SolveError> {
    Ok(build(c)?.1)
}

/// Pre-deflation elimination polynomial (degree 6, carrying the spurious
/// `1 + s^2` factor), exposed for structural checks.
pub fn elimination_h1f_raw(c: &Correspondence) -> Result<UniPoly, SolveError> {
    Ok(build(c)?.0)
}

fn build(c: &Correspondence) -> Result<(UniPoly, UniPoly, UniPoly, UniPoly), SolveError> {
    let e = CorrExpansion::new(c);
    let (c1, c0) = third_equation_line(&e);
    let eqs = cleared_equations(&e);
    if identity_degenerate(&c0, &c1, &eqs) {
        return Err(SolveError::Degenerate(
            "identity motion satisfies the constraints for every focal",
        ));
    }
    let input_scale = |eq: &ClearedEq| -> f64 {
        let cn = c0.inf_norm().max(c1.inf_norm());
        let en = eq.e2.inf_norm().max(eq.e1.inf_norm()).max(eq.e0.inf_norm());
        cn * cn * en
    };
    let sextics: Vec<(UniPoly, f64)> = eqs
        .iter()
        .map(|eq| {
            let p = eliminate(eq, &c0, &c1);
            let scale = input_scale(eq);
            (p, scale)
        })
        .collect();
    let usable: Vec<&(UniPoly, f64)> = sextics
        .iter()
        .filter(|(p, scale)| p.inf_norm() > DEGENERACY_TOL * scale.max(1e-300))
        .collect();
    let Some(best) = usable.iter().max_by(|a, b| {
        let cond = |p: &UniPoly| {
            p.coeffs()
                .last()
                .map(|l| l.abs() / p.inf_norm())
                .unwrap_or(0.0)
        };
        cond(&a.0).total_cmp(&cond(&b.0))
    }) else {
        return Err(SolveError::Degenerate(
            "both elimination paths collapse to the zero polynomial",
        ));
    };
    let quartic = deflate_one_plus_s2(&best.0)?;
    Ok((best.0.clone(), quartic, c0, c1))
}

pub fn solve_h1f(
    c: &Correspondence,
    opts: &SolverOptions,
) -> Result<SolverCandidateSet, SolveError> {
    let (_, quartic, c0, c1) = build(c)?;
    let e = CorrExpansion::new(c);
    let roots = solve_quartic(&quartic)?;
    let raw_count = roots.len();
    let mut candidates = Vec::new();
    for s in roots {
        let c1v = c1.eval(s);
        let c0v = c0.eval(s);
        if c1v.abs() <= 1e-14 * c0v.abs().max(1.0) {
            continue;
        }
        let phi = -c0v / c1v;
        let shared = |u: &[f64]| Params {
            s: u[0],
            phi1: u[1],
            phi2: u[1],
            lambda1: 0.0,
            lambda2: 0.0,
        };
        let u = polish_on_equations(
            &[&e],
            &[(0, Equation::E3), (0, scale_equation(&e))],
            shared,
            &[s, phi],
        );
        let params = shared(&u);
        if let Some(model) = assemble_candidate(&params, std::slice::from_ref(c), opts) {
            candidates.push(model);
        }
    }
    Ok(SolverCandidateSet {
        candidates,
        raw_count,
        solver_id: SolverId::H1f,
    })
}
