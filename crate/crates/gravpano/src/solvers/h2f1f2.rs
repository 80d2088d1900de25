//! Two-correspondence solver for yaw and two distinct focal lengths.
//!
//! Stacking the focal-linear third equations of both correspondences gives
//! `C(s) [f1, 1]^T = 0`; rank deficiency of the 2x2 polynomial matrix is a
//! quartic in `s`. The first focal comes from the null space, the second
//! from one spare equation of the first correspondence, and the remaining
//! equation of the second correspondence ranks the candidates.

use crate::constraints::CorrExpansion;
use crate::geom::Correspondence;
use crate::poly::{solve_quartic, UniPoly};
use crate::polymat::PolyMat;

use super::{
    apply_residual_filter, assemble_candidate, polish_on_equations, recover_w,
    relative_residual, scale_equation, third_equation_line, Equation, Params, SolveError,
    SolverCandidateSet, SolverId, SolverOptions, DEGENERACY_TOL,
};

fn build(c1: &Correspondence, c2: &Correspondence) -> Result<(PolyMat, UniPoly), SolveError> {
    let ea = CorrExpansion::new(c1);
    let eb = CorrExpansion::new(c2);
    let (c1a, c0a) = third_equation_line(&ea);
    let (c1b, c0b) = third_equation_line(&eb);
    let scale = c1a.inf_norm().max(c0a.inf_norm()) * c1b.inf_norm().max(c0b.inf_norm());
    let mat = PolyMat::new(2, vec![c1a, c0a, c1b, c0b]);
    let det = mat.det();
    if det.inf_norm() <= DEGENERACY_TOL * scale.max(1e-300) {
        return Err(SolveError::Degenerate(
            "correspondence pair collapses the focal system (duplicated or dependent)",
        ));
    }
    Ok((mat, det))
}

/// Quartic elimination polynomial, exposed for degree checks.
pub fn elimination_h2f1f2(
    c1: &Correspondence,
    c2: &Correspondence,
) -> Result<UniPoly, SolveError> {
    Ok(build(c1, c2)?.1)
}

pub fn solve_h2f1f2(
    c1: &Correspondence,
    c2: &Correspondence,
    opts: &SolverOptions,
) -> Result<SolverCandidateSet, SolveError> {
    let (mat, det) = build(c1, c2)?;
    let ea = CorrExpansion::new(c1);
    let eb = CorrExpansion::new(c2);
    let roots = solve_quartic(&det)?;
    let raw_count = roots.len();
    let mut scored = Vec::new();
    for s in roots {
        let Ok(v) = mat.null_vector(s) else {
            continue;
        };
        if v[1].abs() <= 1e-12 {
            continue;
        }
        let phi1 = v[0] / v[1];
        let Some(w) = recover_w(&ea, s, phi1, 0.0, 0.0) else {
            continue;
        };
        let free = |u: &[f64]| Params {
            s: u[0],
            phi1: u[1],
            phi2: u[2],
            lambda1: 0.0,
            lambda2: 0.0,
        };
        let u = polish_on_equations(
            &[&ea, &eb],
            &[
                (0, Equation::E3),
                (1, Equation::E3),
                (0, scale_equation(&ea)),
            ],
            free,
            &[s, phi1, 1.0 / w],
        );
        let params = free(&u);
        // The spare equation of the second correspondence, choosing the
        // better-conditioned of the two that involve w.
        let residual = relative_residual(&eb, scale_equation(&eb), &params);
        if let Some(model) = assemble_candidate(&params, &[*c1, *c2], opts) {
            scored.push((residual, model));
        }
    }
    Ok(SolverCandidateSet {
        candidates: apply_residual_filter(scored, opts.residual_filter),
        raw_count,
        solver_id: SolverId::H2f1f2,
    })
}
