//! Three-correspondence solver for yaw, both focal lengths, and independent
//! division-model distortion coefficients.
//!
//! The third equations of the three correspondences are linear in the
//! monomials `[f1 * lambda1, f1, 1]`; stacking them gives a 3x3 polynomial
//! matrix whose determinant is a degree-6 polynomial in `s`. For each real
//! root the nullspace of the evaluated matrix yields `f1` and `lambda1`,
//! cross-checked against a Cramer solve of the best-conditioned row pair.
//! The second image's inverse focal and distortion follow linearly from the
//! remaining equations of the first two correspondences.

use nalgebra::{Matrix2, Vector2};

use crate::constraints::CorrExpansion;
use crate::geom::Correspondence;
use crate::poly::{sturm_roots, UniPoly};
use crate::polymat::PolyMat;

use super::{
    apply_residual_filter, assemble_candidate, polish_on_equations, recover_w_lambda2,
    relative_residual, scale_equation, third_equation_line, Equation, Params, SolveError,
    SolverCandidateSet, SolverId, SolverOptions, DEGENERACY_TOL,
};

/// Minimum normalized radius below which a point carries no usable
/// distortion information.
const MIN_RADIUS: f64 = 1e-6;

struct Elimination {
    mat: PolyMat,
    det: UniPoly,
    expansions: [CorrExpansion; 3],
    lines: [(UniPoly, UniPoly); 3],
}

fn build(corrs: [&Correspondence; 3]) -> Result<Elimination, SolveError> {
    // The first column of the system is scaled by the first-image radii; if
    // every point sits at the distortion center the coefficient is
    // unobservable for structural reasons, not because of this sample.
    let max_radius = corrs
        .iter()
        .map(|c| {
            let (x, y) = c.p1.normalized();
            x.hypot(y)
        })
        .fold(0.0f64, f64::max);
    if max_radius <= MIN_RADIUS {
        return Err(SolveError::AtDistortionCenter { radius: max_radius });
    }
    let expansions = [
        CorrExpansion::new(corrs[0]),
        CorrExpansion::new(corrs[1]),
        CorrExpansion::new(corrs[2]),
    ];
    let lines = [
        third_equation_line(&expansions[0]),
        third_equation_line(&expansions[1]),
        third_equation_line(&expansions[2]),
    ];
    let mut entries = Vec::with_capacity(9);
    let mut scale = 1.0f64;
    for (e, (c1, c0)) in expansions.iter().zip(&lines) {
        let row_norm = c1.inf_norm().max(c0.inf_norm());
        scale *= row_norm.max(1e-300);
        entries.push(c1.scaled(e.rho1));
        entries.push(c1.clone());
        entries.push(c0.clone());
    }
    let mat = PolyMat::new(3, entries);
    let det = mat.det();
    if det.inf_norm() <= DEGENERACY_TOL * scale {
        return Err(SolveError::Degenerate(
            "correspondence triple collapses the distortion system (duplicated or dependent)",
        ));
    }
    Ok(Elimination {
        mat,
        det,
        expansions,
        lines,
    })
}

/// Degree-6 elimination polynomial, exposed for degree checks.
pub fn elimination_h3l1l2(
    c1: &Correspondence,
    c2: &Correspondence,
    c3: &Correspondence,
) -> Result<UniPoly, SolveError> {
    Ok(build([c1, c2, c3])?.det)
}

/// Cross-checks the nullspace estimate by solving the best-conditioned pair
/// of rows for `(f1, f1 * lambda1)` directly.
fn cramer_check(elim: &Elimination, s: f64, f1: f64, lambda1: f64) -> bool {
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let mut best: Option<(f64, Matrix2<f64>, Vector2<f64>)> = None;
    for (i, j) in pairs {
        let (c1i, c0i) = &elim.lines[i];
        let (c1j, c0j) = &elim.lines[j];
        let (ri, rj) = (elim.expansions[i].rho1, elim.expansions[j].rho1);
        let a = Matrix2::new(c1i.eval(s), ri * c1i.eval(s), c1j.eval(s), rj * c1j.eval(s));
        let rhs = Vector2::new(-c0i.eval(s), -c0j.eval(s));
        let det = a.determinant().abs();
        if best.as_ref().is_none_or(|(d, _, _)| det > *d) {
            best = Some((det, a, rhs));
        }
    }
    let (det, a, rhs) = best.unwrap();
    if det <= 1e-14 * a.amax().powi(2).max(1e-300) {
        // No well-conditioned pair; accept the nullspace answer as-is.
        return true;
    }
    let Some(xy) = a.lu().solve(&rhs) else {
        return true;
    };
    let (x, y) = (xy[0], xy[1]);
    if x.abs() <= 1e-12 {
        return false;
    }
    let (f_cross, l_cross) = (x, y / x);
    (f_cross - f1).abs() <= 1e-6 * f1.abs().max(1e-300)
        && (l_cross - lambda1).abs() <= 1e-6 * lambda1.abs().max(1.0)
}

pub fn solve_h3l1l2(
    c1: &Correspondence,
    c2: &Correspondence,
    c3: &Correspondence,
    opts: &SolverOptions,
) -> Result<SolverCandidateSet, SolveError> {
    let elim = build([c1, c2, c3])?;
    let roots = sturm_roots(&elim.det, None, 1e-12)?;
    let raw_count = roots.len();
    let mut scored = Vec::new();
    for s in roots {
        let Ok(v) = elim.mat.null_vector(s) else {
            continue;
        };
        // v is proportional to [f1 * lambda1, f1, 1].
        if v[2].abs() <= 1e-12 || v[1].abs() <= 1e-12 * v[2].abs() {
            continue;
        }
        let phi1 = v[1] / v[2];
        let lambda1 = v[0] / v[1];
        if !cramer_check(&elim, s, phi1, lambda1) {
            continue;
        }
        let Some((w, lambda2)) =
            recover_w_lambda2(&elim.expansions[0], &elim.expansions[1], s, phi1, lambda1)
        else {
            continue;
        };
        let [ea, eb, ec] = &elim.expansions;
        let free = |u: &[f64]| Params {
            s: u[0],
            phi1: u[1],
            phi2: u[2],
            lambda1: u[3],
            lambda2: u[4],
        };
        let u = polish_on_equations(
            &[ea, eb, ec],
            &[
                (0, Equation::E3),
                (1, Equation::E3),
                (2, Equation::E3),
                (0, scale_equation(ea)),
                (1, scale_equation(eb)),
            ],
            free,
            &[s, phi1, 1.0 / w, lambda1, lambda2],
        );
        let params = free(&u);
        // The third correspondence's scale-involving equation never entered
        // the elimination or the (w, lambda2) recovery.
        let residual = relative_residual(ec, scale_equation(ec), &params);
        if let Some(model) = assemble_candidate(&params, &[*c1, *c2, *c3], opts) {
            scored.push((residual, model));
        }
    }
    let mut candidates = apply_residual_filter(scored, opts.residual_filter);
    candidates.truncate(SolverId::H3l1l2.max_candidates());
    Ok(SolverCandidateSet {
        candidates,
        raw_count,
        solver_id: SolverId::H3l1l2,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::solvers::testutil::{has_exact_match, random_instance, InstanceSpec};

    use super::*;

    fn spec(rng: &mut ChaCha8Rng) -> InstanceSpec {
        InstanceSpec {
            f1: rng.gen_range(500.0..2000.0),
            f2: rng.gen_range(500.0..2000.0),
            lambda1: rng.gen_range(-0.7..0.0),
            lambda2: rng.gen_range(-0.7..0.0),
            n_points: 3,
            aligned: false,
        }
    }

    #[test]
    fn recovers_independent_focals_and_distortions() {
        let mut rng = ChaCha8Rng::seed_from_u64(92);
        let mut tested = 0;
        while tested < 300 {
            let spec = spec(&mut rng);
            let Some(inst) = random_instance(&mut rng, &spec) else {
                continue;
            };
            tested += 1;
            let set = solve_h3l1l2(
                &inst.corrs[0],
                &inst.corrs[1],
                &inst.corrs[2],
                &SolverOptions::default(),
            )
            .unwrap();
            assert!(set.raw_count <= 6);
            assert!(set.candidates.len() <= 6);
            assert!(
                has_exact_match(&set, &inst),
                "missed: f1={}, f2={}, l1={}, l2={}, s={}",
                inst.f1,
                inst.f2,
                inst.lambda1,
                inst.lambda2,
                inst.s
            );
        }
    }

    #[test]
    fn recovers_the_documented_example_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(93);
        let spec = InstanceSpec {
            f1: 900.0,
            f2: 1100.0,
            lambda1: -0.3,
            lambda2: -0.5,
            n_points: 3,
            aligned: false,
        };
        let mut checked = 0;
        while checked < 50 {
            let Some(inst) = random_instance(&mut rng, &spec) else {
                continue;
            };
            checked += 1;
            let set = solve_h3l1l2(
                &inst.corrs[0],
                &inst.corrs[1],
                &inst.corrs[2],
                &SolverOptions::default(),
            )
            .unwrap();
            assert!(has_exact_match(&set, &inst));
        }
    }

    #[test]
    fn elimination_has_degree_six() {
        let mut rng = ChaCha8Rng::seed_from_u64(94);
        let mut tested = 0;
        let mut deg6 = 0;
        while tested < 100 {
            let sp = spec(&mut rng);
            let Some(inst) = random_instance(&mut rng, &sp) else {
                continue;
            };
            tested += 1;
            let p =
                elimination_h3l1l2(&inst.corrs[0], &inst.corrs[1], &inst.corrs[2]).unwrap();
            let d = p.degree().unwrap_or(0);
            assert!(d <= 6);
            if d == 6 {
                deg6 += 1;
            }
        }
        assert!(deg6 >= 95, "degree 6 in only {deg6}/100 instances");
    }

    #[test]
    fn duplicated_correspondence_is_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(95);
        let inst = loop {
            let sp = spec(&mut rng);
            if let Some(i) = random_instance(&mut rng, &sp) {
                break i;
            }
        };
        assert!(matches!(
            solve_h3l1l2(
                &inst.corrs[0],
                &inst.corrs[1],
                &inst.corrs[1],
                &SolverOptions::default()
            ),
            Err(SolveError::Degenerate(_))
        ));
    }
}
