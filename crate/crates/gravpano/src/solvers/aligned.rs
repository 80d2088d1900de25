//! Closed-form reductions for the aligned case where both gravity priors
//! are the identity (cameras already level).
//!
//! With identity priors the coefficient matrices of the yaw parametrization
//! reduce to the basis matrices themselves, so the per-row polynomials have
//! exact parity: `point0 = x1 (1 - s^2)`, `focal0 = 2 s`, `point1 =
//! y1 (1 + s^2)`, `focal1 = 0`, `point2 = -2 x1 s`, `focal2 = 1 - s^2`. The
//! eliminations of the four minimal problems then factor into `s^k`,
//! `(1 + s^2)`, and a quadratic that is solved in closed form. The gauge
//! symmetry `(s, f) -> (-s, -f)` pairs the quadratic's roots, and the
//! positive-focal constraint keeps one candidate per pair.

use crate::constraints::CorrExpansion;
use crate::geom::{Correspondence, GravityPrior};
use crate::poly::{deflate_one_plus_s2, solve_quadratic, UniPoly};
use crate::polymat::PolyMat;

use super::{
    apply_residual_filter, assemble_candidate, focal_poly, point_poly, polish_on_equations,
    prior_deviation, recover_w, recover_w_lambda2, relative_residual, scale_equation,
    third_equation_line, Equation, Params, SolveError, SolverCandidateSet, SolverId,
    SolverOptions, ALIGNED_PRIOR_TOL, DEGENERACY_TOL,
};

/// Minimum normalized radius below which no point carries distortion
/// information.
const MIN_RADIUS: f64 = 1e-6;

/// Replaces the priors with the exact identity so the structural zeros of
/// the aligned parametrization hold bit-exactly.
fn aligned_copy(c: &Correspondence) -> Correspondence {
    Correspondence {
        p1: c.p1,
        p2: c.p2,
        g1: GravityPrior::identity(),
        g2: GravityPrior::identity(),
    }
}

fn check_aligned(corrs: &[Correspondence]) -> Result<(), SolveError> {
    let deviation = prior_deviation(corrs);
    if deviation > ALIGNED_PRIOR_TOL {
        return Err(SolveError::NotAligned { deviation });
    }
    Ok(())
}

fn check_sample_size(id: SolverId, corrs: &[Correspondence]) -> Result<(), SolveError> {
    if corrs.len() != id.sample_size() {
        return Err(SolveError::SampleSize {
            solver: id,
            expected: id.sample_size(),
            got: corrs.len(),
        });
    }
    Ok(())
}

/// Drops a structural factor of `s^k`. The low coefficients are exact
/// floating-point zeros by the parity of the aligned construction.
fn drop_s_factor(p: &UniPoly, k: usize) -> UniPoly {
    let coeffs = p.coeffs();
    debug_assert!(coeffs.iter().take(k.min(coeffs.len())).all(|c| *c == 0.0));
    if coeffs.len() <= k {
        return UniPoly::zero();
    }
    UniPoly::new(coeffs[k..].to_vec())
}

struct H1fElim {
    quad: UniPoly,
    c1: UniPoly,
    c0: UniPoly,
}

/// Aligned single-correspondence focal problem. The cleared first equation
/// is linear in `f` (its quadratic term carries `focal1`, which vanishes),
/// so the resultant with the third equation is `(1 + s^2)` times a
/// quadratic.
fn build_h1f(c: &Correspondence) -> Result<H1fElim, SolveError> {
    let e = CorrExpansion::new(c);
    let (c1, c0) = third_equation_line(&e);
    let e1 = super::lin2(e.y2, &focal_poly(&e, 2), -1.0, &point_poly(&e, 1));
    let e0 = point_poly(&e, 2).scaled(e.y2);
    let r = e1.mul(&c0).sub(&e0.mul(&c1));
    let scale = e1.inf_norm().max(e0.inf_norm()) * c1.inf_norm().max(c0.inf_norm());
    if r.inf_norm() <= DEGENERACY_TOL * scale.max(1e-300) {
        return Err(SolveError::Degenerate(
            "points on the horizon line leave yaw and focal coupled",
        ));
    }
    let quad = deflate_one_plus_s2(&r)?;
    Ok(H1fElim { quad, c1, c0 })
}

fn solve_h1f(c: &Correspondence, opts: &SolverOptions) -> Result<SolverCandidateSet, SolveError> {
    let elim = build_h1f(c)?;
    let e = CorrExpansion::new(c);
    let roots = solve_quadratic(&elim.quad)?;
    let raw_count = roots.len();
    let mut candidates = Vec::new();
    for s in roots {
        let c1v = elim.c1.eval(s);
        let c0v = elim.c0.eval(s);
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
        if let Some(model) = assemble_candidate(&params, &[*c], opts) {
            candidates.push(model);
        }
    }
    Ok(SolverCandidateSet {
        candidates,
        raw_count,
        solver_id: SolverId::H1fAligned,
    })
}

struct H2f1f2Elim {
    quad: UniPoly,
    lines: [(UniPoly, UniPoly); 2],
}

/// Aligned two-focal problem. The 2x2 determinant of the third-equation
/// lines is odd of degree three, so one structural `s` factor leaves an
/// even quadratic.
fn build_h2f1f2(ca: &Correspondence, cb: &Correspondence) -> Result<H2f1f2Elim, SolveError> {
    let ea = CorrExpansion::new(ca);
    let eb = CorrExpansion::new(cb);
    let (c1a, c0a) = third_equation_line(&ea);
    let (c1b, c0b) = third_equation_line(&eb);
    let det = c1a.mul(&c0b).sub(&c0a.mul(&c1b));
    let scale = c1a.inf_norm().max(c0a.inf_norm()) * c1b.inf_norm().max(c0b.inf_norm());
    if det.inf_norm() <= DEGENERACY_TOL * scale.max(1e-300) {
        return Err(SolveError::Degenerate(
            "correspondence pair collapses the focal system (duplicated or dependent)",
        ));
    }
    Ok(H2f1f2Elim {
        quad: drop_s_factor(&det, 1),
        lines: [(c1a, c0a), (c1b, c0b)],
    })
}

fn solve_h2f1f2(
    ca: &Correspondence,
    cb: &Correspondence,
    opts: &SolverOptions,
) -> Result<SolverCandidateSet, SolveError> {
    let elim = build_h2f1f2(ca, cb)?;
    let ea = CorrExpansion::new(ca);
    let eb = CorrExpansion::new(cb);
    let roots = solve_quadratic(&elim.quad)?;
    let raw_count = roots.len();
    let mut scored = Vec::new();
    for s in roots {
        // Read f1 off the better-conditioned of the two (dependent) lines.
        let vals: Vec<(f64, f64)> = elim
            .lines
            .iter()
            .map(|(c1, c0)| (c1.eval(s), c0.eval(s)))
            .collect();
        let (c1v, c0v) = if vals[0].0.abs() >= vals[1].0.abs() {
            vals[0]
        } else {
            vals[1]
        };
        if c1v.abs() <= 1e-14 * c0v.abs().max(1.0) {
            continue;
        }
        let phi1 = -c0v / c1v;
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
        let residual = relative_residual(&eb, scale_equation(&eb), &params);
        if let Some(model) = assemble_candidate(&params, &[*ca, *cb], opts) {
            scored.push((residual, model));
        }
    }
    Ok(SolverCandidateSet {
        candidates: apply_residual_filter(scored, opts.residual_filter),
        raw_count,
        solver_id: SolverId::H2f1f2Aligned,
    })
}

struct SharedLambdaElim {
    mat: PolyMat,
    quad: UniPoly,
}

/// Aligned shared-focal shared-distortion problem. The two third equations
/// plus the cleared first equation of the first correspondence are linear in
/// `(f, f * lambda)` (the quadratic terms carry `focal1`, which vanishes).
/// Their 3x3 determinant is odd of degree five with a structural `(1 + s^2)`
/// factor.
fn build_h2lambda(ca: &Correspondence, cb: &Correspondence) -> Result<SharedLambdaElim, SolveError> {
    let max_radius = [ca.p1, ca.p2, cb.p1, cb.p2]
        .iter()
        .map(|p| {
            let (x, y) = p.normalized();
            x.hypot(y)
        })
        .fold(0.0f64, f64::max);
    if max_radius <= MIN_RADIUS {
        return Err(SolveError::AtDistortionCenter { radius: max_radius });
    }
    let ea = CorrExpansion::new(ca);
    let eb = CorrExpansion::new(cb);
    let (c1a, c0a) = third_equation_line(&ea);
    let (c1b, c0b) = third_equation_line(&eb);
    let gx = super::lin2(ea.y2, &focal_poly(&ea, 2), -1.0, &point_poly(&ea, 1));
    let gy = super::lin2(
        ea.rho1 * ea.y2,
        &focal_poly(&ea, 2),
        -ea.rho2,
        &point_poly(&ea, 1),
    );
    let g0 = point_poly(&ea, 2).scaled(ea.y2);
    let g_norm = gx.inf_norm().max(gy.inf_norm()).max(g0.inf_norm());
    if g_norm <= DEGENERACY_TOL {
        return Err(SolveError::Degenerate(
            "first correspondence on the horizon line loses its distortion equation",
        ));
    }
    let mat = PolyMat::new(
        3,
        vec![
            c1a.clone(),
            c1a.scaled(ea.rho1),
            c0a.clone(),
            c1b.clone(),
            c1b.scaled(eb.rho1),
            c0b.clone(),
            gx,
            gy,
            g0,
        ],
    );
    let det = mat.det();
    let scale = c1a.inf_norm().max(c0a.inf_norm())
        * c1b.inf_norm().max(c0b.inf_norm())
        * g_norm;
    if det.inf_norm() <= DEGENERACY_TOL * scale.max(1e-300) {
        return Err(SolveError::Degenerate(
            "correspondence pair collapses the shared-distortion system (duplicated or dependent)",
        ));
    }
    let quad = deflate_one_plus_s2(&drop_s_factor(&det, 1))?;
    Ok(SharedLambdaElim { mat, quad })
}

fn solve_h2lambda(
    ca: &Correspondence,
    cb: &Correspondence,
    opts: &SolverOptions,
) -> Result<SolverCandidateSet, SolveError> {
    let elim = build_h2lambda(ca, cb)?;
    let ea = CorrExpansion::new(ca);
    let eb = CorrExpansion::new(cb);
    let roots = solve_quadratic(&elim.quad)?;
    let raw_count = roots.len();
    let mut scored = Vec::new();
    for s in roots {
        let Ok(v) = elim.mat.null_vector(s) else {
            continue;
        };
        // v is proportional to [f, f * lambda, 1].
        if v[2].abs() <= 1e-12 || v[0].abs() <= 1e-12 * v[2].abs() {
            continue;
        }
        let phi = v[0] / v[2];
        let lambda = v[1] / v[0];
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
            &[s, phi, lambda],
        );
        let params = shared(&u);
        let residual = relative_residual(&eb, scale_equation(&eb), &params);
        if let Some(model) = assemble_candidate(&params, &[*ca, *cb], opts) {
            scored.push((residual, model));
        }
    }
    Ok(SolverCandidateSet {
        candidates: apply_residual_filter(scored, opts.residual_filter),
        raw_count,
        solver_id: SolverId::H2lambdaAligned,
    })
}

struct H3Elim {
    mat: PolyMat,
    quad: UniPoly,
    expansions: [CorrExpansion; 3],
}

/// Aligned three-correspondence problem with independent focals and
/// distortions. The stacked third equations over `[f1 lambda1, f1, 1]` give
/// an even quartic determinant with a structural `s^2` factor (both
/// `f1`-columns vanish at `s = 0`).
fn build_h3(corrs: [&Correspondence; 3]) -> Result<H3Elim, SolveError> {
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
    let mut entries = Vec::with_capacity(9);
    let mut scale = 1.0f64;
    for e in &expansions {
        let (c1, c0) = third_equation_line(e);
        scale *= c1.inf_norm().max(c0.inf_norm()).max(1e-300);
        entries.push(c1.scaled(e.rho1));
        entries.push(c1.clone());
        entries.push(c0);
    }
    let mat = PolyMat::new(3, entries);
    let det = mat.det();
    if det.inf_norm() <= DEGENERACY_TOL * scale {
        return Err(SolveError::Degenerate(
            "correspondence triple collapses the distortion system (duplicated or dependent)",
        ));
    }
    Ok(H3Elim {
        quad: drop_s_factor(&det, 2),
        mat,
        expansions,
    })
}

fn solve_h3(
    corrs: [&Correspondence; 3],
    opts: &SolverOptions,
) -> Result<SolverCandidateSet, SolveError> {
    let elim = build_h3(corrs)?;
    let roots = solve_quadratic(&elim.quad)?;
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
        let residual = relative_residual(ec, scale_equation(ec), &params);
        if let Some(model) = assemble_candidate(&params, &[*corrs[0], *corrs[1], *corrs[2]], opts)
        {
            scored.push((residual, model));
        }
    }
    Ok(SolverCandidateSet {
        candidates: apply_residual_filter(scored, opts.residual_filter),
        raw_count,
        solver_id: SolverId::H3l1l2Aligned,
    })
}

/// Reduced quadratic elimination polynomial of an aligned solver, exposed
/// for degree and root-structure checks. For an identity motion the
/// quadratic legitimately has a root at `s = 0`.
pub fn elimination_aligned(id: SolverId, corrs: &[Correspondence]) -> Result<UniPoly, SolveError> {
    assert!(id.is_aligned(), "elimination_aligned called with {id}");
    check_sample_size(id, corrs)?;
    check_aligned(corrs)?;
    let a: Vec<Correspondence> = corrs.iter().map(aligned_copy).collect();
    match id {
        SolverId::H1fAligned => Ok(build_h1f(&a[0])?.quad),
        SolverId::H2f1f2Aligned => Ok(build_h2f1f2(&a[0], &a[1])?.quad),
        SolverId::H2lambdaAligned => Ok(build_h2lambda(&a[0], &a[1])?.quad),
        SolverId::H3l1l2Aligned => Ok(build_h3([&a[0], &a[1], &a[2]])?.quad),
        _ => unreachable!(),
    }
}

pub fn solve_aligned(
    id: SolverId,
    corrs: &[Correspondence],
    opts: &SolverOptions,
) -> Result<SolverCandidateSet, SolveError> {
    assert!(id.is_aligned(), "solve_aligned called with {id}");
    check_sample_size(id, corrs)?;
    check_aligned(corrs)?;
    let a: Vec<Correspondence> = corrs.iter().map(aligned_copy).collect();
    match id {
        SolverId::H1fAligned => solve_h1f(&a[0], opts),
        SolverId::H2f1f2Aligned => solve_h2f1f2(&a[0], &a[1], opts),
        SolverId::H2lambdaAligned => solve_h2lambda(&a[0], &a[1], opts),
        SolverId::H3l1l2Aligned => solve_h3([&a[0], &a[1], &a[2]], opts),
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::geom::DistortedPoint;
    use crate::solvers::testutil::{has_exact_match, random_instance, InstanceSpec};

    use super::*;

    fn roundtrip(id: SolverId, seed: u64, spec_fn: impl Fn(&mut ChaCha8Rng) -> InstanceSpec) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tested = 0;
        while tested < 300 {
            let spec = spec_fn(&mut rng);
            let Some(inst) = random_instance(&mut rng, &spec) else {
                continue;
            };
            tested += 1;
            let set = solve_aligned(id, &inst.corrs, &SolverOptions::default()).unwrap();
            assert!(set.raw_count <= id.max_raw_count());
            assert!(set.candidates.len() <= id.max_candidates());
            assert!(
                has_exact_match(&set, &inst),
                "{id} missed: f1={}, f2={}, l1={}, l2={}, s={}",
                inst.f1,
                inst.f2,
                inst.lambda1,
                inst.lambda2,
                inst.s
            );
        }
    }

    #[test]
    fn h1f_aligned_recovers_shared_focal() {
        roundtrip(SolverId::H1fAligned, 96, |rng| {
            let f = rng.gen_range(500.0..2000.0);
            InstanceSpec {
                f1: f,
                f2: f,
                lambda1: 0.0,
                lambda2: 0.0,
                n_points: 1,
                aligned: true,
            }
        });
    }

    #[test]
    fn h2f1f2_aligned_recovers_both_focals() {
        roundtrip(SolverId::H2f1f2Aligned, 97, |rng| InstanceSpec {
            f1: rng.gen_range(500.0..2000.0),
            f2: rng.gen_range(500.0..2000.0),
            lambda1: 0.0,
            lambda2: 0.0,
            n_points: 2,
            aligned: true,
        });
    }

    #[test]
    fn h2lambda_aligned_recovers_shared_distortion() {
        roundtrip(SolverId::H2lambdaAligned, 98, |rng| {
            let f = rng.gen_range(500.0..2000.0);
            let lambda = rng.gen_range(-0.7..0.0);
            InstanceSpec {
                f1: f,
                f2: f,
                lambda1: lambda,
                lambda2: lambda,
                n_points: 2,
                aligned: true,
            }
        });
    }

    #[test]
    fn h3l1l2_aligned_recovers_independent_distortions() {
        roundtrip(SolverId::H3l1l2Aligned, 99, |rng| InstanceSpec {
            f1: rng.gen_range(500.0..2000.0),
            f2: rng.gen_range(500.0..2000.0),
            lambda1: rng.gen_range(-0.7..0.0),
            lambda2: rng.gen_range(-0.7..0.0),
            n_points: 3,
            aligned: true,
        });
    }

    #[test]
    fn eliminations_are_quadratics() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        for _ in 0..50 {
            let f = rng.gen_range(500.0..2000.0);
            let spec = InstanceSpec {
                f1: f,
                f2: f,
                lambda1: -0.3,
                lambda2: -0.3,
                n_points: 3,
                aligned: true,
            };
            let Some(inst) = random_instance(&mut rng, &spec) else {
                continue;
            };
            for id in [
                SolverId::H1fAligned,
                SolverId::H2f1f2Aligned,
                SolverId::H2lambdaAligned,
                SolverId::H3l1l2Aligned,
            ] {
                // Shared-parameter instances are valid inputs for every
                // aligned solver, if sliced to the right sample size.
                let corrs = &inst.corrs[..id.sample_size()];
                match elimination_aligned(id, corrs) {
                    Ok(p) => assert!(p.degree().unwrap_or(0) <= 2, "{id} degree > 2"),
                    Err(e) => panic!("{id} failed: {e}"),
                }
            }
        }
    }

    #[test]
    fn identity_motion_reduces_to_a_root_at_zero() {
        let id = GravityPrior::identity();
        let p = DistortedPoint::new(250.0, 170.0, 1000.0);
        let c = Correspondence {
            p1: p,
            p2: p,
            g1: id,
            g2: id,
        };
        let quad = elimination_aligned(SolverId::H1fAligned, &[c]).unwrap();
        assert_eq!(quad.degree(), Some(2));
        assert_eq!(quad.eval(0.0), 0.0);
    }

    #[test]
    fn misaligned_priors_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let spec = InstanceSpec {
            f1: 1000.0,
            f2: 1000.0,
            lambda1: 0.0,
            lambda2: 0.0,
            n_points: 1,
            aligned: false,
        };
        let inst = loop {
            if let Some(i) = random_instance(&mut rng, &spec) {
                break i;
            }
        };
        match solve_aligned(SolverId::H1fAligned, &inst.corrs, &SolverOptions::default()) {
            Err(SolveError::NotAligned { deviation }) => assert!(deviation > ALIGNED_PRIOR_TOL),
            other => panic!("expected NotAligned, got {other:?}"),
        }
    }

    #[test]
    fn horizon_points_are_degenerate() {
        let id = GravityPrior::identity();
        let c = Correspondence {
            p1: DistortedPoint::new(300.0, 0.0, 1000.0),
            p2: DistortedPoint::new(200.0, 0.0, 1000.0),
            g1: id,
            g2: id,
        };
        assert!(matches!(
            solve_aligned(SolverId::H1fAligned, &[c], &SolverOptions::default()),
            Err(SolveError::Degenerate(_))
        ));
    }
}
