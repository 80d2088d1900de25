//! Baseline four-correspondence homography estimation by the normalized
//! direct linear transform, with no gravity prior and no distortion model.
//!
//! Each image's points are translated to their centroid and scaled to mean
//! distance sqrt(2); the stacked linear system over the nine homography
//! entries is solved by the eigenvector of the smallest eigenvalue of
//! `A^T A`. The result is a projective homography only: the model's yaw,
//! focal, and distortion fields are placeholders and only the mapping
//! matrices are meaningful.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::geom::{scale_divisor, Correspondence, Mat3, StitchModel};

use super::{SolveError, SolverCandidateSet, SolverId, SolverOptions};

/// Eigenvalue ratio (squared singular-value ratio) below which the stacked
/// system is rank deficient and the homography undetermined.
const RANK_TOL: f64 = 1e-18;

fn hartley_transform(points: &[(f64, f64)]) -> Result<Mat3, SolveError> {
    let n = points.len() as f64;
    let (mut cx, mut cy) = (0.0, 0.0);
    for (x, y) in points {
        cx += x;
        cy += y;
    }
    cx /= n;
    cy /= n;
    let mean_dist: f64 =
        points.iter().map(|(x, y)| (x - cx).hypot(y - cy)).sum::<f64>() / n;
    if mean_dist <= 1e-12 {
        return Err(SolveError::Degenerate(
            "coincident points cannot be normalized",
        ));
    }
    let sc = std::f64::consts::SQRT_2 / mean_dist;
    Ok(Mat3::new(sc, 0.0, -sc * cx, 0.0, sc, -sc * cy, 0.0, 0.0, 1.0))
}

fn apply(t: &Mat3, p: (f64, f64)) -> (f64, f64) {
    (
        t[(0, 0)] * p.0 + t[(0, 2)],
        t[(1, 1)] * p.1 + t[(1, 2)],
    )
}

pub fn solve_h4dlt(
    corrs: &[Correspondence],
    _opts: &SolverOptions,
) -> Result<SolverCandidateSet, SolveError> {
    let p1: Vec<(f64, f64)> = corrs.iter().map(|c| c.p1.normalized()).collect();
    let p2: Vec<(f64, f64)> = corrs.iter().map(|c| c.p2.normalized()).collect();
    let t1 = hartley_transform(&p1)?;
    let t2 = hartley_transform(&p2)?;
    let mut a = DMatrix::zeros(2 * corrs.len(), 9);
    for (i, (q1, q2)) in p1.iter().zip(&p2).enumerate() {
        let (x, y) = apply(&t1, *q1);
        let (xp, yp) = apply(&t2, *q2);
        let r0 = [0.0, 0.0, 0.0, -x, -y, -1.0, yp * x, yp * y, yp];
        let r1 = [x, y, 1.0, 0.0, 0.0, 0.0, -xp * x, -xp * y, -xp];
        for j in 0..9 {
            a[(2 * i, j)] = r0[j];
            a[(2 * i + 1, j)] = r1[j];
        }
    }
    // The nullspace must come from a square decomposition: a thin SVD of a
    // 2n x 9 matrix with 2n < 9 would not expose the ninth right vector.
    let ata = a.transpose() * &a;
    let eig = SymmetricEigen::new(ata);
    let mut idx: Vec<usize> = (0..9).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let largest = eig.eigenvalues[idx[8]].max(f64::MIN_POSITIVE);
    if eig.eigenvalues[idx[1]].max(0.0) / largest < RANK_TOL {
        return Err(SolveError::Degenerate(
            "point configuration does not determine a homography (rank deficient)",
        ));
    }
    let h = eig.eigenvectors.column(idx[0]);
    let hhat = Mat3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let t2_inv = t2.try_inverse().ok_or(SolveError::Degenerate(
        "normalization transform is singular",
    ))?;
    let h_full = t2_inv * hhat * t1;
    let h_fixed = h_full / scale_divisor(&h_full);
    let norm_scale = corrs[0].p1.norm_scale;
    let model = StitchModel {
        s: 0.0,
        theta: 0.0,
        f1: norm_scale,
        f2: norm_scale,
        lambda1: 0.0,
        lambda2: 0.0,
        g: h_fixed,
        h: h_fixed,
        r1: corrs[0].g1,
        r2: corrs[0].g2,
        norm_scale,
    };
    Ok(SolverCandidateSet {
        candidates: vec![model],
        raw_count: 1,
        solver_id: SolverId::H4dlt,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::geom::{DistortedPoint, GravityPrior};

    use super::*;

    const N: f64 = 1000.0;

    fn corr_through(h: &Mat3, x: f64, y: f64) -> Correspondence {
        let q = h * nalgebra::Vector3::new(x, y, 1.0);
        let id = GravityPrior::identity();
        Correspondence {
            p1: DistortedPoint::new(x * N, y * N, N),
            p2: DistortedPoint::new(q.x / q.z * N, q.y / q.z * N, N),
            g1: id,
            g2: id,
        }
    }

    fn random_h(rng: &mut ChaCha8Rng) -> Mat3 {
        loop {
            let h = Mat3::from_fn(|_, _| rng.gen_range(-1.0..1.0)) + Mat3::identity();
            if h.determinant().abs() > 0.1 {
                return h;
            }
        }
    }

    fn fixed(h: &Mat3) -> Mat3 {
        h / scale_divisor(h)
    }

    #[test]
    fn recovers_a_known_homography() {
        let mut rng = ChaCha8Rng::seed_from_u64(102);
        for _ in 0..100 {
            let h = random_h(&mut rng);
            let corrs: Vec<Correspondence> = (0..4)
                .map(|_| {
                    corr_through(&h, rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4))
                })
                .collect();
            let set = solve_h4dlt(&corrs, &SolverOptions::default()).unwrap();
            assert_eq!(set.raw_count, 1);
            let est = fixed(&set.candidates[0].h);
            let gt = fixed(&h);
            let scale = gt.abs().max();
            assert!(
                (est - gt).abs().max() <= 1e-7 * scale,
                "homography mismatch: {est} vs {gt}"
            );
        }
    }

    #[test]
    fn identity_correspondences_give_the_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        let id_h = Mat3::identity();
        let corrs: Vec<Correspondence> = (0..4)
            .map(|_| corr_through(&id_h, rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)))
            .collect();
        let set = solve_h4dlt(&corrs, &SolverOptions::default()).unwrap();
        assert!((fixed(&set.candidates[0].h) - id_h).abs().max() < 1e-9);
    }

    #[test]
    fn more_points_agree_with_the_minimal_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(104);
        for _ in 0..20 {
            let h = random_h(&mut rng);
            let corrs: Vec<Correspondence> = (0..20)
                .map(|_| {
                    corr_through(&h, rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4))
                })
                .collect();
            let full = solve_h4dlt(&corrs, &SolverOptions::default()).unwrap();
            let minimal = solve_h4dlt(&corrs[..4], &SolverOptions::default()).unwrap();
            let a = fixed(&full.candidates[0].h);
            let b = fixed(&minimal.candidates[0].h);
            assert!((a - b).abs().max() <= 1e-7 * a.abs().max());
        }
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let id_h = Mat3::identity();
        let corrs: Vec<Correspondence> = (0..4)
            .map(|i| corr_through(&id_h, 0.1 * i as f64, 0.2 * i as f64))
            .collect();
        assert!(matches!(
            solve_h4dlt(&corrs, &SolverOptions::default()),
            Err(SolveError::Degenerate(_))
        ));
    }
}
