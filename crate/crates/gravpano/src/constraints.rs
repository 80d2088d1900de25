//! Expansion of the stitching constraint into monomial coefficient rows.
//!
//! For a correspondence with gravity priors `R1`, `R2`, the unknown map is
//! `G = diag(1,1,w) * R2^T * Ry(s) * R1 * diag(1,1,f)` up to scale, where
//! `f` is the normalized focal of image 1 and `w` the inverse normalized
//! focal of image 2. Clearing the `1/(1+s^2)` factor of the yaw rotation
//! makes every entry of `G` polynomial in `s`, and the cross product of the
//! (lifted) second observation with the mapped first observation yields
//! three equations that are linear in each remaining unknown. This module
//! computes their coefficients; the solvers eliminate variables from them.

use crate::geom::{Correspondence, Mat3};

/// Per-correspondence building blocks of the constraint equations.
///
/// With `N_k = R2^T * B_k * R1`, where `B_0 + B_1 s + B_2 s^2` is the
/// unnormalized yaw rotation, row `r` of the mapped point is
/// `point[r](s) + f * z1 * focal[r](s)` with `z1` the third component of
/// the lifted first observation. `point[r][k]` and `focal[r][k]` store the
/// coefficient of `s^k`.
#[derive(Debug, Clone)]
pub struct CorrExpansion {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    /// Squared normalized radii of the observed (distorted) points.
    pub rho1: f64,
    pub rho2: f64,
    pub point: [[f64; 3]; 3],
    pub focal: [[f64; 3]; 3],
}

impl CorrExpansion {
    pub fn new(c: &Correspondence) -> Self {
        let (x1, y1) = c.p1.normalized();
        let (x2, y2) = c.p2.normalized();
        let r1 = *c.g1.rotation();
        let r2t = c.g2.rotation().transpose();
        // Unnormalized yaw rotation (1 + s^2) * Ry(s) = B0 + B1 s + B2 s^2.
        let b = [
            Mat3::identity(),
            Mat3::new(0.0, 0.0, 2.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0),
            Mat3::from_diagonal(&crate::geom::Vec3::new(-1.0, 1.0, -1.0)),
        ];
        let mut point = [[0.0; 3]; 3];
        let mut focal = [[0.0; 3]; 3];
        for (k, bk) in b.iter().enumerate() {
            let n = r2t * bk * r1;
            for r in 0..3 {
                point[r][k] = n[(r, 0)] * x1 + n[(r, 1)] * y1;
                focal[r][k] = n[(r, 2)];
            }
        }
        Self {
            x1,
            y1,
            x2,
            y2,
            rho1: x1 * x1 + y1 * y1,
            rho2: x2 * x2 + y2 * y2,
            point,
            focal,
        }
    }
}

/// Which unknowns the expansion keeps symbolic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintMode {
    /// Points are distortion-free or pre-undistorted; unknowns `(s, f, w)`.
    ZeroDistortion,
    /// Distorted points; the one equation free of the second image's
    /// unknowns, over `(s, f1, lambda1)`.
    Distortion,
}

/// Monomial coefficient rows of the constraint equations.
///
/// Zero-distortion rows `a1`, `a2` are over
/// `[s^2 f w, s^2 f, s^2 w, s^2, s f w, s f, s w, s, f w, f, w, 1]` and
/// `a3` over `[s^2 f, s^2, s f, s, f, 1]`; the distortion row `b` is over
/// `[s^2 f1 l1, s^2 f1, s^2, s f1 l1, s f1, s, f1 l1, f1, 1]`.
#[derive(Debug, Clone)]
pub enum ConstraintRows {
    ZeroDistortion {
        a1: [f64; 12],
        a2: [f64; 12],
        a3: [f64; 6],
    },
    Distortion { b: [f64; 9] },
}

/// Index into the 12-monomial basis for the coefficient of
/// `s^k * f^has_f * w^has_w`.
fn full_slot(k: usize, has_f: bool, has_w: bool) -> usize {
    4 * (2 - k)
        + match (has_f, has_w) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        }
}

/// Builds one cross-product equation `alpha * m_i + beta * m_j` in the
/// 12-monomial basis, where `m_2` is the row multiplied by `w`.
fn full_row(e: &CorrExpansion, terms: [(f64, usize); 2]) -> [f64; 12] {
    let mut row = [0.0; 12];
    for (gamma, r) in terms {
        let has_w = r == 2;
        for k in 0..3 {
            row[full_slot(k, false, has_w)] += gamma * e.point[r][k];
            row[full_slot(k, true, has_w)] += gamma * e.focal[r][k];
        }
    }
    row
}

/// Expands the constraint equations of one correspondence.
pub fn expand_constraints(c: &Correspondence, mode: ConstraintMode) -> ConstraintRows {
    let e = CorrExpansion::new(c);
    match mode {
        ConstraintMode::ZeroDistortion => {
            let a1 = full_row(&e, [(e.y2, 2), (-1.0, 1)]);
            let a2 = full_row(&e, [(1.0, 0), (-e.x2, 2)]);
            let wide3 = full_row(&e, [(e.x2, 1), (-e.y2, 0)]);
            // The third equation never touches the w-carrying row, so its
            // w and f*w coefficients are structurally zero.
            for k in 0..3 {
                assert_eq!(wide3[full_slot(k, false, true)], 0.0);
                assert_eq!(wide3[full_slot(k, true, true)], 0.0);
            }
            let mut a3 = [0.0; 6];
            for k in 0..3 {
                a3[2 * (2 - k)] = wide3[full_slot(k, true, false)];
                a3[2 * (2 - k) + 1] = wide3[full_slot(k, false, false)];
            }
            ConstraintRows::ZeroDistortion { a1, a2, a3 }
        }
        ConstraintMode::Distortion => {
            let wide3 = full_row(&e, [(e.x2, 1), (-e.y2, 0)]);
            for k in 0..3 {
                assert_eq!(wide3[full_slot(k, false, true)], 0.0);
                assert_eq!(wide3[full_slot(k, true, true)], 0.0);
            }
            // f * z1 = f1 + f1 * lambda1 * rho1 splits the focal part into
            // the f1 and f1*lambda1 monomials.
            let mut b = [0.0; 9];
            for k in 0..3 {
                let focal_part = wide3[full_slot(k, true, false)];
                b[3 * (2 - k)] = e.rho1 * focal_part;
                b[3 * (2 - k) + 1] = focal_part;
                b[3 * (2 - k) + 2] = wide3[full_slot(k, false, false)];
            }
            ConstraintRows::Distortion { b }
        }
    }
}

/// Evaluates a 12-monomial row at `(s, f, w)`; returns the signed sum and
/// the largest absolute term for relative-residual checks.
pub fn eval_full_row(row: &[f64; 12], s: f64, f: f64, w: f64) -> (f64, f64) {
    let monomials = monomials_full(s, f, w);
    accumulate(row, &monomials)
}

/// Evaluates a 6-monomial `(s, f)` row; same return convention.
pub fn eval_yaw_focal_row(row: &[f64; 6], s: f64, f: f64) -> (f64, f64) {
    let m = [s * s * f, s * s, s * f, s, f, 1.0];
    accumulate(row, &m)
}

/// Evaluates a 9-monomial `(s, f1, lambda1)` row; same return convention.
pub fn eval_distortion_row(row: &[f64; 9], s: f64, f1: f64, lambda1: f64) -> (f64, f64) {
    let fl = f1 * lambda1;
    let m = [
        s * s * fl,
        s * s * f1,
        s * s,
        s * fl,
        s * f1,
        s,
        fl,
        f1,
        1.0,
    ];
    accumulate(row, &m)
}

/// Monomial vector of the 12-element basis.
pub fn monomials_full(s: f64, f: f64, w: f64) -> [f64; 12] {
    let (s2, fw) = (s * s, f * w);
    [
        s2 * fw,
        s2 * f,
        s2 * w,
        s2,
        s * fw,
        s * f,
        s * w,
        s,
        fw,
        f,
        w,
        1.0,
    ]
}

fn accumulate<const N: usize>(row: &[f64; N], monomials: &[f64; N]) -> (f64, f64) {
    let mut sum = 0.0;
    let mut scale = 0.0f64;
    for (c, m) in row.iter().zip(monomials) {
        let term = c * m;
        sum += term;
        scale = scale.max(term.abs());
    }
    (sum, scale)
}
