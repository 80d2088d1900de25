//! Camera, rotation, and distortion primitives shared by all solvers.
//!
//! Conventions: pixel coordinates are principal-point-centered and are
//! divided by a normalization scale before any distortion or homography
//! math; focal lengths are stored in pixels, division-model coefficients in
//! normalized units. Estimated homographies act on normalized undistorted
//! points.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// 3x3 real matrix.
pub type Mat3 = Matrix3<f64>;
/// 3-component real vector.
pub type Vec3 = Vector3<f64>;

/// Tolerance for accepting a matrix as a rotation.
pub const ROTATION_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("gravity vector has zero norm")]
    ZeroGravity,
    #[error("gravity is anti-parallel to the camera down-axis (180 degree singularity)")]
    AntiparallelGravity,
    #[error("matrix is not a rotation (deviation {deviation:.3e})")]
    NotARotation { deviation: f64 },
    #[error("focal length must be positive (got {focal})")]
    NonPositiveFocal { focal: f64 },
    #[error("normalization scale must be positive (got {scale})")]
    NonPositiveScale { scale: f64 },
    #[error(
        "undistorted radius {radius:.6} is outside the distortable range for lambda = {lambda}"
    )]
    DistortOutOfRange { radius: f64, lambda: f64 },
    #[error("homogeneous point has zero third component")]
    PointAtInfinity,
}

/// Distorted pixel observation, principal-point-centered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortedPoint {
    /// Horizontal pixel coordinate.
    pub u: f64,
    /// Vertical pixel coordinate.
    pub v: f64,
    /// Divisor applied to pixels before distortion math (typically half the
    /// image diagonal).
    pub norm_scale: f64,
}

impl DistortedPoint {
    pub fn new(u: f64, v: f64, norm_scale: f64) -> Self {
        Self { u, v, norm_scale }
    }

    /// Coordinates divided by the normalization scale.
    pub fn normalized(&self) -> (f64, f64) {
        (self.u / self.norm_scale, self.v / self.norm_scale)
    }
}

/// Known roll+pitch alignment rotation for one camera.
#[derive(Debug, Clone, Copy)]
pub struct GravityPrior {
    rotation: Mat3,
}

impl GravityPrior {
    /// Wraps an existing rotation, validating orthonormality.
    pub fn new(rotation: Mat3) -> Result<Self, GeomError> {
        let deviation = rotation_deviation(&rotation);
        if deviation > ROTATION_TOL {
            return Err(GeomError::NotARotation { deviation });
        }
        Ok(Self { rotation })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
        }
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }
}

/// A matched pair of distorted observations with per-image gravity priors.
#[derive(Debug, Clone, Copy)]
pub struct Correspondence {
    pub p1: DistortedPoint,
    pub p2: DistortedPoint,
    pub g1: GravityPrior,
    pub g2: GravityPrior,
}

/// Full estimated stitching model.
///
/// `h` maps normalized undistorted points of image 1 to image 2; `g` is the
/// same map scaled by `f1/f2`. Both are scale-fixed so `h[(2,2)] = 1`
/// whenever that entry is well away from zero.
#[derive(Debug, Clone, Copy)]
pub struct StitchModel {
    /// Cayley yaw parameter, `tan(theta / 2)`.
    pub s: f64,
    /// Relative yaw in radians.
    pub theta: f64,
    /// Focal lengths in pixels.
    pub f1: f64,
    pub f2: f64,
    /// Division-model coefficients in normalized units.
    pub lambda1: f64,
    pub lambda2: f64,
    pub g: Mat3,
    pub h: Mat3,
    /// Gravity priors the model was composed with.
    pub r1: GravityPrior,
    pub r2: GravityPrior,
    /// Pixel normalization divisor shared by both images.
    pub norm_scale: f64,
}

/// Residual convention for [`transfer_error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMode {
    /// Map image-1 point forward and measure the pixel distance in image 2.
    Forward,
    /// Mean of the forward and backward pixel distances.
    Symmetric,
}

/// Max deviation of `m` from orthonormality (including reflection check).
fn rotation_deviation(m: &Mat3) -> f64 {
    let gram = m.transpose() * m - Mat3::identity();
    let mut dev = gram.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if m.determinant() < 0.0 {
        dev = dev.max(2.0);
    }
    dev
}

/// Whether `m` is a rotation matrix to within `tol`.
pub fn is_rotation(m: &Mat3, tol: f64) -> bool {
    rotation_deviation(m) <= tol
}

/// Rotation angle of `r` in radians, in `[0, pi]`.
pub fn rotation_angle(r: &Mat3) -> f64 {
    // atan2 of the antisymmetric-part norm (2 sin) against trace - 1
    // (2 cos); accurate near zero where the acos-of-trace form loses half
    // the significant digits.
    let two_sin = ((r[(2, 1)] - r[(1, 2)]).powi(2)
        + (r[(0, 2)] - r[(2, 0)]).powi(2)
        + (r[(1, 0)] - r[(0, 1)]).powi(2))
    .sqrt();
    two_sin.atan2(r.trace() - 1.0)
}

/// Angular distance between two rotations in radians.
pub fn rotation_distance(a: &Mat3, b: &Mat3) -> f64 {
    rotation_angle(&(a * b.transpose()))
}

/// Yaw angle of a rotation about the y-axis.
pub fn yaw_angle(r: &Mat3) -> f64 {
    r[(0, 2)].atan2(r[(0, 0)])
}

/// Cross-product matrix of `v`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rotation about the y-axis parameterized by `s = tan(theta / 2)`.
///
/// The parameterization cannot represent a 180-degree rotation; that is a
/// documented domain restriction, not an error.
pub fn cayley_yaw(s: f64) -> Mat3 {
    let d = 1.0 + s * s;
    Mat3::new(
        (1.0 - s * s) / d,
        0.0,
        2.0 * s / d,
        0.0,
        1.0,
        0.0,
        -2.0 * s / d,
        0.0,
        (1.0 - s * s) / d,
    )
}

/// Relative camera rotation the model encodes, mapping directions from the
/// first camera frame to the second: `R2^T * Ry(theta) * R1`.
pub fn relative_rotation(model: &StitchModel) -> Mat3 {
    model.r2.rotation().transpose() * cayley_yaw(model.s) * model.r1.rotation()
}

/// Minimal-angle rotation taking the measured gravity direction to the
/// camera down-axis `(0, -1, 0)`; contains no yaw component by construction.
pub fn gravity_alignment(gravity: Vec3) -> Result<GravityPrior, GeomError> {
    let norm = gravity.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(GeomError::ZeroGravity);
    }
    let g = gravity / norm;
    let target = Vec3::new(0.0, -1.0, 0.0);
    let c = g.dot(&target);
    if c <= -1.0 + 1e-12 {
        return Err(GeomError::AntiparallelGravity);
    }
    let axis = g.cross(&target);
    let a = skew(&axis);
    let rotation = Mat3::identity() + a + a * a / (1.0 + c);
    GravityPrior::new(rotation)
}

/// Lifts a distorted pixel observation to a homogeneous undistorted point in
/// normalized coordinates: `[x, y, 1 + lambda (x^2 + y^2)]`.
///
/// Total function; the third component may be non-positive for extreme
/// distortion, which callers treat as an unusable observation.
pub fn undistort(p: &DistortedPoint, lambda: f64) -> Vec3 {
    let (x, y) = p.normalized();
    Vec3::new(x, y, 1.0 + lambda * (x * x + y * y))
}

/// Projects a homogeneous undistorted point back to a distorted pixel
/// observation, inverting [`undistort`] on its valid domain.
///
/// Solves `lambda * r_u * r_d^2 - r_d + r_u = 0` for the distorted radius,
/// taking the root continuous with `lambda -> 0`.
pub fn distort(q: &Vec3, lambda: f64, norm_scale: f64) -> Result<DistortedPoint, GeomError> {
    if norm_scale <= 0.0 {
        return Err(GeomError::NonPositiveScale { scale: norm_scale });
    }
    if q.z == 0.0 {
        return Err(GeomError::PointAtInfinity);
    }
    let x = q.x / q.z;
    let y = q.y / q.z;
    let ru_sq = x * x + y * y;
    let disc = 1.0 - 4.0 * lambda * ru_sq;
    if disc < 0.0 {
        return Err(GeomError::DistortOutOfRange {
            radius: ru_sq.sqrt(),
            lambda,
        });
    }
    // r_d = 2 r_u / (1 + sqrt(disc)) rationalizes the smaller-magnitude root
    // and stays finite at lambda = 0 and r_u = 0; dividing by r_u gives the
    // scale applied to both coordinates.
    let scale = 2.0 / (1.0 + disc.sqrt());
    Ok(DistortedPoint::new(
        x * scale * norm_scale,
        y * scale * norm_scale,
        norm_scale,
    ))
}

/// Homography in normalized units with no scale fixing applied; `phi1` and
/// `phi2` are focal lengths divided by the normalization scale.
pub fn unscaled_homography(
    s: f64,
    phi1: f64,
    phi2: f64,
    g1: &GravityPrior,
    g2: &GravityPrior,
) -> Mat3 {
    let k2 = Mat3::from_diagonal(&Vec3::new(phi2, phi2, 1.0));
    let k1_inv = Mat3::from_diagonal(&Vec3::new(1.0 / phi1, 1.0 / phi1, 1.0));
    k2 * g2.rotation().transpose() * cayley_yaw(s) * g1.rotation() * k1_inv
}

/// Divisor used to scale-fix a homography: its `(2,2)` entry when that is
/// not negligible, otherwise its largest-magnitude entry.
pub(crate) fn scale_divisor(h: &Mat3) -> f64 {
    let max_abs = h.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if h[(2, 2)].abs() > 1e-12 * max_abs {
        h[(2, 2)]
    } else {
        h.iter()
            .copied()
            .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best })
    }
}

/// Builds the full stitching model from its scalar parameters.
#[allow(clippy::too_many_arguments)]
pub fn compose_model(
    s: f64,
    f1: f64,
    f2: f64,
    lambda1: f64,
    lambda2: f64,
    g1: &GravityPrior,
    g2: &GravityPrior,
    norm_scale: f64,
) -> Result<StitchModel, GeomError> {
    if f1 <= 0.0 || f1.is_nan() {
        return Err(GeomError::NonPositiveFocal { focal: f1 });
    }
    if f2 <= 0.0 || f2.is_nan() {
        return Err(GeomError::NonPositiveFocal { focal: f2 });
    }
    if norm_scale <= 0.0 || norm_scale.is_nan() {
        return Err(GeomError::NonPositiveScale { scale: norm_scale });
    }
    let raw = unscaled_homography(s, f1 / norm_scale, f2 / norm_scale, g1, g2);
    let h = raw / scale_divisor(&raw);
    Ok(StitchModel {
        s,
        theta: 2.0 * s.atan(),
        f1,
        f2,
        lambda1,
        lambda2,
        g: h * (f1 / f2),
        h,
        r1: *g1,
        r2: *g2,
        norm_scale,
    })
}

/// Maps a distorted observation through `h` (normalized units) and returns
/// the resulting distorted pixel point, or `None` when the mapped point
/// cannot be distorted.
fn map_observation(
    h: &Mat3,
    p: &DistortedPoint,
    lambda_src: f64,
    lambda_dst: f64,
) -> Option<DistortedPoint> {
    let mapped = h * undistort(p, lambda_src);
    distort(&mapped, lambda_dst, p.norm_scale).ok()
}

/// Pixel transfer error of a correspondence under a model; `+inf` when the
/// mapped point is invalid (treated as an outlier by callers).
pub fn transfer_error(model: &StitchModel, c: &Correspondence, mode: ErrorMode) -> f64 {
    let forward = match map_observation(&model.h, &c.p1, model.lambda1, model.lambda2) {
        Some(q) => (q.u - c.p2.u).hypot(q.v - c.p2.v),
        None => return f64::INFINITY,
    };
    match mode {
        ErrorMode::Forward => forward,
        ErrorMode::Symmetric => {
            let Some(h_inv) = model.h.try_inverse() else {
                return f64::INFINITY;
            };
            match map_observation(&h_inv, &c.p2, model.lambda2, model.lambda1) {
                Some(q) => 0.5 * (forward + (q.u - c.p1.u).hypot(q.v - c.p1.v)),
                None => f64::INFINITY,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

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

    #[test]
    fn cayley_yaw_known_values() {
        assert!((cayley_yaw(0.0) - Mat3::identity()).abs().max() < 1e-15);
        let want = Mat3::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0);
        assert!((cayley_yaw(1.0) - want).abs().max() < 1e-15);
    }

    #[test]
    fn cayley_yaw_matches_axis_angle_and_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..100 {
            let theta: f64 = rng.gen_range(-3.0..3.0);
            let r = cayley_yaw((theta / 2.0).tan());
            let oracle =
                nalgebra::Rotation3::from_axis_angle(&Vec3::y_axis(), theta).into_inner();
            assert!((r - oracle).abs().max() < 1e-12);
            assert!(is_rotation(&r, 1e-12));
        }
    }

    #[test]
    fn gravity_alignment_trivial_and_singular_inputs() {
        let aligned = gravity_alignment(Vec3::new(0.0, -1.0, 0.0)).unwrap();
        assert!((aligned.rotation() - Mat3::identity()).abs().max() < 1e-14);
        assert!(matches!(
            gravity_alignment(Vec3::new(0.0, 1.0, 0.0)),
            Err(GeomError::AntiparallelGravity)
        ));
        assert!(matches!(
            gravity_alignment(Vec3::zeros()),
            Err(GeomError::ZeroGravity)
        ));
    }

    #[test]
    fn gravity_alignment_matches_axis_angle_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let target = Vec3::new(0.0, -1.0, 0.0);
        for _ in 0..200 {
            let g = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..0.2),
                rng.gen_range(-1.0..1.0),
            );
            if g.norm() < 1e-3 {
                continue;
            }
            let prior = gravity_alignment(g).unwrap();
            let r = prior.rotation();
            let gn = g / g.norm();
            assert!((r * gn - target).norm() < 1e-10);
            // Minimal-angle property: the rotation angle equals the angle
            // between gravity and the down-axis.
            let want_angle = gn.dot(&target).clamp(-1.0, 1.0).acos();
            assert!((rotation_angle(r) - want_angle).abs() < 1e-10);
            // Axis-angle oracle built from axis = g x target.
            let axis = gn.cross(&target);
            if axis.norm() > 1e-12 {
                let oracle = nalgebra::Rotation3::from_axis_angle(
                    &nalgebra::Unit::new_normalize(axis),
                    want_angle,
                )
                .into_inner();
                assert!((r - oracle).abs().max() < 1e-10);
            }
        }
    }

    #[test]
    fn undistort_known_values() {
        let n = 1000.0;
        let origin = undistort(&DistortedPoint::new(0.0, 0.0, n), -0.4);
        assert_eq!(origin, Vec3::new(0.0, 0.0, 1.0));
        let unit = undistort(&DistortedPoint::new(n, n, n), 0.0);
        assert_eq!(unit, Vec3::new(1.0, 1.0, 1.0));
        let strong = undistort(&DistortedPoint::new(n, n, n), -0.4);
        assert!((strong - Vec3::new(1.0, 1.0, 0.2)).norm() < 1e-12);
    }

    #[test]
    fn distort_fixed_points_and_identity() {
        let n = 500.0;
        let center = distort(&Vec3::new(0.0, 0.0, 1.0), -0.7, n).unwrap();
        assert_eq!((center.u, center.v), (0.0, 0.0));
        let p = distort(&Vec3::new(0.3, -0.2, 1.0), 0.0, n).unwrap();
        assert!((p.u - 0.3 * n).abs() < 1e-12 && (p.v + 0.2 * n).abs() < 1e-12);
        assert!(matches!(
            distort(&Vec3::new(3.0, 0.0, 1.0), 0.5, n),
            Err(GeomError::DistortOutOfRange { .. })
        ));
    }

    #[test]
    fn distort_undistort_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let n = 1000.0;
        for _ in 0..1000 {
            let p = DistortedPoint::new(
                rng.gen_range(-n..n),
                rng.gen_range(-n..n),
                n,
            );
            let lambda: f64 = rng.gen_range(-0.8..0.2);
            let q = undistort(&p, lambda);
            if q.z <= 1e-6 {
                continue;
            }
            let back = distort(&q, lambda, n).unwrap();
            assert!(
                (back.u - p.u).abs() / n < 1e-10 && (back.v - p.v).abs() / n < 1e-10,
                "round trip failed: {p:?} -> {back:?} at lambda {lambda}"
            );
        }
    }

    #[test]
    fn compose_model_identity_and_errors() {
        let id = GravityPrior::identity();
        let m = compose_model(0.0, 800.0, 800.0, 0.0, 0.0, &id, &id, 1000.0).unwrap();
        assert!((m.h - Mat3::identity()).abs().max() < 1e-12);
        assert!((m.g - Mat3::identity()).abs().max() < 1e-12);
        assert_eq!(m.theta, 0.0);
        assert!(matches!(
            compose_model(0.0, -1.0, 800.0, 0.0, 0.0, &id, &id, 1000.0),
            Err(GeomError::NonPositiveFocal { .. })
        ));
    }

    #[test]
    fn composed_model_matches_projected_scene() {
        // Rotation-only camera pair built directly from tilts and headings;
        // the composed homography must map image-1 observations onto image-2
        // observations exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let n = 1000.0;
        let f = 1200.0;
        for _ in 0..50 {
            let tilt1 = rot_x(rng.gen_range(-0.4..0.4)) * rot_z(rng.gen_range(-0.4..0.4));
            let tilt2 = rot_x(rng.gen_range(-0.4..0.4)) * rot_z(rng.gen_range(-0.4..0.4));
            let m1 = tilt1 * cayley_yaw((rng.gen_range(-0.5..0.5f64) / 2.0).tan());
            let m2 = tilt2 * cayley_yaw((rng.gen_range(-0.5..0.5f64) / 2.0).tan());
            let down = Vec3::new(0.0, -1.0, 0.0);
            let g1 = gravity_alignment(tilt1 * down).unwrap();
            let g2 = gravity_alignment(tilt2 * down).unwrap();
            // Gravity-aligned cameras differ by pure yaw; recover it.
            let a1 = g1.rotation() * m1;
            let a2 = g2.rotation() * m2;
            let theta = yaw_angle(&a2) - yaw_angle(&a1);
            let model = compose_model(
                (theta / 2.0).tan(),
                f,
                f,
                0.0,
                0.0,
                &g1,
                &g2,
                n,
            )
            .unwrap();
            for _ in 0..10 {
                let x = Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(2.0..4.0),
                );
                let d1 = m1 * x;
                let d2 = m2 * x;
                if d1.z < 0.3 || d2.z < 0.3 {
                    continue;
                }
                let c = Correspondence {
                    p1: DistortedPoint::new(f * d1.x / d1.z, f * d1.y / d1.z, n),
                    p2: DistortedPoint::new(f * d2.x / d2.z, f * d2.y / d2.z, n),
                    g1,
                    g2,
                };
                let err = transfer_error(&model, &c, ErrorMode::Symmetric);
                assert!(err < 1e-8, "transfer error {err} too large");
            }
        }
    }

    #[test]
    fn model_g_matrix_is_focal_ratio_times_h() {
        let g1 = gravity_alignment(Vec3::new(0.1, -1.0, 0.05)).unwrap();
        let g2 = gravity_alignment(Vec3::new(-0.07, -1.0, 0.12)).unwrap();
        let m = compose_model(0.3, 900.0, 1100.0, -0.2, -0.1, &g1, &g2, 1000.0).unwrap();
        assert!((m.g - m.h * (900.0 / 1100.0)).abs().max() < 1e-12);
        assert!((m.h[(2, 2)] - 1.0).abs() < 1e-12);
        // Recomposition invariant: h matches the raw product after the same
        // scale fixing.
        let raw = unscaled_homography(m.s, m.f1 / m.norm_scale, m.f2 / m.norm_scale, &g1, &g2);
        assert!((raw / raw[(2, 2)] - m.h).abs().max() < 1e-10);
    }

    #[test]
    fn transfer_error_known_displacement() {
        let id = GravityPrior::identity();
        let n = 1000.0;
        let model = compose_model(0.0, n, n, 0.0, 0.0, &id, &id, n).unwrap();
        let same = Correspondence {
            p1: DistortedPoint::new(120.0, -40.0, n),
            p2: DistortedPoint::new(120.0, -40.0, n),
            g1: id,
            g2: id,
        };
        assert_eq!(transfer_error(&model, &same, ErrorMode::Symmetric), 0.0);
        let displaced = Correspondence {
            p2: DistortedPoint::new(123.0, -36.0, n),
            ..same
        };
        assert!((transfer_error(&model, &displaced, ErrorMode::Forward) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn transfer_error_invariant_to_homography_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(65);
        let g1 = gravity_alignment(Vec3::new(0.2, -1.0, -0.1)).unwrap();
        let g2 = gravity_alignment(Vec3::new(-0.1, -1.0, 0.3)).unwrap();
        let model = compose_model(0.2, 950.0, 1050.0, -0.3, -0.25, &g1, &g2, 1000.0).unwrap();
        let c = Correspondence {
            p1: DistortedPoint::new(210.0, 140.0, 1000.0),
            p2: DistortedPoint::new(-35.0, 160.0, 1000.0),
            g1,
            g2,
        };
        let base = transfer_error(&model, &c, ErrorMode::Symmetric);
        assert!(base.is_finite());
        for _ in 0..20 {
            let k: f64 = rng.gen_range(0.1..10.0) * if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
            let mut scaled = model;
            scaled.h *= k;
            scaled.g *= k;
            let err = transfer_error(&scaled, &c, ErrorMode::Symmetric);
            assert!((err - base).abs() < 1e-9 * base.max(1.0));
        }
    }
}
