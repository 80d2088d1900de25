//! Small square matrices with univariate-polynomial entries.
//!
//! The elimination step of each minimal solver reduces to a 2x2 or 3x3
//! matrix whose entries are polynomials in the Cayley yaw parameter. Its
//! determinant gives the univariate elimination polynomial, and the null
//! space at a determinant root recovers the remaining monomial vector.

use nalgebra::{DMatrix, DVector};

use crate::poly::{PolyError, UniPoly};

/// Singular-value ratio above which a matrix is treated as having no
/// numerical null space.
pub const NULLSPACE_RATIO: f64 = 1e-6;

/// Row-major square matrix of polynomials, dimension 2 or 3.
#[derive(Debug, Clone)]
pub struct PolyMat {
    n: usize,
    entries: Vec<UniPoly>,
}

impl PolyMat {
    /// Builds an `n x n` polynomial matrix from row-major entries.
    ///
    /// # Panics
    /// Panics if `n` is not 2 or 3 or if `entries.len() != n * n`; both are
    /// programming errors, not data conditions.
    pub fn new(n: usize, entries: Vec<UniPoly>) -> Self {
        assert!(n == 2 || n == 3, "PolyMat supports dimensions 2 and 3");
        assert_eq!(entries.len(), n * n, "entry count must be n * n");
        Self { n, entries }
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry at `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> &UniPoly {
        &self.entries[row * self.n + col]
    }

    /// Determinant as a polynomial, by cofactor expansion.
    pub fn det(&self) -> UniPoly {
        match self.n {
            2 => {
                let ad = self.entry(0, 0).mul(self.entry(1, 1));
                let bc = self.entry(0, 1).mul(self.entry(1, 0));
                ad.sub(&bc)
            }
            3 => {
                let minor = |r0: usize, r1: usize, c0: usize, c1: usize| {
                    self.entry(r0, c0)
                        .mul(self.entry(r1, c1))
                        .sub(&self.entry(r0, c1).mul(self.entry(r1, c0)))
                };
                let m0 = self.entry(0, 0).mul(&minor(1, 2, 1, 2));
                let m1 = self.entry(0, 1).mul(&minor(1, 2, 0, 2));
                let m2 = self.entry(0, 2).mul(&minor(1, 2, 0, 1));
                m0.sub(&m1).add(&m2)
            }
            _ => unreachable!(),
        }
    }

    /// Numeric evaluation of every entry at `s`.
    pub fn eval(&self, s: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |r, c| self.entry(r, c).eval(s))
    }

    /// Unit null vector of the matrix evaluated at `s`, where `s` should be
    /// a root of [`PolyMat::det`].
    ///
    /// The vector is sign-fixed so that its last component (or, when that is
    /// negligible, its largest component) is positive. Fails with
    /// [`PolyError::NoNullspace`] when the smallest singular value is not
    /// clearly separated from the largest.
    pub fn null_vector(&self, s: f64) -> Result<DVector<f64>, PolyError> {
        let m = self.eval(s);
        let svd = m.svd(false, true);
        let sv = &svd.singular_values;
        let sigma_max = sv[0];
        let sigma_min = sv[self.n - 1];
        if sigma_max <= 0.0 {
            // All-zero matrix: every vector is a null vector; report it as
            // having no usable one-dimensional null space.
            return Err(PolyError::NoNullspace { ratio: 1.0 });
        }
        let ratio = sigma_min / sigma_max;
        if ratio > NULLSPACE_RATIO {
            return Err(PolyError::NoNullspace { ratio });
        }
        let v_t = svd.v_t.expect("SVD was computed with V^T");
        let mut v: DVector<f64> = v_t.row(self.n - 1).transpose();
        let pivot = if v[self.n - 1].abs() > 1e-12 {
            v[self.n - 1]
        } else {
            v.iter().copied().fold(
                0.0f64,
                |best, x| if x.abs() > best.abs() { x } else { best },
            )
        };
        if pivot < 0.0 {
            v.neg_mut();
        }
        Ok(v)
    }
}
