//! Shared test support: an independent root-finding oracle.

use nalgebra::DMatrix;

/// Eigenvalues of the companion matrix of `coeffs` (ascending powers), as
/// `(re, im)` pairs — an oracle for the polynomial root finders that shares
/// no code with them.
pub fn companion_eigenvalues(coeffs: &[f64]) -> Vec<(f64, f64)> {
    let d = coeffs.len() - 1;
    assert!(d >= 1, "constant polynomials have no companion matrix");
    let lead = coeffs[d];
    assert!(lead != 0.0);
    let mut m = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        m[(i, d - 1)] = -coeffs[i] / lead;
        if i + 1 < d {
            m[(i + 1, i)] = 1.0;
        }
    }
    m.complex_eigenvalues()
        .iter()
        .map(|c| (c.re, c.im))
        .collect()
}

/// Real spectrum of the companion matrix: roots whose imaginary part is
/// negligible, sorted ascending.
pub fn companion_real_roots(coeffs: &[f64]) -> Vec<f64> {
    let mut roots: Vec<f64> = companion_eigenvalues(coeffs)
        .into_iter()
        .filter(|(re, im)| im.abs() <= 1e-9 * (1.0 + re.abs()))
        .map(|(re, _)| re)
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

/// Whether the draw is numerically borderline for oracle comparison:
/// an eigenvalue pair that is neither clearly real nor clearly complex, or
/// two real roots too close to distinguish from a double root.
pub fn borderline(coeffs: &[f64]) -> bool {
    let eig = companion_eigenvalues(coeffs);
    for (re, im) in &eig {
        let scale = 1.0 + re.abs();
        if im.abs() > 1e-9 * scale && im.abs() < 1e-6 * scale {
            return true;
        }
    }
    let reals = companion_real_roots(coeffs);
    reals.windows(2).any(|w| (w[1] - w[0]).abs() < 1e-6)
}
