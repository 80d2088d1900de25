//! Dense univariate polynomials and the root finding the minimal solvers
//! rest on.
//!
//! Everything here works on real coefficients stored in ascending order.
//! Degrees up to four are solved in closed form (quadratic formula with the
//! stable companion root, Ferrari resolvent for quartics) followed by a short
//! Newton polish; higher degrees go through a Sturm-sequence isolation with
//! renormalized pseudo-remainders and count-driven bisection, which stays
//! robust for clustered and even-multiplicity roots. The yaw parameterization
//! used by the solvers introduces a structural `1 + s^2` factor in eliminated
//! polynomials, so division by that factor gets a dedicated, checked routine.

use thiserror::Error;

/// Trailing coefficients below this fraction of the largest magnitude are
/// treated as zero when normalizing degrees.
pub const COEFF_TRIM_REL: f64 = 1e-13;
/// Largest relative remainder accepted when dividing out `1 + s^2`.
pub const DEFLATE_REL: f64 = 1e-8;
/// Real roots closer than this (relative to `max(1, |root|)`) merge into one.
pub const ROOT_MERGE_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("the zero polynomial has no well-defined root set")]
    ZeroPolynomial,
    #[error("degree {got} exceeds the supported degree {max} for this routine")]
    DegreeTooHigh { got: usize, max: usize },
    #[error("polynomial is not divisible by 1 + s^2 (relative remainder {remainder:.3e})")]
    NotDivisible { remainder: f64 },
    #[error("matrix has no numerical null space (sigma_min/sigma_max = {ratio:.3e})")]
    NoNullspace { ratio: f64 },
}

/// Dense univariate polynomial, coefficients ascending: `coeffs[i] * x^i`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UniPoly {
    coeffs: Vec<f64>,
}

impl UniPoly {
    /// Builds a polynomial and trims trailing near-zero coefficients
    /// (relative threshold [`COEFF_TRIM_REL`]).
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = UniPoly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        UniPoly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn inf_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Horner evaluation of the value and first derivative in one pass.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        for c in self.coeffs.iter().rev() {
            d = d * x + v;
            v = v * x + c;
        }
        (v, d)
    }

    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() <= 1 {
            return UniPoly::zero();
        }
        UniPoly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| (i + 1) as f64 * c)
                .collect(),
        )
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        UniPoly::new(out)
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        self.add(&other.scaled(-1.0))
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    pub fn scaled(&self, k: f64) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Scaled to unit infinity norm (zero polynomial stays zero).
    pub fn normalized(&self) -> UniPoly {
        let n = self.inf_norm();
        if n == 0.0 {
            UniPoly::zero()
        } else {
            self.scaled(1.0 / n)
        }
    }

    fn trim(&mut self) {
        let norm = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if norm == 0.0 || !norm.is_finite() {
            if norm == 0.0 {
                self.coeffs.clear();
            }
            return;
        }
        let thr = COEFF_TRIM_REL * norm;
        while let Some(&last) = self.coeffs.last() {
            if last.abs() <= thr {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }
}

fn merge_close(mut roots: Vec<f64>) -> Vec<f64> {
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        match out.last() {
            Some(&prev) if (r - prev).abs() <= ROOT_MERGE_TOL * prev.abs().max(1.0) => {}
            _ => out.push(r),
        }
    }
    out
}

fn polish(p: &UniPoly, x0: f64, steps: usize) -> f64 {
    let mut x = x0;
    let mut best = x;
    let mut best_res = p.eval(x).abs();
    for _ in 0..steps {
        let (v, d) = p.eval_with_derivative(x);
        if d == 0.0 || !v.is_finite() {
            break;
        }
        x -= v / d;
        let res = p.eval(x).abs();
        if res < best_res {
            best_res = res;
            best = x;
        } else {
            break;
        }
    }
    best
}

/// Real roots of a polynomial of degree at most two.
///
/// Uses the numerically stable variant of the quadratic formula (larger root
/// from the formula, companion root from `c / q`). Double roots collapse into
/// a single entry; a negative discriminant yields an empty list; the zero
/// polynomial is an error.
pub fn solve_quadratic(p: &UniPoly) -> Result<Vec<f64>, PolyError> {
    let deg = p.degree().ok_or(PolyError::ZeroPolynomial)?;
    match deg {
        0 => Ok(Vec::new()),
        1 => Ok(vec![-p.coeffs[0] / p.coeffs[1]]),
        2 => {
            let (a, b, c) = (p.coeffs[2], p.coeffs[1], p.coeffs[0]);
            let mut disc = b * b - 4.0 * a * c;
            // A discriminant within rounding noise of zero is a double root;
            // dropping it would lose a genuine solution downstream.
            if disc < 0.0 && disc >= -4.0 * f64::EPSILON * (b * b + 4.0 * (a * c).abs()) {
                disc = 0.0;
            }
            if disc < 0.0 {
                return Ok(Vec::new());
            }
            let sq = disc.sqrt();
            let q = -0.5 * (b + b.signum() * sq);
            let roots = if q == 0.0 {
                vec![0.0]
            } else {
                vec![q / a, c / q]
            };
            Ok(merge_close(roots))
        }
        _ => Err(PolyError::DegreeTooHigh { got: deg, max: 2 }),
    }
}

/// Real roots of a polynomial of degree at most three.
pub fn solve_cubic(p: &UniPoly) -> Result<Vec<f64>, PolyError> {
    let deg = p.degree().ok_or(PolyError::ZeroPolynomial)?;
    if deg < 3 {
        return solve_quadratic(p);
    }
    if deg > 3 {
        return Err(PolyError::DegreeTooHigh { got: deg, max: 3 });
    }
    let a = p.coeffs[2] / p.coeffs[3];
    let b = p.coeffs[1] / p.coeffs[3];
    let c = p.coeffs[0] / p.coeffs[3];
    // Depressed form t^3 + q t + r with x = t - a/3.
    let q = b - a * a / 3.0;
    let r = c - a * b / 3.0 + 2.0 * a * a * a / 27.0;
    let shift = -a / 3.0;
    let disc = -4.0 * q * q * q - 27.0 * r * r;
    let mut roots = Vec::with_capacity(3);
    if disc >= 0.0 && q < 0.0 {
        let m = 2.0 * (-q / 3.0).sqrt();
        let arg = (3.0 * r / (q * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        for k in 0..3 {
            let t = m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
            roots.push(t + shift);
        }
    } else {
        let half_r = r / 2.0;
        let inner = (half_r * half_r + q * q * q / 27.0).max(0.0).sqrt();
        let u = (-half_r + inner).cbrt();
        let v = (-half_r - inner).cbrt();
        roots.push(u + v + shift);
    }
    let polished: Vec<f64> = roots.into_iter().map(|x| polish(p, x, 3)).collect();
    Ok(merge_close(polished))
}

/// Real roots of a polynomial of degree at most four, in closed form.
///
/// Quartics go through the depressed form and the Ferrari resolvent cubic,
/// choosing its largest real root, and every real root receives a short
/// Newton polish against the original coefficients. Lower degrees delegate
/// to the cubic/quadratic paths.
pub fn solve_quartic(p: &UniPoly) -> Result<Vec<f64>, PolyError> {
    let deg = p.degree().ok_or(PolyError::ZeroPolynomial)?;
    if deg < 4 {
        return solve_cubic(p);
    }
    if deg > 4 {
        return Err(PolyError::DegreeTooHigh { got: deg, max: 4 });
    }
    let b = p.coeffs[3] / p.coeffs[4];
    let c = p.coeffs[2] / p.coeffs[4];
    let d = p.coeffs[1] / p.coeffs[4];
    let e = p.coeffs[0] / p.coeffs[4];
    // Depressed form y^4 + pp y^2 + qq y + rr with x = y - b/4.
    let pp0 = c - 3.0 * b * b / 8.0;
    let qq0 = d - b * c / 2.0 + b * b * b / 8.0;
    let rr0 = e - b * d / 4.0 + b * b * c / 16.0 - 3.0 * b * b * b * b / 256.0;
    let shift = -b / 4.0;
    // Substitute y = k t so the depressed coefficients stay O(1); without
    // this the resolvent collapses under trimming when the input's leading
    // coefficient is small.
    let k_raw = [pp0.abs().sqrt(), qq0.abs().cbrt(), rr0.abs().powf(0.25)]
        .into_iter()
        .fold(0.0f64, f64::max);
    if k_raw == 0.0 {
        // Fully depressed: (y - shift)^4.
        return Ok(vec![polish(p, shift, 4)]);
    }
    // Round to a power of two so the rescaling divisions are exact.
    let k = f64::exp2(k_raw.log2().round());
    let (pp, qq, rr) = (pp0 / (k * k), qq0 / (k * k * k), rr0 / (k * k * k * k));

    let mut ts: Vec<f64> = Vec::with_capacity(4);
    let push_quad = |b1: f64, c1: f64, ts: &mut Vec<f64>| {
        if let Ok(rs) = solve_quadratic(&UniPoly::new(vec![c1, b1, 1.0])) {
            ts.extend(rs);
        }
    };
    let mut biquadratic = qq.abs() <= 1e-14;
    if !biquadratic {
        let resolvent = UniPoly::new(vec![-qq * qq, pp * pp - 4.0 * rr, 2.0 * pp, 1.0]);
        let z = solve_cubic(&resolvent)?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0);
        let alpha = z.sqrt();
        if alpha == 0.0 {
            biquadratic = true;
        } else {
            let beta = (pp + z - qq / alpha) / 2.0;
            let gamma = (pp + z + qq / alpha) / 2.0;
            push_quad(alpha, beta, &mut ts);
            push_quad(-alpha, gamma, &mut ts);
        }
    }
    if biquadratic {
        // t^4 + pp t^2 + rr, up to the negligible qq t term.
        for t2 in solve_quadratic(&UniPoly::new(vec![rr, pp, 1.0]))? {
            if t2 > 0.0 {
                ts.push(t2.sqrt());
                ts.push(-t2.sqrt());
            } else if t2 >= -1e-14 {
                ts.push(0.0);
            }
        }
    }
    let roots: Vec<f64> = ts
        .into_iter()
        .map(|t| polish(p, k * t + shift, 4))
        .collect();
    Ok(merge_close(roots))
}

/// Divides `p` by `1 + s^2`, failing when the remainder exceeds
/// [`DEFLATE_REL`] relative to the input's largest coefficient.
pub fn deflate_one_plus_s2(p: &UniPoly) -> Result<UniPoly, PolyError> {
    let deg = p.degree().ok_or(PolyError::ZeroPolynomial)?;
    if deg < 2 {
        return Err(PolyError::NotDivisible { remainder: 1.0 });
    }
    let mut rem = p.coeffs.to_vec();
    let mut q = vec![0.0; deg - 1];
    for i in (2..=deg).rev() {
        let t = rem[i];
        q[i - 2] = t;
        rem[i] = 0.0;
        rem[i - 2] -= t;
    }
    let rel = rem[0].abs().max(rem[1].abs()) / p.inf_norm();
    if rel > DEFLATE_REL {
        return Err(PolyError::NotDivisible { remainder: rel });
    }
    Ok(UniPoly::new(q))
}

/// Divides out as many factors of `s` as the constant coefficients allow
/// (relative tolerance `tol_rel`), returning the quotient and the count.
pub fn strip_factor_s(p: &UniPoly, tol_rel: f64) -> (UniPoly, usize) {
    let norm = p.inf_norm();
    let mut coeffs = p.coeffs().to_vec();
    let mut stripped = 0;
    while coeffs.len() > 1 && coeffs[0].abs() <= tol_rel * norm {
        coeffs.remove(0);
        stripped += 1;
    }
    (UniPoly::new(coeffs), stripped)
}

/// Cauchy root bound `1 + max |c_i| / |c_n|`.
fn cauchy_bound(p: &UniPoly) -> f64 {
    let deg = p.degree().unwrap_or(0);
    if deg == 0 {
        return 1.0;
    }
    let lead = p.coeffs[deg].abs();
    let m = p.coeffs[..deg].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    1.0 + m / lead
}

/// Default half-width of the Sturm search bracket. `|s| = 15` corresponds to
/// a yaw magnitude over 172 degrees, outside the solvers' operating range.
pub const DEFAULT_BRACKET: f64 = 15.0;

struct SturmChain {
    chain: Vec<UniPoly>,
}

impl SturmChain {
    fn build(p: &UniPoly) -> SturmChain {
        let mut chain = vec![p.normalized()];
        let d = p.derivative();
        if d.is_zero() {
            return SturmChain { chain };
        }
        chain.push(d.normalized());
        loop {
            let rem = poly_rem(&chain[chain.len() - 2], &chain[chain.len() - 1]);
            if rem.inf_norm() <= 1e-13 {
                break;
            }
            chain.push(rem.scaled(-1.0).normalized());
            if chain.len() > 64 {
                break;
            }
        }
        SturmChain { chain }
    }

    /// Number of sign changes of the chain at `x`, zeros skipped.
    fn sign_changes(&self, x: f64) -> usize {
        let mut changes = 0;
        let mut last = 0i8;
        for q in &self.chain {
            let v = q.eval(x);
            let s = if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                0
            };
            if s != 0 {
                if last != 0 && s != last {
                    changes += 1;
                }
                last = s;
            }
        }
        changes
    }

    /// Count of distinct real roots in `(a, b]`.
    fn count(&self, a: f64, b: f64) -> usize {
        self.sign_changes(a).saturating_sub(self.sign_changes(b))
    }
}

/// Remainder of `a` divided by `b`, computed by synthetic division;
/// callers renormalize.
fn poly_rem(a: &UniPoly, b: &UniPoly) -> UniPoly {
    let db = b.degree().expect("nonzero divisor");
    let mut rem = a.coeffs().to_vec();
    let lead = b.coeffs()[db];
    while rem.len() > db {
        let k = rem.len() - 1;
        let factor = rem[k] / lead;
        for i in 0..db {
            rem[k - db + i] -= factor * b.coeffs()[i];
        }
        rem.pop();
    }
    UniPoly::new(rem)
}

/// Real roots of `p` inside `bracket` via Sturm isolation plus bisection.
///
/// `bracket` defaults to `[-15, 15]` intersected with the Cauchy bound.
/// Isolation bisects on the Sturm count, which keeps even-multiplicity roots
/// findable; clusters tighter than [`ROOT_MERGE_TOL`] collapse to one root.
pub fn sturm_roots(
    p: &UniPoly,
    bracket: Option<(f64, f64)>,
    tol: f64,
) -> Result<Vec<f64>, PolyError> {
    let deg = p.degree().ok_or(PolyError::ZeroPolynomial)?;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let (mut lo, mut hi) = bracket.unwrap_or_else(|| {
        let b = cauchy_bound(p).min(DEFAULT_BRACKET);
        (-b, b)
    });
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let chain = SturmChain::build(&p.normalized());
    let total = chain.count(lo, hi);
    if total == 0 {
        return Ok(Vec::new());
    }
    let mut roots = Vec::with_capacity(total);
    let mut stack = vec![(lo, hi, total)];
    while let Some((a, b, count)) = stack.pop() {
        let width_tol = tol.max(1e-14) * a.abs().max(b.abs()).max(1.0);
        if count == 1 || (b - a) <= width_tol {
            let r = refine_root(p, &chain, a, b, tol);
            roots.push(r);
            continue;
        }
        let mid = 0.5 * (a + b);
        let left = chain.count(a, mid);
        if left > 0 {
            stack.push((a, mid, left));
        }
        if count > left {
            stack.push((mid, b, count - left));
        }
    }
    Ok(merge_close(roots))
}

fn refine_root(p: &UniPoly, chain: &SturmChain, mut a: f64, mut b: f64, tol: f64) -> f64 {
    for _ in 0..80 {
        let width_tol = tol * a.abs().max(b.abs()).max(1.0);
        if (b - a) <= width_tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if chain.count(a, mid) >= 1 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let mid = 0.5 * (a + b);
    polish(p, mid, 4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent root oracle: companion-matrix eigenvalues (nalgebra Schur),
    /// near-real eigenvalues polished by Newton and kept when the residual
    /// confirms a real root.
    fn companion_real_roots(p: &UniPoly) -> Vec<f64> {
        let deg = p.degree().expect("nonzero");
        if deg == 0 {
            return Vec::new();
        }
        let c = p.coeffs();
        let lead = c[deg];
        let mut m = nalgebra::DMatrix::<f64>::zeros(deg, deg);
        for i in 1..deg {
            m[(i, i - 1)] = 1.0;
        }
        for i in 0..deg {
            m[(i, deg - 1)] = -c[i] / lead;
        }
        let eig = m.complex_eigenvalues();
        let norm = p.inf_norm();
        let mut out = Vec::new();
        for ev in eig.iter() {
            if ev.im.abs() > 1e-6 * ev.re.abs().max(1.0) {
                continue;
            }
            let r = polish(p, ev.re, 20);
            let bound = 1e-8 * norm * r.abs().max(1.0).powi(deg as i32);
            if p.eval(r).abs() <= bound {
                out.push(r);
            }
        }
        merge_close(out)
    }

    fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
        let one_way = |x: &[f64], y: &[f64]| {
            x.iter()
                .map(|&v| {
                    y.iter()
                        .map(|&w| (v - w).abs())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0f64, f64::max)
        };
        if a.is_empty() && b.is_empty() {
            return 0.0;
        }
        if a.is_empty() || b.is_empty() {
            return f64::INFINITY;
        }
        one_way(a, b).max(one_way(b, a))
    }

    fn poly_from_roots(roots: &[f64]) -> UniPoly {
        roots.iter().fold(UniPoly::constant(1.0), |acc, &r| {
            acc.mul(&UniPoly::new(vec![-r, 1.0]))
        })
    }

    #[test]
    fn trims_trailing_noise() {
        let p = UniPoly::new(vec![1.0, 2.0, 1e-16]);
        assert_eq!(p.degree(), Some(1));
        let z = UniPoly::new(vec![0.0, 0.0]);
        assert!(z.is_zero());
    }

    #[test]
    fn horner_matches_naive_eval() {
        let p = UniPoly::new(vec![0.5, -2.0, 3.0, 1.0, -0.25]);
        for &x in &[-2.5f64, -1.0, 0.0, 0.3, 1.9] {
            let naive: f64 = p
                .coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| c * x.powi(i as i32))
                .sum();
            assert!((p.eval(x) - naive).abs() < 1e-12 * naive.abs().max(1.0));
            let (v, d) = p.eval_with_derivative(x);
            assert!((v - naive).abs() < 1e-12 * naive.abs().max(1.0));
            let d_naive = p.derivative().eval(x);
            assert!((d - d_naive).abs() < 1e-12 * d_naive.abs().max(1.0));
        }
    }

    #[test]
    fn quadratic_simple_roots() {
        let p = UniPoly::new(vec![2.0, -3.0, 1.0]);
        let r = solve_quadratic(&p).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] - 1.0).abs() < 1e-12);
        assert!((r[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_edge_cases() {
        assert!(solve_quadratic(&UniPoly::new(vec![1.0, 0.0, 1.0]))
            .unwrap()
            .is_empty());
        let double = solve_quadratic(&UniPoly::new(vec![1.0, -2.0, 1.0])).unwrap();
        assert_eq!(double.len(), 1);
        assert!((double[0] - 1.0).abs() < 1e-9);
        let lin = solve_quadratic(&UniPoly::new(vec![3.0, -1.5])).unwrap();
        assert_eq!(lin, vec![2.0]);
        assert!(solve_quadratic(&UniPoly::constant(4.0)).unwrap().is_empty());
        assert!(matches!(
            solve_quadratic(&UniPoly::zero()),
            Err(PolyError::ZeroPolynomial)
        ));
    }

    #[test]
    fn quadratic_is_stable_for_small_roots() {
        // x^2 - (1e8 + 1e-8) x + 1: roots 1e8 and 1e-8; the naive formula
        // loses the small one to cancellation.
        let p = UniPoly::new(vec![1.0, -(1e8 + 1e-8), 1.0]);
        let r = solve_quadratic(&p).unwrap();
        assert!((r[0] - 1e-8).abs() / 1e-8 < 1e-9);
        assert!((r[1] - 1e8).abs() / 1e8 < 1e-12);
    }

    #[test]
    fn cubic_three_real_roots() {
        let p = poly_from_roots(&[1.0, 2.0, 3.0]);
        let r = solve_cubic(&p).unwrap();
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn cubic_one_real_root() {
        // (x - 2)(x^2 + x + 1)
        let p = UniPoly::new(vec![-2.0, -1.0, -1.0, 1.0]);
        let r = solve_cubic(&p).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn quartic_known_roots() {
        let want = [-2.0, -0.5, 0.3, 1.7];
        let p = poly_from_roots(&want).scaled(-3.5);
        let r = solve_quartic(&p).unwrap();
        assert_eq!(r.len(), 4);
        for (got, want) in r.iter().zip(want) {
            assert!((got - want).abs() < 1e-10, "got {got}, want {want}");
        }
    }

    #[test]
    fn quartic_double_roots_collapse() {
        // (x^2 - 1)^2
        let p = UniPoly::new(vec![1.0, 0.0, -2.0, 0.0, 1.0]);
        let r = solve_quartic(&p).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] + 1.0).abs() < 1e-6);
        assert!((r[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quartic_biquadratic_and_no_real_roots() {
        let p = UniPoly::new(vec![4.0, 0.0, -5.0, 0.0, 1.0]); // roots ±1, ±2
        let r = solve_quartic(&p).unwrap();
        assert_eq!(r.len(), 4);
        for (got, want) in r.iter().zip([-2.0, -1.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-10);
        }
        let none = solve_quartic(&UniPoly::new(vec![1.0, 0.0, 2.0, 0.0, 1.0])).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn quartic_matches_companion_oracle_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..500 {
            let coeffs: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let p = UniPoly::new(coeffs);
            if p.degree() != Some(4) {
                continue;
            }
            let mine = solve_quartic(&p).unwrap();
            let oracle = companion_real_roots(&p);
            assert!(
                hausdorff(&mine, &oracle) < 1e-8,
                "root mismatch: {mine:?} vs {oracle:?} for {:?}",
                p.coeffs()
            );
        }
    }

    #[test]
    fn quartic_residuals_meet_contract() {
        // Residuals scale with evaluation error, so the contract is stated for
        // well-scaled inputs: leading coefficient bounded away from zero, as
        // produced by the normalized elimination polynomials.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let mut coeffs: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            coeffs[4] = rng.gen_range(0.1..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let p = UniPoly::new(coeffs);
            if p.degree() != Some(4) {
                continue;
            }
            for r in solve_quartic(&p).unwrap() {
                assert!(p.eval(r).abs() < 1e-9 * p.inf_norm());
            }
        }
    }

    #[test]
    fn sturm_finds_known_sextic_roots() {
        let want = [-1.8, -0.9, -0.1, 0.4, 1.2, 2.5];
        let p = poly_from_roots(&want);
        let r = sturm_roots(&p, None, 1e-12).unwrap();
        assert_eq!(r.len(), 6);
        for (got, want) in r.iter().zip(want) {
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn sturm_handles_high_multiplicity() {
        // x^8: one distinct root at zero.
        let mut coeffs = vec![0.0; 9];
        coeffs[8] = 1.0;
        let r = sturm_roots(&UniPoly::new(coeffs), Some((-1.0, 1.0)), 1e-12).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].abs() < 1e-9);
    }

    #[test]
    fn sturm_respects_bracket() {
        let p = poly_from_roots(&[-3.0, 1.0, 5.0]);
        let r = sturm_roots(&p, Some((-2.0, 2.0)), 1e-12).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.0).abs() < 1e-9);
        assert!(matches!(
            sturm_roots(&UniPoly::zero(), None, 1e-12),
            Err(PolyError::ZeroPolynomial)
        ));
    }

    #[test]
    fn sturm_matches_companion_oracle_on_random_degrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for deg in 2..=8usize {
            for _ in 0..60 {
                let coeffs: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let p = UniPoly::new(coeffs);
                if p.degree() != Some(deg) {
                    continue;
                }
                // Bracket from the Cauchy bound so every real root is inside;
                // the default bracket is intentionally narrower (solver domain).
                let lead = p.coeffs()[deg].abs();
                let bound = 2.0
                    + p.coeffs()[..deg]
                        .iter()
                        .fold(0.0f64, |m, c| m.max(c.abs() / lead));
                let mine = sturm_roots(&p, Some((-bound, bound)), 1e-12).unwrap();
                let oracle = companion_real_roots(&p);
                assert!(
                    hausdorff(&mine, &oracle) < 1e-7,
                    "deg {deg}: {mine:?} vs {oracle:?} for {:?}",
                    p.coeffs()
                );
            }
        }
    }

    #[test]
    fn deflate_divides_exact_multiples() {
        let q = UniPoly::new(vec![-4.0, 0.0, 1.0]);
        let p = q.mul(&UniPoly::new(vec![1.0, 0.0, 1.0]));
        let got = deflate_one_plus_s2(&p).unwrap();
        assert_eq!(got.degree(), Some(2));
        for (a, b) in got.coeffs().iter().zip(q.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn deflate_rejects_non_multiples() {
        let p = UniPoly::new(vec![1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(
            deflate_one_plus_s2(&p),
            Err(PolyError::NotDivisible { .. })
        ));
    }

    #[test]
    fn deflate_round_trips_random_quotients() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let factor = UniPoly::new(vec![1.0, 0.0, 1.0]);
        for _ in 0..200 {
            let q = UniPoly::new((0..7).map(|_| rng.gen_range(-2.0..2.0)).collect());
            if q.is_zero() {
                continue;
            }
            let p = q.mul(&factor);
            let back = deflate_one_plus_s2(&p).unwrap();
            let diff = back.sub(&q).inf_norm();
            assert!(diff < 1e-12 * q.inf_norm());
        }
    }

    #[test]
    fn strip_factor_s_removes_zero_roots() {
        let p = UniPoly::new(vec![0.0, 0.0, 3.0, 1.0]);
        let (q, k) = strip_factor_s(&p, 1e-12);
        assert_eq!(k, 2);
        assert_eq!(q.coeffs(), &[3.0, 1.0]);
    }
}
