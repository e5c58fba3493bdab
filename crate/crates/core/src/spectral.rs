//! Characteristic spectrum of the unperturbed equation and the shifted
//! spectra of the reduced equation.

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("polynomial degree must be at least {min}, got {got}")]
    Degree { min: usize, got: usize },
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("characteristic polynomial has non-real roots (max |Im| = {max_imag:e})")]
    ComplexRoots { max_imag: f64 },
    #[error("characteristic polynomial has repeated roots (min gap = {gap:e}, tolerance {tol:e})")]
    RepeatedRoots { gap: f64, tol: f64 },
    #[error("companion eigenvalue computation did not converge")]
    EigenFailure,
}

/// Ordered real simple roots `lambda_1 > ... > lambda_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub lambda: Vec<f64>,
    pub separation: f64,
}

/// `gamma_j = lambda_j - lambda_i` with the base root removed, strictly decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedSpectrum {
    pub gamma: Vec<f64>,
    /// 1-based index of the root that was subtracted.
    pub base_index: usize,
    /// 1-based: 1 when all gamma are negative, n when all are positive,
    /// otherwise k with `gamma_k < 0 < gamma_{k-1}`.
    pub case_index: usize,
}

impl ShiftedSpectrum {
    /// Classify an arbitrary strictly decreasing, zero-free sequence.
    pub fn from_gamma(gamma: Vec<f64>, base_index: usize) -> Self {
        debug_assert!(gamma.windows(2).all(|w| w[0] > w[1]));
        debug_assert!(gamma.iter().all(|g| *g != 0.0));
        let case_index = 1 + gamma.iter().filter(|g| **g > 0.0).count();
        ShiftedSpectrum {
            gamma,
            base_index,
            case_index,
        }
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    /// Order n of the original equation.
    pub fn order(&self) -> usize {
        self.gamma.len() + 1
    }
}

/// Evaluate the monic polynomial `x^n + sum a_i x^i` (coefficients low to high).
pub fn eval_monic(a: &[f64], x: f64) -> f64 {
    a.iter().rev().fold(1.0, |acc, c| acc * x + c)
}

fn eval_monic_derivative(a: &[f64], x: f64) -> f64 {
    let n = a.len();
    let mut acc = n as f64;
    for i in (1..n).rev() {
        acc = acc * x + i as f64 * a[i];
    }
    acc
}

/// Repeated-root threshold for a root set of the given magnitude.
pub fn simplicity_tolerance(max_abs: f64) -> f64 {
    1e-7 * (1.0 + max_abs)
}

/// Real simple roots of a monic polynomial of degree >= 1, sorted decreasing.
pub fn real_simple_roots(a: &[f64]) -> Result<Spectrum, SpectralError> {
    let n = a.len();
    if n == 0 {
        return Err(SpectralError::Degree { min: 1, got: 0 });
    }
    if a.iter().any(|c| !c.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    if n == 1 {
        return Ok(Spectrum {
            lambda: vec![-a[0]],
            separation: f64::INFINITY,
        });
    }
    // Companion matrix: ones on the subdiagonal, -a in the last column.
    let mut c = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        c[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        c[(i, n - 1)] = -a[i];
    }
    let eig = c
        .try_schur(f64::EPSILON, 10_000)
        .ok_or(SpectralError::EigenFailure)?
        .complex_eigenvalues();
    let max_abs = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = simplicity_tolerance(max_abs);
    let max_imag = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_imag > tol {
        return Err(SpectralError::ComplexRoots { max_imag });
    }
    let mut lambda: Vec<f64> = eig.iter().map(|z| z.re).collect();
    lambda.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let gap = |l: &[f64]| {
        l.windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::INFINITY, f64::min)
    };
    let raw_gap = gap(&lambda);
    if raw_gap < tol {
        return Err(SpectralError::RepeatedRoots { gap: raw_gap, tol });
    }
    for x in lambda.iter_mut() {
        let d = eval_monic_derivative(a, *x);
        if d == 0.0 {
            continue;
        }
        let polished = *x - eval_monic(a, *x) / d;
        if eval_monic(a, polished).abs() <= eval_monic(a, *x).abs() {
            *x = polished;
        }
    }
    lambda.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let separation = gap(&lambda);
    if separation < tol {
        return Err(SpectralError::RepeatedRoots {
            gap: separation,
            tol,
        });
    }
    Ok(Spectrum { lambda, separation })
}

/// Roots of `lambda^n + sum_{i<n} a_i lambda^i` for n >= 2.
pub fn find_roots(a: &[f64]) -> Result<Spectrum, SpectralError> {
    if a.len() < 2 {
        return Err(SpectralError::Degree {
            min: 2,
            got: a.len(),
        });
    }
    real_simple_roots(a)
}

/// `i` is 1-based.
pub fn shift_spectrum(s: &Spectrum, i: usize) -> ShiftedSpectrum {
    assert!(i >= 1 && i <= s.lambda.len(), "root index out of range");
    let base = s.lambda[i - 1];
    let gamma = s
        .lambda
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != i - 1)
        .map(|(_, l)| l - base)
        .collect();
    ShiftedSpectrum::from_gamma(gamma, i)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Coefficients `(b_0, ..., b_{n-2})` of the linear part
/// `z^(n-1) + sum_{i=0}^{n-2} b_i z^(i)` of the reduced equation, with
/// `b_{i-1} = sum_{k=i}^{n} a_k C(k,i) mu^(k-i)` and `a_n = 1`.
pub fn reduced_linear_coefficients(a: &[f64], mu: f64) -> Vec<f64> {
    let n = a.len();
    let coeff = |k: usize| if k == n { 1.0 } else { a[k] };
    (1..n)
        .map(|i| {
            (i..=n)
                .map(|k| coeff(k) * binomial(k, i) * mu.powi((k - i) as i32))
                .sum()
        })
        .collect()
}

/// `pi_i = prod_{j != i} (lambda_j - lambda_i)`, i 1-based.
pub fn root_gap_product(s: &Spectrum, i: usize) -> f64 {
    let li = s.lambda[i - 1];
    s.lambda
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != i - 1)
        .map(|(_, l)| l - li)
        .product()
}

/// Vandermonde product `prod_{k<l} (lambda_l - lambda_k)`.
pub fn vandermonde_product(lambda: &[f64]) -> f64 {
    let mut p = 1.0;
    for k in 0..lambda.len() {
        for l in k + 1..lambda.len() {
            p *= lambda[l] - lambda[k];
        }
    }
    p
}

/// Monic coefficients (low to high, leading 1 omitted) of `prod (x - r_k)`.
pub fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (k, ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= r * ck;
        }
        c = next;
    }
    c.pop();
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cubic_roots() {
        let s = find_roots(&[-6.0, 11.0, -6.0]).unwrap();
        for (got, want) in s.lambda.iter().zip([3.0, 2.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(s.separation, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_quadratic() {
        let s = find_roots(&[-1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(s.lambda[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.lambda[1], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn quintic_from_expanded_factors() {
        let a = poly_from_roots(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(a, vec![-120.0, 274.0, -225.0, 85.0, -15.0]);
        let s = find_roots(&a).unwrap();
        for (got, want) in s.lambda.iter().zip([5.0, 4.0, 3.0, 2.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-8);
        }
    }

    #[test]
    fn rejects_bad_spectra() {
        assert!(matches!(
            find_roots(&[1.0, 0.0]),
            Err(SpectralError::ComplexRoots { .. })
        ));
        assert!(matches!(
            find_roots(&[1.0, -2.0]),
            Err(SpectralError::RepeatedRoots { .. }) | Err(SpectralError::ComplexRoots { .. })
        ));
        assert!(matches!(
            find_roots(&poly_from_roots(&[1.0, 1.0, 2.0])),
            Err(SpectralError::RepeatedRoots { .. }) | Err(SpectralError::ComplexRoots { .. })
        ));
        assert!(matches!(
            find_roots(&[1.0]),
            Err(SpectralError::Degree { .. })
        ));
        assert!(matches!(
            find_roots(&[f64::NAN, 1.0]),
            Err(SpectralError::NonFinite)
        ));
    }

    #[test]
    fn shifts_of_three_two_one() {
        let s = find_roots(&[-6.0, 11.0, -6.0]).unwrap();
        let expect = [
            (1, [-1.0, -2.0], 1),
            (2, [1.0, -1.0], 2),
            (3, [2.0, 1.0], 3),
        ];
        for (i, gamma, case) in expect {
            let sh = shift_spectrum(&s, i);
            assert_eq!(sh.case_index, case);
            assert_eq!(sh.base_index, i);
            for (g, w) in sh.gamma.iter().zip(gamma) {
                assert_abs_diff_eq!(*g, w, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn linear_coefficients() {
        let b = reduced_linear_coefficients(&[-6.0, 11.0, -6.0], 1.0);
        assert_eq!(b, vec![2.0, -3.0]);
        let b = reduced_linear_coefficients(&[-1.0, 0.0], 1.0);
        assert_eq!(b, vec![2.0]);
        let a = [0.3, -1.2, 2.5, 0.7];
        let b = reduced_linear_coefficients(&a, 0.0);
        assert_eq!(b, a[1..].to_vec());
    }

    #[test]
    fn gap_products() {
        let s = find_roots(&[-6.0, 11.0, -6.0]).unwrap();
        assert_abs_diff_eq!(root_gap_product(&s, 2), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vandermonde_product(&s.lambda), -2.0, epsilon = 1e-12);
    }
}
