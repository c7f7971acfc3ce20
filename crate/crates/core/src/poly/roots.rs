//! Polynomial root finding through companion-type eigenvalue problems,
//! refined by simultaneous Aberth iteration on the original coefficients.
//!
//! The eigenvalues alone are not enough once the coefficients span many
//! decades: the companion matrix is then badly scaled and clusters of roots
//! outside the interpolation interval come out displaced. Aberth steps use
//! only stable evaluations of the polynomial and keep the estimates apart.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::cheb;

const ABERTH_STEPS: usize = 80;

fn trim(coeffs: &[f64]) -> &[f64] {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let end = coeffs
        .iter()
        .rposition(|c| c.abs() > 1e-15 * scale)
        .map_or(0, |i| i + 1);
    &coeffs[..end]
}

/// All complex roots of `sum m_k x^k`.
pub fn monomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let c = trim(coeffs);
    if c.len() < 2 {
        return Vec::new();
    }
    let n = c.len() - 1;
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for k in 0..n {
        m[(k, n - 1)] = -c[k] / lead;
    }
    let poly: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let deriv: Vec<Complex64> = poly
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &v)| v * k as f64)
        .collect();
    let horner = |p: &[Complex64], z: Complex64| {
        p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &v| acc * z + v)
    };
    aberth(m.complex_eigenvalues().iter().copied().collect(), |z| horner(&poly, z), |z| horner(&deriv, z))
}

/// All complex roots of `sum c_k T_k(t)` via the colleague matrix.
pub fn chebyshev_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let c = trim(coeffs);
    if c.len() < 2 {
        return Vec::new();
    }
    let n = c.len() - 1;
    if n == 1 {
        return vec![Complex64::new(-c[0] / c[1], 0.0)];
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    m[(0, 1)] = 1.0;
    for i in 1..n - 1 {
        m[(i, i - 1)] = 0.5;
        m[(i, i + 1)] = 0.5;
    }
    m[(n - 1, n - 2)] += 0.5;
    for k in 0..n {
        m[(n - 1, k)] -= c[k] / (2.0 * c[n]);
    }
    let poly: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let deriv = chebyshev_derivative(&poly);
    aberth(
        m.complex_eigenvalues().iter().copied().collect(),
        |z| cheb::clenshaw(&poly, z),
        |z| cheb::clenshaw(&deriv, z),
    )
}

fn chebyshev_derivative(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len();
    if n < 2 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    let mut d = vec![Complex64::new(0.0, 0.0); n + 1];
    for k in (1..n).rev() {
        d[k - 1] = d[k + 1] + 2.0 * k as f64 * c[k];
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d
}

/// Aberth-Ehrlich iteration from the given estimates. A root stops moving
/// once its correction drops to rounding level.
fn aberth(
    mut z: Vec<Complex64>,
    f: impl Fn(Complex64) -> Complex64,
    df: impl Fn(Complex64) -> Complex64,
) -> Vec<Complex64> {
    let n = z.len();
    let mut done = vec![false; n];
    for _ in 0..ABERTH_STEPS {
        let mut moved = false;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let fz = f(z[k]);
            if fz.norm() == 0.0 {
                done[k] = true;
                continue;
            }
            let w = fz / df(z[k]);
            let repel: Complex64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let step = w / (1.0 - w * repel);
            if !step.is_finite() {
                done[k] = true;
                continue;
            }
            z[k] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[k].norm().max(1.0) {
                done[k] = true;
            } else {
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    z
}
