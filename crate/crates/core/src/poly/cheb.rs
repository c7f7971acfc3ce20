//! Chebyshev-basis helpers shared by the approximation, completion and
//! phase-finding code.

use std::f64::consts::PI;

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Clenshaw evaluation of `sum c_k T_k(x)`.
pub fn clenshaw(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    let mut b1 = ZERO;
    let mut b2 = ZERO;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(ZERO) + x * b1 - b2
}

/// Clenshaw for the second-kind series `sum c_k U_k(x)`.
pub fn clenshaw_u(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    let mut b1 = ZERO;
    let mut b2 = ZERO;
    for &c in coeffs.iter().rev() {
        let b0 = c + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// `x * sum c_k T_k`, one degree higher.
pub fn mul_x_t(c: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; c.len() + 1];
    for (k, &ck) in c.iter().enumerate() {
        if k == 0 {
            out[1] += ck;
        } else {
            out[k + 1] += 0.5 * ck;
            out[k - 1] += 0.5 * ck;
        }
    }
    out
}

/// `x * sum c_k U_k`, one degree higher.
pub fn mul_x_u(c: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; c.len() + 1];
    for (k, &ck) in c.iter().enumerate() {
        out[k + 1] += 0.5 * ck;
        if k > 0 {
            out[k - 1] += 0.5 * ck;
        }
    }
    out
}

/// `(1 - x^2) * sum c_k U_k` expressed in the first-kind basis.
pub fn one_minus_x2_u_to_t(c: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; c.len() + 2];
    for (k, &ck) in c.iter().enumerate() {
        out[k] += 0.5 * ck;
        out[k + 2] -= 0.5 * ck;
    }
    out
}

/// Re-expresses a first-kind series in the second-kind basis.
pub fn t_to_u(c: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; c.len().max(1)];
    for (k, &ck) in c.iter().enumerate() {
        match k {
            0 => out[0] += ck,
            1 => out[1] += 0.5 * ck,
            _ => {
                out[k] += 0.5 * ck;
                out[k - 2] -= 0.5 * ck;
            }
        }
    }
    out
}

pub fn monomial_to_chebyshev(m: &[Complex64]) -> Vec<Complex64> {
    let mut acc: Vec<Complex64> = vec![ZERO];
    for &mk in m.iter().rev() {
        acc = mul_x_t(&acc);
        acc[0] += mk;
    }
    acc.truncate(m.len().max(1));
    acc
}

pub fn chebyshev_to_monomial(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len();
    let mut out = vec![ZERO; n.max(1)];
    // Monomial coefficients of T_{k-1} and T_k.
    let mut prev = vec![0.0f64; n + 1];
    let mut cur = vec![0.0f64; n + 1];
    prev[0] = 1.0;
    cur[1] = 1.0;
    for (k, &ck) in c.iter().enumerate() {
        let basis = match k {
            0 => &prev,
            _ => &cur,
        };
        for (j, &b) in basis.iter().enumerate().take(n) {
            out[j] += ck * b;
        }
        if k >= 1 {
            let mut next = vec![0.0f64; n + 1];
            for j in 0..n {
                next[j + 1] += 2.0 * cur[j];
            }
            for j in 0..=n {
                next[j] -= prev[j];
            }
            prev = std::mem::replace(&mut cur, next);
        }
    }
    out
}

/// Chebyshev-Gauss nodes `cos(pi (j + 1/2) / n)`, descending.
pub fn gauss_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| (PI * (j as f64 + 0.5) / n as f64).cos()).collect()
}

/// Chebyshev-Lobatto points `cos(pi j / (n - 1))`, including both endpoints.
pub fn lobatto_nodes(n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![1.0];
    }
    (0..n).map(|j| (PI * j as f64 / (n - 1) as f64).cos()).collect()
}

/// First-kind coefficients of the degree `n - 1` interpolant through values
/// sampled at [`gauss_nodes`]`(n)`.
pub fn interpolate_gauss(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let table: Vec<f64> = (0..4 * n).map(|m| (PI * m as f64 / (2 * n) as f64).cos()).collect();
    (0..n)
        .map(|k| {
            let sum: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, &v)| v * table[(k * (2 * j + 1)) % (4 * n)])
                .sum();
            let w = if k == 0 { 1.0 } else { 2.0 };
            sum * (w / n as f64)
        })
        .collect()
}
