//! Truncated arcsin series and the erf-based sign approximant.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::erf::erfc_inv;

use super::{Basis, Parity, Polynomial};
use crate::{Error, Result};

pub const DEFAULT_MAX_DEGREE: usize = 10_000;

const SUP_GRID: usize = 2001;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// `arcsin(x) / pi` on `[-1 + delta, 1 - delta]`.
    ArcsinOverPi,
    /// `sign(x)` for `|x| >= Delta`.
    Sign,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproximationSpec {
    pub target: Target,
    /// Sup-norm target (arcsin) or failure budget `delta` (sign).
    pub epsilon: f64,
    /// Distance from `±1` (arcsin) or the threshold `Delta` (sign).
    pub delta_margin: f64,
    /// Resolved degree.
    pub degree: usize,
}

#[derive(Clone, Debug)]
pub struct Approximation {
    pub polynomial: Polynomial,
    pub spec: ApproximationSpec,
    /// Set when the construction divided by a constant to keep `|P| <= 1`.
    pub rescaled_by: Option<f64>,
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {v}")))
    }
}

/// Coefficient of `x^(2k+1)` in the Taylor series of `arcsin(x) / pi`.
pub fn arcsin_taylor_coefficient(k: usize) -> f64 {
    // binom(2k, k) / 4^k by the ratio (2j + 1) / (2j + 2)
    let central = (0..k).fold(1.0, |b, j| b * (2 * j + 1) as f64 / (2 * j + 2) as f64);
    central / ((2 * k + 1) as f64 * PI)
}

pub fn arcsin_taylor(epsilon: f64, delta: f64) -> Result<Approximation> {
    arcsin_taylor_with_limit(epsilon, delta, DEFAULT_MAX_DEGREE)
}

/// Truncates the Taylor series of `arcsin(x)/pi` at the first odd degree whose
/// tail is at most `epsilon` on `[-1 + delta, 1 - delta]`.
pub fn arcsin_taylor_with_limit(epsilon: f64, delta: f64, max_degree: usize) -> Result<Approximation> {
    check_unit_interval("epsilon", epsilon)?;
    check_unit_interval("delta", delta)?;
    let r = 1.0 - delta;
    let r2 = r * r;
    // Coefficients decrease in k, so the tail after term K is bounded by a
    // geometric series started at term K + 1.
    let mut k = 0usize;
    let mut a_next = arcsin_taylor_coefficient(1);
    let mut r_pow = r.powi(3);
    loop {
        let tail = a_next * r_pow / (1.0 - r2);
        if tail <= epsilon {
            break;
        }
        k += 1;
        a_next *= (2 * k + 1) as f64 / (2 * k + 2) as f64 * (2 * k + 1) as f64 / (2 * k + 3) as f64;
        r_pow *= r2;
        if 2 * k + 1 > 100 * DEFAULT_MAX_DEGREE.max(max_degree) {
            break;
        }
    }
    let degree = 2 * k + 1;
    if degree > max_degree {
        return Err(Error::DegreeOverflow { needed: degree, limit: max_degree });
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); degree + 1];
    for j in 0..=k {
        coeffs[2 * j + 1] = Complex64::new(arcsin_taylor_coefficient(j), 0.0);
    }
    let poly = Polynomial::from_parts(coeffs, Basis::Monomial, Parity::Odd);
    let (polynomial, rescaled_by) = cap_overshoot(poly, epsilon);
    Ok(Approximation {
        polynomial,
        spec: ApproximationSpec { target: Target::ArcsinOverPi, epsilon, delta_margin: delta, degree },
        rescaled_by,
    })
}

/// Divides by `1 + epsilon` when the sup-norm on `[-1, 1]` overshoots 1.
fn cap_overshoot(poly: Polynomial, epsilon: f64) -> (Polynomial, Option<f64>) {
    let sup = poly.sup_norm_on(-1.0, 1.0, SUP_GRID).max(poly.eval_real(1.0).norm());
    if sup > 1.0 {
        let factor = (1.0 + epsilon).max(sup);
        (poly.scale(Complex64::new(1.0 / factor, 0.0)), Some(factor))
    } else {
        (poly, None)
    }
}

pub fn sign_approx(threshold: f64, delta: f64) -> Result<Approximation> {
    sign_approx_with_limit(threshold, delta, DEFAULT_MAX_DEGREE)
}

/// Odd polynomial with `|P| <= 1` on `[-1, 1]` and `P(x) >= 1 - delta/2` for
/// `x >= threshold`.
///
/// Built from the Chebyshev expansion of `erf(k x)`, with `k` chosen so that
/// `erf(k * threshold) >= 1 - delta/4`. The series is cut once the absolute
/// tail drops below `delta^2 / 8`, and the result is divided by
/// `1 + delta/4`. Those two budgets together give
/// `P(threshold) >= (1 - delta/4 - delta^2/8) / (1 + delta/4) >= 1 - delta/2`.
pub fn sign_approx_with_limit(threshold: f64, delta: f64, max_degree: usize) -> Result<Approximation> {
    check_unit_interval("Delta", threshold)?;
    check_unit_interval("delta", delta)?;
    let k = erfc_inv(delta / 4.0) / threshold;
    let z = 0.5 * k * k;
    let scaled = scaled_bessel_i(z);
    let c = 2.0 * k / PI.sqrt();
    // a[j] multiplies T_{2j+1}
    let a: Vec<f64> = (0..scaled.len() - 1)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            c * sign * (scaled[j] + scaled[j + 1]) / (2 * j + 1) as f64
        })
        .collect();
    let budget = delta * delta / 8.0;
    let mut tail = 0.0;
    let mut cut = a.len();
    for j in (0..a.len()).rev() {
        if tail + a[j].abs() > budget {
            cut = j + 1;
            break;
        }
        tail += a[j].abs();
    }
    let degree = 2 * cut - 1;
    if degree > max_degree {
        return Err(Error::DegreeOverflow { needed: degree, limit: max_degree });
    }
    let factor = 1.0 + delta / 4.0;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); degree + 1];
    for (j, &aj) in a.iter().enumerate().take(cut) {
        coeffs[2 * j + 1] = Complex64::new(aj / factor, 0.0);
    }
    Ok(Approximation {
        polynomial: Polynomial::from_parts(coeffs, Basis::Chebyshev, Parity::Odd),
        spec: ApproximationSpec { target: Target::Sign, epsilon: delta, delta_margin: threshold, degree },
        rescaled_by: Some(factor),
    })
}

/// `exp(-z) I_j(z)` for `j = 0..J`, with `J` large enough that the last
/// entries are negligible. Miller's backward recurrence normalised by
/// `I_0 + 2 sum_j I_j = exp(z)`.
fn scaled_bessel_i(z: f64) -> Vec<f64> {
    let start = ((100.0 * z.max(1.0)).sqrt() * 1.5 + 40.0).ceil() as usize;
    let mut vals = vec![0.0f64; start + 2];
    vals[start] = 1e-300;
    for j in (1..=start).rev() {
        vals[j - 1] = vals[j + 1] + (2.0 * j as f64 / z) * vals[j];
        if vals[j - 1] > 1e250 {
            for v in vals.iter_mut().skip(j - 1) {
                *v *= 1e-250;
            }
        }
    }
    let norm = vals[0] + 2.0 * vals[1..].iter().sum::<f64>();
    vals.iter_mut().for_each(|v| *v /= norm);
    vals.truncate(start + 1);
    vals
}
