//! Completion of a real polynomial to a complex one realizable by QSP.
//!
//! With `x = cos(t)`, the target is `g(t) = sum_j h_j e^{i(2j-d)t}` with
//! `|g|^2 = 1 - P_R(cos t)^2`. Writing `u = e^{2it}` turns this into a
//! Fejer-Riesz factorization `|h(u)|^2 = A(u)` on the unit circle. The even
//! part of `g` gives the imaginary part of `P` and the odd part gives a real
//! second-kind series `Q` with `|P|^2 + (1 - x^2) Q^2 = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{cheb, roots, Basis, Parity, Polynomial};
use crate::{Error, Result};

/// Highest degree for which the companion-matrix path is tried first.
const ROOT_PATH_MAX_DEGREE: usize = 60;
/// Identity residual accepted after factorization.
const IDENTITY_TOL: f64 = 1e-9;
/// The cepstral path needs `1 - P_R^2` bounded away from zero.
const CEPSTRAL_MIN_GAP: f64 = 1e-8;
const MAX_FFT_LEN: usize = 1 << 22;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A complex `P` (first-kind Chebyshev coefficients) together with a
/// complementary `Q` (second-kind coefficients) satisfying
/// `|P(x)|^2 + (1 - x^2)|Q(x)|^2 = 1` on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct Completion {
    pub p: Polynomial,
    /// `Q = sum_k q[k] U_k`, of parity opposite to `P`. Empty when `P` has degree 0.
    pub q: Vec<Complex64>,
}

impl Completion {
    pub fn degree(&self) -> usize {
        self.p.nominal_degree()
    }

    pub fn eval_q(&self, x: Complex64) -> Complex64 {
        cheb::clenshaw_u(&self.q, x)
    }

    /// Max of `| |P|^2 + (1 - x^2)|Q|^2 - 1 |` over a Chebyshev-Lobatto grid.
    pub fn identity_residual(&self, points: usize) -> f64 {
        cheb::lobatto_nodes(points)
            .into_iter()
            .map(|x| {
                let xc = Complex64::new(x, 0.0);
                let p = self.p.eval(xc).norm_sqr();
                let q = self.eval_q(xc).norm_sqr();
                (p + (1.0 - x * x) * q - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

pub fn complete_to_complex(p_r: &Polynomial) -> Result<Polynomial> {
    complete_with_complement(p_r).map(|c| c.p)
}

/// Returns `P = P_R + i P_I` with the same parity and degree as `P_R`, plus
/// its real complement `Q`.
pub fn complete_with_complement(p_r: &Polynomial) -> Result<Completion> {
    if !p_r.is_real() {
        return Err(Error::InvalidParameter("completion needs a real polynomial".into()));
    }
    if p_r.parity() == Parity::None {
        return Err(Error::InvalidParameter("completion needs definite parity".into()));
    }
    let cheb_form = p_r.to_chebyshev();
    let mut d = cheb_form.degree();
    if Parity::of_degree(d) != p_r.parity() {
        d += 1;
    }
    let c: Vec<f64> = (0..=d)
        .map(|k| cheb_form.coeffs().get(k).map_or(0.0, |v| v.re))
        .collect();
    let sup = cheb::lobatto_nodes(8 * d + 16)
        .into_iter()
        .map(|x| cheb::clenshaw(&to_complex(&c), Complex64::new(x, 0.0)).norm())
        .fold(0.0, f64::max);
    if sup > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "|P_R| reaches {sup:.6} on [-1, 1]; completion needs |P_R| <= 1"
        )));
    }

    let a = laurent_gap(&c);
    let cepstral_ok = 1.0 - sup * sup >= CEPSTRAL_MIN_GAP;
    let by_roots = || factor_by_roots(&a, d).and_then(|h| assemble(&c, &h, d, p_r.parity()));
    let by_cepstrum = || factor_cepstral(&c, d).and_then(|h| assemble(&c, &h, d, p_r.parity()));
    // Companion roots lose accuracy when the coefficients of 1 - P_R^2 span
    // many decades (fast-decaying series), so each path falls back on the other.
    if d <= ROOT_PATH_MAX_DEGREE || !cepstral_ok {
        match by_roots() {
            Err(e) if cepstral_ok => by_cepstrum().map_err(|_| e),
            r => r,
        }
    } else {
        by_cepstrum().or_else(|e| by_roots().map_err(|_| e))
    }
}

/// Builds `P` and `Q` from the outer factor `h` and checks the identity.
fn assemble(c: &[f64], h: &[f64], d: usize, parity: Parity) -> Result<Completion> {
    let mut p = vec![ZERO; d + 1];
    for (k, &ck) in c.iter().enumerate() {
        p[k].re = ck;
    }
    let mut q = vec![ZERO; d];
    for (j, &hj) in h.iter().enumerate() {
        let freq = 2 * j as i64 - d as i64;
        let k = freq.unsigned_abs() as usize;
        p[k].im += hj;
        if k > 0 {
            q[k - 1].re += freq.signum() as f64 * hj;
        }
    }
    let completion = Completion { p: Polynomial::from_parts(p, Basis::Chebyshev, parity), q };
    let residual = completion.identity_residual(4 * d + 16);
    if residual > IDENTITY_TOL {
        return Err(Error::Factorization(format!(
            "spectral factor misses the unit-modulus identity by {residual:.3e} at degree {d}"
        )));
    }
    Ok(completion)
}

fn to_complex(c: &[f64]) -> Vec<Complex64> {
    c.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Coefficients `a_m`, `m = -d..=d` (stored at `m + d`), of
/// `1 - P_R(cos t)^2` as a Laurent polynomial in `u = e^{2it}`.
fn laurent_gap(c: &[f64]) -> Vec<f64> {
    let d = c.len() - 1;
    // P_R(cos t) = sum_k b_k e^{ikt}, k = -d..=d
    let mut b = vec![0.0; 2 * d + 1];
    for (k, &ck) in c.iter().enumerate() {
        if k == 0 {
            b[d] += ck;
        } else {
            b[d + k] += 0.5 * ck;
            b[d - k] += 0.5 * ck;
        }
    }
    let mut sq = vec![0.0; 4 * d + 1];
    for (i, &bi) in b.iter().enumerate() {
        if bi == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            sq[i + j] += bi * bj;
        }
    }
    // frequency 2m sits at index 2m + 2d
    let mut a: Vec<f64> = (0..=2 * d).map(|i| -sq[2 * i]).collect();
    a[d] += 1.0;
    a
}

fn factor_by_roots(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::Factorization("1 - P_R^2 vanishes identically".into()));
    }
    let tol = 1e-14 * scale;
    let zeros_at_origin = a.iter().take_while(|v| v.abs() <= tol).count();
    let end = a.iter().rposition(|v| v.abs() > tol).unwrap() + 1;
    let middle = &a[zeros_at_origin..end];
    let mut chosen: Vec<Complex64> = vec![ZERO; zeros_at_origin.min(d)];
    let need = d - chosen.len();
    let all = roots::monomial_roots(middle);
    chosen.extend(select_inner_roots(all, need, middle)?);

    // h(u) = c prod (u - r_j), with c fitted against A on the circle.
    let mut monic = vec![Complex64::new(1.0, 0.0)];
    for r in &chosen {
        let mut next = vec![ZERO; monic.len() + 1];
        for (k, &m) in monic.iter().enumerate() {
            next[k + 1] += m;
            next[k] -= m * r;
        }
        monic = next;
    }
    let samples = 4 * d + 8;
    let (mut num, mut den) = (0.0, 0.0);
    for s in 0..samples {
        let u = Complex64::from_polar(1.0, 2.0 * PI * (s as f64 + 0.25) / samples as f64);
        let pi2 = monic.iter().rev().fold(ZERO, |acc, &m| acc * u + m).norm_sqr();
        let av = a
            .iter()
            .enumerate()
            .map(|(i, &ai)| ai * u.powi(i as i32 - d as i32))
            .sum::<Complex64>()
            .re;
        num += av * pi2;
        den += pi2 * pi2;
    }
    if den == 0.0 || num <= 0.0 {
        return Err(Error::Factorization("could not fit the spectral factor scale".into()));
    }
    let c = (num / den).sqrt();
    Ok(monic.iter().map(|m| c * m.re).collect())
}

/// Picks `need` roots forming one half of each reciprocal pair `(r, 1/conj r)`.
/// Roots on the unit circle are double; those are paired by angle.
fn select_inner_roots(all: Vec<Complex64>, need: usize, coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let near_tol = 1e-5;
    let (mut circle, off): (Vec<Complex64>, Vec<Complex64>) =
        all.into_iter().partition(|r| (r.norm() - 1.0).abs() < near_tol);
    let mut inner: Vec<Complex64> = off.into_iter().filter(|r| r.norm() < 1.0).collect();
    circle.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
    if circle.len() % 2 == 1 {
        // An unpaired circle root is really a close-but-off pair partner.
        let (idx, _) = circle
            .iter()
            .enumerate()
            .fold((0, f64::MAX), |(bi, bd), (i, r)| {
                let dist = (r.norm() - 1.0).abs();
                if dist < bd { (i, dist) } else { (bi, bd) }
            });
        let r = circle.remove(idx);
        if r.norm() < 1.0 {
            inner.push(r);
        }
    }
    // Pairs may straddle the +-pi cut: rotate so the largest gap is at the end.
    if circle.len() >= 2 {
        let n = circle.len();
        let gaps: Vec<f64> = (0..n)
            .map(|i| {
                let next = circle[(i + 1) % n].arg() + if i + 1 == n { 2.0 * PI } else { 0.0 };
                next - circle[i].arg()
            })
            .collect();
        let widest = gaps
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |(bi, bg), (i, &g)| if g > bg { (i, g) } else { (bi, bg) })
            .0;
        circle.rotate_left((widest + 1) % n);
    }
    for pair in circle.chunks(2) {
        if pair.len() == 2 {
            let mid = polish_double_root(0.5 * (pair[0] + pair[1]), coeffs);
            inner.push(mid / mid.norm());
        }
    }
    if inner.len() != need {
        return Err(Error::Factorization(format!(
            "root splitting found {} factors, expected {need}; roots cluster beyond double precision, \
             reduce the degree",
            inner.len()
        )));
    }
    Ok(inner)
}

/// A double root is a simple root of the derivative; refine it there.
fn polish_double_root(mut z: Complex64, coeffs: &[f64]) -> Complex64 {
    let eval = |z: Complex64, order: usize| {
        coeffs
            .iter()
            .enumerate()
            .skip(order)
            .rev()
            .fold(ZERO, |acc, (k, &c)| {
                let falling = (0..order).map(|i| (k - i) as f64).product::<f64>();
                acc * z + c * falling
            })
    };
    let mut d1 = eval(z, 1);
    for _ in 0..6 {
        let d2 = eval(z, 2);
        if d2.norm() == 0.0 {
            break;
        }
        let cand = z - d1 / d2;
        let dc = eval(cand, 1);
        if dc.norm() >= d1.norm() {
            break;
        }
        z = cand;
        d1 = dc;
    }
    z
}

/// Outer spectral factor from the cepstrum of `1 - P_R^2`.
fn factor_cepstral(c: &[f64], d: usize) -> Result<Vec<f64>> {
    let cc = to_complex(c);
    let mut n = (8 * (d + 1)).max(1024).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    loop {
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut buf: Vec<Complex64> = (0..n)
            .map(|k| {
                let t = PI * k as f64 / n as f64;
                let pr = cheb::clenshaw(&cc, Complex64::new(t.cos(), 0.0)).re;
                Complex64::new((1.0 - pr * pr).ln(), 0.0)
            })
            .collect();
        fwd.process(&mut buf);
        let inv_n = 1.0 / n as f64;
        for (m, v) in buf.iter_mut().enumerate() {
            *v *= match m {
                0 => 0.5 * inv_n,
                m if m < n / 2 => inv_n,
                _ => 0.0,
            };
        }
        inv.process(&mut buf);
        for v in buf.iter_mut() {
            *v = v.exp();
        }
        fwd.process(&mut buf);
        let h: Vec<f64> = buf.iter().map(|v| v.re * inv_n).collect();
        let head = h[..=d].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tail = h[d + 1..n / 2].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if tail <= 1e-14 * head.max(1.0) {
            return Ok(h[..=d].to_vec());
        }
        if n >= MAX_FFT_LEN {
            return Err(Error::Factorization(format!(
                "cepstral factor did not converge (tail {tail:.3e} at length {n}); \
                 1 - P_R^2 is too close to zero for double precision"
            )));
        }
        n *= 2;
    }
}
