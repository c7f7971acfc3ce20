//! Phase factors for the reflection form of QSP,
//! `prod_j e^{i phi_j Z} R(x)` with `R(x) = [[x, s], [s, -x]]`, `s = sqrt(1 - x^2)`.
//!
//! The solver works in the rotation form `e^{i psi_0 Z} prod_k W(x) e^{i psi_k Z}`
//! with `W(x) = [[x, i s], [i s, x]]`, using `R = -i e^{i pi/4 Z} W e^{i pi/4 Z}`:
//!
//! * `psi_0 = phi_1 + pi/4`
//! * `psi_k = phi_{k+1} + pi/2` for `1 <= k < d`
//! * `psi_d = pi/4`
//!
//! and the top-left entries differ by the factor `i^d`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::poly::{cheb, roots, Basis, Completion, Parity, Polynomial};
use crate::{Error, Result};

/// Pass threshold for [`verify_phases`] and the solver.
pub const PHASE_TOL: f64 = 1e-7;
/// Tolerance for the realizability checks run before solving.
pub const CONDITION_TOL: f64 = 1e-8;
/// Stripping results worse than this are refined by least squares.
const STRIP_TARGET: f64 = 1e-10;
const RESTARTS: usize = 6;
/// Root selections tried when the first complement strips poorly.
const COMPLEMENT_CHOICES: usize = 32;
const RESTART_SEED: u64 = 0x5eed;
/// Roots of the complement factor beyond this radius are treated as infinite.
const FAR_ROOT: f64 = 1e6;
/// Relative size of the complement-factor tail treated as rounding noise.
const TAIL_FLOOR: f64 = 1e-13;
/// Least-squares work budget, in units of `d^2` per iteration.
const LM_WORK: usize = 2_000_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

type Mat2 = [[Complex64; 2]; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSequence {
    phases: Vec<f64>,
}

/// Maps an angle into `(-pi, pi]`.
pub fn normalize_angle(phi: f64) -> f64 {
    let mut r = phi.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

impl PhaseSequence {
    pub fn new(phases: Vec<f64>) -> Self {
        Self { phases: phases.into_iter().map(normalize_angle).collect() }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// One angle per line with 17 significant digits.
    pub fn to_text(&self) -> String {
        self.phases.iter().map(|p| format!("{p:.16e}\n")).collect()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let phases = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.parse::<f64>().map_err(|e| Error::Parse(format!("`{l}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(phases))
    }
}

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

const IDENTITY: Mat2 = [[Complex64::new(1.0, 0.0), ZERO], [ZERO, Complex64::new(1.0, 0.0)]];

/// `e^{i phi Z} R(x)`.
fn layer(phi: f64, x: f64) -> Mat2 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let e = Complex64::from_polar(1.0, phi);
    let ec = e.conj();
    [[e * x, e * s], [ec * s, -ec * x]]
}

/// The full 2x2 product for real `x` in `[-1, 1]`.
pub fn reconstruct_matrix(phi: &PhaseSequence, x: f64) -> Mat2 {
    phi.phases.iter().fold(IDENTITY, |acc, &p| mul(&acc, &layer(p, x)))
}

/// Top-left entry of `prod_j e^{i phi_j Z} R(x)`.
pub fn reconstruct(phi: &PhaseSequence, x: f64) -> Complex64 {
    reconstruct_matrix(phi, x)[0][0]
}

/// `-phi`, which realizes the coefficient-wise conjugate polynomial.
pub fn conjugate_phases(phi: &PhaseSequence) -> PhaseSequence {
    PhaseSequence::new(phi.phases.iter().map(|p| -p).collect())
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub max_error: f64,
    /// Grid point attaining `max_error`.
    pub worst_x: f64,
    pub grid_size: usize,
    pub passed: bool,
}

/// Max `|reconstruct(phi, x) - P(x)|` over a Chebyshev-Lobatto grid (endpoints
/// included). The grid is enlarged to `len + 1` points if smaller.
pub fn verify_phases(phi: &PhaseSequence, p: &Polynomial, grid_size: usize) -> VerificationReport {
    let n = grid_size.max(phi.len() + 1).max(2);
    let (max_error, worst_x) = cheb::lobatto_nodes(n)
        .into_iter()
        .map(|x| ((reconstruct(phi, x) - p.eval_real(x)).norm(), x))
        .fold((0.0, 0.0), |best, cur| if cur.0 > best.0 { cur } else { best });
    VerificationReport { max_error, worst_x, grid_size: n, passed: max_error <= PHASE_TOL }
}

/// Number of layers: the stored length, since a polynomial whose leading
/// coefficients vanish may still need the full count.
fn qsp_degree(p: &Polynomial) -> usize {
    let d = p.nominal_degree();
    match p.parity() {
        Parity::Odd if d.is_multiple_of(2) => d + 1,
        Parity::Even if d % 2 == 1 => d - 1,
        _ => d,
    }
}

/// Checks realizability at sample points: definite parity matching the
/// degree, `|P| <= 1` on `[-1, 1]`, `|P| >= 1` outside, and for even degree
/// `P(it) P*(it) >= 1` on the imaginary axis.
pub fn check_qsp_conditions(p: &Polynomial) -> Result<()> {
    let d = qsp_degree(p);
    let p = p.to_chebyshev();
    if p.parity() != Parity::of_degree(d) || p.cross_parity_mass() > CONDITION_TOL {
        return Err(Error::QspCondition {
            condition: "parity",
            detail: format!("degree {d} needs parity {}, got {}", Parity::of_degree(d), p.parity()),
        });
    }
    let inside = p.sup_norm_on(-1.0, 1.0, 8 * d + 64).max(
        cheb::lobatto_nodes(4 * d + 16).into_iter().map(|x| p.eval_real(x).norm()).fold(0.0, f64::max),
    );
    if inside > 1.0 + CONDITION_TOL {
        return Err(Error::QspCondition {
            condition: "bounded on [-1, 1]",
            detail: format!("|P| reaches {inside:.12}"),
        });
    }
    for &x in &[1.0, 1.0001, 1.01, 1.1, -1.0, -1.0001, -1.01, -1.1] {
        let v = p.eval_real(x).norm();
        if v < 1.0 - CONDITION_TOL {
            return Err(Error::QspCondition {
                condition: "outside [-1, 1]",
                detail: format!("|P({x})| = {v:.12} < 1"),
            });
        }
    }
    if d.is_multiple_of(2) {
        let pc = p.conj();
        for &t in &[0.01, 0.1, 0.5, 1.0] {
            let z = Complex64::new(0.0, t);
            let v = p.eval(z) * pc.eval(z);
            if v.re < 1.0 - CONDITION_TOL || v.im.abs() > CONDITION_TOL {
                return Err(Error::QspCondition {
                    condition: "imaginary axis",
                    detail: format!("P(i{t}) P*(i{t}) = {v}"),
                });
            }
        }
    }
    Ok(())
}

/// Phases realizing `P` in the reflection form. The complementary polynomial
/// is found by factoring `(1 - P P*) / (1 - x^2)`.
pub fn find_phases(p: &Polynomial) -> Result<PhaseSequence> {
    check_qsp_conditions(p)?;
    let d = qsp_degree(p);
    let p = Polynomial::from_parts(
        p.to_chebyshev().with_len(d + 1).coeffs().to_vec(),
        Basis::Chebyshev,
        p.parity(),
    );
    solve(&p, None, d)
}

/// Phases for a completion that already carries its complement.
pub fn find_phases_for(completion: &Completion) -> Result<PhaseSequence> {
    let d = completion.degree();
    let p = completion.p.to_chebyshev().with_len(d + 1);
    let mut q = completion.q.clone();
    q.resize(d, ZERO);
    solve(&p, Some(q), d)
}

/// Strips with the given complement, then with alternative complements
/// (different root selections), and polishes the best by least squares.
fn solve(p: &Polynomial, q: Option<Vec<Complex64>>, d: usize) -> Result<PhaseSequence> {
    if d == 0 {
        let c = p.coeffs()[0];
        if (c - 1.0).norm() <= CONDITION_TOL {
            return Ok(PhaseSequence::new(Vec::new()));
        }
        return Err(Error::QspCondition {
            condition: "degree 0",
            detail: format!("an empty product realizes only P = 1, got {c}"),
        });
    }
    let grid = 4 * d;
    let attempt = |q: &[Complex64]| {
        let phi = strip(p.coeffs(), q, d);
        let err = verify_phases(&phi, p, grid).max_error;
        (phi, err)
    };
    let mut best = q.as_ref().map(|q| attempt(q));
    if best.as_ref().is_none_or(|b| b.1 > STRIP_TARGET) {
        let m = (d - 1 - (d - 1) % 2) / 2;
        let masks: Vec<u64> = if m <= 5 {
            (0..1u64 << m).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
            std::iter::once(0).chain((1..COMPLEMENT_CHOICES).map(|_| rng.random())).collect()
        };
        let alt = masks
            .into_par_iter()
            .filter_map(|mask| complementary_with(p, d, mask).ok().map(|q| attempt(&q)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        best = match (best, alt) {
            (Some(a), Some(b)) => Some(if b.1 < a.1 { b } else { a }),
            (a, b) => a.or(b),
        };
    }
    let (stripped, err) = best.ok_or_else(|| {
        Error::Factorization("no complementary polynomial could be constructed".into())
    })?;
    if err <= STRIP_TARGET {
        return Ok(stripped);
    }
    let refined = refine(&stripped, p);
    let refined_err = verify_phases(&refined, p, grid).max_error;
    let (best, best_err) = if refined_err < err { (refined, refined_err) } else { (stripped, err) };
    if best_err <= PHASE_TOL {
        Ok(best)
    } else {
        Err(Error::NoConvergence { residual: best_err })
    }
}

/// Layer stripping in the rotation form; `p` in the first-kind basis, `q` in
/// the second-kind basis, both for the reflection-form top-left entry.
fn strip(p: &[Complex64], q: &[Complex64], d: usize) -> PhaseSequence {
    let id = I.powu(d as u32);
    let mut pw: Vec<Complex64> = p.iter().map(|c| c * id).collect();
    // Rotate Q so that the outermost rotation comes out as pi/4.
    let lead_p = pw[d];
    let lead_q = q[d - 1];
    let align = if lead_p.norm() > 1e-300 && lead_q.norm() > 1e-300 {
        let r = lead_p / (I * lead_q);
        r / r.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut qw: Vec<Complex64> = q.iter().map(|c| c * align).collect();

    let mut psi = vec![0.0; d + 1];
    for k in (1..=d).rev() {
        let (pk, qk) = (pw[k], qw[k - 1]);
        psi[k] = if k == d {
            FRAC_PI_4
        } else if pk.norm() < 1e-300 && qk.norm() < 1e-300 {
            0.0
        } else {
            0.5 * (pk / qk).arg()
        };
        let e = Complex64::from_polar(1.0, psi[k]);
        let ec = e.conj();
        let xp = cheb::mul_x_t(&pw);
        let wq = cheb::one_minus_x2_u_to_t(&qw);
        let mut np: Vec<Complex64> = (0..k)
            .map(|i| ec * xp[i] + e * wq.get(i).copied().unwrap_or(ZERO))
            .collect();
        let xq = cheb::mul_x_u(&qw);
        let pu = cheb::t_to_u(&pw);
        let nq: Vec<Complex64> = (0..k - 1)
            .map(|i| e * xq[i] - ec * pu.get(i).copied().unwrap_or(ZERO))
            .collect();
        // enforce parity k - 1
        for (i, c) in np.iter_mut().enumerate() {
            if (i + k) % 2 == 0 {
                *c = ZERO;
            }
        }
        pw = np;
        qw = nq;
    }
    psi[0] = pw[0].arg();

    let mut phi = Vec::with_capacity(d);
    phi.push(psi[0] - FRAC_PI_4);
    for &p in &psi[1..d] {
        phi.push(p - FRAC_PI_2);
    }
    PhaseSequence::new(phi)
}

/// Builds `Q` (second-kind coefficients, parity `d - 1`) with
/// `|P|^2 + (1 - x^2)|Q|^2 = 1`, by factoring `C(y) = B(x) / x^(2e)` in
/// `y = x^2` where `B = (1 - P P*) / (1 - x^2)` and `e = (d - 1) mod 2`.
/// Each conjugate pair of roots of `C` contributes one root to `Q`; bit `i` of
/// `flips` selects the conjugate for pair `i`.
fn complementary_with(p: &Polynomial, d: usize, flips: u64) -> Result<Vec<Complex64>> {
    let e = (d - 1) % 2;
    let m = (d - 1 - e) / 2; // C has degree 2m in y
    let b = gap_over_one_minus_x2(p.coeffs());
    let c_at = |y: f64| cheb::clenshaw_u(&b, Complex64::new(y.sqrt(), 0.0)).re / y.powi(e as i32);
    let n = 4 * m + 8;
    // t in [-1, 1] maps to y = (1 + t) / 2
    let values: Vec<Complex64> =
        cheb::gauss_nodes(n).iter().map(|&t| Complex64::new(c_at(0.5 * (1.0 + t)), 0.0)).collect();
    let mut coeffs: Vec<f64> = cheb::interpolate_gauss(&values).iter().map(|c| c.re).take(2 * m + 1).collect();
    // Drop a rounding-level tail; |T_k| <= 1 bounds what it can change.
    let floor = TAIL_FLOOR * coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let mut dropped = 0.0;
    while let Some(&c) = coeffs.last() {
        if coeffs.len() == 1 || dropped + c.abs() > floor {
            break;
        }
        dropped += c.abs();
        coeffs.pop();
    }
    // A P of lower true degree leaves C with noise-level top coefficients and
    // roots near infinity. On [0, 1] those are constant factors the scale fit
    // absorbs, so Q just drops degree.
    let all: Vec<Complex64> = roots::chebyshev_roots(&coeffs)
        .into_iter()
        .map(|t| 0.5 * (1.0 + t))
        .filter(|r| r.is_finite() && r.norm() < FAR_ROOT)
        .collect();
    let need = all.len().div_ceil(2);
    let mut half = half_roots(all, need)?;
    for (i, r) in half.iter_mut().enumerate() {
        if i < 64 && flips >> i & 1 == 1 {
            *r = r.conj();
        }
    }

    let prod = |y: Complex64| half.iter().fold(Complex64::new(1.0, 0.0), |acc, r| acc * (y - r));
    // |c|^2 fitted against C at sample points
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..n {
        let y = 0.5 * (1.0 + cheb::gauss_nodes(n)[k]);
        let pr = prod(Complex64::new(y, 0.0)).norm_sqr();
        num += c_at(y) * pr;
        den += pr * pr;
    }
    if den == 0.0 || num <= 0.0 {
        // |P| = 1 on the whole interval, so Q = 0 completes it.
        return Ok(vec![ZERO; d]);
    }
    let scale = (num / den).sqrt();
    let nodes = cheb::gauss_nodes(d);
    let qv: Vec<Complex64> = nodes
        .iter()
        .map(|&x| scale * x.powi(e as i32) * prod(Complex64::new(x * x, 0.0)))
        .collect();
    let mut q_t = cheb::interpolate_gauss(&qv);
    for (i, c) in q_t.iter_mut().enumerate() {
        if i % 2 != e {
            *c = ZERO;
        }
    }
    let mut q_u = cheb::t_to_u(&q_t);
    q_u.resize(d, ZERO);
    Ok(q_u)
}

/// Second-kind coefficients of `(1 - P P*) / (1 - x^2)`, by exact division
/// of the first-kind coefficients of `1 - P P*`.
fn gap_over_one_minus_x2(p: &[Complex64]) -> Vec<Complex64> {
    let d = p.len() - 1;
    let mut f = vec![ZERO; 2 * d + 1];
    f[0] = Complex64::new(1.0, 0.0);
    for (a, &pa) in p.iter().enumerate() {
        for (b, &pb) in p.iter().enumerate() {
            let v = 0.5 * pa * pb.conj();
            f[a + b] -= v;
            f[a.abs_diff(b)] -= v;
        }
    }
    if d == 0 {
        return vec![ZERO];
    }
    // (1 - x^2) U_k = (T_k - T_{k+2}) / 2, solved from the top down
    let mut b = vec![ZERO; 2 * d + 1];
    for k in (2..=2 * d).rev() {
        b[k - 2] = b[k] - 2.0 * f[k];
    }
    b.truncate(2 * d - 1);
    b
}

/// One root from each conjugate pair; near-real roots are double and are
/// paired by position.
fn half_roots(all: Vec<Complex64>, need: usize) -> Result<Vec<Complex64>> {
    let real_tol = 1e-6;
    let (mut real, cplx): (Vec<Complex64>, Vec<Complex64>) =
        all.into_iter().partition(|r| r.im.abs() < real_tol);
    let mut half: Vec<Complex64> = cplx.into_iter().filter(|r| r.im > 0.0).collect();
    real.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    // A trimmed tail can leave one root of a far double pair on its own.
    for pair in real.chunks(2) {
        let mean = pair.iter().map(|r| r.re).sum::<f64>() / pair.len() as f64;
        half.push(Complex64::new(mean, 0.0));
    }
    if half.len() != need {
        return Err(Error::Factorization(format!(
            "complement factorization found {} factors, expected {need}",
            half.len()
        )));
    }
    Ok(half)
}

/// Levenberg-Marquardt on the complex residual at Chebyshev nodes, started
/// from `start` and from seeded perturbations of it, run in parallel.
fn refine(start: &PhaseSequence, p: &Polynomial) -> PhaseSequence {
    let d = start.len();
    let nodes = cheb::gauss_nodes(2 * d + 4);
    let targets: Vec<Complex64> = nodes.iter().map(|&x| p.eval_real(x)).collect();
    let mut starts = vec![start.phases.clone()];
    for r in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED + r as u64);
        let width = 0.05 * (r + 1) as f64;
        starts.push(start.phases.iter().map(|p| p + width * (rng.random::<f64>() - 0.5)).collect());
    }
    starts
        .into_par_iter()
        .map(|s| levenberg_marquardt(s, &nodes, &targets))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(phi, _)| PhaseSequence::new(phi))
        .unwrap()
}

/// Residuals (real and imaginary parts stacked) and optionally the Jacobian.
fn residuals(phi: &[f64], nodes: &[f64], targets: &[Complex64], jac: bool) -> (DVector<f64>, Option<DMatrix<f64>>) {
    let d = phi.len();
    let n = nodes.len();
    let mut r = DVector::zeros(2 * n);
    let mut j = if jac { Some(DMatrix::zeros(2 * n, d)) } else { None };
    let iz: Mat2 = [[I, ZERO], [ZERO, -I]];
    for (row, (&x, &t)) in nodes.iter().zip(targets).enumerate() {
        let layers: Vec<Mat2> = phi.iter().map(|&p| layer(p, x)).collect();
        let mut prefix = Vec::with_capacity(d + 1);
        prefix.push(IDENTITY);
        for l in &layers {
            let next = mul(prefix.last().unwrap(), l);
            prefix.push(next);
        }
        let diff = prefix[d][0][0] - t;
        r[2 * row] = diff.re;
        r[2 * row + 1] = diff.im;
        if let Some(jm) = j.as_mut() {
            let mut suffix = IDENTITY;
            for k in (0..d).rev() {
                let dk = mul(&mul(&prefix[k], &iz), &mul(&layers[k], &suffix));
                jm[(2 * row, k)] = dk[0][0].re;
                jm[(2 * row + 1, k)] = dk[0][0].im;
                suffix = mul(&layers[k], &suffix);
            }
        }
    }
    (r, j)
}

fn levenberg_marquardt(mut phi: Vec<f64>, nodes: &[f64], targets: &[Complex64]) -> (Vec<f64>, f64) {
    let d = phi.len();
    let (mut r, _) = residuals(&phi, nodes, targets, false);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let iters = (LM_WORK / (d * d).max(1)).clamp(50, 20_000);
    for _ in 0..iters {
        if cost < 1e-28 {
            break;
        }
        let (_, jac) = residuals(&phi, nodes, targets, true);
        let jac = jac.unwrap();
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &r;
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for i in 0..d {
                a[(i, i)] += lambda;
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let cand: Vec<f64> = phi.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
            let (rc, _) = residuals(&cand, nodes, targets, false);
            let cc = rc.norm_squared();
            if cc < cost {
                phi = cand;
                r = rc;
                cost = cc;
                lambda = (lambda / 3.0).max(1e-20);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (phi, cost)
}
