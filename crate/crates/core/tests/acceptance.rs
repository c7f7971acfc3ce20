//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed; the
//! process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qsp_stateprep::amplify::{amplify_state, plan_amplification, post_select};
use qsp_stateprep::block::{extract_block, qsvt_circuit, sine_block_encoding};
use qsp_stateprep::oracle::{ancilla_leakage, phase_unitary, phase_unitary_direct, AmplitudeOracle, Distribution};
use qsp_stateprep::phases::{find_phases, reconstruct, PhaseSequence};
use qsp_stateprep::pipeline::{grover_case, prepare_state, PrepConfig, CHECK_GAMMA, CHECK_PREMISE, CHECK_SQRT, CHECK_STATE};
use qsp_stateprep::poly::{arcsin_taylor, complete_to_complex, Basis, Parity, Polynomial};
use qsp_stateprep::sim::{circuit_unitary, fidelity, op_dist, Gate, Layout, StateVector, UnitaryMatrix};

type Outcome = Result<String, String>;

/// Name, check and time budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn data(n: usize) -> Layout {
    Layout::single("data", n)
}

fn random_h(rng: &mut ChaCha8Rng, n: usize, bound: f64) -> Vec<f64> {
    (0..1 << n).map(|_| bound * (2.0 * rng.random::<f64>() - 1.0)).collect()
}

fn diag_unitary(h: &[f64]) -> UnitaryMatrix {
    let n = h.len().trailing_zeros() as usize;
    let d = DVector::from_iterator(h.len(), h.iter().map(|&v| Complex64::from_polar(1.0, PI * v)));
    UnitaryMatrix::new(DMatrix::from_diagonal(&d), data(n)).unwrap()
}

fn diag(v: impl Iterator<Item = Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_diagonal(&DVector::from_iterator(v.size_hint().0, v))
}

fn random_phases(rng: &mut ChaCha8Rng, d: usize) -> PhaseSequence {
    PhaseSequence::new((0..d).map(|_| PI * (2.0 * rng.random::<f64>() - 1.0)).collect())
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sine_encoding() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let n = 1 + k % 4;
        let h = random_h(&mut rng, n, 1.0);
        let be = sine_block_encoding(&diag_unitary(&h)).map_err(|e| e.to_string())?;
        let want = diag(h.iter().map(|&v| Complex64::new((PI * v).sin(), 0.0)));
        worst = worst.max(op_dist(&extract_block(&be), &want).unwrap());
    }
    ensure(worst <= 1e-10, format!("worst block distance {worst:.2e}"))
}

/// Degree over `ln(1/eps)` must stay below `1/delta` at every `eps`: the
/// Taylor tail shrinks like `(1 - delta)^d`, so `1/delta` bounds the ratio
/// for all precisions.
fn arcsin_approximation() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for delta in [0.1, 0.29] {
        let mut worst_ratio = 0.0f64;
        for eps in [1e-2, 1e-4, 1e-6] {
            let a = arcsin_taylor(eps, delta).map_err(|e| e.to_string())?;
            let grid = 20_000;
            let err = (0..=grid)
                .map(|k| {
                    let x = -1.0 + delta + 2.0 * (1.0 - delta) * k as f64 / grid as f64;
                    (a.polynomial.eval_real(x) - x.asin() / PI).norm()
                })
                .fold(0.0, f64::max);
            ok &= err <= eps;
            worst_ratio = worst_ratio.max(a.spec.degree as f64 / (1.0 / eps).ln());
            notes.push(format!("d={} err={err:.1e}", a.spec.degree));
        }
        ok &= worst_ratio <= 1.0 / delta;
        notes.push(format!("delta={delta} max d/ln(1/eps) {worst_ratio:.2}"));
    }
    ensure(ok, notes.join(", "))
}

/// Chebyshev coefficients of the degree-`d` interpolant through Gauss nodes.
fn chebyshev_fit(f: impl Fn(f64) -> Complex64, d: usize) -> Vec<Complex64> {
    let n = d + 1;
    let nodes: Vec<f64> = (0..n).map(|j| (PI * (j as f64 + 0.5) / n as f64).cos()).collect();
    let vals: Vec<Complex64> = nodes.iter().map(|&x| f(x)).collect();
    (0..n)
        .map(|k| {
            let s: Complex64 = (0..n).map(|j| vals[j] * (k as f64 * PI * (j as f64 + 0.5) / n as f64).cos()).sum();
            s * if k == 0 { 1.0 / n as f64 } else { 2.0 / n as f64 }
        })
        .collect()
}

fn qsp_reconstruction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for k in 0..20 {
        // Odd instances: random real targets up to degree 60, completed to a
        // full QSP pair. Even instances: products of random phases. Their
        // coefficients decay geometrically, so past degree ~15 the complement
        // drowns in rounding noise; they are kept to degree 12.
        let d = if k % 2 == 0 { rng.random_range(1..=12) } else { rng.random_range(1..=60) };
        let parity = Parity::of_degree(d);
        let p = if k % 2 == 0 {
            let truth = random_phases(&mut rng, d);
            let c = chebyshev_fit(|x| reconstruct(&truth, x), d);
            let c = c.into_iter().enumerate().map(|(j, v)| if j % 2 == d % 2 { v } else { Complex64::new(0.0, 0.0) });
            Polynomial::new(c.collect(), Basis::Chebyshev, parity).unwrap()
        } else {
            let mut c: Vec<f64> = (0..=d).map(|j| if j % 2 == d % 2 { rng.random::<f64>() - 0.5 } else { 0.0 }).collect();
            let raw = Polynomial::from_real(&c, Basis::Chebyshev, parity).unwrap();
            let scale = 0.9 / raw.sup_norm_on(-1.0, 1.0, 4000);
            c.iter_mut().for_each(|v| *v *= scale);
            complete_to_complex(&Polynomial::from_real(&c, Basis::Chebyshev, parity).unwrap()).map_err(|e| e.to_string())?
        };
        let phi = find_phases(&p).map_err(|e| format!("degree {d}: {e}"))?;
        let grid = 4 * d + 8;
        for j in 0..grid {
            let x = (PI * (j as f64 + 0.5) / grid as f64).cos();
            worst = worst.max((reconstruct(&phi, x) - p.eval_real(x)).norm());
        }
    }
    ensure(worst <= 1e-7, format!("worst deviation {worst:.2e}"))
}

fn qsvt_transform() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let n = 1 + k % 4;
        let h = random_h(&mut rng, n, 0.5);
        let be = sine_block_encoding(&diag_unitary(&h)).unwrap();
        // Alternate parities.
        let d = 2 * rng.random_range(1..=6) + k % 2;
        let phi = random_phases(&mut rng, d);
        let q = qsvt_circuit(&be, &phi, Parity::of_degree(d)).map_err(|e| e.to_string())?;
        let block = extract_block(&q);
        for (i, &v) in h.iter().enumerate() {
            worst = worst.max((block[(i, i)] - reconstruct(&phi, (PI * v).sin())).norm());
        }
        let off: f64 = (0..block.nrows())
            .flat_map(|i| (0..block.ncols()).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|ij| block[ij].norm())
            .fold(0.0, f64::max);
        worst = worst.max(off);
    }
    ensure(worst <= 1e-8, format!("worst entry error {worst:.2e}"))
}

fn qsvt_robustness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let eps = if k % 2 == 0 { 1e-6 } else { 1e-4 };
        let h = random_h(&mut rng, 2, 0.45);
        let be = sine_block_encoding(&diag_unitary(&h)).unwrap();
        let noisy = be.with_injected_error(eps, k as u64).map_err(|e| e.to_string())?;
        let d = rng.random_range(1..=12);
        let phi = random_phases(&mut rng, d);
        let q = qsvt_circuit(&noisy, &phi, Parity::of_degree(d)).unwrap();
        let want = diag(h.iter().map(|&v| reconstruct(&phi, (PI * v).sin())));
        let err = op_dist(&extract_block(&q), &want).unwrap();
        worst = worst.max(err / (4.0 * d as f64 * eps.sqrt()));
    }
    ensure(worst <= 1.0, format!("worst error / (4 d sqrt(eps)) = {worst:.2e}"))
}

/// Householder `C` with `Pi~ C Pi` of rank one and singular value `sigma`.
fn rank_one_c(n: usize, sigma: f64, s: &UnitaryMatrix, rng: &mut ChaCha8Rng) -> (UnitaryMatrix, StateVector) {
    let dim = 1 << n;
    let mut unit = || {
        let v = DVector::from_fn(dim, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let norm = v.norm();
        v / Complex64::new(norm, 0.0)
    };
    let w = unit();
    let junk = unit();
    let mut target = DVector::zeros(2 * dim);
    target.rows_mut(0, dim).copy_from(&(&w * Complex64::new(sigma, 0.0)));
    target.rows_mut(dim, dim).copy_from(&(&junk * Complex64::new((1.0 - sigma * sigma).sqrt(), 0.0)));
    let mut psi = DVector::zeros(2 * dim);
    psi.rows_mut(0, dim).copy_from(&s.entries().column(0));
    let ov = psi.dotc(&target);
    let target = target * (ov.conj() / ov.norm());
    let u = &psi - &target;
    let refl = DMatrix::identity(2 * dim, 2 * dim) - &u * u.adjoint() * Complex64::new(2.0 / u.norm_squared(), 0.0);
    let c = UnitaryMatrix::new(refl, Layout::from_pairs(&[("anc", 1), ("data", n)])).unwrap();
    (c, StateVector::new(w, data(n)).unwrap())
}

fn amplification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 2;
    let s = circuit_unitary(&[Gate::H(0), Gate::H(1)], data(n)).unwrap();
    let sigmas = [0.1, 0.25, 0.5];
    let mut ok = true;
    let mut notes = Vec::new();
    for delta in [0.1, 0.01] {
        let mut degrees = Vec::new();
        for sigma in sigmas {
            let (c, w) = rank_one_c(n, sigma, &s, &mut rng);
            let plan = plan_amplification(sigma, delta).map_err(|e| e.to_string())?;
            let out = amplify_state(&c, &s, &plan).unwrap();
            let (state, p) = post_select(&out, 1, data(n)).unwrap();
            let f = state.map(|st| fidelity(&st, &w).unwrap()).unwrap_or(0.0);
            ok &= p >= (1.0 - delta / 2.0).powi(2) && f >= 1.0 - 1e-6;
            degrees.push(plan.rounds() as f64);
        }
        // Least-squares fit degree = a + b / sigma.
        let xs: Vec<f64> = sigmas.iter().map(|s| 1.0 / s).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / 3.0, degrees.iter().sum::<f64>() / 3.0);
        let b = xs.iter().zip(&degrees).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
        let a = my - b * mx;
        let resid = xs.iter().zip(&degrees).map(|(x, y)| ((a + b * x - y) / y).abs()).fold(0.0, f64::max);
        ok &= resid < 0.2;
        notes.push(format!("delta={delta} degrees {degrees:?} fit residual {:.1}%", 100.0 * resid));
    }
    ensure(ok, notes.join(", "))
}

fn end_to_end_bounds() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for k in 0..30u64 {
        let n = 1 + (k as usize) % 6;
        let eps = if k % 3 == 0 { 1e-3 } else { 1e-2 };
        let oracle = AmplitudeOracle::generate(n, 1, &Distribution::Random, 100 + k).unwrap();
        let r = prepare_state(&PrepConfig::new(oracle, eps, 0.05)).map_err(|e| format!("run {k}: {e}"))?;
        let premise = r.check(CHECK_PREMISE).map(|c| c.pass).unwrap_or(false);
        if !premise {
            failures.push(format!("run {k}: premise fails"));
            continue;
        }
        checked += 1;
        for name in [CHECK_GAMMA, CHECK_SQRT, CHECK_STATE] {
            match r.check(name) {
                Some(c) if c.pass => {}
                Some(c) => failures.push(format!("run {k}: {name} ({:.2e} > {:.2e})", c.lhs, c.rhs)),
                None => failures.push(format!("run {k}: {name} missing")),
            }
        }
        if r.final_error > eps || r.success_probability < 0.95 {
            failures.push(format!("run {k}: final {:.2e} success {:.4}", r.final_error, r.success_probability));
        }
    }
    let mut detail = format!("{checked}/30 runs met the premise");
    if !failures.is_empty() {
        detail = format!("{detail}; {}", failures.join("; "));
    }
    ensure(failures.is_empty(), detail)
}

fn grover_scaling() -> Outcome {
    let (eps, delta) = (0.01, 0.05);
    let mut ratios = Vec::new();
    for n in 2..=6 {
        let x0 = (1 << n) - 2;
        let g = grover_case(n, x0, delta, eps).map_err(|e| e.to_string())?;
        if g.report.fidelity_to_target < 1.0 - eps || g.report.final_state.amplitudes()[x0].norm_sqr() < 1.0 - eps {
            return Err(format!("n={n}: fidelity {}", g.report.fidelity_to_target));
        }
        ratios.push(g.calls_per_sqrt_n);
    }
    let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(spread < 2.0, format!("calls/sqrt(N) {ratios:?}, spread {spread:.2}"))
}

fn oracle_compiler() -> Outcome {
    let mut worst = 0.0f64;
    let mut leak = 0.0f64;
    for k in 0..50u64 {
        let n = 1 + (k as usize) % 4;
        let m = 1 + (k as usize * 7) % 8;
        let c = AmplitudeOracle::generate(n, m, &Distribution::Random, k).unwrap();
        let u = phase_unitary(&c).map_err(|e| e.to_string())?;
        worst = worst.max(op_dist(u.entries(), phase_unitary_direct(&c, false).entries()).unwrap());
        leak = leak.max(ancilla_leakage(&c).unwrap());
    }
    ensure(worst <= 1e-12 && leak == 0.0, format!("worst distance {worst:.2e}, leakage {leak:.1e}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("sine encoding exactness", sine_encoding, 10),
        ("arcsin approximation", arcsin_approximation, 30),
        ("QSP reconstruction", qsp_reconstruction, 60),
        ("QSVT eigenvalue transform", qsvt_transform, 60),
        ("QSVT robustness", qsvt_robustness, 60),
        ("amplification", amplification, 120),
        ("end-to-end error bounds", end_to_end_bounds, 300),
        ("Grover scaling", grover_scaling, 300),
        ("oracle compiler", oracle_compiler, 10),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*budget);
        let (mark, detail) = match &outcome {
            Ok(d) if in_time => ("PASS", d.clone()),
            Ok(d) => ("FAIL", format!("{d}; over the {budget} s budget")),
            Err(d) => ("FAIL", d.clone()),
        };
        if mark == "FAIL" {
            failed += 1;
        }
        println!("criterion {}: {mark} {name} ({:.2} s): {detail}", i + 1, took.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
