//! End-to-end state preparation, the error-bound harness, the single marked
//! item case and parameter sweeps.
//!
//! The amplitudes are scaled by `beta` (default 1/2) before the phase oracle,
//! so `U = diag(e^{i pi beta c_m / 2})` and the sine block never exceeds
//! `sin(pi/4)`. The unitary logarithm then block-encodes `H~ ~ diag(beta c / 2)`,
//! whose product with `|+>` is the target direction with norm `beta sqrt(gamma) / 2`,
//! and sign-polynomial amplification lifts that to nearly 1.
//!
//! Error budgets, in amplitude units (`c~ = 2 H~ |+> sqrt(N) / beta`):
//! the state error obeys `||psi~ - psi|| <= 3 eps_hat / gamma`, so the
//! Hamiltonian target is `eps_H = (beta / 2) * eps * gamma / 3`. Half of it goes
//! to the arcsin series and at most a quarter to `m`-bit truncation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplify::{amplify_state, plan_amplification_with_threshold, post_select};
use crate::block::{extract_block, hamiltonian_with_plan, plan_arcsin};
use crate::oracle::{gamma, phase_unitary_scaled, target_state, AmplitudeOracle, Distribution, DATA};
use crate::sim::{circuit_unitary, spectral_norm, Gate, Layout, StateVector, UnitaryMatrix};
use crate::{Error, Result};

pub const DEFAULT_BETA: f64 = 0.5;
/// Margin from `±1` for the arcsin series; `sin(pi/4) < 1 - 0.29`.
pub const ARCSIN_DELTA: f64 = 0.29;
/// The sign threshold sits at this fraction of the estimated singular value.
pub const THRESHOLD_FRACTION: f64 = 0.9;
/// Largest data register the dense block-encoding pipeline accepts.
pub const MAX_DATA_QUBITS: usize = 8;
/// Ancillas of the logarithm encoding: the sine qubit and the LCU qubit.
const ENCODING_ANCILLAS: usize = 2;

/// `ceil(log2(3 / (eps gamma))) + 2` bits, so truncation costs at most a
/// quarter of the Hamiltonian budget.
pub fn default_bits(epsilon: f64, gamma: f64) -> usize {
    ((3.0 / (epsilon * gamma)).log2().ceil().max(0.0) as usize + 2).max(1)
}

#[derive(Clone, Debug)]
pub struct PrepConfig {
    pub oracle: AmplitudeOracle,
    pub epsilon: f64,
    pub delta: f64,
    /// Oracle bits; `None` picks [`default_bits`].
    pub m: Option<usize>,
    pub beta: f64,
}

impl PrepConfig {
    pub fn new(oracle: AmplitudeOracle, epsilon: f64, delta: f64) -> Self {
        Self { oracle, epsilon, delta, m: None, beta: DEFAULT_BETA }
    }

    pub fn with_bits(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    /// Splits a single failure budget `p` equally between `epsilon` and `delta`.
    pub fn with_total_failure(oracle: AmplitudeOracle, p: f64) -> Self {
        Self::new(oracle, p / 2.0, p / 2.0)
    }

    /// Hamiltonian-level error target `(beta / 2) * eps * gamma / 3`.
    pub fn hamiltonian_epsilon(&self) -> f64 {
        0.5 * self.beta * self.epsilon * gamma(&self.oracle, true) / 3.0
    }

    fn validate(&self) -> Result<f64> {
        let g = gamma(&self.oracle, true);
        if g == 0.0 {
            return Err(Error::ZeroAmplitude);
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        // The amplitude-level target eps * gamma / 3 must respect eps <= gamma / 4.
        if !(self.epsilon > 0.0 && self.epsilon * g / 3.0 <= g / 4.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {} is infeasible: the substituted error eps * gamma / 3 must not exceed gamma / 4",
                self.epsilon
            )));
        }
        if !(self.beta > 0.0 && self.beta <= 0.5) {
            return Err(Error::InvalidParameter(format!("beta must lie in (0, 1/2], got {}", self.beta)));
        }
        if self.oracle.n() > MAX_DATA_QUBITS {
            return Err(Error::TooManyQubits { qubits: self.oracle.n(), limit: MAX_DATA_QUBITS });
        }
        Ok(g)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        Self { name: name.to_string(), lhs, rhs, pass: lhs <= rhs }
    }
}

/// Measured quantities fed to [`bound_checks`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub gamma: f64,
    pub gamma_tilde: f64,
    /// Amplitude-level error `max_x |c~(x) - c(x)|` bound from the block.
    pub eps_hat: f64,
    /// `||psi~ - psi||` before amplification, up to global phase.
    pub state_error: f64,
    /// `||final - target||` after amplification, up to global phase.
    pub final_error: f64,
    pub epsilon: f64,
    pub success: f64,
    pub delta: f64,
}

pub const CHECK_PREMISE: &str = "eps_hat <= gamma/4";
pub const CHECK_GAMMA: &str = "|gamma~ - gamma| <= 2 eps_hat";
pub const CHECK_GAMMA_HALF: &str = "gamma - gamma~ <= gamma/2";
pub const CHECK_SQRT: &str = "|sqrt(gamma) - sqrt(gamma~)| <= eps_hat/(sqrt2 sqrt(gamma))";
pub const CHECK_STATE: &str = "||psi~ - psi|| <= 3 eps_hat/gamma";
pub const CHECK_FINAL: &str = "||final - target|| <= eps";
pub const CHECK_SUCCESS: &str = "1 - success <= delta";

/// Evaluates every inequality of the error analysis on measured values. The
/// two checks that need `eps_hat <= gamma/4` are listed only when it holds.
pub fn bound_checks(b: &BoundInputs) -> Vec<BoundCheck> {
    let mut out = vec![
        BoundCheck::new(CHECK_PREMISE, b.eps_hat, b.gamma / 4.0),
        BoundCheck::new(CHECK_GAMMA, (b.gamma_tilde - b.gamma).abs(), 2.0 * b.eps_hat),
    ];
    if b.eps_hat <= b.gamma / 4.0 {
        out.push(BoundCheck::new(CHECK_GAMMA_HALF, b.gamma - b.gamma_tilde, b.gamma / 2.0));
        out.push(BoundCheck::new(
            CHECK_SQRT,
            (b.gamma.sqrt() - b.gamma_tilde.sqrt()).abs(),
            b.eps_hat / (2f64.sqrt() * b.gamma.sqrt()),
        ));
    }
    out.push(BoundCheck::new(CHECK_STATE, b.state_error, 3.0 * b.eps_hat / b.gamma));
    out.push(BoundCheck::new(CHECK_FINAL, b.final_error, b.epsilon));
    out.push(BoundCheck::new(CHECK_SUCCESS, 1.0 - b.success, b.delta));
    out
}

#[derive(Clone, Debug)]
pub struct PrepReport {
    pub final_state: StateVector,
    pub target_state: StateVector,
    /// `|<final|target>|`.
    pub fidelity_to_target: f64,
    /// `min_theta ||e^{i theta} final - target||`.
    pub final_error: f64,
    pub success_probability: f64,
    /// Uses of `O_c` (each phase oracle call runs `O_c` twice).
    pub oracle_calls: usize,
    pub arcsin_degree: usize,
    pub sign_degree: usize,
    pub m: usize,
    pub gamma: f64,
    pub gamma_tilde: f64,
    /// Measured `||H~ - H||` with `H = diag(beta c / 2)` from the exact table.
    pub hamiltonian_error: f64,
    /// Amplitude-level error `2 ||H~ - H|| / beta`.
    pub eps_hat: f64,
    pub bound_checks: Vec<BoundCheck>,
}

impl PrepReport {
    pub fn degrees(&self) -> (usize, usize) {
        (self.arcsin_degree, self.sign_degree)
    }

    pub fn all_pass(&self) -> bool {
        self.bound_checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.bound_checks.iter().find(|c| c.name == name)
    }
}

/// `min_theta ||e^{i theta} a - b||` for unit vectors.
pub fn phase_invariant_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    let f = a.inner(b)?.norm().min(1.0);
    Ok((2.0 * (1.0 - f)).max(0.0).sqrt())
}

fn hadamards(n: usize) -> Result<UnitaryMatrix> {
    circuit_unitary(&(0..n).map(Gate::H).collect::<Vec<_>>(), Layout::single(DATA, n))
}

/// Runs the whole pipeline and evaluates the error bounds on the result.
pub fn prepare_state(cfg: &PrepConfig) -> Result<PrepReport> {
    let g = cfg.validate()?;
    let n = cfg.oracle.n();
    let m = cfg.m.unwrap_or_else(|| default_bits(cfg.epsilon, g));
    let oracle = cfg.oracle.with_bits(m)?;
    let beta = cfg.beta;
    let eps_h = cfg.hamiltonian_epsilon();

    // Unitary logarithm of the scaled phase oracle.
    let u = phase_unitary_scaled(&oracle, beta)?;
    let arcsin = plan_arcsin(eps_h / 2.0, ARCSIN_DELTA)?;
    let enc = hamiltonian_with_plan(&u, &arcsin)?;
    let h_tilde = extract_block(&enc);
    let h_exact = DMatrix::from_diagonal(&DVector::from_iterator(
        1 << n,
        oracle.values().iter().map(|&c| Complex64::new(beta * c / 2.0, 0.0)),
    ));
    let hamiltonian_error = spectral_norm(&(&h_tilde - &h_exact));
    let eps_hat = 2.0 * hamiltonian_error / beta;

    // The state the encoding produces before amplification.
    let size = 1usize << n;
    let plus = DVector::from_element(size, Complex64::new(1.0 / (size as f64).sqrt(), 0.0));
    let c_tilde = &h_tilde * &plus * Complex64::new(2.0 * (size as f64).sqrt() / beta, 0.0);
    let gamma_tilde = c_tilde.norm_squared() / size as f64;
    let target = target_state(&oracle)?;
    let psi_tilde = if c_tilde.norm() > 0.0 {
        StateVector::new(&c_tilde / Complex64::new(c_tilde.norm(), 0.0), Layout::single(DATA, n))?
    } else {
        return Err(Error::ZeroAmplitude);
    };
    let state_error = phase_invariant_distance(&psi_tilde, &target)?;

    // Amplification with the singular value estimated from the truncated table.
    let sigma_hat = beta * gamma(&oracle, false).sqrt() / 2.0;
    let plan = plan_amplification_with_threshold(sigma_hat.min(1.0), THRESHOLD_FRACTION * sigma_hat, cfg.delta)?;
    let s = hadamards(n)?;
    let amplified = amplify_state(enc.unitary(), &s, &plan)?;
    let (final_state, success) = post_select(&amplified, ENCODING_ANCILLAS, Layout::single(DATA, n))?;
    let final_state = final_state.ok_or(Error::ZeroAmplitude)?;
    let final_error = phase_invariant_distance(&final_state, &target)?;
    let fidelity_to_target = final_state.inner(&target)?.norm();

    let checks = bound_checks(&BoundInputs {
        gamma: g,
        gamma_tilde,
        eps_hat,
        state_error,
        final_error,
        epsilon: cfg.epsilon,
        success,
        delta: cfg.delta,
    });
    Ok(PrepReport {
        final_state,
        target_state: target,
        fidelity_to_target,
        final_error,
        success_probability: success,
        oracle_calls: 2 * enc.cu_calls() * plan.rounds(),
        arcsin_degree: arcsin.degree(),
        sign_degree: plan.rounds(),
        m,
        gamma: g,
        gamma_tilde,
        hamiltonian_error,
        eps_hat,
        bound_checks: checks,
    })
}

/// Same run as [`prepare_state`]; the report's `bound_checks` hold every
/// inequality evaluated with the measured `eps_hat`.
pub fn verify_error_bounds(cfg: &PrepConfig) -> Result<PrepReport> {
    prepare_state(cfg)
}

#[derive(Clone, Debug)]
pub struct GroverReport {
    pub report: PrepReport,
    /// `oracle_calls / sqrt(N)`.
    pub calls_per_sqrt_n: f64,
}

/// State preparation for a single marked item, where `gamma = 1/N`.
pub fn grover_case(n: usize, x0: usize, delta: f64, epsilon: f64) -> Result<GroverReport> {
    if n == 0 || n > MAX_DATA_QUBITS {
        return Err(Error::TooManyQubits { qubits: n, limit: MAX_DATA_QUBITS });
    }
    if x0 >= 1 << n {
        return Err(Error::InvalidParameter(format!("marked item {x0} outside 0..{}", 1usize << n)));
    }
    let oracle = AmplitudeOracle::generate(n, 1, &Distribution::Indicator(x0), 0)?;
    let report = prepare_state(&PrepConfig::new(oracle, epsilon, delta))?;
    let calls_per_sqrt_n = report.oracle_calls as f64 / ((1usize << n) as f64).sqrt();
    Ok(GroverReport { report, calls_per_sqrt_n })
}

/// A distribution name, where a bare `gaussian` means `mu = 2^(n-1)`, `sigma = 2^(n-2)`.
pub fn resolve_distribution(name: &str, n: usize) -> Result<Distribution> {
    if name.trim() == "gaussian" {
        let size = (1usize << n) as f64;
        return Ok(Distribution::Gaussian { mu: size / 2.0, sigma: (size / 4.0).max(0.5) });
    }
    name.parse()
}

/// Cartesian grid of runs.
#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub n: Vec<usize>,
    pub dist: Vec<String>,
    pub epsilon: Vec<f64>,
    pub delta: Vec<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: Vec<SweepGrid>,
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("sweep spec: {e}")))
    }
}

/// One sweep run, in grid order.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRun {
    pub n: usize,
    pub dist: String,
    pub epsilon: f64,
    pub delta: f64,
    /// Seed for random tables: the sweep seed plus the run index.
    pub seed: u64,
}

impl SweepSpec {
    pub fn runs(&self) -> Vec<SweepRun> {
        let mut out = Vec::new();
        for g in &self.grid {
            for &n in &g.n {
                for dist in &g.dist {
                    for &epsilon in &g.epsilon {
                        for &delta in &g.delta {
                            let seed = self.seed.wrapping_add(out.len() as u64);
                            out.push(SweepRun { n, dist: dist.clone(), epsilon, delta, seed });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
struct SweepRow {
    n: usize,
    dist: String,
    m: Option<usize>,
    gamma: Option<f64>,
    epsilon: f64,
    delta: f64,
    arcsin_degree: Option<usize>,
    sign_degree: Option<usize>,
    oracle_calls: Option<usize>,
    fidelity: Option<f64>,
    success_prob: Option<f64>,
    bound_3eps_over_gamma_lhs: Option<f64>,
    bound_3eps_over_gamma_rhs: Option<f64>,
    pass: Option<bool>,
    status: String,
}

pub const SWEEP_COLUMNS: [&str; 15] = [
    "n",
    "dist",
    "m",
    "gamma",
    "epsilon",
    "delta",
    "arcsin_degree",
    "sign_degree",
    "oracle_calls",
    "fidelity",
    "success_prob",
    "bound_3eps_over_gamma_lhs",
    "bound_3eps_over_gamma_rhs",
    "pass",
    "status",
];

pub fn run_one(run: &SweepRun) -> Result<PrepReport> {
    let dist = resolve_distribution(&run.dist, run.n)?;
    let oracle = AmplitudeOracle::generate(run.n, 1, &dist, run.seed)?;
    prepare_state(&PrepConfig::new(oracle, run.epsilon, run.delta))
}

fn row(run: &SweepRun, result: Result<PrepReport>) -> SweepRow {
    let mut r = SweepRow {
        n: run.n,
        dist: run.dist.clone(),
        m: None,
        gamma: None,
        epsilon: run.epsilon,
        delta: run.delta,
        arcsin_degree: None,
        sign_degree: None,
        oracle_calls: None,
        fidelity: None,
        success_prob: None,
        bound_3eps_over_gamma_lhs: None,
        bound_3eps_over_gamma_rhs: None,
        pass: None,
        status: String::new(),
    };
    match result {
        Ok(rep) => {
            let state = rep.check(CHECK_STATE);
            r.m = Some(rep.m);
            r.gamma = Some(rep.gamma);
            r.arcsin_degree = Some(rep.arcsin_degree);
            r.sign_degree = Some(rep.sign_degree);
            r.oracle_calls = Some(rep.oracle_calls);
            r.fidelity = Some(rep.fidelity_to_target);
            r.success_prob = Some(rep.success_probability);
            r.bound_3eps_over_gamma_lhs = state.map(|c| c.lhs);
            r.bound_3eps_over_gamma_rhs = state.map(|c| c.rhs);
            r.pass = Some(rep.all_pass());
            r.status = "ok".into();
        }
        Err(e) => r.status = format!("error: {e}"),
    }
    r
}

/// Runs every grid point in parallel and returns CSV text, rows in grid order.
/// A failing run becomes a row with its error in `status`.
pub fn sweep(spec: &SweepSpec) -> Result<String> {
    let runs = spec.runs();
    let rows: Vec<SweepRow> = runs.par_iter().map(|run| row(run, run_one(run))).collect();
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(SWEEP_COLUMNS)?;
    for r in &rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}
