//! Fixed-point amplification of a rank-one block.
//!
//! With `Pi~ = |0^a><0^a| (x) 1` and `Pi = |0^a><0^a| (x) S|0><0|S^dagger`, the
//! block `Pi~ C Pi = sigma |w><Psi|` has a single singular value. An odd
//! QSVT sequence for a sign approximant lifts it to `|P(sigma)| >= 1 - delta/2`,
//! so post-selecting `Pi~` on `U_phi |Psi>` yields `|w>` with probability at
//! least `(1 - delta/2)^2`. Every round uses `C` or `C^dagger` once, and the
//! `Pi` reflections need `S` and `S^dagger`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::block::qsvt_apply;
use crate::phases::{find_phases_for, verify_phases, PhaseSequence, PHASE_TOL};
use crate::poly::{complete_with_complement, sign_approx, sign_approx_with_limit, DEFAULT_MAX_DEGREE};
use crate::sim::{Layout, Projector, StateVector, UnitaryMatrix};
use crate::{Error, Result};

/// Smallest threshold accepted before reporting the degree it would need.
pub const SIGMA_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct AmplificationPlan {
    sigma: f64,
    delta: f64,
    phases: PhaseSequence,
}

impl AmplificationPlan {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn phases(&self) -> &PhaseSequence {
        &self.phases
    }

    /// Degree of the sign polynomial, which is the number of `C`/`C^dagger` uses.
    pub fn rounds(&self) -> usize {
        self.phases.len()
    }

    /// Header `sigma delta rounds`, then one phase per line.
    pub fn to_text(&self) -> String {
        format!("{:.16e} {:.16e} {}\n{}", self.sigma, self.delta, self.rounds(), self.phases.to_text())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (header, rest) = text.split_once('\n').unwrap_or((text, ""));
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("plan header needs `sigma delta rounds`, got {header:?}")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("plan header {s:?}: {e}")));
        let (sigma, delta) = (num(fields[0])?, num(fields[1])?);
        let rounds: usize = fields[2].parse().map_err(|e| Error::Parse(format!("plan rounds: {e}")))?;
        let phases = PhaseSequence::from_text(rest)?;
        if phases.len() != rounds {
            return Err(Error::Parse(format!("plan lists {} phases for {rounds} rounds", phases.len())));
        }
        check_plan_inputs(sigma, sigma, delta)?;
        if rounds.is_multiple_of(2) {
            return Err(Error::Parse(format!("plan has an even round count {rounds}")));
        }
        Ok(Self { sigma, delta, phases })
    }
}

fn check_plan_inputs(sigma: f64, threshold: f64, delta: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::InvalidParameter(format!("sigma must lie in (0, 1], got {sigma}")));
    }
    if !(threshold > 0.0 && threshold <= sigma) {
        return Err(Error::InvalidParameter(format!("threshold {threshold} must lie in (0, sigma = {sigma}]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Plan with the sign threshold at `sigma` itself.
pub fn plan_amplification(sigma: f64, delta: f64) -> Result<AmplificationPlan> {
    plan_amplification_with_threshold(sigma, sigma, delta)
}

/// Plan whose sign approximant switches at `threshold <= sigma`, leaving room
/// for error in the estimate of `sigma`.
pub fn plan_amplification_with_threshold(sigma: f64, threshold: f64, delta: f64) -> Result<AmplificationPlan> {
    check_plan_inputs(sigma, threshold, delta)?;
    if threshold >= 1.0 {
        // P(x) = x already maps 1 to 1.
        return Ok(AmplificationPlan { sigma, delta, phases: PhaseSequence::new(vec![0.0]) });
    }
    if threshold < SIGMA_FLOOR {
        let needed = sign_approx_with_limit(threshold, delta, usize::MAX).map_or(usize::MAX, |a| a.spec.degree);
        return Err(Error::DegreeOverflow { needed, limit: DEFAULT_MAX_DEGREE.min(needed.saturating_sub(1)) });
    }
    let approx = sign_approx(threshold, delta)?;
    let completion = complete_with_complement(&approx.polynomial)?;
    let phases = find_phases_for(&completion)?;
    let report = verify_phases(&phases, &completion.p, 4 * phases.len() + 64);
    if !report.passed {
        return Err(Error::NoConvergence { residual: report.max_error });
    }
    debug_assert!(report.max_error <= PHASE_TOL);
    Ok(AmplificationPlan { sigma, delta, phases })
}

/// `(Pi~, Pi)` on `ancillas + n` qubits for an `n`-qubit state preparation `S`.
pub fn build_projectors(ancillas: usize, s: &UnitaryMatrix) -> Result<(Projector, Projector)> {
    let n = s.layout().qubits();
    let left = Projector::zero_ancillas(ancillas, n);
    let right = Projector::rank_one(&initial_vector(ancillas, s))?;
    Ok((left, right))
}

/// `|0^a> (x) S|0^n>`.
fn initial_vector(ancillas: usize, s: &UnitaryMatrix) -> DVector<Complex64> {
    let mut v = DVector::from_element(s.dim() << ancillas, Complex64::new(0.0, 0.0));
    v.rows_mut(0, s.dim()).copy_from(&s.entries().column(0));
    v
}

fn ancillas_of(c: &UnitaryMatrix, s: &UnitaryMatrix) -> Result<usize> {
    let (cq, sq) = (c.layout().qubits(), s.layout().qubits());
    if cq < sq {
        return Err(Error::DimensionMismatch { expected: s.dim(), got: c.dim() });
    }
    Ok(cq - sq)
}

/// The full amplification unitary `U_phi`.
pub fn amplify(c: &UnitaryMatrix, s: &UnitaryMatrix, plan: &AmplificationPlan) -> Result<UnitaryMatrix> {
    let a = ancillas_of(c, s)?;
    let (left, right) = build_projectors(a, s)?;
    let d = c.dim();
    let m = qsvt_apply(c.entries(), &left, &right, plan.phases.phases(), DMatrix::identity(d, d));
    UnitaryMatrix::new(m, c.layout().clone())
}

/// `U_phi |Psi>`, computed without forming `U_phi`.
pub fn amplify_state(c: &UnitaryMatrix, s: &UnitaryMatrix, plan: &AmplificationPlan) -> Result<StateVector> {
    let a = ancillas_of(c, s)?;
    let (left, right) = build_projectors(a, s)?;
    let psi = initial_vector(a, s);
    let d = psi.len();
    let out = qsvt_apply(c.entries(), &left, &right, plan.phases.phases(), DMatrix::from_column_slice(d, 1, psi.as_slice()));
    // Hundreds of applications of a numerically unitary C let the norm drift
    // by ~rounds * 1e-14, past the tolerance meant for caller-built states.
    Ok(StateVector::from_parts(out.column(0).into_owned(), c.layout().clone()))
}

/// Post-selects `|0^a>` on the ancillas: returns the normalized data state and
/// the success probability.
pub fn post_select(state: &StateVector, ancillas: usize, data_layout: Layout) -> Result<(Option<StateVector>, f64)> {
    let dim = data_layout.dim();
    if dim << ancillas != state.dim() {
        return Err(Error::DimensionMismatch { expected: dim << ancillas, got: state.dim() });
    }
    let head = state.amplitudes().rows(0, dim).into_owned();
    let p = head.norm_squared();
    if p == 0.0 {
        return Ok((None, 0.0));
    }
    let normalized = head / Complex64::new(p.sqrt(), 0.0);
    Ok((Some(StateVector::new(normalized, data_layout)?), p))
}
