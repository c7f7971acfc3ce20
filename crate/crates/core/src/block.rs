//! Block encodings: the sine construction, QSVT circuits, the real-part
//! combination and the unitary logarithm `U = e^{i pi H} -> H`.
//!
//! Ancilla registers always precede the data register, so with the default
//! projectors the encoded matrix is the literal top-left block.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::phases::{conjugate_phases, find_phases_for, verify_phases, PhaseSequence};
use crate::poly::{arcsin_taylor, complete_with_complement, Parity};
use crate::sim::{circuit_unitary, spectral_norm, Gate, Layout, Projector, UnitaryMatrix};
use crate::{Error, Result};

pub const SINE: &str = "sine";
pub const LCU: &str = "lcu";

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug)]
pub struct BlockEncoding {
    unitary: UnitaryMatrix,
    ancillas: usize,
    proj_left: Projector,
    proj_right: Projector,
    certified_error: f64,
    scale: f64,
    cu_calls: usize,
}

impl BlockEncoding {
    pub fn new(
        unitary: UnitaryMatrix,
        ancillas: usize,
        proj_left: Projector,
        proj_right: Projector,
        certified_error: f64,
    ) -> Result<Self> {
        let dim = unitary.dim();
        if ancillas > unitary.layout().qubits() {
            return Err(Error::InvalidParameter(format!(
                "{ancillas} ancillas on a {}-qubit unitary",
                unitary.layout().qubits()
            )));
        }
        for p in [&proj_left, &proj_right] {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
        }
        Ok(Self { unitary, ancillas, proj_left, proj_right, certified_error, scale: 1.0, cu_calls: 0 })
    }

    /// Encoding with `|0^a><0^a| (x) 1` on both sides.
    pub fn with_zero_ancillas(unitary: UnitaryMatrix, ancillas: usize, certified_error: f64) -> Result<Self> {
        let data = unitary.layout().qubits().checked_sub(ancillas).ok_or_else(|| {
            Error::InvalidParameter(format!("{ancillas} ancillas exceed the unitary's qubits"))
        })?;
        let p = Projector::zero_ancillas(ancillas, data);
        Self::new(unitary, ancillas, p.clone(), p, certified_error)
    }

    pub fn unitary(&self) -> &UnitaryMatrix {
        &self.unitary
    }

    pub fn ancillas(&self) -> usize {
        self.ancillas
    }

    pub fn proj_left(&self) -> &Projector {
        &self.proj_left
    }

    pub fn proj_right(&self) -> &Projector {
        &self.proj_right
    }

    pub fn certified_error(&self) -> f64 {
        self.certified_error
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Uses of the controlled input unitary `cU` or its inverse.
    pub fn cu_calls(&self) -> usize {
        self.cu_calls
    }

    pub fn data_dim(&self) -> usize {
        self.unitary.dim() >> self.ancillas
    }

    /// Replaces the unitary by `U e^{i eps G}` for a random Hermitian `G` with
    /// `||G|| = 1`, so the block moves by at most `eps`.
    pub fn with_injected_error(&self, eps: f64, seed: u64) -> Result<Self> {
        let d = self.unitary.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let g = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = g.symmetric_eigen();
        let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let phases = DVector::from_iterator(
            d,
            eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, eps * l / top)),
        );
        let v = &eig.eigenvectors;
        let kick = v * DMatrix::from_diagonal(&phases) * v.adjoint();
        let unitary = UnitaryMatrix::new(self.unitary.entries() * kick, self.unitary.layout().clone())?;
        Ok(Self { unitary, certified_error: self.certified_error + eps, ..self.clone() })
    }
}

/// `Pi_left U Pi_right` restricted to the leading `data_dim` rows and columns.
pub fn extract_block(be: &BlockEncoding) -> DMatrix<Complex64> {
    let d = be.data_dim();
    let full = be.proj_left.entries() * be.unitary.entries() * be.proj_right.entries();
    full.view((0, 0), (d, d)).into_owned()
}

/// H, controlled-U, Y, controlled-U^dagger, H on a leading ancilla.
pub fn sine_circuit(u: &UnitaryMatrix) -> Vec<Gate> {
    let data: Vec<usize> = (1..=u.layout().qubits()).collect();
    let cu = |m: DMatrix<Complex64>| Gate::Controlled {
        controls: vec![0],
        gate: Box::new(Gate::Matrix { qubits: data.clone(), matrix: m }),
    };
    vec![Gate::H(0), cu(u.entries().clone()), Gate::Y(0), cu(u.entries().adjoint()), Gate::H(0)]
}

/// Exact one-ancilla encoding of `(U - U^dagger) / 2i`, which is `sin(pi H)`
/// for `U = e^{i pi H}`.
pub fn sine_block_encoding(u: &UnitaryMatrix) -> Result<BlockEncoding> {
    let layout = Layout::single(SINE, 1).then(u.layout());
    let unitary = circuit_unitary(&sine_circuit(u), layout)?;
    let mut be = BlockEncoding::with_zero_ancillas(unitary, 1, 0.0)?;
    be.cu_calls = 2;
    Ok(be)
}

/// Fast form of a projector for repeated `e^{i phi (2P - 1)}` products.
enum Kernel {
    Diagonal(Vec<bool>),
    RankOne(DVector<Complex64>),
    Dense(DMatrix<Complex64>),
}

impl Kernel {
    fn of(p: &Projector) -> Self {
        let m = p.entries();
        let n = m.nrows();
        let off_diagonal = (0..n).any(|c| (0..n).any(|r| r != c && m[(r, c)] != ZERO));
        if !off_diagonal {
            return Kernel::Diagonal((0..n).map(|i| m[(i, i)].re > 0.5).collect());
        }
        if p.rank() == 1 {
            let col = (0..n).max_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re)).unwrap_or(0);
            let v = m.column(col).into_owned();
            let norm = v.norm();
            return Kernel::RankOne(v / Complex64::new(norm, 0.0));
        }
        Kernel::Dense(m.clone())
    }

    /// `m <- e^{i phi (2P - 1)} m`.
    fn phase_left(&self, phi: f64, m: &mut DMatrix<Complex64>) {
        let e = Complex64::from_polar(1.0, phi);
        match self {
            Kernel::Diagonal(mask) => {
                for (i, &on) in mask.iter().enumerate() {
                    let f = if on { e } else { e.conj() };
                    m.row_mut(i).iter_mut().for_each(|a| *a *= f);
                }
            }
            Kernel::RankOne(v) => {
                let overlap = v.adjoint() * &*m;
                *m *= e.conj();
                *m += v * overlap * (e - e.conj());
            }
            Kernel::Dense(p) => {
                let pm = p * &*m;
                *m *= e.conj();
                *m += pm * (e - e.conj());
            }
        }
    }
}

/// Applies `prod_j e^{i phi_j (2 P_j - 1)} W_j` to `m`, with `W_d = U` acting
/// first, `W_j` alternating between `U` and `U^dagger`, and each phase taken on
/// the output space of its `W_j` (`Pi_left` after `U`, `Pi_right` after `U^dagger`).
pub(crate) fn qsvt_apply(
    u: &DMatrix<Complex64>,
    left: &Projector,
    right: &Projector,
    phases: &[f64],
    mut m: DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let (kl, kr) = (Kernel::of(left), Kernel::of(right));
    let u_adj = u.adjoint();
    let d = phases.len();
    for j in (0..d).rev() {
        let forward = (d - 1 - j).is_multiple_of(2);
        m = if forward { u * m } else { &u_adj * m };
        let k = if forward { &kl } else { &kr };
        k.phase_left(phases[j], &mut m);
    }
    m
}

/// The QSVT sequence for `phi`. The encoded matrix is `P^(SV)(A)` between
/// `Pi_left` and `Pi_right` (odd length) or `Pi_right` on both sides (even).
pub fn qsvt_circuit(be: &BlockEncoding, phi: &PhaseSequence, parity: Parity) -> Result<BlockEncoding> {
    let d = phi.len();
    if d == 0 || Parity::of_degree(d) != parity {
        return Err(Error::InvalidParameter(format!(
            "{d} phases realize a polynomial of parity {}, requested {parity}",
            Parity::of_degree(d)
        )));
    }
    let dim = be.unitary.dim();
    let m = qsvt_apply(be.unitary.entries(), &be.proj_left, &be.proj_right, phi.phases(), DMatrix::identity(dim, dim));
    let unitary = UnitaryMatrix::new(m, be.unitary.layout().clone())?;
    let left = if d % 2 == 1 { be.proj_left.clone() } else { be.proj_right.clone() };
    let error = if be.certified_error == 0.0 { 0.0 } else { 4.0 * d as f64 * be.certified_error.sqrt() };
    Ok(BlockEncoding {
        unitary,
        ancillas: be.ancillas,
        proj_left: left,
        proj_right: be.proj_right.clone(),
        certified_error: error,
        scale: be.scale,
        cu_calls: d * be.cu_calls,
    })
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// `(P^(SV) + P*^(SV)) / 2` from Hadamard, select(`U_phi`, `U_-phi`), Hadamard
/// on one extra leading ancilla. The two branches share their `U` layers and
/// differ only in phases, so the call count equals one QSVT sequence.
pub fn lcu_real_part(be: &BlockEncoding, phi: &PhaseSequence) -> Result<BlockEncoding> {
    let parity = Parity::of_degree(phi.len());
    let plus = qsvt_circuit(be, phi, parity)?;
    let minus = qsvt_circuit(be, &conjugate_phases(phi), parity)?;
    let half = Complex64::new(0.5, 0.0);
    let sum = (plus.unitary.entries() + minus.unitary.entries()) * half;
    let diff = (plus.unitary.entries() - minus.unitary.entries()) * half;
    let dim = sum.nrows();
    let mut m = DMatrix::from_element(2 * dim, 2 * dim, ZERO);
    m.view_mut((0, 0), (dim, dim)).copy_from(&sum);
    m.view_mut((dim, dim), (dim, dim)).copy_from(&sum);
    m.view_mut((0, dim), (dim, dim)).copy_from(&diff);
    m.view_mut((dim, 0), (dim, dim)).copy_from(&diff);
    let layout = Layout::single(LCU, 1).then(be.unitary.layout());
    let unitary = UnitaryMatrix::new(m, layout)?;
    let zero = DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
    let left = Projector::new(kron(&zero, plus.proj_left.entries()))?;
    let right = Projector::new(kron(&zero, plus.proj_right.entries()))?;
    Ok(BlockEncoding {
        unitary,
        ancillas: be.ancillas + 1,
        proj_left: left,
        proj_right: right,
        certified_error: plus.certified_error,
        scale: be.scale,
        cu_calls: plus.cu_calls,
    })
}

/// Phases for the completed arcsin approximant, with the measured
/// reconstruction error.
#[derive(Clone, Debug)]
pub struct ArcsinPlan {
    pub epsilon: f64,
    pub delta: f64,
    pub phases: PhaseSequence,
    /// Max `|reconstruct - P|` on a Chebyshev grid.
    pub phase_error: f64,
}

impl ArcsinPlan {
    pub fn degree(&self) -> usize {
        self.phases.len()
    }
}

pub fn plan_arcsin(epsilon: f64, delta: f64) -> Result<ArcsinPlan> {
    let approx = arcsin_taylor(epsilon, delta)?;
    let completion = complete_with_complement(&approx.polynomial)?;
    let phases = find_phases_for(&completion)?;
    let phase_error = verify_phases(&phases, &completion.p, 8 * phases.len() + 64).max_error;
    Ok(ArcsinPlan { epsilon, delta, phases, phase_error })
}

/// Block-encodes `H` from `U = e^{i pi H}`: sine encoding, then the real part
/// of the arcsin transform. Needs `||sin(pi H)|| <= 1 - delta`.
pub fn hamiltonian_from_unitary(u: &UnitaryMatrix, epsilon: f64, delta: f64) -> Result<BlockEncoding> {
    hamiltonian_with_plan(u, &plan_arcsin(epsilon, delta)?)
}

pub fn hamiltonian_with_plan(u: &UnitaryMatrix, plan: &ArcsinPlan) -> Result<BlockEncoding> {
    let sine = sine_block_encoding(u)?;
    let reach = spectral_norm(&extract_block(&sine));
    if reach > 1.0 - plan.delta {
        return Err(Error::InvalidParameter(format!(
            "||sin(pi H)|| = {reach:.6} exceeds 1 - delta = {:.6}; rescale H toward 0 (for example by 1/2) \
             or lower delta",
            1.0 - plan.delta
        )));
    }
    let mut be = lcu_real_part(&sine, &plan.phases)?;
    be.certified_error = plan.epsilon + plan.phase_error;
    Ok(be)
}

/// `e^{i pi H}` for Hermitian `H`.
pub fn exp_i_pi(h: &DMatrix<Complex64>, layout: Layout) -> Result<UnitaryMatrix> {
    let eig = h.clone().symmetric_eigen();
    let ph = DVector::from_iterator(
        h.nrows(),
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, std::f64::consts::PI * l)),
    );
    let v = &eig.eigenvectors;
    UnitaryMatrix::new(v * DMatrix::from_diagonal(&ph) * v.adjoint(), layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phases::{find_phases, reconstruct};
    use crate::poly::{Basis, Polynomial};
    use crate::sim::op_dist;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::PI;

    fn data(n: usize) -> Layout {
        Layout::single("data", n)
    }

    fn diag_unitary(h: &[f64]) -> UnitaryMatrix {
        let n = h.len().trailing_zeros() as usize;
        let d = DVector::from_iterator(h.len(), h.iter().map(|&v| Complex64::from_polar(1.0, PI * v)));
        UnitaryMatrix::new(DMatrix::from_diagonal(&d), data(n)).unwrap()
    }

    fn diag(v: impl IntoIterator<Item = Complex64>) -> DMatrix<Complex64> {
        let v: Vec<_> = v.into_iter().collect();
        DMatrix::from_diagonal(&DVector::from_vec(v))
    }

    fn random_h(n: usize, bound: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..1 << n).map(|_| bound * (2.0 * rng.random::<f64>() - 1.0)).collect()
    }

    #[test]
    fn extract_block_of_trivial_unitaries() {
        let id = UnitaryMatrix::identity(Layout::from_pairs(&[("a", 1), ("data", 2)]));
        let be = BlockEncoding::with_zero_ancillas(id, 1, 0.0).unwrap();
        assert_eq!(extract_block(&be), DMatrix::identity(4, 4));
        let x = circuit_unitary(&[Gate::X(0)], Layout::from_pairs(&[("a", 1), ("data", 2)])).unwrap();
        let be = BlockEncoding::with_zero_ancillas(x, 1, 0.0).unwrap();
        assert_eq!(extract_block(&be), DMatrix::from_element(4, 4, ZERO));
    }

    #[test]
    fn injected_error_stays_within_budget() {
        let be = sine_block_encoding(&diag_unitary(&random_h(2, 0.4, 1))).unwrap();
        let noisy = be.with_injected_error(1e-3, 7).unwrap();
        let moved = op_dist(&extract_block(&noisy), &extract_block(&be)).unwrap();
        assert!(moved <= 1e-3 * (1.0 + 1e-9), "{moved}");
        assert!(spectral_norm(&extract_block(&noisy)) <= 1.0 + noisy.certified_error());
    }

    #[test]
    fn sine_of_zero_is_zero() {
        let be = sine_block_encoding(&UnitaryMatrix::identity(data(2))).unwrap();
        assert!(spectral_norm(&extract_block(&be)) < 1e-15);
    }

    #[test]
    fn sine_of_quarter_and_half() {
        let be = sine_block_encoding(&diag_unitary(&[0.25, 0.5])).unwrap();
        let want = diag([Complex64::new((PI / 4.0).sin(), 0.0), ONE]);
        assert!(op_dist(&extract_block(&be), &want).unwrap() < 1e-12);
        assert_eq!(be.cu_calls(), 2);
    }

    #[test]
    fn sine_ancilla_output_for_an_eigenvalue() {
        let theta = 0.3;
        let be = sine_block_encoding(&diag_unitary(&[theta, 0.0])).unwrap();
        // Input |0>|0>; the ancilla leaves in sin(pi theta)|0> - i cos(pi theta)|1>.
        let col = be.unitary().entries().column(0);
        assert!((col[0] - (PI * theta).sin()).norm() < 1e-14);
        assert!((col[2] - Complex64::new(0.0, -(PI * theta).cos())).norm() < 1e-14);
    }

    #[test]
    fn identity_phase_gives_the_block_back() {
        let be = sine_block_encoding(&diag_unitary(&random_h(2, 0.45, 3))).unwrap();
        let q = qsvt_circuit(&be, &PhaseSequence::new(vec![0.0]), Parity::Odd).unwrap();
        assert!(op_dist(&extract_block(&q), &extract_block(&be)).unwrap() < 1e-12);
    }

    #[test]
    fn minus_t2_of_sine() {
        let be = sine_block_encoding(&diag_unitary(&[0.3, 0.0])).unwrap();
        let p = Polynomial::from_real(&[0.0, 0.0, -1.0], Basis::Chebyshev, Parity::Even).unwrap();
        let phi = find_phases(&p).unwrap();
        let q = qsvt_circuit(&be, &phi, Parity::Even).unwrap();
        let s = (0.3 * PI).sin();
        let want = diag([Complex64::new(-(2.0 * s * s - 1.0), 0.0), ONE]);
        assert!(op_dist(&extract_block(&q), &want).unwrap() < 1e-10);
    }

    #[test]
    fn parity_mismatch_is_rejected() {
        let be = sine_block_encoding(&diag_unitary(&[0.1, 0.2])).unwrap();
        let phi = PhaseSequence::new(vec![0.1, 0.2]);
        assert!(qsvt_circuit(&be, &phi, Parity::Odd).is_err());
        assert!(qsvt_circuit(&be, &PhaseSequence::new(vec![]), Parity::Even).is_err());
    }

    #[test]
    fn lcu_of_imaginary_odd_polynomial_vanishes() {
        let be = sine_block_encoding(&diag_unitary(&random_h(2, 0.4, 5))).unwrap();
        // e^{i pi/2 Z} R(x) has top-left entry i x.
        let l = lcu_real_part(&be, &PhaseSequence::new(vec![PI / 2.0])).unwrap();
        assert!(spectral_norm(&extract_block(&l)) < 1e-12);
        assert_eq!(l.ancillas(), 2);
    }

    #[test]
    fn lcu_of_real_polynomial_matches_qsvt() {
        let be = sine_block_encoding(&diag_unitary(&random_h(2, 0.4, 6))).unwrap();
        let p = Polynomial::from_real(&[0.0, 0.0, -1.0], Basis::Chebyshev, Parity::Even).unwrap();
        let phi = find_phases(&p).unwrap();
        let q = qsvt_circuit(&be, &phi, Parity::Even).unwrap();
        let l = lcu_real_part(&be, &phi).unwrap();
        assert!(op_dist(&extract_block(&l), &extract_block(&q)).unwrap() < 1e-10);
    }

    #[test]
    fn logarithm_of_identity_is_zero() {
        let be = hamiltonian_from_unitary(&UnitaryMatrix::identity(data(1)), 1e-4, 0.29).unwrap();
        assert!(spectral_norm(&extract_block(&be)) < 1e-10);
    }

    #[test]
    fn logarithm_recovers_a_diagonal_hamiltonian() {
        let h = [0.25, -0.1];
        let be = hamiltonian_from_unitary(&diag_unitary(&h), 1e-4, 0.29).unwrap();
        let want = diag(h.iter().map(|&v| Complex64::new(v, 0.0)));
        let err = op_dist(&extract_block(&be), &want).unwrap();
        assert!(err <= 1e-4, "{err}");
        assert!(err <= be.certified_error());
    }

    #[test]
    fn logarithm_of_a_general_hermitian_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::from_fn(4, 4, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let mut h = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
        h *= Complex64::new(0.2 / spectral_norm(&h), 0.0);
        let u = exp_i_pi(&h, data(2)).unwrap();
        let be = hamiltonian_from_unitary(&u, 1e-6, 0.29).unwrap();
        assert!(op_dist(&extract_block(&be), &h).unwrap() <= 1e-6);
    }

    #[test]
    fn logarithm_rejects_saturated_sines() {
        let err = hamiltonian_from_unitary(&diag_unitary(&[0.5, 0.0]), 1e-3, 0.29).unwrap_err();
        assert!(err.to_string().contains("rescale"), "{err}");
    }

    #[test]
    fn call_count_grows_linearly_in_log_precision() {
        let u = diag_unitary(&[0.1, -0.2]);
        let calls: Vec<f64> = [1e-2, 1e-4, 1e-6, 1e-8]
            .iter()
            .map(|&e| hamiltonian_from_unitary(&u, e, 0.29).unwrap().cu_calls() as f64)
            .collect();
        // Equal steps in log(1/eps) should add a near-constant number of calls.
        let steps: Vec<f64> = calls.windows(2).map(|w| w[1] - w[0]).collect();
        let mean = steps.iter().sum::<f64>() / steps.len() as f64;
        assert!(mean > 0.0, "{calls:?}");
        assert!(steps.iter().all(|s| (s - mean).abs() <= 0.2 * mean), "{calls:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sine_encoding_is_exact(n in 1usize..=3, seed in any::<u64>()) {
            let h = random_h(n, 0.99, seed);
            let be = sine_block_encoding(&diag_unitary(&h)).unwrap();
            let want = diag(h.iter().map(|&v| Complex64::new((PI * v).sin(), 0.0)));
            prop_assert!(op_dist(&extract_block(&be), &want).unwrap() <= 1e-12);
            prop_assert!(be.unitary().unitarity_error() <= 1e-12);
        }

        #[test]
        fn qsvt_is_an_eigenvalue_transform(
            n in 1usize..=3,
            seed in any::<u64>(),
            phases in proptest::collection::vec(-PI..PI, 1..10),
        ) {
            let h = random_h(n, 0.49, seed);
            let be = sine_block_encoding(&diag_unitary(&h)).unwrap();
            let phi = PhaseSequence::new(phases);
            let q = qsvt_circuit(&be, &phi, Parity::of_degree(phi.len())).unwrap();
            let want = diag(h.iter().map(|&v| reconstruct(&phi, (PI * v).sin())));
            prop_assert!(op_dist(&extract_block(&q), &want).unwrap() <= 1e-10);
            prop_assert!(q.unitary().unitarity_error() <= 1e-10);
            let l = lcu_real_part(&be, &phi).unwrap();
            let want_re = diag(h.iter().map(|&v| Complex64::new(reconstruct(&phi, (PI * v).sin()).re, 0.0)));
            prop_assert!(op_dist(&extract_block(&l), &want_re).unwrap() <= 1e-10);
        }

        #[test]
        fn qsvt_is_robust_to_block_error(
            seed in any::<u64>(),
            eps in prop_oneof![Just(1e-6), Just(1e-4)],
            phases in proptest::collection::vec(-PI..PI, 1..8),
        ) {
            let be = sine_block_encoding(&diag_unitary(&random_h(2, 0.45, seed))).unwrap();
            let noisy = be.with_injected_error(eps, seed ^ 1).unwrap();
            let phi = PhaseSequence::new(phases);
            let parity = Parity::of_degree(phi.len());
            let exact = qsvt_circuit(&be, &phi, parity).unwrap();
            let perturbed = qsvt_circuit(&noisy, &phi, parity).unwrap();
            let err = op_dist(&extract_block(&perturbed), &extract_block(&exact)).unwrap();
            prop_assert!(err <= perturbed.certified_error());
            prop_assert!((perturbed.certified_error() - 4.0 * phi.len() as f64 * eps.sqrt()).abs() < 1e-12);
        }
    }
}
