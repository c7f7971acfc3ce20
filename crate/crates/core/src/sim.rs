//! Dense state-vector and unitary simulation.
//!
//! Qubit 0 is the most significant bit of a basis index. Registers are laid
//! out in order, so ancilla/control registers listed first occupy the
//! leading bits and a block-encoded operator is the literal top-left block.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::poly::parse_complex_line;
use crate::{Error, Result};

pub const DEFAULT_MAX_QUBITS: usize = 14;
/// Norm slack allowed on states.
pub const NORM_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;
pub const PROJECTOR_TOL: f64 = 1e-12;
/// Below this squared norm a projection counts as failed.
const EMPTY_PROJECTION: f64 = 1e-28;
/// Dimensions up to this use an SVD for spectral norms.
const EXACT_NORM_DIM: usize = 256;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub qubits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Layout {
    registers: Vec<Register>,
}

impl Layout {
    pub fn new(registers: Vec<Register>) -> Self {
        Self { registers }
    }

    pub fn single(name: &str, qubits: usize) -> Self {
        Self::new(vec![Register { name: name.to_string(), qubits }])
    }

    pub fn from_pairs(pairs: &[(&str, usize)]) -> Self {
        Self::new(pairs.iter().map(|&(n, q)| Register { name: n.to_string(), qubits: q }).collect())
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn qubits(&self) -> usize {
        self.registers.iter().map(|r| r.qubits).sum()
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits()
    }

    /// Index of the first qubit of the named register.
    pub fn offset(&self, name: &str) -> Option<usize> {
        let mut acc = 0;
        for r in &self.registers {
            if r.name == name {
                return Some(acc);
            }
            acc += r.qubits;
        }
        None
    }

    /// Qubit indices of the named register, most significant first.
    pub fn qubits_of(&self, name: &str) -> Option<Vec<usize>> {
        let off = self.offset(name)?;
        let r = self.registers.iter().find(|r| r.name == name)?;
        Some((off..off + r.qubits).collect())
    }

    /// `self` followed by `other` in tensor order.
    pub fn then(&self, other: &Layout) -> Layout {
        let mut registers = self.registers.clone();
        registers.extend(other.registers.iter().cloned());
        Layout { registers }
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
    layout: Layout,
}

impl StateVector {
    /// Rejects vectors whose length does not match the layout or whose norm
    /// exceeds `1 + NORM_TOL`.
    pub fn new(amplitudes: DVector<Complex64>, layout: Layout) -> Result<Self> {
        check_dim(layout.dim(), amplitudes.len())?;
        let norm = amplitudes.norm();
        if norm > 1.0 + NORM_TOL {
            return Err(Error::InvalidParameter(format!("state norm {norm} exceeds 1")));
        }
        Ok(Self { amplitudes, layout })
    }

    pub fn from_vec(amplitudes: Vec<Complex64>, layout: Layout) -> Result<Self> {
        Self::new(DVector::from_vec(amplitudes), layout)
    }

    pub(crate) fn from_parts(amplitudes: DVector<Complex64>, layout: Layout) -> Self {
        Self { amplitudes, layout }
    }

    pub fn basis(layout: Layout, index: usize) -> Result<Self> {
        let dim = layout.dim();
        if index >= dim {
            return Err(Error::InvalidParameter(format!("basis index {index} outside dimension {dim}")));
        }
        let mut amplitudes = DVector::from_element(dim, ZERO);
        amplitudes[index] = ONE;
        Ok(Self { amplitudes, layout })
    }

    pub fn zero(layout: Layout) -> Self {
        Self::basis(layout, 0).expect("index 0 is always valid")
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `dim` header, then `re im` per amplitude.
    pub fn to_text(&self) -> String {
        dump(self.dim(), self.amplitudes.iter())
    }

    /// Reads a dump into a single register named `q`.
    pub fn from_text(text: &str) -> Result<Self> {
        let (dim, entries) = undump(text, |d| d)?;
        let qubits = log2_exact(dim)?;
        Self::from_vec(entries, Layout::single("q", qubits))
    }
}

fn log2_exact(dim: usize) -> Result<usize> {
    if dim.is_power_of_two() {
        Ok(dim.trailing_zeros() as usize)
    } else {
        Err(Error::Parse(format!("dimension {dim} is not a power of two")))
    }
}

fn dump<'a>(dim: usize, entries: impl Iterator<Item = &'a Complex64>) -> String {
    let mut out = format!("{dim}\n");
    for c in entries {
        let _ = writeln!(out, "{:.17e} {:.17e}", c.re, c.im);
    }
    out
}

fn undump(text: &str, count: impl Fn(usize) -> usize) -> Result<(usize, Vec<Complex64>)> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty dump".into()))?;
    let dim: usize = header.parse().map_err(|_| Error::Parse(format!("bad dimension `{header}`")))?;
    let entries = lines.map(parse_complex_line).collect::<Result<Vec<_>>>()?;
    if entries.len() != count(dim) {
        return Err(Error::Parse(format!("expected {} entries, found {}", count(dim), entries.len())));
    }
    Ok((dim, entries))
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    entries: DMatrix<Complex64>,
    layout: Layout,
}

impl UnitaryMatrix {
    /// Checks shape and `||U^dagger U - I|| <= UNITARY_TOL`.
    pub fn new(entries: DMatrix<Complex64>, layout: Layout) -> Result<Self> {
        check_dim(layout.dim(), entries.nrows())?;
        check_dim(layout.dim(), entries.ncols())?;
        let u = Self { entries, layout };
        let err = u.unitarity_error();
        if err > UNITARY_TOL {
            return Err(Error::InvalidParameter(format!("matrix is not unitary: ||U'U - I|| = {err:.3e}")));
        }
        Ok(u)
    }

    pub(crate) fn from_parts(entries: DMatrix<Complex64>, layout: Layout) -> Self {
        Self { entries, layout }
    }

    pub fn identity(layout: Layout) -> Self {
        let d = layout.dim();
        Self { entries: DMatrix::identity(d, d), layout }
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { entries: self.entries.adjoint(), layout: self.layout.clone() }
    }

    /// `self * other` (apply `other` first).
    pub fn compose(&self, other: &UnitaryMatrix) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self { entries: &self.entries * &other.entries, layout: self.layout.clone() })
    }

    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        check_dim(self.dim(), s.dim())?;
        Ok(StateVector::from_parts(&self.entries * &s.amplitudes, s.layout.clone()))
    }

    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        let g = self.entries.adjoint() * &self.entries - DMatrix::<Complex64>::identity(d, d);
        spectral_norm(&g)
    }

    /// Top-left `rows x cols` block.
    pub fn block(&self, rows: usize, cols: usize) -> DMatrix<Complex64> {
        self.entries.view((0, 0), (rows, cols)).into_owned()
    }

    /// `dim` header, then `re im` per entry in row-major order.
    pub fn to_text(&self) -> String {
        let d = self.dim();
        let t = self.entries.transpose();
        dump(d, t.iter())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (dim, entries) = undump(text, |d| d * d)?;
        let qubits = log2_exact(dim)?;
        Self::new(DMatrix::from_row_slice(dim, dim, &entries), Layout::single("q", qubits))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    entries: DMatrix<Complex64>,
    rank: usize,
}

impl Projector {
    /// Checks `P^2 = P` and `P^dagger = P` to `PROJECTOR_TOL`.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::NotProjector("matrix is not square".into()));
        }
        let herm = max_abs(&(&entries - entries.adjoint()));
        let idem = max_abs(&(&entries * &entries - &entries));
        if herm > PROJECTOR_TOL || idem > PROJECTOR_TOL {
            return Err(Error::NotProjector(format!(
                "hermiticity defect {herm:.3e}, idempotency defect {idem:.3e}"
            )));
        }
        let rank = entries.trace().re.round() as usize;
        Ok(Self { entries, rank })
    }

    /// Projector onto the span of the given computational basis states.
    pub fn basis_states(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for &i in indices {
            if i >= dim {
                return Err(Error::InvalidParameter(format!("basis index {i} outside dimension {dim}")));
            }
            m[(i, i)] = ONE;
        }
        Ok(Self { rank: m.trace().re.round() as usize, entries: m })
    }

    /// `|0..0><0..0|` on the first `ancillas` qubits, identity on the remaining `data` qubits.
    pub fn zero_ancillas(ancillas: usize, data: usize) -> Self {
        let indices: Vec<usize> = (0..1usize << data).collect();
        Self::basis_states(1 << (ancillas + data), &indices).expect("indices are in range")
    }

    /// `|v><v| / <v|v>`.
    pub fn rank_one(v: &DVector<Complex64>) -> Result<Self> {
        let n2 = v.norm_squared();
        if n2 == 0.0 {
            return Err(Error::NotProjector("zero vector".into()));
        }
        Ok(Self { entries: v * v.adjoint() / Complex64::new(n2, 0.0), rank: 1 })
    }

    pub fn identity(dim: usize) -> Self {
        Self { entries: DMatrix::identity(dim, dim), rank: dim }
    }

    pub fn zero(dim: usize) -> Self {
        Self { entries: DMatrix::from_element(dim, dim, ZERO), rank: 0 }
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `e^{i phi (2P - 1)} = e^{i phi} P + e^{-i phi} (1 - P)` as a matrix.
    pub fn phase_matrix(&self, phi: f64) -> DMatrix<Complex64> {
        let d = self.dim();
        let e = Complex64::from_polar(1.0, phi);
        let id = DMatrix::<Complex64>::identity(d, d);
        &self.entries * (e - e.conj()) + id * e.conj()
    }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |a, c| a.max(c.norm()))
}

/// Circuit elements. Qubit lists are most significant first.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    /// `diag(1, e^{i angle})`.
    Phase { qubit: usize, angle: f64 },
    Matrix { qubits: Vec<usize>, matrix: DMatrix<Complex64> },
    Diagonal { qubits: Vec<usize>, entries: Vec<Complex64> },
    /// Applies `gate` on the subspace where every control qubit is 1.
    Controlled { controls: Vec<usize>, gate: Box<Gate> },
    /// `e^{i angle (2P - 1)}` on the full space.
    ProjectorPhase { projector: Projector, angle: f64 },
}

impl Gate {
    pub fn controlled(control: usize, gate: Gate) -> Gate {
        Gate::Controlled { controls: vec![control], gate: Box::new(gate) }
    }

    /// Controlled `diag(1, e^{i angle})`.
    pub fn cphase(control: usize, target: usize, angle: f64) -> Gate {
        Gate::controlled(control, Gate::Phase { qubit: target, angle })
    }

    fn max_qubit(&self) -> Option<usize> {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) | Gate::Phase { qubit: q, .. } => Some(*q),
            Gate::Matrix { qubits, .. } | Gate::Diagonal { qubits, .. } => qubits.iter().copied().max(),
            Gate::Controlled { controls, gate } => {
                controls.iter().copied().chain(gate.max_qubit()).max()
            }
            Gate::ProjectorPhase { .. } => None,
        }
    }
}

fn single_qubit(g: &Gate) -> Option<(usize, [[Complex64; 2]; 2])> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::new(0.0, 1.0);
    let c = |x: f64| Complex64::new(x, 0.0);
    Some(match g {
        Gate::H(q) => (*q, [[c(h), c(h)], [c(h), c(-h)]]),
        Gate::X(q) => (*q, [[ZERO, ONE], [ONE, ZERO]]),
        Gate::Y(q) => (*q, [[ZERO, -i], [i, ZERO]]),
        Gate::Z(q) => (*q, [[ONE, ZERO], [ZERO, c(-1.0)]]),
        Gate::Phase { qubit, angle } => (*qubit, [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, *angle)]]),
        _ => return None,
    })
}

/// Applies `gate` in place to a vector of `nq` qubits, restricted to basis
/// indices whose `control_mask` bits are all set.
fn apply_in_place(gate: &Gate, amps: &mut [Complex64], nq: usize, control_mask: usize) -> Result<()> {
    let dim = amps.len();
    let bit = |q: usize| 1usize << (nq - 1 - q);
    if let Some(q) = gate.max_qubit() {
        if q >= nq {
            return Err(Error::QubitOutOfRange { qubit: q, qubits: nq });
        }
    }
    if let Some((q, m)) = single_qubit(gate) {
        let b = bit(q);
        for i in 0..dim {
            if i & b == 0 && i & control_mask == control_mask {
                let (a0, a1) = (amps[i], amps[i | b]);
                amps[i] = m[0][0] * a0 + m[0][1] * a1;
                amps[i | b] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        return Ok(());
    }
    match gate {
        Gate::Matrix { qubits, matrix } => {
            let k = qubits.len();
            check_dim(1 << k, matrix.nrows())?;
            check_dim(1 << k, matrix.ncols())?;
            let bits: Vec<usize> = qubits.iter().map(|&q| bit(q)).collect();
            let all: usize = bits.iter().sum();
            let offsets: Vec<usize> = (0..1usize << k)
                .map(|s| (0..k).filter(|&j| s >> (k - 1 - j) & 1 == 1).map(|j| bits[j]).sum())
                .collect();
            let mut buf = vec![ZERO; 1 << k];
            for i in 0..dim {
                if i & all == 0 && i & control_mask == control_mask {
                    for (s, &o) in offsets.iter().enumerate() {
                        buf[s] = amps[i | o];
                    }
                    for (r, &o) in offsets.iter().enumerate() {
                        amps[i | o] = (0..buf.len()).map(|c| matrix[(r, c)] * buf[c]).sum();
                    }
                }
            }
            Ok(())
        }
        Gate::Diagonal { qubits, entries } => {
            let k = qubits.len();
            check_dim(1 << k, entries.len())?;
            for (i, a) in amps.iter_mut().enumerate() {
                if i & control_mask == control_mask {
                    let s = qubits
                        .iter()
                        .fold(0usize, |acc, &q| (acc << 1) | usize::from(i & bit(q) != 0));
                    *a *= entries[s];
                }
            }
            Ok(())
        }
        Gate::Controlled { controls, gate } => {
            let mask = controls.iter().fold(control_mask, |m, &c| m | bit(c));
            apply_in_place(gate, amps, nq, mask)
        }
        Gate::ProjectorPhase { projector, angle } => {
            if control_mask != 0 {
                return Err(Error::InvalidParameter("controlled projector phases are not supported".into()));
            }
            check_dim(dim, projector.dim())?;
            let v = DVector::from_column_slice(amps);
            let out = projector_phase_vec(projector, *angle, &v);
            amps.copy_from_slice(out.as_slice());
            Ok(())
        }
        _ => unreachable!("single-qubit gates handled above"),
    }
}

pub fn apply(gate: &Gate, s: &StateVector) -> Result<StateVector> {
    let nq = s.layout.qubits();
    let mut amps = s.amplitudes.clone();
    apply_in_place(gate, amps.as_mut_slice(), nq, 0)?;
    Ok(StateVector::from_parts(amps, s.layout.clone()))
}

pub fn apply_circuit(circuit: &[Gate], s: &StateVector) -> Result<StateVector> {
    circuit.iter().try_fold(s.clone(), |acc, g| apply(g, &acc))
}

fn projector_phase_vec(pi: &Projector, phi: f64, v: &DVector<Complex64>) -> DVector<Complex64> {
    let e = Complex64::from_polar(1.0, phi);
    let pv = &pi.entries * v;
    &pv * (e - e.conj()) + v * e.conj()
}

/// `e^{i phi} P s + e^{-i phi} (1 - P) s`.
pub fn projector_phase(pi: &Projector, phi: f64, s: &StateVector) -> Result<StateVector> {
    check_dim(pi.dim(), s.dim())?;
    Ok(StateVector::from_parts(projector_phase_vec(pi, phi, &s.amplitudes), s.layout.clone()))
}

/// Deterministic post-selection: `(P s / ||P s||, ||P s||^2)`, or `None` with
/// probability 0 when the projection vanishes.
pub fn project_measure(pi: &Projector, s: &StateVector) -> Result<(Option<StateVector>, f64)> {
    check_dim(pi.dim(), s.dim())?;
    let v = &pi.entries * &s.amplitudes;
    let p = v.norm_squared();
    if p < EMPTY_PROJECTION {
        return Ok((None, 0.0));
    }
    let n = p.sqrt();
    Ok((Some(StateVector::from_parts(v / Complex64::new(n, 0.0), s.layout.clone())), p))
}

/// Sampled two-outcome measurement `{P, 1 - P}`; returns the post-measurement
/// state and whether the `P` outcome occurred.
pub fn sample_measure<R: Rng>(pi: &Projector, s: &StateVector, rng: &mut R) -> Result<(StateVector, bool)> {
    check_dim(pi.dim(), s.dim())?;
    let total = s.amplitudes.norm_squared();
    let v = &pi.entries * &s.amplitudes;
    let p = v.norm_squared() / total.max(f64::MIN_POSITIVE);
    let hit = rng.random::<f64>() < p;
    let out = if hit { v } else { &s.amplitudes - v };
    let n = out.norm();
    if n == 0.0 {
        return Err(Error::ZeroAmplitude);
    }
    Ok((StateVector::from_parts(out / Complex64::new(n, 0.0), s.layout.clone()), hit))
}

/// Follows one basis state through a circuit built from X, Y, Z, phase,
/// diagonal and controlled versions of those. Such circuits map basis states
/// to phased basis states, so this is exact at any register width. Returns
/// `None` when the circuit contains another gate.
pub fn track_basis(circuit: &[Gate], qubits: usize, index: u128) -> Result<Option<(u128, Complex64)>> {
    if qubits > 128 {
        return Err(Error::TooManyQubits { qubits, limit: 128 });
    }
    let bit = |q: usize| 1u128 << (qubits - 1 - q);
    let mut state = (index, ONE);
    for g in circuit {
        if let Some(q) = g.max_qubit() {
            if q >= qubits {
                return Err(Error::QubitOutOfRange { qubit: q, qubits });
            }
        }
        match track_gate(g, &bit, state) {
            Some(next) => state = next,
            None => return Ok(None),
        }
    }
    Ok(Some(state))
}

/// One gate of [`track_basis`].
fn track_gate(g: &Gate, bit: &dyn Fn(usize) -> u128, (i, ph): (u128, Complex64)) -> Option<(u128, Complex64)> {
    let on = |q: usize| i & bit(q) != 0;
    let imag = Complex64::new(0.0, 1.0);
    Some(match g {
        Gate::X(q) => (i ^ bit(*q), ph),
        Gate::Y(q) => (i ^ bit(*q), ph * if on(*q) { -imag } else { imag }),
        Gate::Z(q) => (i, if on(*q) { -ph } else { ph }),
        Gate::Phase { qubit, angle } => (i, if on(*qubit) { ph * Complex64::from_polar(1.0, *angle) } else { ph }),
        Gate::Diagonal { qubits, entries } => {
            let s = qubits.iter().fold(0usize, |acc, &q| (acc << 1) | usize::from(on(q)));
            (i, ph * *entries.get(s)?)
        }
        Gate::Controlled { controls, gate } => {
            if controls.iter().all(|&c| on(c)) {
                return track_gate(gate, bit, (i, ph));
            }
            // Still reject gates the tracker cannot follow.
            track_gate(gate, bit, (i, ph))?;
            (i, ph)
        }
        _ => return None,
    })
}

pub fn circuit_unitary(circuit: &[Gate], layout: Layout) -> Result<UnitaryMatrix> {
    circuit_unitary_with_limit(circuit, layout, DEFAULT_MAX_QUBITS)
}

/// Dense product of the gates in application order, built column by column.
pub fn circuit_unitary_with_limit(circuit: &[Gate], layout: Layout, max_qubits: usize) -> Result<UnitaryMatrix> {
    let nq = layout.qubits();
    if nq > max_qubits {
        return Err(Error::TooManyQubits { qubits: nq, limit: max_qubits });
    }
    let dim = layout.dim();
    let mut m = DMatrix::<Complex64>::identity(dim, dim);
    m.as_mut_slice()
        .par_chunks_mut(dim)
        .try_for_each(|col| circuit.iter().try_for_each(|g| apply_in_place(g, col, nq, 0)))?;
    Ok(UnitaryMatrix::from_parts(m, layout))
}

/// Euclidean distance `||a - b||`.
pub fn state_dist(a: &StateVector, b: &StateVector) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok((&a.amplitudes - &b.amplitudes).norm())
}

/// `|<a|b>|`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm())
}

/// Spectral-norm distance `||A - B||`.
pub fn op_dist(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Result<f64> {
    check_dim(a.nrows(), b.nrows())?;
    check_dim(a.ncols(), b.ncols())?;
    Ok(spectral_norm(&(a - b)))
}

/// Largest singular value: an SVD for small matrices, power iteration on
/// `A^dagger A` otherwise.
pub fn spectral_norm(a: &DMatrix<Complex64>) -> f64 {
    if a.nrows().max(a.ncols()) <= EXACT_NORM_DIM {
        return a.clone().singular_values().iter().fold(0.0, |m: f64, &v| m.max(v));
    }
    spectral_norm_power(a, 1e-12)
}

/// Power iteration with a Rayleigh-quotient stopping rule at relative `tol`.
pub fn spectral_norm_power(a: &DMatrix<Complex64>, tol: f64) -> f64 {
    let n = a.ncols();
    if n == 0 {
        return 0.0;
    }
    // Deterministic start with no special alignment to basis vectors.
    let mut v = DVector::from_iterator(
        n,
        (0..n).map(|k| Complex64::from_polar(1.0 + 0.1 * ((k * 7 % 13) as f64), 0.37 * k as f64)),
    );
    v /= Complex64::new(v.norm(), 0.0);
    let mut est = 0.0;
    for _ in 0..20_000 {
        let w = a.adjoint() * (a * &v);
        let lambda = v.dotc(&w).re;
        let wn = w.norm();
        if wn == 0.0 {
            return 0.0;
        }
        v = w / Complex64::new(wn, 0.0);
        if (lambda - est).abs() <= tol * lambda.abs() {
            est = lambda;
            break;
        }
        est = lambda;
    }
    est.max(0.0).sqrt()
}
