//! Amplitude oracles and the phase-kickback compiler.
//!
//! An oracle is an explicit table `c: [2^n] -> [0, 1]` together with its
//! `m`-bit truncation. The bit oracle `O_c` writes the truncated value into a
//! value register by XOR; the phase unitary `U_c = diag(e^{i pi c_m(x) / 2})`
//! is compiled from two copies of `O_c` around a ladder of controlled phase
//! rotations acting on a kickback qubit prepared in `|1>`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sim::{apply_circuit, circuit_unitary, track_basis, Gate, Layout, StateVector, UnitaryMatrix, DEFAULT_MAX_QUBITS};
use crate::{Error, Result};

/// Largest supported fixed-point width. `c * 2^m` stays exact in an `f64` up to here.
pub const MAX_BITS: usize = 52;

pub const DATA: &str = "data";
pub const VALUE: &str = "value";
pub const KICKBACK: &str = "kickback";

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeOracle {
    n: usize,
    m: usize,
    values: Vec<f64>,
    quantized: Vec<f64>,
    codes: Vec<u64>,
}

/// `m`-bit code of `c`, clamped so that `c = 1` maps to `1 - 2^-m`.
fn quantize(c: f64, m: usize) -> u64 {
    let top = (1u64 << m) - 1;
    ((c * (1u64 << m) as f64).floor() as u64).min(top)
}

impl AmplitudeOracle {
    pub fn new(n: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || n > DEFAULT_MAX_QUBITS {
            return Err(Error::InvalidParameter(format!("n = {n} must lie in 1..={DEFAULT_MAX_QUBITS}")));
        }
        if m == 0 || m > MAX_BITS {
            return Err(Error::InvalidParameter(format!("m = {m} must lie in 1..={MAX_BITS}")));
        }
        if values.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: values.len() });
        }
        if let Some((x, c)) = values.iter().enumerate().find(|(_, c)| !(0.0..=1.0).contains(*c)) {
            return Err(Error::InvalidParameter(format!("c({x}) = {c} is outside [0, 1]")));
        }
        let codes: Vec<u64> = values.iter().map(|&c| quantize(c, m)).collect();
        let scale = (1u64 << m) as f64;
        let quantized = codes.iter().map(|&k| k as f64 / scale).collect();
        Ok(Self { n, m, values, quantized, codes })
    }

    /// Same table truncated to a different number of bits.
    pub fn with_bits(&self, m: usize) -> Result<Self> {
        Self::new(self.n, m, self.values.clone())
    }

    pub fn generate(n: usize, m: usize, dist: &Distribution, seed: u64) -> Result<Self> {
        let size = 1usize << n.min(DEFAULT_MAX_QUBITS + 1);
        let values = match *dist {
            Distribution::Uniform => vec![1.0; size],
            Distribution::Indicator(x0) => {
                if x0 >= size {
                    return Err(Error::InvalidParameter(format!("marked item {x0} outside 0..{size}")));
                }
                (0..size).map(|x| if x == x0 { 1.0 } else { 0.0 }).collect()
            }
            Distribution::Gaussian { mu, sigma } => {
                if sigma <= 0.0 {
                    return Err(Error::InvalidParameter(format!("gaussian width {sigma} must be positive")));
                }
                (0..size).map(|x| (-(x as f64 - mu).powi(2) / (2.0 * sigma * sigma)).exp()).collect()
            }
            Distribution::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..size).map(|_| rng.random::<f64>()).collect()
            }
        };
        Self::new(n, m, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn quantized(&self) -> &[f64] {
        &self.quantized
    }

    /// Integer codes `2^m c_m(x)`; bit `m - 1 - j` is value qubit `j`.
    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    fn table(&self, use_exact: bool) -> &[f64] {
        if use_exact {
            &self.values
        } else {
            &self.quantized
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.m);
        for c in &self.values {
            out.push_str(&format!("{c}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty oracle file".into()))?;
        let mut it = header.split_whitespace();
        let mut field = |name: &str| -> Result<usize> {
            it.next()
                .ok_or_else(|| Error::Parse(format!("oracle header lacks {name}")))?
                .parse()
                .map_err(|e| Error::Parse(format!("oracle header {name}: {e}")))
        };
        let n = field("n")?;
        let m = field("m")?;
        if n > DEFAULT_MAX_QUBITS {
            return Err(Error::TooManyQubits { qubits: n, limit: DEFAULT_MAX_QUBITS });
        }
        let values = lines
            .map(|l| l.parse::<f64>().map_err(|e| Error::Parse(format!("amplitude {l:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, m, values)
    }
}

/// Closed-form amplitude generators.
#[derive(Clone, Debug, PartialEq)]
pub enum Distribution {
    Uniform,
    Indicator(usize),
    /// `exp(-(x - mu)^2 / (2 sigma^2))`, peak value 1.
    Gaussian { mu: f64, sigma: f64 },
    /// Independent uniform draws from a seeded generator.
    Random,
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Uniform => write!(f, "uniform"),
            Distribution::Indicator(x0) => write!(f, "indicator:{x0}"),
            Distribution::Gaussian { mu, sigma } => write!(f, "gaussian:{mu},{sigma}"),
            Distribution::Random => write!(f, "random"),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("distribution {s:?}: {why}"));
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        match kind.trim() {
            "uniform" => Ok(Distribution::Uniform),
            "random" => Ok(Distribution::Random),
            "indicator" => args.trim().parse().map(Distribution::Indicator).map_err(|_| bad("expected indicator:x0")),
            "gaussian" => {
                let (mu, sigma) = args.split_once(',').ok_or_else(|| bad("expected gaussian:mu,sigma"))?;
                let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad("expected gaussian:mu,sigma"));
                Ok(Distribution::Gaussian { mu: num(mu)?, sigma: num(sigma)? })
            }
            _ => Err(bad("unknown kind")),
        }
    }
}

/// Data register followed by the value register.
pub fn bit_oracle_layout(c: &AmplitudeOracle) -> Layout {
    Layout::from_pairs(&[(DATA, c.n), (VALUE, c.m)])
}

/// Data, value and kickback registers of the phase circuit.
pub fn phase_circuit_layout(c: &AmplitudeOracle) -> Layout {
    Layout::from_pairs(&[(DATA, c.n), (VALUE, c.m), (KICKBACK, 1)])
}

/// `O_c` as multi-controlled X gates: for each `x`, flip the value bits set in
/// `c_m(x)` on the data pattern `x`. Self-inverse.
pub fn bit_oracle_circuit(c: &AmplitudeOracle) -> Vec<Gate> {
    let n = c.n;
    let data: Vec<usize> = (0..n).collect();
    let mut gates = Vec::new();
    for (x, &code) in c.codes.iter().enumerate() {
        if code == 0 {
            continue;
        }
        let zeros: Vec<usize> = (0..n).filter(|&q| x >> (n - 1 - q) & 1 == 0).collect();
        gates.extend(zeros.iter().map(|&q| Gate::X(q)));
        for j in 0..c.m {
            if code >> (c.m - 1 - j) & 1 == 1 {
                gates.push(Gate::Controlled { controls: data.clone(), gate: Box::new(Gate::X(n + j)) });
            }
        }
        gates.extend(zeros.iter().map(|&q| Gate::X(q)));
    }
    gates
}

/// Permutation `|x>|y> -> |x>|y XOR code(x)>` on `n + m` qubits.
pub fn bit_oracle_unitary(c: &AmplitudeOracle) -> Result<UnitaryMatrix> {
    circuit_unitary(&bit_oracle_circuit(c), bit_oracle_layout(c))
}

/// `O_c`, controlled rotations `e^{i pi scale / 2^{j+2}}` from value bit `j`
/// (most significant first) onto the kickback qubit, then `O_c` again.
/// `scale = 1` gives the phase `pi c_m / 2`, `scale = 2` gives `pi c_m`.
pub fn phase_circuit(c: &AmplitudeOracle, scale: f64) -> Vec<Gate> {
    let oracle = bit_oracle_circuit(c);
    let kick = c.n + c.m;
    let mut gates = oracle.clone();
    for j in 0..c.m {
        let angle = PI * scale / f64::powi(2.0, j as i32 + 2);
        gates.push(Gate::cphase(c.n + j, kick, angle));
    }
    gates.extend(oracle);
    gates
}

/// Runs the phase circuit on every `|x>|0^m>|1>` input. Returns the data
/// block and the largest amplitude left outside the `|0^m>|1>` ancilla state.
/// Uses the dense simulator when the registers fit, basis tracking otherwise.
fn compile_phase(c: &AmplitudeOracle, scale: f64) -> Result<(DMatrix<Complex64>, f64)> {
    if phase_circuit_layout(c).qubits() <= DEFAULT_MAX_QUBITS {
        compile_phase_dense(c, scale)
    } else {
        compile_phase_tracked(c, scale)
    }
}

fn compile_phase_dense(c: &AmplitudeOracle, scale: f64) -> Result<(DMatrix<Complex64>, f64)> {
    let layout = phase_circuit_layout(c);
    let nq = layout.qubits();
    if nq > DEFAULT_MAX_QUBITS {
        return Err(Error::TooManyQubits { qubits: nq, limit: DEFAULT_MAX_QUBITS });
    }
    let circuit = phase_circuit(c, scale);
    let shift = c.m + 1;
    let size = 1usize << c.n;
    let mut block = DMatrix::from_element(size, size, Complex64::new(0.0, 0.0));
    let mut leak: f64 = 0.0;
    for x in 0..size {
        let input = StateVector::basis(layout.clone(), (x << shift) | 1)?;
        let out = apply_circuit(&circuit, &input)?;
        for (i, a) in out.amplitudes().iter().enumerate() {
            if i & ((1 << shift) - 1) == 1 {
                block[(i >> shift, x)] = *a;
            } else {
                leak = leak.max(a.norm());
            }
        }
    }
    Ok((block, leak))
}

fn compile_phase_tracked(c: &AmplitudeOracle, scale: f64) -> Result<(DMatrix<Complex64>, f64)> {
    let nq = phase_circuit_layout(c).qubits();
    let circuit = phase_circuit(c, scale);
    let shift = c.m + 1;
    let size = 1usize << c.n;
    let mut block = DMatrix::from_element(size, size, Complex64::new(0.0, 0.0));
    let mut leak: f64 = 0.0;
    for x in 0..size {
        let input = ((x as u128) << shift) | 1;
        let (out, ph) = track_basis(&circuit, nq, input)?
            .ok_or_else(|| Error::InvalidParameter("phase circuit is not a phased permutation".into()))?;
        if out & ((1u128 << shift) - 1) == 1 {
            block[((out >> shift) as usize, x)] = ph;
        } else {
            leak = leak.max(ph.norm());
        }
    }
    Ok((block, leak))
}

/// `U_c` on the data register, compiled through the kickback circuit.
pub fn phase_unitary(c: &AmplitudeOracle) -> Result<UnitaryMatrix> {
    phase_unitary_scaled(c, 1.0)
}

/// `diag(e^{i pi scale c_m(x) / 2})` from the same circuit with every
/// rotation angle multiplied by `scale`.
pub fn phase_unitary_scaled(c: &AmplitudeOracle, scale: f64) -> Result<UnitaryMatrix> {
    let (block, _) = compile_phase(c, scale)?;
    UnitaryMatrix::new(block, Layout::single(DATA, c.n))
}

/// Largest ancilla amplitude the phase circuit leaves outside `|0^m>|1>`.
pub fn ancilla_leakage(c: &AmplitudeOracle) -> Result<f64> {
    Ok(compile_phase(c, 1.0)?.1)
}

/// `diag(e^{i pi c(x) / 2})` from the exact or the truncated table.
pub fn phase_unitary_direct(c: &AmplitudeOracle, use_exact: bool) -> UnitaryMatrix {
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        1 << c.n,
        c.table(use_exact).iter().map(|&v| Complex64::from_polar(1.0, PI * v / 2.0)),
    ));
    UnitaryMatrix::new(d, Layout::single(DATA, c.n)).expect("diagonal phases are unitary")
}

/// Mean squared amplitude `(1/N) sum c(x)^2`.
pub fn gamma(c: &AmplitudeOracle, use_exact: bool) -> f64 {
    let t = c.table(use_exact);
    t.iter().map(|v| v * v).sum::<f64>() / t.len() as f64
}

/// `sum c(x)|x> / sqrt(N gamma)` from the exact table.
pub fn target_state(c: &AmplitudeOracle) -> Result<StateVector> {
    let norm = c.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroAmplitude);
    }
    let amps = c.values.iter().map(|&v| Complex64::new(v / norm, 0.0)).collect();
    StateVector::from_vec(amps, Layout::single(DATA, c.n))
}

/// Multiplies amplitude `x` by `e^{i pi phi_m(x)}`, using the kickback
/// circuit with doubled rotation angles.
pub fn apply_relative_phase(s: &StateVector, phi: &AmplitudeOracle) -> Result<StateVector> {
    if s.dim() != 1 << phi.n {
        return Err(Error::DimensionMismatch { expected: 1 << phi.n, got: s.dim() });
    }
    let (block, _) = compile_phase(phi, 2.0)?;
    let amps = s.amplitudes().iter().enumerate().map(|(x, a)| a * block[(x, x)]).collect();
    StateVector::from_vec(amps, s.layout().clone())
}
