//! Polynomials with declared basis and parity, plus the approximants the
//! state-preparation pipeline needs.
//!
//! Coefficients are complex and indexed by degree. Two bases are supported:
//! monomials `x^k` and Chebyshev polynomials of the first kind `T_k(x)`.
//! Evaluation uses Horner's rule or the Clenshaw recurrence respectively, and
//! both accept complex arguments so the QSP conditions off the real segment
//! can be checked.

mod approx;
pub(crate) mod cheb;
mod complete;
pub(crate) mod roots;

pub use approx::{
    arcsin_taylor, arcsin_taylor_with_limit, arcsin_taylor_coefficient, sign_approx,
    sign_approx_with_limit, Approximation, ApproximationSpec, Target, DEFAULT_MAX_DEGREE,
};
pub use complete::{complete_to_complex, complete_with_complement, Completion};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::{Error, Result};

/// Coefficients below this magnitude count as zero for degree and parity.
pub const COEFF_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Monomial,
    Chebyshev,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    pub fn of_degree(d: usize) -> Self {
        if d.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Whether a coefficient at `index` is allowed under this parity.
    fn admits(self, index: usize) -> bool {
        match self {
            Parity::Even => index.is_multiple_of(2),
            Parity::Odd => index % 2 == 1,
            Parity::None => true,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Monomial => "monomial",
            Basis::Chebyshev => "chebyshev",
        })
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monomial" => Ok(Basis::Monomial),
            "chebyshev" => Ok(Basis::Chebyshev),
            other => Err(Error::Parse(format!("unknown basis `{other}`"))),
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::None => "none",
        })
    }
}

impl FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            "none" => Ok(Parity::None),
            other => Err(Error::Parse(format!("unknown parity `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
    basis: Basis,
    parity: Parity,
    domain: (f64, f64),
}

impl Polynomial {
    /// Builds a polynomial on `[-1, 1]`, rejecting coefficients that break
    /// the declared parity by more than [`COEFF_TOL`].
    pub fn new(coeffs: Vec<Complex64>, basis: Basis, parity: Parity) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("polynomial needs at least one coefficient".into()));
        }
        if let Some((k, c)) = coeffs
            .iter()
            .enumerate()
            .find(|(k, c)| !parity.admits(*k) && c.norm() > COEFF_TOL)
        {
            return Err(Error::InvalidParameter(format!(
                "coefficient {k} has magnitude {:.3e} but the polynomial is declared {parity}",
                c.norm()
            )));
        }
        Ok(Self::from_parts(coeffs, basis, parity))
    }

    pub fn from_real(coeffs: &[f64], basis: Basis, parity: Parity) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(), basis, parity)
    }

    /// Zeroes out cross-parity coefficients instead of rejecting them.
    pub(crate) fn from_parts(mut coeffs: Vec<Complex64>, basis: Basis, parity: Parity) -> Self {
        for (k, c) in coeffs.iter_mut().enumerate() {
            if !parity.admits(k) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Self { coeffs, basis, parity, domain: (-1.0, 1.0) }
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::from_parts(vec![0.0.into(), 1.0.into()], Basis::Monomial, Parity::Odd)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Highest index whose coefficient exceeds [`COEFF_TOL`] (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| c.norm() > COEFF_TOL).unwrap_or(0)
    }

    /// Number of stored coefficients minus one; may exceed [`degree`](Self::degree)
    /// when the polynomial is padded to a nominal length.
    pub fn nominal_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im.abs() <= COEFF_TOL)
    }

    /// Largest coefficient magnitude that violates the declared parity.
    pub fn cross_parity_mass(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(k, _)| !self.parity.admits(*k))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        match self.basis {
            Basis::Monomial => self
                .coeffs
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c),
            Basis::Chebyshev => cheb::clenshaw(&self.coeffs, x),
        }
    }

    pub fn eval_real(&self, x: f64) -> Complex64 {
        self.eval(Complex64::new(x, 0.0))
    }

    /// Coefficient-wise complex conjugate `P*`, so that `P*(x) = conj(P(x))` on the reals.
    pub fn conj(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.conj()).collect(), ..self.clone() }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * factor).collect(), ..self.clone() }
    }

    pub fn real_part(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| Complex64::new(c.re, 0.0)).collect(), ..self.clone() }
    }

    pub fn imag_part(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| Complex64::new(c.im, 0.0)).collect(), ..self.clone() }
    }

    /// Pads (or trims trailing zeros) to exactly `len` coefficients.
    pub fn with_len(&self, len: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(len.max(1), Complex64::new(0.0, 0.0));
        Self { coeffs, ..self.clone() }
    }

    pub fn to_chebyshev(&self) -> Self {
        match self.basis {
            Basis::Chebyshev => self.clone(),
            Basis::Monomial => Self::from_parts(
                cheb::monomial_to_chebyshev(&self.coeffs),
                Basis::Chebyshev,
                self.parity,
            ),
        }
    }

    pub fn to_monomial(&self) -> Self {
        match self.basis {
            Basis::Monomial => self.clone(),
            Basis::Chebyshev => Self::from_parts(
                cheb::chebyshev_to_monomial(&self.coeffs),
                Basis::Monomial,
                self.parity,
            ),
        }
    }

    /// Maximum of `|P(x)|` over `points` equally spaced samples of `[a, b]`.
    pub fn sup_norm_on(&self, a: f64, b: f64, points: usize) -> f64 {
        sample_grid(a, b, points)
            .map(|x| self.eval_real(x).norm())
            .fold(0.0, f64::max)
    }

    /// Text form: a `basis parity degree` header followed by one `re im` line
    /// per coefficient.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.basis, self.parity, self.nominal_degree());
        for c in &self.coeffs {
            out.push_str(&format!("{:.17e} {:.17e}\n", c.re, c.im));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty polynomial file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("bad polynomial header `{header}`")));
        }
        let basis: Basis = fields[0].parse()?;
        let parity: Parity = fields[1].parse()?;
        let degree: usize = fields[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad degree `{}`", fields[2])))?;
        let coeffs = lines
            .map(parse_complex_line)
            .collect::<Result<Vec<_>>>()?;
        if coeffs.len() != degree + 1 {
            return Err(Error::Parse(format!(
                "header declares degree {degree} but {} coefficients follow",
                coeffs.len()
            )));
        }
        Self::new(coeffs, basis, parity)
    }
}

pub(crate) fn parse_complex_line(line: &str) -> Result<Complex64> {
    let mut parts = line.split_whitespace();
    let mut next = || -> Result<f64> {
        parts
            .next()
            .ok_or_else(|| Error::Parse(format!("expected `re im`, got `{line}`")))?
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("`{line}`: {e}")))
    };
    let re = next()?;
    let im = next()?;
    Ok(Complex64::new(re, im))
}

pub(crate) fn sample_grid(a: f64, b: f64, points: usize) -> impl Iterator<Item = f64> {
    let n = points.max(2);
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn monomial_eval() {
        let p = Polynomial::from_real(&[0.0, 0.0, 1.0], Basis::Monomial, Parity::Even).unwrap();
        assert!((p.eval_real(3.0) - Complex64::new(9.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn chebyshev_t2_eval() {
        let p = Polynomial::from_real(&[0.0, 0.0, 1.0], Basis::Chebyshev, Parity::Even).unwrap();
        assert!((p.eval_real(0.5).re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn parity_violation_rejected() {
        let err = Polynomial::from_real(&[0.0, 1.0, 0.5], Basis::Monomial, Parity::Odd);
        assert!(err.is_err());
    }

    #[test]
    fn degree_ignores_tiny_tail() {
        let p = Polynomial::from_real(&[0.0, 1.0, 0.0, 1e-14], Basis::Monomial, Parity::None).unwrap();
        assert_eq!(p.degree(), 1);
        assert_eq!(p.nominal_degree(), 3);
    }

    #[test]
    fn text_round_trip() {
        let p = Polynomial::new(
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.25, -1.0 / 3.0)],
            Basis::Chebyshev,
            Parity::Odd,
        )
        .unwrap();
        let q = Polynomial::from_text(&p.to_text()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn text_rejects_wrong_count() {
        assert!(Polynomial::from_text("monomial odd 3\n0 0\n1 0\n").is_err());
    }

    proptest! {
        #[test]
        fn basis_conversion_degree_50(coeffs in proptest::collection::vec(-1.0f64..1.0, 51)) {
            // The Chebyshev form must agree with the monomial form pointwise.
            let p = Polynomial::from_real(&coeffs, Basis::Monomial, Parity::None).unwrap();
            let c = p.to_chebyshev();
            for x in sample_grid(-1.0, 1.0, 101) {
                prop_assert!((p.eval_real(x) - c.eval_real(x)).norm() < 1e-12);
            }
        }

        #[test]
        fn basis_round_trip_coefficients(coeffs in proptest::collection::vec(-1.0f64..1.0, 11)) {
            // Coefficient round trips through the monomial basis lose about
            // (1 + sqrt 2)^d in relative accuracy, so they are checked at low degree.
            let p = Polynomial::from_real(&coeffs, Basis::Monomial, Parity::None).unwrap();
            let back = p.to_chebyshev().to_monomial();
            for (a, b) in p.coeffs().iter().zip(back.coeffs()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
