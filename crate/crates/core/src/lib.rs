//! Oracle quantum-state preparation through quantum signal processing.
//!
//! Given a classical amplitude table `c: [2^n] -> [0, 1]`, the crate compiles
//! the phase oracle `U_c = diag(exp(i pi c(x) / 2))`, block-encodes the
//! generator `H_c = diag(c(x) / 2)` by applying an arcsin polynomial to a
//! sine block-encoding, and amplifies the post-selected branch with a
//! sign-function polynomial. Every stage runs on a dense simulator, so each
//! error bound along the way can be checked exactly at small qubit counts.
//!
//! Module map:
//!
//! - [`poly`]: polynomials, the arcsin and sign approximants, and the
//!   real-to-complex completion required by QSP.
//! - [`phases`]: phase factors for the reflection-convention QSP ansatz.
//! - [`sim`]: dense state vectors, unitaries, projectors and gates.
//! - [`oracle`]: amplitude oracles and the phase-kickback compiler.
//! - [`block`]: block encodings, QSVT circuits and the unitary logarithm.
//! - [`amplify`]: fixed-point amplification of a rank-one block.
//! - [`pipeline`]: end-to-end preparation, bound checks and sweeps.

pub mod amplify;
pub mod block;
mod error;
pub mod oracle;
pub mod phases;
pub mod pipeline;
pub mod poly;
pub mod sim;

pub use error::{Error, Result};
pub use num_complex::Complex64;
