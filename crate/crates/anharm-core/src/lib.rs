//! Arbitrary-precision eigenvalue bounds for one-dimensional Schrödinger
//! problems with polynomial potentials.
//!
//! The wave function's logarithmic derivative φ = L/K is represented through
//! two entire functions L and K solving a linear first-order system that
//! depends on a polynomial gauge function G. Power-series coefficients of L
//! and K follow from a simple recursion; requiring K(x_max) = 0 at a large
//! but finite x_max pins an upper bound on an eigenvalue, L(x_max) = 0 a
//! lower bound. Gauge choice trades series convergence against bifurcation
//! strength; closed-form error estimates control the finite-x_max error.

pub mod big;
pub mod diagnostics;
pub mod error;
pub mod gauge;
pub mod model;
pub mod par;
pub mod quantize;
pub mod series;

pub use big::BigReal;
pub use error::SolverError;
pub use model::{parse_polynomial, validate_problem, GaugeFunction, Polynomial, Problem};
pub use quantize::{EigenvalueResult, SolveConfig};
pub use series::{EvalResult, InitialData, Parity, SeriesSolution};
