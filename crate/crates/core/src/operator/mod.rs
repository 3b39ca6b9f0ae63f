//! Exact q-difference operators and their two specializations.

pub mod epsilon;
pub mod parser;
pub mod poly;
pub mod qoperator;
pub mod rational;

pub use epsilon::{CoefficientSource, EpsilonEquation, Tabulated};
pub use parser::{parse_expr, parse_polynomial, Symbols};
pub use poly::{rat, rat_to_f64, BivariatePolynomial, LaurentPoly, Poly1, RatFn1, C64};
pub use qoperator::{parse_operator, parse_qop, Classical, QOperator};
pub use rational::RationalFunction2;

/// `|den| < SINGULAR_THRESHOLD · (1 + |num|)` marks an evaluation singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-13;
