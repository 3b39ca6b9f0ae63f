//! Named equations shipped with the crate.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::operator::{parse_polynomial, parse_qop, BivariatePolynomial, EpsilonEquation, QOperator, Symbols};

pub const TREFOIL_QOP: &str = include_str!("../corpus/trefoil.qop");
pub const FIGURE8_QOP: &str = include_str!("../corpus/figure8.qop");

/// A-polynomials in the variable `M` of the parametrization `M = e^{it/2}`;
/// the classical limits of the operators are these with `M² = Q`.
pub const TREFOIL_A: &str = "(L - 1)*(L + M^6)";
pub const FIGURE8_A: &str = "(L - 1)*(L - L*M^2 - M^4 - 2*L*M^4 - L^2*M^4 - L*M^6 + L*M^8)";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    Trefoil,
    Figure8,
    /// `f(n+2) = f(n+1) + (n+1) f(n)`.
    Involutions,
    /// `(E − (2+x))(E − 1)` on `[0, 1]`.
    Synthetic2x,
    /// `f(k+1) = (2 + kε) f(k)` on `[0, 1]`.
    SyntheticFirstOrder,
    /// Constant coefficients, eigenvalues 2 and 1/2.
    ConstD2,
}

impl Builtin {
    pub const ALL: [Builtin; 6] =
        [Self::Trefoil, Self::Figure8, Self::Involutions, Self::Synthetic2x, Self::SyntheticFirstOrder, Self::ConstD2];

    pub fn name(self) -> &'static str {
        match self {
            Self::Trefoil => "trefoil",
            Self::Figure8 => "figure8",
            Self::Involutions => "involutions",
            Self::Synthetic2x => "synthetic-2x",
            Self::SyntheticFirstOrder => "synthetic-firstorder",
            Self::ConstD2 => "const-d2",
        }
    }

    pub fn is_knot(self) -> bool {
        matches!(self, Self::Trefoil | Self::Figure8)
    }

    pub fn operator(self) -> Option<QOperator> {
        let text = match self {
            Self::Trefoil => TREFOIL_QOP,
            Self::Figure8 => FIGURE8_QOP,
            Self::ConstD2 => "E^2 - 5/2*E + 1",
            _ => return None,
        };
        Some(parse_qop(text).expect("bundled operator parses"))
    }

    pub fn a_polynomial(self) -> Option<BivariatePolynomial> {
        let text = match self {
            Self::Trefoil => TREFOIL_A,
            Self::Figure8 => FIGURE8_A,
            _ => return None,
        };
        Some(parse_polynomial(text, &Symbols::a_polynomial()).expect("bundled polynomial parses"))
    }

    /// The ε-form on the builtin's natural interval.
    pub fn epsilon(self) -> Option<EpsilonEquation> {
        let eq = match self {
            Self::Synthetic2x => EpsilonEquation::from_expressions(&["2 + x", "-(3 + x)", "1"], (0.0, 1.0)),
            Self::SyntheticFirstOrder => EpsilonEquation::from_expressions(&["-(2 + x)", "1"], (0.0, 1.0)),
            Self::ConstD2 | Self::Trefoil | Self::Figure8 => {
                return self.operator().map(|op| EpsilonEquation::from_operator(op, (0.0, 1.0)));
            }
            Self::Involutions => return None,
        };
        Some(eq.expect("bundled equation parses"))
    }
}

impl FromStr for Builtin {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown builtin '{s}'")))
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for b in Builtin::ALL {
            assert_eq!(b.name().parse::<Builtin>().unwrap(), b);
        }
        assert!("knot".parse::<Builtin>().is_err());
    }

    #[test]
    fn bundled_data_loads() {
        assert_eq!(Builtin::Trefoil.operator().unwrap().degree(), 2);
        assert_eq!(Builtin::Figure8.operator().unwrap().degree(), 3);
        assert_eq!(Builtin::Synthetic2x.epsilon().unwrap().degree(), 2);
        assert_eq!(Builtin::SyntheticFirstOrder.epsilon().unwrap().degree(), 1);
        assert!(Builtin::Involutions.operator().is_none());
    }
}
