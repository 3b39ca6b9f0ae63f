//! The q-difference operator `P = Σ_j b_j(Q, q) E^j`.

use std::fmt;

use super::epsilon::EpsilonEquation;
use super::parser::{parse_expr, Symbols};
use super::poly::{BivariatePolynomial, RatFn1, C64};
use super::rational::RationalFunction2;
use super::SINGULAR_THRESHOLD;
use crate::error::{Error, Result};

/// `Σ_{j=0}^d b_j(Q, q) E^j` acting by `(E f)(k) = f(k+1)`, `(Q f)(k) = q^k f(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QOperator {
    coeffs: Vec<RationalFunction2>,
}

/// The q = 1 specialization `Σ_j b_j(v, 1) λ^j`.
#[derive(Clone, Debug)]
pub struct Classical {
    pub coeffs: Vec<RatFn1>,
    pub warnings: Vec<String>,
}

impl QOperator {
    /// Build from `b_0..b_d`; trailing zeros are trimmed.
    pub fn new(mut coeffs: Vec<RationalFunction2>) -> Result<Self> {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(Error::Degenerate(
                "operator must contain E with a nonzero coefficient".into(),
            ));
        }
        if coeffs.iter().all(|c| c.is_zero()) {
            return Err(Error::Degenerate("zero operator".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[RationalFunction2] {
        &self.coeffs
    }

    pub fn coefficient(&self, j: usize) -> &RationalFunction2 {
        &self.coeffs[j]
    }

    /// `b_j(Q, q)` with the singular-denominator guard.
    pub fn eval_coefficient(&self, j: usize, big_q: C64, q: C64) -> Result<C64> {
        let c = self
            .coeffs
            .get(j)
            .ok_or_else(|| Error::Invalid(format!("coefficient index {j} > degree {}", self.degree())))?;
        if c.is_zero() {
            return Ok(C64::new(0.0, 0.0));
        }
        c.eval(big_q, q, SINGULAR_THRESHOLD).map_err(|_| Error::Singular {
            at: format!("b_{j} at Q = {big_q:.6}, q = {q:.6}"),
        })
    }

    pub fn eval_all(&self, big_q: C64, q: C64) -> Result<Vec<C64>> {
        (0..=self.degree()).map(|j| self.eval_coefficient(j, big_q, q)).collect()
    }

    /// Set `q = 1`. Top coefficients vanishing identically are dropped with a warning.
    pub fn specialize_classical(&self) -> Result<Classical> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (j, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.at_q_one().ok_or(Error::ClassicalPole { j })?);
        }
        let mut warnings = Vec::new();
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
            warnings.push(format!(
                "b_{} vanishes at q = 1; characteristic degree reduced to {}",
                coeffs.len(),
                coeffs.len().saturating_sub(1)
            ));
        }
        if coeffs.len() < 2 {
            return Err(Error::Degenerate("characteristic polynomial has degree 0".into()));
        }
        Ok(Classical { coeffs, warnings })
    }

    /// Multiply on the left by the product of the distinct denominators.
    pub fn clear_denominators(&self) -> Self {
        let mut dens: Vec<BivariatePolynomial> = Vec::new();
        for c in &self.coeffs {
            if !c.is_zero() && c.denominator().as_constant().is_none() && !dens.contains(c.denominator()) {
                dens.push(c.denominator().clone());
            }
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                if c.is_zero() {
                    return c.clone();
                }
                let mut num = c.numerator().clone();
                let mut skipped = false;
                for d in &dens {
                    if !skipped && d == c.denominator() {
                        skipped = true;
                    } else {
                        num = &num * d;
                    }
                }
                let mut r = RationalFunction2::from_poly(num);
                if !skipped {
                    // constant denominator
                    let k = c.denominator().as_constant().expect("constant denominator");
                    r = r.scale(&num_traits::Inv::inv(k));
                }
                r
            })
            .collect();
        Self { coeffs }
    }

    pub fn to_epsilon_form(&self, interval: (f64, f64)) -> EpsilonEquation {
        EpsilonEquation::from_operator(self.clone(), interval)
    }

    /// Serialized normal form, one `b[j] = (num) / (den)` line per coefficient.
    pub fn to_qop_string(&self) -> String {
        let mut s = String::new();
        for (j, c) in self.coeffs.iter().enumerate() {
            s.push_str(&format!("b[{j}] = {}\n", c.format_with("Q", "q")));
        }
        s
    }
}

impl fmt::Display for QOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*E")?,
                _ => write!(f, "{c}*E^{j}")?,
            }
        }
        Ok(())
    }
}

/// Parse an operator expression over `q`, `Q`, `E`.
pub fn parse_operator(text: &str) -> Result<QOperator> {
    let e = parse_expr(text, &Symbols::operator())?;
    QOperator::new(e.into_coefficients())
}

/// Read a `.qop` document: either `b[j] = …` lines or a single operator
/// expression (possibly spread over several lines). `#` starts a comment.
pub fn parse_qop(text: &str) -> Result<QOperator> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect();
    if lines.iter().any(|l| l.starts_with("b[")) {
        let mut slots: Vec<Option<RationalFunction2>> = Vec::new();
        for l in &lines {
            let (lhs, rhs) = l
                .split_once('=')
                .ok_or_else(|| Error::Syntax { pos: 0, msg: format!("expected `b[j] = …` in {l:?}") })?;
            let j: usize = lhs
                .trim()
                .strip_prefix("b[")
                .and_then(|s| s.strip_suffix(']'))
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Syntax { pos: 0, msg: format!("bad coefficient label {lhs:?}") })?;
            let e = parse_expr(rhs, &Symbols::operator())?;
            let mut c = e.into_coefficients();
            if c.len() > 1 {
                return Err(Error::Syntax { pos: 0, msg: format!("coefficient b[{j}] contains E") });
            }
            if slots.len() <= j {
                slots.resize(j + 1, None);
            }
            if slots[j].is_some() {
                return Err(Error::Syntax { pos: 0, msg: format!("b[{j}] given twice") });
            }
            slots[j] = Some(c.pop().unwrap_or_else(RationalFunction2::zero));
        }
        QOperator::new(slots.into_iter().map(|s| s.unwrap_or_else(RationalFunction2::zero)).collect())
    } else {
        parse_operator(&lines.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::poly::rat;

    fn poly(text: &str) -> RationalFunction2 {
        let mut c = parse_expr(text, &Symbols::operator()).unwrap().into_coefficients();
        c.pop().unwrap_or_else(RationalFunction2::zero)
    }

    #[test]
    fn normal_form_reading() {
        let op = parse_operator("E^2 - (Q+1)*E + Q").unwrap();
        assert_eq!(op.degree(), 2);
        assert_eq!(op.coefficient(0), &poly("Q"));
        assert_eq!(op.coefficient(1), &poly("-Q-1"));
        assert_eq!(op.coefficient(2), &poly("1"));
    }

    #[test]
    fn shift_commutes_past_q() {
        let a = parse_operator("E*Q").unwrap();
        let b = parse_operator("q*Q*E").unwrap();
        assert_eq!(a, b);
        assert!(a.coefficient(0).is_zero());
    }

    #[test]
    fn right_division_and_negative_powers() {
        let a = parse_operator("E/Q").unwrap();
        let b = parse_operator("q^-1 Q^-1 E").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shift_in_denominator_rejected() {
        let err = parse_operator("1/(E+1)").unwrap_err();
        assert!(matches!(err, Error::ShiftInDenominator { pos: 2 }));
    }

    #[test]
    fn syntax_errors_report_position() {
        match parse_operator("E^2 + * Q") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_operator("Q + 1"), Err(Error::Degenerate(_))));
    }

    #[test]
    fn rational_literals() {
        let op = parse_operator("E - 7/2").unwrap();
        assert_eq!(op.coefficient(0), &RationalFunction2::from_poly(BivariatePolynomial::constant(rat(-7, 2))));
    }

    #[test]
    fn eval_zero_coefficient_is_exact_zero() {
        let op = parse_operator("E^2 - 1").unwrap();
        assert_eq!(op.eval_coefficient(1, C64::new(0.3, 0.1), C64::new(1.0, 0.0)).unwrap(), C64::new(0.0, 0.0));
        let v = op.eval_coefficient(1, C64::new(0.0, 1.0), C64::new(1.0, 0.0)).unwrap();
        assert_eq!(v, C64::new(0.0, 0.0));
    }

    #[test]
    fn eval_matches_hand_arithmetic() {
        let op = parse_operator("E^2 - (Q+1)*E + Q").unwrap();
        let v = op.eval_coefficient(1, C64::new(0.0, 1.0), C64::new(1.0, 0.0)).unwrap();
        assert!((v - C64::new(-1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn qop_round_trip() {
        let op = parse_operator("(q^3 Q^2 - 1)/(Q (1 - q Q)) + (2/3)*Q*E - E^2/(1+Q)").unwrap();
        let text = op.to_qop_string();
        let back = parse_qop(&text).unwrap();
        assert_eq!(op, back);
    }

    #[test]
    fn clear_denominators_gives_polynomials() {
        let op = parse_operator("1/(1+Q) + E/(1-q Q) + E^2").unwrap();
        let c = op.clear_denominators();
        for b in c.coefficients() {
            assert!(b.denominator().as_constant().is_some());
        }
        // b_2 / b_0 unchanged
        let r0 = op.coefficient(2).mul(&op.coefficient(0).recip().unwrap());
        let r1 = c.coefficient(2).mul(&c.coefficient(0).recip().unwrap());
        assert_eq!(r0, r1);
    }
}
