use std::fmt;

use num_rational::BigRational;

use super::poly::{BivariatePolynomial, RatFn1, C64};
use crate::error::{Error, Result};

/// Quotient of two [`BivariatePolynomial`]s. Equality is by cross-multiplication.
#[derive(Clone, Debug)]
pub struct RationalFunction2 {
    num: BivariatePolynomial,
    den: BivariatePolynomial,
}

impl PartialEq for RationalFunction2 {
    fn eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl RationalFunction2 {
    pub fn new(num: BivariatePolynomial, den: BivariatePolynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Invalid("zero denominator".into()));
        }
        Ok(Self { num, den }.normalized())
    }

    pub fn from_poly(p: BivariatePolynomial) -> Self {
        Self { num: p, den: BivariatePolynomial::one() }.normalized()
    }

    pub fn zero() -> Self {
        Self::from_poly(BivariatePolynomial::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(BivariatePolynomial::one())
    }

    pub fn numerator(&self) -> &BivariatePolynomial {
        &self.num
    }

    pub fn denominator(&self) -> &BivariatePolynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Strip the common monomial factor and make the denominator's leading
    /// coefficient 1. Idempotent.
    pub fn normalized(&self) -> Self {
        if self.num.is_zero() {
            return Self { num: BivariatePolynomial::zero(), den: BivariatePolynomial::one() };
        }
        let (na, nb) = self.num.min_exponents().unwrap();
        let (da, db) = self.den.min_exponents().unwrap();
        let (sa, sb) = (na.min(da), nb.min(db));
        let lead = self.den.leading_coefficient().unwrap().recip();
        let num = self.num.shift(-sa, -sb).scale(&lead);
        let den = self.den.shift(-sa, -sb).scale(&lead);
        if num == den {
            return Self { num: BivariatePolynomial::one(), den: BivariatePolynomial::one() };
        }
        Self { num, den }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self { num: &self.num * &o.num, den: &self.den * &o.den }.normalized()
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self { num: &self.num + &o.num, den: self.den.clone() }.normalized();
        }
        Self {
            num: &(&self.num * &o.den) + &(&o.num * &self.den),
            den: &self.den * &o.den,
        }
        .normalized()
    }

    pub fn neg(&self) -> Self {
        Self { num: -&self.num, den: self.den.clone() }
    }

    pub fn recip(&self) -> Result<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self { num: self.num.scale(c), den: self.den.clone() }.normalized()
    }

    /// Substitute `Q -> q^i Q`.
    pub fn shift_outer(&self, i: i64) -> Self {
        Self { num: self.num.shift_outer(i), den: self.den.shift_outer(i) }.normalized()
    }

    /// Evaluate with the scale-aware guard
    /// `|den| < threshold · (1 + |num|)` ⇒ singular.
    pub fn eval(&self, x: C64, y: C64, threshold: f64) -> Result<C64> {
        let n = self.num.eval(x, y);
        let d = self.den.eval(x, y);
        if d.norm() < threshold * (1.0 + n.norm()) {
            return Err(Error::Singular { at: format!("Q = {x}, q = {y}") });
        }
        Ok(n / d)
    }

    /// Set `q = 1`. Fails when the denominator vanishes identically there.
    pub fn at_q_one(&self) -> Option<RatFn1> {
        let n = self.num.at_inner_one();
        let d = self.den.at_inner_one();
        if d.is_zero() {
            return None;
        }
        Some(RatFn1::from_laurent(&n, &d))
    }

    pub fn format_with(&self, outer: &str, inner: &str) -> String {
        format!(
            "({}) / ({})",
            self.num.format_with(outer, inner),
            self.den.format_with(outer, inner)
        )
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    /// `Some(p)` when the denominator is a nonzero constant.
    pub fn as_polynomial(&self) -> Option<BivariatePolynomial> {
        let c = self.den.as_constant()?;
        Some(self.num.scale(&c.recip()))
    }
}

impl fmt::Display for RationalFunction2 {
    /// A denominator of 1 is left out.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == BivariatePolynomial::one() {
            write!(f, "({})", self.num)
        } else {
            f.write_str(&self.format_with("Q", "q"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::poly::rat;

    fn q() -> BivariatePolynomial {
        BivariatePolynomial::inner()
    }
    fn big_q() -> BivariatePolynomial {
        BivariatePolynomial::outer()
    }

    #[test]
    fn normalization_is_idempotent() {
        let num = &(&big_q() * &q()) + &big_q().pow(3);
        let den = (&big_q() * &q()).scale(&rat(3, 1));
        let r = RationalFunction2::new(num, den).unwrap();
        assert_eq!(r.normalized().numerator(), r.numerator());
        assert_eq!(r.normalized().denominator(), r.denominator());
        // common factor Q was removed
        assert_eq!(r.numerator().min_exponents().unwrap().0, 0);
    }

    #[test]
    fn equality_by_cross_multiplication() {
        let a = RationalFunction2::new(big_q(), &big_q() + &q()).unwrap();
        let b = RationalFunction2::new(&big_q() * &q(), &(&big_q() * &q()) + &q().pow(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(RationalFunction2::new(big_q(), BivariatePolynomial::zero()).is_err());
    }
}
