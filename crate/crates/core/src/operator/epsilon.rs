//! ε-difference equations `Σ_j a_j(x, ε) ψ(x + jε) = 0` on an interval.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::parser::{parse_polynomial, Symbols};
use super::poly::{BivariatePolynomial, C64};
use super::qoperator::QOperator;
use super::SINGULAR_THRESHOLD;
use crate::error::{Error, Result};
use crate::series;

const TAU: f64 = 2.0 * std::f64::consts::PI;
const FD_STEP: f64 = 1e-5;

pub type CoefficientFn = Arc<dyn Fn(usize, f64, f64) -> C64 + Send + Sync>;

/// Coefficient values recorded on a `k`-grid at a fixed ε.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Tabulated {
    pub eps: f64,
    pub x_lo: f64,
    /// `values[k][j] = a_j(x_lo + kε, ε)`
    pub values: Vec<Vec<C64>>,
    pub provenance: String,
}

impl Tabulated {
    pub fn step_of(&self, x: f64, eps: f64) -> Result<usize> {
        if (eps - self.eps).abs() > 1e-12 * self.eps {
            return Err(Error::Invalid(format!(
                "tabulated coefficients exist only at eps = {}, requested {eps}",
                self.eps
            )));
        }
        let kf = (x - self.x_lo) / eps;
        let k = kf.round();
        if (kf - k).abs() > 1e-6 || k < 0.0 || k as usize >= self.values.len() {
            return Err(Error::Invalid(format!("x = {x} is not a tabulated grid point")));
        }
        Ok(k as usize)
    }
}

#[derive(Clone)]
pub enum CoefficientSource {
    /// `a_j(x, ε) = b_j(e^{2πix}, e^{2πiε})`.
    Operator(QOperator),
    /// Exact polynomials in `x` (outer) and `ε` (inner).
    Polynomial(Vec<BivariatePolynomial>),
    Closure { degree: usize, f: CoefficientFn },
    Tabulated(Tabulated),
}

impl fmt::Debug for CoefficientSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Operator(op) => write!(f, "Operator({op})"),
            Self::Polynomial(p) => {
                let parts: Vec<String> = p.iter().map(|c| c.format_with("x", "eps")).collect();
                write!(f, "Polynomial({parts:?})")
            }
            Self::Closure { degree, .. } => write!(f, "Closure(degree {degree})"),
            Self::Tabulated(t) => write!(f, "Tabulated({} steps, {})", t.values.len(), t.provenance),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EpsilonEquation {
    source: CoefficientSource,
    interval: (f64, f64),
}

impl EpsilonEquation {
    pub fn from_operator(op: QOperator, interval: (f64, f64)) -> Self {
        Self { source: CoefficientSource::Operator(op), interval }
    }

    pub fn from_polynomials(coeffs: Vec<BivariatePolynomial>, interval: (f64, f64)) -> Result<Self> {
        if coeffs.len() < 2 || coeffs.last().unwrap().is_zero() {
            return Err(Error::Degenerate("need degree ≥ 1 with nonzero leading coefficient".into()));
        }
        Ok(Self { source: CoefficientSource::Polynomial(coeffs), interval })
    }

    /// Coefficients written as expressions in `x` and `eps`, lowest index first.
    pub fn from_expressions(coeffs: &[&str], interval: (f64, f64)) -> Result<Self> {
        let polys = coeffs
            .iter()
            .map(|s| parse_polynomial(s, &Symbols::epsilon()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_polynomials(polys, interval)
    }

    pub fn from_closure(degree: usize, f: CoefficientFn, interval: (f64, f64)) -> Self {
        Self { source: CoefficientSource::Closure { degree, f }, interval }
    }

    pub fn from_tabulated(t: Tabulated, interval: (f64, f64)) -> Self {
        Self { source: CoefficientSource::Tabulated(t), interval }
    }

    pub fn with_interval(mut self, interval: (f64, f64)) -> Self {
        self.interval = interval;
        self
    }

    pub fn degree(&self) -> usize {
        match &self.source {
            CoefficientSource::Operator(op) => op.degree(),
            CoefficientSource::Polynomial(p) => p.len() - 1,
            CoefficientSource::Closure { degree, .. } => *degree,
            CoefficientSource::Tabulated(t) => t.values.first().map_or(0, |v| v.len().saturating_sub(1)),
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn source(&self) -> &CoefficientSource {
        &self.source
    }

    pub fn operator(&self) -> Option<&QOperator> {
        match &self.source {
            CoefficientSource::Operator(op) => Some(op),
            _ => None,
        }
    }

    /// `a_j(x, ε)`.
    pub fn a(&self, j: usize, x: f64, eps: f64) -> Result<C64> {
        match &self.source {
            CoefficientSource::Operator(op) => op
                .eval_coefficient(j, C64::from_polar(1.0, TAU * x), C64::from_polar(1.0, TAU * eps))
                .map_err(|_| Error::Singular { at: format!("a_{j} at (x, eps) = ({x}, {eps})") }),
            CoefficientSource::Polynomial(p) => {
                Ok(p[j].eval(C64::new(x, 0.0), C64::new(eps, 0.0)))
            }
            CoefficientSource::Closure { f, .. } => {
                let v = f(j, x, eps);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Singular { at: format!("a_{j} at (x, eps) = ({x}, {eps})") })
                }
            }
            CoefficientSource::Tabulated(t) => Ok(t.values[t.step_of(x, eps)?][j]),
        }
    }

    pub fn coeffs(&self, x: f64, eps: f64) -> Result<Vec<C64>> {
        (0..=self.degree()).map(|j| self.a(j, x, eps)).collect()
    }

    /// Characteristic coefficients `a_j(z, 0)` at complex `z`, when the source
    /// is analytic in closed form.
    pub fn char_coeffs_complex(&self, z: C64) -> Option<Vec<C64>> {
        match &self.source {
            CoefficientSource::Operator(op) => {
                let big_q = (C64::new(0.0, TAU) * z).exp();
                op.eval_all(big_q, C64::new(1.0, 0.0)).ok()
            }
            CoefficientSource::Polynomial(p) => Some(p.iter().map(|c| c.eval(z, C64::new(0.0, 0.0))).collect()),
            _ => None,
        }
    }

    /// Taylor coefficients in ε at fixed `x`: `out[j][r]` is the ε^r coefficient of `a_j`.
    pub fn eps_series(&self, x: f64, order: usize) -> Result<Vec<Vec<C64>>> {
        let n = order + 1;
        match &self.source {
            CoefficientSource::Operator(op) => op
                .coefficients()
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    if c.is_zero() {
                        return Ok(vec![C64::new(0.0, 0.0); n]);
                    }
                    let num = c.numerator().exp_series(x, 0.0, 0.0, 1.0, order);
                    let den = c.denominator().exp_series(x, 0.0, 0.0, 1.0, order);
                    if den[0].norm() < SINGULAR_THRESHOLD * (1.0 + num[0].norm()) {
                        return Err(Error::Singular { at: format!("a_{j} at (x, eps) = ({x}, 0)") });
                    }
                    Ok(series::div(&num, &den, n))
                })
                .collect(),
            CoefficientSource::Polynomial(p) => Ok(p
                .iter()
                .map(|c| {
                    let mut out = vec![C64::new(0.0, 0.0); n];
                    for (&(a, b), v) in c.terms() {
                        if b >= 0 && (b as usize) < n {
                            out[b as usize] += super::poly::rat_to_f64(v) * x.powi(a as i32);
                        }
                    }
                    out
                })
                .collect()),
            CoefficientSource::Closure { f, degree } => {
                if order > 1 {
                    return Err(Error::Invalid(
                        "ε-expansion beyond first order needs closed-form coefficients".into(),
                    ));
                }
                Ok((0..=*degree)
                    .map(|j| {
                        let a0 = f(j, x, 0.0);
                        let mut v = vec![a0];
                        if order == 1 {
                            v.push((f(j, x, FD_STEP) - f(j, x, -FD_STEP)) / (2.0 * FD_STEP));
                        }
                        v
                    })
                    .collect())
            }
            CoefficientSource::Tabulated(_) => {
                Err(Error::Invalid("tabulated coefficients have no ε-expansion".into()))
            }
        }
    }

    /// `∂_x a_j(x, 0)`.
    pub fn x_derivative(&self, x: f64) -> Result<Vec<C64>> {
        match &self.source {
            CoefficientSource::Operator(op) => op
                .coefficients()
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    if c.is_zero() {
                        return Ok(C64::new(0.0, 0.0));
                    }
                    let num = c.numerator().exp_series(x, 0.0, 1.0, 0.0, 1);
                    let den = c.denominator().exp_series(x, 0.0, 1.0, 0.0, 1);
                    if den[0].norm() < SINGULAR_THRESHOLD * (1.0 + num[0].norm()) {
                        return Err(Error::Singular { at: format!("a_{j} at (x, eps) = ({x}, 0)") });
                    }
                    Ok(series::div(&num, &den, 2)[1])
                })
                .collect(),
            CoefficientSource::Polynomial(p) => Ok(p
                .iter()
                .map(|c| {
                    let mut acc = C64::new(0.0, 0.0);
                    for (&(a, b), v) in c.terms() {
                        if b == 0 && a != 0 {
                            acc += super::poly::rat_to_f64(v) * a as f64 * x.powi(a as i32 - 1);
                        }
                    }
                    acc
                })
                .collect()),
            CoefficientSource::Closure { f, degree } => Ok((0..=*degree)
                .map(|j| (f(j, x + FD_STEP, 0.0) - f(j, x - FD_STEP, 0.0)) / (2.0 * FD_STEP))
                .collect()),
            CoefficientSource::Tabulated(_) => {
                Err(Error::Invalid("tabulated coefficients have no x-derivative".into()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::parse_operator;

    #[test]
    fn operator_substitution() {
        let eq = parse_operator("E - Q").unwrap().to_epsilon_form((0.0, 1.0));
        let a0 = eq.a(0, 0.25, 0.0).unwrap();
        assert!((a0 - C64::new(0.0, -1.0)).norm() < 1e-15);
        let eq = parse_operator("E^2 - (Q+1)*E + Q").unwrap().to_epsilon_form((0.0, 1.0));
        assert_eq!(eq.a(2, 0.37, 0.01).unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn eps_series_matches_finite_differences() {
        let eq = parse_operator("(1 - q Q^2)/(2 + q^3) E^2 + q Q E - 1").unwrap().to_epsilon_form((0.0, 1.0));
        let x = 0.3;
        let s = eq.eps_series(x, 2).unwrap();
        let h = 1e-4;
        for j in 0..=2 {
            let d1 = (eq.a(j, x, h).unwrap() - eq.a(j, x, -h).unwrap()) / (2.0 * h);
            let d2 = (eq.a(j, x, h).unwrap() - 2.0 * eq.a(j, x, 0.0).unwrap() + eq.a(j, x, -h).unwrap()) / (h * h);
            assert!((s[j][0] - eq.a(j, x, 0.0).unwrap()).norm() < 1e-12);
            assert!((s[j][1] - d1).norm() < 1e-6);
            assert!((s[j][2] - d2 / 2.0).norm() < 1e-4);
        }
        let dx = eq.x_derivative(x).unwrap();
        for j in 0..=2 {
            let h = 1e-6;
            let fd = (eq.a(j, x + h, 0.0).unwrap() - eq.a(j, x - h, 0.0).unwrap()) / (2.0 * h);
            assert!((dx[j] - fd).norm() < 1e-6 * (1.0 + dx[j].norm()), "{j}: {} vs {fd}", dx[j]);
        }
    }

    #[test]
    fn polynomial_source() {
        let eq = EpsilonEquation::from_expressions(&["-(2 + x)*(1 + eps)", "1"], (0.0, 1.0)).unwrap();
        assert_eq!(eq.degree(), 1);
        let s = eq.eps_series(0.5, 1).unwrap();
        assert!((s[0][0] + 2.5).norm() < 1e-15);
        assert!((s[0][1] + 2.5).norm() < 1e-15);
        assert!((eq.x_derivative(0.5).unwrap()[0] + 1.0).norm() < 1e-15);
    }

    #[test]
    fn singular_point_reported() {
        let eq = parse_operator("E - 1/(1 + Q)").unwrap().to_epsilon_form((0.0, 1.0));
        assert!(matches!(eq.a(0, 0.5, 0.0), Err(Error::Singular { .. })));
    }
}
