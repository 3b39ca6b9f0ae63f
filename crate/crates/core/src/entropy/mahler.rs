//! Mahler measure of a polynomial in `(L, M)`, by torus quadrature and by
//! Jensen's formula on the roots in `L`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{rat_to_f64, BivariatePolynomial, LaurentPoly};
use crate::quad::{integrate, integrate_with, QuadOptions};
use crate::spectral::roots::{aberth, relative_residual};

#[derive(Clone, Debug, Serialize)]
pub struct MahlerMeasure {
    /// `(1/4π²) ∬ log|A|` over the torus.
    pub torus: f64,
    pub torus_error: f64,
    /// `(1/2π) Σ_j ∫ log⁺|L_j(t)| dt + m(leading coefficient)`.
    pub jensen: Option<f64>,
    pub jensen_error: f64,
    /// Mahler measure of the leading `L`-coefficient.
    pub leading: f64,
    pub warnings: Vec<String>,
}

impl MahlerMeasure {
    /// Best available value.
    pub fn value(&self) -> f64 {
        self.jensen.unwrap_or(self.torus)
    }

    pub fn discrepancy(&self) -> Option<f64> {
        self.jensen.map(|j| (j - self.torus).abs())
    }
}

fn eval_laurent(p: &LaurentPoly, z: C64) -> C64 {
    p.poly.eval(z) * z.powi(p.shift as i32)
}

/// Mahler measure of a one-variable polynomial from its roots.
fn mahler_1(p: &LaurentPoly) -> Result<(f64, Vec<C64>)> {
    let c: Vec<C64> = p.poly.to_c64();
    let lead = c.last().copied().unwrap_or_default();
    if lead.norm() == 0.0 {
        return Err(Error::Degenerate("zero polynomial".into()));
    }
    let roots = aberth(&c, None);
    let m = lead.norm().ln() + roots.iter().map(|r| r.norm().ln().max(0.0)).sum::<f64>();
    Ok((m, roots))
}

/// `(1/4π²) ∫∫ log|A(e^{iθ}, e^{iφ})| dθ dφ` by nested adaptive quadrature.
fn torus_integral(a: &BivariatePolynomial) -> (f64, f64) {
    let terms: Vec<(i32, i32, f64)> = a.terms().map(|(&(i, j), c)| (i as i32, j as i32, rat_to_f64(c))).collect();
    let inner = QuadOptions { abs_tol: 1e-10, rel_tol: 0.0, max_panels: 4000 };
    let outer = QuadOptions { abs_tol: 1e-8, rel_tol: 0.0, max_panels: 2000 };
    let mut inner_err: f64 = 0.0;
    let r = integrate(
        |phi| {
            let r = integrate(
                |theta| {
                    let z: C64 = terms.iter().map(|&(i, j, c)| C64::from_polar(c, i as f64 * theta + j as f64 * phi)).sum();
                    z.norm().ln()
                },
                0.0,
                2.0 * PI,
                inner,
            );
            inner_err = inner_err.max(r.error);
            r.value
        },
        0.0,
        2.0 * PI,
        outer,
    );
    let scale = 4.0 * PI * PI;
    (r.value / scale, (r.error + 2.0 * PI * inner_err) / scale)
}

/// Mahler measure of `A(L, M)`, computed two independent ways.
pub fn mahler_measure(a: &BivariatePolynomial) -> Result<MahlerMeasure> {
    if a.is_zero() {
        return Err(Error::Degenerate("Mahler measure of the zero polynomial".into()));
    }
    let rows = a.outer_coefficients();
    let lo = *rows.keys().next().unwrap();
    let hi = *rows.keys().next_back().unwrap();
    let (leading, lead_roots) = mahler_1(&rows[&hi])?;
    let (torus, torus_error) = torus_integral(a);
    let mut warnings = Vec::new();

    if hi == lo {
        // no L-dependence beyond a monomial factor
        return Ok(MahlerMeasure { torus, torus_error, jensen: Some(leading), jensen_error: 0.0, leading, warnings });
    }

    let coeffs = |t: f64| -> Vec<C64> {
        let m = C64::from_polar(1.0, t);
        (lo..=hi).map(|k| rows.get(&k).map_or(C64::default(), |p| eval_laurent(p, m))).collect()
    };
    let breaks: Vec<f64> = lead_roots
        .iter()
        .filter(|z| (z.norm() - 1.0).abs() < 1e-9)
        .map(|z| z.arg().rem_euclid(2.0 * PI))
        .collect();
    let opts = QuadOptions { abs_tol: 1e-11, rel_tol: 0.0, max_panels: 8000 };
    let jensen = integrate_with(
        |t| {
            let c = coeffs(t);
            let roots = aberth(&c, None);
            if let Some(bad) = roots.iter().find(|&&z| relative_residual(&c, z) > 1e-8) {
                return Err(Error::Residual {
                    residual: relative_residual(&c, *bad),
                    tol: 1e-8,
                    context: format!("root of A(L, e^({t}i))"),
                });
            }
            Ok(roots.iter().map(|z| z.norm().ln().max(0.0)).sum())
        },
        0.0,
        2.0 * PI,
        &breaks,
        opts,
    );
    let (jensen, jensen_error) = match jensen {
        Ok(r) => (Some(r.value / (2.0 * PI) + leading), r.error / (2.0 * PI)),
        Err(e) => {
            warnings.push(format!("root route failed, torus quadrature only: {e}"));
            (None, f64::NAN)
        }
    };
    Ok(MahlerMeasure { torus, torus_error, jensen, jensen_error, leading, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{parse_polynomial, Symbols};

    fn m(text: &str) -> MahlerMeasure {
        mahler_measure(&parse_polynomial(text, &Symbols::a_polynomial()).unwrap()).unwrap()
    }

    #[test]
    fn constant_root() {
        let r = m("L - 2");
        assert!((r.torus - 2f64.ln()).abs() < 1e-8);
        assert!((r.jensen.unwrap() - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn unimodular_root() {
        let r = m("L - 1");
        assert!(r.torus.abs() < 1e-7);
        assert!(r.jensen.unwrap().abs() < 1e-12);
    }

    #[test]
    fn leading_coefficient_counts() {
        // m(3 L M + 1) = log 3
        let r = m("3*L*M + 1");
        assert!((r.jensen.unwrap() - 3f64.ln()).abs() < 1e-9);
        assert!((r.torus - 3f64.ln()).abs() < 1e-7);
    }

    #[test]
    fn one_plus_x_plus_y() {
        // Smyth: m(1 + x + y) = 3√3/(4π) L(χ_{-3}, 2)
        let l = 0.781_302_412_896_486_3;
        let exact = 3.0 * 3f64.sqrt() / (4.0 * PI) * l;
        let r = m("1 + L + M");
        assert!((r.jensen.unwrap() - exact).abs() < 1e-9, "{:?}", r);
        assert!((r.torus - exact).abs() < 1e-6, "{:?}", r);
    }
}
