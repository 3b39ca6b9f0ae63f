//! Reduction of the degree by a known solution: with
//! `b_j = a_j ψ(x + jε)/ψ(x)` one has `Σ_j b_j = 0`, so
//! `Σ_j b_j λ^j = (λ − 1) Σ_s c_s λ^s` with `c_s = Σ_{j>s} b_j`.

use crate::error::{Error, Result};
use crate::operator::{EpsilonEquation, Tabulated};
use crate::simulator::{LogScaled, Mode, RecursionTrace};

/// Bound on `|Σ_j b_j| / max_j |b_j|`.
pub const DEFLATION_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Deflation {
    /// Degree `d − 1`, tabulated on the steps of the input trace.
    pub equation: EpsilonEquation,
    pub max_residual: f64,
}

/// Equation of degree `d − 1` satisfied by `f(x)/ψ(x)` differences, from a
/// solution `ψ` of `eq` given as an ε-mode trace.
pub fn deflate(eq: &EpsilonEquation, dominant: &RecursionTrace) -> Result<Deflation> {
    let Mode::Eps { eps, .. } = dominant.mode else {
        return Err(Error::Invalid("deflation needs an ε-mode trace".into()));
    };
    let d = eq.degree();
    if d < 1 {
        return Err(Error::Invalid("degree 0".into()));
    }
    let x0 = eq.interval().0;
    let mut rows = Vec::new();
    let mut max_residual: f64 = 0.0;
    let last = dominant.last_k();
    for k in dominant.k0..=last - d as i64 {
        let psi = dominant.at(k).unwrap();
        if psi.is_zero() {
            return Err(Error::Invalid(format!("dominant solution vanishes at k = {k}")));
        }
        let x = x0 + k as f64 * eps;
        let a = eq.coeffs(x, eps)?;
        let b: Vec<_> = (0..=d).map(|j| a[j] * LogScaled::ratio(&dominant.at(k + j as i64).unwrap(), &psi)).collect();
        let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let res = b.iter().sum::<num_complex::Complex64>().norm() / scale;
        if !(res <= DEFLATION_TOL) {
            return Err(Error::Residual {
                residual: res,
                tol: DEFLATION_TOL,
                context: format!("input is not a solution at k = {k}"),
            });
        }
        max_residual = max_residual.max(res);
        rows.push((0..d).map(|s| b[s + 1..].iter().sum()).collect());
    }
    let x_lo = x0 + dominant.k0 as f64 * eps;
    let x_hi = x_lo + (rows.len().saturating_sub(1)) as f64 * eps;
    let t = Tabulated { eps, x_lo, values: rows, provenance: "deflated by a solution of the input equation".into() };
    Ok(Deflation { equation: EpsilonEquation::from_tabulated(t, (x_lo, x_hi)), max_residual })
}
