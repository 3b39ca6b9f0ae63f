//! Coordinates of a solution in a basis of solutions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{LogScaled, RecursionTrace};
use crate::error::{Error, Result};

/// Condition number above which a basis is rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    /// `c_m` with `f = Σ_m c_m ψ_m`.
    pub coeffs: Vec<LogScaled>,
    /// `‖W c − f‖ / ‖f‖` on the scaled system.
    pub residual: f64,
    pub condition: f64,
    /// Determinant of the column-scaled matrix `ψ_m(k+i) / ψ_m(k)`.
    pub det: C64,
    /// `Π_{i<j} (μ_j − μ_i)` with `μ_m = ψ_m(k+1) / ψ_m(k)`.
    pub vandermonde: C64,
}

impl Decomposition {
    /// Ratio of the determinant to its Vandermonde limit.
    pub fn det_ratio(&self) -> C64 {
        self.det / self.vandermonde
    }
}

/// Solve `Σ_m c_m ψ_m(k+i) = f(k+i)`, `i = 0..d`, for the basis `ψ_m`.
pub fn decompose_in_basis(trace: &RecursionTrace, basis: &[RecursionTrace], k: i64) -> Result<Decomposition> {
    let d = basis.len();
    if d == 0 {
        return Err(Error::Invalid("empty basis".into()));
    }
    let get = |t: &RecursionTrace, k: i64| {
        t.at(k).ok_or_else(|| Error::Invalid(format!("index {k} outside the trace")))
    };
    let scales: Vec<LogScaled> = basis.iter().map(|b| get(b, k)).collect::<Result<_>>()?;
    if let Some(m) = scales.iter().position(|s| s.is_zero()) {
        return Err(Error::Invalid(format!("basis solution {} vanishes at k = {k}", m + 1)));
    }
    let fs = get(trace, k)?;
    let f_scale = if fs.is_zero() { LogScaled::ONE } else { fs };
    let mut w = DMatrix::<C64>::zeros(d, d);
    let mut rhs = DVector::<C64>::zeros(d);
    for i in 0..d {
        for (m, b) in basis.iter().enumerate() {
            w[(i, m)] = LogScaled::ratio(&get(b, k + i as i64)?, &scales[m]);
        }
        rhs[i] = LogScaled::ratio(&get(trace, k + i as i64)?, &f_scale);
    }
    let sv = w.clone().singular_values();
    let condition = sv.max() / sv.min();
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(format!("basis matrix condition {condition:.3e} at k = {k}")));
    }
    let c = w.clone().lu().solve(&rhs).ok_or_else(|| Error::IllConditioned("singular basis matrix".into()))?;
    let residual = (&w * &c - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
    let mut vandermonde = C64::new(1.0, 0.0);
    if d > 1 {
        for i in 0..d {
            for j in i + 1..d {
                vandermonde *= w[(1, j)] - w[(1, i)];
            }
        }
    }
    let coeffs = c
        .iter()
        .zip(&scales)
        .map(|(ci, s)| (f_scale / *s).scale(*ci))
        .collect();
    Ok(Decomposition { coeffs, residual, condition, det: w.determinant(), vandermonde })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{iterate_eps, SimOptions};
    use crate::operator::EpsilonEquation;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn two_exponentials() {
        let eq = EpsilonEquation::from_expressions(&["1", "-5/2", "1"], (0.0, 1.0)).unwrap();
        let o = SimOptions::default();
        let up = iterate_eps(&eq, 0.01, &[c(1.0), c(2.0)], o).unwrap();
        let down = iterate_eps(&eq, 0.01, &[c(1.0), c(0.5)], o).unwrap();
        let f = iterate_eps(&eq, 0.01, &[c(8.0), c(8.5)], o).unwrap();
        let dec = decompose_in_basis(&f, &[up, down], 0).unwrap();
        assert!((dec.coeffs[0].to_c64() - c(3.0)).norm() < 1e-8);
        assert!((dec.coeffs[1].to_c64() - c(5.0)).norm() < 1e-8);
        assert!((dec.det_ratio() - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn resonance_is_not_collision() {
        // eigenvalues ±1: equal magnitude, distinct values
        let eq = EpsilonEquation::from_expressions(&["-1", "0", "1"], (0.0, 1.0)).unwrap();
        let o = SimOptions::default();
        let a = iterate_eps(&eq, 0.1, &[c(1.0), c(1.0)], o).unwrap();
        let b = iterate_eps(&eq, 0.1, &[c(1.0), c(-1.0)], o).unwrap();
        let f = iterate_eps(&eq, 0.1, &[c(2.0), c(0.0)], o).unwrap();
        let dec = decompose_in_basis(&f, &[a.clone(), b], 3).unwrap();
        assert!(dec.condition < 10.0);
        // nearly equal basis solutions are rejected
        let near = iterate_eps(&eq, 0.1, &[c(1.0), c(1.0 + 1e-14)], o).unwrap();
        assert!(matches!(decompose_in_basis(&f, &[a, near], 0), Err(Error::IllConditioned(_))));
    }
}
