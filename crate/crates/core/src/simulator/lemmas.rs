//! Companion matrices, Vandermonde ratios and transfer-matrix products.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::EpsilonEquation;
use crate::spectral::roots::{aberth, min_separation};

/// Companion matrix of `λ^d + c_{d−1} λ^{d−1} + … + c_0`: shifted identity
/// above, `−c_j` in the last row.
pub fn companion(c: &[C64]) -> DMatrix<C64> {
    let d = c.len();
    let mut a = DMatrix::<C64>::zeros(d, d);
    for i in 0..d.saturating_sub(1) {
        a[(i, i + 1)] = C64::new(1.0, 0.0);
    }
    for j in 0..d {
        a[(d - 1, j)] = -c[j];
    }
    a
}

/// Monic polynomial coefficients `c_0..c_{d−1}` with the given roots.
fn monic_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut p = vec![C64::new(1.0, 0.0)];
    for &r in roots {
        let mut q = vec![C64::new(0.0, 0.0); p.len() + 1];
        for (i, &a) in p.iter().enumerate() {
            q[i + 1] += a;
            q[i] -= r * a;
        }
        p = q;
    }
    p.pop();
    p
}

#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub a: DMatrix<C64>,
    /// `M_{ij} = λ_j^i`.
    pub m: DMatrix<C64>,
    pub d: DMatrix<C64>,
    /// `max |A − M D M⁻¹| / max(1, max |A|)`.
    pub residual: f64,
}

pub const DIAGONALIZATION_TOL: f64 = 1e-10;

/// `A = M D M⁻¹` for the companion matrix with the given distinct roots.
pub fn companion_diagonalize(roots: &[C64]) -> Result<Diagonalization> {
    let d = roots.len();
    if d == 0 {
        return Err(Error::Invalid("no roots".into()));
    }
    if d > 1 && min_separation(roots) <= 1e-10 {
        return Err(Error::Invalid("repeated roots".into()));
    }
    let a = companion(&monic_from_roots(roots));
    let m = DMatrix::from_fn(d, d, |i, j| roots[j].powi(i as i32));
    let dm = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(roots));
    let inv = m.clone().try_inverse().ok_or_else(|| Error::Invalid("singular Vandermonde matrix".into()))?;
    let diff = &a - &m * &dm * inv;
    let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let residual = diff.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
    if residual > DIAGONALIZATION_TOL {
        return Err(Error::Residual { residual, tol: DIAGONALIZATION_TOL, context: "A = M D M⁻¹".into() });
    }
    Ok(Diagonalization { a, m, d: dm, residual })
}

/// `(M⁻¹ N)_{ij} = Π_{l≠i} (y_j − x_l) / (x_i − x_l)` for Vandermonde
/// matrices `M`, `N` on nodes `x`, `y`.
pub fn vandermonde_ratio(x: &[C64], y: &[C64]) -> Result<DMatrix<C64>> {
    let d = x.len();
    if y.len() != d {
        return Err(Error::Invalid("node lists of different length".into()));
    }
    if d > 1 && min_separation(x) == 0.0 {
        return Err(Error::Invalid("coincident nodes".into()));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| {
        (0..d).filter(|&l| l != i).map(|l| (y[j] - x[l]) / (x[i] - x[l])).product()
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct NormProbe {
    pub eps: Vec<f64>,
    /// `sup_k ‖A(k)…A(k_m)‖₂` for each ε.
    pub sup: Vec<f64>,
    /// `max sup / min sup − 1`.
    pub spread: f64,
}

/// Largest singular value.
fn norm2(a: &DMatrix<C64>) -> f64 {
    a.clone().singular_values().max()
}

/// Sup of the 2-norms of the partial transfer-matrix products over the
/// steps in `x ∈ [span.0, span.1]`, for each ε. The characteristic roots at
/// every step must satisfy `|λ| ≤ 1 + C ε`.
pub fn transfer_norm_probe(eq: &EpsilonEquation, c_bound: f64, eps: &[f64], span: (f64, f64)) -> Result<NormProbe> {
    let d = eq.degree();
    let mut sups = Vec::with_capacity(eps.len());
    for &e in eps {
        let k_m = (span.0 / e - 1e-9).ceil() as i64;
        let k_n = (span.1 / e + 1e-9).floor() as i64;
        let mut p = DMatrix::<C64>::identity(d, d);
        let mut sup: f64 = 1.0;
        for k in k_m..=k_n {
            let x = k as f64 * e;
            let a = eq.coeffs(x, e)?;
            let rho = aberth(&a, None).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if rho > 1.0 + c_bound * e {
                return Err(Error::Invalid(format!(
                    "spectral radius {rho:.6} exceeds 1 + Cε = {:.6} at x = {x}",
                    1.0 + c_bound * e
                )));
            }
            let c: Vec<C64> = a[..d].iter().map(|z| z / a[d]).collect();
            p = companion(&c) * p;
            sup = sup.max(norm2(&p));
        }
        sups.push(sup);
    }
    let max = sups.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = sups.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(NormProbe { eps: eps.to_vec(), sup: sups, spread: max / min - 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn two_by_two_by_hand() {
        let dg = companion_diagonalize(&[c(2.0), c(3.0)]).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(-6.0), c(5.0)]);
        assert_eq!(dg.a, want);
        assert!(dg.residual < 1e-12);
    }

    #[test]
    fn roots_of_unity_and_repeats() {
        let dg = companion_diagonalize(&[c(1.0), C64::new(0.0, 1.0), c(-1.0)]).unwrap();
        assert!(dg.residual < 1e-10);
        assert!(companion_diagonalize(&[c(2.0), c(2.0)]).is_err());
    }

    #[test]
    fn vandermonde_special_cases() {
        let x = [c(1.0), c(2.0), C64::new(0.0, 3.0)];
        let id = vandermonde_ratio(&x, &x).unwrap();
        assert!((id - DMatrix::<C64>::identity(3, 3)).norm() < 1e-14);
        assert_eq!(vandermonde_ratio(&[c(4.0)], &[c(7.0)]).unwrap()[(0, 0)], c(1.0));
        assert!(vandermonde_ratio(&[c(1.0), c(1.0)], &[c(1.0), c(2.0)]).is_err());
    }

    #[test]
    fn identity_like_products() {
        let eq = EpsilonEquation::from_expressions(&["-1", "1"], (0.0, 1.0)).unwrap();
        let p = transfer_norm_probe(&eq, 1.0, &[1e-2, 1e-3], (0.0, 1.0)).unwrap();
        assert!(p.sup.iter().all(|s| (s - 1.0).abs() < 1e-12));
        let big = EpsilonEquation::from_expressions(&["-2", "1"], (0.0, 1.0)).unwrap();
        assert!(transfer_norm_probe(&big, 1.0, &[1e-2], (0.0, 1.0)).is_err());
    }
}
