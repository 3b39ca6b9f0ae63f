//! WKB data for regular ε-difference equations: the phases `φ_{m,s}` of
//! `ψ_m(x, ε) ≈ exp(ε⁻¹ Σ_s φ_{m,s}(x) ε^s)`, seeds for the simulator and
//! the degree-reducing transform.

mod cheb;
mod deflate;
mod hierarchy;

use std::io::Write;

use num_complex::Complex64 as C64;
use serde::Serialize;

pub use deflate::{deflate, Deflation, DEFLATION_TOL};
pub use hierarchy::{phi_higher, HierarchyOptions, DEFAULT_MAX_ORDER, NOISE_TOL};

use crate::error::{Error, Result};
use crate::operator::EpsilonEquation;
use crate::quad::gauss_legendre;
use crate::simulator::LogScaled;
use crate::spectral::{EigenGrid, ExceptionalKind};

/// Gauss–Legendre nodes per grid segment.
const GL_NODES: usize = 6;

/// Smallest admissible `|Σ_j j a_j(x, 0) λ^j| / max_j |a_j λ^j|`.
pub const DIVISOR_TOL: f64 = 1e-10;

/// Samples of `φ_{m,s}` and `φ′_{m,s}` on an x-grid; off-grid values by
/// cubic Hermite interpolation.
#[derive(Clone, Debug, Serialize)]
pub struct FormalJet {
    /// Branch label, counted from 1.
    pub branch: usize,
    pub x: Vec<f64>,
    /// `phi[s][i] = φ_s(x_i)`
    pub phi: Vec<Vec<C64>>,
    /// `dphi[s][i] = φ′_s(x_i)`
    pub dphi: Vec<Vec<C64>>,
    /// Orders flagged by the grid-doubling check.
    pub unreliable: Vec<usize>,
    pub interpolation: &'static str,
    pub warnings: Vec<String>,
}

impl FormalJet {
    fn new(branch: usize, x: Vec<f64>) -> Self {
        Self {
            branch,
            x,
            phi: Vec::new(),
            dphi: Vec::new(),
            unreliable: Vec::new(),
            interpolation: "cubic-hermite",
            warnings: Vec::new(),
        }
    }

    /// Highest stored order.
    pub fn order(&self) -> usize {
        self.phi.len().saturating_sub(1)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    /// `φ_s(x)`; orders beyond the stored ones are zero.
    pub fn eval(&self, s: usize, x: f64) -> C64 {
        let Some(f) = self.phi.get(s) else { return C64::default() };
        let df = &self.dphi[s];
        let n = self.x.len() - 1;
        let i = match self.x.binary_search_by(|t| t.total_cmp(&x)) {
            Ok(i) => return f[i],
            Err(i) => i.saturating_sub(1).min(n - 1),
        };
        let h = self.x[i + 1] - self.x[i];
        let t = (x - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        f[i] * h00 + df[i] * (h10 * h) + f[i + 1] * h01 + df[i + 1] * (h11 * h)
    }

    /// Columns `x, s, re, im`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["x", "s", "re", "im"]).map_err(err)?;
        for (s, row) in self.phi.iter().enumerate() {
            for (x, v) in self.x.iter().zip(row) {
                w.write_record([x.to_string(), s.to_string(), v.re.to_string(), v.im.to_string()]).map_err(err)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Fail unless the grid is free of collisions and exceptional points.
pub(crate) fn require_regular(grid: &EigenGrid) -> Result<()> {
    if let Some(c) = grid.collisions.first() {
        return Err(Error::Irregular(format!("eigenvalues collide at x = {c}")));
    }
    if let Some(e) = grid.exceptional.iter().find(|e| e.kind != ExceptionalKind::Collision) {
        return Err(Error::Irregular(format!("{:?} at x = {}", e.kind, e.t)));
    }
    Ok(())
}

fn check_branch(grid: &EigenGrid, m: usize) -> Result<usize> {
    if m == 0 || m > grid.degree() {
        return Err(Error::Invalid(format!("branch {m} out of 1..={}", grid.degree())));
    }
    require_regular(grid)?;
    Ok(m - 1)
}

/// `λ_m(x)` and its logarithm continued from the grid's branch of log.
pub(crate) fn branch_at(grid: &EigenGrid, row: usize, x: f64) -> (C64, C64) {
    let i = grid.segment(x);
    let i = if (x - grid.t[i]).abs() <= (grid.t[i + 1] - x).abs() { i } else { i + 1 };
    let v = grid.values_at(x)[row];
    (v, grid.logs[row][i] + (v / grid.values[row][i]).ln())
}

/// Integrate `f(x, λ, log λ)` over the grid segments with `φ(x_lo) = 0`;
/// returns the integral and the integrand at the nodes.
fn integrate_branch<F>(grid: &EigenGrid, row: usize, f: F) -> Result<(Vec<C64>, Vec<C64>)>
where
    F: Fn(f64, C64, C64) -> Result<C64>,
{
    let (gx, gw) = gauss_legendre(GL_NODES);
    let n = grid.t.len();
    let mut phi = Vec::with_capacity(n);
    let mut dphi = Vec::with_capacity(n);
    let mut acc = C64::default();
    for i in 0..n {
        dphi.push(f(grid.t[i], grid.values[row][i], grid.logs[row][i])?);
        phi.push(acc);
        if i + 1 < n {
            let (a, b) = (grid.t[i], grid.t[i + 1]);
            let half = 0.5 * (b - a);
            for (u, w) in gx.iter().zip(&gw) {
                let x = a + half * (u + 1.0);
                let (lam, log) = branch_at(grid, row, x);
                acc += f(x, lam, log)? * (w * half);
            }
        }
    }
    Ok((phi, dphi))
}

/// `φ_{m,0}(x) = ∫_{x_lo}^x log λ_m`.
pub fn phi0(grid: &EigenGrid, m: usize) -> Result<FormalJet> {
    let row = check_branch(grid, m)?;
    let (phi, dphi) = integrate_branch(grid, row, |_, _, log| Ok(log))?;
    let mut jet = FormalJet::new(m, grid.t.clone());
    jet.phi.push(phi);
    jet.dphi.push(dphi);
    Ok(jet)
}

/// Derivatives of `P(x, λ, ε) = Σ_j a_j(x, ε) λ^j` at `ε = 0`.
struct CharJet {
    p_lam: C64,
    p_lamlam: C64,
    p_eps: C64,
    p_x: C64,
    scale: f64,
}

fn char_jet(eq: &EpsilonEquation, x: f64, lam: C64) -> Result<CharJet> {
    let a = eq.eps_series(x, 1)?;
    let ax = eq.x_derivative(x)?;
    let mut j = CharJet { p_lam: C64::default(), p_lamlam: C64::default(), p_eps: C64::default(), p_x: C64::default(), scale: 0.0 };
    for (k, (ak, axk)) in a.iter().zip(&ax).enumerate() {
        let kf = k as f64;
        let pow = lam.powi(k as i32);
        if k >= 1 {
            j.p_lam += kf * ak[0] * lam.powi(k as i32 - 1);
        }
        if k >= 2 {
            j.p_lamlam += kf * (kf - 1.0) * ak[0] * lam.powi(k as i32 - 2);
        }
        j.p_eps += ak[1] * pow;
        j.p_x += axk * pow;
        j.scale = j.scale.max((ak[0] * pow).norm());
    }
    if (j.p_lam * lam).norm() <= DIVISOR_TOL * j.scale {
        return Err(Error::IllConditioned(format!("Σ j a_j λ^j vanishes at x = {x}")));
    }
    Ok(j)
}

/// `φ′_1 = −(P_ε / (λ P_λ) + ½ λ′/λ + ½ λ′ P_λλ / P_λ)` with
/// `λ′ = −P_x / P_λ`, all at `ε = 0`.
pub fn phi1_derivative(eq: &EpsilonEquation, x: f64, lam: C64) -> Result<C64> {
    let j = char_jet(eq, x, lam)?;
    let dlam = -j.p_x / j.p_lam;
    Ok(-(j.p_eps / (lam * j.p_lam) + 0.5 * dlam / lam + 0.5 * dlam * j.p_lamlam / j.p_lam))
}

/// Orders 0 and 1 of branch `m`.
pub fn phi1(eq: &EpsilonEquation, grid: &EigenGrid, m: usize) -> Result<FormalJet> {
    let mut jet = phi0(grid, m)?;
    let (phi, dphi) = integrate_branch(grid, m - 1, |x, lam, _| phi1_derivative(eq, x, lam))?;
    jet.phi.push(phi);
    jet.dphi.push(dphi);
    Ok(jet)
}

/// `exp(ε⁻¹ φ_0(x) + φ_1(x))` at `x = x_lo + kε`, `k` in `k_range` (inclusive).
pub fn wkb_seed(jet: &FormalJet, eps: f64, k_range: (i64, i64)) -> Result<Vec<LogScaled>> {
    let (lo, hi) = jet.range();
    let slack = 1e-9 * (hi - lo).abs().max(1.0);
    (k_range.0..=k_range.1)
        .map(|k| {
            let x = lo + k as f64 * eps;
            if x < lo - slack || x > hi + slack {
                return Err(Error::Invalid(format!("seed point x = {x} outside [{lo}, {hi}]")));
            }
            let x = x.clamp(lo, hi);
            Ok(LogScaled::exp(jet.eval(0, x) / eps + jet.eval(1, x)))
        })
        .collect()
}
