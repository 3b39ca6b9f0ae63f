//! Higher orders of the formal series by the hierarchy
//! `Σ_j a_j(x, 0) j λ^j φ′_s + T_s = 0`, solved on a Chebyshev grid.
//!
//! With `ψ(x + jε)/ψ(x) = exp(Σ_n ε^n U_n(j))` and
//! `U_n(j) = Σ_{r=1}^{n+1} φ_{n+1−r}^{(r)} j^r / r!`, `T_s` is the ε^s
//! coefficient of `Σ_j a_j(x, ε) λ^j exp(Σ_n ε^n U_n(j))` with `φ′_s` set to 0.

use num_complex::Complex64 as C64;

use super::cheb::{nodes, Cheb};
use super::{branch_at, check_branch, FormalJet, DIVISOR_TOL};
use crate::error::{Error, Result};
use crate::operator::EpsilonEquation;
use crate::series;
use crate::spectral::EigenGrid;

pub const DEFAULT_MAX_ORDER: usize = 6;

/// Largest change of any `φ_s` under grid doubling before the order is
/// flagged as unreliable.
pub const NOISE_TOL: f64 = 1e-3;

const CHOP_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug)]
pub struct HierarchyOptions {
    /// Chebyshev degree of the coarse run; the reported run uses twice this.
    pub nodes: usize,
    pub max_order: usize,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        Self { nodes: 40, max_order: DEFAULT_MAX_ORDER }
    }
}

/// `φ′_s` as Chebyshev interpolants, `s = 0..=max_order`.
fn solve(eq: &EpsilonEquation, grid: &EigenGrid, row: usize, n: usize, max_order: usize) -> Result<Vec<Cheb>> {
    let (lo, hi) = grid.range();
    let xs = nodes(n, lo, hi);
    let mut lam = Vec::with_capacity(n + 1);
    let mut logs = Vec::with_capacity(n + 1);
    let mut a = Vec::with_capacity(n + 1);
    let mut divisor = Vec::with_capacity(n + 1);
    for &x in &xs {
        let (l, log) = branch_at(grid, row, x);
        let ax = eq.eps_series(x, max_order)?;
        let mut div = C64::default();
        let mut scale: f64 = 0.0;
        for (j, aj) in ax.iter().enumerate() {
            let p = aj[0] * l.powi(j as i32);
            div += j as f64 * p;
            scale = scale.max(p.norm());
        }
        if div.norm() <= DIVISOR_TOL * scale {
            return Err(Error::IllConditioned(format!("Σ j a_j λ^j vanishes at x = {x}")));
        }
        lam.push(l);
        logs.push(log);
        a.push(ax);
        divisor.push(div);
    }
    let mut first = vec![Cheb::from_values(&logs, lo, hi).chop(CHOP_TOL)];
    // derivs[t][r - 1][k] = φ_t^{(r)}(x_k)
    let mut derivs: Vec<Vec<Vec<C64>>> = Vec::new();
    let push_derivs = |f: &Cheb, count: usize, derivs: &mut Vec<Vec<Vec<C64>>>| {
        let mut rows = Vec::with_capacity(count);
        let mut g = f.clone();
        for _ in 0..count {
            rows.push(xs.iter().map(|&x| g.eval(x)).collect());
            g = g.derivative();
        }
        derivs.push(rows);
    };
    push_derivs(&first[0], max_order + 1, &mut derivs);
    let d = a[0].len() - 1;
    for s in 1..=max_order {
        let vals: Vec<C64> = (0..xs.len())
            .map(|k| {
                let mut total = C64::default();
                for j in 0..=d {
                    let jf = j as f64;
                    let mut u = vec![C64::default(); s + 1];
                    for (nn, un) in u.iter_mut().enumerate().skip(1) {
                        let mut fact = 1.0;
                        for r in 1..=nn + 1 {
                            fact *= r as f64;
                            if nn == s && r == 1 {
                                continue;
                            }
                            *un += derivs[nn + 1 - r][r - 1][k] * jf.powi(r as i32) / fact;
                        }
                    }
                    let e = series::exp(&u, s + 1);
                    let term = series::mul(&a[k][j], &e, s + 1);
                    total += term[s] * lam[k].powi(j as i32);
                }
                -total / divisor[k]
            })
            .collect();
        let f = Cheb::from_values(&vals, lo, hi).chop(CHOP_TOL);
        push_derivs(&f, max_order + 1 - s, &mut derivs);
        first.push(f);
    }
    Ok(first)
}

/// Orders `0..=max_order` of branch `m`. Each order is recomputed on a grid
/// of half the size; orders that move by more than [`NOISE_TOL`] are listed
/// in `unreliable`.
pub fn phi_higher(eq: &EpsilonEquation, grid: &EigenGrid, m: usize, opts: HierarchyOptions) -> Result<FormalJet> {
    let row = check_branch(grid, m)?;
    if opts.nodes < 4 {
        return Err(Error::Invalid("at least 4 Chebyshev nodes".into()));
    }
    let fine = solve(eq, grid, row, 2 * opts.nodes, opts.max_order)?;
    let coarse = solve(eq, grid, row, opts.nodes, opts.max_order)?;
    let mut jet = FormalJet::new(m, grid.t.clone());
    for (s, (f, c)) in fine.iter().zip(&coarse).enumerate() {
        let (fi, ci) = (f.integral(), c.integral());
        let phi: Vec<C64> = jet.x.iter().map(|&x| fi.eval(x)).collect();
        let change = jet.x.iter().zip(&phi).map(|(&x, p)| (ci.eval(x) - p).norm()).fold(0.0, f64::max);
        if !(change <= NOISE_TOL) {
            jet.unreliable.push(s);
            jet.warnings.push(format!("order {s} changes by {change:.2e} under grid doubling"));
        }
        jet.dphi.push(jet.x.iter().map(|&x| f.eval(x)).collect());
        jet.phi.push(phi);
    }
    Ok(jet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wkb::phi1;
    use crate::wkb::tests::grid_of;

    fn eq(c: &[&str]) -> EpsilonEquation {
        EpsilonEquation::from_expressions(c, (0.0, 1.0)).unwrap()
    }

    #[test]
    fn constant_equation_has_no_corrections() {
        let e = eq(&["1", "-5/2", "1"]);
        let g = grid_of(&e, 64);
        let jet = phi_higher(&e, &g, 1, HierarchyOptions::default()).unwrap();
        for s in 1..=DEFAULT_MAX_ORDER {
            assert!(jet.phi[s].iter().all(|z| z.norm() < 1e-12), "order {s}");
        }
        assert!(jet.unreliable.is_empty());
    }

    #[test]
    fn order_one_matches_closed_form() {
        let e = eq(&["2 + x", "-(3 + x)", "1"]);
        let g = grid_of(&e, 256);
        let closed = phi1(&e, &g, 1).unwrap();
        let jet = phi_higher(&e, &g, 1, HierarchyOptions { max_order: 3, ..Default::default() }).unwrap();
        let err = (0..g.t.len()).map(|i| (jet.phi[1][i] - closed.phi[1][i]).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn first_order_euler_maclaurin() {
        // log f(k) = Σ_{i<k} h(iε): φ_1 = −Δh/2, φ_2 = Δh′/12, φ_3 = 0, φ_4 = −Δh‴/720
        let e = eq(&["-(2 + x)", "1"]);
        let g = grid_of(&e, 128);
        let jet = phi_higher(&e, &g, 1, HierarchyOptions { max_order: 4, ..Default::default() }).unwrap();
        let h = |x: f64| (2.0 + x).ln();
        let h1 = |x: f64| 1.0 / (2.0 + x);
        let h3 = |x: f64| 2.0 / (2.0 + x).powi(3);
        for &x in &[0.3, 0.8, 1.0] {
            let want = [-(h(x) - h(0.0)) / 2.0, (h1(x) - h1(0.0)) / 12.0, 0.0, -(h3(x) - h3(0.0)) / 720.0];
            for s in 1..=4 {
                assert!((jet.eval(s, x).re - want[s - 1]).abs() < 1e-9, "order {s} at {x}: {}", jet.eval(s, x));
            }
        }
    }
}
