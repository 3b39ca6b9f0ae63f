//! Chebyshev interpolants on an interval, for spectral differentiation.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct Cheb {
    /// `f = Σ_k c_k T_k(u)`, `u = (2x − lo − hi) / (hi − lo)`.
    pub c: Vec<C64>,
    pub lo: f64,
    pub hi: f64,
}

/// Chebyshev–Lobatto points `x_k`, `k = 0..=n`, in decreasing order.
pub fn nodes(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..=n).map(|k| 0.5 * (lo + hi) + 0.5 * (hi - lo) * (PI * k as f64 / n as f64).cos()).collect()
}

impl Cheb {
    /// Interpolant through values at `nodes(n, lo, hi)`.
    pub fn from_values(f: &[C64], lo: f64, hi: f64) -> Self {
        let n = f.len() - 1;
        let mut c = vec![C64::default(); n + 1];
        for (j, cj) in c.iter_mut().enumerate() {
            let mut s = C64::default();
            for (k, &fk) in f.iter().enumerate() {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                s += w * fk * (PI * (j * k) as f64 / n as f64).cos();
            }
            *cj = s * (2.0 / n as f64);
        }
        c[0] *= 0.5;
        c[n] *= 0.5;
        Self { c, lo, hi }
    }

    /// Drop trailing coefficients below `tol` times the largest.
    pub fn chop(mut self, tol: f64) -> Self {
        let max = self.c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let keep = self.c.iter().rposition(|z| z.norm() > tol * max).map_or(1, |i| i + 1);
        self.c.truncate(keep);
        self
    }

    pub fn eval(&self, x: f64) -> C64 {
        let u = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
        let (mut b1, mut b2) = (C64::default(), C64::default());
        for &ck in self.c.iter().skip(1).rev() {
            let b0 = ck + 2.0 * u * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.c[0] + u * b1 - b2
    }

    pub fn derivative(&self) -> Self {
        let n = self.c.len();
        let mut d = vec![C64::default(); n.max(1)];
        if n > 1 {
            for k in (1..n).rev() {
                let above = if k + 1 < n { d[k + 1] } else { C64::default() };
                d[k - 1] = above + 2.0 * k as f64 * self.c[k];
            }
            d[0] *= 0.5;
            d.truncate(n - 1);
        }
        let s = 2.0 / (self.hi - self.lo);
        Self { c: d.into_iter().map(|z| z * s).collect(), lo: self.lo, hi: self.hi }
    }

    /// Antiderivative vanishing at `lo`.
    pub fn integral(&self) -> Self {
        let n = self.c.len();
        let get = |k: usize| self.c.get(k).copied().unwrap_or_default();
        let mut b = vec![C64::default(); n + 1];
        b[1] = get(0) - 0.5 * get(2);
        for (k, bk) in b.iter_mut().enumerate().skip(2) {
            *bk = (get(k - 1) - get(k + 1)) / (2.0 * k as f64);
        }
        b[0] = -(1..=n).map(|k| if k % 2 == 0 { b[k] } else { -b[k] }).sum::<C64>();
        let s = 0.5 * (self.hi - self.lo);
        Self { c: b.into_iter().map(|z| z * s).collect(), lo: self.lo, hi: self.hi }
    }
}
