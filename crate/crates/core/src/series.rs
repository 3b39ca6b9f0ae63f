//! Truncated power series with complex coefficients.
//!
//! A series is a `Vec<C64>` of coefficients `c_0 + c_1 s + …`; every
//! operation keeps the first `n` terms.

use num_complex::Complex64 as C64;
use num_traits::Zero;

pub fn truncate(mut a: Vec<C64>, n: usize) -> Vec<C64> {
    a.resize(n, C64::zero());
    a
}

pub fn mul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::zero(); n];
    for (i, &x) in a.iter().enumerate().take(n) {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `a / b`; requires `b[0] != 0`.
pub fn div(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::zero(); n];
    let b0 = b[0];
    for k in 0..n {
        let mut acc = a.get(k).copied().unwrap_or_default();
        for j in 1..=k.min(b.len().saturating_sub(1)) {
            acc -= b[j] * out[k - j];
        }
        out[k] = acc / b0;
    }
    out
}

/// `exp(a)` via `e' = a' e`.
pub fn exp(a: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::zero(); n];
    if n == 0 {
        return out;
    }
    out[0] = a.first().copied().unwrap_or_default().exp();
    for k in 1..n {
        let mut acc = C64::zero();
        for j in 1..=k {
            if let Some(&aj) = a.get(j) {
                acc += aj * (j as f64) * out[k - j];
            }
        }
        out[k] = acc / k as f64;
    }
    out
}
