//! The involution numbers `f(n+2) = f(n+1) + (n+1) f(n)`, `f(1) = 1`, `f(2) = 2`.

use num_bigint::BigUint;
use num_complex::Complex64 as C64;

use super::{iterate_with, LogScaled, Mode, RecursionTrace, SimOptions};
use crate::error::{Error, Result};

/// Exact `f(n)`, `n ≥ 1`.
pub fn involutions_exact(n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::Invalid("involution numbers start at n = 1".into()));
    }
    let (mut a, mut b) = (BigUint::from(1u32), BigUint::from(2u32));
    if n == 1 {
        return Ok(a);
    }
    for k in 1..n - 1 {
        let next = &b + &a * BigUint::from(k + 1);
        a = std::mem::replace(&mut b, next);
    }
    Ok(b)
}

/// `f(1..=n)` in log-scaled arithmetic.
pub fn involutions_trace(n: usize) -> Result<RecursionTrace> {
    let init = vec![LogScaled::ONE, LogScaled::from_real(2.0).unwrap()];
    iterate_with(
        Mode::Index,
        2,
        init,
        1,
        n as i64,
        |k, _| Ok(vec![C64::new(-(k as f64 + 1.0), 0.0), C64::new(-1.0, 0.0), C64::new(1.0, 0.0)]),
        SimOptions::default(),
    )
}

/// `ln r(n)` for `r(n) = f(n) / (n^{n/2} e^{−n/2 + √n})`.
fn log_r(n: usize, log_f: f64) -> f64 {
    let nf = n as f64;
    log_f - 0.5 * nf * nf.ln() + 0.5 * nf - nf.sqrt()
}

/// `r(2n) / r(n)`.
pub fn involution_ratio(n: usize) -> Result<f64> {
    let tr = involutions_trace(2 * n)?;
    let lf = |m: usize| tr.at(m as i64).expect("within trace").log_abs();
    Ok((log_r(2 * n, lf(2 * n)) - log_r(n, lf(n))).exp())
}

/// `ln x` for a big integer.
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.iter_u64_digits().next().unwrap_or(0) as f64).ln();
    }
    let top: BigUint = x >> (bits - 64);
    (top.iter_u64_digits().next().unwrap() as f64).ln() + (bits - 64) as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_values() {
        // direct integer iteration
        let mut f = vec![0u64, 1, 2];
        for n in 1..9 {
            let v = f[n + 1] + (n as u64 + 1) * f[n];
            f.push(v);
        }
        for n in 1..=10 {
            assert_eq!(involutions_exact(n).unwrap(), BigUint::from(f[n]));
        }
        assert_eq!(involutions_exact(10).unwrap(), BigUint::from(9496u32));
    }

    #[test]
    fn log_scaled_matches_exact() {
        let tr = involutions_trace(600).unwrap();
        let exact = big_ln(&involutions_exact(600).unwrap());
        assert!((tr.at(600).unwrap().log_abs() - exact).abs() < 1e-9 * exact);
    }
}
