//! Complex numbers with a separate binary exponent, for values far outside
//! the range of `f64`.

use std::f64::consts::LN_2;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, RoundingMode, Sign};
use num_complex::Complex64 as C64;
use serde::{Serialize, Serializer};

/// `mantissa · 2^exponent` with `1 ≤ |mantissa| < 2`, or exactly zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogScaled {
    m: C64,
    e: i64,
}

/// Powers of two as exact `f64`, for `|k| ≤ 1022`.
fn pow2(k: i64) -> f64 {
    debug_assert!(k.abs() <= 1022);
    f64::from_bits(((k + 1023) as u64) << 52)
}

/// Shifts beyond this make the smaller operand invisible in `f64`.
const NEGLIGIBLE: i64 = 1100;

impl LogScaled {
    pub const ZERO: Self = Self { m: C64::new(0.0, 0.0), e: 0 };
    pub const ONE: Self = Self { m: C64::new(1.0, 0.0), e: 0 };

    /// `None` for non-finite input.
    pub fn new(z: C64) -> Option<Self> {
        z.is_finite().then(|| Self { m: z, e: 0 }.normalized())
    }

    pub fn from_real(x: f64) -> Option<Self> {
        Self::new(C64::new(x, 0.0))
    }

    /// `e^{log_abs + i·phase}`.
    pub fn from_log(log_abs: f64, phase: f64) -> Self {
        let k = (log_abs / LN_2).floor();
        let r = (log_abs - k * LN_2).exp();
        Self { m: C64::from_polar(r, phase), e: k as i64 }.normalized()
    }

    /// `exp(w)` for complex `w`.
    pub fn exp(w: C64) -> Self {
        Self::from_log(w.re, w.im)
    }

    fn normalized(self) -> Self {
        let mut m = self.m;
        let a = m.norm();
        if a == 0.0 {
            return Self::ZERO;
        }
        let mut e = self.e;
        let mut k = a.log2().floor() as i64;
        // scale in two steps when |k| is near the exponent limits
        while k != 0 {
            let s = k.clamp(-1000, 1000);
            m *= pow2(-s);
            e += s;
            k -= s;
        }
        let a = m.norm();
        if a >= 2.0 {
            m *= 0.5;
            e += 1;
        } else if a < 1.0 {
            m *= 2.0;
            e -= 1;
        }
        Self { m, e }
    }

    pub fn is_zero(&self) -> bool {
        self.m.re == 0.0 && self.m.im == 0.0
    }

    pub fn mantissa(&self) -> C64 {
        self.m
    }

    pub fn exponent2(&self) -> i64 {
        self.e
    }

    /// `ln |z|`; `-∞` for zero.
    pub fn log_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.m.norm().ln() + self.e as f64 * LN_2
        }
    }

    pub fn phase(&self) -> f64 {
        self.m.arg()
    }

    /// `ln z` on the principal branch.
    pub fn ln(&self) -> C64 {
        C64::new(self.log_abs(), self.phase())
    }

    /// Nearest `f64` value; overflows to infinity and underflows to zero.
    pub fn to_c64(&self) -> C64 {
        if self.is_zero() {
            return C64::new(0.0, 0.0);
        }
        if self.e > 1023 {
            return C64::new(f64::INFINITY * self.m.re.signum(), f64::INFINITY * self.m.im.signum());
        }
        if self.e < -1074 {
            return C64::new(0.0, 0.0);
        }
        let half = self.e / 2;
        self.m * pow2(half) * pow2(self.e - half)
    }

    /// `m · 2^(e − e_ref)` as a plain complex number.
    fn shifted(&self, e_ref: i64) -> C64 {
        let s = self.e - e_ref;
        if self.is_zero() || s < -NEGLIGIBLE {
            C64::new(0.0, 0.0)
        } else {
            let half = s / 2;
            self.m * pow2(half) * pow2(s - half)
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { m: self.m * c, e: self.e }.normalized()
    }

    pub fn inv(&self) -> Self {
        Self { m: self.m.inv(), e: -self.e }.normalized()
    }

    /// `a / b` as a plain complex number.
    pub fn ratio(a: &Self, b: &Self) -> C64 {
        (*a / *b).to_c64()
    }

    /// `Σ terms` after factoring out the largest exponent.
    pub fn sum<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        let v: Vec<Self> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        let Some(e_max) = v.iter().map(|t| t.e).max() else { return Self::ZERO };
        let s: C64 = v.iter().map(|t| t.shifted(e_max)).sum();
        Self { m: s, e: e_max }.normalized()
    }

    /// `Σ c_j z_j` together with `max_j |c_j z_j|`, in binary64.
    pub fn dot(c: &[C64], z: &[Self]) -> (Self, Self) {
        let terms: Vec<Self> = c.iter().zip(z).map(|(c, z)| z.scale(*c)).collect();
        let max = terms.iter().copied().max_by(|a, b| a.log_abs().total_cmp(&b.log_abs())).unwrap_or(Self::ZERO);
        (Self::sum(terms), max)
    }

    /// `Σ c_j z_j` accumulated with `bits` of mantissa precision.
    pub fn dot_extended(c: &[C64], z: &[Self], bits: usize) -> (Self, Self) {
        let rm = RoundingMode::ToEven;
        let terms: Vec<(C64, C64, i64)> =
            c.iter().zip(z).filter(|(_, z)| !z.is_zero()).map(|(c, z)| (*c, z.m, z.e)).collect();
        let max = c
            .iter()
            .zip(z)
            .map(|(c, z)| z.scale(*c))
            .max_by(|a, b| a.log_abs().total_cmp(&b.log_abs()))
            .unwrap_or(Self::ZERO);
        let Some(e_max) = terms.iter().map(|t| t.2).max() else { return (Self::ZERO, max) };
        let big = |x: f64| BigFloat::from_f64(x, bits);
        let mut re = BigFloat::from_f64(0.0, bits);
        let mut im = BigFloat::from_f64(0.0, bits);
        for (c, m, e) in terms {
            let s = e - e_max;
            if s < -NEGLIGIBLE {
                continue;
            }
            let (cr, ci, mr, mi) = (big(c.re), big(c.im), big(m.re), big(m.im));
            let pr = cr.mul(&mr, bits, rm).sub(&ci.mul(&mi, bits, rm), bits, rm);
            let pi = cr.mul(&mi, bits, rm).add(&ci.mul(&mr, bits, rm), bits, rm);
            let half = s / 2;
            let k = big(pow2(half)).mul(&big(pow2(s - half)), bits, rm);
            re = re.add(&pr.mul(&k, bits, rm), bits, rm);
            im = im.add(&pi.mul(&k, bits, rm), bits, rm);
        }
        let out = Self { m: C64::new(big_to_f64(&re), big_to_f64(&im)), e: e_max }.normalized();
        (out, max)
    }
}

/// Round a finite `BigFloat` of moderate exponent to `f64`.
fn big_to_f64(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        Some((words, _, sign, exp, _)) if !x.is_zero() => {
            // normalized mantissa: value = 0.w_top w_next … × 2^exp
            let top = *words.last().unwrap() as f64;
            let next = if words.len() > 1 { words[words.len() - 2] as f64 } else { 0.0 };
            let v = (top + next * 2f64.powi(-64)) * 2f64.powi(exp - 64);
            if sign == Sign::Neg { -v } else { v }
        }
        _ => 0.0,
    }
}

impl Add for LogScaled {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::sum([self, o])
    }
}

impl Sub for LogScaled {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::sum([self, -o])
    }
}

impl Neg for LogScaled {
    type Output = Self;
    fn neg(self) -> Self {
        Self { m: -self.m, e: self.e }
    }
}

impl Mul for LogScaled {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::ZERO;
        }
        Self { m: self.m * o.m, e: self.e + o.e }.normalized()
    }
}

impl Div for LogScaled {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.inv()
    }
}

impl fmt::Display for LogScaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({:.12} + {:.12}i)", self.log_abs(), self.phase())
    }
}

impl Serialize for LogScaled {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.log_abs(), self.phase()).serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn huge_products_stay_finite() {
        let two = LogScaled::from_real(2.0).unwrap();
        let mut x = LogScaled::ONE;
        for _ in 0..5000 {
            x = x * two;
        }
        assert!((x.log_abs() - 5000.0 * LN_2).abs() < 1e-9);
        assert_eq!(x.exponent2(), 5000);
        assert_eq!(x.mantissa(), C64::new(1.0, 0.0));
    }

    #[test]
    fn far_apart_sum_keeps_larger() {
        let a = LogScaled::from_log(3000.0, 0.5);
        let b = LogScaled::from_log(-3000.0, 0.0);
        let s = a + b;
        assert_eq!(s, a);
        assert!((a - a).is_zero());
    }

    #[test]
    fn extended_dot_resolves_cancellation() {
        // (1 + 2^-60) - 1 in binary64 loses the small part
        let one = LogScaled::ONE;
        let tiny = LogScaled::from_real(2f64.powi(-60)).unwrap();
        let c = [C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
        let z = [one, tiny, one];
        let (plain, _) = LogScaled::dot(&c, &z);
        let (ext, _) = LogScaled::dot_extended(&c, &z, 256);
        assert!(plain.is_zero());
        assert!((ext.log_abs() - (-60.0 * LN_2)).abs() < 1e-12);
        let c2 = [C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
        let big = LogScaled::from_real(1.0 + 2f64.powi(-30)).unwrap();
        let z2 = [big, tiny, one];
        let (ext2, _) = LogScaled::dot_extended(&c2, &z2, 256);
        let want = 2f64.powi(-30) + 2f64.powi(-60);
        assert!((ext2.to_c64().re - want).abs() < 1e-30);
    }

    proptest! {
        #[test]
        fn arithmetic_matches_f64(a in -1e3f64..1e3, b in -1e3f64..1e3, c in -1e3f64..1e3, d in -1e3f64..1e3) {
            let x = C64::new(a, b);
            let y = C64::new(c, d);
            let (lx, ly) = (LogScaled::new(x).unwrap(), LogScaled::new(y).unwrap());
            let tol = 1e-12 * (1.0 + x.norm() * y.norm() + x.norm() + y.norm());
            prop_assert!(((lx * ly).to_c64() - x * y).norm() <= tol);
            prop_assert!(((lx + ly).to_c64() - (x + y)).norm() <= 1e-12 * (1.0 + x.norm() + y.norm()));
            if y.norm() > 1e-3 {
                prop_assert!(((lx / ly).to_c64() - x / y).norm() <= 1e-12 * (1.0 + (x / y).norm()));
            }
            let m = lx.mantissa().norm();
            prop_assert!(lx.is_zero() || (1.0..2.0).contains(&m));
        }

        #[test]
        fn log_round_trip(l in -1e6f64..1e6, p in -3.0f64..3.0) {
            let z = LogScaled::from_log(l, p);
            prop_assert!((z.log_abs() - l).abs() <= 1e-15 * l.abs().max(1.0) * 4.0);
            prop_assert!((z.phase() - p).abs() < 1e-12);
        }
    }
}
