//! Exact Laurent polynomials in two commuting variables and in one variable.
//!
//! [`BivariatePolynomial`] stores `Σ c_{a,b} Q^a q^b` with `BigRational`
//! coefficients. Floating point only enters in the `eval*` methods.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type C64 = Complex64;

/// Convert an exact rational to the nearest `f64`.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // huge numerators/denominators: fall back on a scaled quotient
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Laurent polynomial `Σ c_{a,b} X^a Y^b`; `X` is the outer variable (`Q`, `L`)
/// and `Y` the inner one (`q`, `M`). No stored coefficient is zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BivariatePolynomial {
    terms: BTreeMap<(i64, i64), BigRational>,
}

impl BivariatePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: BigRational, a: i64, b: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((a, b), c);
        }
        Self { terms }
    }

    /// The outer variable `X` (`Q` for operators).
    pub fn outer() -> Self {
        Self::monomial(BigRational::one(), 1, 0)
    }

    /// The inner variable `Y` (`q` for operators).
    pub fn inner() -> Self {
        Self::monomial(BigRational::one(), 0, 1)
    }

    pub fn from_terms<I: IntoIterator<Item = ((i64, i64), BigRational)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (k, c) in it {
            p.add_term(k, c);
        }
        p
    }

    fn add_term(&mut self, key: (i64, i64), c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i64, i64), &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, a: i64, b: i64) -> BigRational {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(BigRational::zero)
    }

    /// `Some(c)` if the polynomial is the constant `c`.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    /// Multiply by the monomial `X^da Y^db`.
    pub fn shift(&self, da: i64, db: i64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), v)| ((a + da, b + db), v.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Substitute `X -> Y^i X`; this is how `E^i` moves past a coefficient.
    pub fn shift_outer(&self, i: i64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), v)| ((a, b + i * a), v.clone()))
                .collect(),
        }
    }

    /// Componentwise minimum of the exponents, `None` for the zero polynomial.
    pub fn min_exponents(&self) -> Option<(i64, i64)> {
        let amin = self.terms.keys().map(|k| k.0).min()?;
        let bmin = self.terms.keys().map(|k| k.1).min()?;
        Some((amin, bmin))
    }

    /// Coefficient of the first monomial in display order (descending `X`, then `Y`).
    pub fn leading_coefficient(&self) -> Option<&BigRational> {
        self.terms.iter().next_back().map(|(_, c)| c)
    }

    /// Evaluate at `(X, Y)` by Horner's rule in `Y` inside Horner's rule in `X`.
    pub fn eval(&self, x: C64, y: C64) -> C64 {
        if self.terms.is_empty() {
            return C64::zero();
        }
        let (amin, bmin) = self.min_exponents().unwrap();
        let mut rows: BTreeMap<i64, Vec<(i64, f64)>> = BTreeMap::new();
        for (&(a, b), c) in &self.terms {
            rows.entry(a).or_default().push((b, rat_to_f64(c)));
        }
        let horner_inner = |row: &[(i64, f64)]| -> C64 {
            // row is ascending in b
            let mut acc = C64::zero();
            let mut prev = row.last().unwrap().0;
            for &(b, c) in row.iter().rev() {
                acc *= y.powi((prev - b) as i32);
                acc += c;
                prev = b;
            }
            acc * y.powi((prev - bmin) as i32)
        };
        let mut acc = C64::zero();
        let mut prev = *rows.keys().next_back().unwrap();
        for (&a, row) in rows.iter().rev() {
            acc *= x.powi((prev - a) as i32);
            acc += horner_inner(row);
            prev = a;
        }
        acc *= x.powi((prev - amin) as i32);
        acc * x.powi(amin as i32) * y.powi(bmin as i32)
    }

    /// Magnitude scale `Σ |c| |X|^a |Y|^b` used by singularity guards.
    pub fn eval_abs(&self, x: C64, y: C64) -> f64 {
        let (xn, yn) = (x.norm(), y.norm());
        self.terms
            .iter()
            .map(|(&(a, b), c)| rat_to_f64(c).abs() * xn.powi(a as i32) * yn.powi(b as i32))
            .sum()
    }

    /// Taylor coefficients in `s` of `p(e^{2πi(x0 + wx s)}, e^{2πi(y0 + wy s)})`
    /// up to `s^order`.
    pub fn exp_series(&self, x0: f64, y0: f64, wx: f64, wy: f64, order: usize) -> Vec<C64> {
        let tau = 2.0 * std::f64::consts::PI;
        let mut out = vec![C64::zero(); order + 1];
        for (&(a, b), c) in &self.terms {
            let c = rat_to_f64(c);
            let base = C64::from_polar(c, tau * (a as f64 * x0 + b as f64 * y0));
            let kappa = C64::new(0.0, tau * (a as f64 * wx + b as f64 * wy));
            let mut term = base;
            for (n, slot) in out.iter_mut().enumerate() {
                *slot += term;
                term = term * kappa / (n as f64 + 1.0);
            }
        }
        out
    }

    /// Set the inner variable to 1, leaving a Laurent polynomial in `X`.
    pub fn at_inner_one(&self) -> LaurentPoly {
        let mut map: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (&(a, _), c) in &self.terms {
            *map.entry(a).or_insert_with(BigRational::zero) += c;
        }
        LaurentPoly::from_map(map)
    }

    /// Substitute `Y -> Y^k` (used for `v = M^2` style reparametrisations).
    pub fn inner_power(&self, k: i64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), v)| ((a, b * k), v.clone()))
                .collect(),
        }
    }

    /// Collect by powers of the outer variable: `Σ_a X^a p_a(Y)`.
    pub fn outer_coefficients(&self) -> BTreeMap<i64, LaurentPoly> {
        let mut rows: BTreeMap<i64, BTreeMap<i64, BigRational>> = BTreeMap::new();
        for (&(a, b), c) in &self.terms {
            rows.entry(a).or_default().insert(b, c.clone());
        }
        rows.into_iter()
            .map(|(a, m)| (a, LaurentPoly::from_map(m)))
            .collect()
    }

    pub fn format_with(&self, outer: &str, inner: &str) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (&(a, b), c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || (a == 0 && b == 0) {
                factors.push(mag.to_string());
            }
            for (v, e) in [(outer, a), (inner, b)] {
                match e {
                    0 => {}
                    1 => factors.push(v.to_string()),
                    _ => factors.push(format!("{v}^{e}")),
                }
            }
            s.push_str(&factors.join("*"));
        }
        s
    }
}

impl fmt::Display for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_with("Q", "q"))
    }
}

impl fmt::Display for Poly1 {
    /// Written in `v`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.coeffs().iter().enumerate().map(|(k, c)| ((k as i64, 0), c.clone()));
        f.write_str(&BivariatePolynomial::from_terms(terms).format_with("v", "q"))
    }
}

impl fmt::Display for RatFn1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly1::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl Add for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn add(self, rhs: Self) -> BivariatePolynomial {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl Sub for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn sub(self, rhs: Self) -> BivariatePolynomial {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, -c.clone());
        }
        out
    }
}

impl Mul for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn mul(self, rhs: Self) -> BivariatePolynomial {
        let mut out = BivariatePolynomial::zero();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &rhs.terms {
                out.add_term((a1 + a2, b1 + b2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn neg(self) -> BivariatePolynomial {
        BivariatePolynomial {
            terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect(),
        }
    }
}

/// Dense univariate polynomial with exact coefficients, ascending order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly1 {
    coeffs: Vec<BigRational>,
}

impl Poly1 {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::new(vec![BigRational::one()])
    }

    pub fn monomial(c: BigRational, k: usize) -> Self {
        let mut v = vec![BigRational::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn to_c64(&self) -> Vec<C64> {
        self.coeffs.iter().map(|c| C64::new(rat_to_f64(c), 0.0)).collect()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::zero(), |acc, c| acc * z + rat_to_f64(c))
    }

    /// Value and first derivative at `z`.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut p = C64::zero();
        let mut dp = C64::zero();
        for c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + rat_to_f64(c);
        }
        (p, dp)
    }

    pub fn eval_abs(&self, r: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + rat_to_f64(c).abs())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut v = vec![BigRational::zero(); k];
        v.extend(self.coeffs.iter().cloned());
        Self::new(v)
    }

    pub fn monic(&self) -> Self {
        match self.lead() {
            Some(l) => self.scale(&l.recip()),
            None => Self::zero(),
        }
    }

    /// Polynomial division with remainder. Panics on division by zero.
    pub fn div_rem(&self, d: &Poly1) -> (Poly1, Poly1) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.lead().unwrap().clone();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Poly1::zero(), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] / &lead;
            if !c.is_zero() {
                for (i, dc) in d.coeffs.iter().enumerate() {
                    r[k + i] -= &c * dc;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (Poly1::new(q), Poly1::new(r))
    }

    /// Monic greatest common divisor.
    pub fn gcd(a: &Poly1, b: &Poly1) -> Poly1 {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer((k as i64).into()))
                .collect(),
        )
    }

    /// Multiplicity of the root `z = 0`.
    pub fn zero_order(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }
}

impl Add for &Poly1 {
    type Output = Poly1;
    fn add(self, rhs: Self) -> Poly1 {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let v = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero);
                let b = rhs.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero);
                a + b
            })
            .collect();
        Poly1::new(v)
    }
}

impl Sub for &Poly1 {
    type Output = Poly1;
    fn sub(self, rhs: Self) -> Poly1 {
        self + &rhs.scale(&-BigRational::one())
    }
}

impl Mul for &Poly1 {
    type Output = Poly1;
    fn mul(self, rhs: Self) -> Poly1 {
        if self.is_zero() || rhs.is_zero() {
            return Poly1::zero();
        }
        let mut v = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly1::new(v)
    }
}

/// `z^shift · poly(z)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaurentPoly {
    pub poly: Poly1,
    pub shift: i64,
}

impl LaurentPoly {
    pub fn from_map(map: BTreeMap<i64, BigRational>) -> Self {
        let map: BTreeMap<i64, BigRational> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let Some(&lo) = map.keys().next() else {
            return Self::default();
        };
        let hi = *map.keys().next_back().unwrap();
        let mut v = vec![BigRational::zero(); (hi - lo + 1) as usize];
        for (k, c) in map {
            v[(k - lo) as usize] = c;
        }
        Self { poly: Poly1::new(v), shift: lo }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }
}

/// Univariate rational function `num(z) / den(z)` with polynomial parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFn1 {
    pub num: Poly1,
    pub den: Poly1,
}

impl RatFn1 {
    /// Build from Laurent numerator and denominator, moving monomials so both
    /// parts are ordinary polynomials, then cancel the gcd.
    pub fn from_laurent(num: &LaurentPoly, den: &LaurentPoly) -> Self {
        let s = num.shift - den.shift;
        let (n, d) = if s >= 0 {
            (num.poly.shift_up(s as usize), den.poly.clone())
        } else {
            (num.poly.clone(), den.poly.shift_up((-s) as usize))
        };
        Self { num: n, den: d }.reduced()
    }

    pub fn reduced(&self) -> Self {
        if self.num.is_zero() {
            return Self { num: Poly1::zero(), den: Poly1::one() };
        }
        let g = Poly1::gcd(&self.num, &self.den);
        let (n, _) = self.num.div_rem(&g);
        let (d, _) = self.den.div_rem(&g);
        let l = d.lead().unwrap().clone();
        Self { num: n.scale(&l.recip()), den: d.scale(&l.recip()) }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.num.eval(z) / self.den.eval(z)
    }
}
