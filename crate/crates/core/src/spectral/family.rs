//! Polynomial families `λ ↦ Σ_j c_j(t) λ^j` along a real parameter.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::roots::aberth;
use crate::error::{Error, Result};
use crate::operator::{
    BivariatePolynomial, EpsilonEquation, LaurentPoly, Poly1, QOperator, RatFn1, SINGULAR_THRESHOLD,
};

/// How the real parameter `t` maps to the coefficient variable `z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Parametrization {
    /// `z = e^{i·freq·t}`
    Exp { freq: f64 },
    /// `z = t`
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub param: Parametrization,
    pub range: (f64, f64),
}

impl Path {
    /// `v = e^{2πit}`, `t ∈ [0, 1]`.
    pub fn circle() -> Self {
        Self { param: Parametrization::Exp { freq: 2.0 * std::f64::consts::PI }, range: (0.0, 1.0) }
    }

    /// `v = e^{it}`, `t ∈ [0, 2π]`.
    pub fn angle() -> Self {
        Self { param: Parametrization::Exp { freq: 1.0 }, range: (0.0, 2.0 * std::f64::consts::PI) }
    }

    /// `M = e^{it/2}`, `t ∈ [0, 2π]` (for polynomials in `M` whose circle variable is `M²`).
    pub fn half_angle() -> Self {
        Self { param: Parametrization::Exp { freq: 0.5 }, range: (0.0, 2.0 * std::f64::consts::PI) }
    }

    /// `v = e^{2πix}`, `x ∈ [lo, hi]` (ε-forms of q-operators).
    pub fn exp_interval(lo: f64, hi: f64) -> Self {
        Self { param: Parametrization::Exp { freq: 2.0 * std::f64::consts::PI }, range: (lo, hi) }
    }

    /// `z = x`, `x ∈ [lo, hi]`.
    pub fn interval(lo: f64, hi: f64) -> Self {
        Self { param: Parametrization::Identity, range: (lo, hi) }
    }

    pub fn z(&self, t: f64) -> C64 {
        match self.param {
            Parametrization::Exp { freq } => C64::from_polar(1.0, freq * t),
            Parametrization::Identity => C64::new(t, 0.0),
        }
    }

    pub fn z_complex(&self, t: C64) -> C64 {
        match self.param {
            Parametrization::Exp { freq } => (C64::new(0.0, freq) * t).exp(),
            Parametrization::Identity => t,
        }
    }

    /// All parameter values in range (with a small tolerance) mapping to `z0`.
    pub fn preimages(&self, z0: C64) -> Vec<f64> {
        let (lo, hi) = self.range;
        let slack = 1e-9 * (hi - lo).abs().max(1.0);
        match self.param {
            Parametrization::Exp { freq } => {
                if (z0.norm() - 1.0).abs() > 1e-6 {
                    return Vec::new();
                }
                let period = 2.0 * std::f64::consts::PI / freq.abs();
                let base = z0.arg() / freq;
                let kmin = ((lo - slack - base) / period).ceil() as i64;
                let kmax = ((hi + slack - base) / period).floor() as i64;
                (kmin..=kmax).map(|k| (base + k as f64 * period).clamp(lo, hi)).collect()
            }
            Parametrization::Identity => {
                if z0.im.abs() > 1e-7 * (1.0 + z0.re.abs()) || z0.re < lo - slack || z0.re > hi + slack {
                    Vec::new()
                } else {
                    vec![z0.re.clamp(lo, hi)]
                }
            }
        }
    }

    pub fn describe(&self, var: &str) -> String {
        let (lo, hi) = self.range;
        match self.param {
            Parametrization::Exp { freq } => format!("{var} = exp(i*{freq}*t), t in [{lo}, {hi}]"),
            Parametrization::Identity => format!("{var} = t, t in [{lo}, {hi}]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExceptionalKind {
    /// a coefficient denominator vanishes
    Pole,
    /// the leading coefficient vanishes
    DegreeDrop,
    /// the constant coefficient vanishes (a zero eigenvalue)
    Vanishing,
    /// two eigenvalues coincide
    Collision,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exceptional {
    pub t: f64,
    pub kind: ExceptionalKind,
}

/// A one-parameter family of degree-`d` polynomials in `λ`.
pub trait Family: Send + Sync + fmt::Debug {
    fn degree(&self) -> usize;
    fn path(&self) -> Path;
    /// Coefficients (ascending in `λ`) of a polynomial with the family's roots
    /// at `t`; finite wherever the leading coefficient does not vanish.
    fn poly_at(&self, t: f64) -> Vec<C64>;
    /// The same polynomial at complex `t`, when the family is analytic in closed form.
    fn poly_at_complex(&self, _t: C64) -> Option<Vec<C64>> {
        None
    }
    /// Exact exceptional points on the path, when known.
    fn exceptional(&self) -> Option<Vec<Exceptional>> {
        None
    }
    /// The genuine coefficients `c_j(t)`, failing at poles.
    fn coefficients(&self, t: f64) -> Result<Vec<C64>> {
        Ok(self.poly_at(t))
    }
    fn describe(&self) -> String;
}

/// The characteristic polynomial `Σ_j c_j(z) λ^j` with exact rational coefficients.
#[derive(Clone, Debug)]
pub struct CharPoly {
    coeffs: Vec<RatFn1>,
    cleared: Vec<Poly1>,
    lcm: Poly1,
    cleared_f: Vec<Vec<C64>>,
    lcm_f: Vec<C64>,
    coeffs_f: Vec<(Vec<C64>, Vec<C64>)>,
    path: Path,
    exceptional: Vec<Exceptional>,
    label: String,
}

fn to_c(p: &Poly1) -> Vec<C64> {
    p.to_c64()
}

fn eval_c(c: &[C64], z: C64) -> C64 {
    c.iter().rev().fold(C64::zero(), |acc, &a| acc * z + a)
}

fn poly_lcm(a: &Poly1, b: &Poly1) -> Poly1 {
    let g = Poly1::gcd(a, b);
    let (q, _) = (a * b).div_rem(&g);
    q.monic()
}

fn exact_div(a: &Poly1, b: &Poly1) -> Poly1 {
    let (q, r) = a.div_rem(b);
    debug_assert!(r.is_zero(), "inexact polynomial division");
    q
}

/// Distinct roots of an exact polynomial. Working on the square-free part
/// keeps every root simple, so they come out to full precision.
fn exact_roots(p: &Poly1) -> Vec<C64> {
    let Some(d) = p.degree() else { return Vec::new() };
    if d == 0 {
        return Vec::new();
    }
    let g = Poly1::gcd(p, &p.derivative());
    let sqf = if g.degree().unwrap_or(0) > 0 { exact_div(p, &g) } else { p.clone() };
    aberth(&to_c(&sqf), None)
}

/// `Res_λ(P, ∂_λ P)` for `P = Σ_j p_j(z) λ^j`, by fraction-free elimination
/// on the Sylvester matrix.
pub fn discriminant(p: &[Poly1]) -> Poly1 {
    let d = p.len() - 1;
    if d < 1 {
        return Poly1::one();
    }
    let dp: Vec<Poly1> = (1..=d)
        .map(|j| p[j].scale(&BigRational::from_integer((j as i64).into())))
        .collect();
    let n = 2 * d - 1;
    let mut m = vec![vec![Poly1::zero(); n]; n];
    // d-1 shifted copies of P, d shifted copies of P'
    for r in 0..d - 1 {
        for j in 0..=d {
            m[r][r + (d - j)] = p[j].clone();
        }
    }
    for r in 0..d {
        for j in 0..d {
            m[d - 1 + r][r + (d - 1 - j)] = dp[j].clone();
        }
    }
    let mut sign = false;
    let mut prev = Poly1::one();
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return Poly1::zero();
        };
        if piv != k {
            m.swap(piv, k);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[k][k] * &m[i][j]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = exact_div(&num, &prev);
            }
            m[i][k] = Poly1::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign {
        det.scale(&BigRational::from_integer((-1).into()))
    } else {
        det
    }
}

impl CharPoly {
    pub fn new(coeffs: Vec<RatFn1>, path: Path, label: impl Into<String>) -> Result<Self> {
        let mut coeffs = coeffs;
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(Error::Degenerate("characteristic polynomial of degree 0".into()));
        }
        let mut lcm = Poly1::one();
        for c in &coeffs {
            lcm = poly_lcm(&lcm, &c.den);
        }
        let mut cleared: Vec<Poly1> = coeffs.iter().map(|c| &c.num * &exact_div(&lcm, &c.den)).collect();
        let mut g = Poly1::zero();
        for c in &cleared {
            g = if g.is_zero() { c.monic() } else { Poly1::gcd(&g, c) };
        }
        if g.degree().unwrap_or(0) > 0 {
            cleared = cleared.iter().map(|c| exact_div(c, &g)).collect();
        }
        let d = coeffs.len() - 1;
        let mut exceptional = Vec::new();
        let push = |ex: &mut Vec<Exceptional>, roots: Vec<C64>, kind| {
            for z in roots {
                for t in path.preimages(z) {
                    ex.push(Exceptional { t, kind });
                }
            }
        };
        push(&mut exceptional, exact_roots(&lcm), ExceptionalKind::Pole);
        push(&mut exceptional, exact_roots(&cleared[d]), ExceptionalKind::DegreeDrop);
        if cleared[0].is_zero() {
            // λ = 0 is a root everywhere; represent with the range start
            exceptional.push(Exceptional { t: path.range.0, kind: ExceptionalKind::Vanishing });
        } else {
            push(&mut exceptional, exact_roots(&cleared[0]), ExceptionalKind::Vanishing);
        }
        let disc = discriminant(&cleared);
        if !disc.is_zero() {
            push(&mut exceptional, exact_roots(&disc), ExceptionalKind::Collision);
        }
        let mut out = Self {
            cleared_f: cleared.iter().map(to_c).collect(),
            lcm_f: to_c(&lcm),
            coeffs_f: coeffs.iter().map(|c| (to_c(&c.num), to_c(&c.den))).collect(),
            coeffs,
            cleared,
            lcm,
            path,
            exceptional,
            label: label.into(),
        };
        out.exceptional = out.refine_exceptional();
        Ok(out)
    }

    /// `q → 1` specialization of an operator.
    pub fn from_operator(op: &QOperator, path: Path) -> Result<Self> {
        let c = op.specialize_classical()?;
        Self::new(c.coeffs, path, format!("{op}"))
    }

    /// `A(L, M)` as a polynomial in `L` with coefficients in `M`.
    pub fn from_a_polynomial(a: &BivariatePolynomial, path: Path) -> Result<Self> {
        let rows = a.outer_coefficients();
        let (&lo, _) = rows.iter().next().ok_or_else(|| Error::Degenerate("zero polynomial".into()))?;
        let (&hi, _) = rows.iter().next_back().unwrap();
        if hi <= lo {
            return Err(Error::Degenerate("A-polynomial has L-degree 0".into()));
        }
        let one = LaurentPoly { poly: Poly1::one(), shift: 0 };
        let coeffs = (lo..=hi)
            .map(|k| match rows.get(&k) {
                Some(p) => RatFn1::from_laurent(p, &one),
                None => RatFn1 { num: Poly1::zero(), den: Poly1::one() },
            })
            .collect();
        Self::new(coeffs, path, a.format_with("L", "M"))
    }

    /// Characteristic polynomial `Σ_j a_j(x, 0) λ^j` of an ε-equation with
    /// closed-form coefficients.
    pub fn from_epsilon(eq: &EpsilonEquation) -> Option<Self> {
        use crate::operator::CoefficientSource;
        let (lo, hi) = eq.interval();
        match eq.source() {
            CoefficientSource::Operator(op) => Self::from_operator(op, Path::exp_interval(lo, hi)).ok(),
            CoefficientSource::Polynomial(p) => {
                let one = LaurentPoly { poly: Poly1::one(), shift: 0 };
                let coeffs = p
                    .iter()
                    .map(|c| {
                        // keep ε^0 terms only
                        let x_only = BivariatePolynomial::from_terms(
                            c.terms().filter(|((_, b), _)| *b == 0).map(|(k, v)| (*k, v.clone())),
                        );
                        RatFn1::from_laurent(&x_only.at_inner_one(), &one)
                    })
                    .collect();
                Self::new(coeffs, Path::interval(lo, hi), format!("{:?}", eq.source())).ok()
            }
            _ => None,
        }
    }

    pub fn with_path(&self, path: Path) -> Result<Self> {
        Self::new(self.coeffs.clone(), path, self.label.clone())
    }

    pub fn coeffs(&self) -> &[RatFn1] {
        &self.coeffs
    }

    pub fn cleared(&self) -> &[Poly1] {
        &self.cleared
    }

    /// Least common denominator of the coefficients.
    pub fn denominator(&self) -> &Poly1 {
        &self.lcm
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Genuine coefficients `c_j(z)` at complex `z`.
    pub fn coefficients_at_z(&self, z: C64) -> Result<Vec<C64>> {
        self.coeffs_f
            .iter()
            .enumerate()
            .map(|(j, (n, d))| {
                let nv = eval_c(n, z);
                let dv = eval_c(d, z);
                if dv.norm() < SINGULAR_THRESHOLD * (1.0 + nv.norm()) {
                    Err(Error::Singular { at: format!("c_{j} at z = {z:.9}") })
                } else {
                    Ok(nv / dv)
                }
            })
            .collect()
    }

    /// `|lcm(z)|`, zero at coefficient poles.
    pub fn denominator_at(&self, z: C64) -> C64 {
        eval_c(&self.lcm_f, z)
    }

    /// Merge duplicates and sort.
    fn refine_exceptional(&self) -> Vec<Exceptional> {
        let mut out: Vec<Exceptional> = Vec::new();
        let (lo, hi) = self.path.range;
        let width = hi - lo;
        for e in &self.exceptional {
            let t = e.t;
            if !out.iter().any(|o| o.kind == e.kind && (o.t - t).abs() < 1e-9 * width.abs().max(1.0)) {
                out.push(Exceptional { t, kind: e.kind });
            }
        }
        out.sort_by(|a, b| a.t.total_cmp(&b.t));
        out
    }
}

/// Golden-section minimization on `[a, b]`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    // the ends matter for minima sitting on the boundary
    let mid = 0.5 * (a + b);
    [a, mid, b]
        .into_iter()
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap()
}

impl Family for CharPoly {
    fn degree(&self) -> usize {
        self.cleared.len() - 1
    }

    fn path(&self) -> Path {
        self.path
    }

    fn poly_at(&self, t: f64) -> Vec<C64> {
        let z = self.path.z(t);
        self.cleared_f.iter().map(|c| eval_c(c, z)).collect()
    }

    fn poly_at_complex(&self, t: C64) -> Option<Vec<C64>> {
        let z = self.path.z_complex(t);
        Some(self.cleared_f.iter().map(|c| eval_c(c, z)).collect())
    }

    fn exceptional(&self) -> Option<Vec<Exceptional>> {
        Some(self.exceptional.clone())
    }

    fn coefficients(&self, t: f64) -> Result<Vec<C64>> {
        self.coefficients_at_z(self.path.z(t))
    }

    fn describe(&self) -> String {
        self.path.describe("z")
    }
}

/// An ε-equation at `ε = 0` whose coefficients are only available pointwise.
#[derive(Clone, Debug)]
pub struct PointwiseFamily {
    pub eq: EpsilonEquation,
}

impl Family for PointwiseFamily {
    fn degree(&self) -> usize {
        self.eq.degree()
    }

    fn path(&self) -> Path {
        let (lo, hi) = self.eq.interval();
        Path::interval(lo, hi)
    }

    fn poly_at(&self, t: f64) -> Vec<C64> {
        (0..=self.eq.degree())
            .map(|j| self.eq.a(j, t, 0.0).unwrap_or(C64::new(f64::NAN, f64::NAN)))
            .collect()
    }

    fn coefficients(&self, t: f64) -> Result<Vec<C64>> {
        self.eq.coeffs(t, 0.0)
    }

    fn describe(&self) -> String {
        self.path().describe("x")
    }
}

/// The characteristic family of an ε-equation: exact when the coefficients
/// are closed-form, pointwise otherwise.
pub fn characteristic(eq: &EpsilonEquation) -> Arc<dyn Family> {
    match CharPoly::from_epsilon(eq) {
        Some(p) => Arc::new(p),
        None => Arc::new(PointwiseFamily { eq: eq.clone() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::parse_operator;

    #[test]
    fn discriminant_of_quadratic() {
        // λ² - (z+1)λ + z has discriminant (z-1)² up to sign
        let p = vec![Poly1::from_i64(&[0, 1]), Poly1::from_i64(&[-1, -1]), Poly1::one()];
        let d = discriminant(&p);
        let expect = Poly1::from_i64(&[1, -2, 1]);
        let ratio = d.lead().unwrap() / expect.lead().unwrap();
        assert_eq!(d, expect.scale(&ratio));
    }

    #[test]
    fn discriminant_of_cubic_matches_closed_form() {
        // λ³ + pλ + q: disc = -4p³ - 27q², resultant sign aside
        let p = vec![Poly1::from_i64(&[5]), Poly1::from_i64(&[3]), Poly1::zero(), Poly1::one()];
        let d = discriminant(&p);
        let v = crate::operator::rat_to_f64(&d.coeffs()[0]).abs();
        assert_eq!(v, (4.0 * 27.0 + 27.0 * 25.0f64).abs());
    }

    #[test]
    fn collision_of_unit_and_v() {
        let op = parse_operator("E^2 - (Q+1)*E + Q").unwrap();
        let p = CharPoly::from_operator(&op, Path::circle()).unwrap();
        let ex = p.exceptional().unwrap();
        let ts: Vec<f64> = ex.iter().filter(|e| e.kind == ExceptionalKind::Collision).map(|e| e.t).collect();
        assert!(ts.iter().any(|t| t.abs() < 1e-7), "{ts:?}");
        assert!(ts.iter().any(|t| (t - 1.0).abs() < 1e-7), "{ts:?}");
    }
}
