//! Pratt-style parser for operator expressions over `q`, `Q`, `E`.
//!
//! Products are noncommutative: moving `E^i` to the right of a coefficient
//! applies `E Q = q Q E`. Division is right division, `A / B = A · B^{-1}`,
//! and `B` must be free of `E`. Juxtaposition multiplies (`q^3 Q^2`).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;


use super::poly::BivariatePolynomial;
use super::rational::RationalFunction2;
use crate::error::{Error, Result};

/// What an identifier stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    Outer,
    Inner,
    Shift,
}

/// Symbol table for the parser.
#[derive(Clone, Debug)]
pub struct Symbols {
    names: Vec<(&'static str, Generator)>,
}

impl Symbols {
    /// `Q`, `q`, `E` for q-difference operators.
    pub fn operator() -> Self {
        Self { names: vec![("Q", Generator::Outer), ("q", Generator::Inner), ("E", Generator::Shift)] }
    }

    /// `L`, `M` for A-polynomials.
    pub fn a_polynomial() -> Self {
        Self { names: vec![("L", Generator::Outer), ("M", Generator::Inner)] }
    }

    /// `x`, `eps` for closed-form ε-equation coefficients.
    pub fn epsilon() -> Self {
        Self { names: vec![("x", Generator::Outer), ("eps", Generator::Inner)] }
    }

    fn lookup(&self, name: &str) -> Option<Generator> {
        self.names.iter().find(|(n, _)| *n == name).map(|(_, g)| *g)
    }
}

/// Sum `Σ_i c_i(Q,q) E^i` with every `E` moved to the right.
#[derive(Clone, Debug, Default)]
pub struct OperatorExpr {
    pub(crate) coeffs: BTreeMap<u32, RationalFunction2>,
}

impl OperatorExpr {
    fn scalar(r: RationalFunction2) -> Self {
        let mut coeffs = BTreeMap::new();
        if !r.is_zero() {
            coeffs.insert(0, r);
        }
        Self { coeffs }
    }

    fn shift() -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(1, RationalFunction2::one());
        Self { coeffs }
    }

    fn is_shift_free(&self) -> bool {
        self.coeffs.keys().all(|&k| k == 0)
    }

    fn add(&self, o: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &o.coeffs {
            let v = match coeffs.get(k) {
                Some(a) => a.add(c),
                None => c.clone(),
            };
            if v.is_zero() {
                coeffs.remove(k);
            } else {
                coeffs.insert(*k, v);
            }
        }
        Self { coeffs }
    }

    fn neg(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(k, c)| (*k, c.neg())).collect() }
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out = Self::default();
        for (&i, a) in &self.coeffs {
            for (&j, b) in &o.coeffs {
                let term = a.mul(&b.shift_outer(i as i64));
                let mut single = Self::default();
                if !term.is_zero() {
                    single.coeffs.insert(i + j, term);
                }
                out = out.add(&single);
            }
        }
        out
    }

    /// The coefficient list `b_0..b_d` (zero where absent).
    pub fn into_coefficients(self) -> Vec<RationalFunction2> {
        let Some(&d) = self.coeffs.keys().next_back() else {
            return Vec::new();
        };
        (0..=d)
            .map(|j| self.coeffs.get(&j).cloned().unwrap_or_else(RationalFunction2::zero))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((Tok::Plus, start)),
            '-' => out.push((Tok::Minus, start)),
            '*' => out.push((Tok::Star, start)),
            '/' => out.push((Tok::Slash, start)),
            '^' => out.push((Tok::Caret, start)),
            '(' => out.push((Tok::LParen, start)),
            ')' => out.push((Tok::RParen, start)),
            '0'..='9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().expect("digits");
                out.push((Tok::Num(n), start));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            other => {
                return Err(Error::Syntax { pos: start, msg: format!("unexpected character {other:?}") });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    symbols: &'a Symbols,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.offset(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<OperatorExpr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.add(&self.term()?.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<OperatorExpr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let at = self.offset();
                    let d = self.unary()?;
                    acc = acc.mul(&invert(&d, at)?);
                }
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    acc = acc.mul(&self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<OperatorExpr> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Some(Tok::Plus) => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<OperatorExpr> {
        let at = self.offset();
        let base = self.primary()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.bump();
        let e = self.exponent()?;
        if e >= 0 {
            let mut acc = OperatorExpr::scalar(RationalFunction2::one());
            for _ in 0..e {
                acc = acc.mul(&base);
            }
            Ok(acc)
        } else {
            let inv = invert(&base, at)?;
            let mut acc = OperatorExpr::scalar(RationalFunction2::one());
            for _ in 0..(-e) {
                acc = acc.mul(&inv);
            }
            Ok(acc)
        }
    }

    fn exponent(&mut self) -> Result<i64> {
        let parens = self.peek() == Some(&Tok::LParen);
        if parens {
            self.bump();
        }
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.bump();
            true
        } else {
            false
        };
        let n = match self.bump() {
            Some(Tok::Num(n)) => n,
            _ => {
                self.pos -= 1;
                return self.err("expected an integer exponent");
            }
        };
        let n: i64 = match i64::try_from(&n) {
            Ok(v) if v <= 4096 => v,
            _ => return self.err("exponent too large"),
        };
        if parens {
            if self.peek() != Some(&Tok::RParen) {
                return self.err("expected ')'");
            }
            self.bump();
        }
        Ok(if neg { -n } else { n })
    }

    fn primary(&mut self) -> Result<OperatorExpr> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.bump();
                let c = BigRational::from_integer(n);
                Ok(OperatorExpr::scalar(RationalFunction2::from_poly(BivariatePolynomial::constant(c))))
            }
            Some(Tok::Ident(name)) => {
                let Some(g) = self.symbols.lookup(&name) else {
                    return self.err(format!("unknown symbol {name:?}"));
                };
                self.bump();
                Ok(match g {
                    Generator::Outer => OperatorExpr::scalar(RationalFunction2::from_poly(BivariatePolynomial::outer())),
                    Generator::Inner => OperatorExpr::scalar(RationalFunction2::from_poly(BivariatePolynomial::inner())),
                    Generator::Shift => OperatorExpr::shift(),
                })
            }
            Some(Tok::LParen) => {
                self.bump();
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected ')'");
                }
                self.bump();
                Ok(e)
            }
            Some(_) => self.err("expected a number, symbol or '('"),
            None => self.err("unexpected end of input"),
        }
    }
}

fn invert(d: &OperatorExpr, at: usize) -> Result<OperatorExpr> {
    if !d.is_shift_free() {
        return Err(Error::ShiftInDenominator { pos: at });
    }
    let Some(c) = d.coeffs.get(&0) else {
        return Err(Error::Syntax { pos: at, msg: "division by zero".into() });
    };
    Ok(OperatorExpr::scalar(c.recip()?))
}

/// Parse an expression into normal form `Σ b_i E^i`.
pub fn parse_expr(text: &str, symbols: &Symbols) -> Result<OperatorExpr> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), symbols };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Parse a Laurent polynomial in two variables (no `E`, constant denominators only).
pub fn parse_polynomial(text: &str, symbols: &Symbols) -> Result<BivariatePolynomial> {
    let e = parse_expr(text, symbols)?;
    if !e.is_shift_free() {
        return Err(Error::Invalid("expected a polynomial without E".into()));
    }
    let Some(c) = e.coeffs.get(&0) else {
        return Ok(BivariatePolynomial::zero());
    };
    // monomial denominators are allowed (Laurent); anything else is rejected
    let den = c.denominator();
    if den.num_terms() != 1 {
        return Err(Error::Invalid(format!("not a Laurent polynomial: {c}")));
    }
    let (&(a, b), k) = den.terms().next().unwrap();
    Ok(c.numerator().shift(-a, -b).scale(&k.recip()))
}

