//! Overflow-safe iteration of q- and ε-difference equations, growth rates,
//! basis decomposition and the linear-algebra facts behind the asymptotics.

mod basis;
mod involutions;
mod lemmas;
mod logscaled;

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64 as C64;
use serde::Serialize;

pub use basis::{decompose_in_basis, Decomposition};
pub use involutions::{big_ln, involution_ratio, involutions_exact, involutions_trace};
pub use lemmas::{companion, companion_diagonalize, transfer_norm_probe, vandermonde_ratio, Diagonalization, NormProbe};
pub use logscaled::LogScaled;

use crate::error::{Error, Result};
use crate::operator::{EpsilonEquation, QOperator};

/// A step is singular when `|a_d| ≤` this times `max_j |a_j|`.
pub const SINGULAR_STEP_TOL: f64 = 1e-12;

/// Offset of the evaluation point, in units of ε, when a singular step is punctured.
pub const PUNCTURE_OFFSET: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    Double,
    /// Mantissa bits used for the step sums.
    Extended(usize),
}

#[derive(Clone, Copy, Debug)]
pub struct SimOptions {
    /// Evaluate singular steps at a slightly shifted point instead of aborting.
    pub puncture: bool,
    pub precision: Precision,
    /// Bound on `|Σ a_j f(k+j)| / max_j |a_j f(k+j)|`.
    pub residual_tol: f64,
    /// Redo a step in extended precision when the residual check fails.
    pub auto_extend: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { puncture: false, precision: Precision::Double, residual_tol: 1e-8, auto_extend: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Q { n: usize, alpha: f64 },
    Eps { eps: f64, interval: (f64, f64) },
    /// Coefficients given directly as functions of the index.
    Index,
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularEvent {
    pub k: i64,
    pub detail: String,
    pub punctured: bool,
}

/// Values `f(k)` for `k = k0, k0 + 1, …`.
#[derive(Clone, Debug, Serialize)]
pub struct RecursionTrace {
    pub mode: Mode,
    pub k0: i64,
    pub values: Vec<LogScaled>,
    pub init: Vec<LogScaled>,
    pub events: Vec<SingularEvent>,
    /// Largest relative step residual.
    pub max_residual: f64,
    /// Steps redone in extended precision.
    pub extended_steps: usize,
    /// Index the run was asked to reach.
    pub target: i64,
}

impl RecursionTrace {
    pub fn last_k(&self) -> i64 {
        self.k0 + self.values.len() as i64 - 1
    }

    pub fn at(&self, k: i64) -> Option<LogScaled> {
        usize::try_from(k - self.k0).ok().and_then(|i| self.values.get(i).copied())
    }

    pub fn log_abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.log_abs()).collect()
    }

    /// Columns `k, log_abs, phase`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "log_abs", "phase"]).map_err(csv_err)?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([(self.k0 + i as i64).to_string(), v.log_abs().to_string(), v.phase().to_string()])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn to_logscaled(init: &[C64]) -> Result<Vec<LogScaled>> {
    init.iter()
        .map(|&z| LogScaled::new(z).ok_or_else(|| Error::Invalid(format!("non-finite initial value {z}"))))
        .collect()
}

fn singular(c: &[C64]) -> bool {
    let d = c.len() - 1;
    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    !(c[d].norm() > SINGULAR_STEP_TOL * scale)
}

/// Step `Σ_{j=0}^d a_j(k) f(k+j) = 0` forward from `init = f(k0..k0+d)`
/// until `f(k_end)`. `coeffs(k, punctured)` returns `a_0(k)..a_d(k)`.
pub fn iterate_with<F>(
    mode: Mode,
    d: usize,
    init: Vec<LogScaled>,
    k0: i64,
    k_end: i64,
    mut coeffs: F,
    opts: SimOptions,
) -> Result<RecursionTrace>
where
    F: FnMut(i64, bool) -> Result<Vec<C64>>,
{
    if init.len() != d {
        return Err(Error::Invalid(format!("{} initial values for degree {d}", init.len())));
    }
    let mut values = init.clone();
    let mut events = Vec::new();
    let mut max_residual: f64 = 0.0;
    let mut extended_steps = 0;
    let mut k = k0;
    while k + (d as i64) <= k_end {
        let c = match coeffs(k, false) {
            Ok(c) if !singular(&c) => c,
            other => {
                let detail = match other {
                    Ok(c) => format!("leading coefficient {:.3e}", c[d].norm()),
                    Err(e) => e.to_string(),
                };
                if !opts.puncture {
                    return Err(Error::SingularStep { k, detail });
                }
                events.push(SingularEvent { k, detail, punctured: true });
                let c = coeffs(k, true)?;
                if singular(&c) {
                    return Err(Error::SingularStep { k, detail: "still singular after puncture".into() });
                }
                c
            }
        };
        let i = (k - k0) as usize;
        let window = &values[i..i + d];
        let lower = &c[..d];
        let (s, _) = match opts.precision {
            Precision::Double => LogScaled::dot(lower, window),
            Precision::Extended(bits) => LogScaled::dot_extended(lower, window, bits),
        };
        let mut next = (-s).scale(c[d].inv());
        let mut res = step_residual(&c, window, next);
        if res > opts.residual_tol && opts.auto_extend && opts.precision == Precision::Double {
            let (s, _) = LogScaled::dot_extended(lower, window, 256);
            next = (-s).scale(c[d].inv());
            res = step_residual(&c, window, next);
            extended_steps += 1;
        }
        if res > opts.residual_tol {
            return Err(Error::Residual { residual: res, tol: opts.residual_tol, context: format!("step at k = {k}") });
        }
        max_residual = max_residual.max(res);
        values.push(next);
        k += 1;
    }
    Ok(RecursionTrace { mode, k0, values, init, events, max_residual, extended_steps, target: k_end })
}

fn step_residual(c: &[C64], window: &[LogScaled], next: LogScaled) -> f64 {
    let mut z = window.to_vec();
    z.push(next);
    let (s, max) = LogScaled::dot(c, &z);
    if max.is_zero() {
        0.0
    } else {
        (s.log_abs() - max.log_abs()).exp()
    }
}

/// `f(0..=n)` for `P f = 0` at `q = e^{2πiα/n}`, `Q = q^k`, from `f(0..d)`.
pub fn iterate_q(op: &QOperator, n: usize, alpha: f64, init: &[C64], opts: SimOptions) -> Result<RecursionTrace> {
    let eps = alpha / n as f64;
    let q = C64::from_polar(1.0, TAU * eps);
    iterate_with(
        Mode::Q { n, alpha },
        op.degree(),
        to_logscaled(init)?,
        0,
        n as i64,
        |k, punct| {
            let mut x = k as f64 * eps;
            if punct {
                x += PUNCTURE_OFFSET * eps;
            }
            op.eval_all(C64::from_polar(1.0, TAU * x), q)
        },
        opts,
    )
}

/// Number of steps `K` with `x_lo + Kε ≤ x_hi`.
pub fn steps_in(interval: (f64, f64), eps: f64) -> i64 {
    ((interval.1 - interval.0) / eps + 1e-9).floor() as i64
}

/// `ψ(x_lo + kε, ε)` for all `k` with `x_lo + kε ∈ I`, from `ψ` at `k = 0..d`.
pub fn iterate_eps(eq: &EpsilonEquation, eps: f64, init: &[C64], opts: SimOptions) -> Result<RecursionTrace> {
    iterate_eps_scaled(eq, eps, to_logscaled(init)?, opts)
}

pub fn iterate_eps_scaled(
    eq: &EpsilonEquation,
    eps: f64,
    init: Vec<LogScaled>,
    opts: SimOptions,
) -> Result<RecursionTrace> {
    if !(eps > 0.0) {
        return Err(Error::Invalid(format!("ε = {eps} must be positive")));
    }
    let interval = eq.interval();
    let lo = interval.0;
    iterate_with(
        Mode::Eps { eps, interval },
        eq.degree(),
        init,
        0,
        steps_in(interval, eps),
        |k, punct| {
            let mut x = lo + k as f64 * eps;
            if punct {
                x += PUNCTURE_OFFSET * eps;
            }
            eq.coeffs(x, eps)
        },
        opts,
    )
}

/// `(1/n) log|f(n)|` in q-mode, `ε log|ψ(x_hi, ε)|` in ε-mode.
pub fn growth_rate(trace: &RecursionTrace) -> Result<f64> {
    if trace.last_k() < trace.target {
        return Err(Error::Aborted { reached: trace.last_k(), target: trace.target });
    }
    let last = trace.values.last().expect("nonempty trace").log_abs();
    match trace.mode {
        Mode::Q { n, .. } => Ok(last / n as f64),
        Mode::Eps { eps, .. } => Ok(eps * last),
        Mode::Index => Ok(last / trace.target as f64),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    /// `n` in q-mode, `ε` in ε-mode.
    pub n_or_eps: f64,
    pub rate: f64,
    pub extrapolated: Option<f64>,
    pub err_est: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Convergence {
    pub rows: Vec<ConvergenceRow>,
    pub limit: f64,
    pub error: f64,
}

impl Convergence {
    /// Columns `n_or_eps, rate, extrapolated, err_est`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n_or_eps", "rate", "extrapolated", "err_est"]).map_err(csv_err)?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for r in &self.rows {
            w.write_record([r.n_or_eps.to_string(), r.rate.to_string(), opt(r.extrapolated), opt(r.err_est)])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Richardson table for rates `r(h) = r∞ + C h + o(h)` at decreasing `h`.
pub fn richardson(h: &[f64], rates: &[f64], labels: &[f64]) -> Convergence {
    let mut rows = Vec::with_capacity(rates.len());
    let mut prev_ex: Option<f64> = None;
    for i in 0..rates.len() {
        let (ex, err) = if i == 0 {
            (None, None)
        } else {
            let e = (rates[i] * h[i - 1] - rates[i - 1] * h[i]) / (h[i - 1] - h[i]);
            let err = match prev_ex {
                Some(p) => (e - p).abs(),
                None => (rates[i] - rates[i - 1]).abs(),
            };
            (Some(e), Some(err))
        };
        prev_ex = ex.or(prev_ex);
        rows.push(ConvergenceRow { n_or_eps: labels[i], rate: rates[i], extrapolated: ex, err_est: err });
    }
    let last = rows.last().expect("at least one run");
    let limit = last.extrapolated.unwrap_or(last.rate);
    let error = last.err_est.unwrap_or(f64::NAN);
    Convergence { rows, limit, error }
}

/// q-mode growth rates over a doubling sequence of `n`.
pub fn convergence_q(op: &QOperator, alpha: f64, ns: &[usize], init: &[C64], opts: SimOptions) -> Result<Convergence> {
    let rates = ns
        .iter()
        .map(|&n| growth_rate(&iterate_q(op, n, alpha, init, opts)?))
        .collect::<Result<Vec<_>>>()?;
    let h: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    let labels: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    Ok(richardson(&h, &rates, &labels))
}

/// ε-mode growth rates over a halving sequence of `ε`.
pub fn convergence_eps(eq: &EpsilonEquation, eps: &[f64], init: &[C64], opts: SimOptions) -> Result<Convergence> {
    let rates = eps
        .iter()
        .map(|&e| growth_rate(&iterate_eps(eq, e, init, opts)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(richardson(eps, &rates, eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::parse_operator;

    #[test]
    fn geometric() {
        let op = parse_operator("E - 2").unwrap();
        let tr = iterate_q(&op, 3000, 0.7, &[C64::new(1.0, 0.0)], SimOptions::default()).unwrap();
        assert!((tr.values[3000].log_abs() - 3000.0 * 2f64.ln()).abs() < 1e-9);
        assert!((growth_rate(&tr).unwrap() - 2f64.ln()).abs() < 1e-15);
        let c = convergence_q(&op, 1.0, &[100, 200, 400], &[C64::new(1.0, 0.0)], SimOptions::default()).unwrap();
        assert!((c.limit - 2f64.ln()).abs() < 1e-14);
        assert!(c.error < 1e-14);
    }

    #[test]
    fn constant_solution() {
        let op = parse_operator("E^2 - (Q + 1)*E + Q").unwrap();
        let one = C64::new(1.0, 0.0);
        let tr = iterate_q(&op, 500, 0.3, &[one, one], SimOptions::default()).unwrap();
        for v in &tr.values {
            assert!((v.to_c64() - one).norm() < 1e-10);
        }
    }

    #[test]
    fn riemann_sum() {
        let eq = EpsilonEquation::from_expressions(&["-(2 + x)", "1"], (0.0, 1.0)).unwrap();
        let eps = 1e-3;
        let tr = iterate_eps(&eq, eps, &[C64::new(1.0, 0.0)], SimOptions::default()).unwrap();
        let direct: f64 = (0..1000).map(|k| (2.0 + k as f64 * eps).ln()).sum();
        assert!((tr.values[1000].log_abs() - direct).abs() < 1e-9);
        let exact = 3.0 * 3f64.ln() - 2.0 * 2f64.ln() - 1.0;
        assert!((growth_rate(&tr).unwrap() - exact).abs() < 1e-3);
    }

    #[test]
    fn eigen_solution() {
        let eq = EpsilonEquation::from_expressions(&["1", "-5/2", "1"], (0.0, 1.0)).unwrap();
        let tr = iterate_eps(&eq, 0.01, &[C64::new(1.0, 0.0), C64::new(2.0, 0.0)], SimOptions::default()).unwrap();
        for (k, v) in tr.values.iter().enumerate() {
            assert!((v.log_abs() - k as f64 * 2f64.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_step_aborts_or_punctures() {
        // leading coefficient 1 - Q vanishes at k = 0, where Q = 1
        let op = parse_operator("(1 - Q)*E - 1").unwrap();
        let err = iterate_q(&op, 100, 1.0, &[C64::new(1.0, 0.0)], SimOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SingularStep { k: 0, .. }));
        let opts = SimOptions { puncture: true, ..SimOptions::default() };
        let tr = iterate_q(&op, 100, 1.0, &[C64::new(1.0, 0.0)], opts).unwrap();
        assert_eq!(tr.events.len(), 1);
        assert_eq!(tr.events[0].k, 0);
    }

    #[test]
    fn aborted_trace_has_no_rate() {
        let op = parse_operator("E - 2").unwrap();
        let mut tr = iterate_q(&op, 10, 1.0, &[C64::new(1.0, 0.0)], SimOptions::default()).unwrap();
        tr.values.truncate(5);
        assert!(matches!(growth_rate(&tr), Err(Error::Aborted { reached: 4, target: 10 })));
    }

    #[test]
    fn richardson_removes_linear_term() {
        let h = [0.1, 0.05, 0.025];
        let r: Vec<f64> = h.iter().map(|h| 2.0 + 3.0 * h).collect();
        let c = richardson(&h, &r, &h);
        assert!((c.limit - 2.0).abs() < 1e-12);
    }
}
