//! The `qwkb` command line: `analyze`, `entropy`, `wkb` and `simulate`.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 input error, 3 singular abort.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::Serialize;

pub use config::{AnalysisConfig, Flags, ParamChoice};

use crate::builtins::Builtin;
use crate::entropy::{
    alpha_grid, write_chi_csv, write_plot_data, write_profile_csv, Entropy, Normalization, SubsetSelection,
    A_ENTROPY_GRID,
};
use crate::error::{Error, Result};
use crate::operator::{parse_operator, parse_qop, BivariatePolynomial, EpsilonEquation, QOperator};
use crate::simulator::{
    convergence_eps, convergence_q, growth_rate, involution_ratio, involutions_exact, involutions_trace,
    iterate_eps_scaled, iterate_q, Convergence, LogScaled, RecursionTrace, SimOptions,
};
use crate::spectral::{
    characteristic, check_regularity, export as spectral_export, partition_arcs, track_eigenpaths, ArcPartition,
    CharPoly, EigenGrid, Family, LabelRule, PartitionOptions, Path, RegularityReport, TrackOptions,
};
use crate::wkb::{phi0, phi1, phi_higher, wkb_seed, FormalJet, HierarchyOptions};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qwkb", version, about = "Asymptotics of q-difference and ε-difference equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Characteristic polynomial, regularity and arc partition.
    Analyze(Flags),
    /// S-entropy profiles σ_S(α).
    Entropy(Flags),
    /// WKB jets φ_{m,s} of a regular ε-equation.
    Wkb(Flags),
    /// Overflow-safe iteration, growth rates and convergence tables.
    Simulate(Flags),
}

/// What an input name resolves to.
#[derive(Clone, Debug)]
pub enum Source {
    /// A knot operator together with its A-polynomial.
    Knot(Builtin, QOperator, BivariatePolynomial),
    Operator(QOperator),
    Epsilon(EpsilonEquation),
    Involutions,
}

pub fn resolve_input(name: &str) -> Result<Source> {
    if let Ok(b) = name.parse::<Builtin>() {
        return Ok(match b {
            Builtin::Involutions => Source::Involutions,
            Builtin::Trefoil | Builtin::Figure8 => {
                Source::Knot(b, b.operator().expect("knot operator"), b.a_polynomial().expect("knot A-polynomial"))
            }
            Builtin::ConstD2 => Source::Operator(b.operator().expect("operator")),
            Builtin::Synthetic2x | Builtin::SyntheticFirstOrder => Source::Epsilon(b.epsilon().expect("equation")),
        });
    }
    let path = FsPath::new(name);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{name}: {e}")))?;
        return Ok(Source::Operator(parse_qop(&text)?));
    }
    Ok(Source::Operator(parse_operator(name)?))
}

/// Tracked family with a printable characteristic polynomial.
struct Tracked {
    grid: EigenGrid,
    partition: ArcPartition,
    polynomial: String,
    labels: LabelRule,
}

fn operator_polynomial(p: &CharPoly) -> String {
    let terms = p.cleared().iter().enumerate().flat_map(|(j, c)| {
        c.coeffs()
            .iter()
            .enumerate()
            .filter(|(_, v)| !num_traits::Zero::is_zero(*v))
            .map(move |(k, v)| ((j as i64, k as i64), v.clone()))
            .collect::<Vec<_>>()
    });
    BivariatePolynomial::from_terms(terms).format_with("lambda", "v")
}

fn track(src: &Source, cfg: &AnalysisConfig, default_grid: usize) -> Result<Tracked> {
    let (family, polynomial, labels, n): (Arc<dyn Family>, String, LabelRule, usize) = match (src, cfg.parametrization) {
        (Source::Knot(_, _, a), ParamChoice::Auto | ParamChoice::HalfAngle) => (
            Arc::new(CharPoly::from_a_polynomial(a, Path::half_angle())?),
            a.format_with("L", "M"),
            LabelRule::UnitLast,
            A_ENTROPY_GRID,
        ),
        (Source::Knot(_, op, _) | Source::Operator(op), p) => {
            let path = match p {
                ParamChoice::Auto | ParamChoice::Circle => Path::circle(),
                ParamChoice::HalfAngle => Path::half_angle(),
                ParamChoice::Interval { lo, hi } => Path::exp_interval(lo, hi),
            };
            let cp = CharPoly::from_operator(op, path)?;
            let text = operator_polynomial(&cp);
            (Arc::new(cp), text, LabelRule::Magnitude, default_grid)
        }
        (Source::Epsilon(eq), p) => {
            let eq = match p {
                ParamChoice::Auto => eq.clone(),
                ParamChoice::Interval { lo, hi } => eq.clone().with_interval((lo, hi)),
                _ => return Err(Error::Invalid("ε-equations take an interval parametrization".into())),
            };
            (characteristic(&eq), format!("{:?}", eq.source()), LabelRule::Magnitude, default_grid)
        }
        (Source::Involutions, _) => {
            return Err(Error::Invalid(
                "involutions is an index recursion without a characteristic family; use simulate".into(),
            ))
        }
    };
    let opts = TrackOptions { labels, ..TrackOptions::with_n(cfg.grid.unwrap_or(n)) };
    let grid = track_eigenpaths(family, opts)?;
    let partition = partition_arcs(&grid, PartitionOptions::default());
    if partition.arcs.is_empty() {
        return Err(Error::Degenerate("empty arc partition".into()));
    }
    Ok(Tracked { grid, partition, polynomial, labels })
}

/// Write through a temporary file and rename into place.
pub fn write_atomic<F>(path: &FsPath, fill: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut buf = Vec::new();
    fill(&mut buf)?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, &buf)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &FsPath, value: &T) -> Result<()> {
    write_atomic(path, |buf| {
        serde_json::to_writer_pretty(&mut *buf, value).map_err(|e| Error::Io(e.to_string()))?;
        buf.push(b'\n');
        Ok(())
    })
}

#[derive(Serialize)]
struct AnalysisReport<'a> {
    input: &'a str,
    degree: usize,
    characteristic_polynomial: &'a str,
    parametrization: &'a str,
    labels: LabelRule,
    regularity: &'a RegularityReport,
    partition: &'a ArcPartition,
    collisions: &'a [f64],
    warnings: &'a [String],
}

pub fn cmd_analyze(cfg: &AnalysisConfig, out: &mut dyn Write) -> Result<i32> {
    let src = resolve_input(&cfg.input)?;
    let tr = track(&src, cfg, 1024)?;
    let reg = check_regularity(&tr.grid, cfg.tol);
    let report = AnalysisReport {
        input: &cfg.input,
        degree: tr.grid.degree(),
        characteristic_polynomial: &tr.polynomial,
        parametrization: &tr.grid.parametrization,
        labels: tr.labels,
        regularity: &reg,
        partition: &tr.partition,
        collisions: &tr.grid.collisions,
        warnings: &tr.grid.warnings,
    };
    write_json(&cfg.out.join("analysis.json"), &report)?;
    write_atomic(&cfg.out.join("eigenvalues.csv"), |b| spectral_export::write_grid_csv(&tr.grid, b))?;
    writeln!(out, "characteristic polynomial: {}", tr.polynomial)?;
    writeln!(out, "parametrization: {}", tr.grid.parametrization)?;
    writeln!(out, "verdict: {}", if reg.regular { "regular" } else { "irregular" })?;
    for r in &reg.reasons {
        writeln!(out, "  {r}")?;
    }
    writeln!(out, "collisions: {:?}", tr.grid.collisions)?;
    for a in &tr.partition.arcs {
        let res = if a.resonance.is_empty() { String::new() } else { format!(" resonance {:?}", a.resonance) };
        writeln!(out, "arc [{:.9}, {:.9}] sigma {:?}{res}", a.lo, a.hi, a.sigma)?;
    }
    Ok(EXIT_PASS)
}

fn tag(sel: &SubsetSelection) -> String {
    match sel {
        SubsetSelection::Labels(l) => l.iter().map(|j| j.to_string()).collect::<Vec<_>>().join("-"),
        SubsetSelection::Positions(_) => "positions".into(),
    }
}

#[derive(Serialize)]
struct EntropyEntry {
    subset: String,
    sigma: f64,
    error: f64,
    duplicate_of: Option<usize>,
}

#[derive(Serialize)]
struct EntropySummary<'a> {
    input: &'a str,
    parametrization: &'a str,
    normalization: Normalization,
    alpha: f64,
    grid: usize,
    entries: Vec<EntropyEntry>,
}

fn alphas_to(alpha: f64) -> Vec<f64> {
    if alpha == 0.0 {
        vec![0.0]
    } else {
        alpha_grid(21).into_iter().map(|a| a * alpha).collect()
    }
}

pub fn cmd_entropy(cfg: &AnalysisConfig, out: &mut dyn Write) -> Result<i32> {
    let src = resolve_input(&cfg.input)?;
    let tr = track(&src, cfg, 1024)?;
    let e = Entropy::new(&tr.grid, &tr.partition);
    let d = tr.grid.degree();
    let sels = cfg.subsets.as_deref().map(|s| SubsetSelection::parse_list(s, d)).transpose()?;
    let profiles = e.entropy_set(sels.as_deref(), &alphas_to(cfg.alpha), cfg.normalization)?;
    let mut entries = Vec::new();
    for p in &profiles {
        let t = tag(&p.selection);
        write_atomic(&cfg.out.join(format!("sigma_{t}.csv")), |b| write_profile_csv(p, b))?;
        write_atomic(&cfg.out.join(format!("chi_{t}.csv")), |b| write_chi_csv(p, b))?;
        writeln!(out, "sigma_{}({}) = {:.9}  [{}]", p.selection, cfg.alpha, p.last(), p.normalization)?;
        entries.push(EntropyEntry {
            subset: p.selection.to_string(),
            sigma: p.last(),
            error: p.error,
            duplicate_of: p.duplicate_of,
        });
    }
    if cfg.plot_data {
        write_atomic(&cfg.out.join("plot_data.dat"), |b| write_plot_data(&e, b))?;
    }
    let summary = EntropySummary {
        input: &cfg.input,
        parametrization: &tr.grid.parametrization,
        normalization: cfg.normalization,
        alpha: cfg.alpha,
        grid: tr.grid.t.len() - 1,
        entries,
    };
    write_json(&cfg.out.join("summary.json"), &summary)?;
    Ok(EXIT_PASS)
}

fn epsilon_of(src: &Source, cfg: &AnalysisConfig) -> Result<EpsilonEquation> {
    let interval = match cfg.parametrization {
        ParamChoice::Interval { lo, hi } => Some((lo, hi)),
        ParamChoice::Auto => None,
        _ => return Err(Error::Invalid("ε-equations take an interval parametrization".into())),
    };
    let eq = match src {
        Source::Epsilon(eq) => eq.clone(),
        Source::Knot(_, op, _) | Source::Operator(op) => op.to_epsilon_form((0.0, 1.0)),
        Source::Involutions => return Err(Error::Invalid("involutions has no ε-form".into())),
    };
    Ok(match interval {
        Some(i) => eq.with_interval(i),
        None => eq,
    })
}

fn regular_grid(eq: &EpsilonEquation, cfg: &AnalysisConfig) -> Result<EigenGrid> {
    let grid = track_eigenpaths(characteristic(eq), TrackOptions::with_n(cfg.grid.unwrap_or(1024)))?;
    let reg = check_regularity(&grid, cfg.tol);
    if !reg.regular {
        return Err(Error::Irregular(format!("{}; `qwkb analyze` lists the evidence", reg.reasons.join("; "))));
    }
    Ok(grid)
}

fn jet_for(eq: &EpsilonEquation, grid: &EigenGrid, m: usize, order: usize) -> Result<FormalJet> {
    match order {
        0 => phi0(grid, m),
        1 => phi1(eq, grid, m),
        s => phi_higher(eq, grid, m, HierarchyOptions { max_order: s, ..HierarchyOptions::default() }),
    }
}

pub fn cmd_wkb(cfg: &AnalysisConfig, out: &mut dyn Write) -> Result<i32> {
    let src = resolve_input(&cfg.input)?;
    let eq = epsilon_of(&src, cfg)?;
    let grid = regular_grid(&eq, cfg)?;
    let (_, hi) = grid.range();
    for m in 1..=grid.degree() {
        let jet = jet_for(&eq, &grid, m, cfg.order)?;
        write_atomic(&cfg.out.join(format!("jet_{m}.csv")), |b| jet.write_csv(b))?;
        write_json(&cfg.out.join(format!("jet_{m}.json")), &jet)?;
        for s in 0..=jet.order() {
            let v = jet.eval(s, hi);
            writeln!(out, "branch {m} phi_{s}({hi}) = {:.12} {:+.12}i", v.re, v.im)?;
        }
        for w in &jet.warnings {
            writeln!(out, "branch {m}: {w}")?;
        }
    }
    Ok(EXIT_PASS)
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    input: &'a str,
    mode: &'a crate::simulator::Mode,
    growth_rate: f64,
    extrapolated: f64,
    extrapolation_error: f64,
    sigma: Option<f64>,
    verified: Option<bool>,
    singular_events: usize,
    extended_steps: usize,
}

/// `∫ log max_m |λ_m|` over the first α of the family's range, with the given scaling.
fn dominant_sigma(grid: &EigenGrid, partition: &ArcPartition, alpha: f64, norm: Normalization) -> Result<f64> {
    let e = Entropy::new(grid, partition);
    e.sigma(&SubsetSelection::Positions(vec![vec![1]; partition.arcs.len()]), alpha, norm)
}

fn write_sim(cfg: &AnalysisConfig, trace: &RecursionTrace, conv: Option<&Convergence>) -> Result<()> {
    write_atomic(&cfg.out.join("trace.csv"), |b| trace.write_csv(b))?;
    if let Some(c) = conv {
        write_atomic(&cfg.out.join("convergence.csv"), |b| c.write_csv(b))?;
    }
    Ok(())
}

fn simulate_involutions(cfg: &AnalysisConfig, out: &mut dyn Write) -> Result<i32> {
    let n = cfg.n.unwrap_or(10);
    let trace = involutions_trace(n)?;
    write_sim(cfg, &trace, None)?;
    if cfg.exact {
        writeln!(out, "f({n}) = {}", involutions_exact(n)?)?;
    } else {
        writeln!(out, "log f({n}) = {:.12}", trace.at(n as i64).expect("within trace").log_abs())?;
    }
    if cfg.verify {
        let r = involution_ratio(n)?;
        let pass = (r - 1.0).abs() < 0.05;
        writeln!(out, "r(2n)/r(n) = {r:.6}  {}", if pass { "PASS" } else { "FAIL" })?;
        return Ok(if pass { EXIT_PASS } else { EXIT_FAIL });
    }
    Ok(EXIT_PASS)
}

pub fn cmd_simulate(cfg: &AnalysisConfig, out: &mut dyn Write) -> Result<i32> {
    let src = resolve_input(&cfg.input)?;
    let opts = SimOptions { puncture: cfg.puncture, ..SimOptions::default() };
    let (trace, conv, sigma) = match (&src, cfg.eps) {
        (Source::Involutions, _) => return simulate_involutions(cfg, out),
        (Source::Knot(_, op, _) | Source::Operator(op), None) => {
            let n = cfg.n.unwrap_or(1000);
            let init = vec![C64::new(1.0, 0.0); op.degree()];
            let trace = iterate_q(op, n, cfg.alpha, &init, opts)?;
            let conv = if n >= 64 {
                Some(convergence_q(op, cfg.alpha, &[n / 4, n / 2, n], &init, opts)?)
            } else {
                None
            };
            let sigma = if cfg.verify {
                let cp = CharPoly::from_operator(op, Path::circle())?;
                let grid = track_eigenpaths(Arc::new(cp), TrackOptions::with_n(cfg.grid.unwrap_or(1024)))?;
                let part = partition_arcs(&grid, PartitionOptions::default());
                Some(dominant_sigma(&grid, &part, cfg.alpha, Normalization::UnitInterval)?)
            } else {
                None
            };
            (trace, conv, sigma)
        }
        _ => {
            let eq = epsilon_of(&src, cfg)?;
            let eps = cfg.eps.unwrap_or(1e-3);
            let d = eq.degree();
            let need_grid = cfg.wkb_seed || cfg.verify;
            let grid = if need_grid {
                Some(track_eigenpaths(characteristic(&eq), TrackOptions::with_n(cfg.grid.unwrap_or(1024)))?)
            } else {
                None
            };
            let init: Vec<LogScaled> = if cfg.wkb_seed {
                let jet = phi1(&eq, grid.as_ref().unwrap(), 1)?;
                wkb_seed(&jet, eps, (0, d as i64 - 1))?
            } else {
                vec![LogScaled::ONE; d]
            };
            let trace = iterate_eps_scaled(&eq, eps, init.clone(), opts)?;
            let ones = vec![C64::new(1.0, 0.0); d];
            let conv = if cfg.wkb_seed {
                None
            } else {
                Some(convergence_eps(&eq, &[4.0 * eps, 2.0 * eps, eps], &ones, opts)?)
            };
            let sigma = match (&grid, cfg.verify) {
                (Some(g), true) => {
                    let part = partition_arcs(g, PartitionOptions::default());
                    Some(dominant_sigma(g, &part, 1.0, Normalization::Raw)?)
                }
                _ => None,
            };
            (trace, conv, sigma)
        }
    };
    write_sim(cfg, &trace, conv.as_ref())?;
    let rate = growth_rate(&trace)?;
    let (limit, err) = conv.as_ref().map_or((rate, f64::NAN), |c| (c.limit, c.error));
    match &conv {
        Some(_) => writeln!(out, "growth rate {rate:.12}, extrapolated {limit:.12} (±{err:.2e})")?,
        None => writeln!(out, "growth rate {rate:.12}")?,
    }
    for ev in &trace.events {
        writeln!(out, "punctured singular step at k = {}: {}", ev.k, ev.detail)?;
    }
    let verified = sigma.map(|s| (limit - s).abs() <= cfg.verify_tol);
    if let (Some(s), Some(ok)) = (sigma, verified) {
        writeln!(
            out,
            "sigma {s:.12}, |rate - sigma| = {:.3e} (tol {:.1e})  {}",
            (limit - s).abs(),
            cfg.verify_tol,
            if ok { "PASS" } else { "FAIL" }
        )?;
    }
    let summary = SimulationSummary {
        input: &cfg.input,
        mode: &trace.mode,
        growth_rate: rate,
        extrapolated: limit,
        extrapolation_error: err,
        sigma,
        verified,
        singular_events: trace.events.len(),
        extended_steps: trace.extended_steps,
    };
    write_json(&cfg.out.join("simulation.json"), &summary)?;
    Ok(if verified == Some(false) { EXIT_FAIL } else { EXIT_PASS })
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SingularStep { .. } | Error::Aborted { .. } => EXIT_SINGULAR,
        _ => EXIT_INPUT,
    }
}

/// Parse arguments, run, and return the exit code. Errors go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
        }
    };
    let (flags, cmd): (&Flags, fn(&AnalysisConfig, &mut dyn Write) -> Result<i32>) = match &cli.command {
        Command::Analyze(f) => (f, cmd_analyze),
        Command::Entropy(f) => (f, cmd_entropy),
        Command::Wkb(f) => (f, cmd_wkb),
        Command::Simulate(f) => (f, cmd_simulate),
    };
    match AnalysisConfig::from_flags(flags).and_then(|cfg| cmd(&cfg, out)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
