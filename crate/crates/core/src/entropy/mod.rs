//! S-entropy of a tracked eigenvalue family, A-entropy of knots and the
//! Mahler measure.

mod export;
mod mahler;

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

pub use export::{write_chi_csv, write_plot_data, write_profile_csv};
pub use mahler::{mahler_measure, MahlerMeasure};

use crate::error::{Error, Result};
use crate::operator::BivariatePolynomial;
use crate::quad::{integrate_with, QuadOptions};
use crate::spectral::{
    partition_arcs, track_eigenpaths, ArcPartition, CharPoly, EigenGrid, ExceptionalKind, LabelRule, PartitionOptions,
    Path, TrackOptions,
};

/// Largest degree for which all `2^d − 1` subsets are enumerated.
pub const MAX_ENUMERATED_DEGREE: usize = 12;

/// Target for the summed quadrature error estimate of one σ value.
pub const SIGMA_TOL: f64 = 1e-7;

/// Which eigenvalues enter `χ_S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetSelection {
    /// The same branch labels on every arc.
    Labels(Vec<usize>),
    /// For each arc `p`, positions in the arc's magnitude order `σ_p`.
    Positions(Vec<Vec<usize>>),
}

impl SubsetSelection {
    pub fn labels(l: &[usize]) -> Self {
        let mut v = l.to_vec();
        v.sort_unstable();
        v.dedup();
        Self::Labels(v)
    }

    pub fn all(d: usize) -> Self {
        Self::Labels((1..=d).collect())
    }

    pub fn validate(&self, d: usize, arcs: usize) -> Result<()> {
        let check = |s: &[usize]| -> Result<()> {
            if s.is_empty() {
                return Err(Error::Invalid("empty subset".into()));
            }
            if let Some(&bad) = s.iter().find(|&&j| j == 0 || j > d) {
                return Err(Error::Invalid(format!("index {bad} outside 1..={d}")));
            }
            Ok(())
        };
        match self {
            Self::Labels(s) => check(s),
            Self::Positions(per) => {
                if per.len() != arcs {
                    return Err(Error::Invalid(format!("{} per-arc subsets for {arcs} arcs", per.len())));
                }
                per.iter().try_for_each(|s| check(s))
            }
        }
    }

    /// Parse groups such as `1,3;all`.
    pub fn parse_list(text: &str, d: usize) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for group in text.trim().split(';') {
            if group.trim().eq_ignore_ascii_case("all") {
                out.push(Self::all(d));
                continue;
            }
            let labels = group
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Invalid(format!("bad subset entry '{s}'"))))
                .collect::<Result<Vec<_>>>()?;
            let sel = Self::labels(&labels);
            sel.validate(d, 0)?;
            out.push(sel);
        }
        Ok(out)
    }
}

impl fmt::Display for SubsetSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |s: &[usize]| s.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Self::Labels(s) => write!(f, "{{{}}}", join(s)),
            Self::Positions(per) => {
                let parts: Vec<String> = per.iter().map(|s| format!("{{{}}}", join(s))).collect();
                write!(f, "pos[{}]", parts.join(" "))
            }
        }
    }
}

/// How the raw integral `∫ log χ_S dt` over the traversed range is scaled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `∫₀¹ log χ_S(lo + α t (hi − lo)) dt`, the mean over the traversed range.
    UnitInterval,
    /// Raw integral divided by 2π.
    Per2Pi,
    /// `∫_lo^{lo + α(hi − lo)} log χ_S dt`.
    #[default]
    Raw,
}

impl Normalization {
    pub fn name(self) -> &'static str {
        match self {
            Self::UnitInterval => "unit-interval",
            Self::Per2Pi => "per-2pi",
            Self::Raw => "raw",
        }
    }

    /// Scale a cumulative raw integral. `at_start` is `log χ_S(lo)`, the
    /// `α → 0` limit of the unit-interval mean.
    pub fn apply(self, raw: f64, alpha: f64, width: f64, at_start: f64) -> f64 {
        match self {
            Self::Raw => raw,
            Self::Per2Pi => raw / (2.0 * PI),
            Self::UnitInterval if alpha == 0.0 => at_start,
            Self::UnitInterval => raw / (alpha * width),
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unit-interval" | "unit" => Ok(Self::UnitInterval),
            "per-2pi" | "per2pi" => Ok(Self::Per2Pi),
            "raw" => Ok(Self::Raw),
            other => Err(Error::Invalid(format!("unknown normalization '{other}' (unit-interval, per-2pi, raw)"))),
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyProfile {
    pub selection: SubsetSelection,
    pub alpha: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Summed quadrature error estimate at the last α.
    pub error: f64,
    /// `(t, log χ_S(t))` at the grid nodes.
    pub samples: Vec<(f64, f64)>,
    pub normalization: Normalization,
    pub parametrization: String,
    /// Index of an earlier profile with the same `χ_S`.
    pub duplicate_of: Option<usize>,
}

impl EntropyProfile {
    pub fn at(&self, alpha: f64) -> Option<f64> {
        self.alpha.iter().position(|&a| a == alpha).map(|i| self.sigma[i])
    }

    pub fn last(&self) -> f64 {
        *self.sigma.last().expect("nonempty α-grid")
    }
}

/// `n` uniform points on `[0, 1]`.
pub fn alpha_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// `χ_S` on a tracked grid and its partition. Branch magnitudes off the grid
/// are obtained by continuing the tracked roots, and memoized.
pub struct Entropy<'a> {
    grid: &'a EigenGrid,
    partition: &'a ArcPartition,
    cache: RefCell<HashMap<u64, Vec<f64>>>,
    singular: Vec<f64>,
    breaks: Vec<f64>,
}

impl<'a> Entropy<'a> {
    pub fn new(grid: &'a EigenGrid, partition: &'a ArcPartition) -> Self {
        let singular: Vec<f64> = grid
            .exceptional
            .iter()
            .filter(|e| e.kind != ExceptionalKind::Collision)
            .map(|e| e.t)
            .collect();
        let mut breaks: Vec<f64> = partition.breakpoints.clone();
        breaks.extend(&grid.collisions);
        breaks.extend(grid.exceptional.iter().map(|e| e.t));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        Self { grid, partition, cache: RefCell::new(HashMap::new()), singular, breaks }
    }

    pub fn grid(&self) -> &EigenGrid {
        self.grid
    }

    pub fn partition(&self) -> &ArcPartition {
        self.partition
    }

    /// Points where panels are split.
    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    fn magnitudes(&self, t: f64) -> Vec<f64> {
        if let Some(m) = self.cache.borrow().get(&t.to_bits()) {
            return m.clone();
        }
        let m: Vec<f64> = match self.grid.t.iter().position(|&x| x == t) {
            Some(i) => self.grid.column(i).iter().map(|z| z.norm()).collect(),
            None => self.grid.values_at(t).iter().map(|z| z.norm()).collect(),
        };
        self.cache.borrow_mut().insert(t.to_bits(), m.clone());
        m
    }

    fn rows(&self, sel: &SubsetSelection, t: f64) -> Vec<usize> {
        match sel {
            SubsetSelection::Labels(s) => s.iter().map(|j| j - 1).collect(),
            SubsetSelection::Positions(per) => {
                let p = self.partition.arc_of(t);
                per[p].iter().map(|&pos| self.partition.arcs[p].sigma[pos - 1] - 1).collect()
            }
        }
    }

    /// `max_{j ∈ S} |λ_j(t)|`.
    pub fn chi(&self, sel: &SubsetSelection, t: f64) -> Result<f64> {
        let (lo, hi) = self.grid.range();
        if t < lo.min(hi) || t > lo.max(hi) {
            return Err(Error::Invalid(format!("t = {t} outside [{lo}, {hi}]")));
        }
        let width = (hi - lo).abs().max(1.0);
        if let Some(&s) = self.singular.iter().find(|&&s| (s - t).abs() <= 1e-12 * width) {
            return Err(Error::Singular { at: format!("t = {s}") });
        }
        let m = self.magnitudes(t);
        Ok(self.rows(sel, t).into_iter().map(|r| m[r]).fold(0.0, f64::max))
    }

    fn log_chi(&self, sel: &SubsetSelection, t: f64) -> Result<f64> {
        let c = self.chi(sel, t)?;
        if c > 0.0 && c.is_finite() {
            Ok(c.ln())
        } else {
            Err(Error::Singular { at: format!("χ_S = {c} at t = {t}") })
        }
    }

    fn raw_integral(&self, sel: &SubsetSelection, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
        if a == b {
            return Ok((0.0, 0.0));
        }
        // a subset with χ ≡ 0 on the panel is not integrable
        let probes = (1..8).map(|k| a + (b - a) * k as f64 / 8.0);
        let zeros = probes.filter(|&t| matches!(self.chi(sel, t), Ok(c) if c == 0.0)).count();
        if zeros == 7 {
            return Err(Error::NonIsolatedSingularity { lo: a.min(b), hi: a.max(b) });
        }
        let opts = QuadOptions { abs_tol: tol, rel_tol: 0.0, max_panels: 20_000 };
        let r = integrate_with(|t| self.log_chi(sel, t), a, b, &self.breaks, opts)?;
        Ok((r.value, r.error))
    }

    /// `σ_S(α)` for a single α.
    pub fn sigma(&self, sel: &SubsetSelection, alpha: f64, norm: Normalization) -> Result<f64> {
        let p = self.profile(sel, &[alpha], norm)?;
        Ok(p.last())
    }

    /// `σ_S` on an increasing α-grid; the raw integral is accumulated panel
    /// by panel so each piece of the range is integrated once.
    pub fn profile(&self, sel: &SubsetSelection, alphas: &[f64], norm: Normalization) -> Result<EntropyProfile> {
        sel.validate(self.grid.degree(), self.partition.arcs.len())?;
        if alphas.iter().any(|a| !(0.0..=1.0).contains(a)) || alphas.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Invalid("α-grid must be increasing within [0, 1]".into()));
        }
        let (lo, hi) = self.grid.range();
        let width = hi - lo;
        let panel_tol = 0.1 * SIGMA_TOL / alphas.len().max(1) as f64;
        let at_start = self.log_chi(sel, lo).unwrap_or(f64::NAN);
        let mut raw = 0.0;
        let mut err = 0.0;
        let mut prev = lo;
        let mut sigma = Vec::with_capacity(alphas.len());
        for &alpha in alphas {
            let t = lo + alpha * width;
            let (v, e) = self.raw_integral(sel, prev, t, panel_tol)?;
            raw += v;
            err += e;
            prev = t;
            sigma.push(norm.apply(raw, alpha, width, at_start));
        }
        if err > SIGMA_TOL {
            return Err(Error::Residual { residual: err, tol: SIGMA_TOL, context: format!("σ_{sel} quadrature") });
        }
        Ok(EntropyProfile {
            selection: sel.clone(),
            alpha: alphas.to_vec(),
            sigma,
            error: err,
            samples: self.samples(sel),
            normalization: norm,
            parametrization: self.grid.parametrization.clone(),
            duplicate_of: None,
        })
    }

    fn samples(&self, sel: &SubsetSelection) -> Vec<(f64, f64)> {
        self.grid
            .t
            .iter()
            .map(|&t| (t, self.log_chi(sel, t).unwrap_or(f64::NAN)))
            .collect()
    }

    fn same_chi(&self, a: &SubsetSelection, b: &SubsetSelection) -> bool {
        self.grid.t.iter().all(|&t| match (self.chi(a, t), self.chi(b, t)) {
            (Ok(x), Ok(y)) => (x - y).abs() <= 1e-12 * (1.0 + x.abs()),
            (Err(_), Err(_)) => true,
            _ => false,
        })
    }

    /// Profiles for the given selections, or for every nonempty label subset
    /// when `subsets` is `None`. Selections with the same `χ_S` share values
    /// and point at the first one.
    pub fn entropy_set(
        &self,
        subsets: Option<&[SubsetSelection]>,
        alphas: &[f64],
        norm: Normalization,
    ) -> Result<Vec<EntropyProfile>> {
        let d = self.grid.degree();
        let sels: Vec<SubsetSelection> = match subsets {
            Some(s) => s.to_vec(),
            None => {
                if d > MAX_ENUMERATED_DEGREE {
                    return Err(Error::TooManySubsets { degree: d, count: (1usize << d.min(63)) - 1 });
                }
                all_label_subsets(d)
            }
        };
        let mut out: Vec<EntropyProfile> = Vec::with_capacity(sels.len());
        for sel in sels {
            if let Some(k) = out.iter().position(|p| p.duplicate_of.is_none() && self.same_chi(&p.selection, &sel)) {
                let mut p = out[k].clone();
                p.selection = sel;
                p.duplicate_of = Some(k);
                out.push(p);
                continue;
            }
            out.push(self.profile(&sel, alphas, norm)?);
        }
        Ok(out)
    }
}

/// Nonempty subsets of `1..=d`, by size then lexicographically.
pub fn all_label_subsets(d: usize) -> Vec<SubsetSelection> {
    let mut subs: Vec<Vec<usize>> = (1u64..(1u64 << d))
        .map(|mask| (0..d).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect())
        .collect();
    subs.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    subs.into_iter().map(SubsetSelection::Labels).collect()
}

/// Track, partition and integrate in one go.
pub struct Analysis {
    pub grid: EigenGrid,
    pub partition: ArcPartition,
}

impl Analysis {
    pub fn new(family: Arc<CharPoly>, opts: TrackOptions) -> Result<Self> {
        let grid = track_eigenpaths(family, opts)?;
        let partition = partition_arcs(&grid, PartitionOptions::default());
        Ok(Self { grid, partition })
    }

    pub fn entropy(&self) -> Entropy<'_> {
        Entropy::new(&self.grid, &self.partition)
    }
}

/// Default grid for A-entropy integrals.
pub const A_ENTROPY_GRID: usize = 2048;

/// Tracked and partitioned branches `L_j(t)` of `A(L, e^{it/2}) = 0`,
/// `t ∈ [0, 2π]`, labeled with the unit branch last.
pub fn a_polynomial_analysis(a: &BivariatePolynomial, n: usize) -> Result<Analysis> {
    let family = CharPoly::from_a_polynomial(a, Path::half_angle())?;
    Analysis::new(Arc::new(family), TrackOptions { labels: LabelRule::UnitLast, ..TrackOptions::with_n(n) })
}

/// A-entropy `σ^A_S(α)` of a knot's A-polynomial.
pub fn a_entropy(a: &BivariatePolynomial, sel: &SubsetSelection, alpha: f64, norm: Normalization) -> Result<f64> {
    let an = a_polynomial_analysis(a, A_ENTROPY_GRID)?;
    an.entropy().sigma(sel, alpha, norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{parse_operator, parse_polynomial, Symbols};

    fn analysis(op: &str, path: Path, n: usize) -> Analysis {
        let op = parse_operator(op).unwrap();
        Analysis::new(Arc::new(CharPoly::from_operator(&op, path).unwrap()), TrackOptions::with_n(n)).unwrap()
    }

    #[test]
    fn constant_roots() {
        let an = analysis("E^2 - 3*E + 2", Path::circle(), 64);
        let e = an.entropy();
        assert!((e.chi(&SubsetSelection::labels(&[1]), 0.3).unwrap() - 2.0).abs() < 1e-12);
        assert!((e.chi(&SubsetSelection::labels(&[2]), 0.3).unwrap() - 1.0).abs() < 1e-12);
        let s = e.sigma(&SubsetSelection::labels(&[1]), 0.5, Normalization::Raw).unwrap();
        assert!((s - 0.5 * 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn interval_parametrization() {
        // eigenvalues 2 and 1/2 over x ∈ [0, 1]
        let op = parse_operator("2*E^2 - 5*E + 2").unwrap();
        let cp = CharPoly::from_operator(&op, Path::interval(0.0, 1.0)).unwrap();
        let an = Analysis::new(Arc::new(cp), TrackOptions::with_n(32)).unwrap();
        let p = an.entropy().profile(&SubsetSelection::labels(&[1]), &alpha_grid(11), Normalization::Raw).unwrap();
        for (a, s) in p.alpha.iter().zip(&p.sigma) {
            assert!((s - a * 2f64.ln()).abs() < 1e-10);
        }
        assert_eq!(p.sigma[0], 0.0);
    }

    #[test]
    fn set_deduplicates_dominated_indices() {
        let an = analysis("E^2 - 3*E + 2", Path::circle(), 64);
        let set = an.entropy().entropy_set(None, &alpha_grid(5), Normalization::Raw).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set[2].selection, SubsetSelection::Labels(vec![1, 2]));
        assert_eq!(set[2].duplicate_of, Some(0));
        assert!(set[1].last().abs() < 1e-12);
    }

    #[test]
    fn degree_one_has_one_profile() {
        let an = analysis("E - 3", Path::circle(), 16);
        let set = an.entropy().entropy_set(None, &alpha_grid(3), Normalization::Raw).unwrap();
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn guard_on_subset_count() {
        let op = (0..=13).map(|j| format!("E^{j}")).collect::<Vec<_>>().join(" + ");
        let an = analysis(&op, Path::circle(), 16);
        let err = an.entropy().entropy_set(None, &[1.0], Normalization::Raw).unwrap_err();
        assert!(matches!(err, Error::TooManySubsets { degree: 13, .. }));
    }

    #[test]
    fn normalizations_of_constant_root() {
        let a = parse_polynomial("L - 2", &Symbols::a_polynomial()).unwrap();
        let sel = SubsetSelection::labels(&[1]);
        let raw = a_entropy(&a, &sel, 1.0, Normalization::Raw).unwrap();
        let per = a_entropy(&a, &sel, 1.0, Normalization::Per2Pi).unwrap();
        let unit = a_entropy(&a, &sel, 1.0, Normalization::UnitInterval).unwrap();
        let l2 = 2f64.ln();
        assert!((raw - 2.0 * PI * l2).abs() < 1e-9);
        assert!((per - l2).abs() < 1e-10);
        assert!((unit - per).abs() < 1e-10);
    }

    #[test]
    fn parse_subset_lists() {
        assert_eq!(SubsetSelection::parse_list("3,1", 3).unwrap(), vec![SubsetSelection::Labels(vec![1, 3])]);
        assert_eq!(SubsetSelection::parse_list("all", 2).unwrap(), vec![SubsetSelection::Labels(vec![1, 2])]);
        assert_eq!(SubsetSelection::parse_list("2; all", 2).unwrap().len(), 2);
        assert!(SubsetSelection::parse_list("0", 2).is_err());
        assert!(SubsetSelection::parse_list("1,x", 2).is_err());
        assert_eq!(SubsetSelection::parse_list("1;2", 2).unwrap().len(), 2);
    }
}
