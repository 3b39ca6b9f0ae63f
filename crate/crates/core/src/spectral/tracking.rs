//! Continuation of the eigenvalues along the parameter path.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::family::{golden_min, Exceptional, ExceptionalKind, Family};
use super::roots::{aberth, match_to, max_displacement, min_separation};
use crate::error::{Error, Result};

/// How rows are labeled once the sweep is done.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelRule {
    /// Descending magnitude at the first point where all roots are separated,
    /// ties by ascending argument.
    #[default]
    Magnitude,
    /// As `Magnitude`, but a branch identically equal to 1 is labeled last
    /// (the convention for knot A-polynomials).
    UnitLast,
}

#[derive(Clone, Copy, Debug)]
pub struct TrackOptions {
    /// Number of grid intervals (`n + 1` points).
    pub n: usize,
    /// Maximum number of step halvings.
    pub refine_cap: u32,
    /// Collision when `(separation / scale)² <` this.
    pub collision_tol: f64,
    pub labels: LabelRule,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self { n: 512, refine_cap: 12, collision_tol: 1e-8, labels: LabelRule::Magnitude }
    }
}

impl TrackOptions {
    pub fn with_n(n: usize) -> Self {
        Self { n, ..Self::default() }
    }
}

/// Branch-consistent eigenvalue samples.
#[derive(Clone, Debug, Serialize)]
pub struct EigenGrid {
    pub t: Vec<f64>,
    /// `values[m][i] = λ_m(t_i)`
    pub values: Vec<Vec<C64>>,
    /// Continuous logarithms of `values`.
    pub logs: Vec<Vec<C64>>,
    pub min_separation: f64,
    pub min_magnitude: f64,
    /// Localized collision parameters.
    pub collisions: Vec<f64>,
    pub exceptional: Vec<Exceptional>,
    pub parametrization: String,
    pub warnings: Vec<String>,
    #[serde(skip)]
    family: Option<Arc<dyn Family>>,
}

fn scale_of(r: &[C64]) -> f64 {
    r.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

struct Tracker<'a> {
    family: &'a dyn Family,
    cap: u32,
}

impl Tracker<'_> {
    fn roots(&self, t: f64, seeds: Option<&[C64]>) -> Vec<C64> {
        aberth(&self.family.poly_at(t), seeds)
    }

    /// Real continuation with step halving; `Err(τ)` when the cap is hit at `τ`.
    fn real_step(&self, ta: f64, tb: f64, start: &[C64]) -> std::result::Result<Vec<C64>, f64> {
        let min_step = (tb - ta).abs() / 2f64.powi(self.cap as i32);
        let mut tau = ta;
        let mut cur = start.to_vec();
        let mut step = tb - ta;
        while (tb - tau) * (tb - ta).signum() > 0.0 {
            if (tau + step - tb) * (tb - ta).signum() > 0.0 {
                step = tb - tau;
            }
            let next = match_to(&cur, &self.roots(tau + step, Some(&cur)));
            if max_displacement(&cur, &next) > 0.5 * min_separation(&cur) {
                if step.abs() <= min_step {
                    return Err(tau);
                }
                step *= 0.5;
                continue;
            }
            cur = next;
            tau += step;
            step *= 2.0;
        }
        Ok(cur)
    }

    /// Continuation along the upper half-circle joining `ta` and `tb`.
    fn detour(&self, ta: f64, tb: f64, start: &[C64]) -> Option<Vec<C64>> {
        let c = 0.5 * (ta + tb);
        let r = 0.5 * (tb - ta);
        let at = |s: f64| C64::new(c, 0.0) + r * C64::from_polar(1.0, std::f64::consts::PI * (1.0 - s));
        let mut s = 0.0;
        let mut ds: f64 = 1.0 / 32.0;
        let mut cur = start.to_vec();
        while s < 1.0 {
            ds = ds.min(1.0 - s);
            let p = self.family.poly_at_complex(at(s + ds))?;
            let next = match_to(&cur, &aberth(&p, Some(&cur)));
            if max_displacement(&cur, &next) > 0.5 * min_separation(&cur) {
                if ds < 1e-9 {
                    return None;
                }
                ds *= 0.5;
                continue;
            }
            cur = next;
            s += ds;
            ds = (ds * 1.5).min(1.0 / 16.0);
        }
        Some(match_to(&cur, &self.roots(tb, Some(&cur))))
    }
}

/// Separation minimum near `t0`, localized within `[a, b]`.
fn localize_collision(family: &dyn Family, a: f64, b: f64) -> (f64, f64) {
    let f = |t: f64| {
        let r = aberth(&family.poly_at(t), None);
        min_separation(&r) / scale_of(&r)
    };
    let t = golden_min(f, a, b);
    (t, f(t))
}

/// Track all eigenvalues over the family's path.
pub fn track_eigenpaths(family: Arc<dyn Family>, opts: TrackOptions) -> Result<EigenGrid> {
    if opts.n < 16 {
        return Err(Error::Invalid(format!("grid size {} < 16", opts.n)));
    }
    let fam: &dyn Family = family.as_ref();
    let d = fam.degree();
    let path = fam.path();
    let (lo, hi) = path.range;
    let n = opts.n;
    let h = (hi - lo) / n as f64;
    let mut warnings = Vec::new();
    let exceptional = fam.exceptional();
    let analytic = fam.poly_at_complex(C64::new(lo, 0.0)).is_some();

    let mut t: Vec<f64> = (0..=n).map(|i| lo + i as f64 * h).collect();
    t[n] = hi;
    // keep nodes off points where the leading coefficient vanishes
    if let Some(ex) = &exceptional {
        for e in ex.iter().filter(|e| e.kind == ExceptionalKind::DegreeDrop) {
            for ti in t.iter_mut() {
                if (*ti - e.t).abs() < 1e-6 * h.abs() {
                    let nudge = if *ti == hi { -1e-6 * h } else { 1e-6 * h };
                    *ti += nudge;
                    warnings.push(format!("grid node moved off degree drop at t = {}", e.t));
                }
            }
        }
    }

    let tracker = Tracker { family: fam, cap: opts.refine_cap };
    let mut fresh: Vec<Vec<C64>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let seeds = fresh.last().cloned();
        let p = fam.poly_at(t[i]);
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::Singular { at: format!("t = {}", t[i]) });
        }
        if p[d].norm() <= 1e-14 * p.iter().map(|c| c.norm()).fold(0.0, f64::max) {
            return Err(Error::DegreeDrop { t: t[i] });
        }
        fresh.push(aberth(&p, seeds.as_deref()));
    }
    let sep: Vec<f64> = fresh.iter().map(|r| min_separation(r) / scale_of(r)).collect();

    // collision points: exact candidates, verified; otherwise scan the grid
    let mut collisions: Vec<f64> = Vec::new();
    match &exceptional {
        Some(ex) => {
            for e in ex.iter().filter(|e| e.kind == ExceptionalKind::Collision) {
                let r = aberth(&fam.poly_at(e.t), None);
                let s = min_separation(&r) / scale_of(&r);
                if s * s < opts.collision_tol {
                    collisions.push(e.t);
                }
            }
        }
        None => {
            for i in 0..=n {
                let left = if i > 0 { sep[i - 1] } else { f64::INFINITY };
                let right = if i < n { sep[i + 1] } else { f64::INFINITY };
                if sep[i] <= left && sep[i] <= right && sep[i] < 1e-2 {
                    let a = t[i.saturating_sub(1)];
                    let b = t[(i + 1).min(n)];
                    let (tc, s) = localize_collision(fam, a, b);
                    if s * s < opts.collision_tol && !collisions.iter().any(|c| (c - tc).abs() < 1e-9) {
                        collisions.push(tc);
                    }
                }
            }
        }
    }
    collisions.sort_by(f64::total_cmp);

    let near_node = |i: usize| collisions.iter().any(|&c| (c - t[i]).abs() <= 1e-3 * h.abs());
    let inside = |i: usize| collisions.iter().any(|&c| c > t[i] && c < t[i + 1]);
    // Continuation is not carried through a pole of the coefficients or a
    // collision of three or more roots, where detours around the point give
    // different permutations: there rows are re-matched by minimal
    // displacement across the point.
    let mut rematch: Vec<f64> = exceptional
        .iter()
        .flatten()
        .filter(|e| e.kind == ExceptionalKind::Pole)
        .map(|e| e.t)
        .collect();
    for &c in &collisions {
        let r = aberth(&fam.poly_at(c), None);
        let tol = 1e-3 * scale_of(&r);
        let cluster = r.iter().map(|a| r.iter().filter(|b| (*a - **b).norm() < tol).count()).max().unwrap_or(0);
        if cluster >= 3 {
            rematch.push(c);
        }
    }
    let rematch_between =
        |a: f64, b: f64| rematch.iter().any(|&p| p >= a.min(b) - 1e-3 * h.abs() && p <= a.max(b) + 1e-3 * h.abs());

    let mut ordered: Vec<Vec<C64>> = vec![Vec::new(); n + 1];
    ordered[0] = fresh[0].clone();
    let mut i = 0;
    while i < n {
        if near_node(i) {
            ordered[i + 1] = match_to(&ordered[i], &fresh[i + 1]);
            i += 1;
            continue;
        }
        if near_node(i + 1) {
            if i + 2 <= n && !near_node(i + 2) && rematch_between(t[i], t[i + 2]) {
                ordered[i + 2] = match_to(&ordered[i], &fresh[i + 2]);
                let mid: Vec<C64> = ordered[i].iter().zip(&ordered[i + 2]).map(|(a, b)| 0.5 * (a + b)).collect();
                ordered[i + 1] = match_to(&mid, &fresh[i + 1]);
                i += 2;
                continue;
            }
            if analytic && i + 2 <= n && !near_node(i + 2) {
                if let Some(r) = tracker.detour(t[i], t[i + 2], &ordered[i]) {
                    let mid: Vec<C64> = ordered[i].iter().zip(&r).map(|(a, b)| 0.5 * (a + b)).collect();
                    ordered[i + 1] = match_to(&mid, &fresh[i + 1]);
                    ordered[i + 2] = r;
                    i += 2;
                    continue;
                }
            }
            ordered[i + 1] = match_to(&ordered[i], &fresh[i + 1]);
            i += 1;
            continue;
        }
        if inside(i) && rematch_between(t[i], t[i + 1]) {
            ordered[i + 1] = match_to(&ordered[i], &fresh[i + 1]);
            i += 1;
            continue;
        }
        if analytic && inside(i) {
            if let Some(r) = tracker.detour(t[i], t[i + 1], &ordered[i]) {
                ordered[i + 1] = r;
                i += 1;
                continue;
            }
            warnings.push(format!("complex continuation failed on [{}, {}]", t[i], t[i + 1]));
        }
        ordered[i + 1] = match tracker.real_step(t[i], t[i + 1], &ordered[i]) {
            Ok(r) => r,
            Err(tau) => {
                let via = if analytic { tracker.detour(t[i], t[i + 1], &ordered[i]) } else { None };
                match via {
                    Some(r) => r,
                    None => {
                        warnings.push(format!("refinement cap reached near t = {tau}; matched by displacement"));
                        match_to(&ordered[i], &fresh[i + 1])
                    }
                }
            }
        };
        i += 1;
    }

    // labels
    let pivot = (0..=n).find(|&i| !near_node(i) && sep[i] > 1e-3).unwrap_or(0);
    let mut order: Vec<usize> = (0..d).collect();
    let key = |m: usize| ordered[pivot][m];
    order.sort_by(|&a, &b| {
        let (za, zb) = (key(a), key(b));
        let tie = (za.norm() - zb.norm()).abs() <= 1e-9 * za.norm().max(zb.norm()).max(1.0);
        if tie {
            za.arg().total_cmp(&zb.arg())
        } else {
            zb.norm().total_cmp(&za.norm())
        }
    });
    if opts.labels == LabelRule::UnitLast {
        let is_unit = |m: usize| (0..=n).all(|i| near_node(i) || (ordered[i][m] - 1.0).norm() < 1e-7);
        order.sort_by_key(|&m| is_unit(m));
    }
    let values: Vec<Vec<C64>> = order.iter().map(|&m| ordered.iter().map(|col| col[m]).collect()).collect();
    let logs = values.iter().map(|row| continuous_log(row)).collect();
    let min_separation = fresh.iter().map(|r| min_separation(r)).fold(f64::INFINITY, f64::min);
    let min_magnitude = values.iter().flatten().map(|z| z.norm()).fold(f64::INFINITY, f64::min);

    Ok(EigenGrid {
        t,
        values,
        logs,
        min_separation,
        min_magnitude,
        collisions,
        exceptional: exceptional.unwrap_or_default(),
        parametrization: fam.describe(),
        warnings,
        family: Some(family),
    })
}

/// `log` continued along a sequence from the principal branch at its start.
pub fn continuous_log(row: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(row.len());
    let mut arg = row.first().map_or(0.0, |z| z.arg());
    for (i, z) in row.iter().enumerate() {
        if i > 0 && row[i - 1].norm() > 0.0 && z.norm() > 0.0 {
            arg += (z / row[i - 1]).arg();
        }
        out.push(C64::new(z.norm().ln(), arg));
    }
    out
}

impl EigenGrid {
    pub fn degree(&self) -> usize {
        self.values.len()
    }

    pub fn family(&self) -> &Arc<dyn Family> {
        self.family.as_ref().expect("grid carries its family")
    }

    pub fn range(&self) -> (f64, f64) {
        (self.t[0], *self.t.last().unwrap())
    }

    pub fn column(&self, i: usize) -> Vec<C64> {
        self.values.iter().map(|r| r[i]).collect()
    }

    /// Index `i` with `t_i ≤ t ≤ t_{i+1}`.
    pub fn segment(&self, t: f64) -> usize {
        let n = self.t.len() - 1;
        match self.t.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        }
    }

    fn blocked(&self, a: f64, b: f64) -> bool {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.collisions.iter().any(|&c| c > a - 1e-12 && c < b + 1e-12)
    }

    /// Branch values at an arbitrary `t`, continued from the nearest grid node
    /// that is not separated from `t` by a collision.
    pub fn values_at(&self, t: f64) -> Vec<C64> {
        let fam = self.family().as_ref();
        let i = self.segment(t);
        let tracker = Tracker { family: fam, cap: 20 };
        let mut cands = [i, i + 1];
        if (t - self.t[i]).abs() > (self.t[i + 1] - t).abs() {
            cands.swap(0, 1);
        }
        for &k in &cands {
            if self.t[k] == t {
                return self.column(k);
            }
            if self.blocked(self.t[k], t) {
                continue;
            }
            if let Ok(r) = tracker.real_step(self.t[k], t, &self.column(k)) {
                return r;
            }
        }
        // fall back on matching against linear interpolation
        let w = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
        let guess: Vec<C64> = self
            .values
            .iter()
            .map(|r| r[i] * (1.0 - w) + r[i + 1] * w)
            .collect();
        match_to(&guess, &aberth(&fam.poly_at(t), Some(&guess)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::parse_operator;
    use crate::spectral::family::{CharPoly, Path};

    fn grid(text: &str, path: Path, n: usize) -> EigenGrid {
        let op = parse_operator(text).unwrap();
        let p = CharPoly::from_operator(&op, path).unwrap();
        track_eigenpaths(Arc::new(p), TrackOptions::with_n(n)).unwrap()
    }

    #[test]
    fn unit_and_rotating_branch() {
        let g = grid("E^2 - (Q+1)*E + Q", Path::circle(), 64);
        for (i, &t) in g.t.iter().enumerate() {
            // the double root at v = 1 is only resolved to ~sqrt(machine epsilon)
            let tol = if i == 0 || i == 64 { 1e-7 } else { 1e-12 };
            assert!((g.values[0][i] - 1.0).norm() < tol, "{i} {}", g.values[0][i]);
            assert!((g.values[1][i] - C64::from_polar(1.0, 2.0 * std::f64::consts::PI * t)).norm() < tol);
        }
        let end = g.logs[1].last().unwrap();
        assert!((end.im - 2.0 * std::f64::consts::PI).abs() < 1e-9, "{end}");
        assert!(g.collisions.iter().any(|c| c.abs() < 1e-9), "{:?} {:?}", g.collisions, g.exceptional);
    }

    #[test]
    fn separated_branches() {
        let g = grid("E^2 - (2 + Q/2)*E + 1 + Q/2", Path::circle(), 64);
        assert!(g.min_separation > 0.4);
        assert!(g.collisions.is_empty());
    }

    #[test]
    fn values_between_nodes() {
        let g = grid("E^2 - (Q+1)*E + Q", Path::circle(), 32);
        let v = g.values_at(0.3141);
        assert!((v[1] - C64::from_polar(1.0, 2.0 * std::f64::consts::PI * 0.3141)).norm() < 1e-12);
    }
}
