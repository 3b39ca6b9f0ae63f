//! Division of the path into arcs of constant eigenvalue magnitude order.

use serde::Serialize;

use super::family::{Exceptional, ExceptionalKind};
use super::tracking::EigenGrid;

#[derive(Clone, Copy, Debug)]
pub struct PartitionOptions {
    /// Relative tolerance for equal magnitudes.
    pub tie_tol: f64,
    /// Bisection tolerance for breakpoints.
    pub bisect_tol: f64,
    /// Consecutive tied nodes needed to call a tie a resonance.
    pub min_run: usize,
}

impl Default for PartitionOptions {
    fn default() -> Self {
        Self { tie_tol: 1e-9, bisect_tol: 1e-10, min_run: 3 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Resonance {
    pub lo: f64,
    pub hi: f64,
    /// 1-based branch labels with equal magnitude on `[lo, hi]`.
    pub branches: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionArc {
    pub lo: f64,
    pub hi: f64,
    /// 1-based branch labels by descending magnitude (ties by label).
    pub sigma: Vec<usize>,
    /// Tied label sets holding throughout the arc.
    pub resonance: Vec<Vec<usize>>,
    pub collisions: Vec<f64>,
    pub singular: Vec<Exceptional>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcPartition {
    pub breakpoints: Vec<f64>,
    pub arcs: Vec<PartitionArc>,
    pub resonances: Vec<Resonance>,
    pub parametrization: String,
}

impl ArcPartition {
    /// Arc containing `t`; breakpoints belong to the arc on their left.
    pub fn arc_of(&self, t: f64) -> usize {
        self.arcs.iter().position(|a| t <= a.hi).unwrap_or(self.arcs.len() - 1)
    }
}

fn tied(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.max(b).max(1.0)
}

fn bisect<F: Fn(f64) -> bool>(pred: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    // pred(a) != pred(b)
    let pa = pred(a);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if pred(m) == pa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

pub fn partition_arcs(grid: &EigenGrid, opts: PartitionOptions) -> ArcPartition {
    let d = grid.degree();
    let n = grid.t.len() - 1;
    let (lo, hi) = grid.range();
    let mags: Vec<Vec<f64>> = grid.values.iter().map(|r| r.iter().map(|z| z.norm()).collect()).collect();
    let mag_at = |t: f64| -> Vec<f64> { grid.values_at(t).iter().map(|z| z.norm()).collect() };

    // Nodes sitting on a collision resolve magnitudes only to about
    // eps^(1/multiplicity); they neither break nor start a tie run.
    let h = (hi - lo) / n as f64;
    let excluded: Vec<bool> = (0..=n)
        .map(|i| {
            let col = grid.column(i);
            let scale = col.iter().map(|z| z.norm()).fold(1.0, f64::max);
            grid.collisions.iter().any(|&c| (c - grid.t[i]).abs() <= 2.0 * h.abs())
                && super::roots::min_separation(&col) / scale < 1e-3
        })
        .collect();
    let mut pair_res: Vec<(usize, usize, f64, f64)> = Vec::new();
    let mut cuts: Vec<f64> = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            let mut tie: Vec<bool> = (0..=n).map(|i| tied(mags[a][i], mags[b][i], opts.tie_tol)).collect();
            for i in 0..=n {
                if excluded[i] {
                    let left = (0..i).rev().find(|&k| !excluded[k]).is_none_or(|k| tie[k]);
                    let right = (i + 1..=n).find(|&k| !excluded[k]).is_none_or(|k| tie[k]);
                    tie[i] = left && right;
                }
            }
            let pred = |t: f64| {
                let m = mag_at(t);
                tied(m[a], m[b], opts.tie_tol)
            };
            // resonance runs
            let mut i = 0;
            while i <= n {
                if !tie[i] {
                    i += 1;
                    continue;
                }
                let s = i;
                while i <= n && tie[i] {
                    i += 1;
                }
                let e = i - 1;
                if e - s + 1 >= opts.min_run {
                    let l = if s == 0 {
                        lo
                    } else if excluded[s - 1] || excluded[s] {
                        grid.t[s - 1]
                    } else {
                        bisect(pred, grid.t[s - 1], grid.t[s], opts.bisect_tol)
                    };
                    let r = if e == n {
                        hi
                    } else if excluded[e] || excluded[e + 1] {
                        grid.t[e + 1]
                    } else {
                        bisect(pred, grid.t[e], grid.t[e + 1], opts.bisect_tol)
                    };
                    pair_res.push((a, b, l, r));
                    cuts.push(l);
                    cuts.push(r);
                }
            }
            // strict sign changes
            for i in 0..n {
                if tie[i] || tie[i + 1] || excluded[i] || excluded[i + 1] {
                    continue;
                }
                let s0 = mags[a][i] > mags[b][i];
                let s1 = mags[a][i + 1] > mags[b][i + 1];
                if s0 != s1 {
                    let p = |t: f64| {
                        let m = mag_at(t);
                        m[a] > m[b]
                    };
                    cuts.push(bisect(p, grid.t[i], grid.t[i + 1], opts.bisect_tol));
                }
            }
        }
    }

    // resonance groups: pairs sharing an interval
    let close = |x: f64, y: f64| (x - y).abs() <= 1e3 * opts.bisect_tol.max(1e-12 * (hi - lo).abs());
    let mut resonances: Vec<Resonance> = Vec::new();
    for &(a, b, l, r) in &pair_res {
        match resonances.iter_mut().find(|g| close(g.lo, l) && close(g.hi, r)) {
            Some(g) => {
                for m in [a + 1, b + 1] {
                    if !g.branches.contains(&m) {
                        g.branches.push(m);
                    }
                }
                g.branches.sort();
            }
            None => resonances.push(Resonance { lo: l, hi: r, branches: vec![a + 1, b + 1] }),
        }
    }
    resonances.sort_by(|x, y| x.lo.total_cmp(&y.lo));

    cuts.push(lo);
    cuts.push(hi);
    cuts.retain(|&c| c >= lo && c <= hi);
    cuts.sort_by(f64::total_cmp);
    let mut breakpoints: Vec<f64> = Vec::new();
    for c in cuts {
        if breakpoints.last().is_none_or(|&p| !close(p, c)) {
            breakpoints.push(c);
        }
    }
    if breakpoints.len() == 1 {
        breakpoints.push(hi);
    }
    *breakpoints.first_mut().unwrap() = lo;
    *breakpoints.last_mut().unwrap() = hi;

    let tol = 1e3 * opts.bisect_tol;
    let arcs = breakpoints
        .windows(2)
        .map(|w| {
            let m = mag_at(0.5 * (w[0] + w[1]));
            let mut sigma: Vec<usize> = (0..d).collect();
            sigma.sort_by(|&x, &y| {
                if tied(m[x], m[y], opts.tie_tol) {
                    x.cmp(&y)
                } else {
                    m[y].total_cmp(&m[x])
                }
            });
            let resonance = resonances
                .iter()
                .filter(|g| g.lo <= w[0] + tol && g.hi >= w[1] - tol)
                .map(|g| g.branches.clone())
                .collect();
            PartitionArc {
                lo: w[0],
                hi: w[1],
                sigma: sigma.into_iter().map(|s| s + 1).collect(),
                resonance,
                collisions: grid
                    .collisions
                    .iter()
                    .copied()
                    .filter(|&c| c >= w[0] - tol && c <= w[1] + tol)
                    .collect(),
                singular: grid
                    .exceptional
                    .iter()
                    .filter(|e| e.kind != ExceptionalKind::Collision && e.t >= w[0] - tol && e.t <= w[1] + tol)
                    .copied()
                    .collect(),
            }
        })
        .collect();
    ArcPartition { breakpoints, arcs, resonances, parametrization: grid.parametrization.clone() }
}
