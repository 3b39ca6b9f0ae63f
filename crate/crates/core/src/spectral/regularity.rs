//! Regularity: eigenvalues never collide or vanish, and the extreme
//! coefficients never vanish, along the whole path.

use serde::Serialize;

use super::family::{golden_min, ExceptionalKind};
use super::roots::{aberth, min_separation};
use super::tracking::EigenGrid;

#[derive(Clone, Debug, Serialize)]
pub struct Evidence {
    pub value: f64,
    pub at: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub regular: bool,
    pub tolerance: f64,
    /// min over the path of (pairwise root distance / root scale)²
    pub separation_sq: Evidence,
    pub min_abs_root: Evidence,
    /// |c_0| and |c_d| relative to max_j |c_j|
    pub min_c0: Evidence,
    pub min_cd: Evidence,
    pub collisions: Vec<f64>,
    pub poles: Vec<f64>,
    pub reasons: Vec<String>,
}

/// Classify the grid's family. Minima are localized by golden-section search
/// around the worst grid node.
pub fn check_regularity(grid: &EigenGrid, tol: f64) -> RegularityReport {
    let fam = grid.family().as_ref();
    let n = grid.t.len() - 1;
    let d = fam.degree();
    let roots_at = |t: f64| aberth(&fam.poly_at(t), None);
    let sep_sq = |t: f64| {
        let r = roots_at(t);
        let s = min_separation(&r) / r.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if d < 2 {
            f64::INFINITY
        } else {
            s * s
        }
    };
    let min_root = |t: f64| roots_at(t).iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let rel_coeff = |t: f64, j: usize| -> f64 {
        // the cleared polynomial has the same zeros of c_0 and c_d away from poles
        let c = fam.poly_at(t);
        let m = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if m == 0.0 {
            0.0
        } else {
            c[j].norm() / m
        }
    };
    let localize = |f: &dyn Fn(f64) -> f64| -> Evidence {
        let (mut best, mut bi) = (f64::INFINITY, 0);
        for i in 0..=n {
            let v = f(grid.t[i]);
            if v < best {
                best = v;
                bi = i;
            }
        }
        let a = grid.t[bi.saturating_sub(1)];
        let b = grid.t[(bi + 1).min(n)];
        let t = golden_min(f, a, b);
        let v = f(t);
        if v < best {
            Evidence { value: v, at: t }
        } else {
            Evidence { value: best, at: grid.t[bi] }
        }
    };
    let mut separation_sq = localize(&sep_sq);
    // exact collision points beat the grid search
    for &c in &grid.collisions {
        let v = sep_sq(c);
        if v < separation_sq.value {
            separation_sq = Evidence { value: v, at: c };
        }
    }
    let min_abs_root = localize(&min_root);
    let min_c0 = localize(&|t| rel_coeff(t, 0));
    let min_cd = localize(&|t| rel_coeff(t, d));
    let poles: Vec<f64> = grid
        .exceptional
        .iter()
        .filter(|e| e.kind == ExceptionalKind::Pole)
        .map(|e| e.t)
        .collect();

    let mut reasons = Vec::new();
    if separation_sq.value < tol {
        reasons.push(format!("eigenvalues collide at t = {}", separation_sq.at));
    }
    if min_abs_root.value < tol {
        reasons.push(format!("an eigenvalue vanishes at t = {}", min_abs_root.at));
    }
    if min_c0.value < tol {
        reasons.push(format!("c_0 vanishes at t = {}", min_c0.at));
    }
    if min_cd.value < tol {
        reasons.push(format!("c_d vanishes at t = {}", min_cd.at));
    }
    for p in &poles {
        reasons.push(format!("coefficient denominator vanishes at t = {p}"));
    }
    RegularityReport {
        regular: reasons.is_empty(),
        tolerance: tol,
        separation_sq,
        min_abs_root,
        min_c0,
        min_cd,
        collisions: grid.collisions.clone(),
        poles,
        reasons,
    }
}
