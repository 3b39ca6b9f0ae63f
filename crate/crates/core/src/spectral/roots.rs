//! Polynomial roots by Aberth–Ehrlich iteration, and optimal root matching.

use num_complex::Complex64 as C64;
use num_traits::Zero;

use crate::error::{Error, Result};

/// `p(z)` and `p'(z)` for ascending coefficients.
pub fn horner(c: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::zero();
    let mut dp = C64::zero();
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// `|p(z)| / Σ|c_j||z|^j`.
pub fn relative_residual(c: &[C64], z: C64) -> f64 {
    let r = z.norm();
    let scale = c.iter().rev().fold(0.0, |acc, a| acc * r + a.norm());
    if scale == 0.0 {
        return 0.0;
    }
    horner(c, z).0.norm() / scale
}

fn initial_guesses(c: &[C64]) -> Vec<C64> {
    let d = c.len() - 1;
    let lead = c[d].norm();
    // geometric mean of root moduli when c_0 ≠ 0, otherwise a Cauchy-type radius
    let r = if c[0].norm() > 0.0 {
        (c[0].norm() / lead).powf(1.0 / d as f64)
    } else {
        1.0 + c[..d].iter().map(|a| a.norm() / lead).fold(0.0, f64::max)
    };
    (0..d)
        .map(|k| C64::from_polar(r.max(1e-3), 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4))
        .collect()
}

/// All roots of `Σ c_j λ^j` (ascending), optionally seeded.
/// Requires a nonzero leading coefficient.
pub fn aberth(c: &[C64], seeds: Option<&[C64]>) -> Vec<C64> {
    let d = c.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    if d == 1 {
        return vec![-c[0] / c[1]];
    }
    let zero_roots = c.iter().take_while(|a| a.is_zero()).count();
    if zero_roots > 0 {
        let mut r = vec![C64::zero(); zero_roots];
        if zero_roots < d {
            let s: Option<Vec<C64>> = seeds.map(|s| {
                let mut v: Vec<C64> = s.to_vec();
                v.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
                v.split_off(zero_roots)
            });
            r.extend(aberth(&c[zero_roots..], s.as_deref()));
        }
        return r;
    }
    let mut z: Vec<C64> = match seeds {
        Some(s) if s.len() == d => s.to_vec(),
        _ => initial_guesses(c),
    };
    // separate coincident seeds so the repulsion term stays finite
    for i in 0..d {
        for j in 0..i {
            if (z[i] - z[j]).norm() <= 1e-14 * (1.0 + z[i].norm()) {
                let bump = C64::from_polar(1e-7 * (1.0 + z[i].norm()), 1.0 + i as f64);
                z[i] += bump;
            }
        }
    }
    let mut done = vec![false; d];
    for _ in 0..500 {
        let mut all = true;
        for k in 0..d {
            if done[k] {
                continue;
            }
            let (p, dp) = horner(c, z[k]);
            if p.is_zero() {
                done[k] = true;
                continue;
            }
            let ratio = p / dp;
            let mut s = C64::zero();
            for j in 0..d {
                if j != k {
                    let diff = z[k] - z[j];
                    if !diff.is_zero() {
                        s += diff.inv();
                    }
                }
            }
            let denom = C64::new(1.0, 0.0) - ratio * s;
            let w = if denom.is_zero() || !denom.is_finite() { ratio } else { ratio / denom };
            if !w.is_finite() {
                done[k] = true;
                continue;
            }
            z[k] -= w;
            if w.norm() <= 4.0 * f64::EPSILON * z[k].norm() || relative_residual(c, z[k]) < 1e-16 {
                done[k] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    for zk in z.iter_mut() {
        polish(c, zk);
    }
    merge_multiple(c, &mut z);
    z
}

fn derivative(c: &[C64]) -> Vec<C64> {
    c.iter().enumerate().skip(1).map(|(j, a)| a * j as f64).collect()
}

/// A multiple root comes out of the iteration as a cluster spread by
/// about ε^(1/k). When the cluster mean, refined as a simple root of the
/// (k−1)-th derivative, fits `p` as well as the members do, the members
/// are replaced by it.
fn merge_multiple(c: &[C64], z: &mut [C64]) {
    const CLUSTER: f64 = 1e-4;
    let d = z.len();
    let mut seen = vec![false; d];
    for i in 0..d {
        if seen[i] {
            continue;
        }
        let members: Vec<usize> =
            (i..d).filter(|&j| !seen[j] && (z[j] - z[i]).norm() <= CLUSTER * (1.0 + z[i].norm())).collect();
        if members.len() < 2 {
            continue;
        }
        let k = members.len();
        let mut dk = c.to_vec();
        for _ in 1..k {
            dk = derivative(&dk);
        }
        let mut m = members.iter().map(|&j| z[j]).sum::<C64>() / k as f64;
        polish(&dk, &mut m);
        let worst = members.iter().map(|&j| relative_residual(c, z[j])).fold(0.0, f64::max);
        if relative_residual(c, m) <= 4.0 * worst.max(f64::EPSILON) {
            for &j in &members {
                z[j] = m;
                seen[j] = true;
            }
        }
    }
}

/// Newton steps that are kept only while they reduce the residual.
pub fn polish(c: &[C64], z: &mut C64) {
    let mut best = relative_residual(c, *z);
    for _ in 0..4 {
        let (p, dp) = horner(c, *z);
        if dp.is_zero() {
            return;
        }
        let cand = *z - p / dp;
        let r = relative_residual(c, cand);
        if r < best {
            *z = cand;
            best = r;
        } else {
            return;
        }
    }
}

/// Roots with a residual check `|p(λ)| < tol · Σ|c_j||λ|^j`.
pub fn checked_roots(c: &[C64], seeds: Option<&[C64]>, tol: f64) -> Result<Vec<C64>> {
    let r = aberth(c, seeds);
    let worst = r.iter().map(|&z| relative_residual(c, z)).fold(0.0, f64::max);
    if worst > tol {
        return Err(Error::Residual { residual: worst, tol, context: "polynomial roots".into() });
    }
    Ok(r)
}

/// Minimum pairwise distance.
pub fn min_separation(r: &[C64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..r.len() {
        for j in 0..i {
            m = m.min((r[i] - r[j]).norm());
        }
    }
    m
}

/// Minimum-cost perfect assignment (Hungarian algorithm). Returns
/// `a` with row `i` assigned to column `a[i]`.
pub fn assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut a = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            a[p[j] - 1] = j - 1;
        }
    }
    a
}

/// Reorder `new` so that `out[i]` is the value assigned to `old[i]` with
/// minimal total displacement.
pub fn match_to(old: &[C64], new: &[C64]) -> Vec<C64> {
    let cost: Vec<Vec<f64>> = old.iter().map(|a| new.iter().map(|b| (a - b).norm()).collect()).collect();
    let a = assignment(&cost);
    a.iter().map(|&j| new[j]).collect()
}

/// Largest displacement between matched sequences.
pub fn max_displacement(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly_from_roots(r: &[C64]) -> Vec<C64> {
        let mut c = vec![C64::new(1.0, 0.0)];
        for &z in r {
            let mut n = vec![C64::zero(); c.len() + 1];
            for (k, &a) in c.iter().enumerate() {
                n[k + 1] += a;
                n[k] -= a * z;
            }
            c = n;
        }
        c
    }

    #[test]
    fn double_root() {
        let c = poly_from_roots(&[C64::new(-1.0, 0.0), C64::new(-1.0, 0.0), C64::new(2.0, 1.0)]);
        let r = aberth(&c, None);
        let near = r.iter().filter(|z| (*z + 1.0).norm() < 1e-13).count();
        assert_eq!(near, 2);
    }

    #[test]
    fn close_pair_stays_split() {
        let c = poly_from_roots(&[C64::new(1.0, 0.0), C64::new(1.0 + 1e-6, 0.0), C64::new(-2.0, 0.0)]);
        let mut r = aberth(&c, None);
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((r[1] - 1.0).norm() < 1e-9 && (r[2] - 1.0 - 1e-6).norm() < 1e-9);
    }

    #[test]
    fn zero_roots_split_off() {
        let c = vec![C64::zero(), C64::zero(), C64::new(-2.0, 0.0), C64::new(1.0, 0.0)];
        let mut r = aberth(&c, None);
        r.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        assert!(r[0].norm() == 0.0 && r[1].norm() == 0.0);
        assert!((r[2] - 2.0).norm() < 1e-14);
    }

    #[test]
    fn hungarian_beats_greedy() {
        // greedy would pair row 0 with column 0 (cost 1) and pay 100 for row 1
        let cost = vec![vec![1.0, 2.0], vec![2.0, 100.0]];
        assert_eq!(assignment(&cost), vec![1, 0]);
    }

    proptest! {
        #[test]
        fn recovers_random_roots(parts in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..7)) {
            let roots: Vec<C64> = parts.iter().map(|&(a, b)| C64::new(a, b)).collect();
            prop_assume!(min_separation(&roots) > 1e-2);
            let c = poly_from_roots(&roots);
            let found = aberth(&c, None);
            let m = match_to(&roots, &found);
            prop_assert!(max_displacement(&roots, &m) < 1e-8);
        }
    }
}
