//! Acceptance criteria. Each prints one PASS/FAIL line; the test fails if
//! any criterion fails.

use std::f64::consts::{LN_2, TAU};
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qwkb::builtins::Builtin;
use qwkb::cli;
use qwkb::entropy::{a_polynomial_analysis, mahler_measure, Normalization, A_ENTROPY_GRID};
use num_traits::ToPrimitive;
use qwkb::operator::{
    parse_operator, parse_polynomial, BivariatePolynomial, EpsilonEquation, QOperator, RationalFunction2, Symbols,
};
use qwkb::simulator::{
    companion_diagonalize, decompose_in_basis, growth_rate, involution_ratio, involutions_exact, iterate_eps,
    iterate_eps_scaled, iterate_q, transfer_norm_probe, vandermonde_ratio, RecursionTrace, SimOptions,
};
use qwkb::spectral::roots::aberth;
use qwkb::spectral::{characteristic, check_regularity, track_eigenpaths, CharPoly, Path, TrackOptions};
use qwkb::wkb::{deflate, phi1, phi_higher, wkb_seed, HierarchyOptions};

const FIG8_13: f64 = 2.029883;
const FIG8_ALL: f64 = 4.05977;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(args.iter().copied(), &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned() + &String::from_utf8_lossy(&err))
}

fn summary_sigma(dir: &std::path::Path) -> Vec<(String, f64)> {
    let text = std::fs::read_to_string(dir.join("summary.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["subset"].as_str().unwrap().to_string(), e["sigma"].as_f64().unwrap()))
        .collect()
}

fn figure8_entropy() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let start = Instant::now();
    let (code, log) = run_cli(&["qwkb", "entropy", "figure8", "--subsets", "1,3", "--alpha", "1", "--out", out]);
    let secs = start.elapsed().as_secs_f64();
    if code != 0 {
        return outcome(false, format!("exit {code}: {log}"));
    }
    let s = summary_sigma(dir.path());
    let v = s[0].1;
    outcome(
        code == 0 && (v - FIG8_13).abs() < 1e-3 && secs < 30.0,
        format!("sigma_{{1,3}}(1) = {v:.6} (target {FIG8_13}, raw over t in [0, 2pi]), N = {A_ENTROPY_GRID}, {secs:.1} s"),
    )
}

fn figure8_full_set() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, log) = run_cli(&["qwkb", "entropy", "figure8", "--subsets", "all;1,3", "--out", out]);
    if code != 0 {
        return outcome(false, format!("exit {code}: {log}"));
    }
    let s = summary_sigma(dir.path());
    let all = s.iter().find(|e| e.0 == "{1,2,3}").unwrap().1;
    let half = s.iter().find(|e| e.0 == "{1,3}").unwrap().1;
    let recip = (all - 2.0 * half).abs();
    outcome(
        code == 0 && (all - FIG8_ALL).abs() < 2e-3 && recip < 1e-6,
        format!("sigma_all = {all:.6} (target {FIG8_ALL}), |sigma_all - 2 sigma_13| = {recip:.2e}"),
    )
}

fn trefoil_entropy() -> Outcome {
    let a = Builtin::Trefoil.a_polynomial().unwrap();
    let an = a_polynomial_analysis(&a, A_ENTROPY_GRID).unwrap();
    let profiles = an.entropy().entropy_set(None, &[1.0], Normalization::Raw).unwrap();
    let worst = profiles.iter().map(|p| p.last().abs()).fold(0.0, f64::max);
    outcome(worst < 1e-9, format!("{} subsets, max |sigma_S(1)| = {worst:.2e}", profiles.len()))
}

fn figure8_features() -> Outcome {
    let a = Builtin::Figure8.a_polynomial().unwrap();
    let an = a_polynomial_analysis(&a, A_ENTROPY_GRID).unwrap();
    let g = &an.grid;
    let res = an.partition.resonances.iter().find(|r| r.branches.len() == 3);
    let Some(res) = res else {
        return outcome(false, "no resonance arc".into());
    };
    let near = |t: f64| g.collisions.iter().map(|&c| (c - t).abs()).fold(f64::INFINITY, f64::min);
    let endpoints = near(0.0).max(near(TAU));
    let bounds = near(res.lo).max(near(res.hi));
    let exact = (res.lo - TAU / 3.0).abs().max((res.hi - 2.0 * TAU / 3.0).abs());
    let mut dev: f64 = 0.0;
    for (i, &t) in g.t.iter().enumerate() {
        if t > res.lo && t < res.hi {
            for row in &g.values {
                dev = dev.max((row[i].norm() - 1.0).abs());
            }
        }
    }
    let recorded = !an.partition.parametrization.is_empty();
    outcome(
        endpoints < 1e-6 && bounds < 1e-6 && exact < 1e-6 && dev < 1e-8 && recorded,
        format!(
            "collisions {:?}; resonance [{:.9}, {:.9}] on {:?}, max ||lambda| - 1| = {dev:.1e}; {}",
            g.collisions, res.lo, res.hi, res.branches, an.partition.parametrization
        ),
    )
}

fn classification() -> Outcome {
    let verdict = |text: &str| {
        let op = parse_operator(text).unwrap();
        let p = CharPoly::from_operator(&op, Path::circle()).unwrap();
        let g = track_eigenpaths(Arc::new(p), TrackOptions::with_n(1024)).unwrap();
        check_regularity(&g, 1e-8)
    };
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, text) in [
        ("3_1", Builtin::Trefoil.operator().unwrap().to_string()),
        ("4_1", Builtin::Figure8.operator().unwrap().to_string()),
        ("(l-1)(l-v)", "E^2 - (Q + 1)*E + Q".to_string()),
    ] {
        let r = verdict(&text);
        let evidence = !r.collisions.is_empty() && r.reasons.iter().any(|s| s.contains("collide"));
        ok &= !r.regular && evidence;
        parts.push(format!("{name} irregular={} collisions={:?}", !r.regular, r.collisions));
    }
    let r = verdict("E^2 - 3*E + 2");
    ok &= r.regular;
    parts.push(format!("E^2-3E+2 regular={}", r.regular));
    outcome(ok, parts.join("; "))
}

fn growth_theorem() -> Outcome {
    let eq = Builtin::ConstD2.epsilon().unwrap();
    let init = [c(1.0), C64::new(0.3, 0.1)];
    let mut ok = true;
    let mut parts = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let tr = iterate_eps(&eq, eps, &init, SimOptions::default()).unwrap();
        let dev = (growth_rate(&tr).unwrap() - LN_2).abs();
        ok &= dev <= 5.0 * eps;
        parts.push(format!("eps={eps:.0e}: {dev:.2e}"));
    }
    let first = Builtin::SyntheticFirstOrder.epsilon().unwrap();
    let tr = iterate_eps(&first, 1e-4, &[c(1.0)], SimOptions::default()).unwrap();
    let want = 3.0 * 3f64.ln() - 2.0 * LN_2 - 1.0;
    let dev = (growth_rate(&tr).unwrap() - want).abs();
    ok &= dev < 2e-3;
    parts.push(format!("first order: {dev:.2e}"));
    outcome(ok, parts.join(", "))
}

fn phase_sum(p: &BivariatePolynomial, x: f64, eps: f64) -> (C64, f64) {
    p.terms().fold((C64::new(0.0, 0.0), 0.0), |(sum, scale), (&(a, b), c)| {
        let c = c.to_f64().unwrap();
        (sum + C64::from_polar(c, TAU * (a as f64 * x + b as f64 * eps)), scale + c.abs())
    })
}

/// `a_j(x, ε) = b_j(e^{2πix}, e^{2πiε})` summed monomial by monomial, NaN on
/// a vanishing denominator.
fn phase_form(op: &QOperator, alpha: f64) -> EpsilonEquation {
    let coeffs: Vec<RationalFunction2> = op.coefficients().to_vec();
    let f = move |j: usize, x: f64, eps: f64| {
        let (num, _) = phase_sum(coeffs[j].numerator(), x, eps);
        let (den, scale) = phase_sum(coeffs[j].denominator(), x, eps);
        if den.norm() < 1e-12 * scale {
            C64::new(f64::NAN, 0.0)
        } else {
            num / den
        }
    };
    EpsilonEquation::from_closure(op.degree(), Arc::new(f), (0.0, alpha))
}

fn max_log_gap(a: &RecursionTrace, b: &RecursionTrace, upto: usize) -> f64 {
    a.values.iter().zip(&b.values).take(upto).map(|(u, v)| (u.log_abs() - v.log_abs()).abs()).fold(0.0, f64::max)
}

fn translation_identity() -> Outcome {
    let (n, alpha) = (1000usize, 1.0);
    let eps = alpha / n as f64;
    let opts = SimOptions { puncture: true, ..SimOptions::default() };
    let (mut same, mut indep) = (0.0f64, 0.0f64);
    let mut parts = Vec::new();
    for b in [Builtin::Trefoil, Builtin::Figure8, Builtin::ConstD2] {
        let op = b.operator().unwrap();
        let init = vec![c(1.0); op.degree()];
        let q = iterate_q(&op, n, alpha, &init, opts).unwrap();
        let e = iterate_eps(&op.to_epsilon_form((0.0, alpha)), eps, &init, opts).unwrap();
        if q.values.len() != e.values.len() {
            return outcome(false, format!("{b}: trace lengths differ"));
        }
        same = same.max(max_log_gap(&q, &e, q.values.len()));
        // an independent evaluation agrees until the first eigenvalue collision,
        // where rounding differences start to be amplified
        let p = CharPoly::from_operator(&op, Path::circle()).unwrap();
        let g = track_eigenpaths(Arc::new(p), TrackOptions::with_n(1024)).unwrap();
        let first = check_regularity(&g, 1e-8).collisions.into_iter().find(|&t| t > 0.0).unwrap_or(alpha);
        let upto = ((first / eps) as usize).min(q.values.len());
        let ind = iterate_eps(&phase_form(&op, alpha), eps, &init, opts).unwrap();
        let gap = max_log_gap(&q, &ind, upto);
        indep = indep.max(gap);
        parts.push(format!("{b}: independent {gap:.1e} on k < {upto}, full path {:.1e}", max_log_gap(&q, &ind, q.values.len())));
    }
    outcome(
        same < 1e-9 && indep < 1e-9,
        format!("q vs eps-form (punctured) {same:.1e}; {}", parts.join("; ")),
    )
}

fn wkb_order_one() -> Outcome {
    let eq = Builtin::Synthetic2x.epsilon().unwrap();
    let g = track_eigenpaths(characteristic(&eq), TrackOptions::with_n(1024)).unwrap();
    let jet = phi1(&eq, &g, 1).unwrap();
    // log ψ(x, ε) − ε⁻¹φ_0(x) = φ_1(x) + O(ε); one Richardson step removes the O(ε)
    let sample = |eps: f64| {
        let tr = iterate_eps(&eq, eps, &[c(1.0), c(2.0)], SimOptions::default()).unwrap();
        (0..=18)
            .map(|i| {
                let x = 0.05 * i as f64;
                let k = (x / eps).round() as i64;
                tr.at(k).unwrap().log_abs() - jet.eval(0, x).re / eps
            })
            .collect::<Vec<_>>()
    };
    let (coarse, fine) = (sample(1e-3), sample(5e-4));
    let mut err: f64 = 0.0;
    let mut printed: f64 = 0.0;
    for i in 0..=18 {
        let x = 0.05 * i as f64;
        let extrap = 2.0 * fine[i] - coarse[i];
        err = err.max((extrap - jet.eval(1, x).re).abs());
        printed = printed.max((extrap + 0.5 * (1.0 + x).ln()).abs());
    }
    let higher = phi_higher(&eq, &g, 1, HierarchyOptions { max_order: 2, ..Default::default() }).unwrap();
    let consistency = (0..g.t.len()).map(|i| (higher.phi[1][i] - jet.phi[1][i]).norm()).fold(0.0, f64::max);
    outcome(
        err < 1e-3 && consistency < 1e-8,
        format!(
            "sup |phi_1 - Richardson| = {err:.2e} on [0, 0.9]; phi_higher vs phi1 = {consistency:.2e}; \
             -1/2 ln(1+x) misses by {printed:.2e}"
        ),
    )
}

fn random_roots(rng: &mut ChaCha8Rng, d: usize) -> Vec<C64> {
    loop {
        let r: Vec<C64> = (0..d)
            .map(|_| C64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..TAU)))
            .collect();
        let sep = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).map(|(i, j)| (r[i] - r[j]).norm());
        if sep.fold(f64::INFINITY, f64::min) > 0.3 {
            return r;
        }
    }
}

/// `a_0..a_d` of the monic polynomial with the given roots.
fn poly_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut p = vec![c(1.0)];
    for &r in roots {
        let mut q = vec![c(0.0); p.len() + 1];
        for (i, &a) in p.iter().enumerate() {
            q[i + 1] += a;
            q[i] -= r * a;
        }
        p = q;
    }
    p
}

fn constant_equation(a: &[C64]) -> EpsilonEquation {
    let a = a.to_vec();
    EpsilonEquation::from_closure(a.len() - 1, Arc::new(move |j, _, _| a[j]), (0.0, 1.0))
}

fn lemmas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut diag, mut vand): (f64, f64) = (0.0, 0.0);
    for i in 0..100 {
        let d = 1 + i % 6;
        let roots = random_roots(&mut rng, d);
        diag = diag.max(companion_diagonalize(&roots).map(|r| r.residual).unwrap_or(f64::INFINITY));
        let y = random_roots(&mut rng, d);
        let r = vandermonde_ratio(&roots, &y).unwrap();
        let m = DMatrix::from_fn(d, d, |i, j| roots[j].powi(i as i32));
        let n = DMatrix::from_fn(d, d, |i, j| y[j].powi(i as i32));
        vand = vand.max((&m * r - &n).norm() / n.norm());
    }
    // bounded products for the equation normalized by its dominant solution
    let eq = EpsilonEquation::from_expressions(&["-2*(3 + x)", "11 + 3*x", "-(6 + x)", "1"], (0.0, 1.0)).unwrap();
    let g = track_eigenpaths(characteristic(&eq), TrackOptions::with_n(512)).unwrap();
    let jet = phi1(&eq, &g, 1).unwrap();
    let mut sups = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let seed = wkb_seed(&jet, eps, (0, 2)).unwrap();
        let tr = iterate_eps_scaled(&eq, eps, seed, SimOptions::default()).unwrap();
        let red = deflate(&eq, &tr).unwrap().equation;
        let (_, hi) = red.interval();
        match transfer_norm_probe(&red, 1.0, &[eps], (0.0, hi)) {
            Ok(p) => sups.push(p.sup[0]),
            Err(e) => return outcome(false, format!("probe failed at eps = {eps}: {e}")),
        }
    }
    let spread = sups.iter().copied().fold(0.0, f64::max) / sups.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    outcome(
        diag < 1e-10 && vand < 1e-10 && spread < 0.05,
        format!("diagonalization residual {diag:.1e}, Vandermonde identity {vand:.1e}, norm sups {sups:.4?} (spread {spread:.2e})"),
    )
}

fn deflation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        // distinct magnitudes, dominant first
        let mut mags: [f64; 3] = [rng.gen_range(0.3..2.5), rng.gen_range(0.3..2.5), rng.gen_range(0.3..2.5)];
        mags.sort_by(|a, b| b.total_cmp(a));
        if mags[0] - mags[1] < 0.1 || mags[1] - mags[2] < 0.1 {
            continue;
        }
        let roots: Vec<C64> = mags.iter().map(|&r| C64::from_polar(r, rng.gen_range(0.0..TAU))).collect();
        let eq = constant_equation(&poly_from_roots(&roots));
        let eps = 0.02;
        let init: Vec<C64> = (0..3).map(|k| roots[0].powi(k)).collect();
        let tr = iterate_eps(&eq, eps, &init, SimOptions::default()).unwrap();
        let red = deflate(&eq, &tr).unwrap().equation;
        let got = aberth(&red.coeffs(0.5, eps).unwrap(), None);
        let want = [roots[1] / roots[0], roots[2] / roots[0]];
        let err = want.iter().map(|w| got.iter().map(|g| (g - w).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
        worst = worst.max(err);
    }
    outcome(worst < 1e-8, format!("max root error {worst:.2e} over random d=3 equations"))
}

fn decomposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let roots = random_roots(&mut rng, 3);
        let eq = constant_equation(&poly_from_roots(&roots));
        let eps = 0.05;
        let opts = SimOptions::default();
        let basis: Vec<_> = roots
            .iter()
            .map(|r| iterate_eps(&eq, eps, &[c(1.0), *r, r * r], opts).unwrap())
            .collect();
        let coef: Vec<C64> = (0..3).map(|_| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        let init: Vec<C64> = (0..3).map(|k| (0..3).map(|m| coef[m] * roots[m].powi(k)).sum()).collect();
        let f = iterate_eps(&eq, eps, &init, opts).unwrap();
        let dec = decompose_in_basis(&f, &basis, 6).unwrap();
        for m in 0..3 {
            worst = worst.max((dec.coeffs[m].to_c64() - coef[m]).norm() / coef[m].norm());
        }
    }
    outcome(worst < 1e-6, format!("max relative coefficient error {worst:.2e}"))
}

/// Involutions of `n` points counted by the number `k` of 2-cycles.
fn involutions_by_cycles(n: u64) -> BigUint {
    let fact = |m: u64| (1..=m).fold(BigUint::from(1u32), |a, i| a * i);
    (0..=n / 2).map(|k| fact(n) / (fact(k) * fact(n - 2 * k) * (BigUint::from(1u32) << k as usize))).sum()
}

fn involutions() -> Outcome {
    let f10 = involutions_exact(10).unwrap();
    let oracle = involutions_by_cycles(10) == f10 && involutions_by_cycles(37) == involutions_exact(37).unwrap();
    let r = involution_ratio(2000).unwrap();
    outcome(
        f10 == BigUint::from(9496u32) && oracle && (r - 1.0).abs() < 0.05,
        format!("f(10) = {f10}, r(4000)/r(2000) = {r:.6}"),
    )
}

fn mahler() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for a in ["L - 2", "L - 1", qwkb::builtins::FIGURE8_A] {
        let m = mahler_measure(&parse_polynomial(a, &Symbols::a_polynomial()).unwrap()).unwrap();
        let gap = m.discrepancy().unwrap_or(f64::INFINITY);
        ok &= gap < 1e-5;
        parts.push(format!("{:.10} vs {:.10} ({gap:.1e})", m.torus, m.jensen.unwrap_or(f64::NAN)));
    }
    outcome(ok, parts.join("; "))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("figure-eight entropy sigma_{1,3}", figure8_entropy),
        ("figure-eight full set and reciprocity", figure8_full_set),
        ("trefoil entropy vanishes", trefoil_entropy),
        ("figure-eight collisions and resonance", figure8_features),
        ("regularity classification", classification),
        ("growth rates at desk scale", growth_theorem),
        ("translation identity", translation_identity),
        ("WKB order one", wkb_order_one),
        ("linear-algebra lemmas", lemmas),
        ("deflation spectrum", deflation),
        ("basis decomposition round trip", decomposition),
        ("involution numbers", involutions),
        ("Mahler measure by two routes", mahler),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        println!("[{}] {:>2}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
