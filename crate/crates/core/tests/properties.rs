use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use qwkb::entropy::{mahler_measure, SubsetSelection};
use qwkb::operator::{parse_operator, parse_polynomial, parse_qop, EpsilonEquation, Symbols};
use qwkb::simulator::{
    companion_diagonalize, growth_rate, iterate_eps, vandermonde_ratio, LogScaled, SimOptions,
};
use qwkb::spectral::roots::aberth;
use qwkb::spectral::{check_regularity, track_eigenpaths, CharPoly, Path, TrackOptions};
use qwkb::wkb::deflate;

fn poly_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut p = vec![C64::new(1.0, 0.0)];
    for &r in roots {
        let mut q = vec![C64::new(0.0, 0.0); p.len() + 1];
        for (i, &a) in p.iter().enumerate() {
            q[i + 1] += a;
            q[i] -= r * a;
        }
        p = q;
    }
    p
}

fn constant_equation(a: Vec<C64>) -> EpsilonEquation {
    EpsilonEquation::from_closure(a.len() - 1, Arc::new(move |j, _, _| a[j]), (0.0, 1.0))
}

/// Roots with magnitudes separated by at least `gap`, in decreasing order.
fn separated_roots(d: usize, gap: f64) -> impl Strategy<Value = Vec<C64>> {
    proptest::collection::vec((0.0f64..1.0, 0.0..TAU), d).prop_map(move |parts| {
        let mut r: Vec<C64> = parts
            .iter()
            .enumerate()
            .map(|(i, &(u, th))| C64::from_polar(0.4 + gap * (d - i) as f64 + 0.5 * gap * u, th))
            .collect();
        r.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        r
    })
}

fn c64() -> impl Strategy<Value = C64> {
    (-1e3f64..1e3, -1e3f64..1e3).prop_map(|(a, b)| C64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn logscaled_arithmetic_matches_plain(a in c64(), b in c64()) {
        prop_assume!(a.norm() > 1e-3 && b.norm() > 1e-3);
        let (la, lb) = (LogScaled::new(a).unwrap(), LogScaled::new(b).unwrap());
        prop_assert!(((la * lb).to_c64() - a * b).norm() <= 1e-13 * (a * b).norm());
        prop_assert!(((la / lb).to_c64() - a / b).norm() <= 1e-13 * (a / b).norm());
        prop_assert!(((la + lb).to_c64() - (a + b)).norm() <= 1e-12 * (a.norm() + b.norm()));
    }

    #[test]
    fn exp_keeps_huge_logs(re in -1e8f64..1e8, im in -10.0f64..10.0) {
        let z = LogScaled::exp(C64::new(re, im));
        prop_assert!((z.log_abs() - re).abs() <= 1e-15 * re.abs().max(1.0));
        let dphase = (z.phase() - im).rem_euclid(TAU);
        prop_assert!(dphase.min(TAU - dphase) < 1e-9);
    }

    #[test]
    fn constant_recursion_grows_like_dominant_root(roots in separated_roots(3, 0.3), w in (0.1f64..1.0, 0.1f64..1.0)) {
        let eq = constant_equation(poly_from_roots(&roots));
        let init = [C64::new(1.0, 0.0), C64::new(w.0, 0.2), C64::new(0.3, w.1)];
        let eps = 1e-3;
        let tr = iterate_eps(&eq, eps, &init, SimOptions::default()).unwrap();
        let rate = growth_rate(&tr).unwrap();
        prop_assert!((rate - roots[0].norm().ln()).abs() < 50.0 * eps, "rate {} vs {}", rate, roots[0].norm().ln());
    }

    #[test]
    fn deflation_divides_out_the_dominant_root(roots in separated_roots(3, 0.4)) {
        let eq = constant_equation(poly_from_roots(&roots));
        let init: Vec<C64> = (0..3).map(|k| roots[0].powi(k)).collect();
        let tr = iterate_eps(&eq, 0.05, &init, SimOptions::default()).unwrap();
        let red = deflate(&eq, &tr).unwrap().equation;
        let got = aberth(&red.coeffs(0.3, 0.05).unwrap(), None);
        for m in 1..3 {
            let want = roots[m] / roots[0];
            let err = got.iter().map(|g| (g - want).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(err < 1e-8, "root {} off by {}", m, err);
        }
    }

    #[test]
    fn companion_and_vandermonde_identities(x in separated_roots(4, 0.25), y in separated_roots(4, 0.25)) {
        let diag = companion_diagonalize(&x).unwrap();
        prop_assert!(diag.residual < 1e-10);
        let r = vandermonde_ratio(&x, &y).unwrap();
        let m = nalgebra::DMatrix::from_fn(4, 4, |i, j| x[j].powi(i as i32));
        let n = nalgebra::DMatrix::from_fn(4, 4, |i, j| y[j].powi(i as i32));
        prop_assert!((&m * r - &n).norm() < 1e-9 * n.norm());
    }

    #[test]
    fn operator_text_round_trips(c in proptest::collection::vec(-4i64..=4, 6), e in 0u32..3) {
        prop_assume!(c[4] != 0 || c[5] != 0);
        let text = format!(
            "({})*Q^{e} + ({} + {}*q)*E + ({}*Q + {}*Q*q^2 + {})*E^2",
            c[0], c[1], c[2], c[3], c[4], c[5] + 5
        );
        let op = parse_operator(&text).unwrap();
        let back = parse_qop(&op.to_qop_string()).unwrap();
        prop_assert_eq!(op.coefficients(), back.coefficients());
        let again = parse_operator(&op.to_string()).unwrap();
        prop_assert_eq!(op.coefficients(), again.coefficients());
    }

    #[test]
    fn separated_constant_operators_are_regular(a in 2i64..6, b in 1i64..6) {
        prop_assume!(a != b);
        let op = parse_operator(&format!("E^2 - {}*E + {}", a + b, a * b)).unwrap();
        let p = CharPoly::from_operator(&op, Path::circle()).unwrap();
        let g = track_eigenpaths(Arc::new(p), TrackOptions::with_n(256)).unwrap();
        prop_assert!(check_regularity(&g, 1e-8).regular);
    }

    #[test]
    fn subset_lists_round_trip(sets in proptest::collection::vec(proptest::collection::btree_set(1usize..=4, 1..=4), 1..4)) {
        let text = sets
            .iter()
            .map(|s| s.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";");
        let parsed = SubsetSelection::parse_list(&text, 4).unwrap();
        let shown: Vec<String> = parsed.iter().map(|s| s.to_string()).collect();
        let want: Vec<String> = sets
            .iter()
            .map(|s| format!("{{{}}}", s.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        prop_assert_eq!(shown, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn mahler_routes_agree_on_linear_factors(c0 in 1i64..5, c1 in -3i64..=3, s in -2i64..=2) {
        prop_assume!(s != 0);
        let text = format!("{s}*L - ({c0} + {c1}*M)");
        let m = mahler_measure(&parse_polynomial(&text, &Symbols::a_polynomial()).unwrap()).unwrap();
        let gap = m.discrepancy().unwrap();
        prop_assert!(gap < 1e-6, "{}: {} vs {:?}", text, m.torus, m.jensen);
    }
}
