mod common;

use std::sync::Arc;

use proptest::prelude::*;

use cs_radial::energy::TruncationPhi;
use cs_radial::grid::dilate;
use cs_radial::nonlocal::{big_n, big_n_prime};
use cs_radial::solver::MinimaxConfig;
use cs_radial::verify::ledger_check;
use cs_radial::{make_grid, Grading, NonlinearityModel, RadialFunction, RadialGrid};

use common::random_profile;

fn grid() -> Arc<RadialGrid> {
    make_grid(12.0, 513, Grading::Uniform).unwrap()
}

fn coefs() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.2f64..3.0, 0.3f64..2.0, -0.5f64..0.5), 1..4)
}

fn profile(g: &Arc<RadialGrid>, c: &[(f64, f64, f64)]) -> RadialFunction {
    RadialFunction::from_fn(g, |r| random_profile(r, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_along_itself_is_six_times_n(c in coefs()) {
        let u = profile(&grid(), &c);
        let n = big_n(&u);
        prop_assert!((big_n_prime(&u, &u).unwrap() - 6.0 * n).abs() <= 1e-10 * n);
    }

    #[test]
    fn n_is_sextic_in_amplitude(c in coefs(), t in 0.2f64..3.0) {
        let u = profile(&grid(), &c);
        let n = big_n(&u);
        prop_assert!((big_n(&u.scale(t)) - t.powi(6) * n).abs() <= 1e-12 * t.powi(6) * n);
    }

    #[test]
    fn dilation_scales_n(c in coefs(), tau in 0.6f64..1.8) {
        let g = make_grid(16.0, 2049, Grading::Uniform).unwrap();
        let u = profile(&g, &c);
        let n = big_n(&u);
        let nd = big_n(&dilate(&u, tau).unwrap());
        prop_assert!((nd - n / tau.powi(4)).abs() <= 1e-5 * n / tau.powi(4));
    }

    #[test]
    fn ledger_holds(c in coefs(), theta in -0.5f64..0.5, s in 0.0f64..3.0) {
        let u = profile(&grid(), &c);
        let q = s / ((4.0 * theta).exp() * big_n(&u));
        let model = NonlinearityModel::power(2.0, 1.0).unwrap();
        let l = ledger_check(theta, &u, q, &model).unwrap();
        prop_assert!(l.relative() <= 1e-12);
        if l.s < 2.0 {
            prop_assert!(l.c < 2.0 && l.d.abs() < 16.0);
        }
    }

    #[test]
    fn cutoff_is_monotone_with_bounded_slope(a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(TruncationPhi::value(hi) <= TruncationPhi::value(lo));
        let d = TruncationPhi::derivative(a);
        prop_assert!(d <= 0.0 && -d <= TruncationPhi::MAX_SLOPE + 1e-15);
    }

    #[test]
    fn power_nonlinearity_is_odd(p in 1.1f64..5.0, omega in 0.1f64..3.0, x in -10.0f64..10.0) {
        let m = NonlinearityModel::power(p, omega).unwrap();
        prop_assert_eq!(m.g(-x), -m.g(x));
        prop_assert_eq!(m.big_g(-x), m.big_g(x));
        prop_assert!(m.lambda_bar(x.abs()) >= m.lambda(x.abs()));
    }
}

#[test]
fn config_round_trips_and_rejects_unknown_keys() {
    let cfg = MinimaxConfig { seed: 7, ..Default::default() };
    let text = serde_json::to_string(&cfg).unwrap();
    let back: MinimaxConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
    assert!(serde_json::from_str::<MinimaxConfig>(r#"{"seed": 1, "bogus": 2}"#).is_err());
    let partial: MinimaxConfig = serde_json::from_str(r#"{"grad_tol": 1e-5}"#).unwrap();
    assert_eq!(partial.path_points, MinimaxConfig::default().path_points);
}
