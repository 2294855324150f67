use std::f64::consts::PI;

use proptest::prelude::*;
use squeezed_core::spectrum::{
    default_grid, fluorescence_spectrum, fwhm, local_maxima, normalize_spectrum, steady_state_correlators, uniform_grid,
};
use squeezed_core::{Bandwidth, Complex64, PhaseModulation, ReservoirParams};

fn params(n: f64, m: f64, delta: f64) -> ReservoirParams {
    ReservoirParams::new(n, Complex64::new(m, 0.0), 1.0, delta).unwrap()
}

fn lorentz(w: f64, center: f64, rate: f64) -> f64 {
    rate / ((w - center).powi(2) + rate * rate)
}

fn markov_closed_form(n: f64, m: f64, w: f64) -> f64 {
    let nss = steady_state_correlators(n).unwrap().sigma_plus_sigma_minus;
    let a = n + 0.5;
    nss / (2.0 * PI) * 0.5 * (lorentz(w, 0.0, a - m) + lorentz(w, 0.0, a + m))
}

#[test]
fn thermal_anchor() {
    for (n, delta) in [(0.5, 0.0), (1.0, 0.0), (3.0, 0.0), (1.0, 0.7)] {
        let p = params(n, 0.0, delta);
        let a = n + 0.5;
        let nss = steady_state_correlators(n).unwrap().sigma_plus_sigma_minus;
        for m in [PhaseModulation::None, PhaseModulation::Quadratic { t: 2.0 }] {
            let grid = default_grid(&p);
            let s = fluorescence_spectrum(&p, &m, Bandwidth::infinite(), &grid).unwrap();
            for (w, v) in grid.iter().zip(&s.values) {
                let want = nss / (2.0 * PI) * lorentz(*w, delta, a);
                assert!((v / want - 1.0).abs() < 1e-8, "N={n} delta={delta} w={w}: {v} vs {want}");
            }
        }
    }
}

#[test]
fn markov_anchor() {
    for (n, m) in [(1.0, 1.0), (2.0, 0.5), (0.5, 0.8)] {
        let p = params(n, m, 0.0);
        let grid = default_grid(&p);
        let s = fluorescence_spectrum(&p, &PhaseModulation::None, Bandwidth::infinite(), &grid).unwrap();
        for (w, v) in grid.iter().zip(&s.values) {
            let want = markov_closed_form(n, m, *w);
            assert!((v / want - 1.0).abs() < 1e-8, "N={n} M={m} w={w}");
        }
    }
    let s0 = fluorescence_spectrum(&params(1.0, 1.0, 0.0), &PhaseModulation::None, Bandwidth::infinite(), &[0.0])
        .unwrap()
        .values[0];
    assert!((s0 * 5.0 * PI - 1.0).abs() < 1e-12);
}

#[test]
fn markov_peak_normalization() {
    let p = params(1.0, 1.0, 0.0);
    let s = fluorescence_spectrum(&p, &PhaseModulation::None, Bandwidth::infinite(), &default_grid(&p)).unwrap();
    let n = normalize_spectrum(&s).unwrap();
    assert_eq!(n.values[1000], 1.0);
    assert_eq!(n.omega_grid[1000], 0.0);
}

#[test]
fn markov_fwhm_matches_root_of_closed_form() {
    let (n, m) = (1.0, 1.0);
    let half = 0.5 * markov_closed_form(n, m, 0.0);
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if markov_closed_form(n, m, mid) > half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let want = 2.0 * lo;
    let p = params(n, m, 0.0);
    let s = fluorescence_spectrum(&p, &PhaseModulation::None, Bandwidth::infinite(), &default_grid(&p)).unwrap();
    let got = fwhm(&s).unwrap();
    assert!((got / want - 1.0).abs() < 2e-3, "{got} vs {want}");
}

#[test]
fn sum_rule_against_lorentzian_integral() {
    for n in [0.5, 1.0, 2.0] {
        let p = params(n, 0.0, 0.0);
        let a = n + 0.5;
        let l = 50.0 * a;
        let grid = uniform_grid(-l, l, 20_001);
        let s = fluorescence_spectrum(&p, &PhaseModulation::None, Bandwidth::infinite(), &grid).unwrap();
        let h = grid[1] - grid[0];
        let numeric: f64 = s.values.windows(2).map(|v| 0.5 * h * (v[0] + v[1])).sum();
        let nss = steady_state_correlators(n).unwrap().sigma_plus_sigma_minus;
        let analytic = nss / (2.0 * PI) * 2.0 * (l / a).atan();
        assert!((numeric / analytic - 1.0).abs() < 1e-2, "N={n}: {numeric} vs {analytic}");
        // The full line carries half the steady-state population.
        assert!((analytic / (0.5 * nss) - 1.0).abs() < 2e-2);
    }
}

#[test]
fn strong_quadratic_modulation_shows_side_lobes() {
    let p = params(1.0, 1.0, 0.0);
    let grid = default_grid(&p);
    let s = fluorescence_spectrum(&p, &PhaseModulation::Quadratic { t: 5.0 }, Bandwidth::infinite(), &grid).unwrap();
    let off_center = local_maxima(&s).into_iter().filter(|w| w.abs() > 1e-9).count();
    assert!(off_center >= 2);
}

fn variants() -> Vec<(PhaseModulation, Bandwidth)> {
    vec![
        (PhaseModulation::None, Bandwidth::infinite()),
        (PhaseModulation::None, Bandwidth::new(1e3).unwrap()),
        (PhaseModulation::Quadratic { t: 1.3 }, Bandwidth::infinite()),
        (PhaseModulation::Quadratic { t: 1.3 }, Bandwidth::new(1e3).unwrap()),
        (PhaseModulation::Linear { t: 1.3 }, Bandwidth::new(1e3).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectrum_is_even(w in 0.01f64..15.0, n in 0.1f64..3.0, frac in 0.0f64..1.0) {
        let p = params(n, frac * (n * (n + 1.0)).sqrt(), 0.0);
        for (m, b) in variants() {
            let s = fluorescence_spectrum(&p, &m, b, &[w, -w]).unwrap();
            let (a, c) = (s.values[0], s.values[1]);
            prop_assert!((a - c).abs() <= 1e-8 * a.abs().max(c.abs()), "{}: {} vs {}", m.name(), a, c);
        }
    }

    #[test]
    fn spectrum_is_nonnegative(n in 0.0f64..3.0, frac in 0.0f64..1.0, phase in 0.0f64..6.3, delta in -1.0f64..1.0) {
        let p = ReservoirParams::new(n, Complex64::from_polar(frac * (n * (n + 1.0)).sqrt(), phase), 1.0, delta).unwrap();
        let grid = uniform_grid(-12.0, 12.0, 97);
        for (m, b) in variants() {
            let s = fluorescence_spectrum(&p, &m, b, &grid).unwrap();
            for (w, v) in grid.iter().zip(&s.values) {
                prop_assert!(*v >= -1e-10, "{} at {}: {}", m.name(), w, v);
            }
        }
    }
}
