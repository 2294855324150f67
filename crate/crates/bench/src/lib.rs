//! Shared fixtures for the benchmarks.

use num_complex::Complex64;
use squeezed_core::{Bandwidth, PhaseModulation};

/// Modulations exercised by the kernel benchmarks, with a short label.
pub fn kernel_cases() -> Vec<(&'static str, PhaseModulation, Bandwidth)> {
    let band = Bandwidth::new(1000.0).expect("positive");
    vec![
        ("quadratic_inf", PhaseModulation::Quadratic { t: 1.0 }, Bandwidth::infinite()),
        ("quadratic_1000", PhaseModulation::Quadratic { t: 1.0 }, band),
        ("linear_1000", PhaseModulation::Linear { t: 1.0 }, band),
        ("none_1000", PhaseModulation::None, band),
    ]
}

/// Laplace variables spread over the right half-plane.
pub fn sample_points() -> Vec<Complex64> {
    [(0.5, 0.0), (0.1, 1.5), (1.0, -3.0), (2.0, 10.0)]
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect()
}
