//! Steady-state fluorescence spectrum.
//!
//! By the regression theorem the two-time correlator obeys the same linear
//! equations as the polarization, started from the steady-state moments.
//! The spectrum is `S(w) = (gamma / 2 pi) Re C(i w)` with
//! `C(s) = (s + a + i delta) <s+ s->_ss / D(s)`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Reservoir, ReservoirParams};
use crate::error::{Error, Result};
use crate::kernel::{AxisSide, Bandwidth, PhaseModulation};

/// Steady-state second moments of the atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub sigma_plus_sigma_minus: f64,
    pub sigma_plus_sigma_plus: f64,
}

/// `<s+ s-> = 1/2 - (1/2)/(2N + 1)`; `<s+ s+> = 0`.
pub fn steady_state_correlators(n: f64) -> Result<SteadyState> {
    if !n.is_finite() || n < 0.0 {
        return Err(Error::InvalidParameter(format!("N must be finite and >= 0, got {n}")));
    }
    Ok(SteadyState {
        sigma_plus_sigma_minus: 0.5 - 0.5 / (2.0 * n + 1.0),
        sigma_plus_sigma_plus: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    PeakNormalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSeries {
    pub omega_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub normalization: Normalization,
}

impl SpectrumSeries {
    /// CSV with columns `omega_over_gamma,S,S_normalized`. Expects raw values.
    pub fn write_csv<W: Write>(&self, out: W, gamma: f64) -> Result<()> {
        let normalized = normalize_spectrum(self)?;
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["omega_over_gamma", "S", "S_normalized"]).map_err(io)?;
        for ((om, s), sn) in self.omega_grid.iter().zip(&self.values).zip(&normalized.values) {
            w.write_record([(om / gamma).to_string(), s.to_string(), sn.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

/// 2001 points over `+-10 gamma (N + 1/2 + |M|)`.
pub fn default_grid(params: &ReservoirParams) -> Vec<f64> {
    let half = 10.0 * params.gamma * (params.n + 0.5 + params.m.norm());
    uniform_grid(-half, half, 2001)
}

pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| if i + 1 == points { hi } else { lo + i as f64 * step }).collect()
}

impl Reservoir {
    /// Regression correlator `C(s)`.
    pub fn regression_correlator(&self, s: Complex64) -> Result<Complex64> {
        let p = self.params();
        let ss = steady_state_correlators(p.n)?;
        let (k, kc) = self.kernel_pair(s, AxisSide::Upper)?;
        let a = p.damping();
        let sa = s + a;
        let d = sa * sa + p.delta * p.delta - p.gamma * p.gamma * p.m.norm_sqr() * k * kc;
        if d.norm() <= 1e-12 * p.gamma * p.gamma {
            return Err(Error::AtPole(d.norm()));
        }
        Ok((sa + Complex64::new(0.0, p.delta)) * ss.sigma_plus_sigma_minus / d)
    }

    pub fn spectrum(&self, omega_grid: &[f64]) -> Result<SpectrumSeries> {
        if omega_grid.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("frequency grid"));
        }
        let g = self.params().gamma;
        let values: Vec<Result<f64>> = omega_grid
            .par_iter()
            .map(|&w| self.regression_correlator(Complex64::new(0.0, w)).map(|c| g / (2.0 * PI) * c.re))
            .collect();
        Ok(SpectrumSeries {
            omega_grid: omega_grid.to_vec(),
            values: values.into_iter().collect::<Result<_>>()?,
            normalization: Normalization::Raw,
        })
    }
}

pub fn fluorescence_spectrum(
    params: &ReservoirParams,
    modulation: &PhaseModulation,
    band: Bandwidth,
    omega_grid: &[f64],
) -> Result<SpectrumSeries> {
    Reservoir::new(*params, modulation.clone(), band)?.spectrum(omega_grid)
}

/// Divides by the maximum value.
pub fn normalize_spectrum(series: &SpectrumSeries) -> Result<SpectrumSeries> {
    let max = series.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) || !max.is_finite() {
        return Err(Error::ZeroSpectrum);
    }
    Ok(SpectrumSeries {
        omega_grid: series.omega_grid.clone(),
        values: series.values.iter().map(|v| v / max).collect(),
        normalization: Normalization::PeakNormalized,
    })
}

fn peak_index(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Full width at half maximum from the crossings of 1/2 nearest to the peak,
/// linearly interpolated. Raw series are normalized first.
pub fn fwhm(series: &SpectrumSeries) -> Result<f64> {
    let s = match series.normalization {
        Normalization::PeakNormalized => series.clone(),
        Normalization::Raw => normalize_spectrum(series)?,
    };
    let (w, v) = (&s.omega_grid, &s.values);
    let ip = peak_index(v);
    let cross = |i: usize, j: usize| w[i] + (0.5 - v[i]) * (w[j] - w[i]) / (v[j] - v[i]);
    let left = (1..=ip).rev().find(|&i| v[i - 1] < 0.5).map(|i| cross(i, i - 1));
    let right = (ip..v.len() - 1).find(|&i| v[i + 1] < 0.5).map(|i| cross(i, i + 1));
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(Error::NoCrossing),
    }
}

/// Frequencies of strict interior local maxima.
pub fn local_maxima(series: &SpectrumSeries) -> Vec<f64> {
    let v = &series.values;
    (1..v.len().saturating_sub(1))
        .filter(|&i| v[i] > v[i - 1] && v[i] > v[i + 1])
        .map(|i| series.omega_grid[i])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steady_state_examples() {
        assert!((steady_state_correlators(1.0).unwrap().sigma_plus_sigma_minus - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(steady_state_correlators(0.0).unwrap().sigma_plus_sigma_minus, 0.0);
        let big = steady_state_correlators(1e6).unwrap().sigma_plus_sigma_minus;
        assert!((big - (0.5 - 0.5 / 2_000_001.0)).abs() < 1e-15);
        assert!(steady_state_correlators(-1.0).is_err());
    }

    #[test]
    fn normalization_rules() {
        let s = SpectrumSeries { omega_grid: vec![0.0, 1.0, 2.0], values: vec![2.0; 3], normalization: Normalization::Raw };
        let n = normalize_spectrum(&s).unwrap();
        assert_eq!(n.values, vec![1.0; 3]);
        assert_eq!(normalize_spectrum(&n).unwrap(), n);
        let z = SpectrumSeries { values: vec![0.0; 3], ..s };
        assert!(matches!(normalize_spectrum(&z), Err(Error::ZeroSpectrum)));
    }

    #[test]
    fn lorentzian_width() {
        let a = 1.3;
        let grid = uniform_grid(-10.0 * a, 10.0 * a, 1001);
        let values = grid.iter().map(|w| a / (w * w + a * a)).collect();
        let s = SpectrumSeries { omega_grid: grid, values, normalization: Normalization::Raw };
        assert!((fwhm(&s).unwrap() / (2.0 * a) - 1.0).abs() < 5e-3);
    }

    #[test]
    fn no_crossing_is_reported() {
        let s = SpectrumSeries { omega_grid: vec![0.0, 1.0, 2.0], values: vec![1.0, 0.9, 0.8], normalization: Normalization::Raw };
        assert!(matches!(fwhm(&s), Err(Error::NoCrossing)));
    }
}
