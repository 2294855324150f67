//! Squeezing-phase modulations and the memory kernel they induce.
//!
//! The kernel is `k(t) = (1/pi) * int_{-B/2}^{B/2} exp(i f(w)) exp(i w t) dw`
//! where `f` is the (even) phase of the anomalous bath correlator. Its Laplace
//! transform is evaluated as the single frequency integral
//! `(1/pi) * int exp(i f(w)) / (s - i w) dw`.

mod contour;
mod model;
mod piecewise;

use std::io::Read;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use model::{AxisSide, FirstMoment, MemoryKernel};

/// Phase `f(w)` imprinted on the squeezing correlator as a function of the
/// offset `w` from the carrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseModulation {
    /// Constant phase; the Markov reservoir.
    None,
    /// `f(w) = T |w|`.
    Linear { t: f64 },
    /// `f(w) = T^2 w^2`.
    Quadratic { t: f64 },
    /// Piecewise-linear interpolation of a table given on `w >= 0`.
    Tabulated { table: PhaseTable },
}

impl PhaseModulation {
    pub fn validate(&self) -> Result<()> {
        match self {
            PhaseModulation::Linear { t } | PhaseModulation::Quadratic { t } => {
                if !t.is_finite() || *t < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "modulation time T must be finite and >= 0, got {t}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Modulation time scale, when the variant has one.
    pub fn time_scale(&self) -> Option<f64> {
        match self {
            PhaseModulation::Linear { t } | PhaseModulation::Quadratic { t } => Some(*t),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PhaseModulation::None => "none",
            PhaseModulation::Linear { .. } => "linear",
            PhaseModulation::Quadratic { .. } => "quadratic",
            PhaseModulation::Tabulated { .. } => "table",
        }
    }
}

/// Phase table on `w >= 0`: strictly increasing nodes starting at `(0, 0)`.
///
/// Evenness `f(-w) = f(w)` is implied by storing only the non-negative half.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct PhaseTable {
    omega: Vec<f64>,
    phase: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    omega: Vec<f64>,
    phase: Vec<f64>,
}

impl TryFrom<RawTable> for PhaseTable {
    type Error = Error;
    fn try_from(raw: RawTable) -> Result<Self> {
        PhaseTable::new(raw.omega, raw.phase)
    }
}

impl From<PhaseTable> for RawTable {
    fn from(t: PhaseTable) -> Self {
        RawTable { omega: t.omega, phase: t.phase }
    }
}

impl PhaseTable {
    pub fn new(omega: Vec<f64>, phase: Vec<f64>) -> Result<Self> {
        if omega.len() != phase.len() || omega.len() < 2 {
            return Err(Error::InvalidParameter(
                "phase table needs at least two (omega, f) rows".into(),
            ));
        }
        if omega.iter().chain(&phase).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("phase table entry"));
        }
        if omega[0] != 0.0 || phase[0] != 0.0 {
            return Err(Error::InvalidParameter(
                "phase table must start at omega = 0 with f(0) = 0".into(),
            ));
        }
        if omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "phase table omega column must be strictly increasing".into(),
            ));
        }
        Ok(Self { omega, phase })
    }

    /// Reads a two-column CSV with header `omega,f`. Frequencies are multiplied
    /// by `omega_scale` (the decay rate when the file is in units of it).
    pub fn from_csv<R: Read>(reader: R, omega_scale: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "omega" || &headers[1] != "f" {
            return Err(Error::InvalidParameter(format!(
                "phase table header must be `omega,f`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut omega = Vec::new();
        let mut phase = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            let parse = |i: usize| -> Result<f64> {
                rec[i].parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!("bad number `{}` in phase table", &rec[i]))
                })
            };
            omega.push(parse(0)? * omega_scale);
            phase.push(parse(1)?);
        }
        Self::new(omega, phase)
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn max_omega(&self) -> f64 {
        *self.omega.last().expect("validated non-empty")
    }

    fn eval(&self, w: f64) -> Result<f64> {
        let w = w.abs();
        if w > self.max_omega() {
            return Err(Error::OutOfGrid(w));
        }
        let i = match self.omega.binary_search_by(|x| x.total_cmp(&w)) {
            Ok(i) => return Ok(self.phase[i]),
            Err(i) => i,
        };
        let (x0, x1) = (self.omega[i - 1], self.omega[i]);
        let (y0, y1) = (self.phase[i - 1], self.phase[i]);
        Ok(y0 + (y1 - y0) * (w - x0) / (x1 - x0))
    }
}

/// Full width `B` of the flat squeezing band around the carrier.
/// `B = inf` selects the broadband limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Bandwidth(f64);

impl TryFrom<f64> for Bandwidth {
    type Error = Error;
    fn try_from(b: f64) -> Result<Self> {
        Bandwidth::new(b)
    }
}

impl From<Bandwidth> for f64 {
    fn from(b: Bandwidth) -> f64 {
        b.0
    }
}

impl Bandwidth {
    pub fn new(b: f64) -> Result<Self> {
        if b.is_nan() || b <= 0.0 {
            return Err(Error::InvalidParameter(format!("bandwidth must be > 0, got {b}")));
        }
        Ok(Self(b))
    }

    pub fn infinite() -> Self {
        Self(f64::INFINITY)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn half(self) -> f64 {
        0.5 * self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// Returns a warning when the band is not much wider than the other rates
    /// (`B >= 100 * max(rates)`), or `None` when the broadband picture holds.
    pub fn validity_warning(self, rates: &[f64]) -> Option<String> {
        let max = rates.iter().copied().filter(|r| r.is_finite()).fold(0.0, f64::max);
        if self.0 < 100.0 * max {
            Some(format!(
                "bandwidth {} is below 100x the largest system rate {}",
                self.0, max
            ))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    Analytic,
    Quadrature,
}

/// A kernel sample `k(t)` or `k~(s)` with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: Complex64,
    pub method: KernelMethod,
    pub err_estimate: f64,
}

impl KernelValue {
    pub(crate) fn analytic(value: Complex64) -> Self {
        Self { value, method: KernelMethod::Analytic, err_estimate: 0.0 }
    }

    pub(crate) fn quadrature(value: Complex64, err: f64) -> Self {
        Self { value, method: KernelMethod::Quadrature, err_estimate: err }
    }
}

/// Evaluates the phase `f(w)`.
pub fn phase_eval(modulation: &PhaseModulation, w: f64) -> Result<f64> {
    if !w.is_finite() {
        return Err(Error::NonFinite("frequency"));
    }
    match modulation {
        PhaseModulation::None => Ok(0.0),
        PhaseModulation::Linear { t } => Ok(t * w.abs()),
        PhaseModulation::Quadratic { t } => Ok(t * t * w * w),
        PhaseModulation::Tabulated { table } => table.eval(w),
    }
}

/// Time-domain kernel `k(t)` for `t >= 0` at finite bandwidth.
pub fn kernel_time(modulation: &PhaseModulation, band: Bandwidth, t: f64) -> Result<KernelValue> {
    MemoryKernel::new(modulation.clone(), band)?.time(t)
}

/// Broadband closed form `exp(-i T^2 s^2) erfc(e^{-i pi/4} T s)` of the
/// quadratic-phase kernel, evaluated through the Faddeeva function.
pub fn kernel_laplace_quadratic(t: f64, s: Complex64) -> Result<KernelValue> {
    model::quadratic_closed_form(t, s).map(KernelValue::analytic)
}

/// Numerical Laplace transform of the finite-band kernel for `Re s >= 0`.
pub fn kernel_laplace_numeric(
    modulation: &PhaseModulation,
    band: Bandwidth,
    s: Complex64,
) -> Result<KernelValue> {
    if band.is_infinite() {
        return Err(Error::InvalidParameter(
            "numeric Laplace transform needs a finite bandwidth".into(),
        ));
    }
    MemoryKernel::new(modulation.clone(), band)?.laplace(s)
}

/// First moment `k1 = int_0^inf t k(t) dt` (Abel-regularized as `-k~'(0+)`).
pub fn kernel_first_moment(modulation: &PhaseModulation, band: Bandwidth) -> Result<FirstMoment> {
    MemoryKernel::new(modulation.clone(), band)?.first_moment()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_examples() {
        assert_eq!(phase_eval(&PhaseModulation::Quadratic { t: 1.0 }, 2.0).unwrap(), 4.0);
        assert_eq!(phase_eval(&PhaseModulation::Linear { t: 2.0 }, -3.0).unwrap(), 6.0);
        assert_eq!(phase_eval(&PhaseModulation::None, 17.0).unwrap(), 0.0);
    }

    #[test]
    fn table_interpolates_and_rejects_outside() {
        let t = PhaseTable::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 0.0]).unwrap();
        let m = PhaseModulation::Tabulated { table: t };
        assert_eq!(phase_eval(&m, 0.5).unwrap(), 1.0);
        assert_eq!(phase_eval(&m, -2.0).unwrap(), 1.0);
        assert_eq!(phase_eval(&m, 0.0).unwrap(), 0.0);
        assert!(matches!(phase_eval(&m, 3.5), Err(Error::OutOfGrid(_))));
    }

    #[test]
    fn table_invariants() {
        assert!(PhaseTable::new(vec![0.0, 1.0], vec![0.1, 0.0]).is_err());
        assert!(PhaseTable::new(vec![0.5, 1.0], vec![0.0, 0.0]).is_err());
        assert!(PhaseTable::new(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn table_from_csv() {
        let csv = "omega,f\n0,0\n1,0.5\n2,2\n";
        let t = PhaseTable::from_csv(csv.as_bytes(), 2.0).unwrap();
        assert_eq!(t.omega(), &[0.0, 2.0, 4.0]);
        assert!(PhaseTable::from_csv("w,f\n0,0\n1,1\n".as_bytes(), 1.0).is_err());
    }

    #[test]
    fn bandwidth_rules() {
        assert!(Bandwidth::new(0.0).is_err());
        assert!(Bandwidth::new(-1.0).is_err());
        assert!(Bandwidth::infinite().is_infinite());
        let b = Bandwidth::new(1000.0).unwrap();
        assert!(b.validity_warning(&[1.5, 1.0]).is_none());
        assert!(b.validity_warning(&[20.0]).is_some());
    }

    #[test]
    fn negative_t_rejected() {
        assert!(PhaseModulation::Linear { t: -1.0 }.validate().is_err());
        assert!(PhaseModulation::Quadratic { t: f64::NAN }.validate().is_err());
    }
}
