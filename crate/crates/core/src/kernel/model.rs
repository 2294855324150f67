use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::faddeeva_any;

use super::contour::QuadraticBand;
use super::piecewise::Piecewise;
use super::{Bandwidth, KernelValue, PhaseModulation};

/// `exp(i pi/4)`.
pub(crate) const EIPI4: Complex64 = Complex64 { re: FRAC_1_SQRT_2, im: FRAC_1_SQRT_2 };

/// Which side of the real axis a point with `Im s = 0` is approached from.
/// Only matters for kernels with a cut along the negative real axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisSide {
    Upper,
    Lower,
}

/// First moment of the kernel. For a phase with a kink at the carrier the
/// imaginary part diverges logarithmically; `value.im` is then reported as 0
/// and `im_convergent` is false.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstMoment {
    pub value: Complex64,
    pub im_convergent: bool,
}

#[derive(Debug, Clone)]
enum Repr {
    Markov,
    QuadraticAnalytic { t: f64 },
    QuadraticBand(QuadraticBand),
    Piecewise(Piecewise),
}

/// Memory kernel for a given phase modulation and bandwidth.
#[derive(Debug, Clone)]
pub struct MemoryKernel {
    modulation: PhaseModulation,
    band: Bandwidth,
    repr: Repr,
}

/// `w(e^{i pi/4} T s)`, the broadband quadratic-phase kernel.
pub(crate) fn quadratic_closed_form(t: f64, s: Complex64) -> Result<Complex64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("T must be finite and >= 0, got {t}")));
    }
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::NonFinite("Laplace variable"));
    }
    if t == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    faddeeva_any(EIPI4 * t * s)
}

impl MemoryKernel {
    pub fn new(modulation: PhaseModulation, band: Bandwidth) -> Result<Self> {
        modulation.validate()?;
        let repr = match (&modulation, band.is_infinite()) {
            (PhaseModulation::None, true) => Repr::Markov,
            (PhaseModulation::Quadratic { t }, true) | (PhaseModulation::Linear { t }, true)
                if *t == 0.0 =>
            {
                Repr::Markov
            }
            (PhaseModulation::Quadratic { t }, true) => Repr::QuadraticAnalytic { t: *t },
            (PhaseModulation::Quadratic { t }, false) if *t > 0.0 => {
                Repr::QuadraticBand(QuadraticBand::new(*t, band.half()))
            }
            (PhaseModulation::Quadratic { .. }, false) => {
                Repr::Piecewise(Piecewise::new(&PhaseModulation::None, band.half())?)
            }
            (_, true) => {
                return Err(Error::InvalidParameter(format!(
                    "{} modulation needs a finite bandwidth",
                    modulation.name()
                )))
            }
            (m, false) => Repr::Piecewise(Piecewise::new(m, band.half())?),
        };
        Ok(Self { modulation, band, repr })
    }

    pub fn modulation(&self) -> &PhaseModulation {
        &self.modulation
    }

    pub fn band(&self) -> Bandwidth {
        self.band
    }

    /// True when `k(t)` is the broadband delta function (`k~ = 1`).
    pub fn is_delta(&self) -> bool {
        matches!(self.repr, Repr::Markov)
    }

    /// True when the continued transform has a cut through the band
    /// (a phase kink at the carrier or inside the band).
    pub fn has_branch_cut(&self) -> bool {
        match &self.repr {
            Repr::Piecewise(p) => p.has_branch_points(),
            _ => false,
        }
    }

    /// Times where `k(t)` has narrow features (echo lobes of width ~1/B).
    pub fn feature_times(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Piecewise(p) => p.lobe_times(),
            _ => Vec::new(),
        }
    }

    /// Rough bound on `|d arg k~(s) / ds|` for `|s| <= radius`; sets the
    /// initial sampling density of contour walks.
    pub(crate) fn phase_rate(&self, radius: f64) -> f64 {
        let lag = self.feature_times().into_iter().fold(0.0, f64::max);
        match &self.repr {
            Repr::QuadraticAnalytic { t } => 2.0 * t * t * radius + t,
            Repr::QuadraticBand(q) => 2.0 * q.t() * q.t() * radius + q.t(),
            _ => lag,
        }
    }

    /// `k(t)`, closed form. The broadband delta kernel has no pointwise value.
    pub fn time(&self, t: f64) -> Result<KernelValue> {
        if !t.is_finite() {
            return Err(Error::NonFinite("time"));
        }
        let v = match &self.repr {
            Repr::Markov => {
                return Err(Error::InvalidParameter(
                    "broadband flat-phase kernel is a delta function".into(),
                ))
            }
            Repr::QuadraticAnalytic { t: tt } => {
                let phase = Complex64::new(0.0, -t * t / (4.0 * tt * tt)).exp();
                EIPI4 * phase / (tt * PI.sqrt())
            }
            Repr::QuadraticBand(q) => q.time(t)?,
            Repr::Piecewise(p) => p.time(t),
        };
        Ok(KernelValue::analytic(v))
    }

    /// `k~(s)` for `Re s >= 0`.
    pub fn laplace(&self, s: Complex64) -> Result<KernelValue> {
        if s.re < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Laplace transform requested at Re s = {} < 0",
                s.re
            )));
        }
        self.eval(s, AxisSide::Upper)
    }

    /// `k~(s)` continued into `Re s < 0` through the band segment of the
    /// imaginary axis. `side` picks the sheet on `Im s = 0` when a cut lies there.
    pub fn laplace_continued(&self, s: Complex64, side: AxisSide) -> Result<KernelValue> {
        self.eval(s, side)
    }

    /// `k~(s) = m e^l`, split so that the broadband quadratic kernel stays
    /// representable where `exp(-z^2)` overflows. `l = 0` otherwise.
    pub(crate) fn laplace_scaled(&self, s: Complex64, side: AxisSide) -> Result<(Complex64, f64)> {
        if let Repr::QuadraticAnalytic { t } = self.repr {
            let z = EIPI4 * t * s;
            let z2 = z * z;
            if z.im < 0.0 && -z2.re > 300.0 {
                let l = -z2.re;
                let m = 2.0 * Complex64::from_polar(1.0, -z2.im) - faddeeva_any(-z)? * (-l).exp();
                return Ok((m, l));
            }
        }
        if let Repr::QuadraticBand(q) = &self.repr {
            return q.laplace_scaled(s);
        }
        Ok((self.eval(s, side)?.value, 0.0))
    }

    fn eval(&self, s: Complex64, side: AxisSide) -> Result<KernelValue> {
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::NonFinite("Laplace variable"));
        }
        match &self.repr {
            Repr::Markov => Ok(KernelValue::analytic(Complex64::new(1.0, 0.0))),
            Repr::QuadraticAnalytic { t } => quadratic_closed_form(*t, s).map(KernelValue::analytic),
            Repr::QuadraticBand(q) => {
                let e = q.laplace(s)?;
                Ok(KernelValue::quadrature(e.value, e.err))
            }
            Repr::Piecewise(p) => {
                let e = p.laplace(s, side)?;
                Ok(KernelValue::quadrature(e.value, e.err))
            }
        }
    }

    pub fn first_moment(&self) -> Result<FirstMoment> {
        let (value, im_convergent) = match &self.repr {
            Repr::Markov => (Complex64::new(0.0, 0.0), true),
            Repr::QuadraticAnalytic { t } => (2.0 * t / PI.sqrt() * EIPI4.conj(), true),
            Repr::QuadraticBand(q) => (q.first_moment()?, true),
            Repr::Piecewise(p) => p.first_moment()?,
        };
        Ok(FirstMoment { value, im_convergent })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_rules() {
        let inf = Bandwidth::infinite();
        let fin = Bandwidth::new(100.0).unwrap();
        assert!(MemoryKernel::new(PhaseModulation::None, inf).unwrap().is_delta());
        assert!(MemoryKernel::new(PhaseModulation::Quadratic { t: 0.0 }, inf).unwrap().is_delta());
        assert!(MemoryKernel::new(PhaseModulation::Linear { t: 1.0 }, inf).is_err());
        let lin = MemoryKernel::new(PhaseModulation::Linear { t: 1.0 }, fin).unwrap();
        assert!(lin.has_branch_cut());
        assert!(!MemoryKernel::new(PhaseModulation::None, fin).unwrap().has_branch_cut());
    }

    #[test]
    fn broadband_quadratic_origin() {
        let k = MemoryKernel::new(PhaseModulation::Quadratic { t: 2.0 }, Bandwidth::infinite()).unwrap();
        let v = k.laplace(Complex64::new(0.0, 0.0)).unwrap().value;
        assert!((v - 1.0).norm() < 1e-15);
        assert!(k.laplace(Complex64::new(-0.1, 0.0)).is_err());
    }

    #[test]
    fn broadband_quadratic_moment() {
        let k = MemoryKernel::new(PhaseModulation::Quadratic { t: 1.0 }, Bandwidth::infinite()).unwrap();
        let m = k.first_moment().unwrap();
        assert!((m.value.re - (2.0 / PI).sqrt()).abs() < 1e-15);
    }
}
