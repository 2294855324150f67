//! Atomic polarization dynamics in the modulated squeezed reservoir.
//!
//! With `a = gamma (N + 1/2)` the polarizations obey
//!
//! ```text
//! d<s+>/dt = (i delta - a) <s+> + gamma M  int_0^t k (t - t') <s->(t') dt'
//! d<s->/dt = (-i delta - a) <s-> + gamma M* int_0^t k*(t - t') <s+>(t') dt'
//! ```
//!
//! The Laplace-domain solution shares the denominator
//! `D(s) = (s + a)^2 + delta^2 - gamma^2 |M|^2 k~(s) conj(k~(conj s))`.

mod bromwich;
mod poles;
mod volterra;

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{AxisSide, Bandwidth, MemoryKernel, PhaseModulation};

pub use bromwich::inverse_laplace_oracle;
pub use poles::{
    find_complex_poles, find_real_poles, slow_pole_firstorder, ModulationNote, PoleSet, Region,
    SlowPole,
};
pub use volterra::{evolve_polarization, max_step};

/// Reservoir and atom parameters. Rates are in absolute units; `gamma` is
/// the vacuum decay rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirParams {
    pub n: f64,
    pub m: Complex64,
    pub gamma: f64,
    pub delta: f64,
}

/// Where `|M|` sits relative to the classical bound `|M| <= N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SqueezingRegime {
    Classical,
    Nonclassical,
}

impl ReservoirParams {
    pub fn new(n: f64, m: Complex64, gamma: f64, delta: f64) -> Result<Self> {
        let p = Self { n, m, gamma, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n.is_finite() && self.m.re.is_finite() && self.m.im.is_finite())
            || !(self.gamma.is_finite() && self.delta.is_finite())
        {
            return Err(Error::NonFinite("reservoir parameter"));
        }
        if self.n < 0.0 {
            return Err(Error::InvalidParameter(format!("N must be >= 0, got {}", self.n)));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParameter(format!("gamma must be > 0, got {}", self.gamma)));
        }
        let bound = self.n * (self.n + 1.0);
        if self.m.norm_sqr() > bound * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::InvalidParameter(format!(
                "|M|^2 > N(N+1): |M|^2 = {}, N(N+1) = {}",
                self.m.norm_sqr(),
                bound
            )));
        }
        Ok(())
    }

    pub fn regime(&self) -> SqueezingRegime {
        if self.m.norm() <= self.n {
            SqueezingRegime::Classical
        } else {
            SqueezingRegime::Nonclassical
        }
    }

    /// Thermal damping rate `gamma (N + 1/2)`.
    pub fn damping(&self) -> f64 {
        self.gamma * (self.n + 0.5)
    }

    /// True when conjugate-pair symmetry holds (real `M`, zero detuning).
    pub fn is_symmetric(&self) -> bool {
        self.m.im == 0.0 && self.delta == 0.0
    }
}

/// `(<s->, <s+>)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationState {
    pub sigma_minus: Complex64,
    pub sigma_plus: Complex64,
}

impl PolarizationState {
    pub fn new(sigma_minus: Complex64, sigma_plus: Complex64) -> Self {
        Self { sigma_minus, sigma_plus }
    }

    pub fn zero() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    fn is_finite(&self) -> bool {
        [self.sigma_minus, self.sigma_plus].iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Uniform grid `t_n = n * t_max / steps`, `n = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, steps: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) || steps == 0 {
            return Err(Error::InvalidParameter(format!(
                "time grid needs t_max > 0 and steps > 0, got {t_max}, {steps}"
            )));
        }
        Ok(Self { t_max, steps })
    }

    pub fn step(&self) -> f64 {
        self.t_max / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let h = self.step();
        (0..=self.steps).map(|n| n as f64 * h).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub states: Vec<PolarizationState>,
}

impl TimeSeries {
    /// Largest componentwise deviation from another series on the same grid.
    pub fn max_abs_diff(&self, other: &TimeSeries) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| {
                (a.sigma_minus - b.sigma_minus).norm().max((a.sigma_plus - b.sigma_plus).norm())
            })
            .fold(0.0, f64::max)
    }

    /// CSV with columns `t_gamma,re_sm,im_sm,re_sp,im_sp`.
    pub fn write_csv<W: Write>(&self, out: W, gamma: f64) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["t_gamma", "re_sm", "im_sm", "re_sp", "im_sp"]).map_err(io)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            w.write_record(
                [t * gamma, s.sigma_minus.re, s.sigma_minus.im, s.sigma_plus.re, s.sigma_plus.im]
                    .map(|v| v.to_string()),
            )
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

/// Parameters bundled with a constructed kernel, so repeated evaluations do
/// not rebuild it.
#[derive(Debug, Clone)]
pub struct Reservoir {
    params: ReservoirParams,
    kernel: MemoryKernel,
}

impl Reservoir {
    pub fn new(params: ReservoirParams, modulation: PhaseModulation, band: Bandwidth) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, kernel: MemoryKernel::new(modulation, band)? })
    }

    pub fn params(&self) -> &ReservoirParams {
        &self.params
    }

    pub fn kernel(&self) -> &MemoryKernel {
        &self.kernel
    }

    /// `(k~(s), conj(k~(conj s)))`, continued where needed. On the real axis
    /// the two factors are taken from opposite sides of a possible cut.
    pub fn kernel_pair(&self, s: Complex64, side: AxisSide) -> Result<(Complex64, Complex64)> {
        if self.kernel.is_delta() {
            let one = Complex64::new(1.0, 0.0);
            return Ok((one, one));
        }
        let k = self.kernel.laplace_continued(s, side)?.value;
        let kc = self.kernel.laplace_continued(s.conj(), mirror(side))?.value.conj();
        Ok((k, kc))
    }

    /// `D(s) = m e^l` with a large exponent split off; `arg m = arg D`.
    pub(crate) fn denominator_scaled(&self, s: Complex64, side: AxisSide) -> Result<(Complex64, f64)> {
        if self.kernel.is_delta() {
            let one = Complex64::new(1.0, 0.0);
            return Ok((self.denominator_from(s, one, one), 0.0));
        }
        let (k, lk) = self.kernel.laplace_scaled(s, side)?;
        let (kc, lkc) = self.kernel.laplace_scaled(s.conj(), mirror(side))?;
        let kc = kc.conj();
        let l = lk + lkc;
        if l == 0.0 {
            return Ok((self.denominator_from(s, k, kc), 0.0));
        }
        let p = &self.params;
        let sa = s + p.damping();
        let local = (sa * sa + p.delta * p.delta) * (-l).exp();
        Ok((local - p.gamma * p.gamma * p.m.norm_sqr() * k * kc, l))
    }

    fn denominator_from(&self, s: Complex64, k: Complex64, kc: Complex64) -> Complex64 {
        let p = &self.params;
        let sa = s + p.damping();
        sa * sa + p.delta * p.delta - p.gamma * p.gamma * p.m.norm_sqr() * k * kc
    }

    pub fn denominator(&self, s: Complex64) -> Result<Complex64> {
        self.denominator_on(s, AxisSide::Upper)
    }

    pub fn denominator_on(&self, s: Complex64, side: AxisSide) -> Result<Complex64> {
        let (k, kc) = self.kernel_pair(s, side)?;
        Ok(self.denominator_from(s, k, kc))
    }

    pub fn laplace_polarization(&self, init: PolarizationState, s: Complex64) -> Result<PolarizationState> {
        let (k, kc) = self.kernel_pair(s, AxisSide::Upper)?;
        self.solve_with(init, s, k, kc)
    }

    fn solve_with(
        &self,
        init: PolarizationState,
        s: Complex64,
        k: Complex64,
        kc: Complex64,
    ) -> Result<PolarizationState> {
        let p = &self.params;
        let d = self.denominator_from(s, k, kc);
        if d.norm() <= 1e-12 * p.gamma * p.gamma {
            return Err(Error::AtPole(d.norm()));
        }
        let (xm, xp) = (init.sigma_minus, init.sigma_plus);
        let a = p.damping();
        let id = Complex64::new(0.0, p.delta);
        let sm = ((s + a - id) * xm + p.gamma * p.m.conj() * kc * xp) / d;
        let sp = ((s + a + id) * xp + p.gamma * p.m * k * xm) / d;
        Ok(PolarizationState::new(sm, sp))
    }
}

fn mirror(side: AxisSide) -> AxisSide {
    match side {
        AxisSide::Upper => AxisSide::Lower,
        AxisSide::Lower => AxisSide::Upper,
    }
}

/// `D(s)` for the given reservoir.
pub fn denominator(
    params: &ReservoirParams,
    modulation: &PhaseModulation,
    band: Bandwidth,
    s: Complex64,
) -> Result<Complex64> {
    Reservoir::new(*params, modulation.clone(), band)?.denominator(s)
}

/// `(sigma~_-(s), sigma~_+(s))` for initial data `init` at `t = 0`.
pub fn laplace_polarization(
    params: &ReservoirParams,
    modulation: &PhaseModulation,
    band: Bandwidth,
    init: PolarizationState,
    s: Complex64,
) -> Result<PolarizationState> {
    Reservoir::new(*params, modulation.clone(), band)?.laplace_polarization(init, s)
}
