//! Time stepping of the polarization equations in integrated form,
//!
//! ```text
//! s+(t) = s+(0) + (i delta - a) int_0^t s+ + gamma M int_0^t K0(t - t') s-(t') dt'
//! ```
//!
//! with `K0(u) = int_0^u k`. `K0` stays bounded even when `k` has lobes much
//! narrower than the step, so product integration against the exact `K0`
//! with linearly interpolated history keeps second order. The local terms
//! are trapezoidal and each step is a 2x2 linear solve.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{Bandwidth, MemoryKernel, PhaseModulation};
use crate::quad::{self, QuadOptions};

use super::{PolarizationState, Reservoir, ReservoirParams, TimeGrid, TimeSeries};

/// Largest admissible step: `(1/50) min(1/(gamma (N + 1/2 + |M|)), T)`.
pub fn max_step(params: &ReservoirParams, kernel: &MemoryKernel) -> f64 {
    let rate = params.gamma * (params.n + 0.5 + params.m.norm());
    let mut scale = 1.0 / rate;
    if let Some(t) = kernel.modulation().time_scale() {
        if t > 0.0 {
            scale = scale.min(t);
        }
    }
    scale / 50.0
}

/// Product-integration weights `(A_m, B_m)` of `K0` on lag cell `m`, for the
/// newer and older end point of the interpolated history.
///
/// By parts, `int_cell K0 w = K0(mh) h/2 + int_cell k(u) W(u) du` with
/// `W = h(1-x)^2/2` for `A` and `h(1-x^2)/2` for `B`, `x = (u - mh)/h`.
fn weights(kernel: &MemoryKernel, h: f64, cells: usize) -> Result<Vec<(Complex64, Complex64)>> {
    let zero = Complex64::new(0.0, 0.0);
    let moments: Vec<(Complex64, Complex64, Complex64)> = if kernel.is_delta() {
        // k = 2 delta(t) with half of its weight on t >= 0, sitting at x = 0.
        let mut v = vec![(zero, zero, zero); cells];
        if cells > 0 {
            v[0] = (Complex64::new(1.0, 0.0), Complex64::new(0.5 * h, 0.0), Complex64::new(0.5 * h, 0.0));
        }
        v
    } else {
        let features = kernel.feature_times();
        let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-12, max_intervals: 10_000 };
        let cell: Vec<Result<(Complex64, Complex64, Complex64)>> = (0..cells)
            .into_par_iter()
            .map(|m| {
                let lo = m as f64 * h;
                let hi = lo + h;
                let br = quad::breakpoints(lo, hi, features.iter().copied());
                let mut fail = None;
                let mut eval = |u: f64| match kernel.time(u) {
                    Ok(v) => v.value,
                    Err(e) => {
                        fail.get_or_insert(e);
                        zero
                    }
                };
                let p = quad::integrate(&mut eval, &br, opts)?;
                let q = quad::integrate(
                    |u| {
                        let x = (u - lo) / h;
                        eval(u) * (0.5 * h * (1.0 - x) * (1.0 - x))
                    },
                    &br,
                    opts,
                )?;
                let r = quad::integrate(
                    |u| {
                        let x = (u - lo) / h;
                        eval(u) * (0.5 * h * (1.0 - x * x))
                    },
                    &br,
                    opts,
                )?;
                if let Some(e) = fail {
                    return Err(e);
                }
                Ok((p.value, q.value, r.value))
            })
            .collect();
        cell.into_iter().collect::<Result<_>>()?
    };
    let mut k0 = zero;
    let mut out = Vec::with_capacity(cells);
    for (p, q, r) in moments {
        out.push((k0 * (0.5 * h) + q, k0 * (0.5 * h) + r));
        k0 += p;
    }
    Ok(out)
}

/// Integrates the polarization equations on a uniform grid.
pub fn evolve_polarization(
    params: &ReservoirParams,
    modulation: &PhaseModulation,
    band: Bandwidth,
    init: PolarizationState,
    grid: TimeGrid,
) -> Result<TimeSeries> {
    Reservoir::new(*params, modulation.clone(), band)?.evolve(init, grid)
}

impl Reservoir {
    pub fn evolve(&self, init: PolarizationState, grid: TimeGrid) -> Result<TimeSeries> {
        if !init.is_finite() {
            return Err(Error::NonFinite("initial state"));
        }
        let h = grid.step();
        let hmax = max_step(&self.params, &self.kernel);
        if h > hmax * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge { h, max: hmax });
        }
        let n_steps = grid.steps;
        let w = weights(&self.kernel, h, n_steps)?;
        let wc: Vec<(Complex64, Complex64)> = w.iter().map(|(a, b)| (a.conj(), b.conj())).collect();

        let p = &self.params;
        let gm = p.gamma * p.m;
        let gmc = p.gamma * p.m.conj();
        let lp = Complex64::new(-p.damping(), p.delta);
        let lm = Complex64::new(-p.damping(), -p.delta);
        let half = 0.5 * h;

        let mut sm = Vec::with_capacity(n_steps + 1);
        let mut sp = Vec::with_capacity(n_steps + 1);
        sm.push(init.sigma_minus);
        sp.push(init.sigma_plus);
        // Running trapezoidal integrals of the local terms.
        let mut cum_p = Complex64::new(0.0, 0.0);
        let mut cum_m = Complex64::new(0.0, 0.0);

        let (a0, a0c) = (w[0].0, wc[0].0);
        let c11 = 1.0 - half * lp;
        let c12 = -gm * a0;
        let c21 = -gmc * a0c;
        let c22 = 1.0 - half * lm;
        let det = c11 * c22 - c12 * c21;

        for n in 0..n_steps {
            // History at t_{n+1} excluding the unknown end point.
            let mut hp = Complex64::new(0.0, 0.0);
            let mut hm = Complex64::new(0.0, 0.0);
            for m in 1..=n {
                hp += w[m].0 * sm[n + 1 - m];
                hm += wc[m].0 * sp[n + 1 - m];
            }
            for m in 0..=n {
                hp += w[m].1 * sm[n - m];
                hm += wc[m].1 * sp[n - m];
            }
            let rp = sp[0] + lp * (cum_p + half * sp[n]) + gm * hp;
            let rm = sm[0] + lm * (cum_m + half * sm[n]) + gmc * hm;
            let new_sp = (rp * c22 - c12 * rm) / det;
            let new_sm = (c11 * rm - c21 * rp) / det;
            cum_p += half * (sp[n] + new_sp);
            cum_m += half * (sm[n] + new_sm);
            sp.push(new_sp);
            sm.push(new_sm);
        }
        let states = sm.into_iter().zip(sp).map(|(m, p)| PolarizationState::new(m, p)).collect();
        Ok(TimeSeries { times: grid.times(), states })
    }
}
