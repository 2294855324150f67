//! Independent time-domain solution by numerical inversion of the Laplace
//! transform along `Re s = c`.
//!
//! Two leading terms of the large-`s` expansion are inverted in closed form
//! (a pure exponential and a kernel convolution with `t e^{-a t}`), leaving a
//! remainder that decays like `|s|^-3` and can be truncated safely.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{AxisSide, Bandwidth, PhaseModulation};
use crate::quad::{self, k15_nodes, QuadOptions};

use super::{PolarizationState, Reservoir, ReservoirParams, TimeGrid, TimeSeries};

/// Target absolute error of the inverted series.
const TARGET: f64 = 1e-6;

/// Inverts the Laplace-domain solution on a uniform time grid.
pub fn inverse_laplace_oracle(
    params: &ReservoirParams,
    modulation: &PhaseModulation,
    band: Bandwidth,
    init: PolarizationState,
    grid: TimeGrid,
) -> Result<TimeSeries> {
    Reservoir::new(*params, modulation.clone(), band)?.invert(init, grid)
}

struct Remainder<'a> {
    r: &'a Reservoir,
    init: PolarizationState,
    c: f64,
    /// `|y|` bits -> `(k~(c + i|y|), k~(c - i|y|))`.
    cache: HashMap<u64, (Complex64, Complex64)>,
}

impl Remainder<'_> {
    fn kernel_at(&mut self, y: f64) -> Result<(Complex64, Complex64)> {
        let ay = y.abs();
        let key = ay.to_bits();
        let (up, down) = match self.cache.get(&key) {
            Some(v) => *v,
            None => {
                let (k, kc) = self.r.kernel_pair(Complex64::new(self.c, ay), AxisSide::Upper)?;
                self.cache.insert(key, (k, kc.conj()));
                (k, kc.conj())
            }
        };
        // (k~(s), conj(k~(conj s))) at s = c + i y.
        Ok(if y >= 0.0 { (up, down.conj()) } else { (down, up.conj()) })
    }

    fn prefill(&mut self, ys: &[f64]) -> Result<()> {
        let mut todo: Vec<f64> = ys.iter().map(|y| y.abs()).collect();
        todo.sort_by(f64::total_cmp);
        todo.dedup();
        todo.retain(|y| !self.cache.contains_key(&y.to_bits()));
        let c = self.c;
        let r = self.r;
        let vals: Vec<Result<(Complex64, Complex64)>> = todo
            .par_iter()
            .map(|&y| {
                r.kernel_pair(Complex64::new(c, y), AxisSide::Upper).map(|(k, kc)| (k, kc.conj()))
            })
            .collect();
        for (y, v) in todo.into_iter().zip(vals) {
            self.cache.insert(y.to_bits(), v?);
        }
        Ok(())
    }

    /// `(G_-, G_+)` after removing the two leading large-`s` terms.
    fn eval(&mut self, y: f64) -> Result<(Complex64, Complex64)> {
        let s = Complex64::new(self.c, y);
        let (k, kc) = self.kernel_at(y)?;
        let full = self.r.solve_with(self.init, s, k, kc)?;
        let p = self.r.params;
        let a = p.damping();
        let id = Complex64::new(0.0, p.delta);
        let (xm, xp) = (self.init.sigma_minus, self.init.sigma_plus);
        let sa2 = (s + a) * (s + a);
        let gm = full.sigma_minus - xm / (s + a + id) - p.gamma * p.m.conj() * xp * kc / sa2;
        let gp = full.sigma_plus - xp / (s + a - id) - p.gamma * p.m * xm * k / sa2;
        Ok((gm, gp))
    }
}

impl Reservoir {
    /// `C(t) = int_0^t k(u) (t - u) e^{-a (t - u)} du` on the grid.
    fn convolution_term(&self, grid: &TimeGrid) -> Result<Vec<Complex64>> {
        let a = self.params.damping();
        let times = grid.times();
        if self.kernel.is_delta() {
            return Ok(times.iter().map(|t| Complex64::new(t * (-a * t).exp(), 0.0)).collect());
        }
        let h = grid.step();
        let features = self.kernel.feature_times();
        let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 10_000 };
        // Per cell: int k(u) e^{a (u - t_{j+1})} du and the same weighted by u.
        let cells: Vec<Result<(Complex64, Complex64)>> = (0..grid.steps)
            .into_par_iter()
            .map(|j| {
                let lo = j as f64 * h;
                let hi = lo + h;
                let br = quad::breakpoints(lo, hi, features.iter().copied());
                let mut fail = None;
                let mut k = |u: f64| match self.kernel.time(u) {
                    Ok(v) => v.value * (a * (u - hi)).exp(),
                    Err(e) => {
                        fail.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    }
                };
                let q0 = quad::integrate(&mut k, &br, opts)?;
                let q1 = quad::integrate(|u| k(u) * u, &br, opts)?;
                if let Some(e) = fail {
                    return Err(e);
                }
                Ok((q0.value, q1.value))
            })
            .collect();
        let decay = (-a * h).exp();
        let mut q0 = Complex64::new(0.0, 0.0);
        let mut q1 = Complex64::new(0.0, 0.0);
        let mut out = vec![Complex64::new(0.0, 0.0)];
        for (j, cell) in cells.into_iter().enumerate() {
            let (d0, d1) = cell?;
            q0 = q0 * decay + d0;
            q1 = q1 * decay + d1;
            out.push(times[j + 1] * q0 - q1);
        }
        Ok(out)
    }

    pub fn invert(&self, init: PolarizationState, grid: TimeGrid) -> Result<TimeSeries> {
        if !init.is_finite() {
            return Err(Error::NonFinite("initial state"));
        }
        let p = self.params;
        let rate = p.gamma * (p.n + 0.5 + p.m.norm()) + p.delta.abs();
        let c = 0.05 * p.gamma;
        let t_max = grid.t_max;
        let growth = (c * t_max).exp();
        let mut rem = Remainder { r: self, init, c, cache: HashMap::new() };

        // Truncation: the tails contribute at most |G(Y)| Y e^{c t} / (2 pi) each.
        let mut y_max = 100.0 * rate;
        loop {
            let mut g = 0.0f64;
            for y in [y_max, -y_max] {
                let (gm, gp) = rem.eval(y)?;
                g = g.max(gm.norm()).max(gp.norm());
            }
            if g * y_max * growth / PI < 0.1 * TARGET {
                break;
            }
            y_max *= 2.0;
            if y_max > 1e7 * rate {
                return Err(Error::ContourTruncation(y_max));
            }
        }

        let width = (2.0 / t_max).min(0.5);
        let breaks = quad::refine_uniform(&[-y_max, 0.0, y_max], width);
        let nodes: Vec<f64> = breaks
            .windows(2)
            .flat_map(|w| k15_nodes(w[0], w[1]).map(|(x, _)| x))
            .collect();
        rem.prefill(&nodes)?;

        let opts = QuadOptions {
            abs_tol: 0.1 * TARGET * 2.0 * PI / growth,
            rel_tol: 1e-12,
            max_intervals: 2_000_000,
        };
        let mut failure = None;
        let mut run = |which: usize, rem: &mut Remainder| -> Result<Vec<(f64, f64)>> {
            let (_, panels) = quad::adaptive_panels(
                |y| match rem.eval(y) {
                    Ok(g) => {
                        let v = if which == 0 { g.0 } else { g.1 };
                        v * Complex64::new(c * t_max, y * t_max).exp()
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    }
                },
                &breaks,
                opts,
            )?;
            Ok(panels)
        };
        let panels_m = run(0, &mut rem)?;
        let panels_p = run(1, &mut rem)?;
        if let Some(e) = failure {
            return Err(e);
        }

        let weighted = |panels: &[(f64, f64)], which: usize, rem: &mut Remainder| -> Result<Vec<(f64, Complex64)>> {
            let mut out = Vec::with_capacity(panels.len() * 15);
            for &(lo, hi) in panels {
                for (y, w) in k15_nodes(lo, hi) {
                    let g = rem.eval(y)?;
                    out.push((y, w * if which == 0 { g.0 } else { g.1 }));
                }
            }
            Ok(out)
        };
        let wm = weighted(&panels_m, 0, &mut rem)?;
        let wp = weighted(&panels_p, 1, &mut rem)?;

        let conv = self.convolution_term(&grid)?;
        let a = p.damping();
        let (xm, xp) = (init.sigma_minus, init.sigma_plus);
        let gm = p.gamma * p.m;
        let gmc = p.gamma * p.m.conj();
        let times = grid.times();
        let states = times
            .par_iter()
            .zip(conv.par_iter())
            .map(|(&t, &cv)| {
                let sum = |nodes: &[(f64, Complex64)]| -> Complex64 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &(y, w) in nodes {
                        acc += w * Complex64::new(0.0, y * t).exp();
                    }
                    acc * (c * t).exp() / (2.0 * PI)
                };
                let em = Complex64::new(-a * t, -p.delta * t).exp();
                let ep = Complex64::new(-a * t, p.delta * t).exp();
                let sm = xm * em + gmc * xp * cv.conj() + sum(&wm);
                let sp = xp * ep + gm * xm * cv + sum(&wp);
                PolarizationState::new(sm, sp)
            })
            .collect();
        Ok(TimeSeries { times, states })
    }
}
