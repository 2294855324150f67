//! Finite-band kernel for the quadratic phase `f(w) = T^2 w^2`.
//!
//! `exp(i T^2 w^2)` decays in the first quadrant, so the band integral
//! `int_0^W exp(i T^2 w^2) 2s/(s^2 + w^2) dw` is moved onto a ray from the
//! origin plus a vertical leg back to `W`, picking up residues of `+-is`
//! that lie in between. Both legs are non-oscillatory or exponentially damped.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, FRAC_PI_8, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{self, Estimate, QuadOptions};
use crate::specfun::{erf_complex, erfc_complex};

use super::model::EIPI4;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
/// Exponent beyond which `exp(-x)` is below the smallest normal double.
const CUTOFF: f64 = 745.0;

#[derive(Debug, Clone)]
pub(crate) struct QuadraticBand {
    t: f64,
    half: f64,
}

fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    let u = if len2 == 0.0 { 0.0 } else { ((p - a) * d.conj()).re / len2 };
    (p - (a + d * u.clamp(0.0, 1.0))).norm()
}

impl QuadraticBand {
    pub(crate) fn new(t: f64, half: f64) -> Self {
        Self { t, half }
    }

    fn g(&self, w: Complex64) -> Complex64 {
        (I * self.t * self.t * w * w).exp()
    }

    /// `k(u) = (1/pi) int_{-W}^{W} exp(i T^2 w^2 + i u w) dw` in terms of `erf`.
    pub(crate) fn time(&self, u: f64) -> Result<Complex64> {
        let (t, w) = (self.t, self.half);
        let c = u / (2.0 * t * t);
        let alpha = EIPI4.conj();
        let za = alpha * (t * (w + c));
        let zb = alpha * (t * (w - c));
        // erf(za) + erf(zb), switching to erfc when one argument flips sign
        // so that the difference of two numbers near 1 is never formed.
        let bracket = if c > w {
            erfc_complex(-zb)? - erfc_complex(za)?
        } else if c < -w {
            erfc_complex(-za)? - erfc_complex(zb)?
        } else {
            erf_complex(za)? + erf_complex(zb)?
        };
        let pre = Complex64::new(0.0, -u * u / (4.0 * t * t)).exp() * EIPI4 * (PI.sqrt() / (2.0 * t));
        Ok(pre * bracket / PI)
    }

    /// Picks the ray angle that keeps the contour farthest from the poles `+-is`.
    fn choose_angle(&self, s: Complex64) -> f64 {
        let w = self.half;
        let poles = [I * s, -I * s];
        let mut best = (FRAC_PI_4, f64::NEG_INFINITY);
        for th in [FRAC_PI_4, FRAC_PI_6, FRAC_PI_3, FRAC_PI_8, 3.0 * FRAC_PI_8] {
            let top = Complex64::new(w, w * th.tan());
            let d = poles
                .iter()
                .map(|&p| {
                    point_segment_distance(p, Complex64::new(0.0, 0.0), top)
                        .min(point_segment_distance(p, Complex64::new(w, 0.0), top))
                })
                .fold(f64::INFINITY, f64::min);
            // Mild preference for the non-oscillating diagonal.
            let score = if th == FRAC_PI_4 { d * 1.5 } else { d };
            if score > best.1 {
                best = (th, score);
            }
        }
        best.0
    }

    pub(crate) fn t(&self) -> f64 {
        self.t
    }

    fn pole_inside(p: Complex64, w: f64, tan_th: f64) -> bool {
        p.re > 0.0 && p.re < w && p.im > 0.0 && p.im < p.re * tan_th
    }

    /// Transform on the principal sheet for `Re s >= 0`, continued through the
    /// band for `Re s < 0`.
    pub(crate) fn laplace(&self, s: Complex64) -> Result<Estimate> {
        let (e, n, x) = self.pieces(s)?;
        let total = if n == 0 { e.value } else { e.value + 2.0 * PI * n as f64 * x.exp() };
        if !(total.re.is_finite() && total.im.is_finite()) {
            return Err(Error::Overflow("quadratic band kernel"));
        }
        Ok(Estimate { value: total / PI, err: e.err / PI })
    }

    /// `laplace(s) = m e^l`; `l > 0` only where the residue term would overflow.
    pub(crate) fn laplace_scaled(&self, s: Complex64) -> Result<(Complex64, f64)> {
        let (e, n, x) = self.pieces(s)?;
        if n == 0 || x.re <= 300.0 {
            let total = if n == 0 { e.value } else { e.value + 2.0 * PI * n as f64 * x.exp() };
            return Ok((total / PI, 0.0));
        }
        let m = e.value * (-x.re).exp() + 2.0 * PI * n as f64 * Complex64::from_polar(1.0, x.im);
        Ok((m / PI, x.re))
    }

    /// Contour integrals, net residue count `n` and the residue exponent
    /// `-i T^2 s^2`: the transform is `(integrals + 2 pi n exp(x)) / pi`.
    fn pieces(&self, s: Complex64) -> Result<(Estimate, i32, Complex64)> {
        let (t, w) = (self.t, self.half);
        let zero = Complex64::new(0.0, 0.0);
        if s == zero {
            return Ok((Estimate { value: Complex64::new(PI, 0.0), err: 0.0 }, 0, zero));
        }
        if s.re == 0.0 && (s.im.abs() - w).abs() <= 1e-9 * 2.0 * w {
            return Err(Error::NearSingularity { re: s.re, im: s.im });
        }
        let th = self.choose_angle(s);
        let (sin_th, cos_th) = th.sin_cos();
        let tan_th = sin_th / cos_th;
        let dir = Complex64::new(cos_th, sin_th);
        let two_s = 2.0 * s;
        let s2 = s * s;
        let h = |z: Complex64| self.g(z) * two_s / (s2 + z * z);
        let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 100_000 };

        // Ray 0 -> W/cos(th) e^{i th}.
        let r_end = w / cos_th;
        let r_cut = (CUTOFF / (t * t * (2.0 * th).sin())).sqrt();
        let r_max = r_end.min(r_cut);
        let mut extra = Vec::new();
        for p in [I * s, -I * s] {
            // Foot of the pole on the ray, plus geometric points around it.
            let foot = (p * dir.conj()).re;
            let dist = (p * dir.conj()).im.abs().max(1e-12);
            for m in [0.0, 0.3, 1.0, 3.0, 10.0] {
                extra.push(foot + m * dist);
                extra.push(foot - m * dist);
            }
        }
        let decay_len = 1.0 / (t * (2.0 * th).sin().sqrt());
        extra.extend((1..=8).map(|k| k as f64 * decay_len));
        let br = quad::breakpoints(0.0, r_max, extra.iter().copied());
        let osc = t * t * r_max * (2.0 * th).cos().abs();
        let br = if osc > 0.0 { quad::refine_uniform(&br, PI / osc) } else { br };
        let ray = quad::integrate(|r| h(dir * r) * dir, &br, opts)?;

        // Vertical W -> W + i W tan(th).
        let y_end = w * tan_th;
        let y_cut = CUTOFF / (2.0 * t * t * w);
        let y_max = y_end.min(y_cut);
        let mut extra = Vec::new();
        for p in [I * s, -I * s] {
            let dist = (p.re - w).abs().max(1e-12);
            for m in [0.0, 0.3, 1.0, 3.0, 10.0] {
                extra.push(p.im + m * dist);
                extra.push(p.im - m * dist);
            }
        }
        let vdecay = 1.0 / (2.0 * t * t * w);
        extra.extend((1..=8).map(|k| k as f64 * vdecay));
        let br = quad::breakpoints(0.0, y_max, extra);
        let vosc = 2.0 * t * t * y_max;
        let br = if vosc > 0.0 { quad::refine_uniform(&br, PI / vosc) } else { br };
        let vert = quad::integrate(|y| h(Complex64::new(w, y)) * I, &br, opts)?;

        let mut n = 0;
        // A pole exactly on the real axis is taken as sitting just above it
        // (the limit Re s -> 0+).
        let p_plus = I * s;
        let p_plus = if p_plus.im == 0.0 { p_plus + Complex64::new(0.0, f64::MIN_POSITIVE) } else { p_plus };
        if Self::pole_inside(p_plus, w, tan_th) {
            n += 1;
        }
        if Self::pole_inside(-I * s, w, tan_th) {
            n -= 1;
        }
        if s.re < 0.0 && s.im.abs() < w {
            n += 1;
        }
        let integrals = Estimate { value: ray.value - vert.value, err: ray.err + vert.err };
        Ok((integrals, n, Complex64::new(0.0, -t * t) * s2))
    }

    /// `2 g(W)/(pi W) - (2i/pi) int_0^W 2T^2 exp(i T^2 w^2) dw`.
    pub(crate) fn first_moment(&self) -> Result<Complex64> {
        let (t, w) = (self.t, self.half);
        let boundary = 2.0 * self.g(Complex64::new(w, 0.0)) / (PI * w);
        let integral = t * PI.sqrt() * EIPI4 * erf_complex(EIPI4.conj() * (t * w))?;
        Ok(boundary - 2.0 * I / PI * integral)
    }
}
