//! Kernels whose phase is piecewise linear in frequency (none, linear, table).
//!
//! On each segment `exp(i f)` is a pure exponential, so the time-domain kernel
//! is a finite sum of closed-form segment integrals. The Laplace transform
//! subtracts the analytic continuation of the segment nearest the singular
//! point `w0 = -i s` and integrates the smooth remainder adaptively.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{self, Estimate, QuadOptions};

use super::model::AxisSide;
use super::{PhaseModulation, PhaseTable};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `f(w) = a + b w` on `[lo, hi]`, `w >= 0`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment {
    lo: f64,
    hi: f64,
    a: f64,
    b: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Piecewise {
    half: f64,
    segments: Vec<Segment>,
}

/// `(exp(z) - 1) / z`, stable near zero.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0)))
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `int_p^q exp(i k w) dw`.
fn exp_segment(k: f64, p: f64, q: f64) -> Complex64 {
    let len = q - p;
    let c = 0.5 * (p + q);
    let x = 0.5 * k * len;
    let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    Complex64::from_polar(len * sinc, k * c)
}

impl Piecewise {
    pub(crate) fn new(modulation: &PhaseModulation, half: f64) -> Result<Self> {
        let segments = match modulation {
            PhaseModulation::None => vec![Segment { lo: 0.0, hi: half, a: 0.0, b: 0.0 }],
            PhaseModulation::Linear { t } => vec![Segment { lo: 0.0, hi: half, a: 0.0, b: *t }],
            PhaseModulation::Tabulated { table } => Self::table_segments(table, half)?,
            PhaseModulation::Quadratic { .. } => {
                unreachable!("quadratic phase is handled by the contour kernel")
            }
        };
        Ok(Self { half, segments })
    }

    fn table_segments(table: &PhaseTable, half: f64) -> Result<Vec<Segment>> {
        if table.max_omega() < half * (1.0 - 1e-12) {
            return Err(Error::OutOfGrid(half));
        }
        let (w, f) = (table.omega(), table.phase());
        let mut segs = Vec::new();
        for i in 0..w.len() - 1 {
            if w[i] >= half {
                break;
            }
            let b = (f[i + 1] - f[i]) / (w[i + 1] - w[i]);
            segs.push(Segment { lo: w[i], hi: w[i + 1].min(half), a: f[i] - b * w[i], b });
        }
        Ok(segs)
    }

    /// Largest phase slope over the band.
    fn max_slope(&self) -> f64 {
        self.segments.iter().map(|s| s.b.abs()).fold(0.0, f64::max)
    }

    /// Nonzero slopes; `k(t)` has delta-like lobes of width ~1/B at these times.
    pub(crate) fn lobe_times(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.segments.iter().map(|s| s.b.abs()).filter(|b| *b > 0.0).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// A nonzero slope at the band centre makes `k~` multivalued around `s = 0`;
    /// interior kinks add further branch points on the imaginary axis.
    pub(crate) fn has_branch_points(&self) -> bool {
        self.segments.len() > 1 || self.segments[0].b != 0.0
    }

    fn phase_at(&self, w: f64) -> f64 {
        let x = w.abs();
        let seg = self.segment_index(x);
        let s = &self.segments[seg];
        s.a + s.b * x
    }

    fn segment_index(&self, x: f64) -> usize {
        self.segments
            .iter()
            .position(|s| x <= s.hi)
            .unwrap_or(self.segments.len() - 1)
    }

    pub(crate) fn time(&self, u: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for s in &self.segments {
            let pos = exp_segment(s.b + u, s.lo, s.hi);
            let neg = exp_segment(u - s.b, -s.hi, -s.lo);
            acc += Complex64::from_polar(1.0, s.a) * (pos + neg);
        }
        acc / PI
    }

    /// `k~(s)` on the principal sheet for `Re s >= 0` and continued through the
    /// band segment of the imaginary axis for `Re s < 0`.
    pub(crate) fn laplace(&self, s: Complex64, side: AxisSide) -> Result<Estimate> {
        let w = self.half;
        if s == Complex64::new(0.0, 0.0) {
            return Ok(Estimate { value: Complex64::new(1.0, 0.0), err: 0.0 });
        }
        let (sigma, tau) = (s.re, s.im);
        if sigma == 0.0 && (tau.abs() - w).abs() <= 1e-9 * 2.0 * w {
            return Err(Error::NearSingularity { re: sigma, im: tau });
        }
        let upper = tau > 0.0 || (tau == 0.0 && side == AxisSide::Upper);
        let seg_idx = self.segment_index(tau.abs().min(w));
        let seg = self.segments[seg_idx];
        // Analytic continuation of the selected piece: f_p(w) = a + b*w on the
        // positive side, a - b*w on its mirror image.
        let slope = if upper { seg.b } else { -seg.b };
        let w0 = Complex64::new(tau, -sigma);
        let g0 = (I * (seg.a + slope * w0)).exp();

        let log_term = I * ((s - I * w).ln() - (s + I * w).ln());

        let single_flat = self.segments.len() == 1 && seg.b == 0.0;
        let remainder = if single_flat {
            Estimate { value: Complex64::new(0.0, 0.0), err: 0.0 }
        } else {
            let own = |x: f64| -> bool {
                let ax = x.abs();
                (x > 0.0) == upper && ax >= seg.lo && ax <= seg.hi
            };
            let integrand = |x: f64| -> Complex64 {
                if own(x) {
                    -slope * g0 * phi1(I * slope * (x - w0))
                } else {
                    let f = self.phase_at(x);
                    ((I * f).exp() - g0) / (s - I * x)
                }
            };
            let mut extra: Vec<f64> = Vec::new();
            for sg in &self.segments {
                extra.extend([sg.lo, sg.hi, -sg.lo, -sg.hi]);
            }
            let scale = sigma.abs().max(1e-6);
            for m in [0.0, 0.1, 1.0, 10.0, 100.0] {
                extra.push(tau + m * scale);
                extra.push(tau - m * scale);
            }
            let br = quad::breakpoints(-w, w, extra);
            let bmax = self.max_slope();
            let max_len = if bmax > 0.0 { (PI / bmax).min(w / 8.0) } else { w / 8.0 };
            let br = quad::refine_uniform(&br, max_len);
            quad::integrate(
                integrand,
                &br,
                QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 200_000 },
            )?
        };
        Ok(Estimate {
            value: (g0 * log_term + remainder.value) / PI,
            err: remainder.err / PI,
        })
    }

    /// `-k~'(0+)`, split as a boundary term plus `int_0^W (f'/w) exp(i f) dw`.
    /// The imaginary part diverges when the phase has a nonzero slope at `w = 0`.
    pub(crate) fn first_moment(&self) -> Result<(Complex64, bool)> {
        let w = self.half;
        let gw = Complex64::from_polar(1.0, self.phase_at(w));
        let boundary = 2.0 * gw / (PI * w);
        let im_finite = self.segments[0].b == 0.0;
        let mut re_int = 0.0;
        let mut im_int = 0.0;
        for s in &self.segments {
            if s.b == 0.0 {
                continue;
            }
            let br = quad::refine_uniform(&[s.lo, s.hi], (PI / s.b.abs()).min(s.hi - s.lo));
            // (b/w) sin(a + b w): regular at w = 0 because a = 0 on the first piece.
            let sin_part = quad::integrate(
                |x| {
                    let v = if x == 0.0 { s.b } else { (s.a + s.b * x).sin() / x };
                    Complex64::new(s.b * v, 0.0)
                },
                &br,
                QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 200_000 },
            )?;
            re_int += sin_part.value.re;
            if im_finite {
                let cos_part = quad::integrate(
                    |x| Complex64::new(s.b * (s.a + s.b * x).cos() / x, 0.0),
                    &br,
                    QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 200_000 },
                )?;
                im_int += cos_part.value.re;
            }
        }
        let re = boundary.re + 2.0 / PI * re_int;
        let im = if im_finite { boundary.im - 2.0 / PI * im_int } else { 0.0 };
        Ok((Complex64::new(re, im), im_finite))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_time_kernel_is_sinc() {
        let pw = Piecewise::new(&PhaseModulation::None, 50.0).unwrap();
        assert!((pw.time(0.0).re - 100.0 / PI).abs() < 1e-12);
        let t: f64 = 0.37;
        let expected = 2.0 / PI * (50.0 * t).sin() / t;
        assert!((pw.time(t) - expected).norm() < 1e-12);
    }

    #[test]
    fn flat_laplace_is_arctan() {
        let pw = Piecewise::new(&PhaseModulation::None, 500.0).unwrap();
        let s = Complex64::new(1.3, 0.0);
        let v = pw.laplace(s, AxisSide::Upper).unwrap().value;
        let expected = 2.0 / PI * (500.0f64 / 1.3).atan();
        assert!((v - expected).norm() < 1e-13, "{v}");
    }

    #[test]
    fn linear_at_origin_is_one() {
        let pw = Piecewise::new(&PhaseModulation::Linear { t: 2.0 }, 500.0).unwrap();
        let v = pw.laplace(Complex64::new(1e-9, 0.0), AxisSide::Upper).unwrap().value;
        assert!((v - 1.0).norm() < 1e-6, "{v}");
    }

    #[test]
    fn band_edge_on_axis_is_rejected() {
        let pw = Piecewise::new(&PhaseModulation::Linear { t: 1.0 }, 10.0).unwrap();
        let r = pw.laplace(Complex64::new(0.0, 10.0), AxisSide::Upper);
        assert!(matches!(r, Err(Error::NearSingularity { .. })));
    }
}
