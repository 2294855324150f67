//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Kronrod abscissae of the 15-point rule (positive half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the embedded 7-point rule (odd Kronrod nodes).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of a quadrature: value plus an error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: Complex64,
    pub err: f64,
}

/// One application of the G7/K15 pair on `[a, b]`.
pub fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        resk += pair * WGK[j];
        if j % 2 == 1 {
            resg += pair * WG[j / 2];
        }
    }
    let value = resk * h;
    // The raw Gauss/Kronrod difference bounds the error of the lower-order rule,
    // so it is a conservative estimate for the Kronrod value.
    let err = ((resk - resg) * h).norm();
    Estimate { value, err }
}

/// Fixed (non-adaptive) K15 rule on `[a, b]`: nodes and weights.
pub fn k15_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 15];
    for j in 0..7 {
        out[2 * j] = (c - h * XGK[j], h * WGK[j]);
        out[2 * j + 1] = (c + h * XGK[j], h * WGK[j]);
    }
    out[14] = (c, h * WGK[7]);
    out
}

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-11,
            max_intervals: 20_000,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.est.err == other.est.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.err.total_cmp(&other.est.err)
    }
}

/// Globally adaptive integration over consecutive breakpoints.
///
/// `breaks` must be sorted ascending with at least two entries; every
/// interval between neighbours starts as its own panel.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    f: F,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<Estimate> {
    adapt(f, breaks, opts).map(|(est, _)| est)
}

/// Like [`integrate`] but also returns the final panels, sorted, so the same
/// subdivision can be reused for related integrands.
pub fn adaptive_panels<F: FnMut(f64) -> Complex64>(
    f: F,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<(Estimate, Vec<(f64, f64)>)> {
    let (est, heap) = adapt(f, breaks, opts)?;
    let mut panels: Vec<(f64, f64)> = heap.iter().map(|p| (p.a, p.b)).collect();
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok((est, panels))
}

fn adapt<F: FnMut(f64) -> Complex64>(
    mut f: F,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<(Estimate, BinaryHeap<Panel>)> {
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let est = gk15(&mut f, w[0], w[1]);
        total += est.value;
        err += est.err;
        heap.push(Panel { a: w[0], b: w[1], est });
    }
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.norm());
        if err <= tol {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::QuadratureNonConvergence { err, tol });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureNonConvergence { err, tol });
        }
        let left = gk15(&mut f, worst.a, mid);
        let right = gk15(&mut f, mid, worst.b);
        total += left.value + right.value - worst.est.value;
        err += left.err + right.err - worst.est.err;
        heap.push(Panel { a: worst.a, b: mid, est: left });
        heap.push(Panel { a: mid, b: worst.b, est: right });
    }
    // Re-sum to shed the drift accumulated by incremental updates.
    let mut value = Complex64::new(0.0, 0.0);
    let mut e = 0.0;
    for p in heap.iter() {
        value += p.est.value;
        e += p.est.err;
    }
    Ok((Estimate { value, err: e }, heap))
}

/// Sorted, deduplicated breakpoints clipped to `[lo, hi]`.
pub fn breakpoints(lo: f64, hi: f64, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = extra
        .into_iter()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    v.push(lo);
    v.push(hi);
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    v
}

/// Splits every interval of `breaks` so that no piece is longer than `max_len`.
pub fn refine_uniform(breaks: &[f64], max_len: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(breaks.len());
    for w in breaks.windows(2) {
        let n = ((w[1] - w[0]) / max_len).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / n as f64;
        for k in 0..n {
            out.push(w[0] + k as f64 * h);
        }
    }
    if let Some(&last) = breaks.last() {
        out.push(last);
    }
    out
}
