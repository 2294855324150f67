//! Zeros of the Laplace-domain denominator.
//!
//! Real zeros are bracketed by sign changes of `Re D` along the axis. Complex
//! zeros are counted with the argument principle on rectangles, which are
//! split until each holds at most one zero, and then polished by Newton.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{AxisSide, Bandwidth, PhaseModulation};

use super::{Reservoir, ReservoirParams};

/// Accepted residual for a returned pole, relative to `gamma^2`.
const RESIDUAL: f64 = 1e-8;
/// Residual aimed at by the real-axis polish.
const REAL_RESIDUAL: f64 = 1e-10;

/// Rectangle `re in [re_min, re_max]`, `im in [im_min, im_max]` of the s-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let r = Self { re_min, re_max, im_min, im_max };
        if [re_min, re_max, im_min, im_max].iter().any(|v| !v.is_finite())
            || re_min >= re_max
            || im_min >= im_max
        {
            return Err(Error::InvalidParameter(format!("degenerate pole search region {r:?}")));
        }
        Ok(r)
    }

    fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    fn split_at(&self, (fx, fy): (f64, f64)) -> [Region; 4] {
        let c = Complex64::new(self.re_min + fx * self.width(), self.im_min + fy * self.height());
        [
            Region { re_min: self.re_min, re_max: c.re, im_min: self.im_min, im_max: c.im },
            Region { re_min: c.re, re_max: self.re_max, im_min: self.im_min, im_max: c.im },
            Region { re_min: self.re_min, re_max: c.re, im_min: c.im, im_max: self.im_max },
            Region { re_min: c.re, re_max: self.re_max, im_min: c.im, im_max: self.im_max },
        ]
    }

    /// Same rectangle grown by `f` of its size on every side.
    fn grown(&self, f: f64) -> Region {
        let (dw, dh) = (f * self.width(), f * self.height());
        Region {
            re_min: self.re_min - dw,
            re_max: self.re_max + dw,
            im_min: self.im_min - dh,
            im_max: self.im_max + dh,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulationNote {
    SingleValued,
    /// The continued transform has a cut through the region; counts depend on
    /// the continuation convention.
    BranchCutPresent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleSet {
    pub real_poles: Vec<f64>,
    pub complex_poles: Vec<Complex64>,
    pub search_region: Region,
    pub modulation_note: ModulationNote,
}

impl PoleSet {
    /// CSV with columns `re_pole_over_gamma,im_pole_over_gamma,kind`.
    pub fn write_csv<W: Write>(&self, out: W, gamma: f64) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["re_pole_over_gamma", "im_pole_over_gamma", "kind"]).map_err(io)?;
        for p in &self.real_poles {
            w.write_record([(p / gamma).to_string(), "0".into(), "real".into()]).map_err(io)?;
        }
        for p in &self.complex_poles {
            w.write_record([(p.re / gamma).to_string(), (p.im / gamma).to_string(), "complex".into()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

/// First-order slow pole and whether its preconditions held.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowPole {
    pub value: f64,
    pub precondition_ok: bool,
}

/// `-gamma (1 - gamma |M| Re k1) (N + 1/2 - |M|)`. Valid for `Re k1 >= 0` and
/// `|M| <= N + 1/2`; outside that range the value is still returned, flagged.
pub fn slow_pole_firstorder(params: &ReservoirParams, k1: Complex64) -> SlowPole {
    let m = params.m.norm();
    let g = params.gamma;
    let value = -g * (1.0 - g * m * k1.re) * (params.n + 0.5 - m);
    SlowPole { value, precondition_ok: k1.re >= 0.0 && m <= params.n + 0.5 }
}

impl Reservoir {
    fn d_real(&self, x: f64) -> Result<Complex64> {
        self.denominator_on(Complex64::new(x, 0.0), AxisSide::Upper)
    }

    /// Real zeros of `D` in `[lo, hi]`, ascending.
    pub fn real_poles(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidParameter(format!("bad real range [{lo}, {hi}]")));
        }
        if hi > 0.0 {
            return Err(Error::InvalidParameter("real pole range must lie in s <= 0".into()));
        }
        let p = self.params;
        if p.m.norm() == 0.0 {
            // Double root at -a when on resonance, none otherwise.
            let x = -p.damping();
            return Ok(if p.delta == 0.0 && x >= lo && x <= hi { vec![x, x] } else { vec![] });
        }
        let scale = p.gamma * p.gamma;
        let n = 2000;
        let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let vals: Vec<Result<f64>> = xs.par_iter().map(|&x| self.d_real(x).map(|d| d.re)).collect();
        let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
        let mut roots = Vec::new();
        for i in 0..n {
            let (a, b) = (vals[i], vals[i + 1]);
            if a == 0.0 {
                roots.push(xs[i]);
                continue;
            }
            if a.signum() != b.signum() && b != 0.0 {
                roots.push(self.polish_real(xs[i], xs[i + 1], a, scale)?);
            }
        }
        if vals[n] == 0.0 {
            roots.push(xs[n]);
        }
        // On a cut D is complex and a sign change of Re D alone is not a zero.
        let mut kept = Vec::with_capacity(roots.len());
        for x in roots {
            if self.d_real(x)?.norm() <= RESIDUAL * scale {
                kept.push(x);
            }
        }
        Ok(kept)
    }

    fn polish_real(&self, mut a: f64, mut b: f64, mut fa: f64, scale: f64) -> Result<f64> {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if b - a <= 1e-15 * (1.0 + m.abs()) {
                break;
            }
            let fm = self.d_real(m)?.re;
            if fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        let mut x = 0.5 * (a + b);
        // A few secant-free Newton steps on the real part tighten the residual.
        for _ in 0..5 {
            let d = self.d_real(x)?;
            if d.norm() <= REAL_RESIDUAL * scale {
                break;
            }
            let h = 1e-7 * (1.0 + x.abs());
            let dp = (self.d_real(x + h)?.re - self.d_real(x - h)?.re) / (2.0 * h);
            if dp == 0.0 {
                break;
            }
            let nx = x - d.re / dp;
            if !(nx.is_finite()) || (nx - x).abs() > (b - a).abs() + 1e-12 {
                break;
            }
            x = nx;
        }
        Ok(x)
    }

    fn d_on(&self, z: Complex64, side: AxisSide) -> Result<Complex64> {
        self.denominator_on(z, side)
    }

    /// Winding number of `D` around the boundary of `r`, or `None` when the
    /// boundary passes too close to a zero.
    fn winding(&self, r: &Region, side: AxisSide) -> Result<Option<i64>> {
        let corners = [
            Complex64::new(r.re_min, r.im_min),
            Complex64::new(r.re_max, r.im_min),
            Complex64::new(r.re_max, r.im_max),
            Complex64::new(r.re_min, r.im_max),
        ];
        let tiny = 1e-12 * self.params.gamma * self.params.gamma;
        let mut total = 0.0;
        for e in 0..4 {
            let (z0, z1) = (corners[e], corners[(e + 1) % 4]);
            let Some(d) = self.edge_phase(z0, z1, side, tiny)? else {
                return Ok(None);
            };
            total += d;
        }
        let n = total / (2.0 * std::f64::consts::PI);
        let k = n.round();
        if (n - k).abs() > 0.1 {
            return Ok(None);
        }
        Ok(Some(k as i64))
    }

    /// Accumulated `arg D` along the segment, refined until consecutive
    /// samples differ by less than pi/4.
    fn edge_phase(&self, z0: Complex64, z1: Complex64, side: AxisSide, tiny: f64) -> Result<Option<f64>> {
        // Resolve the kernel's oscillation up front; refinement alone can
        // alias whole turns of the phase.
        let radius = z0.norm().max(z1.norm()) + self.params.damping();
        let rate = 2.0 * self.kernel.phase_rate(radius) + 2.0 / (1e-3 + self.params.gamma);
        let n0 = ((rate * (z1 - z0).norm() / (std::f64::consts::PI / 8.0)).ceil() as usize).clamp(16, 1 << 20);
        let mut ts: Vec<f64> = (0..=n0).map(|i| i as f64 / n0 as f64).collect();
        let at = |t: f64| z0 + (z1 - z0) * t;
        // Only the argument is needed: keep unit phasors (zero marks a sample
        // too close to a zero of D) so huge |D| cannot overflow the ratios.
        let sample = |t: f64| -> Result<Complex64> {
            let (m, l) = self.denominator_scaled(at(t), side)?;
            let r = m.norm();
            Ok(if l == 0.0 && r < tiny { Complex64::new(0.0, 0.0) } else { m / r })
        };
        let vals: Vec<Result<Complex64>> = ts.par_iter().map(|&t| sample(t)).collect();
        let mut vals: Vec<Complex64> = vals.into_iter().collect::<Result<_>>()?;
        let mut total = 0.0;
        let mut i = 0;
        while i + 1 < ts.len() {
            let (a, b) = (vals[i], vals[i + 1]);
            if a.norm() == 0.0 || b.norm() == 0.0 {
                return Ok(None);
            }
            let dphi = (b / a).arg();
            if dphi.abs() > std::f64::consts::FRAC_PI_4 {
                if ts[i + 1] - ts[i] < 1e-9 {
                    return Ok(None);
                }
                let tm = 0.5 * (ts[i] + ts[i + 1]);
                let vm = sample(tm)?;
                ts.insert(i + 1, tm);
                vals.insert(i + 1, vm);
                continue;
            }
            total += dphi;
            i += 1;
        }
        Ok(Some(total))
    }

    fn newton(&self, z0: Complex64, side: AxisSide, cell: &Region) -> Result<Option<Complex64>> {
        let scale = self.params.gamma * self.params.gamma;
        // Where the kernel overflows |D| is huge: no zero to converge to.
        let d_at = |z: Complex64| match self.d_on(z, side) {
            Ok(d) => Ok(Some(d)),
            Err(Error::Overflow(_)) => Ok(None),
            Err(e) => Err(e),
        };
        let mut z = z0;
        for _ in 0..60 {
            let Some(d) = d_at(z)? else { return Ok(None) };
            if d.norm() <= 1e-13 * scale {
                break;
            }
            let h = 1e-6 * (cell.width().max(cell.height())).max(1e-9);
            let (Some(dr), Some(dl)) = (d_at(z + h)?, d_at(z - h)?) else { return Ok(None) };
            let dp = (dr - dl) / (2.0 * h);
            if dp.norm() == 0.0 {
                return Ok(None);
            }
            let step = d / dp;
            z -= step;
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Ok(None);
            }
            if step.norm() <= 1e-15 * (1.0 + z.norm()) {
                break;
            }
        }
        let ok = d_at(z)?.is_some_and(|d| d.norm() <= RESIDUAL * scale) && cell.grown(0.05).contains(z);
        Ok(ok.then_some(z))
    }

    fn zeros_in(&self, r: Region, count: i64, side: AxisSide, depth: u32) -> Result<Vec<Complex64>> {
        if count <= 0 {
            return Ok(Vec::new());
        }
        if count == 1 {
            if let Some(z) = self.newton(r.center(), side, &r)? {
                return Ok(vec![z]);
            }
        }
        if depth >= 40 {
            // Cluster below resolution: report the centre with multiplicity.
            let z = r.center();
            return Ok(if self.d_on(z, side)?.norm() <= RESIDUAL * self.params.gamma.powi(2) {
                vec![z; count as usize]
            } else {
                Vec::new()
            });
        }
        // Split at the centre; if a zero sits on an inner edge, split off-centre.
        for frac in [(0.5, 0.5), (0.5137, 0.4871), (0.4713, 0.5291)] {
            let kids = r.split_at(frac);
            let counts: Vec<Result<Option<i64>>> =
                kids.par_iter().map(|k| self.winding(k, side)).collect();
            let counts: Vec<Option<i64>> = counts.into_iter().collect::<Result<_>>()?;
            if counts.iter().any(Option::is_none) {
                continue;
            }
            let mut out = Vec::new();
            for (k, c) in kids.iter().zip(counts) {
                out.extend(self.zeros_in(*k, c.unwrap_or(0), side, depth + 1)?);
            }
            return Ok(out);
        }
        Ok(Vec::new())
    }

    /// All zeros in `region`, counted with the argument principle.
    pub fn complex_poles(&self, region: Region) -> Result<PoleSet> {
        let p = self.params;
        let cut = self.kernel.has_branch_cut();
        let scale = p.gamma;
        let mut found = Vec::new();
        let mut real = Vec::new();
        let halves: Vec<(Region, AxisSide)> = if cut && region.im_min < 0.0 && region.im_max > 0.0 {
            // Never wind across the cut: search the half-planes separately and
            // take real zeros from the axis scan.
            let eta = 1e-7 * scale;
            let r0 = region.re_min;
            let r1 = region.re_max.min(0.0);
            if r1 > r0 {
                real = self.real_poles(r0, r1)?;
            }
            vec![
                (Region { im_min: eta, ..region }, AxisSide::Upper),
                (Region { im_max: -eta, ..region }, AxisSide::Lower),
            ]
        } else {
            vec![(region, AxisSide::Upper)]
        };
        for (r, side) in halves {
            let mut rr = r;
            let mut count = None;
            for attempt in 0..6 {
                count = self.winding(&rr, side)?;
                if count.is_some() {
                    break;
                }
                rr = r.grown(1e-3 * (attempt + 1) as f64);
            }
            let count = count.ok_or(Error::NearSingularity { re: r.re_max, im: r.im_max })?;
            found.extend(self.zeros_in(rr, count, side, 0)?);
        }

        let tol = 1e-9 * scale;
        let mut complex = Vec::new();
        for z in found {
            if z.im.abs() <= tol * 10.0 && !cut {
                real.push(z.re);
            } else {
                complex.push(z);
            }
        }
        if p.is_symmetric() {
            let missing: Vec<Complex64> = complex
                .iter()
                .filter(|z| z.im.abs() > tol)
                .filter(|z| !complex.iter().any(|w| (*w - z.conj()).norm() <= 1e-7 * scale))
                .map(|z| z.conj())
                .filter(|z| region.contains(*z))
                .collect();
            for z in missing {
                let side = if z.im >= 0.0 { AxisSide::Upper } else { AxisSide::Lower };
                if self.d_on(z, side)?.norm() <= RESIDUAL * scale * scale {
                    complex.push(z);
                }
            }
            // Symmetrize exactly: keep the upper member, mirror it.
            let mut upper: Vec<Complex64> = complex.iter().copied().filter(|z| z.im > 0.0).collect();
            sort_dedup(&mut upper, 1e-7 * scale);
            complex = upper.iter().flat_map(|z| [z.conj(), *z]).filter(|z| region.contains(*z)).collect();
        } else {
            sort_dedup(&mut complex, 1e-7 * scale);
        }
        complex.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        real.sort_by(f64::total_cmp);
        Ok(PoleSet {
            real_poles: real,
            complex_poles: complex,
            search_region: region,
            modulation_note: if cut { ModulationNote::BranchCutPresent } else { ModulationNote::SingleValued },
        })
    }
}

fn sort_dedup(v: &mut Vec<Complex64>, tol: f64) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<Complex64> = Vec::with_capacity(v.len());
    for z in v.drain(..) {
        if !out.iter().any(|w| (*w - z).norm() <= tol) {
            out.push(z);
        }
    }
    *v = out;
}

/// Real zeros of `D` in `[lo, hi]` (`hi <= 0`).
pub fn find_real_poles(
    params: &ReservoirParams,
    modulation: &PhaseModulation,
    band: Bandwidth,
    lo: f64,
    hi: f64,
) -> Result<Vec<f64>> {
    Reservoir::new(*params, modulation.clone(), band)?.real_poles(lo, hi)
}

/// Zeros of `D` inside `region`, real ones listed separately.
pub fn find_complex_poles(
    params: &ReservoirParams,
    modulation: &PhaseModulation,
    band: Bandwidth,
    region: Region,
) -> Result<PoleSet> {
    Reservoir::new(*params, modulation.clone(), band)?.complex_poles(region)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: f64, m: f64) -> ReservoirParams {
        ReservoirParams::new(n, Complex64::new(m, 0.0), 1.0, 0.0).unwrap()
    }

    #[test]
    fn markov_real_poles() {
        let r = find_real_poles(&params(1.0, 1.0), &PhaseModulation::None, Bandwidth::infinite(), -5.0, 0.0)
            .unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] + 2.5).abs() < 1e-12 && (r[1] + 0.5).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn unsqueezed_double_root() {
        let r = find_real_poles(&params(1.0, 0.0), &PhaseModulation::None, Bandwidth::infinite(), -5.0, 0.0)
            .unwrap();
        assert_eq!(r, vec![-1.5, -1.5]);
    }

    #[test]
    fn first_order_examples() {
        let z = Complex64::new(0.0, 0.0);
        assert!((slow_pole_firstorder(&params(1.0, 1.0), z).value + 0.5).abs() < 1e-15);
        let v = slow_pole_firstorder(&params(1.0, 1.0), Complex64::new((2.0 / std::f64::consts::PI).sqrt() * 0.1, 0.0));
        assert!((v.value + 0.4601).abs() < 1e-4, "{}", v.value);
        let v = slow_pole_firstorder(&params(1.0, 1.25), z);
        assert!((v.value + 0.25).abs() < 1e-15);
        assert!(v.precondition_ok);
        assert!(!slow_pole_firstorder(&params(1.0, 1.0), Complex64::new(-0.1, 0.0)).precondition_ok);
    }

    #[test]
    fn markov_complex_search_finds_only_real() {
        let region = Region::new(-4.0, 0.0, -3.0, 3.0).unwrap();
        let ps = find_complex_poles(&params(1.0, 1.0), &PhaseModulation::None, Bandwidth::infinite(), region)
            .unwrap();
        assert!(ps.complex_poles.is_empty(), "{ps:?}");
        assert_eq!(ps.real_poles.len(), 2);
    }
}
