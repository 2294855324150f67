//! Complex error functions against slow reference evaluations: a Maclaurin
//! series in double-double arithmetic near the origin and a deep Laplace
//! continued fraction elsewhere, plus values frozen from a 40-digit run.

use num_complex::Complex64;
use proptest::prelude::*;
use squeezed_core::specfun::{erf_complex, erfc_complex, faddeeva, faddeeva_any};

#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl Dd {
    fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }
    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let r = self.add(Dd::new(q1 * d).neg().add(Dd::new(-q1.mul_add(d, -(q1 * d)))));
        let q2 = r.hi / d;
        let (hi, lo) = two_sum(q1, q2);
        Dd { hi, lo }
    }
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

#[derive(Clone, Copy, Debug)]
struct Cdd {
    re: Dd,
    im: Dd,
}

impl Cdd {
    fn from(z: Complex64) -> Self {
        Cdd { re: Dd::new(z.re), im: Dd::new(z.im) }
    }
    fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.add(o.re), im: self.im.add(o.im) }
    }
    fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }
    fn scale(self, d: Dd) -> Cdd {
        Cdd { re: self.re.mul(d), im: self.im.mul(d) }
    }
    fn div_f64(self, d: f64) -> Cdd {
        Cdd { re: self.re.div_f64(d), im: self.im.div_f64(d) }
    }
    fn norm_hi(self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }
    fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

const TWO_OVER_SQRT_PI: Dd = Dd { hi: 1.1283791670955126, lo: 1.533545961316588e-17 };

/// `erf(z)` by its Maclaurin series, accumulated in double-double.
fn erf_series(z: Complex64) -> Cdd {
    let zz = Cdd::from(z);
    let mz2 = zz.mul(zz).scale(Dd::new(-1.0));
    let mut term = zz;
    let mut sum = zz;
    let mut n = 1.0;
    loop {
        term = term.mul(mz2).div_f64(n);
        let add = term.div_f64(2.0 * n + 1.0);
        sum = sum.add(add);
        if add.norm_hi() < 1e-34 * sum.norm_hi().max(1e-300) && n > 5.0 {
            break;
        }
        n += 1.0;
        assert!(n < 2000.0, "series did not converge for {z}");
    }
    sum.scale(TWO_OVER_SQRT_PI)
}

fn erfc_series(z: Complex64) -> Complex64 {
    let e = erf_series(z);
    Cdd { re: Dd::new(1.0).add(e.re.neg()), im: e.im.neg() }.to_c64()
}

/// Laplace continued fraction `w(z) = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - ...)))`
/// evaluated bottom-up, `Im z > 0`.
fn faddeeva_cf(z: Complex64) -> Complex64 {
    let depth = 20_000;
    let mut t = z;
    for k in (1..=depth).rev() {
        t = z - (k as f64 * 0.5) / t;
    }
    Complex64::new(0.0, 1.0 / std::f64::consts::PI.sqrt()) / t
}

fn faddeeva_oracle(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r <= 4.0 || (r <= 7.0 && z.im < 2.0) {
        let miz = Complex64::new(z.im, -z.re);
        (-z * z).exp() * erfc_series(miz)
    } else {
        faddeeva_cf(z)
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn frozen_high_precision_values() {
    let v = erfc_complex(Complex64::new(1.0, 0.0)).unwrap();
    assert!((v.re - 0.157_299_207_050_285_13).abs() < 1e-16, "{v}");
    let v = faddeeva(Complex64::new(0.0, 100.0)).unwrap();
    assert!(rel(v, Complex64::new(0.005_641_613_782_989_433, 0.0)) < 1e-14, "{v}");
    let v = faddeeva(Complex64::new(1.0, 1.0)).unwrap();
    let want = Complex64::new(0.304_744_205_256_912_6, 0.208_218_938_202_832_9);
    assert!(rel(v, want) < 1e-14, "{v}");
    let v = faddeeva(Complex64::new(3.0, 0.5)).unwrap();
    let want = Complex64::new(0.037_126_366_054_692_35, 0.192_983_755_300_362_1);
    assert!(rel(v, want) < 1e-14, "{v}");
}

#[test]
fn oracles_agree_with_frozen_values() {
    let v = erfc_series(Complex64::new(1.0, 0.0));
    assert!((v.re - 0.157_299_207_050_285_13).abs() < 1e-16);
    let v = faddeeva_cf(Complex64::new(0.0, 100.0));
    assert!(rel(v, Complex64::new(0.005_641_613_782_989_433, 0.0)) < 1e-14);
    let v = faddeeva_oracle(Complex64::new(1.0, 1.0));
    assert!(rel(v, Complex64::new(0.304_744_205_256_912_6, 0.208_218_938_202_832_9)) < 1e-13);
    let v = faddeeva_oracle(Complex64::new(3.0, 0.5));
    assert!(rel(v, Complex64::new(0.037_126_366_054_692_35, 0.192_983_755_300_362_1)) < 1e-12);
}

#[test]
fn faddeeva_matches_oracle_on_log_polar_grid() {
    let mut worst: (f64, Complex64) = (0.0, Complex64::new(0.0, 0.0));
    for i in 0..=36 {
        let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 36.0);
        for j in 0..=16 {
            let th = std::f64::consts::PI * j as f64 / 16.0;
            let z = Complex64::from_polar(r, th);
            let z = Complex64::new(z.re, z.im.max(0.0));
            let got = faddeeva(z).unwrap();
            let e = rel(got, faddeeva_oracle(z));
            if e > worst.0 {
                worst = (e, z);
            }
        }
    }
    assert!(worst.0 < 1e-8, "worst relative error {:e} at {}", worst.0, worst.1);
}

#[test]
fn faddeeva_extreme_radii() {
    for z in [Complex64::new(0.0, 1e-4), Complex64::new(7e3, 7e3), Complex64::new(-1e4, 1.0), Complex64::new(0.0, 1e4)] {
        let got = faddeeva(z).unwrap();
        let want = if z.norm() < 1.0 { faddeeva_oracle(z) } else { faddeeva_cf(z) };
        assert!(rel(got, want) < 1e-8, "{z}: {got} vs {want}");
    }
}

#[test]
fn erfc_matches_series_inside_radius_four() {
    for i in 0..20 {
        for j in 0..20 {
            let z = Complex64::new(-4.0 + 8.0 * i as f64 / 19.0, -4.0 + 8.0 * j as f64 / 19.0);
            if z.norm() > 4.0 {
                continue;
            }
            let got = erfc_complex(z).unwrap();
            let want = erfc_series(z);
            assert!(rel(got, want) < 1e-10, "{z}: {got} vs {want}");
        }
    }
}

#[test]
fn erfc_matches_continued_fraction_out_to_ten() {
    for i in 0..=12 {
        for j in 0..=12 {
            let z = Complex64::new(10.0 * i as f64 / 12.0, -10.0 + 20.0 * j as f64 / 12.0);
            // On Re z = 0 the fraction is evaluated on the real axis and drops
            // the exp(-x^2) part of w.
            if z.norm() <= 4.0 || z.norm() > 10.0 || z.re < 1.0 {
                continue;
            }
            // erfc(z) = exp(-z^2) w(iz), and iz lies in the upper half-plane.
            let scale = (-z * z).exp();
            if !(scale.norm() > 1e-280 && scale.norm() < 1e280) {
                continue;
            }
            let want = scale * faddeeva_cf(Complex64::new(-z.im, z.re));
            let got = erfc_complex(z).unwrap();
            assert!(rel(got, want) < 1e-10, "{z}: {got} vs {want}");
        }
    }
}

#[test]
fn erf_small_argument_series() {
    for z in [Complex64::new(0.01, 0.02), Complex64::new(-0.1, 0.05), Complex64::new(1e-8, -1e-9)] {
        let got = erf_complex(z).unwrap();
        let want = erf_series(z).to_c64();
        assert!(rel(got, want) < 1e-14, "{z}");
    }
}

fn disk(radius: f64) -> impl Strategy<Value = Complex64> {
    (0.0..radius, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn erfc_reflection(z in disk(5.0)) {
        let s = erfc_complex(z).unwrap() + erfc_complex(-z).unwrap();
        prop_assert!((s - 2.0).norm() < 1e-10, "{}", s);
    }

    #[test]
    fn erfc_conjugation(z in disk(5.0)) {
        let a = erfc_complex(z.conj()).unwrap();
        let b = erfc_complex(z).unwrap().conj();
        prop_assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0));
    }

    #[test]
    fn faddeeva_real_on_imaginary_axis(y in 1e-4f64..1e4) {
        let v = faddeeva(Complex64::new(0.0, y)).unwrap();
        prop_assert!(v.im.abs() <= 1e-12 * v.re.abs());
    }

    #[test]
    fn faddeeva_reflection(z in disk(5.0)) {
        // w(-z) = 2 exp(-z^2) - w(z) for the lower half-plane wrapper.
        let z = Complex64::new(z.re, z.im.abs() + 1e-3);
        let lhs = faddeeva_any(-z).unwrap();
        let rhs = 2.0 * (-z * z).exp() - faddeeva(z).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
    }
}
