//! Complex error functions.
//!
//! The Faddeeva function `w(z) = exp(-z^2) erfc(-iz)` is the numerically
//! stable carrier: `erfc`, `erf` and the quadratic-phase kernel are all
//! assembled from it. Evaluation is split by region of the upper half-plane:
//! a continued fraction far from the origin and the exponentially convergent
//! sum of Zaghloul & Ali (ACM TOMS 916) elsewhere.

use num_complex::Complex64;

use crate::error::{Error, Result};

const INV_SQRT_PI: f64 = 0.564_189_583_547_756_286_948_079_451_560_772_6;

// Parameters of the TOMS 916 sum tuned for double precision.
const A: f64 = 0.518_321_480_430_085_929_872;
const A2: f64 = 0.268_657_157_075_235_951_582;
const C: f64 = 0.329_973_702_884_629_072_537;

/// `exp(y^2) erfc(y)` for real `0 <= y <= 7`.
fn erfcx_small(y: f64) -> f64 {
    (y * y).exp() * libm::erfc(y)
}

fn sinh_taylor(x: f64) -> f64 {
    x * (1.0 + x * x * (1.0 / 6.0 + x * x / 120.0))
}

fn sinc(x: f64, sin_x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        sin_x / x
    }
}

fn check_finite(z: Complex64, what: &'static str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Faddeeva function for `Im z >= 0`.
///
/// Use [`faddeeva_any`] for arguments in the lower half-plane.
pub fn faddeeva(z: Complex64) -> Result<Complex64> {
    check_finite(z, "faddeeva argument")?;
    if z.im < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "faddeeva requires Im z >= 0, got {z}"
        )));
    }
    Ok(faddeeva_upper(z))
}

/// Faddeeva function on the whole plane, reflecting through
/// `w(z) = 2 exp(-z^2) - w(-z)` below the real axis.
pub fn faddeeva_any(z: Complex64) -> Result<Complex64> {
    check_finite(z, "faddeeva argument")?;
    if z.im >= 0.0 {
        return Ok(faddeeva_upper(z));
    }
    let e = exp_checked(-z * z, "exp(-z^2) in faddeeva reflection")?;
    Ok(2.0 * e - faddeeva_upper(-z))
}

fn exp_checked(z: Complex64, what: &'static str) -> Result<Complex64> {
    if z.re > 700.0 {
        return Err(Error::Overflow(what));
    }
    Ok(z.exp())
}

fn faddeeva_upper(z: Complex64) -> Complex64 {
    let x = z.re.abs();
    let y = z.im;
    if y > 7.0 || (x > 6.0 && (y > 0.1 || (x > 8.0 && y > 1e-10) || x > 28.0)) {
        continued_fraction(z)
    } else {
        series_916(z)
    }
}

/// Laplace continued fraction, with the number of levels fitted so that the
/// truncation error is below double precision in the region it is used.
fn continued_fraction(z: Complex64) -> Complex64 {
    let x = z.re.abs();
    let y = z.im;
    if x + y > 1.0e7 {
        return Complex64::i() * INV_SQRT_PI / z;
    }
    if x + y > 4000.0 {
        return Complex64::i() * INV_SQRT_PI * z / (z * z - 0.5);
    }
    let levels = (3.9 + 11.398 / (0.08254 * x + 0.1421 * y + 0.2023)).floor();
    let mut w = z;
    let mut nu = 0.5 * (levels - 1.0);
    while nu > 0.4 {
        w = z - nu / w;
        nu -= 0.5;
    }
    Complex64::i() * INV_SQRT_PI / w
}

fn series_916(z: Complex64) -> Complex64 {
    let x = z.re.abs();
    let y = z.im;
    let (mut sum1, mut sum2, mut sum3, mut sum4, mut sum5) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let relerr = f64::EPSILON;

    if x >= 10.0 {
        // Only reached for |y| < 1e-10, where exp(-x^2) and the n ~ x/a terms survive.
        let base = Complex64::new((-x * x).exp(), 0.0);
        let n0 = (x / A + 0.5).floor();
        let dx = A * n0 - x;
        sum3 = (-dx * dx).exp() / (A2 * n0 * n0 + y * y);
        sum5 = A * n0 * sum3;
        let exp1 = (4.0 * A * dx).exp();
        let mut exp1dn = 1.0;
        let mut dn = 1.0;
        let finish = |sum3: f64, sum5: f64| {
            base + Complex64::new(0.5 * C * y * sum3, (0.5 * C * sum5).copysign(z.re))
        };
        while dn < n0 {
            let np = n0 + dn;
            let nm = n0 - dn;
            let mut tp = (-(A * dn + dx).powi(2)).exp();
            exp1dn *= exp1;
            let mut tm = tp * exp1dn;
            tp /= A2 * np * np + y * y;
            tm /= A2 * nm * nm + y * y;
            sum3 += tp + tm;
            sum5 += A * (np * tp + nm * tm);
            if A * (np * tp + nm * tm) < relerr * sum5 {
                return finish(sum3, sum5);
            }
            dn += 1.0;
        }
        loop {
            let np = n0 + dn;
            dn += 1.0;
            let tp = (-(A * dn + dx).powi(2)).exp() / (A2 * np * np + y * y);
            sum3 += tp;
            sum5 += A * np * tp;
            if A * np * tp < relerr * sum5 {
                return finish(sum3, sum5);
            }
        }
    }

    let exp2ax = (2.0 * A * x).exp();
    let expm2ax = 1.0 / exp2ax;
    let mut prod2ax = 1.0;
    let mut prodm2ax = 1.0;
    let expx2;
    if x < 5e-4 {
        // sum5 - sum4 accumulated directly to avoid cancellation
        let x2 = x * x;
        expx2 = 1.0 - x2 * (1.0 - 0.5 * x2);
        let mut n = 1.0_f64;
        loop {
            let coef = (-A2 * n * n).exp() * expx2 / (A2 * n * n + y * y);
            prod2ax *= exp2ax;
            prodm2ax *= expm2ax;
            sum1 += coef;
            sum2 += coef * prodm2ax;
            sum3 += coef * prod2ax;
            sum5 += coef * 2.0 * A * n * sinh_taylor(2.0 * A * n * x);
            if coef * prod2ax < relerr * sum3 {
                break;
            }
            n += 1.0;
        }
    } else {
        expx2 = (-x * x).exp();
        let mut n = 1.0_f64;
        loop {
            let coef = (-A2 * n * n).exp() * expx2 / (A2 * n * n + y * y);
            prod2ax *= exp2ax;
            prodm2ax *= expm2ax;
            sum1 += coef;
            sum2 += coef * prodm2ax;
            sum4 += coef * prodm2ax * A * n;
            sum3 += coef * prod2ax;
            sum5 += coef * prod2ax * A * n;
            if coef * prod2ax * A * n < relerr * sum5 {
                break;
            }
            n += 1.0;
        }
    }

    let expx2erfcxy = expx2 * erfcx_small(y);
    let ret = if y > 5.0 {
        let sinxy = (x * y).sin();
        Complex64::new(
            (expx2erfcxy - C * y * sum1) * (2.0 * x * y).cos()
                + C * x * expx2 * sinxy * sinc(x * y, sinxy),
            0.0,
        )
    } else {
        let xs = z.re;
        let sinxy = (xs * y).sin();
        let sin2xy = (2.0 * xs * y).sin();
        let cos2xy = (2.0 * xs * y).cos();
        let coef1 = expx2erfcxy - C * y * sum1;
        let coef2 = C * xs * expx2;
        Complex64::new(
            coef1 * cos2xy + coef2 * sinxy * sinc(xs * y, sinxy),
            coef2 * sinc(2.0 * xs * y, sin2xy) - coef1 * sin2xy,
        )
    };
    ret + Complex64::new(0.5 * C * y * (sum2 + sum3), (0.5 * C * (sum5 - sum4)).copysign(z.re))
}

/// Complementary error function of complex argument.
///
/// Fails with [`Error::Overflow`] when `exp(-z^2)` leaves the double range,
/// in which case callers should work with [`faddeeva`] directly.
pub fn erfc_complex(z: Complex64) -> Result<Complex64> {
    check_finite(z, "erfc argument")?;
    if z.norm() >= 1e6 {
        return Err(Error::InvalidParameter(format!(
            "|z| = {} beyond the erfc range; use the asymptotic form",
            z.norm()
        )));
    }
    if z.re >= 0.0 {
        let e = exp_checked(-z * z, "exp(-z^2) in erfc")?;
        Ok(e * faddeeva_upper(Complex64::i() * z))
    } else {
        let e = exp_checked(-z * z, "exp(-z^2) in erfc")?;
        Ok(2.0 - e * faddeeva_upper(-Complex64::i() * z))
    }
}

/// Error function of complex argument.
pub fn erf_complex(z: Complex64) -> Result<Complex64> {
    check_finite(z, "erf argument")?;
    if z.norm() < 0.125 {
        // Maclaurin series keeps relative accuracy where 1 - erfc cancels.
        let z2 = z * z;
        let mut term = z;
        let mut sum = z;
        for n in 1..20 {
            term *= -z2 / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        return Ok(2.0 * INV_SQRT_PI * sum);
    }
    if z.re >= 0.0 {
        Ok(1.0 - erfc_complex(z)?)
    } else {
        Ok(erfc_complex(-z)? - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn erfc_at_origin_is_one() {
        assert_eq!(erfc_complex(Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn erfc_reflection() {
        let z = Complex64::new(0.7, 1.3);
        let s = erfc_complex(z).unwrap() + erfc_complex(-z).unwrap();
        assert!((s - 2.0).norm() < 1e-12, "{s}");
    }

    #[test]
    fn faddeeva_at_origin_is_one() {
        let w = faddeeva(Complex64::new(0.0, 0.0)).unwrap();
        assert!((w - 1.0).norm() < 1e-15);
    }

    #[test]
    fn faddeeva_on_imaginary_axis_is_real() {
        for &y in &[1e-3, 0.5, 3.0, 6.9, 7.1, 40.0, 1e4] {
            let w = faddeeva(Complex64::new(0.0, y)).unwrap();
            assert!(w.im.abs() <= 1e-12 * w.re.abs(), "y = {y}: {w}");
        }
    }

    #[test]
    fn faddeeva_rejects_lower_half_plane() {
        assert!(faddeeva(Complex64::new(1.0, -0.5)).is_err());
        let z = Complex64::new(1.0, -0.5);
        let expected = 2.0 * (-z * z).exp() - faddeeva(-z).unwrap();
        assert!(rel(faddeeva_any(z).unwrap(), expected) < 1e-14);
    }

    #[test]
    fn non_finite_input_rejected() {
        assert!(matches!(
            faddeeva(Complex64::new(f64::NAN, 1.0)),
            Err(Error::NonFinite(_))
        ));
        assert!(erfc_complex(Complex64::new(1.0, f64::INFINITY)).is_err());
    }

    #[test]
    fn erfc_overflow_is_signalled() {
        // exp(-z^2) = exp(900) along the imaginary direction
        let r = erfc_complex(Complex64::new(0.0, 30.0));
        assert!(matches!(r, Err(Error::Overflow(_))));
    }

    #[test]
    fn erf_small_and_large_agree_with_erfc() {
        for z in [Complex64::new(0.1, 0.05), Complex64::new(0.3, -0.2), Complex64::new(-2.0, 1.0)] {
            let a = erf_complex(z).unwrap();
            let b = 1.0 - erfc_complex(z).unwrap();
            assert!((a - b).norm() < 1e-14, "{z}: {a} vs {b}");
        }
    }
}
