//! Scalar special functions: `erf`, `erfc`, `erfinv` and the scaled and
//! logarithmic forms of `erfc` needed for large arguments.
//!
//! `erf`/`erfc` are the FreeBSD/musl rational approximations (via `libm`),
//! accurate to about one ulp. Everything else is built on top of them.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Above this point `erfcx` and `log_erfc` switch to the continued fraction.
const CF_THRESHOLD: f64 = 4.0;

/// Error function.
#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function, `1 - erf(x)` without cancellation.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function `exp(x^2) * erfc(x)`.
///
/// Finite for every finite `x >= 0`; for large negative `x` it grows like
/// `2 exp(x^2)` and overflows past `x ~ -26.6`.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        // erfc(-x) = 2 - erfc(x)
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x < CF_THRESHOLD {
        (x * x).exp() * erfc(x)
    } else {
        erfcx_cf(x)
    }
}

/// `ln(erfc(x))`, finite for all finite `x`.
pub fn log_erfc(x: f64) -> f64 {
    if x < CF_THRESHOLD {
        erfc(x).ln()
    } else {
        -x * x + erfcx_cf(x).ln()
    }
}

/// `ln(erf(x))` for `x > 0`; accurate near the origin and for large `x`
/// where `erf(x)` rounds to one.
pub fn log_erf(x: f64) -> f64 {
    if x > 1.0 {
        // erf = 1 - erfc; ln_1p keeps the tiny complement.
        (-erfc(x)).ln_1p()
    } else {
        erf(x).ln()
    }
}

/// Laplace continued fraction for `exp(x^2) erfc(x)`, evaluated with the
/// modified Lentz algorithm:
/// `erfcx(x) = (1/sqrt(pi)) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`.
fn erfcx_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for j in 1..500 {
        let a = 0.5 * j as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / (f * PI.sqrt())
}

/// Inverse error function on `(-1, 1)`.
///
/// Starts from Giles' single-precision rational approximation and polishes
/// with Newton steps; in the tails the residual is taken against `erfc` so
/// that `1 - p` is not lost to cancellation.
pub fn erfinv(p: f64) -> Result<f64> {
    if !(p.abs() < 1.0) {
        return Err(Error::Domain(format!("erfinv argument {p} outside (-1, 1)")));
    }
    if p == 0.0 {
        return Ok(p);
    }
    let sign = p.signum();
    let p = p.abs();
    let mut x = giles_initial(p);

    if p <= 0.5 {
        for _ in 0..3 {
            let r = erf(x) - p;
            let step = r / (FRAC_2_SQRT_PI * (-x * x).exp());
            x -= step;
            if step.abs() <= 1e-17 * x.abs() {
                break;
            }
        }
    } else {
        let q = 1.0 - p;
        for _ in 0..4 {
            // Newton on erfc(x) - q; Halley correction keeps it cubic.
            let deriv = FRAC_2_SQRT_PI * (-x * x).exp();
            let r = erfc(x) - q;
            let newton = r / deriv;
            let step = newton / (1.0 - x * newton);
            x += step;
            if step.abs() <= 1e-17 * x.abs() {
                break;
            }
        }
    }
    Ok(sign * x)
}

/// Giles, "Approximating the erfinv function" (GPU Computing Gems, 2011),
/// single-precision branch. Accurate to ~1e-7 relative, enough for two
/// Newton steps to reach full precision.
fn giles_initial(p: f64) -> f64 {
    let mut w = -((1.0 - p) * (1.0 + p)).ln();
    let r = if w < 5.0 {
        w -= 2.5;
        let mut r = 2.810_226_36e-08;
        r = 3.432_739_39e-07 + r * w;
        r = -3.523_387_7e-06 + r * w;
        r = -4.391_506_54e-06 + r * w;
        r = 0.000_218_580_87 + r * w;
        r = -0.001_253_725_03 + r * w;
        r = -0.004_177_681_64 + r * w;
        r = 0.246_640_727 + r * w;
        1.501_409_41 + r * w
    } else {
        w = w.sqrt() - 3.0;
        let mut r = -0.000_200_214_257;
        r = 0.000_100_950_558 + r * w;
        r = 0.001_349_343_22 + r * w;
        r = -0.003_673_428_44 + r * w;
        r = 0.005_739_507_73 + r * w;
        r = -0.007_622_461_3 + r * w;
        r = 0.009_438_870_47 + r * w;
        r = 1.001_674_06 + r * w;
        2.832_976_82 + r * w
    };
    r * p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // 30-digit mpmath values at the exact double inputs.
    const ERF_TABLE: &[(f64, f64)] = &[
        (0.1, 0.112_462_916_018_284_892_2),
        (0.5, 0.520_499_877_813_046_537_68),
        (0.6953, 0.674_541_513_368_386_798_16),
        (1.0, 0.842_700_792_949_714_869_34),
        (1.5, 0.966_105_146_475_310_727_07),
        (2.5, 0.999_593_047_982_555_041_06),
        (3.5, 0.999_999_256_901_627_658_59),
        (5.5, 0.999_999_999_999_992_642_15),
        (-0.8, -0.742_100_964_707_660_486_17),
    ];

    #[test]
    fn erf_matches_high_precision() {
        assert_eq!(erf(0.0), 0.0);
        for &(x, want) in ERF_TABLE {
            assert!(rel(erf(x), want) <= 1e-15, "erf({x})");
        }
        assert!((erf(0.6953) - 0.674_54).abs() < 1e-4);
    }

    #[test]
    fn erf_is_odd_and_complementary() {
        for i in -600..=600 {
            let x = i as f64 / 100.0;
            assert_eq!(erf(-x), -erf(x));
            assert!((erf(x) + erfc(x) - 1.0).abs() <= 2e-16);
        }
    }

    #[test]
    fn erfc_values() {
        assert_eq!(erfc(0.0), 1.0);
        let table = [
            (0.3, 0.671_373_240_540_872_572_36),
            (2.0, 0.004_677_734_981_047_265_837_9),
            (5.0, 1.537_459_794_428_034_850_2e-12),
            (10.0, 2.088_487_583_762_544_757e-45),
            (26.0, 5.663_192_408_856_142_846_5e-296),
        ];
        for (x, want) in table {
            assert!(rel(erfc(x), want) <= 1e-13, "erfc({x})");
        }
        assert!(erfc(10.0) > 0.0);
    }

    #[test]
    fn erfc_sandwich_at_two() {
        let y: f64 = 2.0;
        let pre = FRAC_2_SQRT_PI * (-y * y).exp();
        let lo = pre / (y + (y * y + 2.0).sqrt());
        let hi = pre / (y + (y * y + 4.0 / PI).sqrt());
        let v = erfc(y);
        assert!(lo < v && v <= hi);
    }

    #[test]
    fn log_erfc_values() {
        assert_eq!(log_erfc(0.0), 0.0);
        let table = [
            (-3.0, 0.693_136_135_250_446_810_32),
            (-0.5, 0.419_039_147_775_559_580_36),
            (0.5, -0.735_011_129_837_084_403_03),
            (3.0, -10.720_363_041_981_112_568),
            (5.0, -27.200_889_545_537_434_422),
            (8.0, -66.659_471_970_805_161_49),
            (20.0, -403.569_343_334_104_234_96),
            (30.0, -903.974_117_110_643_878_08),
        ];
        for (x, want) in table {
            assert!(rel(log_erfc(x), want) <= 1e-12, "log_erfc({x})");
        }
        assert!(rel(log_erfc(5.0), erfc(5.0).ln()) <= 1e-12);
        let lead = -400.0 - (20.0 * PI.sqrt()).ln();
        assert!((log_erfc(20.0) - lead).abs() < 1e-2);
    }

    #[test]
    fn log_erfc_is_continuous_across_switch() {
        let below = log_erfc(CF_THRESHOLD - 1e-12);
        let above = log_erfc(CF_THRESHOLD);
        assert!((below - above).abs() < 1e-11);
        assert!((erfcx(CF_THRESHOLD - 1e-12) - erfcx(CF_THRESHOLD)).abs() < 1e-12);
    }

    #[test]
    fn erfcx_negative_branch() {
        let x: f64 = -1.3;
        assert!(rel(erfcx(x), (x * x).exp() * erfc(x)) < 1e-14);
    }

    #[test]
    fn erfinv_values() {
        assert_eq!(erfinv(0.0).unwrap(), 0.0);
        let table = [
            (0.674_73, 0.695_570_934_023_600_849_09),
            (0.1, 0.088_855_990_494_257_687_016),
            (0.5, 0.476_936_276_204_469_873_38),
            (0.9, 1.163_087_153_676_674_086_7),
            (0.999, 2.326_753_765_513_524_670_6),
            (0.999_999, 3.458_910_737_275_498_777_5),
            (-0.3, -0.272_462_714_726_754_355_62),
        ];
        for (p, want) in table {
            assert!(rel(erfinv(p).unwrap(), want) <= 1e-13, "erfinv({p})");
        }
    }

    #[test]
    fn erfinv_residual_and_roundtrip() {
        for i in 1..2000 {
            let p = -1.0 + i as f64 / 1000.0;
            let x = erfinv(p).unwrap();
            assert!((erf(x) - p).abs() <= 1e-14, "p = {p}");
        }
        assert!((erfinv(erf(1.25)).unwrap() - 1.25).abs() <= 1e-12);
        for i in 0..=1000 {
            let x = -5.0 + i as f64 / 100.0;
            if x.abs() > 5.0 {
                continue;
            }
            let back = erfinv(erf(x));
            // erf(x) rounds to one past x ~ 5.9; at 5 it is still < 1.
            let back = back.unwrap();
            // Accuracy degrades like eps / erf'(x) in the tail.
            let tol = 1e-12_f64.max(2.2e-16 / (FRAC_2_SQRT_PI * (-x * x).exp()));
            assert!((back - x).abs() <= tol, "x = {x}: {back}");
        }
    }

    #[test]
    fn erfinv_domain() {
        assert!(erfinv(1.0).is_err());
        assert!(erfinv(-1.0).is_err());
        assert!(erfinv(f64::NAN).is_err());
    }
}
