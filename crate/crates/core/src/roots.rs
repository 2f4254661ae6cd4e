//! Bracketed one-dimensional solvers shared by the analytic modules.

use crate::error::{Error, Result};

const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 - sqrt 5) / 2

/// Bisection on a bracket with a sign change. Runs until the bracket is no
/// wider than `xtol` or stops shrinking in floating point.
pub(crate) fn bisect<F>(what: &'static str, f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.signum() != f_hi.signum()) || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Bracket { what, lo, hi, f_lo, f_hi });
    }
    let lo_negative = f_lo < 0.0;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Grows `hi` geometrically from `start` until `f(hi)` has the sign of
/// `want_negative`. Returns the first such point.
pub(crate) fn expand_upper<F>(what: &'static str, f: F, start: f64, factor: f64, limit: f64, want_negative: bool) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut hi = start;
    while hi <= limit {
        let v = f(hi);
        if (v < 0.0) == want_negative && !v.is_nan() {
            return Ok(hi);
        }
        hi *= factor;
    }
    Err(Error::Bracket {
        what,
        lo: start,
        hi: limit,
        f_lo: f(start),
        f_hi: f(limit),
    })
}

/// Golden-section search for the minimum of a unimodal function on `[a, b]`.
pub(crate) fn golden_min<F>(f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut x1 = a + GOLDEN * (b - a);
    let mut x2 = b - GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..300 {
        if (b - a).abs() <= xtol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - GOLDEN * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Central finite difference.
#[cfg(test)]
pub(crate) fn central_diff<F>(f: F, x: f64, h: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect("sqrt2", |x| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bisect_decreasing() {
        let r = bisect("dec", |x| 1.0 - x, 0.0, 3.0, 1e-14).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bisect_reports_bad_bracket() {
        let e = bisect("none", |x| x * x + 1.0, -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(e, Error::Bracket { what: "none", .. }));
    }

    #[test]
    fn golden_min_parabola() {
        let (x, fx) = golden_min(|x| (x - 0.3) * (x - 0.3) + 1.0, -2.0, 5.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expand_upper_finds_sign() {
        let hi = expand_upper("exp", |x| 10.0 - x, 1.0, 2.0, 1e6, true).unwrap();
        assert_eq!(hi, 16.0);
    }
}
