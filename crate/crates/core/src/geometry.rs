//! Angle-exponent decomposition of the rate: a combinatorial term plus an
//! internal-angle term minus an external-angle term, each a one-dimensional
//! minimization over `y > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldp::{solve_beta0, solve_beta1};
use crate::model::{check_alpha, check_eta, hidden_to_partial, Model};
use crate::roots::{bisect, golden_min};
use crate::specfun::{erfcx, log_erf, log_erfc};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const LN_2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Optimizer taken from the `beta0`/`beta1` solvers.
    ClosedForm,
    /// Numerical minimization, independent of the rate solvers.
    DirectMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryDecomposition {
    pub psi_com: f64,
    pub psi_int: f64,
    pub psi_ext: f64,
    pub psi_net: f64,
    pub y_int: f64,
    pub y_ext: f64,
}

fn check(alpha: f64, beta: f64, eta: f64) -> Result<()> {
    check_alpha(alpha)?;
    check_eta(eta)?;
    if !(beta > 0.0 && beta < alpha) {
        return Err(Error::Domain(format!("need 0 < beta < alpha, got beta = {beta}, alpha = {alpha}")));
    }
    Ok(())
}

/// Combinatorial exponent.
pub fn psi_com(alpha: f64, beta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(beta > 0.0 && beta < alpha) {
        return Err(Error::Domain(format!("need 0 < beta < alpha, got beta = {beta}, alpha = {alpha}")));
    }
    let d = alpha - beta;
    Ok(d * LN_2 - d * (d / (1.0 - beta)).ln() - (1.0 - alpha) * ((1.0 - alpha) / (1.0 - beta)).ln())
}

/// Internal-angle objective `(alpha - eta beta) y^2 + (alpha - beta) ln erfc(y)`.
pub fn internal_objective(alpha: f64, beta: f64, eta: f64, y: f64) -> f64 {
    (alpha - eta * beta) * y * y + (alpha - beta) * log_erfc(y)
}

fn internal_slope(alpha: f64, beta: f64, eta: f64, y: f64) -> f64 {
    2.0 * (alpha - eta * beta) * y - (alpha - beta) * FRAC_2_SQRT_PI / erfcx(y)
}

/// External-angle objective `(alpha - eta beta) y^2 - (1 - alpha) ln erf(y)`.
pub fn external_objective(alpha: f64, beta: f64, eta: f64, y: f64) -> f64 {
    (alpha - eta * beta) * y * y - (1.0 - alpha) * log_erf(y)
}

fn external_slope(alpha: f64, beta: f64, eta: f64, y: f64) -> f64 {
    // d/dy ln erf(y) = (2/sqrt pi) e^{-y^2} / erf(y)
    let dlog = FRAC_2_SQRT_PI * (-y * y - log_erf(y)).exp();
    2.0 * (alpha - eta * beta) * y - (1.0 - alpha) * dlog
}

/// Minimizes a convex coercive function on `y > 0`: golden section on a
/// slope-verified bracket, then bisection on the slope.
fn direct_min<F, D>(f: F, slope: D) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut lo = 1e-8;
    let mut hi = 10.0;
    while slope(lo) > 0.0 {
        lo *= 1e-2;
        if lo < 1e-300 {
            return Err(Error::Bracket { what: "direct_min lower", lo, hi, f_lo: slope(lo), f_hi: slope(hi) });
        }
    }
    while slope(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::Bracket { what: "direct_min upper", lo, hi, f_lo: slope(lo), f_hi: slope(hi) });
        }
    }
    let (g, _) = golden_min(&f, lo, hi, 1e-4 * (hi - lo));
    // Narrow the slope bracket around the golden estimate when possible.
    let w = 1e-3 * (hi - lo);
    let (mut a, mut b) = (lo, hi);
    if g - w > lo && slope(g - w) < 0.0 {
        a = g - w;
    }
    if g + w < hi && slope(g + w) > 0.0 {
        b = g + w;
    }
    let y = bisect("direct_min slope", &slope, a, b, 0.0)?;
    Ok((f(y), y))
}

/// Internal-angle exponent and its minimizer.
pub fn psi_int(alpha: f64, beta: f64, eta: f64, method: Method) -> Result<(f64, f64)> {
    check(alpha, beta, eta)?;
    let f = |y: f64| internal_objective(alpha, beta, eta, y);
    let (v, y) = match method {
        Method::ClosedForm => {
            // q0 = erfinv((1 - alpha)/(1 - beta0)), taken from the solver so
            // it survives when erf(q0) rounds to one.
            let (_, y) = solve_beta0(alpha, beta, eta)?;
            (f(y), y)
        }
        Method::DirectMin => direct_min(f, |y| internal_slope(alpha, beta, eta, y))?,
    };
    Ok((v - (alpha - beta) * LN_2, y))
}

/// External-angle exponent and its minimizer.
pub fn psi_ext(alpha: f64, beta: f64, eta: f64, method: Method) -> Result<(f64, f64)> {
    check(alpha, beta, eta)?;
    let f = |y: f64| external_objective(alpha, beta, eta, y);
    match method {
        Method::ClosedForm => {
            let (_, y) = solve_beta1(alpha, beta, eta)?;
            Ok((f(y), y))
        }
        Method::DirectMin => direct_min(f, |y| external_slope(alpha, beta, eta, y)),
    }
}

/// Full decomposition, with both angle terms found by direct minimization.
pub fn psi_net(alpha: f64, beta: f64, eta: f64) -> Result<GeometryDecomposition> {
    let psi_com = psi_com(alpha, beta)?;
    let (psi_int, y_int) = psi_int(alpha, beta, eta, Method::DirectMin)?;
    let (psi_ext, y_ext) = psi_ext(alpha, beta, eta, Method::DirectMin)?;
    Ok(GeometryDecomposition {
        psi_com,
        psi_int,
        psi_ext,
        psi_net: psi_com + psi_int - psi_ext,
        y_int,
        y_ext,
    })
}

/// [`psi_net`] for either model; hidden parameters are mapped to partial.
pub fn psi_net_for(model: Model, alpha: f64, beta: f64, eta: f64) -> Result<GeometryDecomposition> {
    match model {
        Model::Partial => psi_net(alpha, beta, eta),
        Model::HiddenPartial => {
            let (b, e) = hidden_to_partial(beta, eta);
            psi_net(alpha, b, e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldp::ldp_solution;
    use crate::specfun::erfinv;
    use crate::roots::central_diff;

    const B: f64 = 0.25896;

    #[test]
    fn psi_com_values() {
        assert!(psi_com(0.5, 0.25).unwrap() > 0.0);
        // 30-digit oracle
        assert!((psi_com(0.6, 0.3).unwrap() - 0.685_979_827_458_313_751_45).abs() < 1e-13);
        assert!(psi_com(0.5, 0.5).is_err());
    }

    #[test]
    fn methods_agree() {
        for a in [0.35, 0.45, 0.5, 0.6, 0.8, 0.95] {
            let (ci, yi) = psi_int(a, B, 0.5, Method::ClosedForm).unwrap();
            let (di, yd) = psi_int(a, B, 0.5, Method::DirectMin).unwrap();
            assert!((ci - di).abs() <= 1e-9, "int {a}: {ci} vs {di}");
            assert!((yi - yd).abs() <= 1e-6);
            let (ce, _) = psi_ext(a, B, 0.5, Method::ClosedForm).unwrap();
            let (de, _) = psi_ext(a, B, 0.5, Method::DirectMin).unwrap();
            assert!((ce - de).abs() <= 1e-9, "ext {a}: {ce} vs {de}");
        }
    }

    #[test]
    fn minimizers_are_stationary() {
        let (_, yi) = psi_int(0.5, B, 0.5, Method::DirectMin).unwrap();
        let d = central_diff(|y| internal_objective(0.5, B, 0.5, y), yi, 1e-6);
        assert!(d.abs() <= 1e-8);
        let (_, ye) = psi_ext(0.5, B, 0.5, Method::DirectMin).unwrap();
        let d = central_diff(|y| external_objective(0.5, B, 0.5, y), ye, 1e-6);
        assert!(d.abs() <= 1e-8);
        let (_, y6) = psi_int(0.6, B, 0.5, Method::DirectMin).unwrap();
        assert!((y6 - erfinv(0.4 / (1.0 - 0.4946)).unwrap()).abs() < 1e-4);
        let s = ldp_solution(0.6, B, 0.5).unwrap();
        assert!((y6 - s.q0).abs() < 1e-9);
        let (_, ye6) = psi_ext(0.6, B, 0.5, Method::DirectMin).unwrap();
        assert!((ye6 - s.nu / std::f64::consts::SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn net_matches_rate() {
        assert!(psi_net(0.5, B, 0.5).unwrap().psi_net.abs() <= 1e-9);
        assert!((psi_net(0.6, B, 0.5).unwrap().psi_net + 0.0220).abs() <= 1e-4);
        assert!((psi_net(0.45, B, 0.5).unwrap().psi_net + 0.0063).abs() <= 1e-4);
        for a in [0.3, 0.4, 0.55, 0.7, 0.9, 0.99] {
            let g = psi_net(a, B, 0.5).unwrap();
            let r = ldp_solution(a, B, 0.5).unwrap().rate;
            assert!((g.psi_net - r).abs() <= 1e-9, "{a}: {} vs {r}", g.psi_net);
        }
    }
}
