//! Large-deviation rate of the failure (upper tail) or success (lower tail)
//! probability, and the closed-form optimizers that produce it.
//!
//! Both defining equations are solved in `q = erfinv((1 - alpha)/(1 - b))`
//! space, where they are strictly monotone on explicit brackets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_alpha, check_eta, hidden_to_partial, Model, Regime};
use crate::pt::{solve_alpha_w, validate_grid};
use crate::roots::{bisect, expand_upper};
use crate::specfun::{erf, erfinv, log_erf, log_erfc};

const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;
const Q_FLOOR: f64 = 1e-14;
const ON_CURVE_TOL: f64 = 1e-9;

/// Closed-form solution at one `(alpha, beta, eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdpSolution {
    pub beta1: f64,
    pub beta0: f64,
    pub q1: f64,
    pub q0: f64,
    pub nu: f64,
    pub a0: f64,
    pub c3: f64,
    pub gamma: f64,
    /// Exponential decay rate; never positive.
    pub rate: f64,
    pub regime: Regime,
}

/// A hidden-model solution: the transformed partial solution plus the two
/// thresholds scaled back to hidden units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiddenLdpSolution {
    pub beta1_hp: f64,
    pub beta0_hp: f64,
    pub base: LdpSolution,
}

impl HiddenLdpSolution {
    pub fn from_base(base: LdpSolution, eta_hp: f64) -> Self {
        let s = 2.0 - eta_hp;
        HiddenLdpSolution { beta1_hp: base.beta1 / s, beta0_hp: base.beta0 / s, base }
    }
}

fn check_triple(alpha: f64, beta: f64, eta: f64) -> Result<()> {
    check_alpha(alpha)?;
    check_eta(eta)?;
    if !(beta > 0.0 && beta < alpha) {
        return Err(Error::Domain(format!("need 0 < beta < alpha, got beta = {beta}, alpha = {alpha}")));
    }
    Ok(())
}

/// Root `q1` of `(1 - alpha) e^{-q^2} / (sqrt(pi) erf(q) (alpha - eta beta) q) = 1`
/// and the matching `beta1 = 1 - (1 - alpha)/erf(q1)`.
pub fn solve_beta1(alpha: f64, beta: f64, eta: f64) -> Result<(f64, f64)> {
    check_triple(alpha, beta, eta)?;
    let lead = ((1.0 - alpha) / (alpha - eta * beta)).ln() - LN_SQRT_PI;
    // log of the left side minus zero; decreasing in q.
    let f = |q: f64| lead - q * q - q.ln() - log_erf(q);
    let hi = expand_upper("q1", f, 1.0, 2.0, 1e3, true)?;
    let q1 = bisect("q1", f, Q_FLOOR, hi, 0.0)?;
    Ok((1.0 - (1.0 - alpha) / erf(q1), q1))
}

/// Root `q0` of `e^{-q^2} / (sqrt(pi) q) = c erfc(q)`, `c = (alpha - eta beta)/(alpha - beta)`,
/// and `beta0 = 1 - (1 - alpha)/erf(q0)`. `beta0` may be negative.
pub fn solve_beta0(alpha: f64, beta: f64, eta: f64) -> Result<(f64, f64)> {
    check_triple(alpha, beta, eta)?;
    let c = (alpha - eta * beta) / (alpha - beta);
    if !(c > 1.0) {
        return Err(Error::Degenerate(format!(
            "c = (alpha - eta beta)/(alpha - beta) = {c} must exceed 1 (eta = {eta})"
        )));
    }
    let ln_c = c.ln();
    // log(left / right); decreasing in q, +inf at zero, -> -ln c at infinity.
    let f = |q: f64| -q * q - q.ln() - LN_SQRT_PI - log_erfc(q) - ln_c;
    let mut hi = 1.0 / (2.0 * c * (c - 1.0)).sqrt();
    if f(hi) >= 0.0 {
        hi *= 1.1;
    }
    let q0 = bisect("q0", f, Q_FLOOR, hi, 0.0)?;
    Ok((1.0 - (1.0 - alpha) / erf(q0), q0))
}

/// Residual of the `beta1` equation written in `beta` space.
pub fn beta1_residual(alpha: f64, beta: f64, eta: f64, beta1: f64) -> Result<f64> {
    let q = erfinv((1.0 - alpha) / (1.0 - beta1))?;
    let lhs = (1.0 - beta1) * (2.0 / std::f64::consts::PI).sqrt() * (-q * q).exp()
        / ((alpha - eta * beta) * std::f64::consts::SQRT_2 * q);
    Ok(lhs - 1.0)
}

/// Residual of the `beta0` equation in `q0` space, relative to its right side.
pub fn beta0_residual(alpha: f64, beta: f64, eta: f64, q0: f64) -> f64 {
    let c = (alpha - eta * beta) / (alpha - beta);
    let lhs = -q0 * q0 - q0.ln() - LN_SQRT_PI;
    (lhs - log_erfc(q0) - c.ln()).exp_m1()
}

/// Full partial-model solution.
pub fn ldp_solution(alpha: f64, beta: f64, eta: f64) -> Result<LdpSolution> {
    check_triple(alpha, beta, eta)?;
    let (beta1, q1) = solve_beta1(alpha, beta, eta)?;
    let (beta0, q0) = solve_beta0(alpha, beta, eta)?;
    let alpha_w = solve_alpha_w(beta, eta, Model::Partial)?;
    let regime = if (alpha - alpha_w).abs() <= ON_CURVE_TOL {
        Regime::OnCurve
    } else if alpha > alpha_w {
        Regime::UpperTail
    } else {
        Regime::LowerTail
    };

    let nu = std::f64::consts::SQRT_2 * q1;
    let a0 = q1 / q0;
    let sa = alpha.sqrt();
    let c3 = (1.0 - a0 * a0) * sa / a0;
    let gamma = sa / (2.0 * a0);
    // With 1 - b = (1 - alpha)/erf(q) the last log's argument
    // (alpha - beta)(1 - beta0)/((alpha - beta0)(1 - beta1)) becomes
    // (alpha - beta) erf(q1)/((1 - alpha) erfc(q0)), which stays accurate
    // when erf(q0) rounds to one and alpha - beta0 cancels.
    let ln_1m_alpha = (1.0 - alpha).ln();
    let rate = (alpha - eta * beta) * (q1 / q0).ln()
        + (1.0 - beta) * ((1.0 - beta).ln() + log_erf(q1) - ln_1m_alpha)
        + beta * (1.0 - eta) * ((alpha - beta).ln() + log_erf(q1) - ln_1m_alpha - log_erfc(q0));
    // The exact rate is a non-positive quadratic near the curve; drop
    // positive rounding noise there.
    let rate = rate.min(0.0);

    Ok(LdpSolution { beta1, beta0, q1, q0, nu, a0, c3, gamma, rate, regime })
}

/// Hidden-model solution through the partial-model substitution.
pub fn ldp_solution_hidden(alpha: f64, beta_hp: f64, eta_hp: f64) -> Result<HiddenLdpSolution> {
    check_eta(eta_hp)?;
    let (beta, eta) = hidden_to_partial(beta_hp, eta_hp);
    if beta >= 1.0 {
        return Err(Error::Domain(format!("(2 - eta) * beta = {beta} must be below 1")));
    }
    let base = ldp_solution(alpha, beta, eta)?;
    Ok(HiddenLdpSolution::from_base(base, eta_hp))
}

/// Solution for either model; for the hidden model this is the transformed
/// partial solution (use [`HiddenLdpSolution::from_base`] for hidden units).
pub fn ldp_for(model: Model, alpha: f64, beta: f64, eta: f64) -> Result<LdpSolution> {
    match model {
        Model::Partial => ldp_solution(alpha, beta, eta),
        Model::HiddenPartial => ldp_solution_hidden(alpha, beta, eta).map(|h| h.base),
    }
}

/// Solutions along a strictly increasing `alpha` grid.
pub fn rate_curve(beta: f64, eta: f64, model: Model, alpha_grid: &[f64]) -> Result<Vec<Result<(f64, LdpSolution)>>> {
    validate_grid(alpha_grid)?;
    Ok(alpha_grid
        .par_iter()
        .map(|&a| ldp_for(model, a, beta, eta).map(|s| (a, s)))
        .collect())
}
