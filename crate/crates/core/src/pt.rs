//! Weak phase-transition curves for partial and hidden-partial recovery.
//!
//! The threshold is the root in `beta` of `xi(alpha, beta, eta) = 1`, where
//! `xi - 1` is strictly decreasing in `beta` on `[0, alpha)` and strictly
//! increasing in `alpha` on `(beta, 1)`. Both solvers are plain bisection
//! followed by a short finite-difference Newton polish.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_alpha, check_eta, hidden_to_partial, Model};
use crate::roots::bisect;
use crate::specfun::erfinv;

/// Distance kept from the open ends of every bracket.
const EDGE: f64 = 1e-12;
const BISECT_WIDTH: f64 = 1e-12;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// A solved threshold. `residual` is `|xi - 1|` at `beta_w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtPoint {
    pub alpha: f64,
    pub beta_w: f64,
    pub residual: f64,
}

// (1 - b) sqrt(2/pi) e^{-q^2} / (d sqrt 2 q) with q = erfinv((1 - alpha) / (1 - b)).
fn xi_core(alpha: f64, one_minus_b: f64, denom: f64) -> Result<f64> {
    let arg = (1.0 - alpha) / one_minus_b;
    if !(arg > 0.0 && arg < 1.0) {
        return Err(Error::Domain(format!("erfinv argument {arg} outside (0, 1)")));
    }
    let q = erfinv(arg)?;
    Ok(one_minus_b * FRAC_1_SQRT_PI * (-q * q).exp() / (denom * q))
}

/// Partial-model characterization; equals one exactly on the weak threshold.
pub fn xi_partial(alpha: f64, beta: f64, eta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_eta(eta)?;
    if !(beta >= 0.0 && beta < alpha) {
        return Err(Error::Domain(format!("beta = {beta} must lie in [0, alpha = {alpha})")));
    }
    xi_core(alpha, 1.0 - beta, alpha - eta * beta)
}

/// Hidden-partial characterization, written directly in hidden parameters.
pub fn xi_hidden(alpha: f64, beta_hp: f64, eta_hp: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_eta(eta_hp)?;
    let scaled = beta_hp * (2.0 - eta_hp);
    if !(beta_hp >= 0.0 && scaled < 1.0) {
        return Err(Error::Domain(format!("(2 - eta) * beta = {scaled} must lie in [0, 1)")));
    }
    if beta_hp >= alpha {
        return Err(Error::Domain(format!("beta = {beta_hp} must be below alpha = {alpha}")));
    }
    xi_core(alpha, 1.0 - scaled, alpha - beta_hp)
}

/// `xi` for either model.
pub fn xi(model: Model, alpha: f64, beta: f64, eta: f64) -> Result<f64> {
    match model {
        Model::Partial => xi_partial(alpha, beta, eta),
        Model::HiddenPartial => xi_hidden(alpha, beta, eta),
    }
}

fn degenerate_eta(eta: f64) -> Error {
    Error::Degenerate(format!(
        "eta = {eta}: with the whole support known xi stays above one and the threshold sits at beta = alpha"
    ))
}

/// Partial-model threshold in `beta`, returned unpolished in `(0, alpha)`.
fn beta_w_partial(alpha: f64, eta: f64) -> Result<f64> {
    if eta >= 1.0 {
        return Err(degenerate_eta(eta));
    }
    let f = |b: f64| xi_partial(alpha, b, eta).map_or(f64::NAN, |v| v - 1.0);
    let b = bisect("beta_w", f, EDGE, alpha - EDGE, BISECT_WIDTH)?;
    Ok(polish(f, b, EDGE, alpha - EDGE))
}

/// Up to three Newton steps with a central-difference slope;
/// a step is kept only when it lowers `|f|`.
fn polish<F: Fn(f64) -> f64>(f: F, mut x: f64, lo: f64, hi: f64) -> f64 {
    let mut fx = f(x).abs();
    for _ in 0..3 {
        let h = 1e-7 * x.abs().max(1e-3);
        let slope = (f(x + h) - f(x - h)) / (2.0 * h);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let cand = x - f(x) / slope;
        if !(cand > lo && cand < hi) {
            break;
        }
        let fc = f(cand).abs();
        if fc < fx {
            x = cand;
            fx = fc;
        } else {
            break;
        }
    }
    x
}

/// Weak threshold `beta_w(alpha)` for the given model.
pub fn solve_beta_w(alpha: f64, eta: f64, model: Model) -> Result<PtPoint> {
    check_alpha(alpha)?;
    check_eta(eta)?;
    let beta_w = match model {
        Model::Partial => beta_w_partial(alpha, eta)?,
        Model::HiddenPartial => {
            let (_, eta_p) = hidden_to_partial(0.0, eta);
            beta_w_partial(alpha, eta_p)? / (2.0 - eta)
        }
    };
    let residual = (xi(model, alpha, beta_w, eta)? - 1.0).abs();
    Ok(PtPoint { alpha, beta_w, residual })
}

/// Weak threshold `alpha_w(beta)`, the inverse of [`solve_beta_w`].
pub fn solve_alpha_w(beta: f64, eta: f64, model: Model) -> Result<f64> {
    check_eta(eta)?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!("beta = {beta} must lie in (0, 1)")));
    }
    let (beta_p, eta_p) = match model {
        Model::Partial => (beta, eta),
        Model::HiddenPartial => hidden_to_partial(beta, eta),
    };
    if beta_p >= 1.0 - 2.0 * EDGE {
        return Err(Error::Domain(format!("(2 - eta) * beta = {beta_p} must be below 1")));
    }
    if eta_p >= 1.0 {
        return Err(degenerate_eta(eta));
    }
    let f = |a: f64| xi_partial(a, beta_p, eta_p).map_or(f64::NAN, |v| v - 1.0);
    let lo = beta_p + EDGE;
    let hi = 1.0 - EDGE;
    let a = bisect("alpha_w", f, lo, hi, BISECT_WIDTH)?;
    Ok(polish(f, a, lo, hi))
}

/// Thresholds over a strictly increasing grid of `alpha` values in `(0, 1)`.
/// The outer error is a grid problem; inner errors are per-point failures.
pub fn pt_curve(eta: f64, model: Model, alpha_grid: &[f64]) -> Result<Vec<Result<PtPoint>>> {
    check_eta(eta)?;
    validate_grid(alpha_grid)?;
    Ok(alpha_grid.par_iter().map(|&a| solve_beta_w(a, eta, model)).collect())
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("empty alpha grid".into()));
    }
    for &a in grid {
        check_alpha(a)?;
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!("alpha grid not strictly increasing at {} -> {}", w[0], w[1])));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xi_anchor_points() {
        assert!((xi_partial(0.5, 0.25896, 0.5).unwrap() - 1.0).abs() < 2e-4);
        assert!(xi_partial(0.5, 0.0, 0.5).unwrap() > 1.0);
        // 30-digit oracle
        let v = xi_partial(0.5, 0.25896, 0.0).unwrap();
        assert!((v - 0.741_037_131_499_340_822_43).abs() < 1e-10);
        assert!((xi_hidden(0.5, 0.27153, 0.75).unwrap() - 1.0).abs() < 2e-4);
        assert!(xi_hidden(0.5, 0.0, 0.75).unwrap() > 1.0);
    }

    #[test]
    fn xi_domain_errors() {
        assert!(xi_partial(0.5, 0.5, 0.5).is_err());
        assert!(xi_partial(0.5, 0.6, 0.5).is_err());
        assert!(xi_hidden(0.9, 0.6, 0.0).is_err());
    }

    #[test]
    fn beta_w_anchors() {
        let p = solve_beta_w(0.5, 0.5, Model::Partial).unwrap();
        assert!((p.beta_w - 0.25896).abs() < 1e-5);
        assert!(p.residual <= 1e-10);
        let h = solve_beta_w(0.5, 0.75, Model::HiddenPartial).unwrap();
        assert!((h.beta_w - 0.27153).abs() < 1e-5);
        assert!(h.residual <= 1e-10);
    }

    #[test]
    fn beta_w_at_point_seven_matches_grid_scan() {
        // Independent locate: coarse scan for the sign change, then refine
        // by repeated subdivision.
        let f = |b: f64| xi_partial(0.7, b, 0.5).unwrap() - 1.0;
        let mut lo = 0.0;
        let mut step = 0.01;
        while f(lo + step) > 0.0 {
            lo += step;
        }
        for _ in 0..12 {
            step /= 10.0;
            while f(lo + step) > 0.0 {
                lo += step;
            }
        }
        let p = solve_beta_w(0.7, 0.5, Model::Partial).unwrap();
        assert!((p.beta_w - lo).abs() < 1e-10);
        assert!(p.residual <= 1e-10);
    }

    #[test]
    fn alpha_w_round_trips() {
        assert!((solve_alpha_w(0.25896, 0.5, Model::Partial).unwrap() - 0.5).abs() < 1e-4);
        assert!((solve_alpha_w(0.27153, 0.75, Model::HiddenPartial).unwrap() - 0.5).abs() < 1e-4);
        for a in [0.3, 0.5, 0.8] {
            for model in [Model::Partial, Model::HiddenPartial] {
                let b = solve_beta_w(a, 0.5, model).unwrap().beta_w;
                let back = solve_alpha_w(b, 0.5, model).unwrap();
                assert!((back - a).abs() < 1e-8, "{model:?} {a} -> {b} -> {back}");
            }
        }
    }

    #[test]
    fn fully_known_support_is_degenerate() {
        assert!(matches!(solve_beta_w(0.5, 1.0, Model::Partial), Err(Error::Degenerate(_))));
        assert!(matches!(solve_alpha_w(0.2, 1.0, Model::HiddenPartial), Err(Error::Degenerate(_))));
    }

    #[test]
    fn curves() {
        let single = pt_curve(0.0, Model::Partial, &[0.5]).unwrap();
        let direct = solve_beta_w(0.5, 0.0, Model::Partial).unwrap();
        assert_eq!(single[0].as_ref().unwrap().beta_w, direct.beta_w);

        let grid: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
        let c0 = pt_curve(0.0, Model::Partial, &grid).unwrap();
        let c5 = pt_curve(0.5, Model::Partial, &grid).unwrap();
        for (a, b) in c0.iter().zip(&c5) {
            assert!(b.as_ref().unwrap().beta_w > a.as_ref().unwrap().beta_w);
        }
        for w in c5.windows(2) {
            assert!(w[1].as_ref().unwrap().beta_w > w[0].as_ref().unwrap().beta_w);
        }
        let hid = pt_curve(0.75, Model::HiddenPartial, &[0.4, 0.5, 0.6]).unwrap();
        assert!((hid[1].as_ref().unwrap().beta_w - 0.27153).abs() < 1e-5);
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(pt_curve(0.5, Model::Partial, &[0.5, 0.4]).is_err());
        assert!(pt_curve(0.5, Model::Partial, &[0.5, 1.0]).is_err());
        assert!(pt_curve(0.5, Model::Partial, &[]).is_err());
    }
}
