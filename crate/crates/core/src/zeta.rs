//! The three-variable objective whose optimum is the rate function, its
//! analytic gradient, and a derivative-free optimizer used to confirm that
//! the closed-form point is the optimum.
//!
//! Upper tail: plain minimization over `c3 >= 0`, `0 < a0 <= 1`.
//! Lower tail: `min over c3 <= 0` of `max over nu >= 0, a0 >= 1`; the
//! closed-form point is a saddle there, so a plain minimizer would run off.

use std::cell::Cell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldp::ldp_solution;
use crate::model::{check_alpha, check_eta, Regime};
use crate::roots::golden_min;
use crate::specfun::{erf, erfcx};

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A candidate optimizer `(c3, nu, a0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaPoint {
    pub c3: f64,
    pub nu: f64,
    pub a0: f64,
}

impl ZetaPoint {
    pub fn new(c3: f64, nu: f64, a0: f64) -> Self {
        ZetaPoint { c3, nu, a0 }
    }

    fn to_array(self) -> [f64; 3] {
        [self.c3, self.nu, self.a0]
    }

    fn from_array(x: [f64; 3]) -> Self {
        ZetaPoint { c3: x[0], nu: x[1], a0: x[2] }
    }
}

impl std::fmt::Display for ZetaPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(c3 = {}, nu = {}, a0 = {})", self.c3, self.nu, self.a0)
    }
}

/// Spherical term `g c3 - (alpha/2) ln(1 - c3/(2g))`, `g = (c3 - sqrt(c3^2 + 4 alpha))/4`.
/// Valid for either sign of `c3`.
pub fn i_sph(c3: f64, alpha: f64) -> f64 {
    let g = (c3 - (c3 * c3 + 4.0 * alpha).sqrt()) / 4.0;
    g * c3 - 0.5 * alpha * (-c3 / (2.0 * g)).ln_1p()
}

/// Spherical term in the form used for the lower tail, with `g+ = -g`;
/// identical to [`i_sph`].
pub fn i_sph_lower(c3: f64, alpha: f64) -> f64 {
    let gp = (-c3 + (c3 * c3 + 4.0 * alpha).sqrt()) / 4.0;
    -gp * c3 - 0.5 * alpha * (c3 / (2.0 * gp)).ln_1p()
}

struct Pieces {
    /// `erf(nu / sqrt 2)`
    erf_nu: f64,
    /// `e^{-nu^2/2} erfcx(nu / (sqrt 2 a0))`
    scaled_tail: f64,
    w1: f64,
    ln_w2: f64,
}

fn pieces(nu: f64, a0: f64) -> Pieces {
    let erf_nu = erf(nu * FRAC_1_SQRT_2);
    let scaled_tail = (-0.5 * nu * nu).exp() * erfcx(nu * FRAC_1_SQRT_2 / a0);
    Pieces {
        erf_nu,
        scaled_tail,
        w1: scaled_tail / a0 + erf_nu,
        ln_w2: (1.0 - a0 * a0) * nu * nu / (2.0 * a0 * a0) - a0.ln(),
    }
}

// NaN outside the domain; +inf when a0 = 1 with c3 != 0.
fn zeta_raw(alpha: f64, beta: f64, eta: f64, c3: f64, nu: f64, a0: f64) -> f64 {
    if !(a0 > 0.0) || !nu.is_finite() || !c3.is_finite() {
        return f64::NAN;
    }
    let p = pieces(nu, a0);
    let coupling = if a0 == 1.0 {
        if c3 == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        c3 * c3 / (2.0 * (1.0 - a0 * a0))
    };
    -0.5 * c3 * c3
        + i_sph(c3, alpha)
        + (1.0 - beta) * p.w1.ln()
        + beta * (1.0 - eta) * p.ln_w2
        - beta * eta * a0.ln()
        + coupling
}

fn check_triple(alpha: f64, beta: f64, eta: f64) -> Result<()> {
    check_alpha(alpha)?;
    check_eta(eta)?;
    if !(beta > 0.0 && beta < alpha) {
        return Err(Error::Domain(format!("need 0 < beta < alpha, got beta = {beta}, alpha = {alpha}")));
    }
    Ok(())
}

/// Objective value. At `a0 = 1` the coupling term `c3^2 / (2(1 - a0^2))` is
/// taken as its limit zero, which requires `c3 = 0`.
pub fn zeta(alpha: f64, beta: f64, eta: f64, p: ZetaPoint) -> Result<f64> {
    check_triple(alpha, beta, eta)?;
    if !(p.a0 > 0.0) {
        return Err(Error::Domain(format!("a0 = {} must be positive", p.a0)));
    }
    if !(p.nu >= 0.0) {
        return Err(Error::Domain(format!("nu = {} must be non-negative", p.nu)));
    }
    if p.a0 == 1.0 && p.c3 != 0.0 {
        return Err(Error::Domain(format!("a0 = 1 requires c3 = 0, got c3 = {}", p.c3)));
    }
    Ok(zeta_raw(alpha, beta, eta, p.c3, p.nu, p.a0))
}

/// Analytic partial derivatives `(d/dc3, d/dnu, d/da0)`.
///
/// The `a0` component is the published closed form, which already has the
/// coupling term evaluated on `c3 = (1 - a0^2) sqrt(alpha)/a0`; that
/// evaluation (`alpha / a0`) is swapped back for the general
/// `c3^2 a0 / (1 - a0^2)^2` so the gradient is exact off that curve too.
pub fn zeta_grad_analytic(alpha: f64, beta: f64, eta: f64, p: ZetaPoint) -> Result<(f64, f64, f64)> {
    check_triple(alpha, beta, eta)?;
    let ZetaPoint { c3, nu, a0 } = p;
    if !(a0 > 0.0) || a0 == 1.0 {
        return Err(Error::Domain(format!("gradient needs a0 > 0 and a0 != 1, got {a0}")));
    }
    let one_m = 1.0 - a0 * a0;
    let d_c3 = -c3 + c3 / one_m + (c3 - (c3 * c3 + 4.0 * alpha).sqrt()) / 2.0;

    let Pieces { erf_nu, scaled_tail, w1, .. } = pieces(nu, a0);
    let a3 = a0 * a0 * a0;
    let d_nu = one_m / (w1 * a3)
        * (beta * (1.0 - eta) * nu * erf_nu * a0
            + (1.0 - beta * eta) * nu * scaled_tail
            - (1.0 - beta) * SQRT_2_OVER_PI * a0 * (-0.5 * nu * nu).exp());

    let num = ((alpha - 1.0) * a0 * a0 - nu * nu * (1.0 - beta * eta)) * scaled_tail
        + (1.0 - beta) * SQRT_2_OVER_PI * a0 * nu * (-0.5 * nu * nu).exp()
        + ((alpha - beta) * a0 * a0 - beta * (1.0 - eta) * nu * nu) * a0 * erf_nu;
    let den = a3 * (scaled_tail + a0 * erf_nu);
    let d_a0 = num / den - alpha / a0 + c3 * c3 * a0 / (one_m * one_m);
    Ok((d_c3, d_nu, d_a0))
}

/// Central-difference gradient with step `h`.
pub fn zeta_grad_numeric(alpha: f64, beta: f64, eta: f64, p: ZetaPoint, h: f64) -> (f64, f64, f64) {
    let x = p.to_array();
    let mut g = [0.0; 3];
    for (i, gi) in g.iter_mut().enumerate() {
        let mut up = x;
        let mut dn = x;
        up[i] += h;
        dn[i] -= h;
        *gi = (zeta_raw(alpha, beta, eta, up[0], up[1], up[2]) - zeta_raw(alpha, beta, eta, dn[0], dn[1], dn[2]))
            / (2.0 * h);
    }
    (g[0], g[1], g[2])
}

/// Box for the search, per coordinate, closed on both ends.
#[derive(Clone, Copy)]
struct Bounds {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Bounds {
    fn contains(&self, x: &[f64; 3]) -> bool {
        (0..3).all(|i| x[i] >= self.lo[i] && x[i] <= self.hi[i])
    }

    fn clamp(&self, mut x: [f64; 3]) -> [f64; 3] {
        for i in 0..3 {
            x[i] = x[i].clamp(self.lo[i], self.hi[i]);
        }
        x
    }
}

const NU_MAX: f64 = 60.0;
const A0_EPS: f64 = 1e-9;
const LINE_TOL: f64 = 1e-11;
const MAX_SWEEPS: usize = 20_000;

/// Golden-section line minimization of `f(x + t d)` over the feasible part
/// of the line, starting from trial step `h`. Returns the new point and value.
fn line_min<F>(f: &F, bounds: &Bounds, x: [f64; 3], fx: f64, d: [f64; 3], h: f64) -> ([f64; 3], f64)
where
    F: Fn(&[f64; 3]) -> f64,
{
    let at = |t: f64| {
        let mut y = x;
        for i in 0..3 {
            y[i] += t * d[i];
        }
        y
    };
    // Largest feasible |t| in each direction.
    let mut t_hi = f64::INFINITY;
    let mut t_lo = f64::NEG_INFINITY;
    for i in 0..3 {
        if d[i] > 0.0 {
            t_hi = t_hi.min((bounds.hi[i] - x[i]) / d[i]);
            t_lo = t_lo.max((bounds.lo[i] - x[i]) / d[i]);
        } else if d[i] < 0.0 {
            t_hi = t_hi.min((bounds.lo[i] - x[i]) / d[i]);
            t_lo = t_lo.max((bounds.hi[i] - x[i]) / d[i]);
        }
    }
    if !(t_hi > t_lo) {
        return (x, fx);
    }
    let phi = |t: f64| {
        let v = f(&at(t));
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    // Bracket the minimum by stepping downhill with doubling.
    let step = h.min(t_hi.max(-t_lo));
    let (a, b);
    let fwd = step.min(t_hi);
    let f_fwd = phi(fwd);
    if f_fwd < fx {
        let (mut prev, mut cur) = (0.0, fwd);
        let mut f_cur = f_fwd;
        loop {
            let next = (2.0 * cur).min(t_hi);
            if next <= cur {
                a = prev;
                b = cur;
                break;
            }
            let f_next = phi(next);
            if f_next >= f_cur {
                a = prev;
                b = next;
                break;
            }
            prev = cur;
            cur = next;
            f_cur = f_next;
        }
    } else {
        let back = (-step).max(t_lo);
        let f_back = phi(back);
        if f_back < fx {
            let (mut prev, mut cur) = (0.0, back);
            let mut f_cur = f_back;
            loop {
                let next = (2.0 * cur).max(t_lo);
                if next >= cur {
                    a = cur;
                    b = prev;
                    break;
                }
                let f_next = phi(next);
                if f_next >= f_cur {
                    a = next;
                    b = prev;
                    break;
                }
                prev = cur;
                cur = next;
                f_cur = f_next;
            }
        } else {
            a = back;
            b = fwd;
        }
    }
    let scale = d.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    let (t, ft) = golden_min(phi, a, b, LINE_TOL / scale);
    if ft < fx {
        (at(t), ft)
    } else {
        (x, fx)
    }
}

/// Cyclic coordinate descent with golden-section line searches; each sweep
/// ends with a line search along the sweep's net displacement. Coordinates
/// listed in `free` are optimized, the rest held fixed.
fn coordinate_descent<F>(f: &F, bounds: &Bounds, x0: [f64; 3], free: &[usize]) -> std::result::Result<([f64; 3], f64), ([f64; 3], f64)>
where
    F: Fn(&[f64; 3]) -> f64,
{
    let mut x = bounds.clamp(x0);
    let mut fx = f(&x);
    if !fx.is_finite() {
        return Err((x, fx));
    }
    let mut steps = [0.0; 3];
    for &i in free {
        steps[i] = 0.05 * (x[i].abs() + 0.05);
    }
    let mut quiet = 0;
    for _ in 0..MAX_SWEEPS {
        let start = x;
        let f_start = fx;
        for &i in free {
            let mut d = [0.0; 3];
            d[i] = 1.0;
            let (nx, nf) = line_min(f, bounds, x, fx, d, steps[i]);
            let moved = (nx[i] - x[i]).abs();
            steps[i] = (2.0 * moved).max(1e-7);
            x = nx;
            fx = nf;
        }
        let disp = [x[0] - start[0], x[1] - start[1], x[2] - start[2]];
        let size = disp.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if size > 0.0 {
            let (nx, nf) = line_min(f, bounds, x, fx, disp, 1.0);
            x = nx;
            fx = nf;
        }
        let moved = (0..3).fold(0.0_f64, |m, i| m.max((x[i] - start[i]).abs()));
        if f_start - fx <= 1e-15 * (1.0 + fx.abs()) && moved <= 1e-9 {
            quiet += 1;
            if quiet >= 3 {
                return Ok((x, fx));
            }
        } else {
            quiet = 0;
        }
    }
    Err((x, fx))
}

fn not_converged(x: [f64; 3], value: f64) -> Error {
    Error::NoConvergence {
        what: "zeta minimization",
        iterations: MAX_SWEEPS,
        best: ZetaPoint::from_array(x).to_string(),
        value,
    }
}

/// Seeds: the closed-form point scaled by 0.8 and 1.2, and a neutral point.
fn seeds(alpha: f64, beta: f64, eta: f64, upper: bool, bounds: &Bounds) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(3);
    if let Ok(s) = ldp_solution(alpha, beta, eta) {
        for scale in [0.8, 1.2] {
            out.push(bounds.clamp([s.c3 * scale, s.nu * scale, s.a0 * scale]));
        }
    }
    out.push(if upper { [0.5, 1.0, 0.7] } else { [-0.5, 1.0, 1.3] });
    out
}

fn upper_bounds() -> Bounds {
    Bounds { lo: [0.0, 0.0, A0_EPS], hi: [f64::INFINITY, NU_MAX, 1.0] }
}

fn lower_bounds() -> Bounds {
    Bounds { lo: [f64::NEG_INFINITY, 0.0, 1.0], hi: [0.0, NU_MAX, f64::INFINITY] }
}

fn minimize_upper(alpha: f64, beta: f64, eta: f64) -> Result<(ZetaPoint, f64)> {
    let bounds = upper_bounds();
    let f = |x: &[f64; 3]| {
        if !bounds.contains(x) {
            return f64::INFINITY;
        }
        zeta_raw(alpha, beta, eta, x[0], x[1], x[2])
    };
    let runs: Vec<_> = seeds(alpha, beta, eta, true, &bounds)
        .into_par_iter()
        .map(|s| coordinate_descent(&f, &bounds, s, &[0, 1, 2]))
        .collect();
    pick_best(runs, |a, b| a < b)
}

/// Inner problem of the lower tail: maximize over `(nu, a0)` at fixed `c3`.
fn inner_max(alpha: f64, beta: f64, eta: f64, c3: f64, warm: [f64; 3]) -> std::result::Result<([f64; 3], f64), ([f64; 3], f64)> {
    let bounds = lower_bounds();
    let neg = |x: &[f64; 3]| {
        // a0 -> 1 from above sends the coupling term to -inf.
        if !bounds.contains(x) || (x[2] == 1.0 && c3 != 0.0) {
            return f64::INFINITY;
        }
        -zeta_raw(alpha, beta, eta, c3, x[1], x[2])
    };
    let mut start = warm;
    start[0] = c3;
    if start[2] <= 1.0 {
        start[2] = 1.0 + 1e-3;
    }
    coordinate_descent(&neg, &bounds, start, &[1, 2]).map(|(x, v)| (x, -v)).map_err(|(x, v)| (x, -v))
}

fn minimize_lower(alpha: f64, beta: f64, eta: f64) -> Result<(ZetaPoint, f64)> {
    let bounds = lower_bounds();
    let runs: Vec<_> = seeds(alpha, beta, eta, false, &bounds)
        .into_par_iter()
        .map(|seed| {
            // Outer problem in c3 alone. Each inner solve is warm-started
            // from the previous one.
            let warm = Cell::new(seed);
            let failed = Cell::new(None);
            let outer = |c3: f64| match inner_max(alpha, beta, eta, c3, warm.get()) {
                Ok((x, v)) => {
                    warm.set(x);
                    v
                }
                Err(e) => {
                    failed.set(Some(e));
                    f64::INFINITY
                }
            };
            // Push the left end out until the minimum is interior.
            let mut lo = (2.0 * seed[0]).min(-0.5);
            let c3 = loop {
                let (c3, _) = golden_min(&outer, lo, 0.0, 1e-9);
                if c3 - lo > 1e-3 * lo.abs() || lo < -1e3 {
                    break c3;
                }
                lo *= 2.0;
            };
            if let Some(e) = failed.get() {
                return Err(e);
            }
            inner_max(alpha, beta, eta, c3, warm.get())
        })
        .collect();
    pick_best(runs, |a, b| a < b)
}

fn pick_best<C>(runs: Vec<std::result::Result<([f64; 3], f64), ([f64; 3], f64)>>, better: C) -> Result<(ZetaPoint, f64)>
where
    C: Fn(f64, f64) -> bool,
{
    let mut best: Option<([f64; 3], f64)> = None;
    let mut worst_fail: Option<([f64; 3], f64)> = None;
    for r in runs {
        match r {
            Ok((x, v)) => {
                if best.map_or(true, |(_, bv)| better(v, bv)) {
                    best = Some((x, v));
                }
            }
            Err((x, v)) => {
                if worst_fail.is_none() {
                    worst_fail = Some((x, v));
                }
            }
        }
    }
    match (best, worst_fail) {
        (Some((x, v)), _) => Ok((ZetaPoint::from_array(x), v)),
        (None, Some((x, v))) => Err(not_converged(x, v)),
        (None, None) => Err(Error::Domain("no seeds".into())),
    }
}

/// Derivative-free optimization of the objective in the given regime,
/// independent of the closed-form optimizers except for seeding.
/// `OnCurve` is searched over the upper-tail domain.
pub fn minimize_zeta_numeric(alpha: f64, beta: f64, eta: f64, regime: Regime) -> Result<(ZetaPoint, f64)> {
    check_triple(alpha, beta, eta)?;
    match regime {
        Regime::UpperTail | Regime::OnCurve => minimize_upper(alpha, beta, eta),
        Regime::LowerTail => minimize_lower(alpha, beta, eta),
    }
}
