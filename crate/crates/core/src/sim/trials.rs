use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use super::instance::sample_instance;
use super::simplex::solve_weighted_l1;
use super::SimConfig;
use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;
/// Largest tolerated share of trials whose LP solve broke down.
const MAX_INVALID_SHARE: f64 = 1e-3;

/// Outcome of a single trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    /// `None` when the LP solve broke down and the trial is excluded.
    pub failure: Option<bool>,
    pub iterations: usize,
    pub residual: f64,
    pub max_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Aggregated failure statistics. Rates are `None` when the matching count
/// is zero and serialize as `"not observed"`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimEstimate {
    pub failures: usize,
    /// Valid trials only.
    pub trials: usize,
    pub invalid: usize,
    pub p_err_hat: f64,
    pub p_cor_hat: f64,
    #[serde(serialize_with = "rate_or_marker")]
    pub rate_err_hat: Option<f64>,
    #[serde(serialize_with = "rate_or_marker")]
    pub rate_cor_hat: Option<f64>,
    pub ci95_err: (f64, f64),
}

fn rate_or_marker<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_str("not observed"),
    }
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let nt = trials as f64;
    let p = successes as f64 / nt;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nt;
    let center = (p + z2 / (2.0 * nt)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn run_one(cfg: &SimConfig, trial_index: u64) -> TrialRecord {
    let inst = sample_instance(cfg, trial_index);
    match solve_weighted_l1(&inst.a, &inst.y, &inst.pi_set) {
        Ok(sol) => {
            let y_scale = 1.0 + inst.y.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            let max_error = sol
                .x_hat
                .iter()
                .zip(&inst.x)
                .fold(0.0_f64, |acc, (u, v)| acc.max((u - v).abs()));
            let x_scale = inst.x.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
            if sol.residual > 1e-8 * y_scale {
                return TrialRecord {
                    trial_index,
                    failure: None,
                    iterations: sol.iterations,
                    residual: sol.residual,
                    max_error,
                    error: Some(format!("primal residual {:e}", sol.residual)),
                };
            }
            TrialRecord {
                trial_index,
                failure: Some(max_error > cfg.recovery_tol * x_scale),
                iterations: sol.iterations,
                residual: sol.residual,
                max_error,
                error: None,
            }
        }
        Err(e) => TrialRecord {
            trial_index,
            failure: None,
            iterations: 0,
            residual: f64::NAN,
            max_error: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

/// Runs every trial and returns the aggregate with the per-trial records.
/// Trials run on the current rayon pool; the result does not depend on
/// its size.
pub fn run_trials_detailed(cfg: &SimConfig) -> Result<(SimEstimate, Vec<TrialRecord>)> {
    cfg.validate()?;
    let records: Vec<TrialRecord> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| run_one(cfg, i))
        .collect();
    let invalid = records.iter().filter(|r| r.failure.is_none()).count();
    if invalid as f64 > MAX_INVALID_SHARE * cfg.trials as f64 {
        let first = records
            .iter()
            .find_map(|r| r.error.clone())
            .unwrap_or_default();
        return Err(Error::NoConvergence {
            what: "trials",
            iterations: invalid,
            best: format!("{invalid} of {} trials invalid; first: {first}", cfg.trials),
            value: invalid as f64 / cfg.trials as f64,
        });
    }
    let failures = records.iter().filter(|r| r.failure == Some(true)).count();
    let trials = cfg.trials - invalid;
    let n = cfg.n as f64;
    let (p_err, p_cor) = if trials == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let p = failures as f64 / trials as f64;
        (p, (trials - failures) as f64 / trials as f64)
    };
    let rate = |count: usize, p: f64| if count == 0 { None } else { Some(p.ln() / n) };
    let estimate = SimEstimate {
        failures,
        trials,
        invalid,
        p_err_hat: p_err,
        p_cor_hat: p_cor,
        rate_err_hat: rate(failures, p_err),
        rate_cor_hat: rate(trials - failures, p_cor),
        ci95_err: wilson_interval(failures, trials),
    };
    Ok((estimate, records))
}

/// Monte Carlo estimate of the failure probability and its decay rates.
pub fn run_trials(cfg: &SimConfig) -> Result<SimEstimate> {
    run_trials_detailed(cfg).map(|(e, _)| e)
}
