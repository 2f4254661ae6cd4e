//! Monte Carlo recovery experiments: random Gaussian systems with a planted
//! sparse solution, solved by weighted `l1` linear programs.

mod instance;
pub mod oracle;
mod simplex;
mod trials;
mod width;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Model;

pub use instance::{sample_instance, Instance};
pub use simplex::{solve_weighted_l1, LpSolution};
pub use trials::{run_trials, run_trials_detailed, wilson_interval, SimEstimate, TrialRecord};
pub use width::{gaussian_width_closed_form, gaussian_width_hidden};

pub const DEFAULT_RECOVERY_TOL: f64 = 1e-6;

/// One Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// `|Pi|` for the partial model, `|K ∩ kappa|` for the hidden model.
    pub known_count: usize,
    pub model: Model,
    pub trials: usize,
    pub master_seed: u64,
    pub recovery_tol: f64,
}

/// `floor(x + 1/2)`, the rounding used to turn ratios into dimensions.
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

impl SimConfig {
    pub fn new(model: Model, n: usize, m: usize, k: usize, known_count: usize, trials: usize, master_seed: u64) -> Result<Self> {
        let cfg = SimConfig {
            n,
            m,
            k,
            known_count,
            model,
            trials,
            master_seed,
            recovery_tol: DEFAULT_RECOVERY_TOL,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Dimensions from ratios: `m = round(alpha n)`, `k = round(beta n)`,
    /// `known = round(eta k)`, all rounded half up.
    pub fn from_ratios(model: Model, n: usize, alpha: f64, beta: f64, eta: f64, trials: usize, master_seed: u64) -> Result<Self> {
        let m = round_half_up(alpha * n as f64);
        let k = round_half_up(beta * n as f64);
        let known = round_half_up(eta * k as f64);
        SimConfig::new(model, n, m, k, known, trials, master_seed)
    }

    pub fn validate(&self) -> Result<()> {
        let SimConfig { n, m, k, known_count, .. } = *self;
        if n == 0 || m == 0 || k == 0 {
            return Err(Error::InvalidConfig(format!("n, m, k must be positive (n = {n}, m = {m}, k = {k})")));
        }
        if !(known_count <= k && k <= m && m <= n) {
            return Err(Error::InvalidConfig(format!(
                "need known <= k <= m <= n, got known = {known_count}, k = {k}, m = {m}, n = {n}"
            )));
        }
        if self.model == Model::HiddenPartial && n < 2 * k - known_count {
            return Err(Error::InvalidConfig(format!(
                "hidden model needs n >= k + (k - known) = {}, got n = {n}",
                2 * k - known_count
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be positive".into()));
        }
        if !(self.recovery_tol > 0.0) {
            return Err(Error::InvalidConfig(format!("recovery_tol = {} must be positive", self.recovery_tol)));
        }
        Ok(())
    }

    /// Indices left out of the objective: `Pi` (partial) or `kappa` (hidden).
    pub fn unpenalized_set(&self) -> Vec<usize> {
        let SimConfig { n, k, known_count, .. } = *self;
        match self.model {
            Model::Partial => (n - known_count..n).collect(),
            Model::HiddenPartial => {
                let wrong = k - known_count;
                (n - k - wrong..n - k).chain(n - known_count..n).collect()
            }
        }
    }
}
