use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which recovery program is being analysed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// A subset of the true support is known and left unpenalised.
    Partial,
    /// A size-`k` guess of the support is left unpenalised; only a fraction
    /// `eta` of it is correct.
    HiddenPartial,
}

/// Which side of the phase transition a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Above the curve: failures are exponentially rare.
    UpperTail,
    /// Below the curve: successes are exponentially rare.
    LowerTail,
    OnCurve,
}

/// Problem geometry: `alpha = m/n`, `beta = k/n`, `eta` the known fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub model: Model,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
}

impl ModelParams {
    pub fn new(model: Model, alpha: f64, beta: f64, eta: f64) -> Result<Self> {
        let p = ModelParams { model, alpha, beta, eta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ModelParams { model, alpha, beta, eta } = *self;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!("eta = {eta} must lie in [0, 1]")));
        }
        if !(beta >= 0.0 && beta < alpha) {
            return Err(Error::Domain(format!("beta = {beta} must lie in [0, alpha = {alpha})")));
        }
        if model == Model::HiddenPartial && (2.0 - eta) * beta >= 1.0 {
            return Err(Error::Domain(format!(
                "hidden model needs (2 - eta) * beta < 1, got {}",
                (2.0 - eta) * beta
            )));
        }
        Ok(())
    }

    /// The partial-model parameters that the hidden model maps onto:
    /// `beta -> (2 - eta) beta`, `eta -> 1 / (2 - eta)`. Identity for the
    /// partial model.
    pub fn as_partial(&self) -> ModelParams {
        match self.model {
            Model::Partial => *self,
            Model::HiddenPartial => {
                let (beta, eta) = hidden_to_partial(self.beta, self.eta);
                ModelParams { model: Model::Partial, alpha: self.alpha, beta, eta }
            }
        }
    }
}

/// Maps hidden-model `(beta, eta)` to the equivalent partial-model pair.
#[inline]
pub fn hidden_to_partial(beta: f64, eta: f64) -> (f64, f64) {
    let s = 2.0 - eta;
    (s * beta, 1.0 / s)
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 1)")))
    }
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::Domain(format!("eta = {eta} must lie in [0, 1]")))
    }
}
