use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input outside the documented domain of a routine.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter combination for which the requested quantity does not
    /// exist (for example a threshold that is never crossed).
    #[error("degenerate problem: {0}")]
    Degenerate(String),

    /// A root bracket did not show the expected sign change.
    #[error("bracket failure in {what}: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    Bracket {
        what: &'static str,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// An iterative method hit its iteration cap. `best` carries the best
    /// point found, formatted by the caller, and its objective value.
    #[error("{what} did not converge after {iterations} iterations (best value {value} at {best})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        best: String,
        value: f64,
    },

    #[error("linear program infeasible: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
