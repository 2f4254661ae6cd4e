//! Phase transitions and large-deviation rates for partial and
//! hidden-partial `l1` recovery from Gaussian linear measurements.
//!
//! The analytic side ([`pt`], [`ldp`]) is cross-checked by two independent
//! routes ([`geometry`], [`zeta`]); [`sim`] estimates the same quantities by
//! Monte Carlo over linear programs.

pub mod error;
pub mod geometry;
pub mod ldp;
pub mod model;
pub mod pt;
mod roots;
pub mod sim;
pub mod specfun;
pub mod zeta;

pub use error::{Error, Result};
pub use geometry::{psi_com, psi_ext, psi_int, psi_net, psi_net_for, GeometryDecomposition, Method};
pub use ldp::{
    ldp_for, ldp_solution, ldp_solution_hidden, rate_curve, solve_beta0, solve_beta1, HiddenLdpSolution,
    LdpSolution,
};
pub use model::{hidden_to_partial, Model, ModelParams, Regime};
pub use pt::{pt_curve, solve_alpha_w, solve_beta_w, xi, xi_hidden, xi_partial, PtPoint};
pub use zeta::{i_sph, minimize_zeta_numeric, zeta, zeta_grad_analytic, ZetaPoint};
pub use sim::{
    gaussian_width_closed_form, run_trials, sample_instance, solve_weighted_l1, Instance, LpSolution, SimConfig,
    SimEstimate,
};
