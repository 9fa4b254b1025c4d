//! Two-parameter Archimedean families: the outer-power Clayton copula and the GIG family.

mod gig;
mod outer_power;

pub use gig::{
    gig_log_density, gig_log_gen_deriv, gig_log_psi, gig_psi, gig_psi_inv, gig_tail_dependence, gig_tau,
    sample_gig_frailty, GigDensity, GigParams,
};
pub use outer_power::{
    op_beta_for_tau, op_log_density, op_log_gen_deriv, op_log_psi, op_psi_inv, op_tail_dependence, op_tau,
    op_theta_for_tau, sample_op_frailty, sample_op_log_frailty, OpDensity, OuterPowerClaytonParams,
};
