//! Log-scale special functions: signed log arithmetic, Stirling numbers,
//! negative-order polylogarithms, gamma ratios, the Debye function and Bessel K.

mod bessel;
mod debye;
mod gamma;
mod polylog;
mod signed_log;
mod stirling;

pub use bessel::{log_bessel_k, log_bessel_k_ratio};
pub use debye::debye1;
pub use gamma::{digamma, ln_gamma, log_gamma_ratio, log_rising_signed};
pub use polylog::{log_polylog_neg, polylog_neg};
pub use signed_log::{log_sum_exp, sum_signed, LogSumExp, SignedLog};
pub use stirling::{stirling_tables, StirlingTables};
