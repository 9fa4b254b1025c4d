use super::signed_log::{LogSumExp, SignedLog};
use super::stirling::stirling_tables;
use crate::error::{ensure, Result};

/// Polylogarithm of negative integer order, Li_{-d}(z) = sum_{k>=1} k^d z^k, for z in (0,1).
pub fn polylog_neg(d: usize, z: f64) -> Result<SignedLog> {
    ensure(z > 0.0 && z < 1.0, || format!("polylog_neg needs z in (0,1), got {z}"))?;
    Ok(SignedLog::from_log(log_polylog_neg(d, z.ln(), (-z).ln_1p())?))
}

/// log Li_{-d}(z) from `log z` and `log(1-z)`.
///
/// Uses Li_{-d}(z) = sum_{k=0}^{d} k! S(d+1,k+1) w^{k+1} with w = z/(1-z); every term is
/// positive, so the log-sum-exp is exact to rounding. Taking logs as inputs keeps
/// z = exp(-1e5) and 1 - z = 1e-300 representable.
pub fn log_polylog_neg(d: usize, log_z: f64, log_1mz: f64) -> Result<f64> {
    // log(1-z) rounds to 0 for z below ~1e-16, which is still a valid input.
    ensure(log_z < 0.0 && log_1mz <= 0.0 && log_z.is_finite() && log_1mz.is_finite(), || {
        format!("log_polylog_neg needs z in (0,1), got log z = {log_z}, log(1-z) = {log_1mz}")
    })?;
    let tables = stirling_tables(d + 1)?;
    let log_w = log_z - log_1mz;
    let mut acc = LogSumExp::new();
    let mut log_fact = 0.0;
    for k in 0..=d {
        if k > 0 {
            log_fact += (k as f64).ln();
        }
        acc.push(log_fact + tables.log_second(d + 1, k + 1) + (k + 1) as f64 * log_w);
    }
    Ok(acc.value())
}
