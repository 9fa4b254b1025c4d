use crate::error::{Error, Result};
use crate::specfun::{log_gamma_ratio, log_polylog_neg};

use super::coeffs::{gumbel_coeffs, joe_coeffs, GumbelPolyCoeffs, JoePolyCoeffs};
use super::{check_theta, log_one_minus_exp_neg, log_psi, FamilyId, MAX_ORDER};

/// log((-1)^d psi^{(d)}(t)), the log of the d-th generator derivative with its
/// alternating sign removed. d = 0 gives log psi(t).
pub fn log_gen_deriv(family: FamilyId, theta: f64, d: usize, t: f64) -> Result<f64> {
    check_theta(family, theta)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("derivative argument t = {t} must be positive and finite")));
    }
    if d > MAX_ORDER {
        return Err(Error::DimensionCap { d, max: MAX_ORDER });
    }
    if d == 0 {
        return log_psi(family, theta, t);
    }
    let v = match family {
        FamilyId::Amh => amh(theta, d, t)?,
        FamilyId::Clayton => clayton(theta, d, t)?,
        FamilyId::Frank => frank(theta, d, t)?,
        FamilyId::Gumbel => {
            if theta == 1.0 {
                -t
            } else {
                gumbel_with(&gumbel_coeffs(d, theta)?, t)
            }
        }
        FamilyId::Joe => {
            if theta == 1.0 {
                -t
            } else {
                joe_with(&joe_coeffs(d, theta)?, t)
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("log_gen_deriv({family}, theta={theta}, d={d}, t={t})")))
    }
}

pub(crate) fn amh(theta: f64, d: usize, t: f64) -> Result<f64> {
    if theta == 0.0 {
        return Ok(-t);
    }
    // (1-theta)/theta * Li_{-d}(theta e^{-t})
    let log_z = theta.ln() - t;
    let log_1mz = (-theta * (-t).exp()).ln_1p();
    Ok((1.0 - theta).ln() - theta.ln() + log_polylog_neg(d, log_z, log_1mz)?)
}

pub(crate) fn clayton(theta: f64, d: usize, t: f64) -> Result<f64> {
    let a = 1.0 / theta;
    Ok(log_gamma_ratio(d as f64 + a, a)? - (d as f64 + a) * t.ln_1p())
}

pub(crate) fn frank(theta: f64, d: usize, t: f64) -> Result<f64> {
    // (1/theta) Li_{-(d-1)}(z), z = (1 - e^{-theta}) e^{-t}
    let log_z = log_one_minus_exp_neg(theta) - t;
    let one_minus_z = -(-t).exp_m1() + (-t - theta).exp();
    Ok(-theta.ln() + log_polylog_neg(d - 1, log_z, one_minus_z.ln())?)
}

/// Gumbel log-derivative for precomputed coefficients (theta > 1, d >= 1).
pub(crate) fn gumbel_with(c: &GumbelPolyCoeffs, t: f64) -> f64 {
    let lt = t.ln();
    let alpha = 1.0 / c.theta;
    let log_x = alpha * lt;
    -log_x.exp() - c.d as f64 * lt + c.log_poly(log_x)
}

/// Joe log-derivative for precomputed coefficients (theta > 1, d >= 1).
pub(crate) fn joe_with(c: &JoePolyCoeffs, t: f64) -> f64 {
    let alpha = 1.0 / c.theta;
    // log(1 - e^{-t})
    let l1m = log_one_minus_exp_neg(t);
    let log_x = -t - l1m;
    -t - (1.0 - alpha) * l1m - c.theta.ln() + c.log_poly(log_x)
}
