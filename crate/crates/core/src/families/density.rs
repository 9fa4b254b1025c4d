use crate::error::{Error, Result};
use crate::specfun::{log_polylog_neg, log_sum_exp};

use super::coeffs::{gumbel_coeffs, joe_coeffs, GumbelPolyCoeffs, JoePolyCoeffs};
use super::{
    check_theta, check_unit, deriv, log_neg_dpsi_inv, log_one_minus_exp_neg, log_one_minus_pow_complement_theta, psi_inv,
    FamilyId,
};

/// Above this value of max_j(-theta log u_j), Clayton's t is assembled in log space.
const CLAYTON_LOG_SWITCH: f64 = 600.0;

/// Log-density evaluator for one (family, theta, d), holding the polynomial
/// coefficients so repeated evaluation over a sample builds them once.
#[derive(Debug, Clone)]
pub struct DensityEvaluator {
    family: FamilyId,
    theta: f64,
    d: usize,
    poly: Poly,
}

#[derive(Debug, Clone)]
enum Poly {
    None,
    Gumbel(GumbelPolyCoeffs),
    Joe(JoePolyCoeffs),
}

impl DensityEvaluator {
    pub fn new(family: FamilyId, theta: f64, d: usize) -> Result<Self> {
        check_theta(family, theta)?;
        if d < 2 {
            return Err(Error::Domain(format!("density dimension d = {d} must be >= 2")));
        }
        let indep = family.domain().is_independence(theta);
        let poly = match family {
            FamilyId::Gumbel if !indep => Poly::Gumbel(gumbel_coeffs(d, theta)?),
            FamilyId::Joe if !indep => Poly::Joe(joe_coeffs(d, theta)?),
            _ => Poly::None,
        };
        Ok(Self { family, theta, d, poly })
    }

    pub fn family(&self) -> FamilyId {
        self.family
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub(crate) fn gumbel(&self) -> Option<&GumbelPolyCoeffs> {
        match &self.poly {
            Poly::Gumbel(c) => Some(c),
            _ => None,
        }
    }

    pub(crate) fn joe(&self) -> Option<&JoePolyCoeffs> {
        match &self.poly {
            Poly::Joe(c) => Some(c),
            _ => None,
        }
    }

    pub(crate) fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.d {
            return Err(Error::Domain(format!("point has dimension {} but evaluator expects {}", u.len(), self.d)));
        }
        u.iter().try_for_each(|&x| check_unit(x))
    }

    /// log c_theta(u) by the family-specific closed form.
    pub fn log_density(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        if self.family.domain().is_independence(self.theta) {
            return Ok(0.0);
        }
        let v = match self.family {
            FamilyId::Amh => amh(self.theta, u)?,
            FamilyId::Clayton => clayton(self.theta, u),
            FamilyId::Frank => frank(self.theta, u)?,
            FamilyId::Gumbel => gumbel(self.gumbel().expect("gumbel coefficients"), u),
            FamilyId::Joe => joe(self.joe().expect("joe coefficients"), u),
        };
        finite(v, self.family, self.theta)
    }

    /// log c_theta(u) through the generic composition of the d-th generator
    /// derivative with the inverse-generator derivatives.
    pub fn log_density_generic(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        if self.family.domain().is_independence(self.theta) {
            return Ok(0.0);
        }
        let mut t = 0.0;
        let mut jac = 0.0;
        for &x in u {
            t += psi_inv(self.family, self.theta, x)?;
            jac += log_neg_dpsi_inv(self.family, self.theta, x)?;
        }
        let lgd = match &self.poly {
            Poly::Gumbel(c) => deriv::gumbel_with(c, t),
            Poly::Joe(c) => deriv::joe_with(c, t),
            Poly::None => deriv::log_gen_deriv(self.family, self.theta, self.d, t)?,
        };
        finite(lgd + jac, self.family, self.theta)
    }
}

fn finite(v: f64, family: FamilyId, theta: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("{family} log-density at theta = {theta}")))
    }
}

/// log c_theta(u) for u in (0,1)^d, d >= 2.
pub fn log_density(family: FamilyId, theta: f64, u: &[f64]) -> Result<f64> {
    DensityEvaluator::new(family, theta, u.len())?.log_density(u)
}

/// Generic-composition log-density, the cross-check for [`log_density`].
pub fn log_density_generic(family: FamilyId, theta: f64, u: &[f64]) -> Result<f64> {
    DensityEvaluator::new(family, theta, u.len())?.log_density_generic(u)
}

/// log h and log(1-h) for AMH, h = theta prod u_j / (1 - theta(1-u_j)).
pub(crate) fn amh_h(theta: f64, u: &[f64]) -> (f64, f64) {
    let log_h = theta.ln() + u.iter().map(|&x| x.ln() - (-theta * (1.0 - x)).ln_1p()).sum::<f64>();
    (log_h, (-log_h.exp_m1()).ln())
}

fn amh(theta: f64, u: &[f64]) -> Result<f64> {
    let d = u.len();
    let (log_h, log_1mh) = amh_h(theta, u);
    let slu: f64 = u.iter().map(|x| x.ln()).sum();
    Ok((d as f64 + 1.0) * (1.0 - theta).ln() - 2.0 * theta.ln() + log_h - 2.0 * slu
        + log_polylog_neg(d, log_h, log_1mh)?)
}

/// log(1 + t) with t = sum_j (u_j^{-theta} - 1), safe when u_j^{-theta} overflows.
pub(crate) fn clayton_log1p_t(theta: f64, u: &[f64]) -> f64 {
    let e: Vec<f64> = u.iter().map(|x| -theta * x.ln()).collect();
    let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m > CLAYTON_LOG_SWITCH {
        let l = log_sum_exp(&e);
        l + (-(u.len() as f64 - 1.0) * (-l).exp()).ln_1p()
    } else {
        e.iter().map(|x| x.exp_m1()).sum::<f64>().ln_1p()
    }
}

fn clayton(theta: f64, u: &[f64]) -> f64 {
    let d = u.len();
    let s: f64 = (1..d).map(|k| (theta * k as f64).ln_1p()).sum();
    let slu: f64 = u.iter().map(|x| x.ln()).sum();
    s - (1.0 + theta) * slu - (d as f64 + 1.0 / theta) * clayton_log1p_t(theta, u)
}

/// log h and log(1-h) for Frank, h = (1-e^{-theta})^{1-d} prod_j (1 - e^{-theta u_j}).
pub(crate) fn frank_h(theta: f64, u: &[f64]) -> (f64, f64) {
    let d = u.len() as f64;
    let log_h =
        (1.0 - d) * log_one_minus_exp_neg(theta) + u.iter().map(|&x| log_one_minus_exp_neg(theta * x)).sum::<f64>();
    (log_h, (-log_h.exp_m1()).ln())
}

fn frank(theta: f64, u: &[f64]) -> Result<f64> {
    let d = u.len();
    let (log_h, log_1mh) = frank_h(theta, u);
    let su: f64 = u.iter().sum();
    Ok((d as f64 - 1.0) * (theta.ln() - log_one_minus_exp_neg(theta)) + log_polylog_neg(d - 1, log_h, log_1mh)?
        - theta * su
        - log_h)
}

/// Gumbel auxiliaries: (sum_j L_j, log t) with L_j = log(-log u_j), t = sum_j e^{theta L_j}.
pub(crate) fn gumbel_t(theta: f64, u: &[f64]) -> (f64, f64, Vec<f64>) {
    let l: Vec<f64> = u.iter().map(|x| (-x.ln()).ln()).collect();
    let scaled: Vec<f64> = l.iter().map(|x| theta * x).collect();
    (l.iter().sum(), log_sum_exp(&scaled), l)
}

fn gumbel(c: &GumbelPolyCoeffs, u: &[f64]) -> f64 {
    let theta = c.theta;
    let d = u.len() as f64;
    let (sl, log_t, _) = gumbel_t(theta, u);
    let log_x = log_t / theta;
    let slu: f64 = u.iter().map(|x| x.ln()).sum();
    d * theta.ln() - log_x.exp() + (theta - 1.0) * sl - d * log_t - slu + c.log_poly(log_x)
}

/// Joe auxiliaries: (log h, log(1-h)) with h = prod_j (1 - (1-u_j)^theta).
pub(crate) fn joe_h(theta: f64, u: &[f64]) -> (f64, f64) {
    let log_h: f64 = u.iter().map(|&x| log_one_minus_pow_complement_theta(x, theta)).sum();
    (log_h, (-log_h.exp_m1()).ln())
}

fn joe(c: &JoePolyCoeffs, u: &[f64]) -> f64 {
    let theta = c.theta;
    let d = u.len() as f64;
    let (log_h, log_1mh) = joe_h(theta, u);
    let sl1m: f64 = u.iter().map(|x| (-x).ln_1p()).sum();
    (d - 1.0) * theta.ln() + (theta - 1.0) * sl1m - (1.0 - 1.0 / theta) * log_1mh + c.log_poly(log_h - log_1mh)
}
