use crate::error::{Error, Result};
use crate::specfun::log_polylog_neg;

use super::density::{amh_h, clayton_log1p_t, frank_h, gumbel_t, joe_h, DensityEvaluator};
use super::{check_theta, check_unit, FamilyId};

impl DensityEvaluator {
    /// d/dtheta log c_theta(u) by the analytic closed forms.
    pub fn score(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        let (family, theta) = (self.family(), self.theta());
        if family.domain().is_independence(theta) {
            return Err(Error::Domain(format!(
                "{family} score is one-sided at the boundary theta = {theta}; evaluate inside the domain"
            )));
        }
        let v = match family {
            FamilyId::Amh => amh(theta, u)?,
            FamilyId::Clayton => clayton(theta, u),
            FamilyId::Frank => frank(theta, u)?,
            FamilyId::Gumbel => gumbel(self, u),
            FamilyId::Joe => joe(self, u),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("{family} score at theta = {theta}")))
        }
    }
}

/// d/dtheta log c_theta(u).
pub fn score(family: FamilyId, theta: f64, u: &[f64]) -> Result<f64> {
    DensityEvaluator::new(family, theta, u.len())?.score(u)
}

fn amh(theta: f64, u: &[f64]) -> Result<f64> {
    let d = u.len();
    let (log_h, log_1mh) = amh_h(theta, u);
    let b: f64 = u.iter().map(|&x| (1.0 - x) / (1.0 - theta * (1.0 - x))).sum();
    let ratio = (log_polylog_neg(d + 1, log_h, log_1mh)? - log_polylog_neg(d, log_h, log_1mh)?).exp();
    Ok(-(d as f64 + 1.0) / (1.0 - theta) - 1.0 / theta + b + (b + 1.0 / theta) * ratio)
}

/// Shifted Clayton moments: (t'/(1+t), t''/(1+t)) with t' = sum(-log u) u^{-theta},
/// t'' = sum (log u)^2 u^{-theta}.
fn clayton_moments(theta: f64, u: &[f64]) -> (f64, f64) {
    let d = u.len() as f64;
    let e: Vec<f64> = u.iter().map(|x| -theta * x.ln()).collect();
    let m = e.iter().cloned().fold(0.0, f64::max);
    let mut s0 = -(d - 1.0) * (-m).exp();
    let (mut s1, mut s2) = (0.0, 0.0);
    for (&x, &ej) in u.iter().zip(&e) {
        let w = (ej - m).exp();
        let l = -x.ln();
        s0 += w;
        s1 += l * w;
        s2 += l * l * w;
    }
    (s1 / s0, s2 / s0)
}

fn clayton(theta: f64, u: &[f64]) -> f64 {
    let d = u.len();
    let s: f64 = (1..d).map(|k| k as f64 / (theta * k as f64 + 1.0)).sum();
    let slu: f64 = u.iter().map(|x| x.ln()).sum();
    let l1t = clayton_log1p_t(theta, u);
    let (r1, _) = clayton_moments(theta, u);
    s - slu + l1t / (theta * theta) - (d as f64 + 1.0 / theta) * r1
}

/// Second derivative in theta of the Clayton log-density.
pub fn clayton_loglik_hessian(theta: f64, u: &[f64]) -> Result<f64> {
    check_theta(FamilyId::Clayton, theta)?;
    if u.len() < 2 {
        return Err(Error::Domain(format!("density dimension d = {} must be >= 2", u.len())));
    }
    u.iter().try_for_each(|&x| check_unit(x))?;
    let d = u.len();
    let s: f64 = (1..d).map(|k| (k as f64 / (theta * k as f64 + 1.0)).powi(2)).sum();
    let l1t = clayton_log1p_t(theta, u);
    let (r1, r2) = clayton_moments(theta, u);
    let v = -s + 2.0 / (theta * theta) * (r1 - l1t / theta) + (d as f64 + 1.0 / theta) * (r1 * r1 - r2);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("clayton hessian at theta = {theta}")))
    }
}

fn frank(theta: f64, u: &[f64]) -> Result<f64> {
    let d = u.len();
    let dm1 = d as f64 - 1.0;
    let (log_h, log_1mh) = frank_h(theta, u);
    let ratio = (log_polylog_neg(d, log_h, log_1mh)? - log_polylog_neg(d - 1, log_h, log_1mh)?).exp();
    let a: f64 = u.iter().map(|&x| x / -(-theta * x).exp_m1()).sum();
    let dlog_h: f64 = u.iter().map(|&x| x / (theta * x).exp_m1()).sum::<f64>() - dm1 / theta.exp_m1();
    Ok(dm1 / theta - a + dlog_h * ratio)
}

fn gumbel(ev: &DensityEvaluator, u: &[f64]) -> f64 {
    let c = ev.gumbel().expect("gumbel coefficients");
    let theta = c.theta;
    let d = u.len() as f64;
    let (sl, log_t, l) = gumbel_t(theta, u);
    // b = d/dtheta log t
    let b: f64 = l.iter().map(|&lj| (theta * lj - log_t).exp() * lj).sum();
    let log_x = log_t / theta;
    let x = log_x.exp();
    let dlog_x = (b - log_t / theta) / theta;
    let w = c.weights(log_x);
    let q: f64 = w
        .iter()
        .zip(&c.dlog_dtheta)
        .enumerate()
        .filter(|(_, (wk, _))| **wk > 0.0)
        .map(|(i, (wk, dk))| wk * (dk + (i + 1) as f64 * dlog_x))
        .sum();
    d / theta - x * dlog_x + sl - d * b + q
}

fn joe(ev: &DensityEvaluator, u: &[f64]) -> f64 {
    let c = ev.joe().expect("joe coefficients");
    let theta = c.theta;
    let d = u.len() as f64;
    let (log_h, log_1mh) = joe_h(theta, u);
    let sl1m: f64 = u.iter().map(|x| (-x).ln_1p()).sum();
    // b = d/dtheta log h
    let b: f64 = u
        .iter()
        .map(|&x| {
            let l = (-x).ln_1p();
            -l / (-theta * l).exp_m1()
        })
        .sum();
    let h_over = (log_h - log_1mh).exp();
    let one_over_1mh = (-log_1mh).exp();
    let w = c.weights(log_h - log_1mh);
    let q: f64 = w
        .iter()
        .zip(&c.dlog_dtheta)
        .enumerate()
        .filter(|(_, (wk, _))| **wk > 0.0)
        .map(|(i, (wk, dk))| wk * (dk + i as f64 * b * one_over_1mh))
        .sum();
    (d - 1.0) / theta + sl1m - log_1mh / (theta * theta) + (1.0 - 1.0 / theta) * h_over * b + q
}
