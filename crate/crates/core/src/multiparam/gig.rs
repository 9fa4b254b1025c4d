use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::brent_root;
use crate::quad::{integrate, QuadOptions};
use crate::sampling::{sample_gig, RandomStream};
use crate::specfun::log_bessel_k;

/// GIG-family parameters: psi(t) = (1+t)^{-nu/2} K_nu(theta sqrt(1+t)) / K_nu(theta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GigParams {
    pub nu: f64,
    pub theta: f64,
}

impl GigParams {
    /// Any nu > -1/2 (where the inverse-generator bracket is proved) and theta > 0.
    pub fn new(nu: f64, theta: f64) -> Result<Self> {
        if !(nu > -0.5 && nu.is_finite()) {
            return Err(Error::Domain(format!("GIG nu = {nu} must exceed -1/2")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::Domain(format!("GIG theta = {theta} must be > 0")));
        }
        Ok(Self { nu, theta })
    }
}

/// log h_{nu1,nu2,theta}(t) = log[(theta sqrt(1+t))^{nu1} K_{nu1}(theta sqrt(1+t)) / (theta^{nu2} K_{nu2}(theta))].
fn log_h(nu1: f64, nu2: f64, theta: f64, log_k_nu2: f64, t: f64) -> Result<f64> {
    let z = theta * (1.0 + t).sqrt();
    Ok(nu1 * z.ln() + log_bessel_k(nu1, z)? - nu2 * theta.ln() - log_k_nu2)
}

fn check_t(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("generator argument t = {t} must be finite and >= 0")))
    }
}

/// log psi(t).
pub fn gig_log_psi(p: &GigParams, t: f64) -> Result<f64> {
    check_t(t)?;
    let z = p.theta * (1.0 + t).sqrt();
    Ok(-0.5 * p.nu * t.ln_1p() + log_bessel_k(p.nu, z)? - log_bessel_k(p.nu, p.theta)?)
}

/// Generator psi(t).
pub fn gig_psi(p: &GigParams, t: f64) -> Result<f64> {
    Ok(gig_log_psi(p, t)?.exp())
}

/// log((-1)^d psi^{(d)}(t)) = log h_{nu+d,nu,theta}(t) - d log 2 - (nu+d) log(1+t).
pub fn gig_log_gen_deriv(p: &GigParams, d: usize, t: f64) -> Result<f64> {
    check_t(t)?;
    let lk = log_bessel_k(p.nu, p.theta)?;
    gen_deriv_with(p, lk, d, t)
}

fn gen_deriv_with(p: &GigParams, log_k_nu: f64, d: usize, t: f64) -> Result<f64> {
    let df = d as f64;
    let v = log_h(p.nu + df, p.nu, p.theta, log_k_nu, t)? - df * std::f64::consts::LN_2 - (p.nu + df) * t.ln_1p();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("GIG generator derivative d={d} at t={t}")))
    }
}

/// psi^{-1}(u) by bracketed root-finding on [0, (1 - log(u)/theta)^2 - 1].
pub fn gig_psi_inv(p: &GigParams, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::Domain(format!("psi_inv argument u = {u} must be in (0,1]")));
    }
    let lk = log_bessel_k(p.nu, p.theta)?;
    psi_inv_with(p, lk, u)
}

fn psi_inv_with(p: &GigParams, log_k_nu: f64, u: f64) -> Result<f64> {
    if u == 1.0 {
        return Ok(0.0);
    }
    let lu = u.ln();
    let hi = (1.0 - lu / p.theta).powi(2) - 1.0;
    let f = |t: f64| {
        let z = p.theta * (1.0 + t).sqrt();
        match log_bessel_k(p.nu, z) {
            Ok(lkz) => -0.5 * p.nu * t.ln_1p() + lkz - log_k_nu - lu,
            Err(_) => f64::NAN,
        }
    };
    brent_root(f, 0.0, hi, 1e-300, 400)
}

/// Log-density evaluator for one GIG parameter point and dimension.
#[derive(Debug, Clone)]
pub struct GigDensity {
    p: GigParams,
    d: usize,
    log_k_nu: f64,
}

impl GigDensity {
    pub fn new(p: GigParams, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("density dimension d = {d} must be >= 2")));
        }
        Ok(Self { p, d, log_k_nu: log_bessel_k(p.nu, p.theta)? })
    }

    /// -(nu+d) log(1+t) + log h_{nu+d}(t) + (nu+1) sum log(1+t_j) - sum log h_{nu+1}(t_j),
    /// t_j = psi^{-1}(u_j), t = sum t_j.
    pub fn log_density(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.d {
            return Err(Error::Domain(format!("point has dimension {} but evaluator expects {}", u.len(), self.d)));
        }
        let (nu, theta, lk) = (self.p.nu, self.p.theta, self.log_k_nu);
        let mut t = 0.0;
        let mut acc = 0.0;
        for &x in u {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::Domain(format!("copula argument {x} is not in the open interval (0,1)")));
            }
            let tj = psi_inv_with(&self.p, lk, x)?;
            t += tj;
            acc += (nu + 1.0) * tj.ln_1p() - log_h(nu + 1.0, nu, theta, lk, tj)?;
        }
        let d = self.d as f64;
        let v = -(nu + d) * t.ln_1p() + log_h(nu + d, nu, theta, lk, t)? + acc;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("GIG log-density at (nu, theta) = ({nu}, {theta})")))
        }
    }

    /// Generic composition: log_gen_deriv(d, t) - sum_j log_gen_deriv(1, t_j).
    pub fn log_density_generic(&self, u: &[f64]) -> Result<f64> {
        let mut t = 0.0;
        let mut acc = 0.0;
        for &x in u {
            let tj = psi_inv_with(&self.p, self.log_k_nu, x)?;
            t += tj;
            acc -= gen_deriv_with(&self.p, self.log_k_nu, 1, tj)?;
        }
        Ok(gen_deriv_with(&self.p, self.log_k_nu, self.d, t)? + acc)
    }
}

/// GIG log-density.
pub fn gig_log_density(p: &GigParams, u: &[f64]) -> Result<f64> {
    GigDensity::new(*p, u.len())?.log_density(u)
}

/// Kendall's tau 1 - 4 int_0^inf t psi'(t)^2 dt.
///
/// With t = e^s the integrand e^{2s} (theta K_{nu+1}(theta sqrt(1+t)) / ((1+t)^{(nu+1)/2} K_nu(theta)))^2
/// decays like e^{2s} on the left and like exp(-2 theta e^{s/2}) on the right, so a finite
/// s-window covers it for every theta > 0, including the small-theta Clayton regime.
pub fn gig_tau(p: &GigParams) -> Result<f64> {
    let (nu, theta) = (p.nu, p.theta);
    let lk = log_bessel_k(nu, theta)?;
    let g = |s: f64| -> f64 {
        let t = s.exp();
        let z = theta * (1.0 + t).sqrt();
        match log_bessel_k(nu + 1.0, z) {
            Ok(lk1) => (2.0 * (s + theta.ln() + lk1 - lk - 0.5 * (nu + 1.0) * t.ln_1p())).exp(),
            Err(_) => f64::NAN,
        }
    };
    // right end where theta sqrt(t) reaches 400: the integrand is below e^{-700} there
    let s_hi = 2.0 * (400.0 / theta).ln();
    let s_lo = -40.0;
    let opts = QuadOptions { abs_tol: 1e-11, rel_tol: 1e-11, max_intervals: 4000 };
    // split at s = 0 and at the exponential-decay onset so both regimes get their own panels
    let mid = 2.0 * (1.0 / theta).ln().max(0.0);
    let mut total = integrate(g, s_lo, 0.0, opts)?.value;
    if mid > 0.0 {
        total += integrate(g, 0.0, mid, opts)?.value;
    }
    total += integrate(g, mid, s_hi.max(mid + 1.0), opts)?.value;
    Ok(1.0 - total)
}

/// GIG copulas have no tail dependence.
pub fn gig_tail_dependence(_p: &GigParams) -> (f64, f64) {
    (0.0, 0.0)
}

/// Frailty V = X/2 with X ~ GIG(nu, chi = theta^2, psi = 1).
pub fn sample_gig_frailty(p: &GigParams, rng: &mut RandomStream) -> Result<f64> {
    Ok(0.5 * sample_gig(p.nu, p.theta * p.theta, 1.0, rng)?)
}
