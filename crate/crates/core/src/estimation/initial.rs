use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{tau_inverse, FamilyId};
use crate::model::ParamVector;
use crate::multiparam::{gig_tau, op_beta_for_tau, op_theta_for_tau, GigParams};
use crate::optim::brent_root;

/// Interior margin kept between tau targets and the ends of the attainable tau range.
pub const TAU_EPSILON: f64 = 0.005;

/// What to do when the clamped tau targets collapse to a single point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalPolicy {
    /// Widen downward from the upper target by max(2h, 2 epsilon).
    #[default]
    Clamp,
    Error,
}

/// Closed parameter interval for a one-parameter fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower < upper && lower.is_finite() && upper.is_finite() {
            Ok(Self { lower, upper })
        } else {
            Err(Error::Domain(format!("[{lower}, {upper}] is not a proper interval")))
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Parameter box for a two-parameter fit, with the inputs that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialBox {
    pub lower: ParamVector,
    pub upper: ParamVector,
    pub tau_hat: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    pub epsilon: f64,
    /// The tau targets coincided and the lower one was moved down by epsilon.
    pub widened: bool,
}

impl InitialBox {
    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter().zip(&self.lower).zip(&self.upper).all(|((x, l), u)| l <= x && x <= u)
    }

    pub fn center(&self) -> ParamVector {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }
}

/// [tau^{-1}(max(tau_hat - h, tau_l)), tau^{-1}(min(tau_hat + h, tau_u))], with both targets
/// kept at least epsilon inside the attainable tau range.
pub fn initial_interval_1p(family: FamilyId, tau_hat: f64, h: f64, policy: IntervalPolicy) -> Result<Interval> {
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::Domain(format!("interval half-width h = {h} must be in [0,1]")));
    }
    if !tau_hat.is_finite() {
        return Err(Error::Domain(format!("tau_hat = {tau_hat} is not finite")));
    }
    let (tl, tu) = family.tau_range();
    let (lo_cap, hi_cap) = (tl + TAU_EPSILON, tu - TAU_EPSILON);
    let mut lo = (tau_hat - h).clamp(lo_cap, hi_cap);
    let hi = (tau_hat + h).clamp(lo_cap, hi_cap);
    if hi - lo < 1e-12 {
        match policy {
            IntervalPolicy::Error => {
                return Err(Error::Range(format!(
                    "tau_hat = {tau_hat} with h = {h} leaves no attainable {family} tau interval"
                )))
            }
            IntervalPolicy::Clamp => {
                lo = (hi - (2.0 * h).max(2.0 * TAU_EPSILON)).max(lo_cap);
                if hi - lo < 1e-12 {
                    // tau_hat pinned at the lower cap
                    return Interval::new(tau_inverse(family, lo_cap)?, tau_inverse(family, lo_cap + 2.0 * TAU_EPSILON)?);
                }
            }
        }
    }
    Interval::new(tau_inverse(family, lo)?, tau_inverse(family, hi)?)
}

fn box_targets(tau_hat: f64, h_minus: f64, h_plus: f64, epsilon: f64) -> Result<(f64, f64, bool)> {
    if !(tau_hat > 0.0 && tau_hat < 1.0) {
        return Err(Error::Domain(format!("tau_hat = {tau_hat} must be in (0,1)")));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) || h_minus < 0.0 || h_plus < 0.0 {
        return Err(Error::Domain(format!("need epsilon in (0, 1/2) and h >= 0, got ({h_minus}, {h_plus}, {epsilon})")));
    }
    let hi = (tau_hat + h_plus).min(1.0 - epsilon);
    let mut lo = (tau_hat - h_minus).max(epsilon);
    if hi <= epsilon {
        return Err(Error::Range(format!("tau_hat = {tau_hat} is at or below epsilon = {epsilon}")));
    }
    let widened = hi - lo < epsilon * 1e-3;
    if widened {
        lo = (hi - epsilon).max(0.5 * epsilon);
    }
    Ok((lo, hi, widened))
}

/// Outer-power Clayton box: beta_l = 1; tau(theta_u, 1) = tau_hi; tau(theta_l, 1) = tau_lo;
/// tau(theta_l, beta_u) = tau_hi. Every solve is closed form.
pub fn initial_box_opc(tau_hat: f64, h_minus: f64, h_plus: f64, epsilon: f64) -> Result<InitialBox> {
    let (lo, hi, widened) = box_targets(tau_hat, h_minus, h_plus, epsilon)?;
    let theta_u = op_theta_for_tau(hi, 1.0);
    let theta_l = op_theta_for_tau(lo, 1.0);
    let beta_u = op_beta_for_tau(hi, theta_l);
    Ok(InitialBox {
        lower: vec![theta_l, 1.0],
        upper: vec![theta_u, beta_u],
        tau_hat,
        h_minus,
        h_plus,
        epsilon,
        widened,
    })
}

/// Solves gig_tau(nu, theta) = target in theta (nu fixed); tau decreases in theta.
fn gig_theta_for_tau(nu: f64, target: f64) -> Result<f64> {
    let f = |lt: f64| GigParams::new(nu, lt.exp()).and_then(|p| gig_tau(&p)).map_or(f64::NAN, |t| t - target);
    // tau -> 1 only as theta -> 0 at nu = 0, roughly like 1 - 1/log(1/theta)
    let (mut a, mut b) = (-1.0, 1.0);
    while f(a) < 0.0 {
        a *= 2.0;
        if a < -690.0 {
            return Err(Error::RootFind(format!("GIG theta bracket exhausted below for tau = {target}, nu = {nu}")));
        }
    }
    while f(b) > 0.0 {
        b *= 2.0;
        if b > 20.0 {
            return Err(Error::RootFind(format!("GIG theta bracket exhausted above for tau = {target}, nu = {nu}")));
        }
    }
    Ok(brent_root(f, a, b, 1e-12, 200)?.exp())
}

/// Solves gig_tau(nu, theta) = target in nu >= 0 (theta fixed); tau decreases in nu.
fn gig_nu_for_tau(theta: f64, target: f64) -> Result<f64> {
    let f = |nu: f64| GigParams::new(nu, theta).and_then(|p| gig_tau(&p)).map_or(f64::NAN, |t| t - target);
    if f(0.0) <= 0.0 {
        return Err(Error::RootFind(format!("GIG tau at nu = 0, theta = {theta} is already below {target}")));
    }
    let mut b = 1.0;
    while f(b) > 0.0 {
        b *= 2.0;
        if b > 1e6 {
            return Err(Error::RootFind(format!("GIG nu bracket exhausted for tau = {target}, theta = {theta}")));
        }
    }
    brent_root(f, 0.0, b, 1e-12, 200)
}

/// GIG box: nu_l = 0; tau(0, theta_u) = tau_lo; tau(0, theta_l) = tau_hi; tau(nu_u, theta_l) = tau_lo.
/// Coordinates are ordered (nu, theta).
pub fn initial_box_gig(tau_hat: f64, h_minus: f64, h_plus: f64, epsilon: f64) -> Result<InitialBox> {
    let (lo, hi, widened) = box_targets(tau_hat, h_minus, h_plus, epsilon)?;
    let theta_u = gig_theta_for_tau(0.0, lo)?;
    let theta_l = gig_theta_for_tau(0.0, hi)?;
    let nu_u = gig_nu_for_tau(theta_l, lo)?;
    Ok(InitialBox {
        lower: vec![0.0, theta_l],
        upper: vec![nu_u, theta_u],
        tau_hat,
        h_minus,
        h_plus,
        epsilon,
        widened,
    })
}
