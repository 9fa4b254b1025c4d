//! The five one-parameter Archimedean families (Ali–Mikhail–Haq, Clayton, Frank,
//! Gumbel, Joe): generators, derivatives of any order, densities, scores, Kendall's
//! tau and tail dependence.

mod coeffs;
mod density;
mod deriv;
mod khoudraji;
mod mc;
mod score;
mod tau;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use coeffs::{gumbel_coeffs, gumbel_coeffs_binomial, gumbel_coeffs_stirling, joe_coeffs, GumbelPolyCoeffs, JoePolyCoeffs};
pub use density::{log_density, log_density_generic, DensityEvaluator};
pub use deriv::log_gen_deriv;
pub use khoudraji::{khoudraji_log_density, KHOUDRAJI_MAX_DIM};
pub use mc::{mc_gen_deriv, McEstimate};
pub use score::{clayton_loglik_hessian, score};
pub use tau::{tail_dependence, tau, tau_inverse};

/// Largest derivative order / dimension supported by the coefficient tables.
pub const MAX_ORDER: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyId {
    Amh,
    Clayton,
    Frank,
    Gumbel,
    Joe,
}

impl FamilyId {
    pub const ALL: [FamilyId; 5] = [FamilyId::Amh, FamilyId::Clayton, FamilyId::Frank, FamilyId::Gumbel, FamilyId::Joe];

    pub fn name(self) -> &'static str {
        match self {
            FamilyId::Amh => "amh",
            FamilyId::Clayton => "clayton",
            FamilyId::Frank => "frank",
            FamilyId::Gumbel => "gumbel",
            FamilyId::Joe => "joe",
        }
    }

    pub fn domain(self) -> ParamDomain {
        match self {
            FamilyId::Amh => ParamDomain { family: self, lower: 0.0, upper: 1.0, lower_open: false, upper_open: true },
            FamilyId::Clayton | FamilyId::Frank => {
                ParamDomain { family: self, lower: 0.0, upper: f64::INFINITY, lower_open: true, upper_open: true }
            }
            FamilyId::Gumbel | FamilyId::Joe => {
                ParamDomain { family: self, lower: 1.0, upper: f64::INFINITY, lower_open: false, upper_open: true }
            }
        }
    }

    /// Kendall's tau range (lower, upper); the upper end is a supremum, never attained.
    pub fn tau_range(self) -> (f64, f64) {
        match self {
            FamilyId::Amh => (0.0, 1.0 / 3.0),
            _ => (0.0, 1.0),
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "amh" | "ali-mikhail-haq" => Ok(FamilyId::Amh),
            "clayton" | "c" => Ok(FamilyId::Clayton),
            "frank" | "f" => Ok(FamilyId::Frank),
            "gumbel" | "g" => Ok(FamilyId::Gumbel),
            "joe" | "j" => Ok(FamilyId::Joe),
            other => Err(Error::Parse(format!("unknown family '{other}'"))),
        }
    }
}

/// Admissible parameter set of a one-parameter family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDomain {
    pub family: FamilyId,
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

impl ParamDomain {
    pub fn contains(&self, theta: f64) -> bool {
        if theta.is_nan() {
            return false;
        }
        let lo_ok = if self.lower_open { theta > self.lower } else { theta >= self.lower };
        let hi_ok = if self.upper_open { theta < self.upper } else { theta <= self.upper };
        lo_ok && hi_ok
    }

    /// True for the closed lower endpoint (AMH 0, Gumbel 1, Joe 1), where the copula is
    /// the independence copula.
    pub fn is_independence(&self, theta: f64) -> bool {
        !self.lower_open && theta == self.lower
    }
}

pub(crate) fn check_theta(family: FamilyId, theta: f64) -> Result<()> {
    if family.domain().contains(theta) {
        Ok(())
    } else {
        Err(Error::Domain(format!("theta = {theta} is outside the {family} parameter domain")))
    }
}

pub(crate) fn check_unit(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("copula argument {u} is not in the open interval (0,1)")))
    }
}

/// log(exp(t) - theta) for t >= 0, theta in [0, 1).
fn log_exp_minus(t: f64, theta: f64) -> f64 {
    if t <= 1.0 {
        (t.exp_m1() + (1.0 - theta)).ln()
    } else {
        t + (-theta * (-t).exp()).ln_1p()
    }
}

/// log(1 - (1 - e^{-t})^alpha) for t > 0, alpha in (0,1].
fn log_joe_psi(t: f64, alpha: f64) -> f64 {
    if t > 30.0 {
        // 1 - (1-y)^a = a y (1 + (1-a) y / 2 + ...), y = e^{-t}
        alpha.ln() - t + (0.5 * (1.0 - alpha) * (-t).exp()).ln_1p()
    } else {
        (-(alpha * log_one_minus_exp_neg(t)).exp_m1()).ln()
    }
}

/// log of -log1p(-z) given log z, z in (0,1).
fn log_neg_log1p_neg(log_z: f64) -> f64 {
    if log_z < -30.0 {
        let z = log_z.exp();
        log_z + (0.5 * z).ln_1p()
    } else {
        (-(-log_z.exp()).ln_1p()).ln()
    }
}

/// log(1 - e^{-theta}) for theta > 0.
pub(crate) fn log_one_minus_exp_neg(theta: f64) -> f64 {
    if theta < std::f64::consts::LN_2 {
        (-(-theta).exp_m1()).ln()
    } else {
        (-(-theta).exp()).ln_1p()
    }
}

/// log psi(t), exact in the tails (t = +inf gives -inf).
pub fn log_psi(family: FamilyId, theta: f64, t: f64) -> Result<f64> {
    check_theta(family, theta)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("generator argument t = {t} must be >= 0")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if t == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(match family {
        FamilyId::Amh => {
            if theta == 0.0 {
                -t
            } else {
                (1.0 - theta).ln() - log_exp_minus(t, theta)
            }
        }
        FamilyId::Clayton => -t.ln_1p() / theta,
        FamilyId::Frank => {
            let log_z = log_one_minus_exp_neg(theta) - t;
            if log_z < -std::f64::consts::LN_2 {
                log_neg_log1p_neg(log_z) - theta.ln()
            } else {
                // 1 - z formed without cancellation
                let one_minus_z = -(-t).exp_m1() + (-t - theta).exp();
                (-one_minus_z.ln()).ln() - theta.ln()
            }
        }
        FamilyId::Gumbel => -t.powf(1.0 / theta),
        FamilyId::Joe => {
            if theta == 1.0 {
                -t
            } else {
                log_joe_psi(t, 1.0 / theta)
            }
        }
    })
}

/// Generator psi(t).
pub fn psi(family: FamilyId, theta: f64, t: f64) -> Result<f64> {
    Ok(log_psi(family, theta, t)?.exp())
}

/// Inverse generator psi^{-1}(u) for u in (0,1].
pub fn psi_inv(family: FamilyId, theta: f64, u: f64) -> Result<f64> {
    check_theta(family, theta)?;
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::Domain(format!("psi_inv argument u = {u} must be in (0,1]")));
    }
    if u == 1.0 {
        return Ok(0.0);
    }
    let lu = u.ln();
    Ok(match family {
        FamilyId::Amh => (-theta * (1.0 - u)).ln_1p() - lu,
        FamilyId::Clayton => (-theta * lu).exp_m1(),
        FamilyId::Frank => {
            let num = (-theta * u).exp() * -(-theta * (1.0 - u)).exp_m1();
            (num / -(-theta * u).exp_m1()).ln_1p()
        }
        FamilyId::Gumbel => (-lu).powf(theta),
        FamilyId::Joe => -log_one_minus_pow_complement_theta(u, theta),
    })
}

/// log(1 - (1-u)^theta) for theta >= 1, u in (0,1).
pub(crate) fn log_one_minus_pow_complement_theta(u: f64, theta: f64) -> f64 {
    let lx = theta * (-u).ln_1p();
    if lx < -std::f64::consts::LN_2 {
        (-lx.exp()).ln_1p()
    } else {
        (-lx.exp_m1()).ln()
    }
}

/// log(-(psi^{-1})'(u)) for u in (0,1).
pub fn log_neg_dpsi_inv(family: FamilyId, theta: f64, u: f64) -> Result<f64> {
    check_theta(family, theta)?;
    check_unit(u)?;
    let lu = u.ln();
    Ok(match family {
        FamilyId::Amh => (1.0 - theta).ln() - lu - (-theta * (1.0 - u)).ln_1p(),
        FamilyId::Clayton => theta.ln() - (theta + 1.0) * lu,
        FamilyId::Frank => theta.ln() - (theta * u).exp_m1().ln(),
        FamilyId::Gumbel => theta.ln() + (theta - 1.0) * (-lu).ln() - lu,
        FamilyId::Joe => theta.ln() + (theta - 1.0) * (-u).ln_1p() - log_one_minus_pow_complement_theta(u, theta),
    })
}
