//! Family-plus-parameter values covering the one- and two-parameter families, with
//! dispatch to their generators, densities, scores, dependence measures and frailties.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{self, DensityEvaluator, FamilyId};
use crate::matrix::Matrix;
use crate::multiparam::{
    gig_log_gen_deriv, gig_log_psi, gig_tail_dependence, gig_tau, op_log_gen_deriv, op_log_psi, op_tail_dependence, op_tau, sample_gig_frailty,
    sample_op_log_frailty, GigDensity, GigParams, OpDensity, OuterPowerClaytonParams,
};
use crate::sampling::{sample_log_frailty, RandomStream};

/// Parameter values in the order given by [`ModelKind::param_names`].
pub type ParamVector = Vec<f64>;

/// A family without parameter values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Family(FamilyId),
    OpClayton,
    Gig,
}

impl ModelKind {
    pub fn n_params(self) -> usize {
        match self {
            ModelKind::Family(_) => 1,
            _ => 2,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Family(_) => &["theta"],
            ModelKind::OpClayton => &["theta", "beta"],
            ModelKind::Gig => &["nu", "theta"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Family(f) => f.name(),
            ModelKind::OpClayton => "opclayton",
            ModelKind::Gig => "gig",
        }
    }

    /// Attaches parameter values, validating them against the family domain.
    pub fn with_params(self, p: &[f64]) -> Result<Copula> {
        if p.len() != self.n_params() {
            return Err(Error::Domain(format!("{self} takes {} parameters, got {}", self.n_params(), p.len())));
        }
        Ok(match self {
            ModelKind::Family(family) => {
                families::check_theta(family, p[0])?;
                Copula::Archimedean { family, theta: p[0] }
            }
            ModelKind::OpClayton => Copula::OpClayton(OuterPowerClaytonParams::new(p[0], p[1])?),
            ModelKind::Gig => Copula::Gig(GigParams::new(p[0], p[1])?),
        })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "opclayton" | "opc" | "outer-power-clayton" => Ok(ModelKind::OpClayton),
            "gig" => Ok(ModelKind::Gig),
            other => other.parse().map(ModelKind::Family),
        }
    }
}

impl Serialize for ModelKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ModelKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A family with admissible parameter values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Copula {
    Archimedean { family: FamilyId, theta: f64 },
    OpClayton(OuterPowerClaytonParams),
    Gig(GigParams),
}

impl Copula {
    pub fn kind(&self) -> ModelKind {
        match self {
            Copula::Archimedean { family, .. } => ModelKind::Family(*family),
            Copula::OpClayton(_) => ModelKind::OpClayton,
            Copula::Gig(_) => ModelKind::Gig,
        }
    }

    pub fn params(&self) -> ParamVector {
        match self {
            Copula::Archimedean { theta, .. } => vec![*theta],
            Copula::OpClayton(p) => vec![p.theta, p.beta],
            Copula::Gig(p) => vec![p.nu, p.theta],
        }
    }

    /// log psi(t).
    pub fn log_psi(&self, t: f64) -> Result<f64> {
        match self {
            Copula::Archimedean { family, theta } => families::log_psi(*family, *theta, t),
            Copula::OpClayton(p) => op_log_psi(p, t),
            Copula::Gig(p) => {
                if t == f64::INFINITY {
                    Ok(f64::NEG_INFINITY)
                } else {
                    gig_log_psi(p, t)
                }
            }
        }
    }

    /// log((-1)^d psi^{(d)}(t)).
    pub fn log_gen_deriv(&self, d: usize, t: f64) -> Result<f64> {
        match self {
            Copula::Archimedean { family, theta } => families::log_gen_deriv(*family, *theta, d, t),
            Copula::OpClayton(p) => op_log_gen_deriv(p, d, t),
            Copula::Gig(p) => gig_log_gen_deriv(p, d, t),
        }
    }

    /// log of one frailty draw V with E[exp(-t V)] = psi(t).
    pub fn sample_log_frailty(&self, rng: &mut RandomStream) -> Result<f64> {
        match self {
            Copula::Archimedean { family, theta } => sample_log_frailty(*family, *theta, rng),
            Copula::OpClayton(p) => sample_op_log_frailty(p, rng),
            Copula::Gig(p) => Ok(sample_gig_frailty(p, rng)?.ln()),
        }
    }

    pub fn tau(&self) -> Result<f64> {
        match self {
            Copula::Archimedean { family, theta } => families::tau(*family, *theta),
            Copula::OpClayton(p) => Ok(op_tau(p)),
            Copula::Gig(p) => gig_tau(p),
        }
    }

    pub fn tail_dependence(&self) -> Result<(f64, f64)> {
        match self {
            Copula::Archimedean { family, theta } => families::tail_dependence(*family, *theta),
            Copula::OpClayton(p) => Ok(op_tail_dependence(p)),
            Copula::Gig(p) => Ok(gig_tail_dependence(p)),
        }
    }

    /// Log-density evaluator for dimension d.
    pub fn density(&self, d: usize) -> Result<Density> {
        Ok(match self {
            Copula::Archimedean { family, theta } => Density::Archimedean(DensityEvaluator::new(*family, *theta, d)?),
            Copula::OpClayton(p) => Density::OpClayton(OpDensity::new(*p, d)?),
            Copula::Gig(p) => Density::Gig(GigDensity::new(*p, d)?),
        })
    }

    pub fn log_density(&self, u: &[f64]) -> Result<f64> {
        self.density(u.len())?.log_density(u)
    }

    /// Per-row score vectors d/dparam log c(u_i).
    ///
    /// One-parameter families use the analytic score. Two-parameter families use central
    /// differences with step 1e-5 max(|p|, 0.1), switching to a one-sided difference when
    /// the central stencil would leave the parameter domain (beta = 1, nu near -1/2).
    pub fn scores(&self, u: &Matrix) -> Result<Vec<ParamVector>> {
        if let Copula::Archimedean { family, theta } = self {
            let ev = DensityEvaluator::new(*family, *theta, u.ncols())?;
            return u.rows().map(|r| ev.score(r).map(|s| vec![s])).collect();
        }
        let kind = self.kind();
        let p = self.params();
        let mut out = vec![vec![0.0; 2]; u.nrows()];
        for k in 0..2 {
            let h = 1e-5 * p[k].abs().max(0.1);
            let shifted = |delta: f64| {
                let mut q = p.clone();
                q[k] += delta;
                kind.with_params(&q).ok()
            };
            let (hi, lo, span) = match (shifted(h), shifted(-h)) {
                (Some(a), Some(b)) => (a, b, 2.0 * h),
                (Some(a), None) => (a, *self, h),
                (None, Some(b)) => (*self, b, h),
                (None, None) => return Err(Error::Domain(format!("no finite-difference stencil at {p:?}"))),
            };
            let (dh, dl) = (hi.density(u.ncols())?, lo.density(u.ncols())?);
            for (row, s) in u.rows().zip(out.iter_mut()) {
                s[k] = (dh.log_density(row)? - dl.log_density(row)?) / span;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Copula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = self.kind();
        write!(f, "{kind}(")?;
        for (i, (n, v)) in kind.param_names().iter().zip(self.params()).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}={v}")?;
        }
        f.write_str(")")
    }
}

/// Log-density evaluator for one copula and dimension, with cached coefficients.
#[derive(Debug, Clone)]
pub enum Density {
    Archimedean(DensityEvaluator),
    OpClayton(OpDensity),
    Gig(GigDensity),
}

impl Density {
    pub fn log_density(&self, u: &[f64]) -> Result<f64> {
        match self {
            Density::Archimedean(e) => e.log_density(u),
            Density::OpClayton(e) => e.log_density(u),
            Density::Gig(e) => e.log_density(u),
        }
    }
}
