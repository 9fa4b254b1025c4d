use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling::{sample_log_frailty, RandomStream};
use crate::specfun::LogSumExp;

use super::{check_theta, FamilyId};

/// Monte Carlo estimate of (-1)^d psi^{(d)}(t) in log form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    /// log of the sample mean of V^d exp(-V t).
    pub log_value: f64,
    /// Standard error of the sample mean, on the linear scale.
    pub se: f64,
    /// log of the standard error; finite even when `se` underflows.
    pub log_se: f64,
    pub m: usize,
}

/// (1/m) sum_k V_k^d exp(-V_k t) over frailty draws V_k, accumulated in log space.
pub fn mc_gen_deriv(family: FamilyId, theta: f64, d: usize, t: f64, m: usize, rng: &mut RandomStream) -> Result<McEstimate> {
    check_theta(family, theta)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("derivative argument t = {t} must be positive and finite")));
    }
    if m == 0 {
        return Err(Error::Domain("Monte Carlo size m must be >= 1".into()));
    }
    let mut first = LogSumExp::new();
    let mut second = LogSumExp::new();
    for _ in 0..m {
        let lv = sample_log_frailty(family, theta, rng)?;
        let lw = d as f64 * lv - lv.exp() * t;
        first.push(lw);
        second.push(2.0 * lw);
    }
    let lm = (m as f64).ln();
    let log_mean = first.value() - lm;
    // variance of the mean: (E[w^2] - E[w]^2) / (m - 1), formed relative to E[w]^2
    let log_var = if m > 1 {
        let ratio = (second.value() - lm - 2.0 * log_mean).exp();
        let excess = (ratio - 1.0).max(0.0);
        2.0 * log_mean + excess.ln() - ((m - 1) as f64).ln()
    } else {
        f64::INFINITY
    };
    let log_se = 0.5 * log_var;
    Ok(McEstimate { log_value: log_mean, se: log_se.exp(), log_se, m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{log_gen_deriv, psi};

    fn within(est: &McEstimate, exact_log: f64, k: f64) -> bool {
        // compare on the scale of the exact value to avoid under/overflow
        let ratio = (est.log_value - exact_log).exp();
        let se_rel = (est.log_se - exact_log).exp();
        (ratio - 1.0).abs() <= k * se_rel
    }

    #[test]
    fn zeroth_order_is_the_generator() {
        let mut rng = RandomStream::new(4, 0);
        for f in FamilyId::ALL {
            let theta = if f == FamilyId::Amh { 0.6 } else { 2.0 };
            let e = mc_gen_deriv(f, theta, 0, 0.8, 100_000, &mut rng).unwrap();
            assert!(within(&e, psi(f, theta, 0.8).unwrap().ln(), 3.5), "{f}");
        }
    }

    #[test]
    fn clayton_fifth_derivative() {
        let mut rng = RandomStream::new(8, 0);
        let e = mc_gen_deriv(FamilyId::Clayton, 2.0, 5, 1.0, 100_000, &mut rng).unwrap();
        assert!(within(&e, log_gen_deriv(FamilyId::Clayton, 2.0, 5, 1.0).unwrap(), 3.5));
    }

    #[test]
    fn gumbel_stress_value() {
        let mut rng = RandomStream::new(12, 0);
        let e = mc_gen_deriv(FamilyId::Gumbel, 1.25, 50, 15.0, 1_000_000, &mut rng).unwrap();
        let exact = log_gen_deriv(FamilyId::Gumbel, 1.25, 50, 15.0).unwrap();
        assert!(within(&e, exact, 4.0), "{} vs {exact} (se {})", e.log_value, e.se);
    }

    #[test]
    fn single_draw_has_infinite_se() {
        let e = mc_gen_deriv(FamilyId::Frank, 1.0, 2, 1.0, 1, &mut RandomStream::new(0, 0)).unwrap();
        assert!(e.log_value.is_finite() && e.se == f64::INFINITY);
    }
}
