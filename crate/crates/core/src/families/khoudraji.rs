use crate::error::{Error, Result};
use crate::specfun::LogSumExp;

use super::{check_theta, check_unit, log_density, log_gen_deriv, log_neg_dpsi_inv, psi_inv, FamilyId};

/// Largest dimension for the exact 2^d subset sum.
pub const KHOUDRAJI_MAX_DIM: usize = 20;

/// Log-density of C(u) = C_psi(u_1^{a_1}, ..., u_d^{a_d}) prod_j u_j^{1-a_j}.
///
/// Sums over subsets J of the coordinates differentiated through the Archimedean part:
/// each term is (-1)^{|J|} psi^{(|J|)}(t(v)) prod_{J} a_j (-psi^{-1})'(v_j)
/// prod_{J^c} (1-a_j) u_j^{-a_j}, with v = u^a. t(v) does not depend on J, so the
/// generator derivative is needed only once per subset size.
pub fn khoudraji_log_density(family: FamilyId, theta: f64, alphas: &[f64], u: &[f64]) -> Result<f64> {
    check_theta(family, theta)?;
    let d = u.len();
    if d > KHOUDRAJI_MAX_DIM {
        return Err(Error::DimensionCap { d, max: KHOUDRAJI_MAX_DIM });
    }
    if d < 2 || alphas.len() != d {
        return Err(Error::Domain(format!("need d >= 2 and {d} exponents, got {}", alphas.len())));
    }
    u.iter().try_for_each(|&x| check_unit(x))?;
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::Domain(format!("khoudraji exponent {a} is outside [0,1]")));
    }

    let v: Vec<f64> = u.iter().zip(alphas).map(|(&x, &a)| (a * x.ln()).exp()).collect();
    let mut t = 0.0;
    for &vj in &v {
        t += psi_inv(family, theta, vj)?;
    }
    // in-J factor log(a_j (-psi^{-1})'(v_j)); -inf when a_j = 0
    let mut in_j = vec![f64::NEG_INFINITY; d];
    // out-of-J factor log((1-a_j) u_j^{-a_j}); -inf when a_j = 1
    let mut out_j = vec![f64::NEG_INFINITY; d];
    for j in 0..d {
        let a = alphas[j];
        if a > 0.0 {
            in_j[j] = a.ln() + log_neg_dpsi_inv(family, theta, v[j])?;
        }
        if a < 1.0 {
            out_j[j] = (1.0 - a).ln() - a * u[j].ln();
        }
    }

    let all_positive = alphas.iter().all(|&a| a > 0.0);
    let mut by_size = vec![f64::NAN; d + 1];
    if t > 0.0 {
        for (k, slot) in by_size.iter_mut().enumerate().take(d) {
            *slot = log_gen_deriv(family, theta, k, t)?;
        }
    } else {
        // every v_j = 1: psi^{(k)}(0) is only needed for the empty set
        by_size[0] = 0.0;
    }

    let mut acc = LogSumExp::new();
    let full: usize = (1usize << d) - 1;
    for mask in 0..full {
        let k = mask.count_ones() as usize;
        let mut s = by_size[k];
        for j in 0..d {
            s += if mask >> j & 1 == 1 { in_j[j] } else { out_j[j] };
            if s == f64::NEG_INFINITY {
                break;
            }
        }
        if s > f64::NEG_INFINITY {
            acc.push(s);
        }
    }
    if all_positive {
        let sum_log_a: f64 = alphas.iter().map(|a| a.ln()).sum();
        acc.push(log_density(family, theta, &v)? + sum_log_a);
    }
    let r = acc.value();
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::NonFinite(format!("khoudraji {family} log-density at theta = {theta}")))
    }
}
