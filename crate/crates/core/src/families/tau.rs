use crate::error::{Error, Result};
use crate::optim::brent_root;
use crate::specfun::{debye1, digamma};

use super::{check_theta, FamilyId};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// B_2, B_4, ..., B_20.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// zeta(2), ..., zeta(8).
const ZETA: [f64; 7] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_369_9,
    1.017_343_061_984_449_1,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
];

/// Kendall's tau of the family at theta.
pub fn tau(family: FamilyId, theta: f64) -> Result<f64> {
    check_theta(family, theta)?;
    Ok(match family {
        FamilyId::Amh => amh_tau(theta),
        FamilyId::Clayton => theta / (theta + 2.0),
        FamilyId::Frank => frank_tau(theta)?,
        FamilyId::Gumbel => 1.0 - 1.0 / theta,
        FamilyId::Joe => joe_tau(theta),
    })
}

fn amh_tau(theta: f64) -> f64 {
    if theta <= 0.5 {
        // (4/3) sum_{m>=1} theta^m / (m (m+1) (m+2)); terms shrink at least as 2^{-m}
        let mut s = 0.0;
        let mut p = 1.0;
        for m in 1..200 {
            p *= theta;
            let mf = m as f64;
            let term = p / (mf * (mf + 1.0) * (mf + 2.0));
            s += term;
            if term < 1e-18 * s {
                break;
            }
        }
        4.0 / 3.0 * s
    } else {
        let om = 1.0 - theta;
        1.0 - 2.0 * (om * om * om.ln() + theta) / (3.0 * theta * theta)
    }
}

fn frank_tau(theta: f64) -> Result<f64> {
    if theta < 1.0 {
        // 4 sum_k B_{2k} theta^{2k-1} / ((2k+1) (2k)!)
        let mut s = 0.0;
        let mut fact = 1.0;
        let mut pow = theta;
        for (i, b) in BERNOULLI_EVEN.iter().enumerate() {
            let k2 = 2.0 * (i + 1) as f64;
            fact *= (k2 - 1.0) * k2;
            s += b * pow / ((k2 + 1.0) * fact);
            pow *= theta * theta;
        }
        Ok(4.0 * s)
    } else {
        Ok(1.0 + 4.0 * (debye1(theta)? - 1.0) / theta)
    }
}

/// (digamma(1+x) + gamma) / x, continuous through x = 0.
fn digamma_quotient(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let mut s = 0.0;
        let mut p = 1.0;
        for (i, z) in ZETA.iter().enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * z * p;
            p *= x;
        }
        s
    } else {
        (digamma(1.0 + x) + EULER_GAMMA) / x
    }
}

fn joe_tau(theta: f64) -> f64 {
    if theta == 1.0 {
        return 0.0;
    }
    // 1 - 4 sum_k 1/(k (theta k + 2)(theta (k-1) + 2)) summed by partial fractions
    let a = 2.0 / theta;
    let b = a - 1.0;
    1.0 - 4.0 / (theta * theta) * (digamma_quotient(b) - digamma_quotient(a))
}

/// Parameter with the given Kendall's tau.
pub fn tau_inverse(family: FamilyId, tau_target: f64) -> Result<f64> {
    let (lo, hi) = family.tau_range();
    let attainable = match family {
        FamilyId::Gumbel | FamilyId::Joe => tau_target >= lo && tau_target < hi,
        _ => tau_target > lo && tau_target < hi,
    };
    if family == FamilyId::Amh && tau_target == 0.0 {
        return Ok(0.0);
    }
    if !attainable {
        return Err(Error::Range(format!("tau = {tau_target} is not attainable by the {family} family")));
    }
    match family {
        FamilyId::Gumbel => return Ok(1.0 / (1.0 - tau_target)),
        FamilyId::Clayton => return Ok(2.0 * tau_target / (1.0 - tau_target)),
        FamilyId::Joe if tau_target == 0.0 => return Ok(1.0),
        _ => {}
    }
    let f = |th: f64| tau(family, th).map(|v| v - tau_target).unwrap_or(f64::NAN);
    let (a, b) = match family {
        FamilyId::Amh => {
            // tau_amh -> 1/3 only as theta -> 1, so move the upper end toward 1
            let mut b = 0.5;
            while f(b) < 0.0 {
                b = 1.0 - (1.0 - b) / 4.0;
                if 1.0 - b < 1e-15 {
                    return Err(Error::RootFind(format!("amh tau bracket exhausted for tau = {tau_target}")));
                }
            }
            (0.0, b)
        }
        _ => {
            let lower = if family == FamilyId::Joe { 1.0 } else { 1e-12 };
            let mut b = lower + 1.0;
            while f(b) < 0.0 {
                b = lower + 2.0 * (b - lower);
                if b > 1e15 {
                    return Err(Error::RootFind(format!("{family} tau bracket exhausted for tau = {tau_target}")));
                }
            }
            (lower, b)
        }
    };
    let xtol = 1e-14 * b.max(1.0);
    brent_root(f, a, b, xtol, 500)
}

/// Lower and upper tail-dependence coefficients.
pub fn tail_dependence(family: FamilyId, theta: f64) -> Result<(f64, f64)> {
    check_theta(family, theta)?;
    Ok(match family {
        FamilyId::Clayton => (2f64.powf(-1.0 / theta), 0.0),
        FamilyId::Gumbel | FamilyId::Joe => (0.0, 2.0 - 2f64.powf(1.0 / theta)),
        FamilyId::Amh | FamilyId::Frank => (0.0, 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadOptions};

    fn joe_tau_direct(theta: f64) -> f64 {
        // sum to 2e6 terms plus the integral tail 4/(theta^2 * 2 n^2)
        let n = 2_000_000usize;
        let mut s = 0.0;
        for k in (1..=n).rev() {
            let k = k as f64;
            s += 1.0 / (k * (theta * k + 2.0) * (theta * (k - 1.0) + 2.0));
        }
        let tail = 1.0 / (2.0 * theta * theta * (n as f64).powi(2));
        1.0 - 4.0 * (s + tail)
    }

    #[test]
    fn examples() {
        assert_eq!(tau(FamilyId::Clayton, 2.0).unwrap(), 0.5);
        assert_eq!(tau(FamilyId::Gumbel, 1.0).unwrap(), 0.0);
        assert_eq!(tau(FamilyId::Joe, 1.0).unwrap(), 0.0);
        assert_eq!(tau(FamilyId::Amh, 0.0).unwrap(), 0.0);
        let t = tau(FamilyId::Amh, 0.999).unwrap();
        assert!(t < 1.0 / 3.0 && t > tau(FamilyId::Amh, 0.99).unwrap());
        assert!((tau_inverse(FamilyId::Gumbel, 0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!((tau_inverse(FamilyId::Clayton, 0.5).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn joe_matches_direct_series() {
        for theta in [1.01, 1.5, 1.999, 2.0, 2.001, 3.0, 10.0, 50.0] {
            let a = tau(FamilyId::Joe, theta).unwrap();
            let b = joe_tau_direct(theta);
            assert!((a - b).abs() < 1e-11, "theta={theta}: {a} vs {b}");
        }
    }

    #[test]
    fn amh_branches_agree() {
        for theta in [0.3f64, 0.5, 0.50001] {
            let om = 1.0 - theta;
            let closed = 1.0 - 2.0 * (om * om * om.ln() + theta) / (3.0 * theta * theta);
            assert!((amh_tau(theta) - closed).abs() < 1e-13);
        }
    }

    #[test]
    fn frank_series_matches_debye_form() {
        for theta in [0.3, 0.999, 1.0] {
            let debye = 1.0 + 4.0 * (debye1(theta).unwrap() - 1.0) / theta;
            let series = {
                let mut s = 0.0;
                let mut fact = 1.0;
                let mut pow = theta;
                for (i, b) in BERNOULLI_EVEN.iter().enumerate() {
                    let k2 = 2.0 * (i + 1) as f64;
                    fact *= (k2 - 1.0) * k2;
                    s += b * pow / ((k2 + 1.0) * fact);
                    pow *= theta * theta;
                }
                4.0 * s
            };
            assert!((debye - series).abs() < 1e-11, "theta={theta}");
        }
    }

    #[test]
    fn frank_matches_copula_integral() {
        // tau = 4 E[C(U,V)] - 1 for the bivariate copula, by 2-D quadrature of c * C
        let theta = 5.0f64;
        let c_cdf = |u: f64, v: f64| {
            -((-theta * u).exp_m1() * (-theta * v).exp_m1() / (-theta).exp_m1()).ln_1p() / theta
        };
        let dens = |u: f64, v: f64| {
            let num = theta * -(-theta).exp_m1() * (-theta * (u + v)).exp();
            let den = (-(-theta).exp_m1() - (1.0 - (-theta * u).exp()) * (1.0 - (-theta * v).exp())).powi(2);
            num / den
        };
        let opts = QuadOptions { abs_tol: 1e-11, rel_tol: 1e-11, max_intervals: 2000 };
        let inner = |u: f64| integrate(|v| dens(u, v) * c_cdf(u, v), 0.0, 1.0, opts).unwrap().value;
        let e = integrate(inner, 0.0, 1.0, opts).unwrap().value;
        assert!((4.0 * e - 1.0 - tau(FamilyId::Frank, theta).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn increasing_and_round_trip() {
        for f in FamilyId::ALL {
            let grid: Vec<f64> = match f {
                FamilyId::Amh => (0..=99).map(|i| i as f64 / 100.0).collect(),
                FamilyId::Clayton | FamilyId::Frank => (1..=200).map(|i| 0.05 * i as f64).collect(),
                FamilyId::Gumbel | FamilyId::Joe => (0..=200).map(|i| 1.0 + 0.05 * i as f64).collect(),
            };
            let taus: Vec<f64> = grid.iter().map(|&th| tau(f, th).unwrap()).collect();
            assert!(taus.windows(2).all(|w| w[1] > w[0]), "{f} tau not increasing");
            for x in [0.1, 0.25, 0.75] {
                if f == FamilyId::Amh && x > 1.0 / 3.0 {
                    assert!(tau_inverse(f, x).is_err());
                    continue;
                }
                let th = tau_inverse(f, x).unwrap();
                assert!((tau(f, th).unwrap() - x).abs() < 1e-10, "{f} tau={x}");
            }
        }
    }

    #[test]
    fn out_of_range_targets() {
        assert!(tau_inverse(FamilyId::Clayton, 0.0).is_err());
        assert!(tau_inverse(FamilyId::Frank, 1.0).is_err());
        assert!(tau_inverse(FamilyId::Amh, 0.34).is_err());
        assert_eq!(tau_inverse(FamilyId::Gumbel, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn tail_dependence_examples() {
        assert_eq!(tail_dependence(FamilyId::Clayton, 1.0).unwrap(), (0.5, 0.0));
        assert_eq!(tail_dependence(FamilyId::Gumbel, 1.0).unwrap(), (0.0, 0.0));
        let (_, u) = tail_dependence(FamilyId::Joe, 2.0).unwrap();
        assert!((u - (2.0 - 2f64.sqrt())).abs() < 1e-15);
    }
}
