use crate::error::{ensure, Error, Result};
use crate::specfun::{ln_gamma, log_rising_signed, stirling_tables, sum_signed, LogSumExp, SignedLog};

use super::MAX_ORDER;

/// Coefficients a_{dk}(theta), k = 1..d, of the Gumbel derivative polynomial
/// P(x) = sum_k a_{dk} x^k, with (-1)^d psi^{(d)}(t) = psi(t) P(t^{1/theta}) / t^d.
#[derive(Debug, Clone)]
pub struct GumbelPolyCoeffs {
    pub d: usize,
    pub theta: f64,
    /// `coeffs[k-1]` holds a_{dk}; every entry is positive for theta > 1.
    pub coeffs: Vec<SignedLog>,
    /// `dlog_dtheta[k-1]` holds d/dtheta log a_{dk}(theta); NaN where a_{dk} = 0.
    pub dlog_dtheta: Vec<f64>,
}

impl GumbelPolyCoeffs {
    /// log P(x) from log x.
    pub fn log_poly(&self, log_x: f64) -> f64 {
        let mut acc = LogSumExp::new();
        for (i, a) in self.coeffs.iter().enumerate() {
            acc.push(a.ln() + (i + 1) as f64 * log_x);
        }
        acc.value()
    }

    /// Normalized term weights a_k x^k / P(x), k = 1..d.
    pub fn weights(&self, log_x: f64) -> Vec<f64> {
        let lp = self.log_poly(log_x);
        self.coeffs.iter().enumerate().map(|(i, a)| (a.ln() + (i + 1) as f64 * log_x - lp).exp()).collect()
    }
}

/// Coefficients a_{dk}(theta) = S(d,k) Gamma(k - 1/theta) / Gamma(1 - 1/theta) of the
/// Joe derivative polynomial P(x) = sum_k a_{dk} x^{k-1}.
#[derive(Debug, Clone)]
pub struct JoePolyCoeffs {
    pub d: usize,
    pub theta: f64,
    pub coeffs: Vec<SignedLog>,
    pub dlog_dtheta: Vec<f64>,
}

impl JoePolyCoeffs {
    pub fn log_poly(&self, log_x: f64) -> f64 {
        let mut acc = LogSumExp::new();
        for (i, a) in self.coeffs.iter().enumerate() {
            acc.push(a.ln() + i as f64 * log_x);
        }
        acc.value()
    }

    pub fn weights(&self, log_x: f64) -> Vec<f64> {
        let lp = self.log_poly(log_x);
        self.coeffs.iter().enumerate().map(|(i, a)| (a.ln() + i as f64 * log_x - lp).exp()).collect()
    }
}

fn check_order(d: usize, theta: f64) -> Result<()> {
    ensure(d >= 1, || "coefficient order d must be >= 1".to_string())?;
    if d > MAX_ORDER {
        return Err(Error::DimensionCap { d, max: MAX_ORDER });
    }
    ensure(theta >= 1.0 && theta.is_finite(), || format!("theta = {theta} must be >= 1"))
}

/// Stirling-route orders at or below this size are cross-checked on construction.
const CROSS_CHECK_MAX_D: usize = 24;

/// Gumbel coefficients through the partial Bell polynomial recurrence.
///
/// With alpha = 1/theta, a_{dk} = (d!/k!) alpha^k c_{d,k} where c_{.,k} is the k-fold
/// convolution power of y_i = prod_{m=1}^{i-1}(m - alpha) / i!. All y_i are positive
/// for alpha < 1, so no cancellation occurs for any d. The published Stirling double
/// sum is evaluated as a cross-check for small d.
pub fn gumbel_coeffs(d: usize, theta: f64) -> Result<GumbelPolyCoeffs> {
    check_order(d, theta)?;
    let alpha = 1.0 / theta;
    if theta == 1.0 {
        let mut coeffs = vec![SignedLog::ZERO; d];
        let mut dlog = vec![f64::NAN; d];
        coeffs[d - 1] = SignedLog::ONE;
        dlog[d - 1] = -(d as f64);
        return Ok(GumbelPolyCoeffs { d, theta, coeffs, dlog_dtheta: dlog });
    }
    let (log_c, dlog_c) = match bell_columns_scaled(d, alpha) {
        Some(v) => v,
        None => bell_columns_log(d, alpha),
    };
    let log_fact_d = ln_gamma(d as f64 + 1.0);
    let mut coeffs = Vec::with_capacity(d);
    let mut dlog = Vec::with_capacity(d);
    let mut log_fact_k = 0.0;
    for k in 1..=d {
        log_fact_k += (k as f64).ln();
        let la = log_fact_d - log_fact_k + k as f64 * alpha.ln() + log_c[k];
        coeffs.push(SignedLog::from_log(la));
        // dalpha/dtheta = -alpha^2
        dlog.push(-alpha * alpha * (k as f64 / alpha + dlog_c[k]));
    }
    if coeffs.iter().any(|a| !a.log_abs().is_finite()) {
        return Err(Error::NonFinite(format!("Gumbel coefficients d={d}, theta={theta}")));
    }
    if d <= CROSS_CHECK_MAX_D {
        let (alt, magnitude) = stirling_route(d, theta)?;
        for k in 0..d {
            let diff = (coeffs[k].to_f64() - alt[k].to_f64()).abs();
            let scale = coeffs[k].to_f64().abs();
            if diff > 1e-6 * scale + 1e-13 * magnitude[k] {
                return Err(Error::CrossCheck(format!(
                    "Gumbel a_({d},{}) at theta={theta}: recurrence {} vs Stirling {}",
                    k + 1,
                    coeffs[k].to_f64(),
                    alt[k].to_f64()
                )));
            }
        }
    }
    Ok(GumbelPolyCoeffs { d, theta, coeffs, dlog_dtheta: dlog })
}

fn bell_weights(d: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    // y[i] and g[i] = d log y_i / d alpha = -sum_{m<i} 1/(m - alpha), for i = 1..=d.
    let mut y = vec![0.0; d + 1];
    let mut g = vec![0.0; d + 1];
    y[1] = 1.0;
    for i in 2..=d {
        let m = (i - 1) as f64;
        y[i] = y[i - 1] * (m - alpha) / i as f64;
        g[i] = g[i - 1] - 1.0 / (m - alpha);
    }
    (y, g)
}

/// Returns (log c_{d,k}, d/dalpha log c_{d,k}) for k = 0..=d, or None when a column
/// entry underflows the per-column scaling.
fn bell_columns_scaled(d: usize, alpha: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let (y, g) = bell_weights(d, alpha);
    // Column k-1 values (scaled) and their log-derivatives, indexed by n.
    let mut prev = vec![0.0; d + 1];
    let mut prev_r = vec![0.0; d + 1];
    prev[0] = 1.0;
    let mut prev_scale = 0.0;
    let mut log_c = vec![f64::NEG_INFINITY; d + 1];
    let mut dlog_c = vec![0.0; d + 1];
    let mut cur = vec![0.0; d + 1];
    let mut cur_r = vec![0.0; d + 1];
    for k in 1..=d {
        let mut max = 0.0f64;
        for n in k..=d {
            let mut s = 0.0;
            let mut sr = 0.0;
            for i in 1..=(n + 1 - k) {
                let w = y[i] * prev[n - i];
                s += w;
                sr += w * (g[i] + prev_r[n - i]);
            }
            cur[n] = s;
            cur_r[n] = if s > 0.0 { sr / s } else { 0.0 };
            max = max.max(s);
        }
        if !(max > 0.0 && max.is_finite()) {
            return None;
        }
        for n in 0..=d {
            prev[n] = if n >= k { cur[n] / max } else { 0.0 };
            prev_r[n] = if n >= k { cur_r[n] } else { 0.0 };
        }
        prev_scale += max.ln();
        if !(prev[d] > 1e-280) {
            return None;
        }
        log_c[k] = prev_scale + prev[d].ln();
        dlog_c[k] = prev_r[d];
    }
    Some((log_c, dlog_c))
}

/// Log-domain version of `bell_columns_scaled`; slower, never underflows.
fn bell_columns_log(d: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let (_, g) = bell_weights(d, alpha);
    let log_y: Vec<f64> = (0..=d)
        .map(|i| if i == 0 { f64::NEG_INFINITY } else { log_y_direct(i, alpha) })
        .collect();
    let mut prev = vec![f64::NEG_INFINITY; d + 1];
    let mut prev_r = vec![0.0; d + 1];
    prev[0] = 0.0;
    let mut log_c = vec![f64::NEG_INFINITY; d + 1];
    let mut dlog_c = vec![0.0; d + 1];
    for k in 1..=d {
        let mut cur = vec![f64::NEG_INFINITY; d + 1];
        let mut cur_r = vec![0.0; d + 1];
        for n in k..=d {
            let terms: Vec<f64> = (1..=(n + 1 - k)).map(|i| log_y[i] + prev[n - i]).collect();
            let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut s = 0.0;
            let mut sr = 0.0;
            for (j, lt) in terms.iter().enumerate() {
                let i = j + 1;
                let w = (lt - max).exp();
                s += w;
                sr += w * (g[i] + prev_r[n - i]);
            }
            cur[n] = max + s.ln();
            cur_r[n] = sr / s;
        }
        prev = cur;
        prev_r = cur_r;
        log_c[k] = prev[d];
        dlog_c[k] = prev_r[d];
    }
    (log_c, dlog_c)
}

fn log_y_direct(i: usize, alpha: f64) -> f64 {
    let mut s = 0.0;
    for m in 1..i {
        s += (m as f64 - alpha).ln();
    }
    s - ln_gamma(i as f64 + 1.0)
}

/// Returns the Stirling double sum and, per k, the sum of absolute summand magnitudes
/// (the scale of its rounding error).
fn stirling_route(d: usize, theta: f64) -> Result<(Vec<SignedLog>, Vec<f64>)> {
    let tables = stirling_tables(d)?;
    let log_alpha = -theta.ln();
    let mut out = Vec::with_capacity(d);
    let mut mags = Vec::with_capacity(d);
    for k in 1..=d {
        let terms: Vec<SignedLog> = (k..=d)
            .map(|j| SignedLog::from_log(j as f64 * log_alpha) * tables.first(d, j) * tables.second(j, k))
            .collect();
        let mag: f64 = terms.iter().map(|t| t.abs().to_f64()).sum();
        let s = sum_signed(&terms);
        out.push(if (d - k).is_multiple_of(2) { s } else { -s });
        mags.push(mag);
    }
    Ok((out, mags))
}

/// Gumbel coefficients by the Stirling double sum
/// a_{dk} = (-1)^{d-k} sum_{j=k}^d theta^{-j} s(d,j) S(j,k).
///
/// Alternating; loses relative accuracy as d grows (about 1e-4 at d = 50, theta = 1.25).
pub fn gumbel_coeffs_stirling(d: usize, theta: f64) -> Result<Vec<SignedLog>> {
    check_order(d, theta)?;
    Ok(stirling_route(d, theta)?.0)
}

/// Gumbel coefficients by the binomial sum
/// a_{dk} = (d!/k!) sum_{j=1}^k C(k,j) C(j/theta, d) (-1)^{d-j}.
///
/// Alternating; only reliable for small d.
pub fn gumbel_coeffs_binomial(d: usize, theta: f64) -> Result<Vec<SignedLog>> {
    check_order(d, theta)?;
    Ok(binomial_route(d, theta).0)
}

/// Binomial-route coefficients with log sum_j |term_j| per k, the scale of the
/// rounding error left after cancellation.
fn binomial_route(d: usize, theta: f64) -> (Vec<SignedLog>, Vec<f64>) {
    let alpha = 1.0 / theta;
    let mut out = Vec::with_capacity(d);
    let mut mags = Vec::with_capacity(d);
    for k in 1..=d {
        let log_fact_k = ln_gamma(k as f64 + 1.0);
        let terms: Vec<SignedLog> = (1..=k)
            .map(|j| {
                let log_binom_kj = log_fact_k - ln_gamma(j as f64 + 1.0) - ln_gamma((k - j) as f64 + 1.0);
                // (d!/k!) C(k,j) C(alpha j, d) = C(k,j)/k! * prod_{m=0}^{d-1} (alpha j - m)
                let (sign, log_prod) = log_rising_signed(alpha * j as f64 - (d - 1) as f64, d);
                let sign = if (d - j).is_multiple_of(2) { sign } else { -sign };
                SignedLog::new(sign, log_binom_kj - log_fact_k + log_prod)
            })
            .collect();
        let abs: Vec<SignedLog> = terms.iter().map(|t| t.abs()).collect();
        mags.push(sum_signed(&abs).ln());
        out.push(sum_signed(&terms));
    }
    (out, mags)
}

/// Joe coefficients a_{dk} = S(d,k) prod_{j=1}^{k-1} (j - 1/theta), with their
/// theta-derivatives d log a_{dk} / d theta = sum_{j=1}^{k-1} 1/(theta (theta j - 1)).
pub fn joe_coeffs(d: usize, theta: f64) -> Result<JoePolyCoeffs> {
    check_order(d, theta)?;
    let tables = stirling_tables(d)?;
    let alpha = 1.0 / theta;
    let mut coeffs = Vec::with_capacity(d);
    let mut dlog = Vec::with_capacity(d);
    let mut log_prod = 0.0;
    let mut dsum = 0.0;
    for k in 1..=d {
        if k >= 2 {
            let j = (k - 1) as f64;
            log_prod += (j - alpha).ln();
            dsum += 1.0 / (theta * (theta * j - 1.0));
        }
        coeffs.push(SignedLog::from_log(tables.log_second(d, k) + log_prod));
        dlog.push(if log_prod == f64::NEG_INFINITY { f64::NAN } else { dsum });
    }
    Ok(JoePolyCoeffs { d, theta, coeffs, dlog_dtheta: dlog })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gumbel_small_cases() {
        let c = gumbel_coeffs(1, 2.0).unwrap();
        assert!((c.coeffs[0].to_f64() - 0.5).abs() < 1e-15);
        let c = gumbel_coeffs(2, 2.0).unwrap();
        assert!((c.coeffs[0].to_f64() - 0.25).abs() < 1e-15);
        assert!((c.coeffs[1].to_f64() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn gumbel_routes_agree_for_small_d() {
        for d in 1..=20 {
            for theta in [1.05, 1.25, 2.0, 7.5] {
                let c = gumbel_coeffs(d, theta).unwrap();
                let (s, smag) = stirling_route(d, theta).unwrap();
                let (b, bmag) = binomial_route(d, theta);
                for k in 0..d {
                    let a = c.coeffs[k].to_f64();
                    assert!(a > 0.0);
                    let tol = 1e-8 * a + 1e-13 * smag[k];
                    assert!((s[k].to_f64() - a).abs() < tol, "stirling d={d} k={} theta={theta}", k + 1);
                    let tol = 1e-8 * a + 1e-13 * bmag[k].exp();
                    assert!((b[k].to_f64() - a).abs() < tol, "binomial d={d} k={} theta={theta}", k + 1);
                }
            }
        }
    }

    #[test]
    fn gumbel_scaled_and_log_paths_agree() {
        for (d, theta) in [(50, 1.25), (100, 1.25), (200, 3.0), (80, 1.0001)] {
            let (a, da) = bell_columns_scaled(d, 1.0 / theta).unwrap();
            let (b, db) = bell_columns_log(d, 1.0 / theta);
            for k in 1..=d {
                assert!((a[k] - b[k]).abs() < 1e-10 * b[k].abs().max(1.0), "d={d} k={k}");
                assert!((da[k] - db[k]).abs() < 1e-9 * db[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn gumbel_theta_derivative_by_finite_difference() {
        for (d, theta) in [(3, 2.0), (10, 1.4), (40, 3.3)] {
            let c = gumbel_coeffs(d, theta).unwrap();
            let h = 1e-6;
            let up = gumbel_coeffs(d, theta + h).unwrap();
            let dn = gumbel_coeffs(d, theta - h).unwrap();
            for k in 0..d {
                let fd = (up.coeffs[k].ln() - dn.coeffs[k].ln()) / (2.0 * h);
                assert!((fd - c.dlog_dtheta[k]).abs() < 1e-6 * fd.abs().max(1.0), "d={d} k={}", k + 1);
            }
        }
    }

    #[test]
    fn joe_examples() {
        let c = joe_coeffs(1, 3.0).unwrap();
        assert!((c.coeffs[0].to_f64() - 1.0).abs() < 1e-15);
        let c = joe_coeffs(3, 2.0).unwrap();
        let want = [1.0, 1.5, 0.75];
        for (got, w) in c.coeffs.iter().zip(want) {
            assert!((got.to_f64() - w).abs() < 1e-14);
        }
        for d in 1..=30 {
            assert!((joe_coeffs(d, 1.7).unwrap().coeffs[0].to_f64() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn joe_theta_derivative_by_finite_difference() {
        let c = joe_coeffs(8, 2.5).unwrap();
        let h = 1e-6;
        let up = joe_coeffs(8, 2.5 + h).unwrap();
        let dn = joe_coeffs(8, 2.5 - h).unwrap();
        for k in 0..8 {
            let fd = (up.coeffs[k].ln() - dn.coeffs[k].ln()) / (2.0 * h);
            assert!((fd - c.dlog_dtheta[k]).abs() < 1e-7);
        }
    }
}
