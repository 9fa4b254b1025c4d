use std::sync::{Arc, OnceLock, RwLock};

use super::signed_log::SignedLog;
use crate::error::{ensure, Result};

/// Stirling numbers of both kinds up to `max_n`, stored in log domain.
///
/// `first(n, k)` is the signed first-kind number s(n,k) with sign (-1)^(n-k);
/// `second(n, k)` is S(n,k) >= 0. Queries outside `0 <= k <= n <= max_n` return zero.
#[derive(Debug)]
pub struct StirlingTables {
    max_n: usize,
    // Unsigned first kind |s(n,k)|, log magnitude; row n has n+1 entries.
    log_first: Vec<Vec<f64>>,
    log_second: Vec<Vec<f64>>,
}

impl StirlingTables {
    /// Builds both tables eagerly through the positive recurrences
    /// |s|(n,k) = |s|(n-1,k-1) + (n-1)|s|(n-1,k) and S(n,k) = S(n-1,k-1) + k S(n-1,k).
    pub fn new(max_n: usize) -> Self {
        let max_n = max_n.max(1);
        let mut log_first = Vec::with_capacity(max_n + 1);
        let mut log_second = Vec::with_capacity(max_n + 1);
        log_first.push(vec![0.0]);
        log_second.push(vec![0.0]);
        for n in 1..=max_n {
            let pf: &Vec<f64> = &log_first[n - 1];
            let ps: &Vec<f64> = &log_second[n - 1];
            let mut rf = vec![f64::NEG_INFINITY; n + 1];
            let mut rs = vec![f64::NEG_INFINITY; n + 1];
            let log_nm1 = ((n - 1) as f64).ln();
            for k in 1..=n {
                let a = pf[k - 1];
                let b = if k < n { pf[k] + log_nm1 } else { f64::NEG_INFINITY };
                rf[k] = log_add(a, b);
                let a = ps[k - 1];
                let b = if k < n { ps[k] + (k as f64).ln() } else { f64::NEG_INFINITY };
                rs[k] = log_add(a, b);
            }
            log_first.push(rf);
            log_second.push(rs);
        }
        StirlingTables { max_n, log_first, log_second }
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    /// Signed Stirling number of the first kind s(n,k).
    pub fn first(&self, n: usize, k: usize) -> SignedLog {
        if n > self.max_n || k > n {
            return SignedLog::ZERO;
        }
        let sign = if (n - k).is_multiple_of(2) { 1 } else { -1 };
        SignedLog::new(sign, self.log_first[n][k])
    }

    /// log |s(n,k)|; `-inf` outside the triangle.
    pub fn log_first_abs(&self, n: usize, k: usize) -> f64 {
        if n > self.max_n || k > n {
            f64::NEG_INFINITY
        } else {
            self.log_first[n][k]
        }
    }

    /// Stirling number of the second kind S(n,k).
    pub fn second(&self, n: usize, k: usize) -> SignedLog {
        SignedLog::from_log(self.log_second(n, k))
    }

    /// log S(n,k); `-inf` outside the triangle.
    pub fn log_second(&self, n: usize, k: usize) -> f64 {
        if n > self.max_n || k > n {
            f64::NEG_INFINITY
        } else {
            self.log_second[n][k]
        }
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

static CACHE: OnceLock<RwLock<Arc<StirlingTables>>> = OnceLock::new();

/// Shared tables covering at least `max_n`; grows the process-wide cache on demand.
pub fn stirling_tables(max_n: usize) -> Result<Arc<StirlingTables>> {
    ensure(max_n >= 1, || format!("stirling_tables requires max_n >= 1, got {max_n}"))?;
    let cell = CACHE.get_or_init(|| RwLock::new(Arc::new(StirlingTables::new(256))));
    {
        let guard = cell.read().unwrap_or_else(|e| e.into_inner());
        if guard.max_n() >= max_n {
            return Ok(Arc::clone(&guard));
        }
    }
    let mut guard = cell.write().unwrap_or_else(|e| e.into_inner());
    if guard.max_n() < max_n {
        *guard = Arc::new(StirlingTables::new(max_n.next_power_of_two()));
    }
    Ok(Arc::clone(&guard))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        let t = stirling_tables(10).unwrap();
        assert_eq!(t.first(4, 2).sign(), 1);
        assert!((t.first(4, 2).to_f64() - 11.0).abs() < 1e-12);
        assert!((t.first(4, 1).to_f64() + 6.0).abs() < 1e-12);
        assert!((t.second(4, 2).to_f64() - 7.0).abs() < 1e-12);
        assert!((t.second(5, 3).to_f64() - 25.0).abs() < 1e-12);
        for n in 0..=10 {
            assert!((t.first(n, n).to_f64() - 1.0).abs() < 1e-15);
            assert!((t.second(n, n).to_f64() - 1.0).abs() < 1e-15);
        }
        for n in 1..=10 {
            assert!(t.first(n, 0).is_zero());
            assert!(t.second(n, 0).is_zero());
        }
        assert!(t.first(3, 4).is_zero());
    }

    #[test]
    fn signed_recurrence_holds_in_log_domain() {
        let t = stirling_tables(200).unwrap();
        for n in 2..=200 {
            for k in 1..n {
                let lhs = t.first(n, k);
                let rhs = t.first(n - 1, k - 1) - SignedLog::from_f64((n - 1) as f64) * t.first(n - 1, k);
                assert_eq!(lhs.sign(), rhs.sign());
                assert!((lhs.log_abs() - rhs.log_abs()).abs() <= 1e-12 * lhs.log_abs().abs().max(1.0));
                let lhs = t.second(n, k);
                let rhs = t.second(n - 1, k - 1) + SignedLog::from_f64(k as f64) * t.second(n - 1, k);
                assert!((lhs.log_abs() - rhs.log_abs()).abs() <= 1e-12 * lhs.log_abs().abs().max(1.0));
            }
        }
    }

    #[test]
    fn power_to_falling_factorial_basis() {
        let t = stirling_tables(12).unwrap();
        for x in [1i64, 2, 3] {
            for n in 0..=12usize {
                let mut acc = 0.0f64;
                for k in 0..=n {
                    let mut falling = 1.0;
                    for i in 0..k {
                        falling *= (x - i as i64) as f64;
                    }
                    acc += t.second(n, k).to_f64() * falling;
                }
                assert_eq!(acc.round(), (x as f64).powi(n as i32));
            }
        }
    }

    #[test]
    fn cache_grows_beyond_default() {
        let t = stirling_tables(300).unwrap();
        assert!(t.max_n() >= 300);
        assert!(t.second(300, 150).log_abs().is_finite());
    }
}
