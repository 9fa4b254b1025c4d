use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

/// A real number stored as a sign and the natural log of its magnitude.
///
/// Values far outside the `f64` range (Stirling numbers for n = 200, generator
/// derivatives of order 100) stay representable, and products never overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    sign: i8,
    log_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0, log_abs: f64::NEG_INFINITY };
    pub const ONE: SignedLog = SignedLog { sign: 1, log_abs: 0.0 };

    /// Builds a value from its parts. `log_abs = -inf` or `sign = 0` give zero.
    pub fn new(sign: i8, log_abs: f64) -> Self {
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog { sign: sign.signum(), log_abs }
        }
    }

    /// Positive value `exp(log_abs)`.
    pub fn from_log(log_abs: f64) -> Self {
        Self::new(1, log_abs)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else if x > 0.0 {
            SignedLog { sign: 1, log_abs: x.ln() }
        } else {
            SignedLog { sign: -1, log_abs: (-x).ln() }
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn log_abs(&self) -> f64 {
        self.log_abs
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_abs.exp(),
        }
    }

    /// Natural log of the value; errors are left to the caller, negative values
    /// give NaN.
    pub fn ln(&self) -> f64 {
        match self.sign {
            1 => self.log_abs,
            0 => f64::NEG_INFINITY,
            _ => f64::NAN,
        }
    }

    pub fn abs(&self) -> Self {
        Self::new(self.sign.abs(), self.log_abs)
    }

    pub fn powi(&self, k: i32) -> Self {
        if k == 0 {
            return Self::ONE;
        }
        let sign = if k % 2 == 0 { self.sign.abs() } else { self.sign };
        Self::new(sign, self.log_abs * f64::from(k))
    }

    pub fn recip(&self) -> Self {
        Self::new(self.sign, -self.log_abs)
    }
}

impl Default for SignedLog {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;
    fn mul(self, rhs: SignedLog) -> SignedLog {
        SignedLog::new(self.sign * rhs.sign, self.log_abs + rhs.log_abs)
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;
    fn neg(self) -> SignedLog {
        SignedLog { sign: -self.sign, log_abs: self.log_abs }
    }
}

impl Add for SignedLog {
    type Output = SignedLog;
    fn add(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (big, small) = if self.log_abs >= rhs.log_abs { (self, rhs) } else { (rhs, self) };
        let delta = small.log_abs - big.log_abs;
        if big.sign == small.sign {
            SignedLog::new(big.sign, big.log_abs + delta.exp().ln_1p())
        } else {
            // |big| >= |small|; the difference is exactly zero only for equal magnitudes.
            if delta == 0.0 {
                SignedLog::ZERO
            } else {
                SignedLog::new(big.sign, big.log_abs + (-delta.exp()).ln_1p())
            }
        }
    }
}

impl Sub for SignedLog {
    type Output = SignedLog;
    fn sub(self, rhs: SignedLog) -> SignedLog {
        self + (-rhs)
    }
}

impl PartialOrd for SignedLog {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.log_abs.partial_cmp(&other.log_abs),
                _ => other.log_abs.partial_cmp(&self.log_abs),
            },
            ord => Some(ord),
        }
    }
}

impl std::iter::Sum for SignedLog {
    fn sum<I: Iterator<Item = SignedLog>>(iter: I) -> SignedLog {
        let items: Vec<SignedLog> = iter.collect();
        sum_signed(&items)
    }
}

/// Sums signed-log values with a single scaling pass (more accurate than folding
/// pairwise additions when many terms are present).
pub fn sum_signed(items: &[SignedLog]) -> SignedLog {
    let max = items
        .iter()
        .filter(|x| x.sign != 0)
        .map(|x| x.log_abs)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return SignedLog::ZERO;
    }
    if max == f64::INFINITY {
        let sign = items.iter().find(|x| x.log_abs == f64::INFINITY).map_or(1, |x| x.sign);
        return SignedLog::new(sign, f64::INFINITY);
    }
    let mut pos = 0.0;
    let mut neg = 0.0;
    for x in items {
        match x.sign {
            1 => pos += (x.log_abs - max).exp(),
            -1 => neg += (x.log_abs - max).exp(),
            _ => {}
        }
    }
    SignedLog::from_f64(pos - neg) * SignedLog::from_log(max)
}

/// `log(sum(exp(xs)))`, returning `-inf` for an empty slice or all `-inf` inputs.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// Streaming accumulator for `log(sum(exp(x_i)))` over positive terms.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, scaled: 0.0 }
    }

    pub fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}
