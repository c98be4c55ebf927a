//! Scalar information-theoretic primitives and base-2 log-domain arithmetic.
//!
//! Every probability that flows through the dynamic programs is a
//! [`LogValue`]. Agreement probabilities decay like `2^(-Θ(n))` and leave the
//! range of `f64` somewhere around `n = 1000`, so nothing in this crate
//! multiplies probabilities in the linear domain.

use std::f64::consts::{E, LOG2_E, PI};
use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

/// A nonnegative real stored as its base-2 logarithm.
///
/// `f64::NEG_INFINITY` is the zero element. NaN is never stored.
#[derive(Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);

    /// Wraps a base-2 logarithm. Panics on NaN or `+inf`.
    pub fn from_log2(log2: f64) -> Self {
        assert!(
            !log2.is_nan() && log2 != f64::INFINITY,
            "invalid log2 value {log2}"
        );
        LogValue(log2)
    }

    /// Panics if `x` is negative or NaN.
    pub fn from_linear(x: f64) -> Self {
        assert!(x >= 0.0, "cannot take the logarithm of {x}");
        LogValue(x.log2())
    }

    #[inline]
    pub fn log2(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// The represented quantity; underflows to `0.0` for very small values.
    pub fn to_linear(self) -> f64 {
        self.0.exp2()
    }
}

impl Mul for LogValue {
    type Output = LogValue;

    // products are sums of logs
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: LogValue) -> LogValue {
        LogValue(self.0 + rhs.0)
    }
}

impl fmt::Debug for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogValue(2^{})", self.0)
    }
}

/// Two Bernoulli parameters, the arguments of [`kl_bernoulli`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BernoulliPair {
    a: f64,
    b: f64,
}

impl BernoulliPair {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        check_probability("a", a)?;
        check_probability("b", b)?;
        Ok(BernoulliPair { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// `x * log2(y)` with the convention `0 * log2(anything) = 0`.
#[inline]
fn xlog2y(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.log2()
    }
}

/// Binary entropy `h(p)` in bits.
pub fn entropy(p: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok(binary_entropy(p))
}

/// Unchecked binary entropy for internal callers that already validated `p`.
///
/// The two terms are summed in a fixed order of the smaller and larger
/// argument so that `h(p)` and `h(1 - p)` agree bit for bit.
pub(crate) fn binary_entropy(p: f64) -> f64 {
    let q = 1.0 - p;
    let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
    -(xlog2y(lo, lo) + xlog2y(hi, hi))
}

/// Base-2 KL divergence `D(a || b)` between Bernoulli distributions.
///
/// Returns `+inf` when `b` is 0 or 1 and `a != b`.
pub fn kl_bernoulli(pair: BernoulliPair) -> f64 {
    let BernoulliPair { a, b } = pair;
    if a == b {
        return 0.0;
    }
    if (b == 0.0 && a > 0.0) || (b == 1.0 && a < 1.0) {
        return f64::INFINITY;
    }
    let forward = if a == 0.0 { 0.0 } else { a * (a / b).log2() };
    let backward = if a == 1.0 {
        0.0
    } else {
        (1.0 - a) * ((1.0 - a) / (1.0 - b)).log2()
    };
    (forward + backward).max(0.0)
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

// Below this many factors the product form is summed directly; above it the
// Stirling series is accurate to well under 1e-13 absolute.
const DIRECT_BINOMIAL_LIMIT: u64 = 30;

/// `log2 C(n, u)`.
///
/// Small `min(u, n - u)` uses a compensated sum of `log2((n - m + i) / i)`;
/// larger arguments use the Stirling series arranged as `n h(u/n)` plus
/// corrections, which keeps the result well-conditioned instead of
/// subtracting three large log-factorials.
pub fn log_binomial(n: u64, u: u64) -> Result<f64> {
    if u > n {
        return Err(Error::Domain(format!("log_binomial: u = {u} > n = {n}")));
    }
    Ok(log_binomial_unchecked(n, u))
}

pub(crate) fn log_binomial_unchecked(n: u64, u: u64) -> f64 {
    let m = u.min(n - u);
    if m == 0 {
        return 0.0;
    }
    if m < DIRECT_BINOMIAL_LIMIT {
        let base = (n - m) as f64;
        return compensated_sum((1..=m).map(|i| ((base + i as f64) / i as f64).log2()));
    }
    let (nf, uf, vf) = (n as f64, u as f64, (n - u) as f64);
    // u ln(n/u) + v ln(n/v), with the second written through ln_1p.
    let a = uf * (nf / uf).ln();
    let b = -vf * (-uf / nf).ln_1p();
    let half = 0.5 * (nf / (uf * vf)).ln() - 0.5 * (2.0 * PI).ln();
    let corr = stirling_tail(nf) - stirling_tail(uf) - stirling_tail(vf);
    compensated_sum([a, b, half, corr]) * LOG2_E
}

/// `ln k! - [(k + 1/2) ln k - k + ln(2 pi)/2]` for `k >= 30`.
fn stirling_tail(k: f64) -> f64 {
    let k2 = k * k;
    let inv = 1.0 / k;
    inv * (1.0 / 12.0 - (1.0 / 360.0) / k2 * (1.0 - (360.0 / 1260.0) / k2))
}

/// The lower bound on `log2 C(n, u)` obtained from two-sided Stirling bounds:
/// `n h(u/n) - log2(max{2 pi u (n-u)/n, 1}) / 2 - log2(e) / (6 max{min{u, n-u}, 1})`.
pub fn stirling_lower_log_binomial(n: u64, u: u64) -> Result<f64> {
    if n == 0 || u > n {
        return Err(Error::Domain(format!(
            "stirling_lower_log_binomial requires 0 <= u <= n and n >= 1, got n = {n}, u = {u}"
        )));
    }
    let nf = n as f64;
    let uf = u as f64;
    let spread = (2.0 * PI * uf * (nf - uf) / nf).max(1.0).log2();
    let m = u.min(n - u).max(1) as f64;
    Ok(nf * binary_entropy(uf / nf) - 0.5 * spread - LOG2_E / (6.0 * m))
}

/// Upper bound on `E_inf - E_n`: `log2(8 pi e max{d(1-d) n, 1/6}) / (2n)`.
pub fn convergence_shift(n: u64, d: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("convergence_shift requires n >= 1".into()));
    }
    check_probability("d", d)?;
    Ok(convergence_shift_unchecked(n, d))
}

pub(crate) fn convergence_shift_unchecked(n: u64, d: f64) -> f64 {
    let nf = n as f64;
    let var = (d * (1.0 - d) * nf).max(1.0 / 6.0);
    (8.0 * PI * E * var).log2() / (2.0 * nf)
}

/// `log2` of the Binomial(n, d) probability mass at `u`.
pub fn binom_pmf_log(n: u64, d: f64, u: u64) -> Result<LogValue> {
    check_probability("d", d)?;
    if u > n {
        return Err(Error::Domain(format!("binom_pmf_log: u = {u} > n = {n}")));
    }
    Ok(binom_pmf_log_unchecked(n, d, u))
}

pub(crate) fn binom_pmf_log_unchecked(n: u64, d: f64, u: u64) -> LogValue {
    let kept = n - u;
    if (d == 0.0 && u > 0) || (d == 1.0 && kept > 0) {
        return LogValue::ZERO;
    }
    let deleted_term = if u == 0 { 0.0 } else { u as f64 * d.log2() };
    let kept_term = if kept == 0 {
        0.0
    } else {
        kept as f64 * (-d).ln_1p() * LOG2_E
    };
    LogValue::from_log2(log_binomial_unchecked(n, u) + deleted_term + kept_term)
}

/// `log2` of the sum of the represented values.
///
/// Subtracts the running maximum before exponentiating; the empty sum is
/// [`LogValue::ZERO`].
pub fn log_sum<I>(values: I) -> LogValue
where
    I: IntoIterator<Item = LogValue>,
{
    let values: Vec<f64> = values.into_iter().map(LogValue::log2).collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogValue::ZERO;
    }
    let total = compensated_sum(values.iter().map(|&v| (v - max).exp2()));
    LogValue(max + total.log2())
}

/// Log-sum of up to four raw base-2 logs; the hot path of the walk kernels.
#[inline(always)]
pub(crate) fn log_sum4(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let m = a.max(b).max(c.max(d));
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp2() + (b - m).exp2() + (c - m).exp2() + (d - m).exp2()).log2()
}

#[inline(always)]
pub(crate) fn log_sum3(a: f64, b: f64, c: f64) -> f64 {
    let m = a.max(b).max(c);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp2() + (b - m).exp2() + (c - m).exp2()).log2()
}

/// `log2(p)` with `log2(0) = -inf`.
#[inline]
pub(crate) fn log2_prob(p: f64) -> f64 {
    if p == 0.0 {
        f64::NEG_INFINITY
    } else {
        p.log2()
    }
}
