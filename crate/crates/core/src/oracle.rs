//! Exhaustive-enumeration ground truth for small blocklengths.
//!
//! For every input `x ∈ {0,1}^n` and every mask `D ∈ {0,1}^n` the oracle
//! applies `D` to `x` and tallies how many masks produce each output `y`;
//! that tally *is* `|𝒟(x, y)|`, obtained without the subsequence-counting
//! recurrence. Every quantity below is a polynomial in the pattern
//! probabilities with integer coefficients read off these tallies, so it is
//! evaluated exactly over the rationals when the probabilities are small
//! rationals, and in `f64` otherwise.

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};

use crate::error::{check_probability, Error, Result};

/// Hard ceiling on enumeration size; cost grows like `4^n`.
pub const MAX_ORACLE_N: usize = 12;

/// Largest denominator tried when recognising a probability as rational.
pub const MAX_RATIONAL_DENOMINATOR: i64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimit {
    max_n: usize,
}

impl Default for OracleLimit {
    fn default() -> Self {
        OracleLimit {
            max_n: MAX_ORACLE_N,
        }
    }
}

impl OracleLimit {
    pub fn new(max_n: usize) -> Result<Self> {
        if max_n > MAX_ORACLE_N {
            return Err(Error::OracleLimit {
                n: max_n,
                max_n: MAX_ORACLE_N,
            });
        }
        Ok(OracleLimit { max_n })
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if n > self.max_n {
            Err(Error::OracleLimit {
                n,
                max_n: self.max_n,
            })
        } else {
            Ok(())
        }
    }
}

/// Arithmetic the oracle needs from its scalar type.
pub trait Scalar:
    Clone
    + Zero
    + One
    + FromPrimitive
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn to_f64_lossy(&self) -> f64;
}

impl Scalar for f64 {
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

fn pow<T: Scalar>(base: &T, exp: usize) -> T {
    num_traits::pow::pow(base.clone(), exp)
}

fn from_u64<T: Scalar>(v: u64) -> T {
    T::from_u64(v).expect("u64 fits every scalar")
}

/// Recognises `p` as `a/q` with `q <= 64` (exactly, up to `1e-12`).
pub fn as_small_rational(p: f64) -> Option<BigRational> {
    (1..=MAX_RATIONAL_DENOMINATOR).find_map(|q| {
        let a = (p * q as f64).round();
        if (a / q as f64 - p).abs() <= 1e-12 {
            Some(BigRational::new(BigInt::from(a as i64), BigInt::from(q)))
        } else {
            None
        }
    })
}

/// Output strings are keyed as `(1 << len) | bits`.
#[inline]
fn output_key(x: u32, mask: u32, n: usize) -> u32 {
    let mut bits = 0u32;
    let mut len = 0u32;
    for i in 0..n {
        if mask >> i & 1 == 0 {
            bits |= (x >> i & 1) << len;
            len += 1;
        }
    }
    (1 << len) | bits
}

#[inline]
fn key_len(key: u32) -> usize {
    31 - key.leading_zeros() as usize
}

/// Calls `visit(x, counts)` for every input `x`, where `counts` lists each
/// distinct output key with the number of masks producing it.
fn for_each_input<F: FnMut(u32, &[(u32, u64)])>(n: usize, mut visit: F) {
    let size = 1u32 << n;
    let mut tally = vec![0u64; 2 * size as usize];
    let mut touched: Vec<u32> = Vec::new();
    let mut counts: Vec<(u32, u64)> = Vec::new();
    for x in 0..size {
        for mask in 0..size {
            let key = output_key(x, mask, n);
            if tally[key as usize] == 0 {
                touched.push(key);
            }
            tally[key as usize] += 1;
        }
        counts.clear();
        for &key in &touched {
            counts.push((key, tally[key as usize]));
            tally[key as usize] = 0;
        }
        touched.clear();
        visit(x, &counts);
    }
}

/// Integer tallies over all `(x, y)` pairs, grouped by deletion count
/// `u = n - |y|`.
#[derive(Clone, Debug)]
pub struct Census {
    n: usize,
    /// `Σ_{x, |y| = n-u} |𝒟(x,y)|^2`.
    squared: Vec<u64>,
    /// Number of `(x, y)` with `|y| = n - u` and `|𝒟(x,y)| = c`, keyed by `c`.
    histogram: Vec<BTreeMap<u64, u64>>,
}

impl Census {
    pub fn build(n: usize, limit: &OracleLimit) -> Result<Self> {
        limit.check(n)?;
        let mut squared = vec![0u64; n + 1];
        let mut histogram = vec![BTreeMap::new(); n + 1];
        for_each_input(n, |_, counts| {
            for &(key, c) in counts {
                let u = n - key_len(key);
                squared[u] += c * c;
                *histogram[u].entry(c).or_insert(0) += 1;
            }
        });
        Ok(Census {
            n,
            squared,
            histogram,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `P(D^α(X) = D^β(X), w(D^α) = w(D^β) = u)`.
    fn joint_agree<T: Scalar>(&self, alpha: &T, beta: &T, u: usize) -> T {
        let n = self.n;
        let one = T::one();
        let deleted = alpha.clone() * beta.clone();
        let kept = (one.clone() - alpha.clone()) * (one - beta.clone());
        from_u64::<T>(self.squared[u]) * pow(&deleted, u) * pow(&kept, n - u)
            / pow(&from_u64::<T>(2), n)
    }

    pub fn agree_prob<T: Scalar>(&self, alpha: &T, beta: &T) -> T {
        (0..=self.n).fold(T::zero(), |acc, u| acc + self.joint_agree(alpha, beta, u))
    }

    /// `Π_n^ℓ[u]` for `D, D' ~ Ber(p)^n`.
    pub fn pi<T: Scalar>(&self, p: &T, u: usize) -> T {
        self.joint_agree(p, p, u)
    }

    /// Law of `|𝒟(X, Y)|` for `Y = BDC_d(X)`: count ↦ probability.
    pub fn count_distribution<T: Scalar>(&self, d: &T) -> BTreeMap<u64, T> {
        let n = self.n;
        let kept = T::one() - d.clone();
        let scale = pow(&from_u64::<T>(2), n);
        let mut out: BTreeMap<u64, T> = BTreeMap::new();
        for (u, hist) in self.histogram.iter().enumerate() {
            let pattern = pow(d, u) * pow(&kept, n - u);
            for (&c, &mult) in hist {
                let mass = from_u64::<T>(mult * c) * pattern.clone() / scale.clone();
                let slot = out.entry(c).or_insert_with(T::zero);
                *slot = slot.clone() + mass;
            }
        }
        out
    }

    /// `E_n(d) = E log2 |𝒟(X, Y)| / n`.
    pub fn en<T: Scalar>(&self, d: &T) -> f64 {
        let total: f64 = self
            .count_distribution(d)
            .iter()
            .filter(|(&c, _)| c > 1)
            .map(|(&c, mass)| mass.to_f64_lossy() * (c as f64).log2())
            .sum();
        total / self.n as f64
    }

    /// `E'_n[u] = E log2 |𝒟(X, Y[u])| / n` with `u` uniform deletions.
    pub fn en_prime(&self, u: usize) -> f64 {
        let n = self.n;
        // each weight-u mask has probability 1 / C(n, u), each x 2^-n
        let patterns = binomial_u64(n, u) as f64 * (1u64 << n) as f64;
        let total: f64 = self.histogram[u]
            .iter()
            .filter(|(&c, _)| c > 1)
            .map(|(&c, &mult)| (mult * c) as f64 * (c as f64).log2())
            .sum();
        total / patterns / n as f64
    }
}

fn binomial_u64(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

fn check_n(n: usize) -> Result<()> {
    OracleLimit::default().check(n)
}

/// Exact `P(D^α(X) = D^β(X))` over the rationals.
pub fn exact_agree_prob_rational(
    n: usize,
    alpha: &BigRational,
    beta: &BigRational,
) -> Result<BigRational> {
    Ok(Census::build(n, &OracleLimit::default())?.agree_prob(alpha, beta))
}

/// `P(D^α(X) = D^β(X))`; exact rational arithmetic when both rates have
/// denominators up to 64, `f64` otherwise.
pub fn exact_agree_prob(n: usize, alpha: f64, beta: f64) -> Result<f64> {
    check_probability("alpha", alpha)?;
    check_probability("beta", beta)?;
    check_n(n)?;
    let census = Census::build(n, &OracleLimit::default())?;
    Ok(match (as_small_rational(alpha), as_small_rational(beta)) {
        (Some(a), Some(b)) => census.agree_prob(&a, &b).to_f64_lossy(),
        _ => census.agree_prob(&alpha, &beta),
    })
}

/// Exact `Π_n^ℓ[u]` over the rationals (`p = ℓ/n` is always rational).
pub fn exact_pi_rational(n: usize, ell: usize, u: usize) -> Result<BigRational> {
    check_pi_args(n, ell, u)?;
    let p = BigRational::new(BigInt::from(ell), BigInt::from(n.max(1)));
    Ok(Census::build(n, &OracleLimit::default())?.pi(&p, u))
}

pub fn exact_pi(n: usize, ell: usize, u: usize) -> Result<f64> {
    Ok(exact_pi_rational(n, ell, u)?.to_f64_lossy())
}

fn check_pi_args(n: usize, ell: usize, u: usize) -> Result<()> {
    check_n(n)?;
    if ell > n || u > n {
        return Err(Error::Domain(format!(
            "need ell, u <= n, got n = {n}, ell = {ell}, u = {u}"
        )));
    }
    Ok(())
}

/// Law of `|𝒟(X, Y)|` over the rationals: count ↦ probability.
pub fn exact_count_distribution(n: usize, d: &BigRational) -> Result<BTreeMap<u64, BigRational>> {
    Ok(Census::build(n, &OracleLimit::default())?.count_distribution(d))
}

/// `E_n(d) = E log2 |𝒟(X, Y)| / n` by full enumeration.
pub fn exact_en(n: usize, d: f64) -> Result<f64> {
    check_probability("d", d)?;
    if n == 0 {
        return Err(Error::Domain("blocklength n must be at least 1".into()));
    }
    let census = Census::build(n, &OracleLimit::default())?;
    Ok(match as_small_rational(d) {
        Some(r) => census.en(&r),
        None => census.en(&d),
    })
}

/// `E'_n[u]` with the deletion pattern uniform over weight-`u` masks.
pub fn exact_en_prime(n: usize, u: usize) -> Result<f64> {
    check_n(n)?;
    if n == 0 || u > n {
        return Err(Error::Domain(format!(
            "need 1 <= n and u <= n, got n = {n}, u = {u}"
        )));
    }
    Ok(Census::build(n, &OracleLimit::default())?.en_prime(u))
}

/// `H(X | Y[k])` in bits for `X` uniform and exactly `k` uniform deletions.
pub fn exact_cond_entropy(n: usize, k: usize) -> Result<f64> {
    check_n(n)?;
    if k > n {
        return Err(Error::Domain(format!("k = {k} exceeds n = {n}")));
    }
    let out_len = n - k;
    // First pass: T(y) = Σ_x |𝒟(x, y)|.
    let mut totals: HashMap<u32, u64> = HashMap::new();
    for_each_input(n, |_, counts| {
        for &(key, c) in counts.iter().filter(|(key, _)| key_len(*key) == out_len) {
            *totals.entry(key).or_insert(0) += c;
        }
    });
    // P(x, y) = c / (2^n C(n,k)); P(x | y) = c / T(y).
    let norm = (1u64 << n) as f64 * binomial_u64(n, k) as f64;
    let mut h = 0.0;
    for_each_input(n, |_, counts| {
        for &(key, c) in counts.iter().filter(|(key, _)| key_len(*key) == out_len) {
            let t = totals[&key];
            h += c as f64 / norm * (t as f64 / c as f64).log2();
        }
    });
    Ok(h)
}
