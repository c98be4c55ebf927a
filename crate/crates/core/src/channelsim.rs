//! Monte Carlo estimation of `E_n = E[log2 |𝒟(X, Y)|] / n`.
//!
//! `|𝒟(x, y)|` is the number of deletion patterns mapping `x` to `y`, i.e.
//! the number of occurrences of `y` as a subsequence of `x`. It is counted
//! with the textbook `O(|x||y|)` dynamic program over a [`ScaledCountArray`]
//! because the counts themselves reach `2^n`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::cunif_from_einf;
use crate::error::{check_probability, Error, Result};
use crate::numerics::{compensated_sum, convergence_shift_unchecked, LogValue};

/// Identifier recorded with every estimate.
pub const GENERATOR_ID: &str = "chacha20";

/// A finite binary string, one bit per byte.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString(Vec<u8>);

impl BitString {
    /// Panics if any element is not 0 or 1.
    pub fn new(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        BitString(bits)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut bits = Vec::with_capacity(n);
        while bits.len() < n {
            let word = rng.next_u64();
            let take = (n - bits.len()).min(64);
            bits.extend((0..take).map(|i| ((word >> i) & 1) as u8));
        }
        BitString(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Domain(format!("`{other}` is not a bit"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitString)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

/// A deletion mask; bit `i` set means bit `i` of the input is deleted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeletionPattern(BitString);

impl DeletionPattern {
    pub fn new(mask: BitString) -> Self {
        DeletionPattern(mask)
    }

    pub fn mask(&self) -> &BitString {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of deleted positions.
    pub fn weight(&self) -> usize {
        self.0.weight()
    }
}

/// The subsequence of `x` kept by `pattern`.
pub fn apply_pattern(x: &BitString, pattern: &DeletionPattern) -> Result<BitString> {
    if x.len() != pattern.len() {
        return Err(Error::Domain(format!(
            "pattern length {} does not match input length {}",
            pattern.len(),
            x.len()
        )));
    }
    Ok(BitString(
        x.bits()
            .iter()
            .zip(pattern.mask().bits())
            .filter(|(_, &del)| del == 0)
            .map(|(&b, _)| b)
            .collect(),
    ))
}

/// Passes `x` through the deletion channel with deletion probability `d`.
pub fn sample_output<R: Rng + ?Sized>(
    x: &BitString,
    d: f64,
    rng: &mut R,
) -> Result<(BitString, DeletionPattern)> {
    check_probability("d", d)?;
    let mask: Vec<u8> = (0..x.len()).map(|_| rng.random_bool(d) as u8).collect();
    let pattern = DeletionPattern(BitString(mask));
    let y = apply_pattern(x, &pattern)?;
    Ok((y, pattern))
}

/// Deletes a uniformly random `u`-subset of the positions of `x`.
pub fn sample_fixed_deletions<R: Rng + ?Sized>(
    x: &BitString,
    u: usize,
    rng: &mut R,
) -> Result<BitString> {
    let n = x.len();
    if u > n {
        return Err(Error::Domain(format!("cannot delete {u} of {n} bits")));
    }
    let mut mask = vec![0u8; n];
    for i in index::sample(rng, n, u) {
        mask[i] = 1;
    }
    apply_pattern(x, &DeletionPattern(BitString(mask)))
}

const RENORM_LOG2: i32 = 512;

/// Nonnegative counts stored as `f64` mantissas times a shared `2^offset`.
///
/// Whenever a mantissa exceeds `2^512` every cell is multiplied by
/// `2^-512`. Scaling by a power of two is exact, so renormalization changes
/// no represented value except cells that fall into the subnormal range,
/// which are at least `2^-1000` times smaller than the largest cell.
#[derive(Clone, Debug)]
pub struct ScaledCountArray {
    mantissas: Vec<f64>,
    log_offset: i64,
}

impl ScaledCountArray {
    pub fn zeros(len: usize) -> Self {
        ScaledCountArray {
            mantissas: vec![0.0; len],
            log_offset: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.mantissas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mantissas.is_empty()
    }

    pub fn log_offset(&self) -> i64 {
        self.log_offset
    }

    /// Represented value of cell `j` as a base-2 log.
    pub fn get_log(&self, j: usize) -> LogValue {
        let m = self.mantissas[j];
        if m == 0.0 {
            LogValue::ZERO
        } else {
            LogValue::from_log2(m.log2() + self.log_offset as f64)
        }
    }

    /// Adds one unit (the count 1) to cell `j`.
    #[inline]
    fn add_unit(&mut self, j: usize) {
        self.mantissas[j] += unit_mantissa(self.log_offset);
    }

    fn renormalize(&mut self) {
        let scale = 2f64.powi(-RENORM_LOG2);
        for m in &mut self.mantissas {
            *m *= scale;
        }
        self.log_offset += RENORM_LOG2 as i64;
    }
}

#[inline]
fn unit_mantissa(log_offset: i64) -> f64 {
    if log_offset > 1100 {
        0.0
    } else {
        2f64.powi(-(log_offset as i32))
    }
}

fn check_lengths(x: &BitString, y: &BitString) -> Result<()> {
    if y.len() > x.len() {
        return Err(Error::Domain(format!(
            "|y| = {} exceeds |x| = {}",
            y.len(),
            x.len()
        )));
    }
    Ok(())
}

/// `log2 |𝒟(x, y)|`, the log of the number of occurrences of `y` as a
/// subsequence of `x`. The empty string occurs exactly once.
pub fn count_subsequences_log(x: &BitString, y: &BitString) -> Result<LogValue> {
    check_lengths(x, y)?;
    let m = y.len();
    if m == 0 {
        return Ok(LogValue::ONE);
    }
    let ys = y.bits();
    let threshold = 2f64.powi(RENORM_LOG2);
    let mut a = ScaledCountArray::zeros(m);
    for &xb in x.bits() {
        let mut overflow = false;
        for j in (1..m).rev() {
            if xb == ys[j] {
                let v = a.mantissas[j] + a.mantissas[j - 1];
                overflow |= v > threshold;
                a.mantissas[j] = v;
            }
        }
        if xb == ys[0] {
            a.add_unit(0);
        }
        if overflow {
            a.renormalize();
        }
    }
    Ok(a.get_log(m - 1))
}

/// Exact `|𝒟(x, y)|` by the same recurrence over big integers.
pub fn count_subsequences_exact(x: &BitString, y: &BitString) -> Result<BigUint> {
    check_lengths(x, y)?;
    let m = y.len();
    if m == 0 {
        return Ok(BigUint::one());
    }
    let ys = y.bits();
    let mut a = vec![BigUint::zero(); m];
    for &xb in x.bits() {
        for j in (1..m).rev() {
            if xb == ys[j] {
                let add = a[j - 1].clone();
                a[j] += add;
            }
        }
        if xb == ys[0] {
            a[0] += 1u32;
        }
    }
    Ok(a.pop().expect("m >= 1"))
}

/// Hoeffding half-width `sqrt(ln(2 / (1 - confidence)) / (2t))` for the mean
/// of `t` samples in `[0, 1]`.
pub fn hoeffding_half_width(samples: usize, confidence: f64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Domain(format!(
            "confidence = {confidence} is not in (0, 1)"
        )));
    }
    Ok(((2.0 / (1.0 - confidence)).ln() / (2.0 * samples as f64)).sqrt())
}

/// A Monte Carlo estimate of `E_n(d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub n: usize,
    pub d: f64,
    pub samples: usize,
    pub mean: f64,
    pub half_width: f64,
    pub confidence: f64,
    pub seed: u64,
    pub generator_id: String,
    /// Unbiased sample variance; diagnostic only.
    pub sample_variance: f64,
}

impl SimEstimate {
    /// Statistical (not proven) lower and upper bounds on `C_unif(d)`.
    pub fn sim_bounds(&self) -> (f64, f64) {
        sim_bounds(self)
    }
}

/// RNG for sample `index`: its own ChaCha stream under the common seed, so
/// results do not depend on how samples are distributed over threads.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One draw of `log2 |𝒟(X, Y)| / n` with `X` uniform and `Y = BDC_d(X)`.
pub fn draw_sample<R: Rng + ?Sized>(n: usize, d: f64, rng: &mut R) -> Result<f64> {
    let x = BitString::random(n, rng);
    let (y, _) = sample_output(&x, d, rng)?;
    Ok(count_subsequences_log(&x, &y)?.log2() / n as f64)
}

/// Averages `t` independent samples; fully determined by
/// `(seed, GENERATOR_ID, t, n, d)`.
pub fn estimate_en(n: usize, d: f64, t: usize, seed: u64, confidence: f64) -> Result<SimEstimate> {
    if n == 0 {
        return Err(Error::Domain("blocklength n must be at least 1".into()));
    }
    check_probability("d", d)?;
    let half_width = hoeffding_half_width(t, confidence)?;
    let values = (0..t)
        .into_par_iter()
        .map(|i| draw_sample(n, d, &mut sample_rng(seed, i as u64)))
        .collect::<Result<Vec<f64>>>()?;
    let mean = compensated_sum(values.iter().copied()) / t as f64;
    let sample_variance = if t > 1 {
        compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (t - 1) as f64
    } else {
        0.0
    };
    Ok(SimEstimate {
        n,
        d,
        samples: t,
        mean,
        half_width,
        confidence,
        seed,
        generator_id: GENERATOR_ID.to_string(),
        sample_variance,
    })
}

/// `(lower, upper)` on `C_unif`: the estimate itself, and the estimate
/// shifted up by the convergence bound.
pub fn sim_bounds(est: &SimEstimate) -> (f64, f64) {
    let lower = cunif_from_einf(est.d, est.mean);
    let upper = cunif_from_einf(
        est.d,
        est.mean + convergence_shift_unchecked(est.n as u64, est.d),
    );
    (lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn apply_pattern_examples() {
        let x = bs("101");
        assert_eq!(
            apply_pattern(&x, &DeletionPattern::new(bs("010"))).unwrap(),
            bs("11")
        );
        assert_eq!(
            apply_pattern(&x, &DeletionPattern::new(bs("000"))).unwrap(),
            x
        );
        assert!(apply_pattern(&x, &DeletionPattern::new(bs("111")))
            .unwrap()
            .is_empty());
        assert!(apply_pattern(&x, &DeletionPattern::new(bs("11"))).is_err());
    }

    #[test]
    fn parse_rejects_non_bits() {
        assert!("10a".parse::<BitString>().is_err());
        assert_eq!(bs("0110").to_string(), "0110");
    }

    #[test]
    fn count_examples() {
        let c = |x: &str, y: &str| count_subsequences_log(&bs(x), &bs(y)).unwrap().log2();
        assert!((c("111", "11") - 3f64.log2()).abs() < 1e-15);
        assert!((c("1010", "10") - 3f64.log2()).abs() < 1e-15);
        assert_eq!(c("1010", ""), 0.0);
        assert!(count_subsequences_log(&bs("000"), &bs("1"))
            .unwrap()
            .is_zero());
        assert!(count_subsequences_log(&bs("0"), &bs("00")).is_err());
    }

    #[test]
    fn exact_count_examples() {
        let c = |x: &str, y: &str| count_subsequences_exact(&bs(x), &bs(y)).unwrap();
        assert_eq!(c("111", "11"), BigUint::from(3u32));
        assert_eq!(c("1010", "10"), BigUint::from(3u32));
        assert_eq!(c("1010", ""), BigUint::from(1u32));
    }

    #[test]
    fn renormalization_preserves_huge_counts() {
        // C(3000, 1500) ~ 2^2994 forces several renormalizations
        let x = BitString::new(vec![1; 3000]);
        let y = BitString::new(vec![1; 1500]);
        let got = count_subsequences_log(&x, &y).unwrap().log2();
        let expect = crate::numerics::log_binomial(3000, 1500).unwrap();
        assert!((got - expect).abs() < 1e-9 * expect, "{got} vs {expect}");
    }

    #[test]
    fn sampling_edge_rates() {
        let mut rng = sample_rng(1, 0);
        let x = BitString::random(200, &mut rng);
        let (y, p) = sample_output(&x, 0.0, &mut rng).unwrap();
        assert_eq!(y, x);
        assert_eq!(p.weight(), 0);
        let (y, p) = sample_output(&x, 1.0, &mut rng).unwrap();
        assert!(y.is_empty());
        assert_eq!(p.weight(), 200);
        assert!(sample_output(&x, 1.5, &mut rng).is_err());
    }

    #[test]
    fn output_length_concentrates() {
        let mut rng = sample_rng(2, 0);
        let n = 100_000;
        let x = BitString::random(n, &mut rng);
        let (y, _) = sample_output(&x, 0.5, &mut rng).unwrap();
        let sigma = (n as f64 / 4.0).sqrt();
        assert!((y.len() as f64 - n as f64 / 2.0).abs() < 5.0 * sigma);
    }

    #[test]
    fn fixed_deletions_edges() {
        let mut rng = sample_rng(3, 0);
        let x = bs("0110100");
        assert_eq!(sample_fixed_deletions(&x, 0, &mut rng).unwrap(), x);
        assert!(sample_fixed_deletions(&x, 7, &mut rng).unwrap().is_empty());
        assert_eq!(sample_fixed_deletions(&x, 3, &mut rng).unwrap().len(), 4);
        assert!(sample_fixed_deletions(&x, 8, &mut rng).is_err());
    }

    #[test]
    fn fixed_deletions_uniform_marginals() {
        // Track positions by deleting from the all-distinct index string: use a
        // one-hot input per position and see whether its 1 survives.
        let (n, u, trials) = (10usize, 3usize, 20_000usize);
        let mut deleted = vec![0usize; n];
        let mut rng = sample_rng(4, 0);
        for _ in 0..trials {
            for (i, slot) in deleted.iter_mut().enumerate() {
                let mut bits = vec![0u8; n];
                bits[i] = 1;
                let y = sample_fixed_deletions(&BitString::new(bits), u, &mut rng).unwrap();
                if y.weight() == 0 {
                    *slot += 1;
                }
            }
        }
        let p = u as f64 / n as f64;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for &c in &deleted {
            assert!(
                (c as f64 - trials as f64 * p).abs() < 5.0 * sigma,
                "{deleted:?}"
            );
        }
    }

    #[test]
    fn hoeffding_examples() {
        let hw = hoeffding_half_width(1000, 0.99).unwrap();
        assert!((hw - 0.051_469_978_465_839_85).abs() < 1e-15);
        assert!(hoeffding_half_width(0, 0.99).is_err());
        assert!(hoeffding_half_width(10, 1.0).is_err());
    }

    #[test]
    fn estimate_n1_is_zero() {
        for d in [0.1, 0.5, 0.9] {
            let est = estimate_en(1, d, 50, 9, 0.99).unwrap();
            assert_eq!(est.mean, 0.0);
        }
    }

    #[test]
    fn estimate_is_reproducible() {
        let a = estimate_en(40, 0.3, 64, 17, 0.95).unwrap();
        let b = estimate_en(40, 0.3, 64, 17, 0.95).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.generator_id, GENERATOR_ID);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let c = pool.install(|| estimate_en(40, 0.3, 64, 17, 0.95).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn sim_bounds_width_is_shift() {
        let est = estimate_en(30, 0.4, 20, 5, 0.99).unwrap();
        let (lo, hi) = sim_bounds(&est);
        let shift = convergence_shift_unchecked(30, 0.4);
        assert!(lo <= hi);
        assert!(((hi - lo) - shift).abs() < 1e-15);
    }
}
