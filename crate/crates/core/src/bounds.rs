//! Upper bounds on `C_unif(d)` and `E_inf(d)`.
//!
//! Every bound is reported as a [`BoundReport`] whose components are the
//! additive terms of the bound, summed in insertion order to produce
//! `value`. The identity `C_unif = 1 - d - h(d) + E_inf` links the two
//! scales.

use std::f64::consts::{E, LOG2_E, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::numerics::{
    binary_entropy, binom_pmf_log_unchecked, compensated_sum, convergence_shift_unchecked,
    kl_bernoulli, BernoulliPair, LogValue,
};
use crate::walkdp::{agree_prob_log, pi_uu_log, PiTable, WalkParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Warmup,
    Main,
    Efficient,
    Corollary,
}

impl BoundKind {
    pub const ALL: [BoundKind; 4] = [
        BoundKind::Warmup,
        BoundKind::Main,
        BoundKind::Efficient,
        BoundKind::Corollary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Warmup => "warmup",
            BoundKind::Main => "main",
            BoundKind::Efficient => "efficient",
            BoundKind::Corollary => "corollary",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub value: f64,
}

/// A computed upper bound on `C_unif(d)` with its additive breakdown.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub n: usize,
    pub d: f64,
    /// Upper bound on `C_unif(d)`.
    pub value: f64,
    /// Implied upper bound on `E_inf(d)`.
    pub e_inf_upper: f64,
    /// Additive terms in summation order; they sum to `value`.
    pub components: Vec<Component>,
    /// Deletion count `(d - δ)n` used by the δ-shifted bounds.
    pub chosen_weight: Option<usize>,
}

impl BoundReport {
    fn assemble(
        kind: BoundKind,
        n: usize,
        d: f64,
        terms: Vec<(&str, f64)>,
        chosen_weight: Option<usize>,
    ) -> Self {
        let value = terms.iter().fold(0.0, |acc, &(_, v)| acc + v);
        BoundReport {
            kind,
            n,
            d,
            value,
            e_inf_upper: einf_from_cunif(d, value),
            components: terms
                .into_iter()
                .map(|(name, value)| Component {
                    name: name.to_string(),
                    value,
                })
                .collect(),
            chosen_weight,
        }
    }

    pub fn component(&self, name: &str) -> Option<f64> {
        self.components
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.value)
    }

    /// Proven lower bound on the Slepian–Wolf corner rate implied by this bound.
    pub fn compression_rate_lower(&self) -> f64 {
        compression_rate_lower(self.d, self.e_inf_upper)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Domain("blocklength n must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn check_open_unit(d: f64) -> Result<()> {
    if d > 0.0 && d < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("d = {d} is not in (0, 1)")))
    }
}

/// `C_unif = 1 - d - h(d) + E_inf`.
pub fn cunif_from_einf(d: f64, e_inf: f64) -> f64 {
    1.0 - d - binary_entropy(d) + e_inf
}

/// Inverse of [`cunif_from_einf`].
pub fn einf_from_cunif(d: f64, c_unif: f64) -> f64 {
    c_unif - (1.0 - d - binary_entropy(d))
}

/// `d + h(d) - e_inf_upper`: a lower bound on the asymptotic rate
/// `lim H(X|Y)/n`, the minimum rate for compressing `X` with `Y` known at
/// the decoder.
pub fn compression_rate_lower(d: f64, e_inf_upper: f64) -> f64 {
    d + binary_entropy(d) - e_inf_upper
}

/// Jensen bound with a uniform reference pattern:
/// `2 - d - h(d) + log2 P(D(X) = D~(X)) / n + shift`.
pub fn warmup_upper(n: usize, d: f64) -> Result<BoundReport> {
    check_n(n)?;
    check_probability("d", d)?;
    let agree = agree_prob_log(&WalkParams::new(n, d, 0.5)?);
    let terms = vec![
        ("base", 2.0 - d - binary_entropy(d)),
        ("jensen_term", agree.log2() / n as f64),
        (
            "convergence_shift",
            convergence_shift_unchecked(n as u64, d),
        ),
    ];
    Ok(BoundReport::assemble(BoundKind::Warmup, n, d, terms, None))
}

/// Upper bound on `E'_n[u]` from `Π_n^u[u]`:
/// `log2 Π / n + h(u/n) + log2(max{2πu(n-u)/n, 1}) / (2n) + log2(e) / (6n max{min{u, n-u}, 1})`.
pub fn en_prime_upper(n: usize, u: usize, pi_log: LogValue) -> Result<f64> {
    check_n(n)?;
    if u > n {
        return Err(Error::Domain(format!("u = {u} exceeds n = {n}")));
    }
    Ok(en_prime_upper_unchecked(n, u, pi_log))
}

fn en_prime_upper_unchecked(n: usize, u: usize, pi_log: LogValue) -> f64 {
    let nf = n as f64;
    let uf = u as f64;
    let spread = (2.0 * PI * uf * (nf - uf) / nf).max(1.0).log2();
    let m = u.min(n - u).max(1) as f64;
    pi_log.log2() / nf + binary_entropy(uf / nf) + spread / (2.0 * nf) + LOG2_E / (6.0 * nf * m)
}

/// Binomial convolution of the `E'_n[u]` bounds, plus the convergence shift.
///
/// The sum over `u` is never truncated: individual terms may be negative,
/// so dropping any of them could lower the result below a valid bound.
pub fn main_upper(n: usize, d: f64, table: &PiTable) -> Result<BoundReport> {
    check_n(n)?;
    check_open_unit(d)?;
    if table.n() != n {
        return Err(Error::Config(format!(
            "pi table is for n = {}, bound requested for n = {n}",
            table.n()
        )));
    }
    let weighted = compensated_sum((0..=n).map(|u| {
        let w = binom_pmf_log_unchecked(n as u64, d, u as u64);
        if w.is_zero() {
            0.0
        } else {
            w.to_linear() * en_prime_upper_unchecked(n, u, table.get(u))
        }
    }));
    let terms = vec![
        ("base", 1.0 - d - binary_entropy(d)),
        (
            "convergence_shift",
            convergence_shift_unchecked(n as u64, d),
        ),
        ("jensen_term", weighted),
    ];
    Ok(BoundReport::assemble(BoundKind::Main, n, d, terms, None))
}

/// Candidate set for the infimum over δ in the efficient bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EfficientBoundConfig {
    grid_size: usize,
    max_delta: f64,
}

impl Default for EfficientBoundConfig {
    fn default() -> Self {
        EfficientBoundConfig {
            grid_size: 50,
            max_delta: 1.0,
        }
    }
}

impl EfficientBoundConfig {
    pub fn new(grid_size: usize, max_delta: f64) -> Result<Self> {
        if grid_size == 0 {
            return Err(Error::Config("grid_size must be at least 1".into()));
        }
        check_probability("max_delta", max_delta)?;
        Ok(EfficientBoundConfig {
            grid_size,
            max_delta,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn max_delta(&self) -> f64 {
        self.max_delta
    }

    /// Admissible deletion counts `u* = max(round(dn - j), 0)` for
    /// `j = 1..=grid_size`, deduplicated, with `δ' = d - u*/n` in `(0, max_delta]`.
    pub fn candidate_weights(&self, n: usize, d: f64) -> Vec<usize> {
        let nf = n as f64;
        let mut out: Vec<usize> = Vec::new();
        for j in 1..=self.grid_size {
            let u = (d * nf - j as f64).round().max(0.0) as usize;
            let delta = d - u as f64 / nf;
            if delta > 0.0 && delta <= self.max_delta + 1e-12 && out.last() != Some(&u) {
                out.push(u);
            }
        }
        out
    }
}

/// The bracketed terms of the δ-shifted bound at deletion count `u`, with
/// `δ = d - u/n`. `pi_log` is `log2 Π_n^u[u]`.
fn efficient_terms(n: usize, d: f64, u: usize, pi_log: LogValue) -> Vec<(&'static str, f64)> {
    let nf = n as f64;
    let shifted = u as f64 / nf;
    let delta = d - shifted;
    let tail = kl_bernoulli(BernoulliPair::new(shifted, d).expect("probabilities in [0, 1]"));
    let spread = (2.0 * PI * shifted * (1.0 - shifted) * nf).max(1.0).log2() / nf;
    let m = u.min(n - u).max(1) as f64;
    vec![
        ("base", 1.0 - d),
        ("pi_term", pi_log.log2() / nf),
        ("delta", delta),
        ("kl_tail", (-nf * tail).exp2()),
        ("stirling_spread", spread),
        (
            "convergence_term",
            2.0 * convergence_shift_unchecked(n as u64, d),
        ),
        ("stirling_tail", LOG2_E / (3.0 * nf * m)),
    ]
}

/// The `O(n^3)` bound: minimum over a δ grid of the bracketed expression,
/// each candidate evaluated at an integer deletion count `u* = (d - δ)n`.
pub fn efficient_upper(n: usize, d: f64, cfg: &EfficientBoundConfig) -> Result<BoundReport> {
    check_n(n)?;
    check_open_unit(d)?;
    let candidates = cfg.candidate_weights(n, d);
    if candidates.is_empty() {
        return Err(Error::Config(format!(
            "no admissible delta on a grid of {} for n = {n}, d = {d}",
            cfg.grid_size
        )));
    }
    let mut best: Option<BoundReport> = None;
    for u in candidates {
        let pi = pi_uu_log(n, u)?;
        let report = BoundReport::assemble(
            BoundKind::Efficient,
            n,
            d,
            efficient_terms(n, d, u, pi),
            Some(u),
        );
        if best.as_ref().is_none_or(|b| report.value < b.value) {
            best = Some(report);
        }
    }
    Ok(best.expect("nonempty candidate set"))
}

/// Merged error term `log2(π² e^{4/3} n²) / n` of the simplified bound.
fn corollary_error_term(n: usize) -> f64 {
    let nf = n as f64;
    (PI * PI * E.powf(4.0 / 3.0) * nf * nf).log2() / nf
}

fn corollary_terms(n: usize, d: f64, u: usize, pi_log: LogValue) -> Vec<(&'static str, f64)> {
    let nf = n as f64;
    let shifted = u as f64 / nf;
    let tail = kl_bernoulli(BernoulliPair::new(shifted, d).expect("probabilities in [0, 1]"));
    vec![
        ("base", 1.0 - d),
        ("pi_term", pi_log.log2() / nf),
        ("delta", d - shifted),
        ("kl_tail", (-nf * tail).exp2()),
        ("merged_error", corollary_error_term(n)),
    ]
}

/// Checks `(d - δ, d + δ) ⊆ [0, 1]` and `n >= 1 / min{d - δ, 1 - d + δ}`
/// and returns `u = (d - δ)n` rounded.
fn corollary_weight(n: usize, d: f64, delta: f64) -> Result<usize> {
    let nf = n as f64;
    if !(delta > 0.0 && d - delta >= 0.0 && d + delta <= 1.0) {
        return Err(Error::Domain(format!(
            "delta = {delta} does not satisfy (d - delta, d + delta) within [0, 1] for d = {d}"
        )));
    }
    let shifted = d - delta;
    let need = 1.0 / shifted.min(1.0 - shifted);
    if nf < need * (1.0 - 1e-12) {
        return Err(Error::Domain(format!(
            "n = {n} is below 1 / min(d - delta, 1 - d + delta) = {need}"
        )));
    }
    let u = (shifted * nf).round();
    Ok(u as usize)
}

fn is_near_integer(x: f64) -> bool {
    (x - x.round()).abs() <= 1e-9 * x.abs().max(1.0)
}

/// The simplified four-term bound at a fixed δ.
///
/// Requires `δn ∈ ℕ` and `(d - δ)n ∈ ℕ` (within `1e-9`), together with the
/// conditions of [`corollary_weight`].
pub fn corollary_upper(n: usize, d: f64, delta: f64) -> Result<f64> {
    Ok(corollary_report(n, d, delta)?.value)
}

pub fn corollary_report(n: usize, d: f64, delta: f64) -> Result<BoundReport> {
    check_n(n)?;
    check_open_unit(d)?;
    let nf = n as f64;
    if !is_near_integer(delta * nf) {
        return Err(Error::Domain(format!(
            "delta * n = {} is not an integer",
            delta * nf
        )));
    }
    if !is_near_integer((d - delta) * nf) {
        return Err(Error::Domain(format!(
            "(d - delta) * n = {} is not an integer",
            (d - delta) * nf
        )));
    }
    let u = corollary_weight(n, d, delta)?;
    let pi = pi_uu_log(n, u)?;
    Ok(BoundReport::assemble(
        BoundKind::Corollary,
        n,
        d,
        corollary_terms(n, d, u, pi),
        Some(u),
    ))
}

/// Best simplified bound over the same snapped δ grid as [`efficient_upper`],
/// keeping only candidates that meet the simplified bound's conditions.
pub fn corollary_best(n: usize, d: f64, cfg: &EfficientBoundConfig) -> Result<BoundReport> {
    check_n(n)?;
    check_open_unit(d)?;
    let mut best: Option<BoundReport> = None;
    for u in cfg.candidate_weights(n, d) {
        let delta = d - u as f64 / n as f64;
        if corollary_weight(n, d, delta).is_err() {
            continue;
        }
        let pi = pi_uu_log(n, u)?;
        let report = BoundReport::assemble(
            BoundKind::Corollary,
            n,
            d,
            corollary_terms(n, d, u, pi),
            Some(u),
        );
        if best.as_ref().is_none_or(|b| report.value < b.value) {
            best = Some(report);
        }
    }
    best.ok_or_else(|| {
        Error::Config(format!(
            "no delta on the grid satisfies the corollary conditions for n = {n}, d = {d}"
        ))
    })
}

/// Dispatches to the bound of the given kind; `main` needs `table`.
pub fn compute(
    kind: BoundKind,
    n: usize,
    d: f64,
    table: Option<&PiTable>,
    cfg: &EfficientBoundConfig,
) -> Result<BoundReport> {
    match kind {
        BoundKind::Warmup => warmup_upper(n, d),
        BoundKind::Main => {
            let table = table.ok_or_else(|| Error::Config("main bound needs a pi table".into()))?;
            main_upper(n, d, table)
        }
        BoundKind::Efficient => efficient_upper(n, d, cfg),
        BoundKind::Corollary => corollary_best(n, d, cfg),
    }
}
