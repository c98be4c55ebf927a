//! Random-walk dynamic programs over pairs of deletion patterns.
//!
//! Two independent patterns `D^α ~ Ber(α)^n` and `D^β ~ Ber(β)^n` applied to
//! a uniform input define the walk `W_j = Σ_{i<=j} (D^α_i - D^β_i)`, i.e. the
//! running difference in the number of deleted bits. The probability that
//! both outputs are equal is an expectation of a product of per-step factors
//! along this walk, which a layer-by-layer recurrence over `(j, k = W_j)`
//! evaluates in `O(n^2)` time. Tracking the weight `u = w(D)` as well gives
//! the `S^ℓ(n, k, u)` recurrence and from it the `Π` table.
//!
//! Per-step transition weights, for a move into position `k`:
//!
//! | step          | pattern bits       | weight                                |
//! |---------------|--------------------|---------------------------------------|
//! | stay          | both delete        | `αβ`                                  |
//! | stay          | both keep          | `(1-α)(1-β)`, halved when `k != 0`    |
//! | from `k - 1`  | only `D^α` deletes | `α(1-β) / √2`                         |
//! | from `k + 1`  | only `D^β` deletes | `(1-α)β / √2`                         |
//!
//! All cells are base-2 logs; every cell is combined with a single
//! max-shifted log-sum so the result is deterministic bit for bit.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{check_probability, Error, Result};
use crate::numerics::{log2_prob, log_sum3, log_sum4, LogValue};

const NEG_INF: f64 = f64::NEG_INFINITY;

/// Blocklength and the deletion rates of the two patterns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkParams {
    n: usize,
    alpha: f64,
    beta: f64,
}

impl WalkParams {
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        check_probability("alpha", alpha)?;
        check_probability("beta", beta)?;
        Ok(WalkParams { n, alpha, beta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// One layer of the walk recurrence: values for `k ∈ {-step..=step}`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkLayer {
    step: usize,
    values: Vec<LogValue>,
}

impl WalkLayer {
    pub fn step(&self) -> usize {
        self.step
    }

    /// Value at walk position `k`; zero outside `|k| <= step`.
    pub fn get(&self, k: i64) -> LogValue {
        if k.unsigned_abs() as usize > self.step {
            return LogValue::ZERO;
        }
        self.values[(k + self.step as i64) as usize]
    }

    /// `(k, value)` pairs in increasing `k`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, LogValue)> + '_ {
        let off = self.step as i64;
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (i as i64 - off, v))
    }
}

/// Log-domain step coefficients for one `(α, β)` pair.
struct StepWeights {
    stay_origin: f64,
    stay_away: f64,
    from_below: f64,
    from_above: f64,
}

impl StepWeights {
    fn new(alpha: f64, beta: f64, weighted: bool) -> Self {
        let both_delete = alpha * beta;
        let both_keep = (1.0 - alpha) * (1.0 - beta);
        let scale = if weighted { FRAC_1_SQRT_2 } else { 1.0 };
        let keep_factor = if weighted { 0.5 } else { 1.0 };
        StepWeights {
            stay_origin: log2_prob(both_delete + both_keep),
            stay_away: log2_prob(both_delete + both_keep * keep_factor),
            from_below: log2_prob(alpha * (1.0 - beta) * scale),
            from_above: log2_prob((1.0 - alpha) * beta * scale),
        }
    }
}

fn run_walk(params: &WalkParams, weighted: bool) -> WalkLayer {
    let n = params.n;
    let w = StepWeights::new(params.alpha, params.beta, weighted);
    // Offset n + 1 leaves one padding cell on each side for k ± 1 reads.
    let width = 2 * n + 3;
    let off = n + 1;
    let mut prev = vec![NEG_INF; width];
    let mut next = vec![NEG_INF; width];
    prev[off] = 0.0;
    for j in 1..=n {
        for idx in (off - j)..=(off + j) {
            let stay = if idx == off {
                w.stay_origin
            } else {
                w.stay_away
            };
            next[idx] = log_sum3(
                prev[idx] + stay,
                prev[idx - 1] + w.from_below,
                prev[idx + 1] + w.from_above,
            );
        }
        std::mem::swap(&mut prev, &mut next);
    }
    WalkLayer {
        step: n,
        values: prev[off - n..=off + n]
            .iter()
            .map(|&v| LogValue::from_log2(v))
            .collect(),
    }
}

/// Final layer of the agreement recurrence `R(n, k)`.
///
/// The `k = 0` entry is `log2 P(D^α(X) = D^β(X))`; other entries are the
/// weighted walk masses that the recurrence carries along.
pub fn agree_layer(params: &WalkParams) -> WalkLayer {
    run_walk(params, true)
}

/// `log2 P(D^α(X) = D^β(X))` for `X` uniform on `n`-bit strings.
///
/// `O(n^2)` time, two layers of `O(n)` memory.
pub fn agree_prob_log(params: &WalkParams) -> LogValue {
    agree_layer(params).get(0)
}

/// The same recurrence with every weight factor replaced by 1: the exact
/// distribution of `W_n`.
pub fn walk_distribution(params: &WalkParams) -> WalkLayer {
    run_walk(params, false)
}

/// One layer of `S^ℓ(j, k, u)` over `|k| <= j`, `0 <= u <= j`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedWalkLayer {
    step: usize,
    values: Vec<LogValue>,
}

impl WeightedWalkLayer {
    pub fn step(&self) -> usize {
        self.step
    }

    /// Value at `(k, u)`; zero outside the layer's domain.
    pub fn get(&self, k: i64, u: usize) -> LogValue {
        let j = self.step;
        if k.unsigned_abs() as usize > j || u > j {
            return LogValue::ZERO;
        }
        self.values[u * (2 * j + 1) + (k + j as i64) as usize]
    }

    /// The `k = 0` slice `u ↦ S^ℓ(step, 0, u)`.
    pub fn origin_slice(&self) -> Vec<LogValue> {
        (0..=self.step).map(|u| self.get(0, u)).collect()
    }
}

fn check_weight(n: usize, ell: usize) -> Result<()> {
    if ell > n {
        return Err(Error::Domain(format!("ell = {ell} exceeds n = {n}")));
    }
    Ok(())
}

/// Log coefficients of the weight-tracking recurrence at `p = ℓ/n`.
struct WeightSteps {
    both_delete: f64,
    one_delete: f64,
    keep_origin: f64,
    keep_away: f64,
}

impl WeightSteps {
    fn new(n: usize, ell: usize) -> Self {
        let p = if n == 0 { 0.0 } else { ell as f64 / n as f64 };
        let q = 1.0 - p;
        let keep = log2_prob(q * q);
        WeightSteps {
            both_delete: log2_prob(p * p),
            one_delete: log2_prob(p * q * FRAC_1_SQRT_2),
            keep_origin: keep,
            keep_away: keep - 1.0,
        }
    }
}

/// Walk-position window `[k_lo, k_hi]` and weight window `[u_lo, u_hi]`
/// computed at layer `j`.
#[derive(Clone, Copy)]
struct Window {
    k_reach: usize,
    u_lo: usize,
    u_hi: usize,
}

/// Shared kernel for `S^ℓ`. `window(j)` selects which cells of layer `j` are
/// evaluated; cells outside the window keep whatever they held, which is
/// only sound when the window contains every cell that can still reach the
/// cells the caller reads at the end.
fn run_weighted<F>(n: usize, ell: usize, window: F) -> (Vec<f64>, usize, usize)
where
    F: Fn(usize) -> Window,
{
    let c = WeightSteps::new(n, ell);
    // Row stride with one padding cell on each side of k; row 0 is a
    // padding row for u - 1 reads at u = 0.
    let width = 2 * n + 3;
    let off = n + 1;
    let rows = n + 2;
    let mut prev = vec![NEG_INF; width * rows];
    let mut next = vec![NEG_INF; width * rows];
    prev[width + off] = 0.0;
    for j in 1..=n {
        let Window {
            k_reach,
            u_lo,
            u_hi,
        } = window(j);
        for u in u_lo..=u_hi {
            let row = (u + 1) * width;
            let below = u * width;
            for idx in (off - k_reach)..=(off + k_reach) {
                let keep = if idx == off {
                    c.keep_origin
                } else {
                    c.keep_away
                };
                next[row + idx] = log_sum4(
                    prev[below + idx] + c.both_delete,
                    prev[below + idx - 1] + c.one_delete,
                    prev[row + idx + 1] + c.one_delete,
                    prev[row + idx] + keep,
                );
            }
        }
        std::mem::swap(&mut prev, &mut next);
    }
    (prev, width, off)
}

/// Full layer `S^ℓ(n, ·, ·)` over the whole domain `|k| <= n`, `0 <= u <= n`.
pub fn weighted_walk_layer(n: usize, ell: usize) -> Result<WeightedWalkLayer> {
    check_weight(n, ell)?;
    let (cells, width, off) = run_weighted(n, ell, |j| Window {
        k_reach: j,
        u_lo: 0,
        u_hi: j,
    });
    let mut values = Vec::with_capacity((n + 1) * (2 * n + 1));
    for u in 0..=n {
        let row = (u + 1) * width;
        values.extend(
            cells[row + off - n..=row + off + n]
                .iter()
                .map(|&v| LogValue::from_log2(v)),
        );
    }
    Ok(WeightedWalkLayer { step: n, values })
}

/// `u ↦ log2 S^ℓ(n, 0, u)`, i.e. `log2 Π_n^ℓ[u]` for every `u`.
pub fn agreement_weight_slice(n: usize, ell: usize) -> Result<Vec<LogValue>> {
    Ok(weighted_walk_layer(n, ell)?.origin_slice())
}

/// `log2 Π_n^ℓ[ℓ] = log2 S^ℓ(n, 0, ℓ)`.
///
/// Only cells that can still reach `(n, 0, ℓ)` are evaluated: at layer `j`
/// that is `|k| <= n - j` and `ℓ - (n - j) <= u <= ℓ`. The target depends on
/// no other cell, so the result is bit-identical to the full recurrence.
pub fn pi_uu_log(n: usize, ell: usize) -> Result<LogValue> {
    check_weight(n, ell)?;
    let (cells, width, off) = run_weighted(n, ell, |j| Window {
        k_reach: j.min(n - j),
        u_lo: (ell + j).saturating_sub(n),
        u_hi: j.min(ell),
    });
    Ok(LogValue::from_log2(cells[(ell + 1) * width + off]))
}

/// `u ↦ log2 Π_n^u[u]` for `u = 0..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiTable {
    n: usize,
    entries: Vec<LogValue>,
}

const CACHE_VERSION: u32 = 1;

impl PiTable {
    pub fn from_entries(n: usize, entries: Vec<LogValue>) -> Result<Self> {
        if entries.len() != n + 1 {
            return Err(Error::Config(format!(
                "pi table for n = {n} needs {} entries, got {}",
                n + 1,
                entries.len()
            )));
        }
        Ok(PiTable { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize) -> LogValue {
        self.entries[u]
    }

    pub fn entries(&self) -> &[LogValue] {
        &self.entries
    }

    /// Cache text: a `# pi-table n=<N> version=1` header, then `<u>,<log2_pi>`
    /// lines with 17 significant digits.
    pub fn to_cache_string(&self) -> String {
        let mut out = format!("# pi-table n={} version={}\n", self.n, CACHE_VERSION);
        for (u, v) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{u},{}", format_sig17(v.log2()));
        }
        out
    }

    /// Parses cache text, requiring it to describe blocklength `expected_n`.
    pub fn from_cache_str(text: &str, expected_n: usize) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Cache("empty file".into()))?;
        let (n, version) = parse_header(header)?;
        if version != CACHE_VERSION {
            return Err(Error::Cache(format!("unsupported version {version}")));
        }
        if n != expected_n {
            return Err(Error::Config(format!(
                "pi-table cache is for n = {n}, but n = {expected_n} was requested"
            )));
        }
        let mut entries = Vec::with_capacity(n + 1);
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (u, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Cache(format!("line {}: expected `u,value`", lineno + 2)))?;
            let u: usize = u
                .trim()
                .parse()
                .map_err(|_| Error::Cache(format!("line {}: bad index `{u}`", lineno + 2)))?;
            if u != entries.len() {
                return Err(Error::Cache(format!(
                    "line {}: expected index {}, found {u}",
                    lineno + 2,
                    entries.len()
                )));
            }
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Cache(format!("line {}: bad value `{v}`", lineno + 2)))?;
            if v.is_nan() || v > 0.0 {
                return Err(Error::Cache(format!(
                    "line {}: {v} is not the log of a probability",
                    lineno + 2
                )));
            }
            entries.push(LogValue::from_log2(v));
        }
        if entries.len() != n + 1 {
            return Err(Error::Cache(format!(
                "expected {} entries, found {}",
                n + 1,
                entries.len()
            )));
        }
        Ok(PiTable { n, entries })
    }

    pub fn load(path: &Path, expected_n: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_cache_str(&text, expected_n)
    }
}

fn parse_header(header: &str) -> Result<(usize, u32)> {
    let bad = || Error::Cache(format!("bad header `{header}`"));
    let rest = header.strip_prefix("# pi-table ").ok_or_else(bad)?;
    let mut n = None;
    let mut version = None;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("n", v)) => n = Some(v.parse().map_err(|_| bad())?),
            Some(("version", v)) => version = Some(v.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        }
    }
    Ok((n.ok_or_else(bad)?, version.ok_or_else(bad)?))
}

/// `pi_uu_log(n, ℓ)` for every `ℓ`, fanned out over the current rayon pool.
///
/// Each entry is an independent single-threaded computation and results are
/// collected in index order, so the table does not depend on scheduling.
pub fn pi_table(n: usize) -> Result<PiTable> {
    if n == 0 {
        return Err(Error::Domain("pi_table requires n >= 1".into()));
    }
    let entries = (0..=n)
        .into_par_iter()
        .map(|ell| pi_uu_log(n, ell))
        .collect::<Result<Vec<_>>>()?;
    Ok(PiTable { n, entries })
}

/// `%.17g`-style formatting: 17 significant digits, trailing zeros trimmed,
/// exact zero as `0`.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
