use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use delrate::bounds::{compute, corollary_report, BoundKind, BoundReport, EfficientBoundConfig};
use delrate::channelsim::estimate_en;
use delrate::oracle::{exact_en, MAX_ORACLE_N};
use delrate::walkdp::{format_sig17, pi_table, PiTable};
use delrate::Error;

use crate::args::{
    BoundArgs, DeltaArgs, GridArgs, PiTableArgs, SimArgs, SimulateArgs, SweepArgs, SweepKind,
    VerifyArgs,
};
use crate::output::{emit, render, Row};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or inputs; exit code 1.
    Usage(String),
    /// A computation or write failed; exit code 2.
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Compute(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Compute(msg) => write!(f, "error: {msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => CliError::Compute(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn io_error(what: &str, e: std::io::Error) -> CliError {
    CliError::Compute(format!("{what}: {e}"))
}

/// Parses `start:stop:step`. The stop value is included when it lies within
/// half a step of the last grid point; points are rounded to 12 decimals so
/// that `0.05:0.95:0.05` yields `0.15` rather than `0.15000000000000002`.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || usage(format!("--d-grid: expected START:STOP:STEP, got `{spec}`"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0 && step.is_finite() && start <= stop) {
        return Err(usage(format!(
            "--d-grid: need step > 0 and start <= stop, got `{spec}`"
        )));
    }
    let count = ((stop - start) / step + 0.5).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn grid_values(grid: &GridArgs) -> CliResult<Vec<f64>> {
    let values = match (&grid.d, &grid.d_grid) {
        (Some(d), _) => vec![*d],
        (None, Some(spec)) => parse_grid(spec)?,
        (None, None) => return Err(usage("one of --d or --d-grid is required")),
    };
    check_open_grid(&values, if grid.d.is_some() { "--d" } else { "--d-grid" })?;
    Ok(values)
}

fn check_open_grid(values: &[f64], flag: &str) -> CliResult<()> {
    match values.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
        Some(d) => Err(usage(format!("{flag}: d = {d} is not in (0, 1)"))),
        None => Ok(()),
    }
}

fn check_n(n: usize) -> CliResult<()> {
    if n == 0 {
        Err(usage("--n: blocklength must be at least 1"))
    } else {
        Ok(())
    }
}

fn check_sim(sim: &SimArgs) -> CliResult<()> {
    if sim.samples == 0 {
        return Err(usage("--samples: need at least one sample"));
    }
    if !(sim.confidence > 0.0 && sim.confidence < 1.0) {
        return Err(usage(format!(
            "--confidence: {} is not in (0, 1)",
            sim.confidence
        )));
    }
    Ok(())
}

fn delta_config(args: &DeltaArgs) -> CliResult<EfficientBoundConfig> {
    EfficientBoundConfig::new(args.delta_grid_size, args.max_delta)
        .map_err(|e| usage(format!("--delta-grid-size/--max-delta: {e}")))
}

/// Loads the cache when it exists; otherwise builds the table and, if a
/// path was given, stores it there.
fn obtain_pi_table(n: usize, cache: Option<&Path>) -> CliResult<PiTable> {
    if let Some(path) = cache.filter(|p| p.exists()) {
        return PiTable::load(path, n)
            .map_err(|e| usage(format!("--pi-cache {}: {e}", path.display())));
    }
    let table = pi_table(n)?;
    if let Some(path) = cache {
        emit(&table.to_cache_string(), Some(path)).map_err(|e| io_error("writing pi cache", e))?;
    }
    Ok(table)
}

fn summarize(d: f64, rows: &[Row]) {
    let mut line = format!("d={d}");
    for row in rows.iter().filter(|r| r.d == d) {
        let _ = write!(line, " {}={:.6}", row.kind, row.value);
    }
    eprintln!("{line}");
}

fn finish(rows: &[Row], grid: &[f64], output: &crate::args::OutputArgs) -> CliResult<()> {
    for &d in grid {
        summarize(d, rows);
    }
    let text = render(rows, output.format, output.verbose_components);
    emit(&text, output.out.as_deref()).map_err(|e| io_error("writing output", e))
}

pub fn bound(args: &BoundArgs) -> CliResult<()> {
    check_n(args.n)?;
    let grid = grid_values(&args.grid)?;
    let kind = BoundKind::from(args.kind);
    let cfg = delta_config(&args.delta_grid)?;
    if args.delta.is_some() && kind != BoundKind::Corollary {
        return Err(usage("--delta only applies to --kind corollary"));
    }
    if args.pi_cache.is_some() && kind != BoundKind::Main {
        return Err(usage("--pi-cache only applies to --kind main"));
    }
    let table = match kind {
        BoundKind::Main => Some(obtain_pi_table(args.n, args.pi_cache.as_deref())?),
        _ => None,
    };
    let mut rows = Vec::with_capacity(grid.len());
    for &d in &grid {
        let report = match args.delta {
            Some(delta) => {
                corollary_report(args.n, d, delta).map_err(|e| usage(format!("--delta: {e}")))?
            }
            None => compute(kind, args.n, d, table.as_ref(), &cfg)?,
        };
        rows.push(Row::bound(&report));
    }
    finish(&rows, &grid, &args.output)
}

pub fn pi_table_cmd(args: &PiTableArgs) -> CliResult<()> {
    check_n(args.n)?;
    let table = pi_table(args.n)?;
    emit(&table.to_cache_string(), args.out.as_deref())
        .map_err(|e| io_error("writing pi table", e))?;
    eprintln!("pi table n={} written", args.n);
    Ok(())
}

fn simulate_rows(n: usize, d: f64, sim: &SimArgs) -> CliResult<[Row; 2]> {
    let est = estimate_en(n, d, sim.samples, sim.seed, sim.confidence)?;
    Ok(Row::simulation(&est))
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    check_n(args.n)?;
    check_sim(&args.sim)?;
    let grid = grid_values(&args.grid)?;
    let mut rows = Vec::new();
    for &d in &grid {
        rows.extend(simulate_rows(args.n, d, &args.sim)?);
    }
    finish(&rows, &grid, &args.output)
}

pub fn sweep(args: &SweepArgs) -> CliResult<()> {
    check_n(args.n)?;
    let grid = grid_values(&args.grid)?;
    let cfg = delta_config(&args.delta_grid)?;
    let with_sim = args.kinds.contains(&SweepKind::Sim);
    if with_sim {
        check_sim(&args.sim)?;
    }
    let mut kinds: Vec<BoundKind> = Vec::new();
    for k in &args.kinds {
        let kind = match k {
            SweepKind::Warmup => BoundKind::Warmup,
            SweepKind::Main => BoundKind::Main,
            SweepKind::Efficient => BoundKind::Efficient,
            SweepKind::Corollary => BoundKind::Corollary,
            SweepKind::Sim => continue,
        };
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    let table = if kinds.contains(&BoundKind::Main) {
        Some(obtain_pi_table(args.n, args.pi_cache.as_deref())?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for &d in &grid {
        let mut best: Option<BoundReport> = None;
        for &kind in &kinds {
            let report = compute(kind, args.n, d, table.as_ref(), &cfg)?;
            rows.push(Row::bound(&report));
            if best.as_ref().is_none_or(|b| report.value < b.value) {
                best = Some(report);
            }
        }
        if with_sim {
            rows.extend(simulate_rows(args.n, d, &args.sim)?);
        }
        if let Some(best) = best {
            rows.push(Row::derived("e_inf_ub", args.n, d, best.e_inf_upper));
            rows.push(Row::derived(
                "comp_rate_lb",
                args.n,
                d,
                best.compression_rate_lower(),
            ));
        }
    }
    finish(&rows, &grid, &args.output)
}

pub fn verify(args: &VerifyArgs) -> CliResult<()> {
    if args.max_n == 0 || args.max_n > MAX_ORACLE_N {
        return Err(usage(format!(
            "--max-n: must be between 1 and {MAX_ORACLE_N}, got {}",
            args.max_n
        )));
    }
    let grid = parse_grid(&args.d_grid)?;
    check_open_grid(&grid, "--d-grid")?;
    let cfg = EfficientBoundConfig::default();
    let mut text = String::from("kind,n,d,e_inf_upper,exact_en,holds\n");
    let (mut checked, mut violations) = (0usize, 0usize);
    for n in 1..=args.max_n {
        let table = pi_table(n)?;
        for &d in &grid {
            let exact = exact_en(n, d)?;
            for kind in BoundKind::ALL {
                // the simplified bound has no admissible δ at some tiny n
                let Ok(report) = compute(kind, n, d, Some(&table), &cfg) else {
                    continue;
                };
                let holds = report.e_inf_upper >= exact;
                checked += 1;
                violations += usize::from(!holds);
                let _ = writeln!(
                    text,
                    "{kind},{n},{},{},{},{holds}",
                    format_sig17(d),
                    format_sig17(report.e_inf_upper),
                    format_sig17(exact)
                );
            }
        }
    }
    emit(&text, args.out.as_deref()).map_err(|e| io_error("writing output", e))?;
    eprintln!("verified {checked} bounds against enumeration, {violations} violations");
    if violations > 0 {
        return Err(CliError::Compute(format!(
            "{violations} bounds fell below E_n"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0.05:0.95:0.05").unwrap();
        assert_eq!(g.len(), 19);
        assert_eq!(g[2], 0.15);
        assert_eq!(g[18], 0.95);
        assert_eq!(parse_grid("0.1:0.34:0.1").unwrap(), vec![0.1, 0.2, 0.3]);
        assert_eq!(
            parse_grid("0.1:0.36:0.1").unwrap(),
            vec![0.1, 0.2, 0.3, 0.4]
        );
        assert_eq!(parse_grid("0.5:0.5:0.1").unwrap(), vec![0.5]);
        for bad in [
            "0.1:0.9",
            "a:b:c",
            "0.9:0.1:0.1",
            "0.1:0.9:0",
            "0.1:0.9:-0.1",
        ] {
            assert!(matches!(parse_grid(bad), Err(CliError::Usage(_))), "{bad}");
        }
    }
}
