use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use delrate::bounds::BoundReport;
use delrate::channelsim::SimEstimate;
use delrate::walkdp::format_sig17;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;

const HEADER: &str = "kind,n,d,value,half_width,samples,seed,generator_id";

/// One output record; simulation-only fields stay empty for bounds.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub kind: String,
    pub n: usize,
    pub d: f64,
    pub value: f64,
    pub half_width: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub generator_id: Option<String>,
    #[serde(skip)]
    pub components: Vec<(String, f64)>,
}

impl Row {
    pub fn derived(kind: &str, n: usize, d: f64, value: f64) -> Self {
        Row {
            kind: kind.to_string(),
            n,
            d,
            value,
            half_width: None,
            samples: None,
            seed: None,
            generator_id: None,
            components: Vec::new(),
        }
    }

    pub fn bound(report: &BoundReport) -> Self {
        let mut row = Row::derived(
            &format!("{}_ub", report.kind.name()),
            report.n,
            report.d,
            report.value,
        );
        row.components = report
            .components
            .iter()
            .map(|c| (c.name.clone(), c.value))
            .collect();
        row
    }

    /// The `sim_lb` and `sim_ub` rows of one estimate.
    pub fn simulation(est: &SimEstimate) -> [Self; 2] {
        let (lower, upper) = est.sim_bounds();
        let make = |kind: &str, value: f64| Row {
            half_width: Some(est.half_width),
            samples: Some(est.samples),
            seed: Some(est.seed),
            generator_id: Some(est.generator_id.clone()),
            ..Row::derived(kind, est.n, est.d, value)
        };
        [make("sim_lb", lower), make("sim_ub", upper)]
    }
}

/// Component names across all rows, in first-seen order.
fn component_columns(rows: &[Row]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for row in rows {
        for (name, _) in &row.components {
            if !names.contains(name) {
                names.push(name.clone());
            }
        }
    }
    names
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

pub fn render_csv(rows: &[Row], verbose: bool) -> String {
    let columns = if verbose {
        component_columns(rows)
    } else {
        Vec::new()
    };
    let mut out = format!(
        "# generated_at={}\n{HEADER}",
        Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
    );
    for name in &columns {
        let _ = write!(out, ",c_{name}");
    }
    out.push('\n');
    for row in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.kind,
            row.n,
            format_sig17(row.d),
            format_sig17(row.value),
            row.half_width.map(format_sig17).unwrap_or_default(),
            opt(&row.samples),
            opt(&row.seed),
            opt(&row.generator_id),
        );
        for name in &columns {
            let cell = row
                .components
                .iter()
                .find(|(c, _)| c == name)
                .map(|&(_, v)| format_sig17(v))
                .unwrap_or_default();
            let _ = write!(out, ",{cell}");
        }
        out.push('\n');
    }
    out
}

pub fn render_json(rows: &[Row], verbose: bool) -> String {
    let records: Vec<Value> = rows
        .iter()
        .map(|row| {
            let mut value = serde_json::to_value(row).expect("rows serialize");
            if verbose && !row.components.is_empty() {
                let parts: Map<String, Value> = row
                    .components
                    .iter()
                    .map(|(name, v)| (name.clone(), Value::from(*v)))
                    .collect();
                value["components"] = Value::Object(parts);
            }
            value
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&records).expect("rows serialize");
    text.push('\n');
    text
}

pub fn render(rows: &[Row], format: Format, verbose: bool) -> String {
    match format {
        Format::Csv => render_csv(rows, verbose),
        Format::Json => render_json(rows, verbose),
    }
}

/// Writes `text` to `path` through a temporary file in the same directory,
/// or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> io::Result<()> {
    let Some(path) = path else {
        let mut stdout = io::stdout().lock();
        stdout.write_all(text.as_bytes())?;
        return stdout.flush();
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut row = Row::derived("main_ub", 10, 0.5, 0.25);
        row.components = vec![("base".into(), 0.1), ("jensen_term".into(), 0.15)];
        let text = render_csv(&[row.clone(), Row::derived("e_inf_ub", 10, 0.5, 0.1)], true);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# generated_at="));
        assert_eq!(lines[1], format!("{HEADER},c_base,c_jensen_term"));
        assert_eq!(
            lines[2],
            "main_ub,10,0.5,0.25,,,,,0.10000000000000001,0.14999999999999999"
        );
        assert_eq!(lines[3], "e_inf_ub,10,0.5,0.10000000000000001,,,,,,");
        let plain = render_csv(&[row], false);
        assert_eq!(plain.lines().nth(1), Some(HEADER));
    }

    #[test]
    fn json_components_only_when_verbose() {
        let mut row = Row::derived("warmup_ub", 4, 0.25, 1.0);
        row.components = vec![("base".into(), 1.0)];
        let quiet: Value = serde_json::from_str(&render_json(&[row.clone()], false)).unwrap();
        assert!(quiet[0].get("components").is_none());
        assert_eq!(quiet[0]["kind"], "warmup_ub");
        assert!(quiet[0]["seed"].is_null());
        let loud: Value = serde_json::from_str(&render_json(&[row], true)).unwrap();
        assert_eq!(loud[0]["components"]["base"], 1.0);
    }
}
