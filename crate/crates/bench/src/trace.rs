//! Long-format traces (`k,metric,value`), slopes and head-to-head comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sppa::solvers::TraceRecord;

use crate::experiment::RunSummary;
use crate::BenchError;

/// Residual levels used for first-hit counts and comparisons.
pub const THRESHOLDS: [f64; 3] = [1e-4, 1e-6, 1e-8];

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub metric: String,
    pub value: f64,
}

/// Flattens run records. Wall time is deliberately left out so that replays
/// of the same config produce byte-identical files.
pub fn trace_rows(records: &[TraceRecord]) -> Vec<TraceRow> {
    let mut rows = Vec::with_capacity(records.len() * 2);
    for r in records {
        let named = [
            ("residual_sq", r.residual_sq),
            ("objective_gap", r.objective_gap),
            ("inner_product", r.inner_product),
            ("lyapunov", r.lyapunov),
        ];
        for (metric, value) in named {
            if let Some(value) = value {
                rows.push(TraceRow { k: r.k, metric: metric.into(), value });
            }
        }
        for (metric, &value) in &r.extra {
            rows.push(TraceRow { k: r.k, metric: (*metric).into(), value });
        }
    }
    rows
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("k,metric,value\n");
    for r in rows {
        // `{:?}` keeps the shortest representation that round-trips.
        let _ = writeln!(out, "{},{},{:?}", r.k, r.metric, r.value);
    }
    out
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<(), BenchError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, trace_csv(rows))?;
    Ok(())
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRow>, BenchError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "k,metric,value" => {}
        _ => return Err(BenchError::Config("trace must start with the header `k,metric,value`".into())),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let bad = || BenchError::Config(format!("trace line {}: cannot parse `{line}`", i + 1));
            let mut parts = line.split(',');
            let (Some(k), Some(metric), Some(value), None) = (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(bad());
            };
            Ok(TraceRow {
                k: k.trim().parse().map_err(|_| bad())?,
                metric: metric.trim().to_string(),
                value: value.trim().parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>, BenchError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| BenchError::Config(format!("cannot read trace {}: {e}", path.display())))?;
    parse_trace(&text)
}

/// First `k` at which `metric` is at or below `threshold`.
pub fn first_hits(rows: &[TraceRow], metric: &str, threshold: f64) -> Option<usize> {
    rows.iter().find(|r| r.metric == metric && r.value <= threshold).map(|r| r.k)
}

/// Least-squares slope of `log value` against `log k` over the second half of
/// the run. Nonpositive and non-finite values are skipped; at least ten
/// points must remain.
pub fn fit_slope(rows: &[TraceRow], metric: &str) -> Result<f64, BenchError> {
    let series: Vec<(usize, f64)> = rows.iter().filter(|r| r.metric == metric).map(|r| (r.k, r.value)).collect();
    let Some(k_max) = series.iter().map(|p| p.0).max() else {
        return Err(BenchError::Config(format!("trace has no `{metric}` values")));
    };
    let points: Vec<(f64, f64)> = series
        .iter()
        .filter(|(k, v)| 2 * k > k_max && *k > 0 && *v > 0.0 && v.is_finite())
        .map(|&(k, v)| ((k as f64).ln(), v.ln()))
        .collect();
    if points.len() < 10 {
        return Err(BenchError::Config(format!(
            "only {} usable `{metric}` points in the second half; need 10",
            points.len()
        )));
    }
    // Centre on the first point so that a constant series is exactly flat.
    let (x0, y0) = points[0];
    let points: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x - x0, y - y0)).collect();
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    A,
    B,
    Tie,
    /// Neither run reached the threshold.
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    /// Keyed by threshold, e.g. `"1e-6"`.
    pub thresholds: BTreeMap<String, (Option<usize>, Option<usize>, Winner)>,
}

impl Comparison {
    pub fn winner(&self, threshold: f64) -> Option<Winner> {
        self.thresholds.get(&crate::experiment::threshold_key(threshold)).map(|t| t.2)
    }
}

/// Which run reaches each residual threshold first. Runs on different
/// instances are not comparable.
pub fn compare(a: &RunSummary, b: &RunSummary) -> Result<Comparison, BenchError> {
    if a.problem != b.problem {
        return Err(BenchError::Config("cannot compare runs on different problem instances".into()));
    }
    let thresholds = THRESHOLDS
        .iter()
        .map(|&t| {
            let (ha, hb) = (a.first_hit(t), b.first_hit(t));
            let w = match (ha, hb) {
                (None, None) => Winner::Neither,
                (Some(_), None) => Winner::A,
                (None, Some(_)) => Winner::B,
                (Some(x), Some(y)) if x < y => Winner::A,
                (Some(x), Some(y)) if x > y => Winner::B,
                _ => Winner::Tie,
            };
            (crate::experiment::threshold_key(t), (ha, hb, w))
        })
        .collect();
    Ok(Comparison { thresholds })
}
