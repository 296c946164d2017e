//! Corpus-level analytics: gap-filled time series, degree histograms and
//! their CSV/JSON export.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Months, NaiveDate};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::corpus::law_part;
use crate::graph::{EdgeKind, GraphStore};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MonitorError {
    #[error("invalid range: {from} is after {to}")]
    InvalidRange { from: NaiveDate, to: NaiveDate },
    #[error("unknown {kind} {value:?}")]
    UnknownValue { kind: &'static str, value: String },
}

macro_rules! string_enum {
    ($name:ident, $kind:literal, { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $name {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = MonitorError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($text => Ok($name::$variant),)+
                    _ => Err(MonitorError::UnknownValue { kind: $kind, value: s.to_string() }),
                }
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    LawsEnacted,
    InForceCount,
    AvgOutgoingCitations,
    NewCitations,
}

string_enum!(Metric, "metric", {
    LawsEnacted => "laws_enacted",
    InForceCount => "in_force_count",
    AvgOutgoingCitations => "avg_outgoing_citations",
    NewCitations => "new_citations",
});

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::LawsEnacted,
        Metric::InForceCount,
        Metric::AvgOutgoingCitations,
        Metric::NewCitations,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Year,
    Month,
}

string_enum!(Granularity, "granularity", {
    Year => "year",
    Month => "month",
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    In,
    Out,
}

string_enum!(Direction, "direction", {
    In => "in",
    Out => "out",
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Json,
}

string_enum!(ExportFormat, "format", {
    Csv => "csv",
    Json => "json",
});

impl ExportFormat {
    pub fn content_type(self) -> &'static str {
        match self {
            ExportFormat::Csv => "text/csv; charset=utf-8",
            ExportFormat::Json => "application/json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub period_start: NaiveDate,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub metric: Metric,
    pub granularity: Granularity,
    pub points: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeHistogram {
    pub edge_kind: EdgeKind,
    pub direction: Direction,
    /// `(degree, node_count)` pairs with non-zero count, ascending by degree.
    pub bins: Vec<(usize, usize)>,
}

impl DegreeHistogram {
    pub fn node_total(&self) -> usize {
        self.bins.iter().map(|(_, c)| c).sum()
    }
}

/// First day of the period containing `date`.
pub fn period_start(date: NaiveDate, granularity: Granularity) -> NaiveDate {
    match granularity {
        Granularity::Year => NaiveDate::from_ymd_opt(date.year(), 1, 1),
        Granularity::Month => NaiveDate::from_ymd_opt(date.year(), date.month(), 1),
    }
    .expect("first day of a valid period")
}

fn next_period(start: NaiveDate, granularity: Granularity) -> NaiveDate {
    let months = match granularity {
        Granularity::Year => 12,
        Granularity::Month => 1,
    };
    start.checked_add_months(Months::new(months)).expect("date in range")
}

/// `(start, end)` of every period overlapping `[from, to]`; `end` is inclusive.
pub fn periods(
    from: NaiveDate,
    to: NaiveDate,
    granularity: Granularity,
) -> Result<Vec<(NaiveDate, NaiveDate)>, MonitorError> {
    if from > to {
        return Err(MonitorError::InvalidRange { from, to });
    }
    let mut out = Vec::new();
    let mut start = period_start(from, granularity);
    while start <= to {
        let next = next_period(start, granularity);
        out.push((start, next.pred_opt().expect("date in range")));
        start = next;
    }
    Ok(out)
}

/// Per-period values of `metric` over the ingested laws:
///
/// * `laws_enacted`: laws published in the period.
/// * `in_force_count`: laws in force on the period's last day.
/// * `avg_outgoing_citations`: mean `CITES` out-degree (articles counted
///   for their law) of laws published up to the period's last day, 0 when
///   there are none.
/// * `new_citations`: `CITES` edges whose source law was published in the period.
pub fn timeseries(
    graph: &GraphStore,
    metric: Metric,
    granularity: Granularity,
    from: NaiveDate,
    to: NaiveDate,
) -> Result<TimeSeries, MonitorError> {
    let periods = periods(from, to, granularity)?;
    let published: BTreeMap<&str, NaiveDate> = graph
        .ingested_laws()
        .filter_map(|l| l.properties.publication_date.map(|d| (l.node_id.as_str(), d)))
        .collect();
    let mut dates: Vec<NaiveDate> = published.values().copied().collect();
    dates.sort();
    let count_in = |start: NaiveDate, end: NaiveDate| {
        (dates.partition_point(|d| *d <= end) - dates.partition_point(|d| *d < start)) as f64
    };

    let points = match metric {
        Metric::LawsEnacted => periods.iter().map(|&(s, e)| count_in(s, e)).collect::<Vec<_>>(),
        Metric::InForceCount => periods
            .iter()
            .map(|&(_, e)| graph.in_force_laws(e).len() as f64)
            .collect(),
        Metric::AvgOutgoingCitations => {
            let mut by_date: Vec<(NaiveDate, usize)> = published
                .iter()
                .map(|(id, d)| (*d, graph.law_degree(id, EdgeKind::Cites, true)))
                .collect();
            by_date.sort();
            periods
                .iter()
                .map(|&(_, e)| {
                    let upto = &by_date[..by_date.partition_point(|(d, _)| *d <= e)];
                    if upto.is_empty() {
                        0.0
                    } else {
                        upto.iter().map(|(_, deg)| *deg as f64).sum::<f64>() / upto.len() as f64
                    }
                })
                .collect()
        }
        Metric::NewCitations => {
            let mut sources: Vec<NaiveDate> = graph
                .edges()
                .filter(|e| e.kind == EdgeKind::Cites)
                .filter_map(|e| published.get(law_part(&e.src)).copied())
                .collect();
            sources.sort();
            periods
                .iter()
                .map(|&(s, e)| (sources.partition_point(|d| *d <= e) - sources.partition_point(|d| *d < s)) as f64)
                .collect()
        }
    };
    Ok(TimeSeries {
        metric,
        granularity,
        points: periods
            .iter()
            .zip(points)
            .map(|(&(period_start, _), value)| SeriesPoint { period_start, value })
            .collect(),
    })
}

/// Histogram of per-law degrees for `kind`, articles counted for their law.
/// In-degree covers every law node including stubs; out-degree covers
/// ingested laws only, since stubs have no known outgoing edges.
pub fn degree_distribution(graph: &GraphStore, kind: EdgeKind, direction: Direction) -> DegreeHistogram {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    let laws: BTreeSet<&str> = match direction {
        Direction::In => graph.laws().map(|l| l.node_id.as_str()).collect(),
        Direction::Out => graph.ingested_laws().map(|l| l.node_id.as_str()).collect(),
    };
    for law in laws {
        *counts
            .entry(graph.law_degree(law, kind, direction == Direction::Out))
            .or_default() += 1;
    }
    DegreeHistogram {
        edge_kind: kind,
        direction,
        bins: counts.into_iter().collect(),
    }
}

/// Fixed-point with at most six decimals, trailing zeros removed.
pub fn format_number(value: f64) -> String {
    let s = format!("{value:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn json_number(value: f64) -> Value {
    let rounded: f64 = format_number(value).parse().expect("formatted number parses");
    if rounded.fract() == 0.0 && rounded.abs() < 9.0e15 {
        json!(rounded as i64)
    } else {
        json!(rounded)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Dataset<'a> {
    Series(&'a TimeSeries),
    Histogram(&'a DegreeHistogram),
}

/// Serializes a dataset. CSV uses a `period,value` or `degree,count`
/// header; JSON mirrors the type's fields. Output ends with a newline.
pub fn export_dataset(dataset: Dataset<'_>, format: ExportFormat) -> Vec<u8> {
    let mut out = String::new();
    match (dataset, format) {
        (Dataset::Series(s), ExportFormat::Csv) => {
            out.push_str("period,value\n");
            for p in &s.points {
                out.push_str(&format!("{},{}\n", p.period_start, format_number(p.value)));
            }
        }
        (Dataset::Histogram(h), ExportFormat::Csv) => {
            out.push_str("degree,count\n");
            for (d, c) in &h.bins {
                out.push_str(&format!("{d},{c}\n"));
            }
        }
        (Dataset::Series(s), ExportFormat::Json) => {
            let points: Vec<Value> = s
                .points
                .iter()
                .map(|p| json!({ "period_start": p.period_start, "value": json_number(p.value) }))
                .collect();
            let value = json!({ "metric": s.metric, "granularity": s.granularity, "points": points });
            out = serde_json::to_string(&value).expect("json serializes");
            out.push('\n');
        }
        (Dataset::Histogram(h), ExportFormat::Json) => {
            out = serde_json::to_string(h).expect("json serializes");
            out.push('\n');
        }
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests;
