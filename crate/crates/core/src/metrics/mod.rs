//! Security coverage and performance overheads.

mod cost;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::netlist::NetId;
use crate::pathcheck::PathVerdict;

pub use cost::{model_overhead, CostModel, ModelMetrics};

/// Version of the CSV and JSON layouts written by this module.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no verdict for node {0}")]
    MissingVerdict(u32),
    #[error("coverage results use different node universes")]
    UniverseMismatch,
    #[error("cannot combine an empty set of results")]
    EmptySet,
    #[error("baseline {axis} must be positive, got {value}")]
    NonPositiveBaseline { axis: &'static str, value: String },
    #[error("overhead table has no BASELINE row")]
    MissingBaseline,
    #[error("row `{0}` appears twice")]
    DuplicateRow(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for MetricsError {
    fn from(e: csv::Error) -> Self {
        MetricsError::Csv(e.to_string())
    }
}

/// `round(100 · covered / total, 2)` with halves rounded up, computed in
/// integers so that the two-decimal result is exact.
pub fn coverage_pct(covered: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let (c, t) = (covered as u128, total as u128);
    let hundredths = (c * 20_000 + t) / (2 * t);
    hundredths as f64 / 100.0
}

/// Short digest identifying a node list.
pub fn universe_digest(nodes: &[NetId]) -> String {
    let mut h = Sha256::new();
    for n in nodes {
        h.update(n.0.to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    /// Assertion name, or member names joined with `+` for a set.
    pub subject: String,
    pub total_nodes: usize,
    pub covered_nodes: usize,
    pub coverage_pct: f64,
    pub covered_set: BTreeSet<NetId>,
    /// Identifies the node list the counts refer to.
    pub universe: String,
}

impl CoverageResult {
    /// Result from bare counts, with an empty covered set.
    pub fn from_counts(subject: &str, covered: usize, total: usize) -> Self {
        assert!(covered <= total, "covered exceeds total");
        CoverageResult {
            subject: subject.to_string(),
            total_nodes: total,
            covered_nodes: covered,
            coverage_pct: coverage_pct(covered, total),
            covered_set: BTreeSet::new(),
            universe: String::new(),
        }
    }

    fn from_set(subject: &str, covered_set: BTreeSet<NetId>, total: usize, universe: String) -> Self {
        CoverageResult {
            subject: subject.to_string(),
            total_nodes: total,
            covered_nodes: covered_set.len(),
            coverage_pct: coverage_pct(covered_set.len(), total),
            covered_set,
            universe,
        }
    }
}

/// Fraction of `nodes` with a `Reachable` verdict. Every other status counts
/// as not covered.
pub fn security_coverage(
    subject: &str,
    verdicts: &BTreeMap<NetId, PathVerdict>,
    nodes: &[NetId],
) -> Result<CoverageResult, MetricsError> {
    let mut covered = BTreeSet::new();
    for &n in nodes {
        let v = verdicts.get(&n).ok_or(MetricsError::MissingVerdict(n.0))?;
        if v.status.is_reachable() {
            covered.insert(n);
        }
    }
    Ok(CoverageResult::from_set(subject, covered, nodes.len(), universe_digest(nodes)))
}

/// Coverage of a covered-set list over an explicit universe, used when
/// coverage comes from precomputed data rather than verdicts.
pub fn coverage_from_set(subject: &str, covered: BTreeSet<NetId>, nodes: &[NetId]) -> CoverageResult {
    let universe = universe_digest(nodes);
    CoverageResult::from_set(subject, covered, nodes.len(), universe)
}

/// Coverage of a set of assertions: the union of their covered sets.
pub fn set_coverage(results: &[CoverageResult]) -> Result<CoverageResult, MetricsError> {
    let first = results.first().ok_or(MetricsError::EmptySet)?;
    if results.iter().any(|r| r.universe != first.universe || r.total_nodes != first.total_nodes) {
        return Err(MetricsError::UniverseMismatch);
    }
    let union: BTreeSet<NetId> = results.iter().flat_map(|r| r.covered_set.iter().copied()).collect();
    let subject = results.iter().map(|r| r.subject.as_str()).collect::<Vec<_>>().join("+");
    Ok(CoverageResult::from_set(&subject, union, first.total_nodes, first.universe.clone()))
}

/// Absolute implementation metrics, for example from a synthesis report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub area: f64,
    pub power: f64,
    /// Critical path delay.
    pub timing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverheadRecord {
    pub name: String,
    pub area_pct: f64,
    pub power_pct: f64,
    pub timing_pct: f64,
    /// Largest of the three, with negative (noise) values counted as zero.
    pub max_overhead_pct: f64,
    /// Whether the numbers come from the internal cost model.
    pub proxy: bool,
}

impl OverheadRecord {
    pub fn new(name: &str, area_pct: f64, power_pct: f64, timing_pct: f64, proxy: bool) -> Self {
        OverheadRecord {
            name: name.to_string(),
            area_pct,
            power_pct,
            timing_pct,
            max_overhead_pct: area_pct.max(power_pct).max(timing_pct).max(0.0),
            proxy,
        }
    }
}

/// Percentage change of each axis against the baseline.
pub fn overhead_from_reports(
    name: &str,
    baseline: &MetricsRecord,
    with: &MetricsRecord,
) -> Result<OverheadRecord, MetricsError> {
    let axes = [("area", baseline.area, with.area), ("power", baseline.power, with.power), ("timing", baseline.timing, with.timing)];
    let mut pct = [0.0; 3];
    for (slot, (axis, b, w)) in pct.iter_mut().zip(axes) {
        if b.is_nan() || b <= 0.0 {
            return Err(MetricsError::NonPositiveBaseline { axis, value: b.to_string() });
        }
        *slot = 100.0 * (w - b) / b;
    }
    Ok(OverheadRecord::new(name, pct[0], pct[1], pct[2], false))
}

#[derive(Debug, Deserialize)]
struct OverheadRow {
    name: String,
    area: f64,
    power: f64,
    timing: f64,
}

/// Reads `name,area,power,timing` rows; one row must be named `BASELINE`.
/// Lines starting with `#` are ignored.
pub fn read_overhead_csv(text: &str) -> Result<Vec<OverheadRecord>, MetricsError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows: BTreeMap<String, MetricsRecord> = BTreeMap::new();
    let mut order = Vec::new();
    for row in rdr.deserialize() {
        let r: OverheadRow = row?;
        if rows.insert(r.name.clone(), MetricsRecord { area: r.area, power: r.power, timing: r.timing }).is_some() {
            return Err(MetricsError::DuplicateRow(r.name));
        }
        order.push(r.name);
    }
    let base = *rows.get("BASELINE").ok_or(MetricsError::MissingBaseline)?;
    order
        .iter()
        .filter(|n| *n != "BASELINE")
        .map(|n| overhead_from_reports(n, &base, &rows[n]))
        .collect()
}

/// Renders coverage rows as `subject,total,covered,pct` after a schema
/// comment line.
pub fn write_coverage_csv(rows: &[CoverageRow]) -> Result<String, MetricsError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["subject", "total", "covered", "pct", "status"])?;
    for r in rows {
        match &r.result {
            Ok(c) => w.write_record([
                &c.subject,
                &c.total_nodes.to_string(),
                &c.covered_nodes.to_string(),
                &format!("{:.2}", c.coverage_pct),
                "ok",
            ])?,
            Err(status) => w.write_record([&r.subject, "", "", "", status])?,
        }
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| MetricsError::Csv(e.to_string()))?)
        .expect("csv output is utf-8");
    Ok(format!("# schema_version: {SCHEMA_VERSION}\n{body}"))
}

/// One line of a coverage table: a result, or the reason there is none.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub subject: String,
    pub result: Result<CoverageResult, String>,
}
