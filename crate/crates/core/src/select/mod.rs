//! Choosing which assertions to keep as security checkers.

mod flow;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{coverage_from_set, CoverageResult, OverheadRecord, SCHEMA_VERSION};
use crate::netlist::NetId;

pub use flow::{evaluate_assertion, run_flow, FlowCandidate, FlowConfig, FlowReport, OverheadSource};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectError {
    #[error("the dynamic strategy needs at least 3 candidates, got {0}; use the fixed strategy instead")]
    TooFewCandidates(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("candidate file: {0}")]
    CandidateFile(String),
    #[error("{candidate}: {msg}")]
    Flow { candidate: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Fixed,
    Dynamic,
}

/// Series the dynamic rule compares against its own moving average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonSeries {
    /// Nodes newly covered by each added candidate.
    MarginalGain,
    /// Nodes covered by the set so far.
    Cumulative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Fixed rule: keep when coverage ≥ `fixed_ratio` × max overhead.
    pub fixed_ratio: f64,
    /// Dynamic rule: drop when max overhead > `overhead_multiplier` × mean.
    pub overhead_multiplier: f64,
    pub ma_period: usize,
    /// User margin checked before any path analysis.
    pub overhead_cap_pct: Option<f64>,
    pub series: ComparisonSeries,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            kind: StrategyKind::Fixed,
            fixed_ratio: 10.0,
            overhead_multiplier: 2.0,
            ma_period: 2,
            overhead_cap_pct: None,
            series: ComparisonSeries::MarginalGain,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<(), SelectError> {
        if self.fixed_ratio.is_nan() || self.fixed_ratio <= 0.0 {
            return Err(SelectError::Config(format!("fixed_ratio must be positive, got {}", self.fixed_ratio)));
        }
        if self.overhead_multiplier.is_nan() || self.overhead_multiplier <= 0.0 {
            return Err(SelectError::Config(format!(
                "overhead_multiplier must be positive, got {}",
                self.overhead_multiplier
            )));
        }
        if self.ma_period == 0 {
            return Err(SelectError::Config("ma_period must be at least 1".into()));
        }
        if let Some(cap) = self.overhead_cap_pct {
            if cap.is_nan() || cap < 0.0 {
                return Err(SelectError::Config(format!("overhead_cap_pct must be non-negative, got {cap}")));
            }
        }
        Ok(())
    }

    pub fn strategy(&self) -> Box<dyn Strategy> {
        match self.kind {
            StrategyKind::Fixed => Box::new(FixedThreshold),
            StrategyKind::Dynamic => Box::new(DynamicThreshold),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub name: String,
    pub overhead: OverheadRecord,
    pub coverage: CoverageResult,
}

/// Why a candidate was left out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    CompileError,
    BindError,
    OverheadUnavailable,
    OverheadCap,
    CoverageBelowThreshold,
    OverheadAboveDynamicCap,
    NoPositiveImpact,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::CompileError => "compile_error",
            Reason::BindError => "bind_error",
            Reason::OverheadUnavailable => "overhead_unavailable",
            Reason::OverheadCap => "overhead_cap",
            Reason::CoverageBelowThreshold => "coverage_below_threshold",
            Reason::OverheadAboveDynamicCap => "overhead_above_dynamic_cap",
            Reason::NoPositiveImpact => "no_positive_impact",
        }
    }
}

/// Both sides of the inequality each rule checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RuleEval {
    Fixed { coverage_pct: f64, required_pct: f64 },
    DynamicOverhead { max_overhead_pct: f64, cap_pct: f64 },
    DynamicImpact { rank: usize, value: u64, window_mean: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEval {
    pub name: String,
    pub max_overhead_pct: f64,
    pub coverage_pct: f64,
    pub covered_nodes: usize,
    pub rules: Vec<RuleEval>,
    pub kept: bool,
    pub reason: Option<Reason>,
}

/// One step of the cumulative set-coverage series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    /// Candidate added at this step.
    pub name: String,
    pub covered: usize,
    pub pct: f64,
    pub gain: usize,
    /// Moving average of the cumulative percentage over `ma_period` steps,
    /// for plotting.
    pub pct_moving_average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub schema_version: u32,
    pub strategy: StrategyConfig,
    /// In input order.
    pub candidates: Vec<CandidateEval>,
    /// Order in which candidates were considered by coverage, if used.
    pub ordering: Vec<String>,
    pub series: Vec<SeriesPoint>,
    pub selected: Vec<String>,
    pub warnings: Vec<String>,
}

impl SelectionReport {
    fn new(cfg: &StrategyConfig, cands: &[Candidate]) -> Self {
        SelectionReport {
            schema_version: SCHEMA_VERSION,
            strategy: *cfg,
            candidates: cands
                .iter()
                .map(|c| CandidateEval {
                    name: c.name.clone(),
                    max_overhead_pct: c.overhead.max_overhead_pct,
                    coverage_pct: c.coverage.coverage_pct,
                    covered_nodes: c.coverage.covered_nodes,
                    rules: Vec::new(),
                    kept: true,
                    reason: None,
                })
                .collect(),
            ordering: Vec::new(),
            series: Vec::new(),
            selected: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn exclude(&mut self, i: usize, reason: Reason) {
        let c = &mut self.candidates[i];
        if c.kept {
            c.kept = false;
            c.reason = Some(reason);
        }
    }

    fn finish(mut self) -> Self {
        self.selected = self.candidates.iter().filter(|c| c.kept).map(|c| c.name.clone()).collect();
        self
    }

    /// Plain-text table of the decisions.
    pub fn table(&self) -> String {
        let w = self.candidates.iter().map(|c| c.name.len()).max().unwrap_or(4).max(9);
        let mut s = format!("{:<w$}  {:>9}  {:>9}  {:>7}  {}\n", "candidate", "max_ovh%", "cov%", "covered", "decision");
        for c in &self.candidates {
            let decision = match c.reason {
                None => "keep".to_string(),
                Some(r) => format!("drop ({})", r.as_str()),
            };
            s += &format!(
                "{:<w$}  {:>9.2}  {:>9.2}  {:>7}  {}\n",
                c.name, c.max_overhead_pct, c.coverage_pct, c.covered_nodes, decision
            );
        }
        s
    }
}

/// Rounds to nine decimals so products such as `10 × 2.99` compare as the
/// decimal values they denote.
fn snap(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

/// A selection rule over precomputed candidate data.
pub trait Strategy {
    fn name(&self) -> &'static str;
    fn select(&self, cands: &[Candidate], cfg: &StrategyConfig) -> Result<SelectionReport, SelectError>;
}

pub struct FixedThreshold;

impl FixedThreshold {
    /// Coverage needed to keep a candidate with this maximum overhead.
    pub fn required_pct(max_overhead_pct: f64, ratio: f64) -> f64 {
        snap(ratio * max_overhead_pct.max(0.0))
    }
}

impl Strategy for FixedThreshold {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn select(&self, cands: &[Candidate], cfg: &StrategyConfig) -> Result<SelectionReport, SelectError> {
        cfg.validate()?;
        let mut r = SelectionReport::new(cfg, cands);
        for (i, c) in cands.iter().enumerate() {
            let required = Self::required_pct(c.overhead.max_overhead_pct, cfg.fixed_ratio);
            let cov = snap(c.coverage.coverage_pct);
            r.candidates[i].rules.push(RuleEval::Fixed { coverage_pct: cov, required_pct: required });
            if cov < required {
                r.exclude(i, Reason::CoverageBelowThreshold);
            }
        }
        Ok(r.finish())
    }
}

pub struct DynamicThreshold;

impl DynamicThreshold {
    /// `multiplier × mean(max overhead)` over all candidates.
    pub fn overhead_cap(max_overheads: &[f64], multiplier: f64) -> f64 {
        let mean = max_overheads.iter().sum::<f64>() / max_overheads.len() as f64;
        snap(multiplier * mean)
    }
}

impl Strategy for DynamicThreshold {
    fn name(&self) -> &'static str {
        "dynamic"
    }

    fn select(&self, cands: &[Candidate], cfg: &StrategyConfig) -> Result<SelectionReport, SelectError> {
        cfg.validate()?;
        if cands.len() < 3 {
            return Err(SelectError::TooFewCandidates(cands.len()));
        }
        let mut r = SelectionReport::new(cfg, cands);

        let ovh: Vec<f64> = cands.iter().map(|c| c.overhead.max_overhead_pct).collect();
        let cap = Self::overhead_cap(&ovh, cfg.overhead_multiplier);
        for (i, &x) in ovh.iter().enumerate() {
            r.candidates[i].rules.push(RuleEval::DynamicOverhead { max_overhead_pct: x, cap_pct: cap });
            if snap(x) > cap {
                r.exclude(i, Reason::OverheadAboveDynamicCap);
            }
        }

        let mut order: Vec<usize> = (0..cands.len()).filter(|&i| r.candidates[i].kept).collect();
        order.sort_by(|&a, &b| {
            cands[b].coverage.covered_nodes.cmp(&cands[a].coverage.covered_nodes).then_with(|| cands[a].name.cmp(&cands[b].name))
        });
        r.ordering = order.iter().map(|&i| cands[i].name.clone()).collect();

        let total = cands[0].coverage.total_nodes;
        let mut union: BTreeSet<NetId> = BTreeSet::new();
        let mut cumulative: Vec<u64> = Vec::new();
        let mut gains: Vec<u64> = Vec::new();
        let mut pcts: Vec<f64> = Vec::new();
        for (rank, &i) in order.iter().enumerate() {
            let before = union.len();
            union.extend(cands[i].coverage.covered_set.iter().copied());
            let gain = (union.len() - before) as u64;
            cumulative.push(union.len() as u64);
            gains.push(gain);
            let pct = crate::metrics::coverage_pct(union.len(), total);
            pcts.push(pct);
            let lo = (rank + 1).saturating_sub(cfg.ma_period);
            let ma = pcts[lo..].iter().sum::<f64>() / (pcts.len() - lo) as f64;
            r.series.push(SeriesPoint {
                name: cands[i].name.clone(),
                covered: union.len(),
                pct,
                gain: gain as usize,
                pct_moving_average: (ma * 100.0).round() / 100.0,
            });

            let series = match cfg.series {
                ComparisonSeries::MarginalGain => &gains,
                ComparisonSeries::Cumulative => &cumulative,
            };
            let value = series[rank];
            if rank == 0 {
                r.candidates[i].rules.push(RuleEval::DynamicImpact { rank: 1, value, window_mean: None });
                continue;
            }
            let window = &series[rank.saturating_sub(cfg.ma_period)..rank];
            let sum: u64 = window.iter().sum();
            r.candidates[i].rules.push(RuleEval::DynamicImpact {
                rank: rank + 1,
                value,
                window_mean: Some(sum as f64 / window.len() as f64),
            });
            // Strictly above the window mean, compared without division.
            if gain == 0 || value * window.len() as u64 <= sum {
                r.exclude(i, Reason::NoPositiveImpact);
            }
        }
        Ok(r.finish())
    }
}

/// Runs the configured strategy; an empty candidate list gives an empty
/// report with a warning.
pub fn select(cands: &[Candidate], cfg: &StrategyConfig) -> Result<SelectionReport, SelectError> {
    cfg.validate()?;
    if cands.is_empty() {
        let mut r = SelectionReport::new(cfg, cands);
        r.warnings.push("no candidates to select from".into());
        return Ok(r);
    }
    cfg.strategy().select(cands, cfg)
}

/// Precomputed candidates: overheads and covered node ranges over a shared
/// universe of `total_nodes` nodes numbered from 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFile {
    pub total_nodes: usize,
    pub candidates: Vec<CandidateEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEntry {
    pub name: String,
    pub area_pct: f64,
    pub power_pct: f64,
    pub timing_pct: f64,
    /// Inclusive-exclusive `[start, end)` node ranges.
    pub covered: Vec<[usize; 2]>,
}

impl CandidateFile {
    pub fn from_json(text: &str) -> Result<Self, SelectError> {
        let f: CandidateFile = serde_json::from_str(text).map_err(|e| SelectError::CandidateFile(e.to_string()))?;
        let mut names = BTreeSet::new();
        for c in &f.candidates {
            if !names.insert(&c.name) {
                return Err(SelectError::CandidateFile(format!("duplicate candidate `{}`", c.name)));
            }
            for &[a, b] in &c.covered {
                if a > b || b > f.total_nodes {
                    return Err(SelectError::CandidateFile(format!("bad range [{a}, {b}) in `{}`", c.name)));
                }
            }
        }
        Ok(f)
    }

    pub fn candidates(&self) -> Vec<Candidate> {
        let nodes: Vec<NetId> = (0..self.total_nodes as u32).map(NetId).collect();
        self.candidates
            .iter()
            .map(|e| {
                let set: BTreeSet<NetId> =
                    e.covered.iter().flat_map(|&[a, b]| (a as u32..b as u32).map(NetId)).collect();
                Candidate {
                    name: e.name.clone(),
                    overhead: OverheadRecord::new(&e.name, e.area_pct, e.power_pct, e.timing_pct, false),
                    coverage: coverage_from_set(&e.name, set, &nodes),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(name: &str, ovh: f64, covered: std::ops::Range<u32>) -> Candidate {
        let nodes: Vec<NetId> = (0..100).map(NetId).collect();
        Candidate {
            name: name.into(),
            overhead: OverheadRecord::new(name, ovh, 0.0, 0.0, false),
            coverage: coverage_from_set(name, covered.map(NetId).collect(), &nodes),
        }
    }

    #[test]
    fn fixed_threshold_arithmetic() {
        assert_eq!(FixedThreshold::required_pct(2.99, 10.0), 29.9);
        assert_eq!(FixedThreshold::required_pct(0.0, 10.0), 0.0);
        assert_eq!(FixedThreshold::required_pct(-1.0, 10.0), 0.0);
        let cfg = StrategyConfig::default();
        let r = select(&[cand("a", 2.99, 0..30), cand("b", 2.99, 0..29), cand("c", 0.0, 0..0)], &cfg).unwrap();
        assert_eq!(r.selected, ["a", "c"]);
        assert_eq!(r.candidates[1].reason, Some(Reason::CoverageBelowThreshold));
    }

    #[test]
    fn dynamic_cap_arithmetic() {
        assert_eq!(DynamicThreshold::overhead_cap(&[1.79; 13], 2.0), 3.58);
    }

    #[test]
    fn dynamic_identical_sets_keep_top_only() {
        let cfg = StrategyConfig { kind: StrategyKind::Dynamic, ..StrategyConfig::default() };
        let cands = vec![cand("a", 1.0, 0..10), cand("b", 1.0, 0..10), cand("c", 1.0, 0..10)];
        let r = select(&cands, &cfg).unwrap();
        assert_eq!(r.selected, ["a"]);
        assert!(r.candidates[1..].iter().all(|c| c.reason == Some(Reason::NoPositiveImpact)));
    }

    #[test]
    fn dynamic_needs_population() {
        let cfg = StrategyConfig { kind: StrategyKind::Dynamic, ..StrategyConfig::default() };
        assert_eq!(select(&[cand("a", 1.0, 0..1)], &cfg), Err(SelectError::TooFewCandidates(1)));
    }

    #[test]
    fn empty_list_warns() {
        let r = select(&[], &StrategyConfig::default()).unwrap();
        assert!(r.selected.is_empty());
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn config_validation() {
        let bad = [
            StrategyConfig { fixed_ratio: 0.0, ..StrategyConfig::default() },
            StrategyConfig { overhead_multiplier: -1.0, ..StrategyConfig::default() },
            StrategyConfig { ma_period: 0, ..StrategyConfig::default() },
            StrategyConfig { overhead_cap_pct: Some(f64::NAN), ..StrategyConfig::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(SelectError::Config(_))));
        }
    }

    #[test]
    fn candidate_file_checks_ranges() {
        let ok = r#"{"total_nodes": 10, "candidates": [{"name": "a", "area_pct": 1, "power_pct": 0, "timing_pct": 0, "covered": [[0, 3], [5, 6]]}]}"#;
        let f = CandidateFile::from_json(ok).unwrap();
        assert_eq!(f.candidates()[0].coverage.covered_nodes, 4);
        let bad = ok.replace("[5, 6]", "[5, 11]");
        assert!(CandidateFile::from_json(&bad).is_err());
    }
}
