//! The candidate loop: compile, bind, measure, check, decide.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{select, Candidate, CandidateEval, Reason, SelectError, SelectionReport, StrategyConfig};
use crate::metrics::{model_overhead, security_coverage, CostModel, CoverageResult, OverheadRecord, SCHEMA_VERSION};
use crate::monitorgen::{bind, compile_to_monitor, parse_assertion, shapes_of, AssertionFile, AssertionSpec, Constants};
use crate::netlist::{NetId, Netlist};
use crate::pathcheck::{batch_check, CheckOptions, PathStatus, PathVerdict};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    pub strategy: StrategyConfig,
    pub check: CheckOptions,
    pub cost_model: CostModel,
}

/// Where overhead numbers come from.
#[derive(Debug, Clone, PartialEq)]
pub enum OverheadSource {
    /// The structural proxy in [`crate::metrics::CostModel`].
    Model,
    /// Precomputed records keyed by assertion name, for example from
    /// synthesis reports.
    Table(BTreeMap<String, OverheadRecord>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub reachable: usize,
    pub unreachable_structural: usize,
    pub unreachable_at_bound: usize,
    pub unknown: usize,
}

/// Everything recorded about one assertion on its way through the flow.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowCandidate {
    pub name: String,
    pub monitor_cells: Option<usize>,
    pub monitor_registers: Option<usize>,
    pub overhead: Option<OverheadRecord>,
    pub coverage: Option<CoverageResult>,
    pub verdicts: VerdictCounts,
    /// Set when the candidate left the flow before the strategy ran.
    pub reason: Option<Reason>,
    pub error: Option<String>,
    #[serde(skip)]
    pub per_node: BTreeMap<NetId, PathVerdict>,
    /// Net id of the monitor output in the bound design.
    #[serde(skip)]
    pub fail_net: Option<NetId>,
}

impl FlowCandidate {
    fn stop(mut self, reason: Reason, error: impl ToString) -> Self {
        self.reason = Some(reason);
        self.error = Some(error.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowReport {
    pub schema_version: u32,
    pub design: String,
    pub total_nodes: usize,
    pub candidates: Vec<FlowCandidate>,
    pub selection: SelectionReport,
}

/// Runs one assertion through compile, bind, overhead, the optional overhead
/// cap, path checks against every design node, and coverage.
pub fn evaluate_assertion(
    design: &Netlist,
    spec: &AssertionSpec,
    constants: &Constants,
    overheads: &OverheadSource,
    cfg: &FlowConfig,
) -> Result<FlowCandidate, SelectError> {
    let mut c = FlowCandidate {
        name: spec.name.clone(),
        monitor_cells: None,
        monitor_registers: None,
        overhead: None,
        coverage: None,
        verdicts: VerdictCounts::default(),
        reason: None,
        error: None,
        per_node: BTreeMap::new(),
        fail_net: None,
    };
    let monitor = match parse_assertion(spec, constants).and_then(|ast| compile_to_monitor(&spec.name, &ast, &shapes_of(design))) {
        Ok(m) => m,
        Err(e) => return Ok(c.stop(Reason::CompileError, e)),
    };
    c.monitor_cells = Some(monitor.fragment.cells().len());
    c.monitor_registers = Some(monitor.fragment.dffs().len());
    let bound = match bind(design, &monitor) {
        Ok(b) => b,
        Err(e) => return Ok(c.stop(Reason::BindError, e)),
    };
    let overhead = match overheads {
        OverheadSource::Model => model_overhead(&spec.name, design, &bound, &cfg.cost_model)
            .map_err(|e| SelectError::Flow { candidate: spec.name.clone(), msg: e.to_string() })?,
        OverheadSource::Table(t) => match t.get(&spec.name) {
            Some(r) => r.clone(),
            None => return Ok(c.stop(Reason::OverheadUnavailable, "no overhead record")),
        },
    };
    c.overhead = Some(overhead.clone());
    if let Some(cap) = cfg.strategy.overhead_cap_pct {
        if overhead.max_overhead_pct > cap {
            return Ok(c.stop(
                Reason::OverheadCap,
                format!("max overhead {:.2}% exceeds cap {cap:.2}%", overhead.max_overhead_pct),
            ));
        }
    }
    let fail = bound.find_net(&format!("{}.fail", spec.name)).expect("bound monitor has a fail output");
    let nodes = bound.list_nodes();
    let verdicts = batch_check(&bound, fail, &nodes, &cfg.check)
        .map_err(|e| SelectError::Flow { candidate: spec.name.clone(), msg: e.to_string() })?;
    for v in verdicts.values() {
        match v.status {
            PathStatus::Reachable { .. } => c.verdicts.reachable += 1,
            PathStatus::UnreachableStructural => c.verdicts.unreachable_structural += 1,
            PathStatus::UnreachableAtBound { .. } => c.verdicts.unreachable_at_bound += 1,
            PathStatus::Unknown { .. } => c.verdicts.unknown += 1,
        }
    }
    c.coverage = Some(
        security_coverage(&spec.name, &verdicts, &nodes)
            .map_err(|e| SelectError::Flow { candidate: spec.name.clone(), msg: e.to_string() })?,
    );
    c.per_node = verdicts;
    c.fail_net = Some(fail);
    Ok(c)
}

/// The whole selection flow over an assertion file.
///
/// Candidates that stop early (compile or bind failure, missing overhead,
/// overhead cap) are listed with their reason and never path-checked; the
/// strategy sees only the rest. The report lists candidates in file order.
pub fn run_flow(
    design: &Netlist,
    file: &AssertionFile,
    overheads: &OverheadSource,
    cfg: &FlowConfig,
) -> Result<FlowReport, SelectError> {
    cfg.strategy.validate()?;
    let evaluated: Vec<FlowCandidate> = file
        .assertions
        .iter()
        .map(|a| evaluate_assertion(design, a, &file.constants, overheads, cfg))
        .collect::<Result<_, _>>()?;

    let survivors: Vec<Candidate> = evaluated
        .iter()
        .filter(|c| c.reason.is_none())
        .map(|c| Candidate {
            name: c.name.clone(),
            overhead: c.overhead.clone().expect("survivors have overheads"),
            coverage: c.coverage.clone().expect("survivors have coverage"),
        })
        .collect();
    let decided = select(&survivors, &cfg.strategy)?;

    let mut by_name: BTreeMap<&str, &CandidateEval> = decided.candidates.iter().map(|e| (e.name.as_str(), e)).collect();
    let candidates = evaluated
        .iter()
        .map(|c| match by_name.remove(c.name.as_str()) {
            Some(e) => e.clone(),
            None => CandidateEval {
                name: c.name.clone(),
                max_overhead_pct: c.overhead.as_ref().map_or(0.0, |o| o.max_overhead_pct),
                coverage_pct: 0.0,
                covered_nodes: 0,
                rules: Vec::new(),
                kept: false,
                reason: c.reason,
            },
        })
        .collect();
    let selection = SelectionReport { candidates, ..decided };
    Ok(FlowReport {
        schema_version: SCHEMA_VERSION,
        design: design.name().to_string(),
        total_nodes: design.list_nodes().len(),
        candidates: evaluated,
        selection,
    })
}
