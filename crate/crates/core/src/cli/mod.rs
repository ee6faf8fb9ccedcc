//! The `assertsec` command line.

mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{read_overhead_csv, set_coverage, write_coverage_csv, CostModel, CoverageRow, MetricsError, SCHEMA_VERSION};
use crate::monitorgen::{bind, compile_to_monitor, parse_assertion, parse_assertion_file, shapes_of, AssertionFile, MonitorError};
use crate::netlist::{parse_netlist, NetId, Netlist};
use crate::pathcheck::{batch_check, format_pairs, parse_pairs, BoundChoice, CheckOptions, PathStatus, PathVerdict};
use crate::report::{coverage_bars, cumulative_plot, overhead_bars};
use crate::select::{
    evaluate_assertion, run_flow, select, CandidateFile, FlowCandidate, FlowConfig, FlowReport, OverheadSource, Reason,
    SelectError, SelectionReport, StrategyConfig, StrategyKind,
};

pub use output::{sha256_hex, InputFile, Output, RunManifest};

const DEMO_NETLIST: &str = include_str!("../../fixtures/toy_cpu.v");
const DEMO_ASSERTIONS: &str = include_str!("../../fixtures/patterns.assert");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{msg}")]
    Netlist { path: String, msg: String },
    #[error("{path}: {msg}")]
    Input { path: String, msg: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{0}")]
    Usage(String),
    #[error("{failed} of {total} inputs failed")]
    Partial { failed: usize, total: usize },
    #[error("{unknown} of {total} path checks hit the conflict budget ({:.2}% > {:.2}%)", 100.0 * *.unknown as f64 / *.total as f64, 100.0 * .limit)]
    TooManyUnknown { unknown: usize, total: usize, limit: f64 },
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// 1 for bad input, 2 when the solver gave up too often.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::TooManyUnknown { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "assertsec", version, about = "Assertion-based hardware Trojan checkers: monitors, path checks, coverage, selection")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Unrolling bound for path checks: a cycle count or `auto`.
    #[arg(long, global = true)]
    pub bound: Option<String>,
    /// Solver conflicts per check; 0 means unlimited.
    #[arg(long, visible_alias = "budget-conflicts", global = true)]
    pub budget: Option<u64>,
    /// Worker threads for path checks; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Selection strategy: `fixed` or `dynamic`.
    #[arg(long, global = true)]
    pub strategy: Option<String>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "assertsec-out")]
    pub out_dir: PathBuf,
    /// Seed for the cost-model stimulus.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Record wall-clock times in timings.json and the solve_ms columns.
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a netlist, write its node list and print statistics.
    Parse { netlist: PathBuf },
    /// Print the node list of a netlist.
    Nodes { netlist: PathBuf },
    /// Compile assertions into monitor netlists.
    CompileAssertion {
        netlist: PathBuf,
        assertions: PathBuf,
        /// Only these assertions (repeatable).
        #[arg(long)]
        name: Vec<String>,
    },
    /// Bind one monitor to a design and write the origin/destination pairs.
    Bind {
        netlist: PathBuf,
        assertions: PathBuf,
        #[arg(long)]
        name: String,
    },
    /// Check functional paths for a pair list or for every node to one net.
    Reach {
        netlist: PathBuf,
        #[arg(long, conflicts_with = "dest")]
        pairs: Option<PathBuf>,
        #[arg(long)]
        dest: Option<String>,
    },
    /// Security coverage of each assertion.
    Coverage { netlist: PathBuf, assertions: PathBuf },
    /// Apply a selection strategy to precomputed candidates.
    Select { candidates: PathBuf },
    /// Compile, bind, measure, check and select over an assertion file.
    Flow {
        netlist: PathBuf,
        assertions: PathBuf,
        /// `name,area,power,timing` table with a BASELINE row; the internal
        /// cost model is used when absent.
        #[arg(long)]
        overheads: Option<PathBuf>,
    },
    /// Run the processor checks on the bundled Trojan-infected design.
    DemoTrojan {
        #[arg(long, default_value = "tj_pay")]
        payload: String,
    },
}

/// Settings read from `--config`, then overridden by flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub strategy: StrategyConfig,
    pub check: CheckConfig,
    pub cost_model: CostModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    /// Fixed bound; automatic per query when absent.
    pub bound: Option<usize>,
    /// 0 means unlimited.
    pub conflict_budget: u64,
    /// Largest tolerated share of Unknown verdicts before exit code 2.
    pub max_unknown_fraction: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { bound: None, conflict_budget: crate::pathcheck::DEFAULT_CONFLICT_BUDGET, max_unknown_fraction: 0.01 }
    }
}

impl CliConfig {
    pub fn load(g: &GlobalArgs) -> Result<Self, CliError> {
        let mut cfg = match &g.config {
            Some(p) => toml::from_str(&read(p)?).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
            None => CliConfig::default(),
        };
        if let Some(b) = &g.bound {
            cfg.check.bound = match b.as_str() {
                "auto" => None,
                s => match s.parse::<usize>() {
                    Ok(k) if k >= 1 => Some(k),
                    _ => return Err(CliError::Usage(format!("--bound expects a positive integer or `auto`, got `{s}`"))),
                },
            };
        }
        if let Some(b) = g.budget {
            cfg.check.conflict_budget = b;
        }
        if let Some(s) = &g.strategy {
            cfg.strategy.kind = match s.as_str() {
                "fixed" => StrategyKind::Fixed,
                "dynamic" => StrategyKind::Dynamic,
                _ => return Err(CliError::Usage(format!("--strategy expects `fixed` or `dynamic`, got `{s}`"))),
            };
        }
        if let Some(seed) = g.seed {
            cfg.cost_model.seed = seed;
        }
        if cfg.check.bound == Some(0) {
            return Err(CliError::Config("check.bound must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&cfg.check.max_unknown_fraction) {
            return Err(CliError::Config("check.max_unknown_fraction must lie in [0, 1]".into()));
        }
        cfg.strategy.validate()?;
        Ok(cfg)
    }

    fn check_options(&self, jobs: usize) -> CheckOptions {
        CheckOptions {
            bound: self.check.bound.map_or(BoundChoice::Auto, BoundChoice::Fixed),
            conflict_budget: (self.check.conflict_budget > 0).then_some(self.check.conflict_budget),
            jobs,
        }
    }

    fn flow_config(&self, jobs: usize) -> FlowConfig {
        FlowConfig { strategy: self.strategy, check: self.check_options(jobs), cost_model: self.cost_model }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

struct Inputs {
    files: Vec<InputFile>,
}

impl Inputs {
    fn new() -> Self {
        Inputs { files: Vec::new() }
    }

    fn add(&mut self, label: &str, text: &str) {
        self.files.push(InputFile { path: label.to_string(), sha256: sha256_hex(text.as_bytes()) });
    }

    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = read(path)?;
        self.add(&path.display().to_string(), &text);
        Ok(text)
    }

    fn netlist(&mut self, path: &Path) -> Result<Netlist, CliError> {
        let text = self.read(path)?;
        parse_netlist(&text).map_err(|e| CliError::Netlist { path: path.display().to_string(), msg: e.to_string() })
    }

    fn assertions(&mut self, path: &Path) -> Result<AssertionFile, CliError> {
        let text = self.read(path)?;
        parse_assertion_file(&text).map_err(|e| CliError::Input { path: path.display().to_string(), msg: e.to_string() })
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let g = &cli.global;
    let cfg = CliConfig::load(g)?;
    let mut inputs = Inputs::new();
    let manifest = |inputs: Inputs, command: &str| RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        inputs: inputs.files,
        config: cfg.clone(),
    };
    match &cli.command {
        Command::Nodes { netlist } => {
            let n = inputs.netlist(netlist)?;
            for name in n.node_names() {
                println!("{name}");
            }
            Ok(())
        }
        Command::Parse { netlist } => {
            let n = inputs.netlist(netlist)?;
            let out = Output::create(&g.out_dir, &manifest(inputs, "parse"), g.timings)?;
            let mut text = n.node_names().join("\n");
            if !text.is_empty() {
                text.push('\n');
            }
            out.write("nodes.txt", &text)?;
            println!("{}: {}", n.name(), n.stats());
            out.finish()
        }
        Command::CompileAssertion { netlist, assertions, name } => {
            let n = inputs.netlist(netlist)?;
            let file = inputs.assertions(assertions)?;
            let specs = pick(&file, name, assertions)?;
            let out = Output::create(&g.out_dir, &manifest(inputs, "compile-assertion"), g.timings)?;
            let shapes = shapes_of(&n);
            let mut failed = 0;
            let mut report = Vec::new();
            for spec in &specs {
                match parse_assertion(spec, &file.constants).and_then(|ast| compile_to_monitor(&spec.name, &ast, &shapes)) {
                    Ok(m) => {
                        out.write_verilog(&format!("monitors/{}.v", spec.name), &m.fragment.to_text())?;
                        let (cells, regs) = (m.fragment.cells().len(), m.fragment.dffs().len());
                        println!("{}: {cells} cells, {regs} registers", spec.name);
                        report.push(serde_json::json!({ "name": spec.name, "cells": cells, "registers": regs, "error": null }));
                    }
                    Err(e) => {
                        failed += 1;
                        eprintln!("{}: {e}", spec.name);
                        report.push(serde_json::json!({ "name": spec.name, "cells": null, "registers": null, "error": e.to_string() }));
                    }
                }
            }
            out.write_json("monitors.json", &serde_json::json!({ "monitors": report }))?;
            out.finish()?;
            partial(failed, specs.len())
        }
        Command::Bind { netlist, assertions, name } => {
            let n = inputs.netlist(netlist)?;
            let file = inputs.assertions(assertions)?;
            let spec = pick(&file, std::slice::from_ref(name), assertions)?.remove(0);
            let input_err = |e: MonitorError| CliError::Input { path: assertions.display().to_string(), msg: e.to_string() };
            let ast = parse_assertion(&spec, &file.constants).map_err(input_err)?;
            let m = compile_to_monitor(&spec.name, &ast, &shapes_of(&n)).map_err(input_err)?;
            let bound = bind(&n, &m).map_err(input_err)?;
            let fail = bound.find_net(&format!("{}.fail", spec.name)).expect("bound monitor output");
            let out = Output::create(&g.out_dir, &manifest(inputs, "bind"), g.timings)?;
            out.write_verilog(&format!("{}.bound.v", spec.name), &bound.to_text())?;
            out.write(&format!("{}.pairs", spec.name), &format!("# manifest_sha256: {}\n{}", out.hash(), format_pairs(&bound, fail)))?;
            println!("{}: {} pairs to {}", spec.name, bound.list_nodes().len(), bound.net_name(fail));
            out.finish()
        }
        Command::Reach { netlist, pairs, dest } => {
            let n = inputs.netlist(netlist)?;
            let queries: Vec<(NetId, NetId)> = match (pairs, dest) {
                (Some(p), _) => {
                    let text = inputs.read(p)?;
                    parse_pairs(&n, &text).map_err(|msg| CliError::Input { path: p.display().to_string(), msg })?
                }
                (None, Some(d)) => {
                    let d = n.find_net(d).ok_or_else(|| CliError::Usage(format!("unknown net `{d}`")))?;
                    n.list_nodes().into_iter().map(|o| (o, d)).collect()
                }
                (None, None) => return Err(CliError::Usage("reach needs --pairs or --dest".into())),
            };
            let mut out = Output::create(&g.out_dir, &manifest(inputs, "reach"), g.timings)?;
            out.stage("read");
            let mut by_dest: BTreeMap<NetId, Vec<NetId>> = BTreeMap::new();
            for &(o, d) in &queries {
                if !n.is_design_net(o) {
                    return Err(CliError::Usage(format!("origin `{}` is not a design node", n.net_name(o))));
                }
                by_dest.entry(d).or_default().push(o);
            }
            let opts = cfg.check_options(g.jobs);
            let mut results: BTreeMap<NetId, BTreeMap<NetId, PathVerdict>> = BTreeMap::new();
            for (d, origins) in &by_dest {
                let v = batch_check(&n, *d, origins, &opts).map_err(|e| CliError::Usage(e.to_string()))?;
                results.insert(*d, v);
            }
            out.stage("check");
            let rows: Vec<(String, String, &PathVerdict)> = queries
                .iter()
                .map(|&(o, d)| (n.net_name(o).to_string(), n.net_name(d).to_string(), &results[&d][&o]))
                .collect();
            out.write_csv("reach.csv", &verdict_csv("destination", &rows, out.timing_enabled()))?;
            out.write_json("witnesses.json", &witnesses(&rows))?;
            let reachable = rows.iter().filter(|r| r.2.status.is_reachable()).count();
            println!("{reachable} of {} pairs reachable", rows.len());
            out.finish()?;
            unknown_limit(rows.iter().map(|r| r.2), cfg.check.max_unknown_fraction)
        }
        Command::Coverage { netlist, assertions } => {
            let n = inputs.netlist(netlist)?;
            let file = inputs.assertions(assertions)?;
            let mut out = Output::create(&g.out_dir, &manifest(inputs, "coverage"), g.timings)?;
            out.stage("read");
            let flow_cfg = FlowConfig { strategy: StrategyConfig { overhead_cap_pct: None, ..cfg.strategy }, ..cfg.flow_config(g.jobs) };
            let evaluated: Vec<FlowCandidate> = file
                .assertions
                .iter()
                .map(|a| evaluate_assertion(&n, a, &file.constants, &OverheadSource::Model, &flow_cfg))
                .collect::<Result<_, _>>()?;
            out.stage("check");
            write_coverage_reports(&out, &n, &evaluated)?;
            print!("{}", coverage_table(&evaluated));
            out.finish()?;
            unknown_limit(evaluated.iter().flat_map(|c| c.per_node.values()), cfg.check.max_unknown_fraction)
        }
        Command::Select { candidates } => {
            let text = inputs.read(candidates)?;
            let file = CandidateFile::from_json(&text)?;
            let out = Output::create(&g.out_dir, &manifest(inputs, "select"), g.timings)?;
            let cands = file.candidates();
            let report = select(&cands, &cfg.strategy)?;
            let overheads: Vec<_> = cands.iter().map(|c| c.overhead.clone()).collect();
            let covered: Vec<_> = cands.iter().map(|c| (c.name.clone(), c.coverage.covered_nodes)).collect();
            write_selection(&out, &report, &overheads, &covered, file.total_nodes)?;
            print!("{}", report.table());
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            out.finish()
        }
        Command::Flow { netlist, assertions, overheads } => {
            let n = inputs.netlist(netlist)?;
            let file = inputs.assertions(assertions)?;
            let source = match overheads {
                Some(p) => {
                    let text = inputs.read(p)?;
                    let recs = read_overhead_csv(&text).map_err(|e| CliError::Input { path: p.display().to_string(), msg: e.to_string() })?;
                    OverheadSource::Table(recs.into_iter().map(|r| (r.name.clone(), r)).collect())
                }
                None => OverheadSource::Model,
            };
            let out = Output::create(&g.out_dir, &manifest(inputs, "flow"), g.timings)?;
            let report = flow(out, &n, &file, &source, &cfg, g.jobs)?;
            unknown_limit(report.candidates.iter().flat_map(|c| c.per_node.values()), cfg.check.max_unknown_fraction)
        }
        Command::DemoTrojan { payload } => {
            let n = parse_netlist(DEMO_NETLIST).expect("bundled netlist parses");
            let mut file = parse_assertion_file(DEMO_ASSERTIONS).expect("bundled assertions parse");
            file.assertions.retain(|a| a.name.starts_with("asr_"));
            inputs.add("<bundled>/toy_cpu.v", DEMO_NETLIST);
            inputs.add("<bundled>/patterns.assert", DEMO_ASSERTIONS);
            let pay = n.find_net(payload).ok_or_else(|| CliError::Usage(format!("no net `{payload}` in the bundled design")))?;
            let out = Output::create(&g.out_dir, &manifest(inputs, "demo-trojan"), g.timings)?;
            let hash = out.hash().to_string();
            let report = flow(out, &n, &file, &OverheadSource::Model, &cfg, g.jobs)?;
            let mut lines = vec![format!("# manifest_sha256: {hash}"), format!("payload {payload} in {}", n.name())];
            let mut detected = false;
            for c in &report.candidates {
                let line = match c.per_node.get(&pay) {
                    Some(v) => {
                        detected |= v.status.is_reachable();
                        match &v.status {
                            PathStatus::Reachable { witness } => format!(
                                "{}: reachable at bound {} (flip at cycle {}, fail differs at cycle {})",
                                c.name, v.bound, witness.flip_cycle, witness.divergence_cycle
                            ),
                            s => format!("{}: {} at bound {}", c.name, s.label(), v.bound),
                        }
                    }
                    None => format!("{}: not checked ({})", c.name, c.error.as_deref().unwrap_or("excluded")),
                };
                lines.push(line);
            }
            lines.push(if detected { "payload covered".into() } else { "payload not covered".into() });
            let text = lines.join("\n") + "\n";
            std::fs::write(g.out_dir.join("demo.txt"), &text).map_err(|e| CliError::io(&g.out_dir.join("demo.txt"), e))?;
            print!("{}", &text[text.find('\n').map_or(0, |i| i + 1)..]);
            unknown_limit(report.candidates.iter().flat_map(|c| c.per_node.values()), cfg.check.max_unknown_fraction)
        }
    }
}

fn pick(file: &AssertionFile, names: &[String], path: &Path) -> Result<Vec<crate::monitorgen::AssertionSpec>, CliError> {
    if names.is_empty() {
        return Ok(file.assertions.clone());
    }
    names
        .iter()
        .map(|name| {
            file.assertions.iter().find(|a| &a.name == name).cloned().ok_or_else(|| CliError::Input {
                path: path.display().to_string(),
                msg: format!("no assertion named `{name}`"),
            })
        })
        .collect()
}

fn partial(failed: usize, total: usize) -> Result<(), CliError> {
    if failed > 0 {
        Err(CliError::Partial { failed, total })
    } else {
        Ok(())
    }
}

fn unknown_limit<'a>(verdicts: impl Iterator<Item = &'a PathVerdict>, limit: f64) -> Result<(), CliError> {
    let (mut unknown, mut total) = (0, 0);
    for v in verdicts {
        total += 1;
        unknown += usize::from(v.status.is_unknown());
    }
    if total > 0 && unknown as f64 > limit * total as f64 {
        return Err(CliError::TooManyUnknown { unknown, total, limit });
    }
    Ok(())
}

fn solve_ms(v: &PathVerdict, timings: bool) -> String {
    if timings {
        format!("{:.3}", v.stats.elapsed.as_secs_f64() * 1e3)
    } else {
        "0".into()
    }
}

/// `origin,<key>,status,bound,solve_ms` rows, where `key` is the
/// destination or the assertion name.
fn verdict_csv(key: &str, rows: &[(String, String, &PathVerdict)], timings: bool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = ["origin", key, "status", "bound", "solve_ms"];
    w.write_record(header).expect("in-memory write");
    for (origin, k, v) in rows {
        w.write_record([origin.as_str(), k.as_str(), v.status.label(), &v.bound.to_string(), &solve_ms(v, timings)])
            .expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
    format!("# schema_version: {SCHEMA_VERSION}\n{body}")
}

#[derive(Serialize)]
struct WitnessEntry<'a> {
    origin: &'a str,
    destination: &'a str,
    flip_cycle: usize,
    divergence_cycle: usize,
    stimulus: &'a [BTreeMap<String, bool>],
}

#[derive(Serialize)]
struct Witnesses<'a> {
    witnesses: Vec<WitnessEntry<'a>>,
}

fn witnesses<'a>(rows: &'a [(String, String, &'a PathVerdict)]) -> Witnesses<'a> {
    Witnesses {
        witnesses: rows
            .iter()
            .filter_map(|(o, d, v)| match &v.status {
                PathStatus::Reachable { witness } => Some(WitnessEntry {
                    origin: o,
                    destination: d,
                    flip_cycle: witness.flip_cycle,
                    divergence_cycle: witness.divergence_cycle,
                    stimulus: &witness.stimulus,
                }),
                _ => None,
            })
            .collect(),
    }
}

fn coverage_rows(evaluated: &[FlowCandidate]) -> Vec<CoverageRow> {
    let mut rows: Vec<CoverageRow> = evaluated
        .iter()
        .map(|c| CoverageRow {
            subject: c.name.clone(),
            result: match &c.coverage {
                Some(cov) => Ok(cov.clone()),
                None => Err(c.reason.map_or("error", Reason::as_str).to_string()),
            },
        })
        .collect();
    let ok: Vec<_> = evaluated.iter().filter_map(|c| c.coverage.clone()).collect();
    if ok.len() > 1 {
        if let Ok(all) = set_coverage(&ok) {
            rows.push(CoverageRow { subject: all.subject.clone(), result: Ok(all) });
        }
    }
    rows
}

fn write_coverage_reports(out: &Output, n: &Netlist, evaluated: &[FlowCandidate]) -> Result<(), CliError> {
    out.write_csv("coverage.csv", &write_coverage_csv(&coverage_rows(evaluated))?)?;
    let rows: Vec<(String, String, &PathVerdict)> = evaluated
        .iter()
        .flat_map(|c| c.per_node.iter().map(move |(o, v)| (n.net_name(*o).to_string(), c.name.clone(), v)))
        .collect();
    out.write_csv("verdicts.csv", &verdict_csv("assertion", &rows, out.timing_enabled()))?;
    Ok(())
}

fn coverage_table(evaluated: &[FlowCandidate]) -> String {
    let mut s = String::new();
    for c in evaluated {
        match &c.coverage {
            Some(cov) => {
                s += &format!("{}: {}/{} nodes, {:.2}%\n", c.name, cov.covered_nodes, cov.total_nodes, cov.coverage_pct)
            }
            None => s += &format!("{}: {} ({})\n", c.name, c.reason.map_or("error", Reason::as_str), c.error.as_deref().unwrap_or("")),
        }
    }
    s
}

fn write_selection(
    out: &Output,
    report: &SelectionReport,
    overheads: &[crate::metrics::OverheadRecord],
    covered: &[(String, usize)],
    total_nodes: usize,
) -> Result<(), CliError> {
    out.write_json("selection.json", report)?;
    out.write("selection.txt", &format!("# manifest_sha256: {}\n{}", out.hash(), report.table()))?;
    out.write_svg("overhead.svg", &overhead_bars(overheads))?;
    out.write_svg("coverage.svg", &coverage_bars(covered, total_nodes))?;
    out.write_svg("cumulative.svg", &cumulative_plot(&report.series, &report.selected, report.strategy.ma_period))?;
    Ok(())
}

fn flow(
    mut out: Output,
    n: &Netlist,
    file: &AssertionFile,
    source: &OverheadSource,
    cfg: &CliConfig,
    jobs: usize,
) -> Result<FlowReport, CliError> {
    out.stage("read");
    let report = run_flow(n, file, source, &cfg.flow_config(jobs))?;
    out.stage("flow");
    out.write_json("flow.json", &report)?;
    write_coverage_reports(&out, n, &report.candidates)?;
    let overheads: Vec<_> = report.candidates.iter().filter_map(|c| c.overhead.clone()).collect();
    let covered: Vec<_> =
        report.candidates.iter().filter_map(|c| c.coverage.as_ref().map(|cov| (c.name.clone(), cov.covered_nodes))).collect();
    write_selection(&out, &report.selection, &overheads, &covered, report.total_nodes)?;
    print!("{}", report.selection.table());
    for w in &report.selection.warnings {
        eprintln!("warning: {w}");
    }
    out.finish()?;
    Ok(report)
}
