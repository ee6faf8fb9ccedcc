//! Functional-path checks from design nodes to monitor outputs.
//!
//! A functional path from `origin` to `destination` exists within bound `k`
//! when some input stimulus of length `k`, applied from the power-up state,
//! together with a cycle `t` at which `origin` is forced to the complement of
//! its driven value, makes `destination` differ from the fault-free run at
//! some cycle in `t..k`. [`sensitize`] decides this with a two-copy miter over
//! the unrolled circuit; [`brute_force_reach`] decides the same question by
//! explicit enumeration for small instances.

mod encode;
mod oracle;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{Driver, Flip, NetId, Netlist};
use crate::sat::SatResult;
use encode::{Encoder, Shadow, Sig};

pub use oracle::{brute_force_reach, OracleLimits, ORACLE_LIMITS};

/// Upper limit for automatically chosen bounds.
pub const MAX_AUTO_BOUND: usize = 16;

/// Default conflict budget per solver call.
pub const DEFAULT_CONFLICT_BUDGET: u64 = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("net id {0} does not exist")]
    UnknownNet(u32),
    #[error("bound must be at least 1")]
    ZeroBound,
    #[error("origin `{0}` is not a design net")]
    NotDesignNet(String),
    #[error("instance too large for exhaustive enumeration: {0}")]
    TooLarge(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// One `{origin, destination}` pair checked within `bound` cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathQuery {
    pub origin: NetId,
    pub destination: NetId,
    pub bound: usize,
}

impl PathQuery {
    /// Validated query. The destination may be any net; callers that follow
    /// the coverage flow pass a monitor `fail` output.
    pub fn new(n: &Netlist, origin: NetId, destination: NetId, bound: usize) -> Result<Self, PathError> {
        for id in [origin, destination] {
            if id.index() >= n.nets().len() {
                return Err(PathError::UnknownNet(id.0));
            }
        }
        if bound == 0 {
            return Err(PathError::ZeroBound);
        }
        if !n.is_design_net(origin) {
            return Err(PathError::NotDesignNet(n.net_name(origin).to_string()));
        }
        Ok(PathQuery { origin, destination, bound })
    }
}

/// Input stimulus and flip cycle demonstrating a functional path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// One map of stimulus inputs per cycle.
    pub stimulus: Vec<BTreeMap<String, bool>>,
    pub flip_cycle: usize,
    /// First cycle at which the destination differs.
    pub divergence_cycle: usize,
}

impl Witness {
    /// Re-simulates fault-free and flipped runs and checks that the
    /// destination differs at the claimed cycle.
    pub fn replay(&self, n: &Netlist, q: &PathQuery) -> bool {
        let good = match n.simulate(&self.stimulus) {
            Ok(t) => t,
            Err(_) => return false,
        };
        let flip = Flip { net: q.origin, cycle: self.flip_cycle };
        let bad = match n.simulate_with_flip(&self.stimulus, Some(flip)) {
            Ok(t) => t,
            Err(_) => return false,
        };
        self.divergence_cycle < good.len()
            && self.flip_cycle <= self.divergence_cycle
            && good.value(self.divergence_cycle, q.destination) != bad.value(self.divergence_cycle, q.destination)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PathStatus {
    Reachable { witness: Witness },
    UnreachableStructural,
    UnreachableAtBound { bound: usize },
    Unknown { reason: String },
}

impl PathStatus {
    pub fn label(&self) -> &'static str {
        match self {
            PathStatus::Reachable { .. } => "reachable",
            PathStatus::UnreachableStructural => "unreachable_structural",
            PathStatus::UnreachableAtBound { .. } => "unreachable_at_bound",
            PathStatus::Unknown { .. } => "unknown",
        }
    }

    pub fn is_reachable(&self) -> bool {
        matches!(self, PathStatus::Reachable { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, PathStatus::Unknown { .. })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStats {
    pub sat_calls: u32,
    pub vars: usize,
    pub clauses: usize,
    pub conflicts: u64,
    /// Wall-clock time; excluded from equality-sensitive outputs.
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathVerdict {
    pub status: PathStatus,
    /// Bound actually used.
    pub bound: usize,
    pub stats: PathStats,
}

impl PartialEq for PathVerdict {
    /// Compares everything except timing.
    fn eq(&self, other: &Self) -> bool {
        let strip = |s: PathStats| PathStats { elapsed: Duration::ZERO, ..s };
        self.status == other.status && self.bound == other.bound && strip(self.stats) == strip(other.stats)
    }
}

/// How the unrolling depth is chosen per query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundChoice {
    /// Minimum register count on a structural path from origin to
    /// destination, plus one for the flip cycle, plus the register depth of
    /// the monitor logic in front of the destination (at least one), capped
    /// at [`MAX_AUTO_BOUND`]. Without a structural path the bound is 1.
    Auto,
    Fixed(usize),
}

impl BoundChoice {
    pub fn resolve(self, n: &Netlist, origin: NetId, destination: NetId) -> usize {
        match self {
            BoundChoice::Fixed(k) => k,
            BoundChoice::Auto => n
                .sequential_distance(origin, destination)
                .map_or(1, |d| (d + 1 + history_depth(n, destination).max(1)).min(MAX_AUTO_BOUND)),
        }
    }
}

/// Longest register chain through monitor-origin logic ending at `net`.
pub fn history_depth(n: &Netlist, net: NetId) -> usize {
    fn walk(n: &Netlist, net: NetId, memo: &mut BTreeMap<NetId, usize>, depth: usize) -> usize {
        if n.is_design_net(net) || depth > MAX_AUTO_BOUND * 64 {
            return 0;
        }
        if let Some(&d) = memo.get(&net) {
            return d;
        }
        let d = match n.driver(net) {
            Driver::Input => 0,
            Driver::Cell(c) => {
                let cell = n.cell(c);
                if cell.kind.is_sequential() {
                    1 + walk(n, cell.inputs[0], memo, depth + 1)
                } else {
                    cell.inputs.iter().map(|&i| walk(n, i, memo, depth + 1)).max().unwrap_or(0)
                }
            }
        };
        memo.insert(net, d);
        d
    }
    walk(n, net, &mut BTreeMap::new(), 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub bound: BoundChoice,
    /// Conflicts allowed per solver call; `None` is unlimited.
    pub conflict_budget: Option<u64>,
    /// Worker threads for [`batch_check`]; 0 uses the rayon default.
    pub jobs: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { bound: BoundChoice::Auto, conflict_budget: Some(DEFAULT_CONFLICT_BUDGET), jobs: 0 }
    }
}

/// Directed structural path test (registers are ordinary edges).
pub fn structural_reach(n: &Netlist, origin: NetId, destination: NetId) -> Result<bool, PathError> {
    for id in [origin, destination] {
        if id.index() >= n.nets().len() {
            return Err(PathError::UnknownNet(id.0));
        }
    }
    Ok(n.structural_reach(origin, destination))
}

/// Decides a functional path by SAT-based flip-fault sensitization.
///
/// Structurally unreachable pairs return without invoking the solver. For
/// each flip cycle `t` the good copy is unrolled for `bound` cycles, a faulty
/// copy shares all logic outside the disturbed cone, and a miter over the
/// destination values in `t..bound` is handed to the solver.
pub fn sensitize(n: &Netlist, q: &PathQuery, conflict_budget: Option<u64>) -> PathVerdict {
    if !n.structural_reach(q.origin, q.destination) {
        return PathVerdict { status: PathStatus::UnreachableStructural, bound: q.bound, stats: PathStats::default() };
    }
    sensitize_reachable(n, q, conflict_budget)
}

fn sensitize_reachable(n: &Netlist, q: &PathQuery, conflict_budget: Option<u64>) -> PathVerdict {
    let start = Instant::now();
    let k = q.bound;
    let mut stats = PathStats::default();
    let mut unknown = false;
    for t in 0..k {
        let mut enc = Encoder::new();
        let inputs: Vec<Vec<Sig>> =
            (0..k).map(|_| n.stimulus_inputs().iter().map(|_| enc.fresh()).collect()).collect();

        let mut good_vals = Vec::with_capacity(k);
        let mut good_state = vec![n.initial_state().into_iter().map(Sig::Const).collect::<Vec<_>>()];
        for inp in &inputs {
            let vals = enc.cycle(n, good_state.last().unwrap(), inp, None, None);
            let next = enc.next_state(n, &vals, None);
            good_vals.push(vals);
            good_state.push(next);
        }

        let mut diffs: Vec<(usize, Sig)> = Vec::new();
        let mut state = good_state[t].clone();
        for c in t..k {
            let shadow = Shadow { vals: &good_vals[c], stored: &good_state[c] };
            let flip = (c == t).then_some(q.origin);
            let vals = enc.cycle(n, &state, &inputs[c], flip, Some(shadow));
            let good_d = good_vals[c][q.destination.index()];
            let bad_d = vals[q.destination.index()];
            if good_d != bad_d {
                let d = enc.xor(good_d, bad_d);
                if d != Sig::Const(false) {
                    diffs.push((c, d));
                }
            }
            let next_shadow = Shadow { vals: &good_vals[c], stored: &good_state[c + 1] };
            state = enc.next_state(n, &vals, Some(next_shadow));
        }
        if diffs.is_empty() {
            continue;
        }
        let clause: Vec<_> = diffs
            .iter()
            .filter_map(|&(_, d)| match d {
                Sig::Lit(l) => Some(l),
                Sig::Const(_) => None,
            })
            .collect();
        let trivially = diffs.iter().any(|&(_, d)| d == Sig::Const(true));
        if !trivially {
            enc.solver.add_clause(&clause);
        }
        let result = enc.solver.solve(conflict_budget);
        let s = enc.solver.stats();
        stats.sat_calls += 1;
        stats.vars += s.vars;
        stats.clauses += s.clauses;
        stats.conflicts += s.conflicts;
        match result {
            SatResult::Sat(model) => {
                let vectors: Vec<Vec<bool>> =
                    inputs.iter().map(|cyc| cyc.iter().map(|s| s.eval(&model)).collect()).collect();
                let divergence = diffs.iter().find(|(_, d)| d.eval(&model)).map(|&(c, _)| c).expect("miter holds");
                stats.elapsed = start.elapsed();
                return PathVerdict {
                    status: PathStatus::Reachable {
                        witness: Witness {
                            stimulus: n.named_from_vectors(&vectors),
                            flip_cycle: t,
                            divergence_cycle: divergence,
                        },
                    },
                    bound: k,
                    stats,
                };
            }
            SatResult::Unsat => {}
            SatResult::Unknown => unknown = true,
        }
    }
    stats.elapsed = start.elapsed();
    let status = if unknown {
        PathStatus::Unknown { reason: format!("conflict budget of {} exhausted", conflict_budget.unwrap_or(0)) }
    } else {
        PathStatus::UnreachableAtBound { bound: k }
    };
    PathVerdict { status, bound: k, stats }
}

/// Checks every origin against one destination.
///
/// Queries run on a worker pool; the result map is keyed by net id and does
/// not depend on scheduling. Resource exhaustion shows up as
/// [`PathStatus::Unknown`] for that origin only.
pub fn batch_check(
    n: &Netlist,
    destination: NetId,
    origins: &[NetId],
    opts: &CheckOptions,
) -> Result<BTreeMap<NetId, PathVerdict>, PathError> {
    if destination.index() >= n.nets().len() {
        return Err(PathError::UnknownNet(destination.0));
    }
    for &o in origins {
        if o.index() >= n.nets().len() {
            return Err(PathError::UnknownNet(o.0));
        }
        if let BoundChoice::Fixed(0) = opts.bound {
            return Err(PathError::ZeroBound);
        }
    }
    let cone = n.fanin_cone(destination);
    let run = |o: NetId| -> (NetId, PathVerdict) {
        let bound = opts.bound.resolve(n, o, destination);
        let q = PathQuery { origin: o, destination, bound };
        let verdict = if cone[o.index()] {
            sensitize_reachable(n, &q, opts.conflict_budget)
        } else {
            PathVerdict { status: PathStatus::UnreachableStructural, bound, stats: PathStats::default() }
        };
        (o, verdict)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| PathError::Pool(e.to_string()))?;
    let results: Vec<(NetId, PathVerdict)> = pool.install(|| origins.par_iter().map(|&o| run(o)).collect());
    Ok(results.into_iter().collect())
}

/// Reads a pair list: one `origin destination` pair of net names per line.
/// Blank lines and `#` comments are skipped.
pub fn parse_pairs(n: &Netlist, text: &str) -> Result<Vec<(NetId, NetId)>, String> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(o), Some(d), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format!("line {}: expected `origin destination`", lineno + 1));
        };
        let lookup = |name: &str| n.find_net(name).ok_or_else(|| format!("line {}: unknown net `{name}`", lineno + 1));
        out.push((lookup(o)?, lookup(d)?));
    }
    Ok(out)
}

/// Renders the pair list for `destination` over the design node list.
pub fn format_pairs(n: &Netlist, destination: NetId) -> String {
    let dest = n.net_name(destination);
    n.list_nodes().into_iter().map(|o| format!("{} {dest}\n", n.net_name(o))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;

    fn q(n: &Netlist, o: &str, d: &str, k: usize) -> PathQuery {
        PathQuery::new(n, n.find_net(o).unwrap(), n.find_net(d).unwrap(), k).unwrap()
    }

    #[test]
    fn masked_and_is_unreachable() {
        let n = parse_netlist(
            "module m (o, y); input o; output y; wire z; const0 (z); and (y, o, z); endmodule",
        )
        .unwrap();
        let query = q(&n, "o", "y", 1);
        assert_eq!(sensitize(&n, &query, None).status, PathStatus::UnreachableAtBound { bound: 1 });
        assert!(!brute_force_reach(&n, &query).unwrap());
    }

    #[test]
    fn buffer_chain_is_reachable() {
        let n = parse_netlist(
            "module m (o, y); input o; output y; wire a, b; buf (a, o); buf (b, a); buf (y, b); endmodule",
        )
        .unwrap();
        for origin in ["o", "a", "b", "y"] {
            let query = q(&n, origin, "y", 1);
            assert!(structural_reach(&n, query.origin, query.destination).unwrap());
            let v = sensitize(&n, &query, None);
            let PathStatus::Reachable { witness } = &v.status else { panic!("{origin}: {v:?}") };
            assert!(witness.replay(&n, &query));
            assert!(brute_force_reach(&n, &query).unwrap());
        }
    }

    #[test]
    fn shift_chain_needs_four_cycles() {
        let n = parse_netlist(
            "module m (clk, o, y); input clk, o; output y; wire a, b;\n\
             dff r0 (a, o, clk); dff r1 (b, a, clk); dff r2 (y, b, clk); endmodule",
        )
        .unwrap();
        assert_eq!(sensitize(&n, &q(&n, "o", "y", 3), None).status, PathStatus::UnreachableAtBound { bound: 3 });
        assert!(!brute_force_reach(&n, &q(&n, "o", "y", 3)).unwrap());
        let v = sensitize(&n, &q(&n, "o", "y", 4), None);
        assert!(v.status.is_reachable());
        assert!(brute_force_reach(&n, &q(&n, "o", "y", 4)).unwrap());
        assert_eq!(BoundChoice::Auto.resolve(&n, n.find_net("o").unwrap(), n.find_net("y").unwrap()), 5);
    }

    #[test]
    fn structural_false_skips_solver() {
        let n = parse_netlist("module m (a, b, y, z); input a, b; output y, z; buf (y, a); buf (z, b); endmodule")
            .unwrap();
        let v = sensitize(&n, &q(&n, "b", "y", 2), None);
        assert_eq!(v.status, PathStatus::UnreachableStructural);
        assert_eq!(v.stats.sat_calls, 0);
        assert!(structural_reach(&n, n.find_net("y").unwrap(), n.find_net("y").unwrap()).unwrap());
        assert_eq!(structural_reach(&n, NetId(99), NetId(0)), Err(PathError::UnknownNet(99)));
    }

    #[test]
    fn empty_cone_batch() {
        let n = parse_netlist(
            "module m (a, b, y, z); input a, b; output y, z; const1 (y); and (z, a, b); endmodule",
        )
        .unwrap();
        let dest = n.find_net("y").unwrap();
        let origins: Vec<NetId> = n.list_nodes().into_iter().filter(|&o| o != dest).collect();
        let res = batch_check(&n, dest, &origins, &CheckOptions::default()).unwrap();
        assert!(res.values().all(|v| v.status == PathStatus::UnreachableStructural));
    }

    #[test]
    fn reset_pin_flip_reaches_register() {
        let n = parse_netlist(
            "module m (clk, rstn, d, q); input clk, rstn, d; output q; dff r (q, d, clk, rstn, 1'b0); endmodule",
        )
        .unwrap();
        let query = q(&n, "rstn", "q", 2);
        assert!(sensitize(&n, &query, None).status.is_reachable());
        assert!(brute_force_reach(&n, &query).unwrap());
    }

    #[test]
    fn query_validation() {
        let n = parse_netlist("module m (a, y); input a; output y; buf (y, a); endmodule").unwrap();
        assert_eq!(PathQuery::new(&n, NetId(0), NetId(1), 0), Err(PathError::ZeroBound));
        assert_eq!(PathQuery::new(&n, NetId(0), NetId(7), 1), Err(PathError::UnknownNet(7)));
    }

    #[test]
    fn pair_file_round_trip() {
        let n = parse_netlist("module m (a, b, y); input a, b; output y; and (y, a, b); endmodule").unwrap();
        let y = n.find_net("y").unwrap();
        let text = format_pairs(&n, y);
        assert_eq!(text, "a y\nb y\ny y\n");
        let pairs = parse_pairs(&n, &text).unwrap();
        assert_eq!(pairs.len(), 3);
        assert!(parse_pairs(&n, "a\n").is_err());
        assert!(parse_pairs(&n, "a nope\n").is_err());
    }
}
