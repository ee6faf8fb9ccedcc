//! Flattened single-bit gate-level netlists.
//!
//! A [`Netlist`] is built once (by the parser, by [`NetlistBuilder`], or by
//! binding a monitor) and is immutable afterwards. Elaboration checks that
//! every net has exactly one driver, that all references resolve and that the
//! combinational part is acyclic, so every consumer can rely on those facts.

mod parse;
mod print;
pub mod random;
mod sim;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{parse_literal, parse_netlist};
pub use sim::{Flip, Trace};

/// Index of a net inside its netlist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NetId(pub u32);

impl NetId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a cell inside its netlist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId(pub u32);

impl CellId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Whether a net belongs to the design under test or to bound checker logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    Design,
    Monitor,
}

/// Primitive cell library.
///
/// Pin order for `Mux2` is `(select, a, b)` with `out = select ? b : a`.
/// `Dff` pins are `(d, clk)` or `(d, clk, rstn)`; the reset is asynchronous and
/// active low, and the register powers up holding `reset_value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Not,
    Buf,
    Mux2,
    Const0,
    Const1,
    Dff { reset_value: bool },
}

impl CellKind {
    /// Accepted input-pin counts.
    pub fn arity(self) -> std::ops::RangeInclusive<usize> {
        match self {
            CellKind::And
            | CellKind::Or
            | CellKind::Nand
            | CellKind::Nor
            | CellKind::Xor
            | CellKind::Xnor => 2..=2,
            CellKind::Not | CellKind::Buf => 1..=1,
            CellKind::Mux2 => 3..=3,
            CellKind::Const0 | CellKind::Const1 => 0..=0,
            CellKind::Dff { .. } => 2..=3,
        }
    }

    pub fn is_sequential(self) -> bool {
        matches!(self, CellKind::Dff { .. })
    }

    /// Lower-case primitive keyword used by the text format.
    pub fn keyword(self) -> &'static str {
        match self {
            CellKind::And => "and",
            CellKind::Or => "or",
            CellKind::Nand => "nand",
            CellKind::Nor => "nor",
            CellKind::Xor => "xor",
            CellKind::Xnor => "xnor",
            CellKind::Not => "not",
            CellKind::Buf => "buf",
            CellKind::Mux2 => "mux2",
            CellKind::Const0 => "const0",
            CellKind::Const1 => "const1",
            CellKind::Dff { .. } => "dff",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<CellKind> {
        Some(match kw {
            "and" => CellKind::And,
            "or" => CellKind::Or,
            "nand" => CellKind::Nand,
            "nor" => CellKind::Nor,
            "xor" => CellKind::Xor,
            "xnor" => CellKind::Xnor,
            "not" => CellKind::Not,
            "buf" => CellKind::Buf,
            "mux2" => CellKind::Mux2,
            "const0" => CellKind::Const0,
            "const1" => CellKind::Const1,
            "dff" => CellKind::Dff { reset_value: false },
            _ => return None,
        })
    }

    /// Evaluates a combinational kind on concrete values.
    pub fn eval(self, inputs: &[bool]) -> bool {
        match self {
            CellKind::And => inputs[0] & inputs[1],
            CellKind::Or => inputs[0] | inputs[1],
            CellKind::Nand => !(inputs[0] & inputs[1]),
            CellKind::Nor => !(inputs[0] | inputs[1]),
            CellKind::Xor => inputs[0] ^ inputs[1],
            CellKind::Xnor => !(inputs[0] ^ inputs[1]),
            CellKind::Not => !inputs[0],
            CellKind::Buf => inputs[0],
            CellKind::Mux2 => {
                if inputs[0] {
                    inputs[2]
                } else {
                    inputs[1]
                }
            }
            CellKind::Const0 => false,
            CellKind::Const1 => true,
            CellKind::Dff { .. } => panic!("eval called on a sequential cell"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Net {
    pub name: String,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub name: String,
    pub kind: CellKind,
    pub inputs: Vec<NetId>,
    pub output: NetId,
}

/// What drives a net after elaboration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Driver {
    Input,
    Cell(CellId),
}

/// A declared multi-bit vector, kept so buses can be printed and bound by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bus {
    pub msb: i64,
    pub lsb: i64,
    /// Bit nets ordered from `msb` down to `lsb`.
    pub bits: Vec<NetId>,
}

impl Bus {
    pub fn width(&self) -> usize {
        self.bits.len()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unknown primitive `{name}`")]
    UnknownPrimitive { line: usize, col: usize, name: String },
    #[error("{line}:{col}: undeclared net `{name}`")]
    Undeclared { line: usize, col: usize, name: String },
    #[error("net `{0}` has multiple drivers")]
    MultipleDrivers(String),
    #[error("net `{0}` has no driver")]
    Undriven(String),
    #[error("net `{0}` is declared twice")]
    DuplicateNet(String),
    #[error("cell `{cell}` ({kind}) takes {expected} inputs, got {got}")]
    Arity { cell: String, kind: &'static str, expected: String, got: usize },
    #[error("combinational loop through nets: {}", .0.join(" -> "))]
    CombinationalLoop(Vec<String>),
    #[error("registers use more than one {what} net: `{a}` and `{b}`")]
    MultipleClocks { what: &'static str, a: String, b: String },
    #[error("{what} net `{net}` must be a primary input")]
    ClockNotInput { what: &'static str, net: String },
    #[error("unknown net `{0}`")]
    UnknownNet(String),
    #[error("simulation needs at least one cycle of stimulus")]
    EmptyStimulus,
    #[error("cycle {cycle}: no value for primary input `{input}`")]
    MissingInput { cycle: usize, input: String },
}

/// Immutable, elaborated netlist.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Netlist {
    name: String,
    nets: Vec<Net>,
    cells: Vec<Cell>,
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    clock: Option<NetId>,
    reset: Option<NetId>,
    buses: BTreeMap<String, Bus>,
    #[serde(skip)]
    derived: Derived,
}

/// Lookup tables recomputed at elaboration time.
#[derive(Debug, Clone, Default)]
struct Derived {
    by_name: HashMap<String, NetId>,
    drivers: Vec<Driver>,
    fanout: Vec<Vec<CellId>>,
    topo: Vec<CellId>,
    dffs: Vec<CellId>,
    stimulus_inputs: Vec<NetId>,
}

impl PartialEq for Netlist {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.nets == other.nets
            && self.cells == other.cells
            && self.inputs == other.inputs
            && self.outputs == other.outputs
            && self.clock == other.clock
            && self.reset == other.reset
            && self.buses == other.buses
    }
}

impl Netlist {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nets(&self) -> &[Net] {
        &self.nets
    }

    pub fn net(&self, id: NetId) -> &Net {
        &self.nets[id.index()]
    }

    pub fn net_name(&self, id: NetId) -> &str {
        &self.nets[id.index()].name
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id.index()]
    }

    pub fn primary_inputs(&self) -> &[NetId] {
        &self.inputs
    }

    pub fn primary_outputs(&self) -> &[NetId] {
        &self.outputs
    }

    pub fn clock(&self) -> Option<NetId> {
        self.clock
    }

    pub fn reset(&self) -> Option<NetId> {
        self.reset
    }

    pub fn buses(&self) -> &BTreeMap<String, Bus> {
        &self.buses
    }

    pub fn bus(&self, name: &str) -> Option<&Bus> {
        self.buses.get(name)
    }

    pub fn find_net(&self, name: &str) -> Option<NetId> {
        self.derived.by_name.get(name).copied()
    }

    pub fn driver(&self, net: NetId) -> Driver {
        self.derived.drivers[net.index()]
    }

    /// Cells reading `net` on any pin.
    pub fn fanout(&self, net: NetId) -> &[CellId] {
        &self.derived.fanout[net.index()]
    }

    /// Registers in cell-id order.
    pub fn dffs(&self) -> &[CellId] {
        &self.derived.dffs
    }

    /// Primary inputs that carry stimulus, i.e. everything except the clock.
    pub fn stimulus_inputs(&self) -> &[NetId] {
        &self.derived.stimulus_inputs
    }

    /// Combinational cells in dependency order; registers are excluded.
    ///
    /// Among cells that are ready at the same time the one with the smaller
    /// instance name comes first, so the order is stable across runs.
    pub fn topo_order(&self) -> &[CellId] {
        &self.derived.topo
    }

    /// Design-origin nets that count as coverage nodes, sorted by name.
    ///
    /// Every net is driven by a cell or a primary input after elaboration, so
    /// this is every design net except the clock and the reset.
    pub fn list_nodes(&self) -> Vec<NetId> {
        let mut nodes: Vec<NetId> = (0..self.nets.len() as u32)
            .map(NetId)
            .filter(|&id| {
                self.net(id).origin == Origin::Design
                    && Some(id) != self.clock
                    && Some(id) != self.reset
            })
            .collect();
        nodes.sort_by(|a, b| self.net_name(*a).cmp(self.net_name(*b)));
        nodes
    }

    pub fn node_names(&self) -> Vec<String> {
        self.list_nodes()
            .into_iter()
            .map(|id| self.net_name(id).to_string())
            .collect()
    }

    pub fn is_design_net(&self, id: NetId) -> bool {
        self.net(id).origin == Origin::Design
    }

    /// Rebuilds the lookup tables after deserialization.
    pub fn from_json(text: &str) -> Result<Netlist, Box<dyn std::error::Error>> {
        let raw: Netlist = serde_json::from_str(text)?;
        Ok(NetlistBuilder::from_netlist(&raw)?.finish()?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("netlist serializes")
    }

    pub fn stats(&self) -> NetlistStats {
        NetlistStats {
            cells: self.cells.len(),
            nets: self.nets.len(),
            nodes: self.list_nodes().len(),
            inputs: self.inputs.len(),
            outputs: self.outputs.len(),
            dffs: self.derived.dffs.len(),
        }
    }

    /// Directed reachability over the cell graph, registers included.
    pub fn structural_reach(&self, from: NetId, to: NetId) -> bool {
        if from == to {
            return true;
        }
        self.fanin_cone(to)[from.index()]
    }

    /// Marks every net with a structural path into `to` (including `to`).
    pub fn fanin_cone(&self, to: NetId) -> Vec<bool> {
        let mut seen = vec![false; self.nets.len()];
        let mut stack = vec![to];
        seen[to.index()] = true;
        while let Some(n) = stack.pop() {
            if let Driver::Cell(c) = self.driver(n) {
                for &i in &self.cell(c).inputs {
                    if !seen[i.index()] {
                        seen[i.index()] = true;
                        stack.push(i);
                    }
                }
            }
        }
        seen
    }

    /// Minimum number of registers on any structural path from `from` to
    /// `to`, or `None` when no path exists.
    pub fn sequential_distance(&self, from: NetId, to: NetId) -> Option<usize> {
        // 0-1 BFS: crossing a register costs 1, everything else 0.
        let mut dist = vec![usize::MAX; self.nets.len()];
        let mut dq = std::collections::VecDeque::new();
        dist[from.index()] = 0;
        dq.push_back(from);
        while let Some(n) = dq.pop_front() {
            let d = dist[n.index()];
            for &c in self.fanout(n) {
                let cell = self.cell(c);
                let w = usize::from(cell.kind.is_sequential());
                let o = cell.output;
                if d + w < dist[o.index()] {
                    dist[o.index()] = d + w;
                    if w == 0 {
                        dq.push_front(o);
                    } else {
                        dq.push_back(o);
                    }
                }
            }
        }
        let d = dist[to.index()];
        (d != usize::MAX).then_some(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NetlistStats {
    pub cells: usize,
    pub nets: usize,
    pub nodes: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub dffs: usize,
}

impl fmt::Display for NetlistStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cells={} nets={} nodes={} inputs={} outputs={} dffs={}",
            self.cells, self.nets, self.nodes, self.inputs, self.outputs, self.dffs
        )
    }
}

/// Incremental constructor; [`NetlistBuilder::finish`] runs elaboration checks.
#[derive(Debug, Clone)]
pub struct NetlistBuilder {
    name: String,
    nets: Vec<Net>,
    by_name: HashMap<String, NetId>,
    cells: Vec<Cell>,
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    buses: BTreeMap<String, Bus>,
}

impl NetlistBuilder {
    pub fn new(name: &str) -> Self {
        NetlistBuilder {
            name: name.to_string(),
            nets: Vec::new(),
            by_name: HashMap::new(),
            cells: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            buses: BTreeMap::new(),
        }
    }

    pub fn add_net(&mut self, name: &str, origin: Origin) -> Result<NetId, NetlistError> {
        if self.by_name.contains_key(name) {
            return Err(NetlistError::DuplicateNet(name.to_string()));
        }
        let id = NetId(self.nets.len() as u32);
        self.nets.push(Net { name: name.to_string(), origin });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    /// Builder pre-loaded with every net, bus, port and cell of `n`, keeping ids.
    pub fn from_netlist(n: &Netlist) -> Result<Self, NetlistError> {
        let mut b = NetlistBuilder::new(&n.name);
        for net in &n.nets {
            b.add_net(&net.name, net.origin)?;
        }
        for (name, bus) in &n.buses {
            b.declare_bus(name, bus.msb, bus.lsb, bus.bits.clone());
        }
        for &i in &n.inputs {
            b.mark_input(i);
        }
        for &o in &n.outputs {
            b.mark_output(o);
        }
        for c in &n.cells {
            b.add_cell(&c.name, c.kind, c.inputs.clone(), c.output);
        }
        Ok(b)
    }

    pub fn find(&self, name: &str) -> Option<NetId> {
        self.by_name.get(name).copied()
    }

    pub fn net_name(&self, id: NetId) -> &str {
        &self.nets[id.index()].name
    }

    pub fn declare_bus(&mut self, name: &str, msb: i64, lsb: i64, bits: Vec<NetId>) {
        self.buses.insert(name.to_string(), Bus { msb, lsb, bits });
    }

    pub fn mark_input(&mut self, id: NetId) {
        self.inputs.push(id);
    }

    pub fn mark_output(&mut self, id: NetId) {
        self.outputs.push(id);
    }

    pub fn add_cell(&mut self, name: &str, kind: CellKind, inputs: Vec<NetId>, output: NetId) -> CellId {
        let id = CellId(self.cells.len() as u32);
        self.cells.push(Cell { name: name.to_string(), kind, inputs, output });
        id
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn finish(self) -> Result<Netlist, NetlistError> {
        let NetlistBuilder { name, nets, by_name, cells, inputs, outputs, buses } = self;
        let n = nets.len();

        for c in &cells {
            if !c.kind.arity().contains(&c.inputs.len()) {
                let r = c.kind.arity();
                let expected = if r.start() == r.end() {
                    r.start().to_string()
                } else {
                    format!("{}..={}", r.start(), r.end())
                };
                return Err(NetlistError::Arity {
                    cell: c.name.clone(),
                    kind: c.kind.keyword(),
                    expected,
                    got: c.inputs.len(),
                });
            }
        }

        let mut drivers: Vec<Option<Driver>> = vec![None; n];
        for &i in &inputs {
            if drivers[i.index()].is_some() {
                return Err(NetlistError::MultipleDrivers(nets[i.index()].name.clone()));
            }
            drivers[i.index()] = Some(Driver::Input);
        }
        for (ci, c) in cells.iter().enumerate() {
            let slot = &mut drivers[c.output.index()];
            if slot.is_some() {
                return Err(NetlistError::MultipleDrivers(nets[c.output.index()].name.clone()));
            }
            *slot = Some(Driver::Cell(CellId(ci as u32)));
        }
        let drivers: Vec<Driver> = drivers
            .into_iter()
            .enumerate()
            .map(|(i, d)| d.ok_or_else(|| NetlistError::Undriven(nets[i].name.clone())))
            .collect::<Result<_, _>>()?;

        let mut fanout = vec![Vec::new(); n];
        for (ci, c) in cells.iter().enumerate() {
            for &i in &c.inputs {
                let list: &mut Vec<CellId> = &mut fanout[i.index()];
                if list.last() != Some(&CellId(ci as u32)) {
                    list.push(CellId(ci as u32));
                }
            }
        }

        // Single clock and single reset, both primary inputs.
        let mut clock: Option<NetId> = None;
        let mut reset: Option<NetId> = None;
        let mut dffs = Vec::new();
        for (ci, c) in cells.iter().enumerate() {
            if !c.kind.is_sequential() {
                continue;
            }
            dffs.push(CellId(ci as u32));
            let pins = [("clock", Some(c.inputs[1]), &mut clock), ("reset", c.inputs.get(2).copied(), &mut reset)];
            for (what, pin, slot) in pins {
                let Some(pin) = pin else { continue };
                match *slot {
                    Some(prev) if prev != pin => {
                        return Err(NetlistError::MultipleClocks {
                            what,
                            a: nets[prev.index()].name.clone(),
                            b: nets[pin.index()].name.clone(),
                        })
                    }
                    _ => *slot = Some(pin),
                }
                if drivers[pin.index()] != Driver::Input {
                    return Err(NetlistError::ClockNotInput { what, net: nets[pin.index()].name.clone() });
                }
            }
        }

        let topo = topo_sort(&nets, &cells, &drivers, &fanout)?;
        let stimulus_inputs = inputs.iter().copied().filter(|&i| Some(i) != clock).collect();

        Ok(Netlist {
            name,
            nets,
            cells,
            inputs,
            outputs,
            clock,
            reset,
            buses,
            derived: Derived { by_name, drivers, fanout, topo, dffs, stimulus_inputs },
        })
    }
}

fn topo_sort(
    nets: &[Net],
    cells: &[Cell],
    drivers: &[Driver],
    fanout: &[Vec<CellId>],
) -> Result<Vec<CellId>, NetlistError> {
    let comb_driver = |net: NetId| match drivers[net.index()] {
        Driver::Cell(c) if !cells[c.index()].kind.is_sequential() => Some(c),
        _ => None,
    };
    let mut pending = vec![0usize; cells.len()];
    let mut ready = BTreeSet::new();
    for (ci, c) in cells.iter().enumerate() {
        if c.kind.is_sequential() {
            continue;
        }
        pending[ci] = c.inputs.iter().filter(|&&i| comb_driver(i).is_some()).count();
        if pending[ci] == 0 {
            ready.insert((c.name.as_str(), ci));
        }
    }
    let comb_count = cells.iter().filter(|c| !c.kind.is_sequential()).count();
    let mut order = Vec::with_capacity(comb_count);
    while let Some(entry) = ready.pop_first() {
        let ci = entry.1;
        order.push(CellId(ci as u32));
        let out = cells[ci].output;
        for &reader in &fanout[out.index()] {
            let r = reader.index();
            if cells[r].kind.is_sequential() {
                continue;
            }
            // A reader may use the same net on several pins.
            let uses = cells[r].inputs.iter().filter(|&&i| i == out).count();
            pending[r] -= uses;
            if pending[r] == 0 {
                ready.insert((cells[r].name.as_str(), r));
            }
        }
    }
    if order.len() == comb_count {
        return Ok(order);
    }

    // Walk backwards through unresolved cells until a cell repeats.
    let start = (0..cells.len())
        .filter(|&ci| !cells[ci].kind.is_sequential() && pending[ci] > 0)
        .min_by(|&a, &b| nets[cells[a].output.index()].name.cmp(&nets[cells[b].output.index()].name))
        .expect("some cell is on a cycle");
    let mut path: Vec<usize> = Vec::new();
    let mut pos: HashMap<usize, usize> = HashMap::new();
    let mut cur = start;
    loop {
        if let Some(&p) = pos.get(&cur) {
            let mut names: Vec<String> = path[p..]
                .iter()
                .rev()
                .map(|&ci| nets[cells[ci].output.index()].name.clone())
                .collect();
            let min = (0..names.len()).min_by(|&a, &b| names[a].cmp(&names[b])).unwrap();
            names.rotate_left(min);
            return Err(NetlistError::CombinationalLoop(names));
        }
        pos.insert(cur, path.len());
        path.push(cur);
        cur = cells[cur]
            .inputs
            .iter()
            .filter_map(|&i| comb_driver(i))
            .map(|c| c.index())
            .find(|&c| pending[c] > 0)
            .expect("an unresolved cell has an unresolved predecessor");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn latch() -> NetlistBuilder {
        let mut b = NetlistBuilder::new("latch");
        let s = b.add_net("s", Origin::Design).unwrap();
        let r = b.add_net("r", Origin::Design).unwrap();
        let q = b.add_net("q", Origin::Design).unwrap();
        let qn = b.add_net("qn", Origin::Design).unwrap();
        b.mark_input(s);
        b.mark_input(r);
        b.add_cell("g1", CellKind::Nor, vec![r, qn], q);
        b.add_cell("g2", CellKind::Nor, vec![s, q], qn);
        b
    }

    #[test]
    fn cross_coupled_nor_is_a_loop() {
        let err = latch().finish().unwrap_err();
        assert_eq!(err, NetlistError::CombinationalLoop(vec!["q".into(), "qn".into()]));
    }

    #[test]
    fn undriven_net_rejected() {
        let mut b = NetlistBuilder::new("m");
        let a = b.add_net("a", Origin::Design).unwrap();
        let y = b.add_net("y", Origin::Design).unwrap();
        let _floating = b.add_net("f", Origin::Design).unwrap();
        b.mark_input(a);
        b.add_cell("g", CellKind::Not, vec![a], y);
        assert_eq!(b.finish().unwrap_err(), NetlistError::Undriven("f".into()));
    }

    #[test]
    fn arity_checked() {
        let mut b = NetlistBuilder::new("m");
        let a = b.add_net("a", Origin::Design).unwrap();
        let y = b.add_net("y", Origin::Design).unwrap();
        b.mark_input(a);
        b.add_cell("g", CellKind::And, vec![a], y);
        assert!(matches!(b.finish(), Err(NetlistError::Arity { .. })));
    }

    #[test]
    fn sequential_distance_counts_registers() {
        let mut b = NetlistBuilder::new("m");
        let clk = b.add_net("clk", Origin::Design).unwrap();
        let a = b.add_net("a", Origin::Design).unwrap();
        let q1 = b.add_net("q1", Origin::Design).unwrap();
        let q2 = b.add_net("q2", Origin::Design).unwrap();
        let y = b.add_net("y", Origin::Design).unwrap();
        b.mark_input(clk);
        b.mark_input(a);
        b.add_cell("r1", CellKind::Dff { reset_value: false }, vec![a, clk], q1);
        b.add_cell("r2", CellKind::Dff { reset_value: false }, vec![q1, clk], q2);
        b.add_cell("g", CellKind::Or, vec![q2, a], y);
        let n = b.finish().unwrap();
        assert_eq!(n.sequential_distance(a, y), Some(0));
        assert_eq!(n.sequential_distance(a, q2), Some(2));
        assert_eq!(n.sequential_distance(y, a), None);
        assert_eq!(n.clock(), Some(clk));
        assert_eq!(n.stimulus_inputs(), &[a]);
    }
}
