//! Gate-level monitor generation and binding.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::{AssertionAst, Expr, MonitorError, Property, Word};
use crate::netlist::{CellKind, NetId, Netlist, NetlistBuilder, Origin};

/// Signal name to bit net names (most significant first). Names missing from
/// the map are single-bit signals named after themselves.
pub type Shapes = BTreeMap<String, Vec<String>>;

/// Bus shapes of a design, for compiling monitors against it.
pub fn shapes_of(design: &Netlist) -> Shapes {
    design
        .buses()
        .iter()
        .map(|(name, bus)| (name.clone(), bus.bits.iter().map(|&b| design.net_name(b).to_string()).collect()))
        .collect()
}

/// A compiled assertion: a standalone netlist whose primary inputs are the
/// observed design bits (plus the clock when history is needed) and whose
/// only output is `fail`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorCircuit {
    pub name: String,
    pub fragment: Netlist,
    pub fail: NetId,
    /// Clock input of the fragment, present iff it has registers.
    pub clock: Option<String>,
    /// Assertion signal to the design nets it reads.
    pub bindings: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum W {
    C(bool),
    N(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Input(String),
    Gate(CellKind, Vec<W>),
}

#[derive(Default)]
struct Gen {
    nodes: Vec<Node>,
    memo: HashMap<Node, usize>,
    bindings: BTreeMap<String, Vec<String>>,
}

impl Gen {
    fn node(&mut self, n: Node) -> W {
        if let Some(&i) = self.memo.get(&n) {
            return W::N(i);
        }
        self.nodes.push(n.clone());
        self.memo.insert(n, self.nodes.len() - 1);
        W::N(self.nodes.len() - 1)
    }

    fn input(&mut self, bit: &str) -> W {
        self.node(Node::Input(bit.to_string()))
    }

    fn negated(&self, a: W) -> Option<W> {
        match a {
            W::N(i) => match &self.nodes[i] {
                Node::Gate(CellKind::Not, ins) => Some(ins[0]),
                _ => None,
            },
            W::C(b) => Some(W::C(!b)),
        }
    }

    fn not(&mut self, a: W) -> W {
        match self.negated(a) {
            Some(x) => x,
            None => self.node(Node::Gate(CellKind::Not, vec![a])),
        }
    }

    fn complementary(&self, a: W, b: W) -> bool {
        self.negated(a) == Some(b) || self.negated(b) == Some(a)
    }

    fn and(&mut self, a: W, b: W) -> W {
        match (a, b) {
            (W::C(false), _) | (_, W::C(false)) => W::C(false),
            (W::C(true), x) | (x, W::C(true)) => x,
            _ if a == b => a,
            _ if self.complementary(a, b) => W::C(false),
            _ => self.node(Node::Gate(CellKind::And, vec![a.min(b), a.max(b)])),
        }
    }

    fn or(&mut self, a: W, b: W) -> W {
        match (a, b) {
            (W::C(true), _) | (_, W::C(true)) => W::C(true),
            (W::C(false), x) | (x, W::C(false)) => x,
            _ if a == b => a,
            _ if self.complementary(a, b) => W::C(true),
            _ => self.node(Node::Gate(CellKind::Or, vec![a.min(b), a.max(b)])),
        }
    }

    fn xor(&mut self, a: W, b: W) -> W {
        match (a, b) {
            (W::C(p), W::C(q)) => W::C(p ^ q),
            (W::C(false), x) | (x, W::C(false)) => x,
            (W::C(true), x) | (x, W::C(true)) => self.not(x),
            _ if a == b => W::C(false),
            _ => self.node(Node::Gate(CellKind::Xor, vec![a.min(b), a.max(b)])),
        }
    }

    fn xnor(&mut self, a: W, b: W) -> W {
        match (a, b) {
            (W::C(_), _) | (_, W::C(_)) => {
                let x = self.xor(a, b);
                self.not(x)
            }
            _ if a == b => W::C(true),
            _ => self.node(Node::Gate(CellKind::Xnor, vec![a.min(b), a.max(b)])),
        }
    }

    /// Register holding `d` from the previous cycle, powering up as `init`.
    fn delay(&mut self, d: W, init: bool) -> W {
        self.node(Node::Gate(CellKind::Dff { reset_value: init }, vec![d]))
    }

    fn tree(&mut self, items: Vec<W>, op: fn(&mut Gen, W, W) -> W, empty: bool) -> W {
        let mut level = items;
        if level.is_empty() {
            return W::C(empty);
        }
        while level.len() > 1 {
            level = level.chunks(2).map(|p| if p.len() == 2 { op(self, p[0], p[1]) } else { p[0] }).collect();
        }
        level[0]
    }

    fn word(&mut self, w: &Word, shapes: &Shapes) -> Result<Vec<W>, MonitorError> {
        Ok(match w {
            Word::Signal(s) => {
                let bits = shapes.get(s).cloned().unwrap_or_else(|| vec![s.clone()]);
                self.bindings.insert(s.clone(), bits.clone());
                bits.iter().map(|b| self.input(b)).collect()
            }
            Word::Literal(b) => b.iter().map(|&v| W::C(v)).collect(),
            Word::Bool(e) => vec![self.expr(e, shapes)?],
        })
    }

    fn expr(&mut self, e: &Expr, shapes: &Shapes) -> Result<W, MonitorError> {
        Ok(match e {
            Expr::Const(b) => W::C(*b),
            Expr::Bit(s) => {
                if let Some(bits) = shapes.get(s).filter(|b| b.len() != 1) {
                    return Err(MonitorError::Width { signal: s.clone(), expected: 1, got: bits.len() });
                }
                let bits = shapes.get(s).cloned().unwrap_or_else(|| vec![s.clone()]);
                self.bindings.insert(s.clone(), bits.clone());
                self.input(&bits[0])
            }
            Expr::Not(a) => {
                let a = self.expr(a, shapes)?;
                self.not(a)
            }
            Expr::And(a, b) => {
                let (a, b) = (self.expr(a, shapes)?, self.expr(b, shapes)?);
                self.and(a, b)
            }
            Expr::Or(a, b) => {
                let (a, b) = (self.expr(a, shapes)?, self.expr(b, shapes)?);
                self.or(a, b)
            }
            Expr::Xor(a, b) => {
                let (a, b) = (self.expr(a, shapes)?, self.expr(b, shapes)?);
                self.xor(a, b)
            }
            Expr::Eq(a, b) => {
                let (mut a, mut b) = (self.word(a, shapes)?, self.word(b, shapes)?);
                let w = a.len().max(b.len());
                for v in [&mut a, &mut b] {
                    let pad = w - v.len();
                    v.splice(0..0, std::iter::repeat_n(W::C(false), pad));
                }
                let bits: Vec<W> = a.into_iter().zip(b).map(|(x, y)| self.xnor(x, y)).collect();
                self.tree(bits, Gen::and, true)
            }
            Expr::Rose(a) => {
                let now = self.expr(a, shapes)?;
                if let W::C(_) = now {
                    return Ok(W::C(false));
                }
                let prev = self.delay(now, true);
                let not_prev = self.not(prev);
                self.and(now, not_prev)
            }
            Expr::OneHot0(w) => {
                let bits = self.word(w, shapes)?;
                let mut pairs = Vec::new();
                for i in 0..bits.len() {
                    for j in i + 1..bits.len() {
                        pairs.push(self.and(bits[i], bits[j]));
                    }
                }
                let two = self.tree(pairs, Gen::or, false);
                self.not(two)
            }
        })
    }
}

/// Compiles an assertion into a monitor netlist named `name`.
///
/// `fail` is combinational: it is high in exactly the cycles the reference
/// interpreter reports as failing. History for `$rose` and `|=>` is kept in
/// registers without reset that power up in a state which reports no edge
/// and no pending obligation.
pub fn compile_to_monitor(name: &str, ast: &AssertionAst, shapes: &Shapes) -> Result<MonitorCircuit, MonitorError> {
    let mut g = Gen::default();
    let violated = match &ast.property {
        Property::Holds(p) => {
            let p = g.expr(p, shapes)?;
            g.not(p)
        }
        Property::Implies { antecedent, consequent, next_cycle } => {
            let mut a = g.expr(antecedent, shapes)?;
            if *next_cycle {
                a = match a {
                    W::C(false) => W::C(false),
                    _ => g.delay(a, false),
                };
            }
            let c = g.expr(consequent, shapes)?;
            let nc = g.not(c);
            g.and(a, nc)
        }
    };
    let fail = match &ast.disable {
        Some(d) => {
            let d = g.expr(d, shapes)?;
            let nd = g.not(d);
            g.and(violated, nd)
        }
        None => violated,
    };
    emit(name, g, fail, ast.clock.as_deref().unwrap_or("clk"))
}

/// Marks the nodes `fail` depends on. Inputs always count as live so every
/// referenced signal stays bound.
fn live_nodes(g: &Gen, fail: W) -> Vec<bool> {
    let mut live: Vec<bool> = g.nodes.iter().map(|n| matches!(n, Node::Input(_))).collect();
    let mut stack: Vec<usize> = match fail {
        W::N(i) => vec![i],
        W::C(_) => vec![],
    };
    while let Some(i) = stack.pop() {
        if std::mem::replace(&mut live[i], true) && !matches!(g.nodes[i], Node::Input(_)) {
            continue;
        }
        if let Node::Gate(_, ins) = &g.nodes[i] {
            stack.extend(ins.iter().filter_map(|w| match w {
                W::N(j) => Some(*j),
                W::C(_) => None,
            }));
        }
    }
    live
}

fn emit(name: &str, g: Gen, fail: W, clock: &str) -> Result<MonitorCircuit, MonitorError> {
    let mut b = NetlistBuilder::new(name);
    let live = live_nodes(&g, fail);
    let has_regs = g.nodes.iter().zip(&live).any(|(n, &l)| l && matches!(n, Node::Gate(k, _) if k.is_sequential()));
    // Inputs first, in name order, so ids do not depend on traversal order.
    let mut inputs: Vec<(&str, usize)> = g
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(i, n)| match n {
            Node::Input(s) => Some((s.as_str(), i)),
            _ => None,
        })
        .collect();
    inputs.sort();
    let mut net_of: Vec<Option<NetId>> = vec![None; g.nodes.len()];
    for &(s, i) in &inputs {
        let id = b.add_net(s, Origin::Monitor)?;
        b.mark_input(id);
        net_of[i] = Some(id);
    }
    let clk = if has_regs {
        let id = b.add_net(clock, Origin::Monitor)?;
        b.mark_input(id);
        Some(id)
    } else {
        None
    };
    let mut consts: [Option<NetId>; 2] = [None, None];
    let mut konst = |b: &mut NetlistBuilder, v: bool, out: Option<NetId>| -> Result<NetId, MonitorError> {
        if out.is_none() {
            if let Some(id) = consts[usize::from(v)] {
                return Ok(id);
            }
        }
        let id = match out {
            Some(id) => id,
            None => b.add_net(&format!("k{}", u8::from(v)), Origin::Monitor)?,
        };
        let kind = if v { CellKind::Const1 } else { CellKind::Const0 };
        b.add_cell(&format!("k{}_{}", u8::from(v), b.cell_count()), kind, vec![], id);
        if out.is_none() {
            consts[usize::from(v)] = Some(id);
        }
        Ok(id)
    };
    let fail_node = match fail {
        W::N(i) if matches!(g.nodes[i], Node::Gate(..)) => Some(i),
        _ => None,
    };
    // Gate outputs are created up front so registers can refer forward.
    for (i, n) in g.nodes.iter().enumerate() {
        if let (Node::Gate(..), true) = (n, live[i]) {
            let net = if Some(i) == fail_node { "fail".to_string() } else { format!("n{i}") };
            net_of[i] = Some(b.add_net(&net, Origin::Monitor)?);
        }
    }
    for (i, n) in g.nodes.iter().enumerate() {
        let Node::Gate(kind, ins) = n else { continue };
        if !live[i] {
            continue;
        }
        let mut pins = Vec::with_capacity(ins.len() + 1);
        for &w in ins {
            pins.push(match w {
                W::N(j) => net_of[j].expect("node emitted"),
                W::C(v) => konst(&mut b, v, None)?,
            });
        }
        let prefix = if kind.is_sequential() {
            pins.push(clk.expect("clock exists when registers do"));
            "r"
        } else {
            "g"
        };
        b.add_cell(&format!("{prefix}{i}"), *kind, pins, net_of[i].expect("node emitted"));
    }
    let fail_net = match (fail, fail_node) {
        (_, Some(i)) => net_of[i].expect("node emitted"),
        (W::C(v), _) => {
            let id = b.add_net("fail", Origin::Monitor)?;
            konst(&mut b, v, Some(id))?
        }
        (W::N(i), None) => {
            let id = b.add_net("fail", Origin::Monitor)?;
            b.add_cell("g_fail", CellKind::Buf, vec![net_of[i].expect("input emitted")], id);
            id
        }
    };
    b.mark_output(fail_net);
    let fragment = b.finish()?;
    Ok(MonitorCircuit {
        name: name.to_string(),
        fail: fail_net,
        fragment,
        clock: has_regs.then(|| clock.to_string()),
        bindings: g.bindings,
    })
}

/// Merges a monitor into a design.
///
/// Design nets keep their ids and names. Monitor nets and cells are renamed
/// `<monitor>.<name>`, marked as monitor logic, and `<monitor>.fail` becomes
/// a new primary output. Monitor inputs are replaced by the design nets they
/// observe, so the design's own behavior is untouched.
pub fn bind(design: &Netlist, m: &MonitorCircuit) -> Result<Netlist, MonitorError> {
    for (sig, bits) in &m.bindings {
        let design_bits: Vec<&str> = match design.bus(sig) {
            Some(bus) => bus.bits.iter().map(|&b| design.net_name(b)).collect(),
            None => match design.find_net(sig) {
                Some(id) if design.is_design_net(id) => vec![sig.as_str()],
                _ => return Err(MonitorError::Unresolved(sig.clone())),
            },
        };
        if design_bits.len() != bits.len() || design_bits.iter().zip(bits).any(|(a, b)| a != b) {
            return Err(MonitorError::Width { signal: sig.clone(), expected: design_bits.len(), got: bits.len() });
        }
    }

    let mut b = NetlistBuilder::from_netlist(design)?;
    let frag = &m.fragment;
    let prefixed = |s: &str| format!("{}.{s}", m.name);
    let mut map: Vec<Option<NetId>> = vec![None; frag.nets().len()];
    for &pi in frag.primary_inputs() {
        let name = frag.net_name(pi);
        let target = if Some(pi) == frag.clock() {
            match (design.clock(), design.find_net(name)) {
                (Some(c), _) if design.net_name(c) == name => c,
                (Some(c), _) => {
                    return Err(MonitorError::ClockMismatch {
                        assertion: name.to_string(),
                        design: design.net_name(c).to_string(),
                    })
                }
                (None, Some(id)) if design.primary_inputs().contains(&id) => id,
                (None, _) => {
                    let id = b.add_net(&prefixed(name), Origin::Monitor)?;
                    b.mark_input(id);
                    id
                }
            }
        } else {
            design.find_net(name).ok_or_else(|| MonitorError::Unresolved(name.to_string()))?
        };
        map[pi.index()] = Some(target);
    }
    for (i, net) in frag.nets().iter().enumerate() {
        if map[i].is_none() {
            map[i] = Some(b.add_net(&prefixed(&net.name), Origin::Monitor)?);
        }
    }
    let map = |id: NetId| map[id.index()].expect("every fragment net mapped");
    for c in frag.cells() {
        b.add_cell(&prefixed(&c.name), c.kind, c.inputs.iter().map(|&i| map(i)).collect(), map(c.output));
    }
    b.mark_output(map(m.fail));
    Ok(b.finish()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monitorgen::{parse_assertion_text, Constants};
    use crate::netlist::parse_netlist;

    fn compile(src: &str, shapes: &Shapes) -> MonitorCircuit {
        let consts = Constants::from([("OP_STORE".to_string(), vec![false, true, true, false])]);
        compile_to_monitor("m", &parse_assertion_text(src, &consts).unwrap(), shapes).unwrap()
    }

    #[test]
    fn constant_true_ties_fail_low() {
        let m = compile("assert always {1'b1};", &Shapes::new());
        assert_eq!(m.fragment.cells().len(), 1);
        assert_eq!(m.fragment.cells()[0].kind, CellKind::Const0);
        assert_eq!(m.fragment.net_name(m.fail), "fail");
        assert!(m.clock.is_none());
    }

    #[test]
    fn store_check_is_combinational() {
        let shapes = Shapes::from([("IR".to_string(), (0..4).rev().map(|i| format!("IR[{i}]")).collect())]);
        let m = compile("assert always {(!(IR == OP_STORE)) -> (!wr)};", &shapes);
        assert!(m.fragment.dffs().is_empty());
        assert_eq!(m.bindings["IR"].len(), 4);
        assert_eq!(m.fragment.primary_outputs(), &[m.fail]);
    }

    #[test]
    fn pulse_check_keeps_two_history_bits() {
        let m = compile("$rose(reg_we) |=> !(reg_we)", &Shapes::new());
        assert_eq!(m.fragment.dffs().len(), 2);
        assert_eq!(m.clock.as_deref(), Some("clk"));
    }

    #[test]
    fn bind_errors() {
        let d = parse_netlist("module d (clk, a, y); input clk, a; output y; dff r (y, a, clk); endmodule").unwrap();
        let m = compile("a -> missing", &Shapes::new());
        assert_eq!(bind(&d, &m), Err(MonitorError::Unresolved("missing".into())));
        let shapes = Shapes::from([("a".to_string(), vec!["a[1]".into(), "a[0]".into()])]);
        let m = compile("a == 2'b01", &shapes);
        assert!(matches!(bind(&d, &m), Err(MonitorError::Width { .. })));
        let m = compile("assert property (@(posedge other) $rose(a));", &Shapes::new());
        assert!(matches!(bind(&d, &m), Err(MonitorError::ClockMismatch { .. })));
    }

    #[test]
    fn bind_keeps_design_nodes() {
        let d = parse_netlist(
            "module d (clk, a, b, y); input clk, a, b; output y; wire n; and (n, a, b); dff r (y, n, clk); endmodule",
        )
        .unwrap();
        let m = compile("assert property (@(posedge clk) $rose(a) |=> b);", &shapes_of(&d));
        let merged = bind(&d, &m).unwrap();
        assert_eq!(merged.node_names(), d.node_names());
        assert_eq!(merged.clock(), d.clock());
        let fail = merged.find_net("m.fail").unwrap();
        assert!(merged.primary_outputs().contains(&fail));
        assert!(!merged.is_design_net(fail));
        // Binding a second copy under another name works; the same name clashes.
        let again = bind(&merged, &m);
        assert!(matches!(again, Err(MonitorError::Netlist(_))));
    }
}
