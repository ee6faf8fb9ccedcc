//! Assertion monitors: parsing, reference semantics, compilation to gates,
//! and binding onto a design.
//!
//! The accepted language is small: an invariant, optionally an implication
//! `P -> Q` / `P |-> Q` (same cycle) or `P |=> Q` (next cycle), over boolean
//! operators, equality against constants, `$rose` and `$onehot0`, with an
//! optional `disable iff` condition. Values are two-valued, so `===` and `!==`
//! behave like `==` and `!=`.

mod compile;
mod parse;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{parse_literal, NetId, Netlist, NetlistError, Trace};

pub use compile::{bind, compile_to_monitor, shapes_of, MonitorCircuit, Shapes};
pub use parse::parse_assertion_text;

/// Named bit patterns, most significant bit first.
pub type Constants = BTreeMap<String, Vec<bool>>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonitorError {
    #[error("syntax error at column {col}: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("unsupported construct {construct} at column {col}")]
    Unsupported { col: usize, construct: String },
    #[error("assertion `{name}`: {source}")]
    InAssertion {
        name: String,
        #[source]
        source: Box<MonitorError>,
    },
    #[error("assertion file line {line}: {msg}")]
    File { line: usize, msg: String },
    #[error("signal `{name}` missing from trace at cycle {cycle}")]
    MissingSignal { cycle: usize, name: String },
    #[error("signal `{signal}` is {got} bits wide where {expected} expected")]
    Width { signal: String, expected: usize, got: usize },
    #[error("signal `{0}` does not name a design net or bus")]
    Unresolved(String),
    #[error("assertion clock `{assertion}` differs from design clock `{design}`")]
    ClockMismatch { assertion: String, design: String },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// Boolean-valued expression evaluated once per cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    Const(bool),
    /// A single-bit signal; `bus[i]` names one bus bit.
    Bit(String),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
    /// Equality after zero-extending the narrower side.
    Eq(Word, Word),
    /// Rising edge; false in the first cycle.
    Rose(Box<Expr>),
    /// At most one bit set.
    OneHot0(Word),
}

/// A bit-vector operand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Word {
    /// A bus or single-bit signal; width comes from the design or trace.
    Signal(String),
    /// Most significant bit first.
    Literal(Vec<bool>),
    Bool(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Property {
    /// `always P`
    Holds(Expr),
    /// `P -> Q` / `P |-> Q`, or `P |=> Q` when `next_cycle`.
    Implies { antecedent: Expr, consequent: Expr, next_cycle: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertionAst {
    pub property: Property,
    /// Cycles where this holds are not checked.
    pub disable: Option<Expr>,
    /// Clock named in the text, if any.
    pub clock: Option<String>,
}

impl Expr {
    fn visit_signals<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Const(_) => {}
            Expr::Bit(s) => {
                out.insert(s);
            }
            Expr::Not(a) | Expr::Rose(a) => a.visit_signals(out),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) => {
                a.visit_signals(out);
                b.visit_signals(out);
            }
            Expr::Eq(a, b) => {
                a.visit_signals(out);
                b.visit_signals(out);
            }
            Expr::OneHot0(w) => w.visit_signals(out),
        }
    }

    fn size(&self, width: &dyn Fn(&str) -> usize) -> usize {
        match self {
            Expr::Const(_) | Expr::Bit(_) => 1,
            Expr::Not(a) | Expr::Rose(a) => 1 + a.size(width),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) => 1 + a.size(width) + b.size(width),
            Expr::Eq(a, b) => 1 + a.size(width).max(b.size(width)) + a.size(width).min(b.size(width)),
            Expr::OneHot0(w) => {
                let n = w.size(width);
                1 + n + n * n.saturating_sub(1) / 2
            }
        }
    }
}

impl Word {
    fn visit_signals<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Word::Signal(s) => {
                out.insert(s);
            }
            Word::Literal(_) => {}
            Word::Bool(e) => e.visit_signals(out),
        }
    }

    fn size(&self, width: &dyn Fn(&str) -> usize) -> usize {
        match self {
            Word::Signal(s) => width(s),
            Word::Literal(b) => b.len(),
            Word::Bool(e) => e.size(width),
        }
    }
}

impl AssertionAst {
    /// Every signal name the assertion reads, sorted.
    pub fn signals(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        match &self.property {
            Property::Holds(p) => p.visit_signals(&mut out),
            Property::Implies { antecedent, consequent, .. } => {
                antecedent.visit_signals(&mut out);
                consequent.visit_signals(&mut out);
            }
        }
        if let Some(d) = &self.disable {
            d.visit_signals(&mut out);
        }
        out
    }

    /// Node count with bus operands weighted by width and `$onehot0` by the
    /// number of bit pairs.
    pub fn size(&self, width: &dyn Fn(&str) -> usize) -> usize {
        let body = match &self.property {
            Property::Holds(p) => p.size(width),
            Property::Implies { antecedent, consequent, .. } => 1 + antecedent.size(width) + consequent.size(width),
        };
        body + self.disable.as_ref().map_or(0, |d| 1 + d.size(width))
    }
}

/// One assertion as listed in an assertion file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertionSpec {
    pub name: String,
    pub source: String,
    pub clock: String,
    /// Extra `disable iff` condition, combined with any in `source`.
    pub disable: Option<String>,
}

/// Parses `spec.source` and folds in the file-level clock and disable.
pub fn parse_assertion(spec: &AssertionSpec, constants: &Constants) -> Result<AssertionAst, MonitorError> {
    let wrap = |e: MonitorError| MonitorError::InAssertion { name: spec.name.clone(), source: Box::new(e) };
    let mut ast = parse_assertion_text(&spec.source, constants).map_err(wrap)?;
    if let Some(text) = &spec.disable {
        let extra = parse_assertion_text(text, constants).map_err(wrap)?;
        let Property::Holds(d) = extra.property else {
            return Err(wrap(MonitorError::Unsupported { col: 1, construct: "implication in disable".into() }));
        };
        ast.disable = Some(match ast.disable.take() {
            Some(prev) => Expr::Or(Box::new(prev), Box::new(d)),
            None => d,
        });
    }
    match &ast.clock {
        Some(c) if *c != spec.clock => {
            return Err(wrap(MonitorError::ClockMismatch { assertion: c.clone(), design: spec.clock.clone() }))
        }
        _ => ast.clock = Some(spec.clock.clone()),
    }
    Ok(ast)
}

/// Parsed assertion file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssertionFile {
    pub constants: Constants,
    pub assertions: Vec<AssertionSpec>,
}

/// Reads the assertion file format:
///
/// ```text
/// [constants]
/// OP_STORE = 4'b0110
/// [assertions]
/// asr_1: assert always {(!(IR == OP_STORE)) -> (!wr)}; @clock clk disable !rst_n
/// ```
///
/// `#` starts a comment. The `disable` clause is optional.
pub fn parse_assertion_file(text: &str) -> Result<AssertionFile, MonitorError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Constants,
        Assertions,
    }
    let mut section = Section::None;
    let mut file = AssertionFile::default();
    let mut names = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| MonitorError::File { line: line_no, msg };
        let line = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "[constants]" => section = Section::Constants,
            "[assertions]" => section = Section::Assertions,
            _ if section == Section::Constants => {
                let (name, value) = line.split_once('=').ok_or_else(|| err("expected `NAME = literal`".into()))?;
                let bits = parse_literal(value.trim()).map_err(err)?;
                file.constants.insert(name.trim().to_string(), bits);
            }
            _ if section == Section::Assertions => {
                let (name, rest) = line.split_once(':').ok_or_else(|| err("expected `name: assertion`".into()))?;
                let name = name.trim();
                if name.is_empty() || !names.insert(name.to_string()) {
                    return Err(err(format!("missing or duplicate assertion name `{name}`")));
                }
                let (source, tail) =
                    rest.split_once("@clock").ok_or_else(|| err("missing `@clock <signal>`".into()))?;
                let tail = tail.trim();
                let (clock, disable) = match tail.split_once(char::is_whitespace) {
                    Some((clk, more)) => {
                        let more = more.trim();
                        let d = more.strip_prefix("disable").ok_or_else(|| err(format!("unexpected `{more}`")))?;
                        (clk, Some(d.trim().to_string()))
                    }
                    None => (tail, None),
                };
                if clock.is_empty() {
                    return Err(err("missing clock name".into()));
                }
                file.assertions.push(AssertionSpec {
                    name: name.to_string(),
                    source: source.trim().to_string(),
                    clock: clock.to_string(),
                    disable,
                });
            }
            _ => return Err(err("content outside a section".into())),
        }
    }
    Ok(file)
}

/// Per-cycle outcome of checking an assertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Disabled,
}

/// One map per cycle from signal name to its value, most significant bit first.
pub type SignalTrace = [BTreeMap<String, Vec<bool>>];

struct Interp<'a> {
    trace: &'a SignalTrace,
}

impl Interp<'_> {
    fn signal(&self, name: &str, t: usize) -> Result<&[bool], MonitorError> {
        self.trace[t]
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| MonitorError::MissingSignal { cycle: t, name: name.to_string() })
    }

    fn word(&self, w: &Word, t: usize) -> Result<Vec<bool>, MonitorError> {
        Ok(match w {
            Word::Signal(s) => self.signal(s, t)?.to_vec(),
            Word::Literal(b) => b.clone(),
            Word::Bool(e) => vec![self.eval(e, t)?],
        })
    }

    fn eval(&self, e: &Expr, t: usize) -> Result<bool, MonitorError> {
        Ok(match e {
            Expr::Const(b) => *b,
            Expr::Bit(s) => match self.signal(s, t)? {
                [b] => *b,
                v => return Err(MonitorError::Width { signal: s.clone(), expected: 1, got: v.len() }),
            },
            Expr::Not(a) => !self.eval(a, t)?,
            Expr::And(a, b) => self.eval(a, t)? & self.eval(b, t)?,
            Expr::Or(a, b) => self.eval(a, t)? | self.eval(b, t)?,
            Expr::Xor(a, b) => self.eval(a, t)? ^ self.eval(b, t)?,
            Expr::Eq(a, b) => {
                let (a, b) = (self.word(a, t)?, self.word(b, t)?);
                let w = a.len().max(b.len());
                let bit = |v: &[bool], i: usize| i < v.len() && v[v.len() - 1 - i];
                (0..w).all(|i| bit(&a, i) == bit(&b, i))
            }
            Expr::Rose(a) => {
                let now = self.eval(a, t)?;
                t > 0 && now && !self.eval(a, t - 1)?
            }
            Expr::OneHot0(w) => self.word(w, t)?.iter().filter(|&&b| b).count() <= 1,
        })
    }
}

/// Reference semantics, one verdict per trace cycle.
///
/// A cycle whose disable condition holds is `Disabled`. Otherwise an
/// invariant fails when `P` is false; a same-cycle implication fails when
/// `P ∧ ¬Q`; a next-cycle implication fails at `t > 0` when `P` held at
/// `t - 1` and `Q` is false at `t`.
pub fn interpret(ast: &AssertionAst, trace: &SignalTrace) -> Result<Vec<Verdict>, MonitorError> {
    let it = Interp { trace };
    let mut out = Vec::with_capacity(trace.len());
    for t in 0..trace.len() {
        let disabled = match &ast.disable {
            Some(d) => it.eval(d, t)?,
            None => false,
        };
        let violated = match &ast.property {
            Property::Holds(p) => !it.eval(p, t)?,
            Property::Implies { antecedent, consequent, next_cycle: false } => {
                it.eval(antecedent, t)? && !it.eval(consequent, t)?
            }
            Property::Implies { antecedent, consequent, next_cycle: true } => {
                t > 0 && it.eval(antecedent, t - 1)? && !it.eval(consequent, t)?
            }
        };
        out.push(if disabled {
            Verdict::Disabled
        } else if violated {
            Verdict::Fail
        } else {
            Verdict::Pass
        });
    }
    Ok(out)
}

/// Values of every signal `m` observes, per cycle, read from a simulation of
/// `n` (the design, the bound design, or the fragment itself).
pub fn observe(n: &Netlist, trace: &Trace, m: &MonitorCircuit) -> Result<Vec<BTreeMap<String, Vec<bool>>>, MonitorError> {
    let mut ids: Vec<(&str, Vec<NetId>)> = Vec::new();
    for (sig, bits) in &m.bindings {
        let nets = bits
            .iter()
            .map(|b| n.find_net(b).ok_or_else(|| MonitorError::Unresolved(b.clone())))
            .collect::<Result<_, _>>()?;
        ids.push((sig, nets));
    }
    Ok((0..trace.len())
        .map(|t| ids.iter().map(|(s, nets)| (s.to_string(), nets.iter().map(|&i| trace.value(t, i)).collect())).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(cols: &[(&str, &[u8])]) -> Vec<BTreeMap<String, Vec<bool>>> {
        let len = cols[0].1.len();
        (0..len)
            .map(|t| cols.iter().map(|(n, v)| (n.to_string(), vec![v[t] == 1])).collect())
            .collect()
    }

    #[test]
    fn we_pulse_fails_on_held_write() {
        let ast = parse_assertion_text(
            "assert property (@(posedge clk_i) disable iff ((!rst_ni) !== 1'b0) $rose(reg_we) |=> !(reg_we));",
            &Constants::new(),
        )
        .unwrap();
        let tr = trace(&[("reg_we", &[0, 1, 1]), ("rst_ni", &[1, 1, 1])]);
        assert_eq!(interpret(&ast, &tr).unwrap(), vec![Verdict::Pass, Verdict::Pass, Verdict::Fail]);
        let tr = trace(&[("reg_we", &[0, 1, 1]), ("rst_ni", &[1, 1, 0])]);
        assert_eq!(interpret(&ast, &tr).unwrap()[2], Verdict::Disabled);
        // No rise at cycle 0 even when the signal starts high.
        let tr = trace(&[("reg_we", &[1, 1, 0]), ("rst_ni", &[1, 1, 1])]);
        assert_eq!(interpret(&ast, &tr).unwrap(), vec![Verdict::Pass; 3]);
    }

    #[test]
    fn implication_violation_at_cycle() {
        let consts = Constants::from([("OP_STORE".to_string(), vec![false, true, true, false])]);
        let ast = parse_assertion_text("assert always {(!(IR == OP_STORE)) -> (!wr)};", &consts).unwrap();
        let mut tr: Vec<BTreeMap<String, Vec<bool>>> = (0..8)
            .map(|_| BTreeMap::from([("IR".into(), vec![false, true, true, false]), ("wr".into(), vec![true])]))
            .collect();
        tr[5].insert("IR".into(), vec![false, false, false, true]);
        let v = interpret(&ast, &tr).unwrap();
        assert_eq!(v.iter().position(|&x| x == Verdict::Fail), Some(5));
        assert_eq!(v.iter().filter(|&&x| x == Verdict::Fail).count(), 1);
    }

    #[test]
    fn onehot_never_fails_when_one_hot() {
        let ast = parse_assertion_text("(reg_we || reg_re) |-> $onehot0(addr_hit)", &Constants::new()).unwrap();
        let tr: Vec<_> = (0..4)
            .map(|t| {
                let hit: Vec<bool> = (0..4).map(|i| i == t).collect();
                BTreeMap::from([("addr_hit".into(), hit), ("reg_we".into(), vec![true]), ("reg_re".into(), vec![false])])
            })
            .collect();
        assert!(interpret(&ast, &tr).unwrap().iter().all(|&v| v == Verdict::Pass));
    }

    #[test]
    fn missing_signal() {
        let ast = parse_assertion_text("a -> b", &Constants::new()).unwrap();
        let tr = trace(&[("a", &[1])]);
        assert_eq!(interpret(&ast, &tr), Err(MonitorError::MissingSignal { cycle: 0, name: "b".into() }));
    }

    #[test]
    fn equality_zero_extends() {
        let ast = parse_assertion_text("x == 3", &Constants::new()).unwrap();
        let tr = vec![BTreeMap::from([("x".to_string(), vec![false, false, true, true])])];
        assert_eq!(interpret(&ast, &tr).unwrap(), vec![Verdict::Pass]);
    }

    #[test]
    fn assertion_file() {
        let text = "# sample\n[constants]\nOP_STORE = 4'b0110\n[assertions]\n\
                    asr_1: assert always {(!(IR == OP_STORE)) -> (!wr)}; @clock clk disable !rst_n\n\
                    c: 1'b1 @clock clk\n";
        let f = parse_assertion_file(text).unwrap();
        assert_eq!(f.constants["OP_STORE"], vec![false, true, true, false]);
        assert_eq!(f.assertions.len(), 2);
        assert_eq!(f.assertions[0].disable.as_deref(), Some("!rst_n"));
        assert_eq!(f.assertions[1].source, "1'b1");
        let ast = parse_assertion(&f.assertions[0], &f.constants).unwrap();
        assert_eq!(ast.disable, Some(Expr::Not(Box::new(Expr::Bit("rst_n".into())))));
        assert_eq!(ast.signals().into_iter().collect::<Vec<_>>(), vec!["IR", "rst_n", "wr"]);

        assert!(matches!(parse_assertion_file("a: b\n"), Err(MonitorError::File { line: 1, .. })));
        assert!(matches!(
            parse_assertion_file("[assertions]\na: b\n"),
            Err(MonitorError::File { line: 2, .. })
        ));
        assert!(matches!(
            parse_assertion_file("[assertions]\na: b @clock c\na: b @clock c\n"),
            Err(MonitorError::File { line: 3, .. })
        ));
    }

    #[test]
    fn clock_mismatch_is_reported() {
        let spec = AssertionSpec {
            name: "x".into(),
            source: "assert property (@(posedge a) b);".into(),
            clock: "clk".into(),
            disable: None,
        };
        assert!(matches!(
            parse_assertion(&spec, &Constants::new()),
            Err(MonitorError::InAssertion { .. })
        ));
    }
}
