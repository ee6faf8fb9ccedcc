//! Assertion text to [`AssertionAst`].

use super::{AssertionAst, Constants, Expr, MonitorError, Property, Word};
use crate::netlist::parse_literal;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Sys(String),
    Lit(Vec<bool>),
    Op(&'static str),
}

/// Operators, longest first so that prefixes do not shadow them.
const OPS: [&str; 21] = [
    "===", "!==", "|->", "|=>", "->", "==", "!=", "&&", "||", "!", "~", "&", "|", "^", "(", ")", "{", "}", "[",
    "]", ";",
];

/// Constructs from the wider assertion languages that are recognized only to
/// be rejected by name.
const UNSUPPORTED: [&str; 14] = [
    "until", "until_with", "s_until", "eventually", "s_eventually", "nexttime", "s_nexttime", "next", "throughout",
    "within", "intersect", "first_match", "before", "abort",
];

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, MonitorError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '@' {
            out.push((col, Tok::Op("@")));
            i += 1;
            continue;
        }
        if c == '#' {
            return Err(MonitorError::Unsupported { col, construct: "cycle delay `##`".into() });
        }
        if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if let Some(sys) = word.strip_prefix('$') {
                out.push((col, Tok::Sys(sys.to_string())));
            } else {
                out.push((col, Tok::Ident(word)));
            }
            continue;
        }
        if c.is_ascii_digit() || c == '\'' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let bits = parse_literal(&text).map_err(|msg| MonitorError::Syntax { col, msg })?;
            out.push((col, Tok::Lit(bits)));
            continue;
        }
        for op in OPS {
            let n = op.len();
            if i + n <= chars.len() && chars[i..i + n].iter().copied().eq(op.chars()) {
                out.push((col, Tok::Op(op)));
                i += n;
                continue 'outer;
            }
        }
        return Err(MonitorError::Syntax { col, msg: format!("unexpected character `{c}`") });
    }
    Ok(out)
}

/// Untyped parse tree; typing into [`Expr`]/[`Word`] happens afterwards.
#[derive(Debug, Clone)]
enum Node {
    Ident(String),
    Lit(Vec<bool>),
    Not(Box<Node>),
    Bin(&'static str, Box<Node>, Box<Node>),
    Call(String, Box<Node>),
    Impl { next: bool, ante: Box<Node>, cons: Box<Node> },
    Paren(Box<Node>),
}

struct Parser<'c> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_col: usize,
    constants: &'c Constants,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(c, _)| *c)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, MonitorError> {
        Err(MonitorError::Syntax { col: self.col(), msg: msg.into() })
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Op(o)) if *o == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<(), MonitorError> {
        if self.eat_op(op) {
            Ok(())
        } else {
            self.err(format!("expected `{op}`"))
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(w)) if w == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, MonitorError> {
        match self.peek() {
            Some(Tok::Ident(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.err("expected identifier"),
        }
    }

    /// implication, lowest precedence, right associative
    fn property(&mut self) -> Result<Node, MonitorError> {
        let lhs = self.binary(0)?;
        let next = if self.eat_op("->") || self.eat_op("|->") {
            false
        } else if self.eat_op("|=>") {
            true
        } else {
            return Ok(lhs);
        };
        let rhs = self.property()?;
        Ok(Node::Impl { next, ante: Box::new(lhs), cons: Box::new(rhs) })
    }

    fn binary(&mut self, level: usize) -> Result<Node, MonitorError> {
        const LEVELS: [&[&str]; 6] = [&["||"], &["&&"], &["|"], &["^"], &["&"], &["==", "!=", "===", "!=="]];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let Some(&op) = LEVELS[level].iter().find(|&&op| matches!(self.peek(), Some(Tok::Op(o)) if *o == op))
            else {
                return Ok(lhs);
            };
            self.pos += 1;
            let rhs = self.binary(level + 1)?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, MonitorError> {
        if self.eat_op("!") || self.eat_op("~") {
            return Ok(Node::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Node, MonitorError> {
        let col = self.col();
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of assertion");
        };
        self.pos += 1;
        match tok {
            Tok::Op("(") => {
                let inner = self.property()?;
                self.expect_op(")")?;
                Ok(Node::Paren(Box::new(inner)))
            }
            Tok::Op("{") => {
                let inner = self.property()?;
                self.expect_op("}")?;
                Ok(Node::Paren(Box::new(inner)))
            }
            Tok::Lit(bits) => Ok(Node::Lit(bits)),
            Tok::Sys(name) => {
                if name != "rose" && name != "onehot0" {
                    return Err(MonitorError::Unsupported { col, construct: format!("${name}") });
                }
                self.expect_op("(")?;
                let arg = self.binary(0)?;
                self.expect_op(")")?;
                Ok(Node::Call(name, Box::new(arg)))
            }
            Tok::Ident(name) => {
                if UNSUPPORTED.contains(&name.as_str()) {
                    return Err(MonitorError::Unsupported { col, construct: name });
                }
                if self.eat_op("[") {
                    let idx = match self.peek() {
                        Some(Tok::Lit(bits)) => bits.iter().fold(0u64, |a, &b| a << 1 | u64::from(b)),
                        _ => return self.err("expected bit index"),
                    };
                    self.pos += 1;
                    if !self.eat_op("]") {
                        return Err(MonitorError::Unsupported { col, construct: "part select".into() });
                    }
                    return Ok(Node::Ident(format!("{name}[{idx}]")));
                }
                Ok(Node::Ident(name))
            }
            Tok::Op(op) => {
                self.pos -= 1;
                self.err(format!("unexpected `{op}`"))
            }
        }
    }

    fn expr(&self, n: &Node) -> Result<Expr, MonitorError> {
        Ok(match n {
            Node::Ident(name) => match self.constants.get(name) {
                Some(bits) => Expr::Const(bits.iter().any(|&b| b)),
                None => Expr::Bit(name.clone()),
            },
            Node::Lit(bits) => Expr::Const(bits.iter().any(|&b| b)),
            Node::Not(a) => Expr::Not(Box::new(self.expr(a)?)),
            Node::Paren(a) => self.expr(a)?,
            Node::Bin(op, a, b) => match *op {
                "||" | "|" => Expr::Or(Box::new(self.expr(a)?), Box::new(self.expr(b)?)),
                "&&" | "&" => Expr::And(Box::new(self.expr(a)?), Box::new(self.expr(b)?)),
                "^" => Expr::Xor(Box::new(self.expr(a)?), Box::new(self.expr(b)?)),
                "==" | "===" => Expr::Eq(self.word(a)?, self.word(b)?),
                _ => Expr::Not(Box::new(Expr::Eq(self.word(a)?, self.word(b)?))),
            },
            Node::Call(name, a) if name == "rose" => Expr::Rose(Box::new(self.expr(a)?)),
            Node::Call(_, a) => Expr::OneHot0(self.word(a)?),
            Node::Impl { .. } => {
                return Err(MonitorError::Unsupported {
                    col: self.end_col,
                    construct: "implication inside an expression".into(),
                })
            }
        })
    }

    fn word(&self, n: &Node) -> Result<Word, MonitorError> {
        Ok(match n {
            Node::Ident(name) => match self.constants.get(name) {
                Some(bits) => Word::Literal(bits.clone()),
                None => Word::Signal(name.clone()),
            },
            Node::Lit(bits) => Word::Literal(bits.clone()),
            Node::Paren(a) => self.word(a)?,
            other => Word::Bool(Box::new(self.expr(other)?)),
        })
    }

    fn lower(&self, mut n: &Node) -> Result<Property, MonitorError> {
        while let Node::Paren(inner) = n {
            n = inner;
        }
        Ok(match n {
            Node::Impl { next, ante, cons } => {
                Property::Implies { antecedent: self.expr(ante)?, consequent: self.expr(cons)?, next_cycle: *next }
            }
            other => Property::Holds(self.expr(other)?),
        })
    }
}

/// Parses one assertion in any of the accepted surface forms:
///
/// ```text
/// assert always {P -> Q};
/// assert property (@(posedge clk) disable iff (D) P |=> Q);
/// P |-> Q
/// ```
pub fn parse_assertion_text(src: &str, constants: &Constants) -> Result<AssertionAst, MonitorError> {
    if src.trim().is_empty() {
        return Err(MonitorError::Syntax { col: 1, msg: "empty assertion".into() });
    }
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, end_col: src.chars().count() + 1, constants };
    let mut clock = None;
    let mut disable = None;
    let node = if p.eat_kw("assert") {
        if p.eat_kw("always") {
            p.property()?
        } else if p.eat_kw("property") {
            p.expect_op("(")?;
            if p.eat_op("@") {
                p.expect_op("(")?;
                if !p.eat_kw("posedge") {
                    return p.err("only `posedge` clocking is supported");
                }
                clock = Some(p.ident()?);
                p.expect_op(")")?;
            }
            if p.eat_kw("disable") {
                if !p.eat_kw("iff") {
                    return p.err("expected `iff`");
                }
                p.expect_op("(")?;
                let d = p.binary(0)?;
                p.expect_op(")")?;
                disable = Some(p.expr(&d)?);
            }
            let body = p.property()?;
            p.expect_op(")")?;
            body
        } else {
            return p.err("expected `always` or `property`");
        }
    } else {
        p.property()?
    };
    p.eat_op(";");
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(AssertionAst { property: p.lower(&node)?, disable, clock })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> Constants {
        Constants::from([("OP_STORE".to_string(), vec![false, true, true, false])])
    }

    #[test]
    fn psl_implication() {
        let ast = parse_assertion_text("assert always {(!(IR == OP_STORE)) -> (!wr)};", &consts()).unwrap();
        let Property::Implies { antecedent, consequent, next_cycle: false } = ast.property else { panic!() };
        assert_eq!(
            antecedent,
            Expr::Not(Box::new(Expr::Eq(
                Word::Signal("IR".into()),
                Word::Literal(vec![false, true, true, false])
            )))
        );
        assert_eq!(consequent, Expr::Not(Box::new(Expr::Bit("wr".into()))));
    }

    #[test]
    fn constant_true() {
        let ast = parse_assertion_text("assert always {1'b1};", &consts()).unwrap();
        assert_eq!(ast.property, Property::Holds(Expr::Const(true)));
        assert_eq!(ast.disable, None);
    }

    #[test]
    fn sva_with_disable() {
        let src = "assert property (@(posedge clk_i) disable iff ((!rst_ni) !== 1'b0) $rose(reg_we) |=> !(reg_we));";
        let ast = parse_assertion_text(src, &consts()).unwrap();
        assert_eq!(ast.clock.as_deref(), Some("clk_i"));
        assert_eq!(
            ast.disable,
            Some(Expr::Not(Box::new(Expr::Eq(
                Word::Bool(Box::new(Expr::Not(Box::new(Expr::Bit("rst_ni".into()))))),
                Word::Literal(vec![false])
            ))))
        );
        assert_eq!(
            ast.property,
            Property::Implies {
                antecedent: Expr::Rose(Box::new(Expr::Bit("reg_we".into()))),
                consequent: Expr::Not(Box::new(Expr::Bit("reg_we".into()))),
                next_cycle: true,
            }
        );
    }

    #[test]
    fn parenthesized_property_and_onehot() {
        let src = "assert property (@(posedge clk_i) ((reg_we || reg_re) |-> $onehot0(addr_hit)));";
        let ast = parse_assertion_text(src, &consts()).unwrap();
        let Property::Implies { consequent, next_cycle: false, .. } = ast.property else { panic!() };
        assert_eq!(consequent, Expr::OneHot0(Word::Signal("addr_hit".into())));
    }

    #[test]
    fn bit_select() {
        let ast = parse_assertion_text("a[3] && !b", &consts()).unwrap();
        assert_eq!(
            ast.property,
            Property::Holds(Expr::And(
                Box::new(Expr::Bit("a[3]".into())),
                Box::new(Expr::Not(Box::new(Expr::Bit("b".into()))))
            ))
        );
    }

    #[test]
    fn rejects_with_location() {
        assert_eq!(
            parse_assertion_text("a |-> ##1 b", &consts()),
            Err(MonitorError::Unsupported { col: 7, construct: "cycle delay `##`".into() })
        );
        assert_eq!(
            parse_assertion_text("$past(a) -> b", &consts()),
            Err(MonitorError::Unsupported { col: 1, construct: "$past".into() })
        );
        assert!(matches!(
            parse_assertion_text("a && (b -> c)", &consts()),
            Err(MonitorError::Unsupported { .. })
        ));
        assert!(matches!(parse_assertion_text("a &&", &consts()), Err(MonitorError::Syntax { col: 5, .. })));
        assert!(matches!(parse_assertion_text("  ", &consts()), Err(MonitorError::Syntax { .. })));
        assert!(matches!(parse_assertion_text("a b", &consts()), Err(MonitorError::Syntax { col: 3, .. })));
    }
}
