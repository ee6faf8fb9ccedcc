//! Reader for the structural netlist subset.
//!
//! ```text
//! module top (a, b, clk, y);
//!   input a, b, clk;
//!   input [3:0] bus;
//!   output y;
//!   wire n1;
//!   (* monitor *) wire chk.n0;
//!   not g0 (n1, a);
//!   and (y, n1, bus[2]);
//!   dff r0 (q, d, clk, rstn, 1'b0);
//! endmodule
//! ```
//!
//! Instance names are optional. Buses are bit-blasted into nets named
//! `bus[i]`. The `(* monitor *)` attribute marks declarations that belong to
//! bound checker logic.

use super::{CellKind, NetId, NetlistBuilder, NetlistError, Origin};
use crate::netlist::Netlist;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    /// Sized or based literal, reduced to its bits (msb first).
    Literal(Vec<bool>),
    Punct(char),
    AttrOpen,
    AttrClose,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> NetlistError {
    NetlistError::Syntax { line, col, msg: msg.into() }
}

fn lex(src: &str) -> Result<Vec<Token>, NetlistError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize| {
        let c = chars[*i];
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col);
            advance(&mut i, &mut line, &mut col);
            loop {
                if i >= chars.len() {
                    return Err(syntax(tl, tc, "unterminated block comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance(&mut i, &mut line, &mut col);
                    advance(&mut i, &mut line, &mut col);
                    break;
                }
                advance(&mut i, &mut line, &mut col);
            }
            continue;
        }
        if c == '(' && chars.get(i + 1) == Some(&'*') && chars.get(i + 2) != Some(&')') {
            advance(&mut i, &mut line, &mut col);
            advance(&mut i, &mut line, &mut col);
            out.push(Token { tok: Tok::AttrOpen, line: tl, col: tc });
            continue;
        }
        if c == '*' && chars.get(i + 1) == Some(&')') {
            advance(&mut i, &mut line, &mut col);
            advance(&mut i, &mut line, &mut col);
            out.push(Token { tok: Tok::AttrClose, line: tl, col: tc });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' || c == '\\' {
            let mut s = String::new();
            if c == '\\' {
                // Escaped identifier: runs to the next whitespace.
                advance(&mut i, &mut line, &mut col);
                while i < chars.len() && !chars[i].is_whitespace() {
                    s.push(chars[i]);
                    advance(&mut i, &mut line, &mut col);
                }
            } else {
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '_' | '$' | '.'))
                {
                    s.push(chars[i]);
                    advance(&mut i, &mut line, &mut col);
                }
            }
            out.push(Token { tok: Tok::Ident(s), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() || c == '\'' {
            let mut text = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '\'' | '_')) {
                text.push(chars[i]);
                advance(&mut i, &mut line, &mut col);
            }
            let tok = if text.contains('\'') {
                let bits = parse_literal(&text).map_err(|m| syntax(tl, tc, m))?;
                Tok::Literal(bits)
            } else {
                Tok::Int(text.replace('_', "").parse().map_err(|_| syntax(tl, tc, format!("bad number `{text}`")))?)
            };
            out.push(Token { tok, line: tl, col: tc });
            continue;
        }
        if "()[]:;,".contains(c) {
            advance(&mut i, &mut line, &mut col);
            out.push(Token { tok: Tok::Punct(c), line: tl, col: tc });
            continue;
        }
        return Err(syntax(tl, tc, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

/// Parses a Verilog-style literal (`1'b0`, `4'hA`, `'d3`, `8'b0101_0011`)
/// into bits, most significant first. Unsized literals use the minimal width
/// (at least one bit).
pub fn parse_literal(text: &str) -> Result<Vec<bool>, String> {
    let text = text.replace('_', "");
    let Some((size, rest)) = text.split_once('\'') else {
        let v: u128 = text.parse().map_err(|_| format!("bad literal `{text}`"))?;
        return Ok(to_bits(v, None));
    };
    let mut rest = rest.chars();
    let base = rest.next().ok_or_else(|| format!("literal `{text}` lacks a base"))?;
    let digits: String = rest.collect();
    let radix = match base.to_ascii_lowercase() {
        'b' => 2,
        'o' => 8,
        'd' => 10,
        'h' => 16,
        _ => return Err(format!("unknown base `{base}` in `{text}`")),
    };
    if digits.is_empty() {
        return Err(format!("literal `{text}` has no digits"));
    }
    let v = u128::from_str_radix(&digits, radix).map_err(|_| format!("bad digits in `{text}`"))?;
    let width = if size.is_empty() {
        None
    } else {
        let w: usize = size.parse().map_err(|_| format!("bad size in `{text}`"))?;
        if w == 0 || w > 128 {
            return Err(format!("unsupported width {w} in `{text}`"));
        }
        if w < 128 && v >> w != 0 {
            return Err(format!("value does not fit in {w} bits in `{text}`"));
        }
        Some(w)
    };
    Ok(to_bits(v, width))
}

fn to_bits(v: u128, width: Option<usize>) -> Vec<bool> {
    let w = width.unwrap_or_else(|| (128 - v.leading_zeros() as usize).max(1));
    (0..w).rev().map(|i| (v >> i) & 1 == 1).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    Input,
    Output,
    Wire,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    b: NetlistBuilder,
    /// Scalar or bus shape per declared name.
    shapes: std::collections::HashMap<String, Shape>,
}

#[derive(Clone)]
enum Shape {
    Scalar(NetId),
    Bus { msb: i64, lsb: i64, bits: Vec<NetId> },
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or_else(|| self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        }
    }

    fn err(&self, msg: impl Into<String>) -> NetlistError {
        let (l, c) = self.here();
        syntax(l, c, msg)
    }

    fn next(&mut self) -> Result<Token, NetlistError> {
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| self.err("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_punct(&mut self, p: char) -> Result<(), NetlistError> {
        let t = self.next()?;
        if t.tok == Tok::Punct(p) {
            Ok(())
        } else {
            Err(syntax(t.line, t.col, format!("expected `{p}`, found {}", describe(&t.tok))))
        }
    }

    fn eat_punct(&mut self, p: char) -> bool {
        if self.peek().map(|t| &t.tok) == Some(&Tok::Punct(p)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), NetlistError> {
        let t = self.next()?;
        match t.tok {
            Tok::Ident(s) => Ok((s, t.line, t.col)),
            other => Err(syntax(t.line, t.col, format!("expected identifier, found {}", describe(&other)))),
        }
    }

    fn int(&mut self) -> Result<i64, NetlistError> {
        let t = self.next()?;
        match t.tok {
            Tok::Int(v) => Ok(v),
            other => Err(syntax(t.line, t.col, format!("expected integer, found {}", describe(&other)))),
        }
    }

    fn module(&mut self) -> Result<(), NetlistError> {
        let (kw, l, c) = self.ident()?;
        if kw != "module" {
            return Err(syntax(l, c, format!("expected `module`, found `{kw}`")));
        }
        let (name, _, _) = self.ident()?;
        self.b = NetlistBuilder::new(&name);
        if self.eat_punct('(') && !self.eat_punct(')') {
            loop {
                self.ident()?;
                if self.eat_punct(')') {
                    break;
                }
                self.expect_punct(',')?;
            }
        }
        self.expect_punct(';')?;
        loop {
            let t = self.peek().cloned().ok_or_else(|| self.err("missing `endmodule`"))?;
            match &t.tok {
                Tok::Ident(kw) if kw == "endmodule" => {
                    self.pos += 1;
                    break;
                }
                Tok::AttrOpen => {
                    self.pos += 1;
                    let (attr, l, c) = self.ident()?;
                    if attr != "monitor" {
                        return Err(syntax(l, c, format!("unknown attribute `{attr}`")));
                    }
                    let t = self.next()?;
                    if t.tok != Tok::AttrClose {
                        return Err(syntax(t.line, t.col, "expected `*)`"));
                    }
                    self.declaration(Origin::Monitor)?;
                }
                Tok::Ident(kw) if matches!(kw.as_str(), "input" | "output" | "wire") => {
                    self.declaration(Origin::Design)?;
                }
                Tok::Ident(_) => self.instance()?,
                other => return Err(syntax(t.line, t.col, format!("unexpected {}", describe(other)))),
            }
        }
        if let Some(t) = self.peek() {
            return Err(syntax(t.line, t.col, "trailing input after `endmodule`"));
        }
        Ok(())
    }

    fn declaration(&mut self, origin: Origin) -> Result<(), NetlistError> {
        let (kw, l, c) = self.ident()?;
        let dir = match kw.as_str() {
            "input" => Dir::Input,
            "output" => Dir::Output,
            "wire" => Dir::Wire,
            _ => return Err(syntax(l, c, format!("expected a declaration, found `{kw}`"))),
        };
        let range = if self.eat_punct('[') {
            let msb = self.int()?;
            self.expect_punct(':')?;
            let lsb = self.int()?;
            self.expect_punct(']')?;
            Some((msb, lsb))
        } else {
            None
        };
        loop {
            let (name, l, c) = self.ident()?;
            self.declare(&name, range, dir, origin, l, c)?;
            if self.eat_punct(';') {
                break;
            }
            self.expect_punct(',')?;
        }
        Ok(())
    }

    fn declare(
        &mut self,
        name: &str,
        range: Option<(i64, i64)>,
        dir: Dir,
        origin: Origin,
        line: usize,
        col: usize,
    ) -> Result<(), NetlistError> {
        if let Some(existing) = self.shapes.get(name) {
            // `output y; wire y;` is legal Verilog; anything else is a redeclaration.
            let same_shape = match (existing, range) {
                (Shape::Scalar(_), None) => true,
                (Shape::Bus { msb, lsb, .. }, Some((m, l))) => *msb == m && *lsb == l,
                _ => false,
            };
            if dir == Dir::Wire && same_shape {
                return Ok(());
            }
            return Err(syntax(line, col, format!("`{name}` is declared twice")));
        }
        let ids = match range {
            None => {
                let id = self.b.add_net(name, origin).map_err(|e| syntax(line, col, e.to_string()))?;
                self.shapes.insert(name.to_string(), Shape::Scalar(id));
                vec![id]
            }
            Some((msb, lsb)) => {
                let idx: Vec<i64> = if msb >= lsb { (lsb..=msb).rev().collect() } else { (msb..=lsb).collect() };
                let mut bits = Vec::with_capacity(idx.len());
                for i in idx {
                    let bit = format!("{name}[{i}]");
                    bits.push(self.b.add_net(&bit, origin).map_err(|e| syntax(line, col, e.to_string()))?);
                }
                self.b.declare_bus(name, msb, lsb, bits.clone());
                self.shapes.insert(name.to_string(), Shape::Bus { msb, lsb, bits: bits.clone() });
                bits
            }
        };
        for id in ids {
            match dir {
                Dir::Input => self.b.mark_input(id),
                Dir::Output => self.b.mark_output(id),
                Dir::Wire => {}
            }
        }
        Ok(())
    }

    fn net_ref(&mut self) -> Result<NetId, NetlistError> {
        let (name, l, c) = self.ident()?;
        let shape = self
            .shapes
            .get(&name)
            .cloned()
            .ok_or_else(|| NetlistError::Undeclared { line: l, col: c, name: name.clone() })?;
        if self.eat_punct('[') {
            let i = self.int()?;
            self.expect_punct(']')?;
            match shape {
                Shape::Bus { msb, lsb, bits } => {
                    let (hi, lo) = (msb.max(lsb), msb.min(lsb));
                    if i < lo || i > hi {
                        return Err(NetlistError::Undeclared { line: l, col: c, name: format!("{name}[{i}]") });
                    }
                    let offset = if msb >= lsb { msb - i } else { i - msb };
                    Ok(bits[offset as usize])
                }
                Shape::Scalar(_) => Err(syntax(l, c, format!("`{name}` is not a bus"))),
            }
        } else {
            match shape {
                Shape::Scalar(id) => Ok(id),
                Shape::Bus { .. } => Err(syntax(l, c, format!("bus `{name}` used where a single bit is expected"))),
            }
        }
    }

    fn instance(&mut self) -> Result<(), NetlistError> {
        let (kw, l, c) = self.ident()?;
        let mut kind = CellKind::from_keyword(&kw)
            .ok_or_else(|| NetlistError::UnknownPrimitive { line: l, col: c, name: kw.clone() })?;
        let name = match self.peek().map(|t| &t.tok) {
            Some(Tok::Ident(_)) => self.ident()?.0,
            _ => format!("_{}{}", kw, self.b.cell_count()),
        };
        self.expect_punct('(')?;
        let mut pins = Vec::new();
        let mut literal: Option<(Vec<bool>, usize, usize)> = None;
        loop {
            let t = self.peek().cloned().ok_or_else(|| self.err("unexpected end of input"))?;
            if let Tok::Literal(bits) = &t.tok {
                if literal.is_some() {
                    return Err(syntax(t.line, t.col, "only one literal (the register reset value) is allowed"));
                }
                self.pos += 1;
                literal = Some((bits.clone(), t.line, t.col));
            } else {
                if literal.is_some() {
                    return Err(syntax(t.line, t.col, "the reset value must be the last connection"));
                }
                pins.push(self.net_ref()?);
            }
            if self.eat_punct(')') {
                break;
            }
            self.expect_punct(',')?;
        }
        self.expect_punct(';')?;
        if pins.is_empty() {
            return Err(syntax(l, c, format!("`{kw}` instance has no output connection")));
        }
        if let Some((bits, ll, lc)) = literal {
            if !matches!(kind, CellKind::Dff { .. }) {
                return Err(syntax(ll, lc, "literal connections are only allowed as a register reset value"));
            }
            if bits.len() != 1 {
                return Err(syntax(ll, lc, "reset value must be one bit"));
            }
            kind = CellKind::Dff { reset_value: bits[0] };
        }
        let output = pins.remove(0);
        self.b.add_cell(&name, kind, pins, output);
        Ok(())
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Literal(_) => "a literal".into(),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::AttrOpen => "`(*`".into(),
        Tok::AttrClose => "`*)`".into(),
    }
}

/// Parses and elaborates a structural netlist.
pub fn parse_netlist(text: &str) -> Result<Netlist, NetlistError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, b: NetlistBuilder::new(""), shapes: Default::default() };
    p.module()?;
    p.b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        assert_eq!(parse_literal("1'b0").unwrap(), vec![false]);
        assert_eq!(parse_literal("4'b0101").unwrap(), vec![false, true, false, true]);
        assert_eq!(parse_literal("4'hA").unwrap(), vec![true, false, true, false]);
        assert_eq!(parse_literal("8'd5").unwrap().len(), 8);
        assert_eq!(parse_literal("'b11").unwrap(), vec![true, true]);
        assert_eq!(parse_literal("6").unwrap(), vec![true, true, false]);
        assert!(parse_literal("2'b111").is_err());
        assert!(parse_literal("4'q1").is_err());
    }

    #[test]
    fn two_cell_example() {
        let n = parse_netlist(
            "module m (a, b, y);\n input a, b;\n output y;\n wire n1;\n not(n1,a); and(y,n1,b);\nendmodule\n",
        )
        .unwrap();
        assert_eq!(n.cells().len(), 2);
        assert_eq!(n.nets().len(), 4);
        assert_eq!(n.node_names(), ["a", "b", "n1", "y"]);
    }

    #[test]
    fn multiple_drivers() {
        let err = parse_netlist(
            "module m (a,b,c,d,y); input a,b,c,d; output y; and(y,a,b); or(y,c,d); endmodule",
        )
        .unwrap_err();
        assert_eq!(err, NetlistError::MultipleDrivers("y".into()));
    }

    #[test]
    fn unknown_primitive_has_location() {
        let err = parse_netlist("module m (a, y);\ninput a; output y;\n  frob g (y, a);\nendmodule").unwrap_err();
        assert_eq!(err, NetlistError::UnknownPrimitive { line: 3, col: 3, name: "frob".into() });
    }

    #[test]
    fn undeclared_reference() {
        let err = parse_netlist("module m (a, y); input a; output y; not (y, q); endmodule").unwrap_err();
        assert!(matches!(err, NetlistError::Undeclared { ref name, .. } if name == "q"));
    }

    #[test]
    fn bus_bits_and_bad_bus_use() {
        let n = parse_netlist(
            "module m (d, y); input [3:0] d; output [1:0] y; and (y[1], d[3], d[0]); buf (y[0], d[2]); endmodule",
        )
        .unwrap();
        let bus = n.bus("d").unwrap();
        assert_eq!(bus.width(), 4);
        assert_eq!(n.net_name(bus.bits[0]), "d[3]");
        assert!(parse_netlist("module m (d, y); input [3:0] d; output y; buf (y, d); endmodule").is_err());
        assert!(matches!(
            parse_netlist("module m (d, y); input [3:0] d; output y; buf (y, d[7]); endmodule"),
            Err(NetlistError::Undeclared { .. })
        ));
    }

    #[test]
    fn dff_forms() {
        let n = parse_netlist(
            "module m (clk, rstn, d, q1, q2, q3);\ninput clk, rstn, d; output q1, q2, q3;\n\
             dff r1 (q1, d, clk);\ndff r2 (q2, d, clk, rstn, 1'b1);\ndff r3 (q3, d, clk, 1'b1);\nendmodule",
        )
        .unwrap();
        assert_eq!(n.cells()[0].kind, CellKind::Dff { reset_value: false });
        assert_eq!(n.cells()[1].kind, CellKind::Dff { reset_value: true });
        assert_eq!(n.cells()[1].inputs.len(), 3);
        assert_eq!(n.cells()[2].inputs.len(), 2);
        assert_eq!(n.reset(), n.find_net("rstn"));
        assert_eq!(n.node_names(), ["d", "q1", "q2", "q3"]);
    }

    #[test]
    fn syntax_error_location() {
        let err = parse_netlist("module m (a);\ninput a\nendmodule").unwrap_err();
        match err {
            NetlistError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_and_monitor_attribute() {
        let n = parse_netlist(
            "// header\nmodule m (a, y, f); /* block\n comment */ input a; output y;\n\
             (* monitor *) output f;\nbuf (y, a); not (f, a);\nendmodule",
        )
        .unwrap();
        assert_eq!(n.net(n.find_net("f").unwrap()).origin, Origin::Monitor);
        assert_eq!(n.node_names(), ["a", "y"]);
    }
}
