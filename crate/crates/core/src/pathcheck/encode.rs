//! Tseitin encoding of unrolled netlist copies with on-the-fly constant
//! folding.

use crate::netlist::{CellKind, NetId, Netlist};
use crate::sat::{Lit, Solver};

/// A signal in the unrolled circuit: a known constant or a solver literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sig {
    Const(bool),
    Lit(Lit),
}

impl std::ops::Not for Sig {
    type Output = Sig;
    fn not(self) -> Sig {
        match self {
            Sig::Const(b) => Sig::Const(!b),
            Sig::Lit(l) => Sig::Lit(!l),
        }
    }
}

impl Sig {
    pub(crate) fn eval(self, model: &[bool]) -> bool {
        match self {
            Sig::Const(b) => b,
            Sig::Lit(l) => model[l.var().index()] != l.is_negative(),
        }
    }
}

pub(crate) struct Encoder {
    pub(crate) solver: Solver,
}

impl Encoder {
    pub(crate) fn new() -> Self {
        Encoder { solver: Solver::new() }
    }

    pub(crate) fn fresh(&mut self) -> Sig {
        Sig::Lit(self.solver.new_var().pos())
    }

    pub(crate) fn and(&mut self, a: Sig, b: Sig) -> Sig {
        match (a, b) {
            (Sig::Const(false), _) | (_, Sig::Const(false)) => Sig::Const(false),
            (Sig::Const(true), x) | (x, Sig::Const(true)) => x,
            (Sig::Lit(x), Sig::Lit(y)) => {
                if x == y {
                    return a;
                }
                if x == !y {
                    return Sig::Const(false);
                }
                let o = self.solver.new_var().pos();
                self.solver.add_clause(&[!o, x]);
                self.solver.add_clause(&[!o, y]);
                self.solver.add_clause(&[o, !x, !y]);
                Sig::Lit(o)
            }
        }
    }

    pub(crate) fn or(&mut self, a: Sig, b: Sig) -> Sig {
        !self.and(!a, !b)
    }

    pub(crate) fn xor(&mut self, a: Sig, b: Sig) -> Sig {
        match (a, b) {
            (Sig::Const(p), Sig::Const(q)) => Sig::Const(p ^ q),
            (Sig::Const(p), x) | (x, Sig::Const(p)) => {
                if p {
                    !x
                } else {
                    x
                }
            }
            (Sig::Lit(x), Sig::Lit(y)) => {
                if x == y {
                    return Sig::Const(false);
                }
                if x == !y {
                    return Sig::Const(true);
                }
                let o = self.solver.new_var().pos();
                self.solver.add_clause(&[!o, x, y]);
                self.solver.add_clause(&[!o, !x, !y]);
                self.solver.add_clause(&[o, !x, y]);
                self.solver.add_clause(&[o, x, !y]);
                Sig::Lit(o)
            }
        }
    }

    /// `sel ? b : a`
    pub(crate) fn mux(&mut self, sel: Sig, a: Sig, b: Sig) -> Sig {
        match sel {
            Sig::Const(true) => return b,
            Sig::Const(false) => return a,
            _ => {}
        }
        if a == b {
            return a;
        }
        match (a, b) {
            (Sig::Const(false), _) => return self.and(sel, b),
            (Sig::Const(true), _) => return self.or(!sel, b),
            (_, Sig::Const(false)) => return self.and(!sel, a),
            (_, Sig::Const(true)) => return self.or(sel, a),
            _ => {}
        }
        let (Sig::Lit(s), Sig::Lit(x), Sig::Lit(y)) = (sel, a, b) else { unreachable!() };
        if x == !y {
            // sel ? !a : a
            return self.xor(sel, a);
        }
        let o = self.solver.new_var().pos();
        self.solver.add_clause(&[s, !x, o]);
        self.solver.add_clause(&[s, x, !o]);
        self.solver.add_clause(&[!s, !y, o]);
        self.solver.add_clause(&[!s, y, !o]);
        // Redundant but helps propagation when a == b.
        self.solver.add_clause(&[!x, !y, o]);
        self.solver.add_clause(&[x, y, !o]);
        Sig::Lit(o)
    }

    fn gate(&mut self, kind: CellKind, ins: &[Sig]) -> Sig {
        match kind {
            CellKind::And => self.and(ins[0], ins[1]),
            CellKind::Or => self.or(ins[0], ins[1]),
            CellKind::Nand => !self.and(ins[0], ins[1]),
            CellKind::Nor => !self.or(ins[0], ins[1]),
            CellKind::Xor => self.xor(ins[0], ins[1]),
            CellKind::Xnor => !self.xor(ins[0], ins[1]),
            CellKind::Not => !ins[0],
            CellKind::Buf => ins[0],
            CellKind::Mux2 => self.mux(ins[0], ins[1], ins[2]),
            CellKind::Const0 => Sig::Const(false),
            CellKind::Const1 => Sig::Const(true),
            CellKind::Dff { .. } => unreachable!("registers are unrolled, not encoded"),
        }
    }

    fn held(&mut self, reset_value: bool, rstn: Option<Sig>, stored: Sig) -> Sig {
        match rstn {
            None => stored,
            Some(r) if reset_value => self.or(!r, stored),
            Some(r) => self.and(r, stored),
        }
    }

    /// Encodes one cycle of `n`.
    ///
    /// With `shadow = Some(good)`, this is the faulty copy: any cell whose
    /// inputs are identical to the good copy's reuses the good output, so only
    /// the cone disturbed by the flip gets new variables.
    pub(crate) fn cycle(
        &mut self,
        n: &Netlist,
        stored: &[Sig],
        inputs: &[Sig],
        flip: Option<NetId>,
        shadow: Option<Shadow<'_>>,
    ) -> Vec<Sig> {
        let mut vals = vec![Sig::Const(false); n.nets().len()];
        for (&net, &s) in n.stimulus_inputs().iter().zip(inputs) {
            vals[net.index()] = s;
        }
        let flip_at = |vals: &mut Vec<Sig>, net: NetId| {
            if flip == Some(net) {
                vals[net.index()] = !vals[net.index()];
            }
        };
        for &net in n.stimulus_inputs() {
            flip_at(&mut vals, net);
        }
        if let Some(clk) = n.clock() {
            flip_at(&mut vals, clk);
        }
        for (k, (&c, &st)) in n.dffs().iter().zip(stored).enumerate() {
            let cell = n.cell(c);
            let CellKind::Dff { reset_value } = cell.kind else { unreachable!() };
            let rstn = cell.inputs.get(2).map(|r| vals[r.index()]);
            let shared = shadow.filter(|g| {
                g.stored[k] == st && cell.inputs.get(2).is_none_or(|r| g.vals[r.index()] == vals[r.index()])
            });
            vals[cell.output.index()] = match shared {
                Some(g) => g.vals[cell.output.index()],
                None => self.held(reset_value, rstn, st),
            };
            flip_at(&mut vals, cell.output);
        }
        let mut ins = [Sig::Const(false); 3];
        for &c in n.topo_order() {
            let cell = n.cell(c);
            for (slot, &i) in ins.iter_mut().zip(&cell.inputs) {
                *slot = vals[i.index()];
            }
            let k = cell.inputs.len();
            let shared = shadow.filter(|g| cell.inputs.iter().zip(&ins[..k]).all(|(i, s)| g.vals[i.index()] == *s));
            vals[cell.output.index()] = match shared {
                Some(g) => g.vals[cell.output.index()],
                None => self.gate(cell.kind, &ins[..k]),
            };
            flip_at(&mut vals, cell.output);
        }
        vals
    }

    /// Register contents after a cycle with values `vals`. With a shadow,
    /// registers whose data and reset agree with the good copy share its
    /// next state.
    pub(crate) fn next_state(&mut self, n: &Netlist, vals: &[Sig], shadow: Option<Shadow<'_>>) -> Vec<Sig> {
        n.dffs()
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let cell = n.cell(c);
                let CellKind::Dff { reset_value } = cell.kind else { unreachable!() };
                if let Some(g) = shadow {
                    if cell.inputs.iter().all(|i| g.vals[i.index()] == vals[i.index()]) {
                        return g.stored[k];
                    }
                }
                let d = vals[cell.inputs[0].index()];
                match cell.inputs.get(2) {
                    None => d,
                    Some(r) => {
                        let r = vals[r.index()];
                        if reset_value {
                            self.or(!r, d)
                        } else {
                            self.and(r, d)
                        }
                    }
                }
            })
            .collect()
    }
}

/// The good copy's view of one cycle, used to share unchanged logic.
///
/// In [`Encoder::cycle`] `stored` is the good state entering the cycle; in
/// [`Encoder::next_state`] it is the good state leaving it.
#[derive(Clone, Copy)]
pub(crate) struct Shadow<'a> {
    pub(crate) vals: &'a [Sig],
    pub(crate) stored: &'a [Sig],
}
