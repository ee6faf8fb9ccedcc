//! Embedded CDCL satisfiability solver.
//!
//! Two-watched-literal propagation, first-UIP clause learning with
//! self-subsumption minimization, VSIDS decisions with phase saving and Luby
//! restarts. Variable selection breaks activity ties by the lower index, so a
//! given clause set always produces the same run.

use std::fmt;
use std::ops::Not;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn lit(self, positive: bool) -> Lit {
        Lit(self.0 << 1 | u32::from(!positive))
    }

    pub fn pos(self) -> Lit {
        self.lit(true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_negative(self) -> bool {
        self.0 & 1 == 1
    }

    fn code(self) -> usize {
        self.0 as usize
    }

    /// DIMACS-style signed integer (1-based).
    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().0) + 1;
        if self.is_negative() {
            -v
        } else {
            v
        }
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Unassigned,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    /// Model indexed by variable.
    Sat(Vec<bool>),
    Unsat,
    /// Conflict budget exhausted.
    Unknown,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub vars: usize,
    pub clauses: usize,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
}

struct Clause {
    lits: Vec<Lit>,
}

/// Binary max-heap of variables ordered by activity, lower index first on ties.
struct VarOrder {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

impl VarOrder {
    fn better(act: &[f64], a: u32, b: u32) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize].is_some()
    }

    fn push(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v as usize] = Some(self.heap.len());
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.pos[self.heap[0] as usize] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn bumped(&mut self, v: u32, act: &[f64]) {
        if let Some(i) = self.pos[v as usize] {
            self.sift_up(i, act);
        }
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::better(act, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i] as usize] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && Self::better(act, self.heap[r], self.heap[l]) { r } else { l };
            if !Self::better(act, self.heap[c], v) {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i] as usize] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }
}

pub struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<u32>>,
    assigns: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    order: VarOrder,
    units: Vec<Lit>,
    empty_clause: bool,
    original_clauses: usize,
    stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

const VAR_DECAY: f64 = 0.95;
const RESTART_UNIT: u64 = 64;

impl Solver {
    pub fn new() -> Self {
        Solver {
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            phase: Vec::new(),
            seen: Vec::new(),
            order: VarOrder { heap: Vec::new(), pos: Vec::new() },
            units: Vec::new(),
            empty_clause: false,
            original_clauses: 0,
            stats: SolverStats::default(),
        }
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var(self.assigns.len() as u32);
        self.assigns.push(Value::Unassigned);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.phase.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.order.pos.push(None);
        v
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.original_clauses
    }

    pub fn stats(&self) -> SolverStats {
        SolverStats { vars: self.num_vars(), clauses: self.original_clauses, ..self.stats }
    }

    /// Adds a clause. Duplicate literals are merged and tautologies dropped.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        for l in &c {
            assert!(l.var().index() < self.num_vars(), "literal {l} uses an unknown variable");
        }
        self.original_clauses += 1;
        match c.len() {
            0 => self.empty_clause = true,
            1 => self.units.push(c[0]),
            _ => {
                self.attach(c);
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>) -> u32 {
        let idx = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(idx);
        self.watches[lits[1].code()].push(idx);
        self.clauses.push(Clause { lits });
        idx
    }

    fn value(&self, l: Lit) -> Value {
        match self.assigns[l.var().index()] {
            Value::Unassigned => Value::Unassigned,
            v => {
                if (v == Value::True) != l.is_negative() {
                    Value::True
                } else {
                    Value::False
                }
            }
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        let v = l.var().index();
        self.assigns[v] = if l.is_negative() { Value::False } else { Value::True };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Returns the conflicting clause, if any.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let cr = ws[i];
                i += 1;
                let lits = &mut self.clauses[cr as usize].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                if self.value(first) == Value::True {
                    ws[j] = cr;
                    j += 1;
                    continue;
                }
                let lits_len = self.clauses[cr as usize].lits.len();
                let mut moved = false;
                for k in 2..lits_len {
                    let lk = self.clauses[cr as usize].lits[k];
                    if self.value(lk) != Value::False {
                        self.clauses[cr as usize].lits.swap(1, k);
                        self.watches[lk.code()].push(cr);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = cr;
                j += 1;
                if self.value(first) == Value::False {
                    conflict = Some(cr);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(cr));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: Var) {
        let a = &mut self.activity[v.index()];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in self.activity.iter_mut() {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(v.0, &self.activity);
    }

    /// First-UIP learning. Returns the learnt clause (asserting literal first)
    /// and the level to backjump to.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            let start = usize::from(p.is_some());
            let n = self.clauses[confl as usize].lits.len();
            for k in start..n {
                let q = self.clauses[confl as usize].lits[k];
                let v = q.var();
                if !self.seen[v.index()] && self.level[v.index()] > 0 {
                    self.seen[v.index()] = true;
                    self.bump(v);
                    if self.level[v.index()] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var().index()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            self.seen[lit.var().index()] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[lit.var().index()].expect("implied literal has a reason");
        }
        learnt[0] = !p.unwrap();

        // Drop literals implied by the rest of the clause (local minimization).
        let mut keep = vec![learnt[0]];
        for &l in &learnt[1..] {
            let redundant = match self.reason[l.var().index()] {
                None => false,
                Some(r) => self.clauses[r as usize].lits[1..].iter().all(|q| {
                    self.seen[q.var().index()] || self.level[q.var().index()] == 0
                }),
            };
            if !redundant {
                keep.push(l);
            }
        }
        for &l in &learnt[1..] {
            self.seen[l.var().index()] = false;
        }
        let mut learnt = keep;

        let back = if learnt.len() == 1 {
            0
        } else {
            let (mut best, mut lvl) = (1, self.level[learnt[1].var().index()]);
            for (k, l) in learnt.iter().enumerate().skip(2) {
                let lv = self.level[l.var().index()];
                if lv > lvl {
                    best = k;
                    lvl = lv;
                }
            }
            learnt.swap(1, best);
            lvl
        };
        (learnt, back)
    }

    fn backtrack(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var().index();
            self.phase[v] = !l.is_negative();
            self.assigns[v] = Value::Unassigned;
            self.reason[v] = None;
            self.order.push(l.var().0, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn luby(mut i: u64) -> u64 {
        // Luby sequence 1,1,2,1,1,2,4,... (0-based).
        let (mut size, mut seq) = (1u64, 0u32);
        while size < i + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        while size - 1 != i {
            size = (size - 1) >> 1;
            seq -= 1;
            i %= size;
        }
        1u64 << seq
    }

    /// Solves the clause set. `conflict_budget` bounds the total number of
    /// conflicts; `None` means unlimited.
    pub fn solve(&mut self, conflict_budget: Option<u64>) -> SatResult {
        if self.empty_clause {
            return SatResult::Unsat;
        }
        self.backtrack(0);
        for l in std::mem::take(&mut self.units) {
            match self.value(l) {
                Value::True => {}
                Value::False => {
                    self.empty_clause = true;
                    return SatResult::Unsat;
                }
                Value::Unassigned => self.enqueue(l, None),
            }
        }
        if self.propagate().is_some() {
            self.empty_clause = true;
            return SatResult::Unsat;
        }
        for v in 0..self.num_vars() as u32 {
            if self.assigns[v as usize] == Value::Unassigned {
                self.order.push(v, &self.activity);
            }
        }

        let mut restart_count = 0u64;
        let mut until_restart = Self::luby(0) * RESTART_UNIT;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                if self.decision_level() == 0 {
                    self.empty_clause = true;
                    return SatResult::Unsat;
                }
                let (learnt, back) = self.analyze(confl);
                self.backtrack(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let cr = self.attach(learnt);
                    self.enqueue(first, Some(cr));
                }
                self.var_inc /= VAR_DECAY;
                if let Some(b) = conflict_budget {
                    if self.stats.conflicts >= b {
                        self.backtrack(0);
                        return SatResult::Unknown;
                    }
                }
                until_restart = until_restart.saturating_sub(1);
                if until_restart == 0 {
                    restart_count += 1;
                    self.stats.restarts += 1;
                    until_restart = Self::luby(restart_count) * RESTART_UNIT;
                    self.backtrack(0);
                }
                continue;
            }
            let next = loop {
                match self.order.pop(&self.activity) {
                    None => break None,
                    Some(v) if self.assigns[v as usize] == Value::Unassigned => break Some(v),
                    Some(_) => {}
                }
            };
            let Some(v) = next else {
                let model = self.assigns.iter().map(|&a| a == Value::True).collect();
                self.backtrack(0);
                return SatResult::Sat(model);
            };
            self.stats.decisions += 1;
            self.trail_lim.push(self.trail.len());
            let v = Var(v);
            self.enqueue(v.lit(self.phase[v.index()]), None);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn build(nvars: usize, clauses: &[Vec<i64>]) -> Solver {
        let mut s = Solver::new();
        for _ in 0..nvars {
            s.new_var();
        }
        for c in clauses {
            let lits: Vec<Lit> = c.iter().map(|&x| Var((x.unsigned_abs() - 1) as u32).lit(x > 0)).collect();
            s.add_clause(&lits);
        }
        s
    }

    fn satisfies(model: &[bool], clauses: &[Vec<i64>]) -> bool {
        clauses
            .iter()
            .all(|c| c.iter().any(|&x| model[(x.unsigned_abs() - 1) as usize] == (x > 0)))
    }

    fn brute_force(nvars: usize, clauses: &[Vec<i64>]) -> bool {
        (0u32..1 << nvars).any(|m| {
            let model: Vec<bool> = (0..nvars).map(|i| m >> i & 1 == 1).collect();
            satisfies(&model, clauses)
        })
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(Solver::luby).collect();
        assert_eq!(seq, [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(build(0, &[]).solve(None), SatResult::Sat(vec![]));
        assert_eq!(build(1, &[vec![]]).solve(None), SatResult::Unsat);
        assert_eq!(build(1, &[vec![1], vec![-1]]).solve(None), SatResult::Unsat);
        assert_eq!(build(2, &[vec![1, -1]]).solve(None), SatResult::Sat(vec![false, false]));
    }

    #[test]
    fn pigeonhole_is_unsat() {
        // 5 pigeons, 4 holes.
        let (p, h) = (5usize, 4usize);
        let var = |i: usize, j: usize| (i * h + j + 1) as i64;
        let mut cls = Vec::new();
        for i in 0..p {
            cls.push((0..h).map(|j| var(i, j)).collect());
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    cls.push(vec![-var(a, j), -var(b, j)]);
                }
            }
        }
        assert_eq!(build(p * h, &cls).solve(None), SatResult::Unsat);
        assert_eq!(build(p * h, &cls).solve(Some(3)), SatResult::Unknown);
    }

    fn random_cnf() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
        (3usize..=12).prop_flat_map(|n| {
            let lit = (1..=n as i64, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v });
            (Just(n), prop::collection::vec(prop::collection::vec(lit, 1..=3), 0..=60))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]
        #[test]
        fn agrees_with_enumeration((n, cls) in random_cnf()) {
            let expected = brute_force(n, &cls);
            match build(n, &cls).solve(None) {
                SatResult::Sat(model) => {
                    prop_assert!(expected);
                    prop_assert!(satisfies(&model, &cls));
                }
                SatResult::Unsat => prop_assert!(!expected),
                SatResult::Unknown => prop_assert!(false, "no budget given"),
            }
        }

        #[test]
        fn deterministic((n, cls) in random_cnf()) {
            prop_assert_eq!(build(n, &cls).solve(None), build(n, &cls).solve(None));
        }
    }
}
