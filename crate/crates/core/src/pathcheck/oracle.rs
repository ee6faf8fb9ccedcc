//! Exhaustive reference decision procedure for small circuits.
//!
//! Works on explicit sets of register states and never touches the solver, so
//! it can serve as an independent check of [`super::sensitize`].

use std::collections::BTreeSet;

use super::{PathError, PathQuery};
use crate::netlist::Netlist;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_inputs: usize,
    pub max_dffs: usize,
    pub max_bound: usize,
}

pub const ORACLE_LIMITS: OracleLimits = OracleLimits { max_inputs: 10, max_dffs: 6, max_bound: 5 };

fn pack(bits: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
}

fn unpack(v: u64, len: usize) -> Vec<bool> {
    (0..len).map(|i| v >> i & 1 == 1).collect()
}

/// Decides the same question as [`super::sensitize`] by enumerating every
/// input vector at every cycle. Only good-run states reachable from power-up
/// are tracked, then (good, faulty) state pairs after the flip.
pub fn brute_force_reach(n: &Netlist, q: &PathQuery) -> Result<bool, PathError> {
    let ni = n.stimulus_inputs().len();
    let nd = n.dffs().len();
    let l = ORACLE_LIMITS;
    if ni > l.max_inputs || nd > l.max_dffs || q.bound > l.max_bound {
        return Err(PathError::TooLarge(format!(
            "{ni} inputs, {nd} registers, bound {} (limits {}, {}, {})",
            q.bound, l.max_inputs, l.max_dffs, l.max_bound
        )));
    }
    let vectors: Vec<Vec<bool>> = (0..1u64 << ni).map(|v| unpack(v, ni)).collect();
    let dest = q.destination.index();
    let mut vals_g = Vec::new();
    let mut vals_f = Vec::new();

    let mut good: BTreeSet<u64> = BTreeSet::from([pack(&n.initial_state())]);
    for t in 0..q.bound {
        // Flip at cycle t from every reachable good state.
        let mut pairs: BTreeSet<(u64, u64)> = BTreeSet::new();
        let mut next_good = BTreeSet::new();
        for &s in &good {
            let st = unpack(s, nd);
            for v in &vectors {
                n.eval_cycle(&st, v, None, &mut vals_g);
                n.eval_cycle(&st, v, Some(q.origin), &mut vals_f);
                if vals_g[dest] != vals_f[dest] {
                    return Ok(true);
                }
                let g = pack(&n.next_state(&vals_g));
                let f = pack(&n.next_state(&vals_f));
                next_good.insert(g);
                if g != f {
                    pairs.insert((g, f));
                }
            }
        }
        // Propagate the disturbance for the remaining cycles.
        for _ in t + 1..q.bound {
            let mut next_pairs = BTreeSet::new();
            for &(g, f) in &pairs {
                let (gs, fs) = (unpack(g, nd), unpack(f, nd));
                for v in &vectors {
                    n.eval_cycle(&gs, v, None, &mut vals_g);
                    n.eval_cycle(&fs, v, None, &mut vals_f);
                    if vals_g[dest] != vals_f[dest] {
                        return Ok(true);
                    }
                    let g2 = pack(&n.next_state(&vals_g));
                    let f2 = pack(&n.next_state(&vals_f));
                    if g2 != f2 {
                        next_pairs.insert((g2, f2));
                    }
                }
            }
            pairs = next_pairs;
            if pairs.is_empty() {
                break;
            }
        }
        good = next_good;
    }
    Ok(false)
}
