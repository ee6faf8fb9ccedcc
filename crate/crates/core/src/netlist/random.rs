//! Random well-formed netlists for property tests and fuzzing.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{CellKind, NetId, Netlist, NetlistBuilder, Origin};

#[derive(Debug, Clone, Copy)]
pub struct RandomParams {
    /// Data inputs, not counting clock and reset.
    pub max_inputs: usize,
    pub max_dffs: usize,
    /// Combinational cells plus registers.
    pub max_cells: usize,
    /// Probability that registers get an asynchronous reset pin.
    pub reset_probability: f64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams { max_inputs: 8, max_dffs: 4, max_cells: 40, reset_probability: 0.3 }
    }
}

const COMB: [CellKind; 11] = [
    CellKind::And,
    CellKind::Or,
    CellKind::Nand,
    CellKind::Nor,
    CellKind::Xor,
    CellKind::Xnor,
    CellKind::Not,
    CellKind::Buf,
    CellKind::Mux2,
    CellKind::Const0,
    CellKind::Const1,
];

/// Generates an acyclic-by-construction netlist. Combinational cells only read
/// nets created before them; register data pins may read anything.
pub fn random_netlist<R: Rng>(rng: &mut R, p: RandomParams) -> Netlist {
    let n_dff = rng.gen_range(0..=p.max_dffs.min(p.max_cells.saturating_sub(1)));
    let n_comb = rng.gen_range(1..=(p.max_cells - n_dff).max(1));
    let with_reset = n_dff > 0 && p.max_inputs > 1 && rng.gen_bool(p.reset_probability);
    // The reset counts against the input budget.
    let n_in = rng.gen_range(1..=(p.max_inputs - usize::from(with_reset)).max(1));

    let mut b = NetlistBuilder::new("rand");
    let mut pool: Vec<NetId> = Vec::new();
    for i in 0..n_in {
        let id = b.add_net(&format!("i{i}"), Origin::Design).unwrap();
        b.mark_input(id);
        pool.push(id);
    }
    let clk = (n_dff > 0).then(|| {
        let id = b.add_net("clk", Origin::Design).unwrap();
        b.mark_input(id);
        id
    });
    let rstn = with_reset.then(|| {
        let id = b.add_net("rstn", Origin::Design).unwrap();
        b.mark_input(id);
        pool.push(id);
        id
    });
    let mut dff_q = Vec::new();
    for i in 0..n_dff {
        let id = b.add_net(&format!("q{i}"), Origin::Design).unwrap();
        dff_q.push(id);
        pool.push(id);
    }
    for i in 0..n_comb {
        let kind = if rng.gen_bool(0.04) {
            *[CellKind::Const0, CellKind::Const1].choose(rng).unwrap()
        } else {
            *COMB[..9].choose(rng).unwrap()
        };
        let arity = *kind.arity().start();
        let ins: Vec<NetId> = (0..arity).map(|_| *pool.choose(rng).unwrap()).collect();
        let out = b.add_net(&format!("n{i}"), Origin::Design).unwrap();
        b.add_cell(&format!("g{i}"), kind, ins, out);
        pool.push(out);
    }
    for (i, &q) in dff_q.iter().enumerate() {
        let d = *pool.choose(rng).unwrap();
        let mut pins = vec![d, clk.unwrap()];
        if let Some(r) = rstn {
            pins.push(r);
        }
        b.add_cell(&format!("r{i}"), CellKind::Dff { reset_value: rng.gen_bool(0.3) }, pins, q);
    }
    // Last comb output is always observable.
    let last = pool[pool.len() - 1];
    b.mark_output(last);
    b.finish().expect("generated netlist is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn generated_netlists_respect_limits() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = random_netlist(&mut rng, RandomParams::default());
            assert!(n.cells().len() <= 40);
            assert!(n.dffs().len() <= 4);
            assert!(n.stimulus_inputs().len() <= 8);
        }
    }
}
