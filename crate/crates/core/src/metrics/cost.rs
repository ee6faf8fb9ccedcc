//! Structural cost proxy for designs without synthesis reports.
//!
//! Area is a weighted cell count, timing is the deepest register-to-register
//! or input-to-output path in gate delays, and power is a weighted sum of
//! leakage plus output toggle rate under a seeded random stimulus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{overhead_from_reports, MetricsError, MetricsRecord, OverheadRecord};
use crate::netlist::{CellKind, Netlist};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModel {
    /// Every cell weighs 1 when set; otherwise gate-equivalent weights.
    pub unit_weights: bool,
    /// Static share of a cell's power relative to one toggle per cycle.
    pub leakage: f64,
    pub stimulus_cycles: usize,
    pub seed: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { unit_weights: false, leakage: 0.1, stimulus_cycles: 256, seed: 1 }
    }
}

pub type ModelMetrics = MetricsRecord;

impl CostModel {
    pub fn area_weight(&self, kind: CellKind) -> f64 {
        if self.unit_weights {
            return 1.0;
        }
        match kind {
            CellKind::Const0 | CellKind::Const1 => 0.0,
            CellKind::Not => 0.67,
            CellKind::Nand | CellKind::Nor | CellKind::Buf => 1.0,
            CellKind::And | CellKind::Or => 1.33,
            CellKind::Xor | CellKind::Xnor => 2.0,
            CellKind::Mux2 => 2.33,
            CellKind::Dff { .. } => 4.67,
        }
    }

    fn delay(kind: CellKind) -> usize {
        match kind {
            CellKind::Const0 | CellKind::Const1 | CellKind::Dff { .. } => 0,
            _ => 1,
        }
    }

    /// Longest combinational path in gate delays, from inputs and register
    /// outputs to outputs and register pins.
    pub fn depth(n: &Netlist) -> usize {
        let mut arrival = vec![0usize; n.nets().len()];
        for &c in n.topo_order() {
            let cell = n.cell(c);
            let a = cell.inputs.iter().map(|i| arrival[i.index()]).max().unwrap_or(0);
            arrival[cell.output.index()] = a + Self::delay(cell.kind);
        }
        let outs = n.primary_outputs().iter().map(|o| arrival[o.index()]);
        let regs = n.dffs().iter().flat_map(|&c| n.cell(c).inputs.iter().map(|i| arrival[i.index()]));
        outs.chain(regs).max().unwrap_or(0)
    }

    /// Reference stimulus over the stimulus inputs of `n`: reset asserted in
    /// the first cycle, uniform random values otherwise.
    pub fn stimulus(&self, n: &Netlist) -> Vec<Vec<bool>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.stimulus_cycles)
            .map(|t| {
                n.stimulus_inputs()
                    .iter()
                    .map(|&i| if Some(i) == n.reset() { t > 0 } else { rng.gen_bool(0.5) })
                    .collect()
            })
            .collect()
    }

    pub fn evaluate(&self, n: &Netlist, stimulus: &[Vec<bool>]) -> ModelMetrics {
        let area = n.cells().iter().map(|c| self.area_weight(c.kind)).sum();
        let trace = n.simulate_vectors(stimulus, None);
        let cycles = stimulus.len().max(2) - 1;
        let power = n
            .cells()
            .iter()
            .map(|c| {
                let toggles = (1..trace.len()).filter(|&t| trace.value(t, c.output) != trace.value(t - 1, c.output)).count();
                self.area_weight(c.kind) * (self.leakage + toggles as f64 / cycles as f64)
            })
            .sum();
        ModelMetrics { area, power, timing: Self::depth(n) as f64 }
    }
}

/// Proxy overheads of a bound design against the design alone.
///
/// Both are simulated with the same stimulus; binding only adds observers,
/// so the design's own toggles are identical and the difference comes from
/// monitor logic.
pub fn model_overhead(
    name: &str,
    design: &Netlist,
    bound: &Netlist,
    model: &CostModel,
) -> Result<OverheadRecord, MetricsError> {
    let stim = model.stimulus(design);
    debug_assert_eq!(design.stimulus_inputs(), &bound.stimulus_inputs()[..design.stimulus_inputs().len()]);
    let extra = bound.stimulus_inputs().len() - design.stimulus_inputs().len();
    let bound_stim: Vec<Vec<bool>> =
        stim.iter().map(|v| v.iter().copied().chain(std::iter::repeat_n(false, extra)).collect()).collect();
    let base = model.evaluate(design, &stim);
    let with = model.evaluate(bound, &bound_stim);
    let floor = |m: ModelMetrics| ModelMetrics { timing: m.timing.max(1.0), ..m };
    let mut r = overhead_from_reports(name, &floor(base), &floor(with))?;
    r.proxy = true;
    Ok(r)
}
