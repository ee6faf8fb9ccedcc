//! Two-valued cycle simulation.
//!
//! Each cycle: primary inputs take their stimulus values, register outputs
//! show the stored state (or their reset value while the asynchronous reset is
//! low), then combinational cells evaluate in topological order. At the end of
//! the cycle every register captures its data input, or its reset value if the
//! reset is low. Registers start out holding their reset value.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Driver, NetId, Netlist, NetlistError};

/// Forces `net` to the complement of its driven value during `cycle`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flip {
    pub net: NetId,
    pub cycle: usize,
}

/// Values of every net for every simulated cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    cycles: Vec<Vec<bool>>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn value(&self, cycle: usize, net: NetId) -> bool {
        self.cycles[cycle][net.index()]
    }

    pub fn cycle(&self, cycle: usize) -> &[bool] {
        &self.cycles[cycle]
    }

    /// Values of one net across all cycles.
    pub fn waveform(&self, net: NetId) -> Vec<bool> {
        self.cycles.iter().map(|c| c[net.index()]).collect()
    }

    /// Name-keyed view of one cycle.
    pub fn named(&self, netlist: &Netlist, cycle: usize) -> BTreeMap<String, bool> {
        netlist
            .nets()
            .iter()
            .zip(&self.cycles[cycle])
            .map(|(n, &v)| (n.name.clone(), v))
            .collect()
    }
}

impl Netlist {
    /// Register contents right after power-up.
    pub fn initial_state(&self) -> Vec<bool> {
        self.dffs()
            .iter()
            .map(|&c| match self.cell(c).kind {
                super::CellKind::Dff { reset_value } => reset_value,
                _ => unreachable!(),
            })
            .collect()
    }

    /// Evaluates one cycle. `inputs` follows [`Netlist::stimulus_inputs`];
    /// `state` follows [`Netlist::dffs`]. `flip` complements that net's
    /// driven value for this cycle only.
    pub fn eval_cycle(&self, state: &[bool], inputs: &[bool], flip: Option<NetId>, values: &mut Vec<bool>) {
        debug_assert_eq!(inputs.len(), self.stimulus_inputs().len());
        values.clear();
        values.resize(self.nets().len(), false);
        let flip_of = |id: NetId| flip == Some(id);
        for (&net, &v) in self.stimulus_inputs().iter().zip(inputs) {
            values[net.index()] = v ^ flip_of(net);
        }
        if let Some(clk) = self.clock() {
            values[clk.index()] = flip_of(clk);
        }
        for (&c, &stored) in self.dffs().iter().zip(state) {
            let cell = self.cell(c);
            let held = match (cell.kind, cell.inputs.get(2)) {
                (super::CellKind::Dff { reset_value }, Some(rstn)) if !values[rstn.index()] => reset_value,
                _ => stored,
            };
            values[cell.output.index()] = held ^ flip_of(cell.output);
        }
        let mut pins = [false; 3];
        for &c in self.topo_order() {
            let cell = self.cell(c);
            for (slot, &i) in pins.iter_mut().zip(&cell.inputs) {
                *slot = values[i.index()];
            }
            let v = cell.kind.eval(&pins[..cell.inputs.len()]);
            values[cell.output.index()] = v ^ flip_of(cell.output);
        }
    }

    /// Register contents captured at the end of a cycle with `values`.
    pub fn next_state(&self, values: &[bool]) -> Vec<bool> {
        self.dffs()
            .iter()
            .map(|&c| {
                let cell = self.cell(c);
                match (cell.kind, cell.inputs.get(2)) {
                    (super::CellKind::Dff { reset_value }, Some(rstn)) if !values[rstn.index()] => reset_value,
                    _ => values[cell.inputs[0].index()],
                }
            })
            .collect()
    }

    /// Simulates positional input vectors from the power-up state.
    pub fn simulate_vectors(&self, stimulus: &[Vec<bool>], flip: Option<Flip>) -> Trace {
        let mut state = self.initial_state();
        let mut cycles = Vec::with_capacity(stimulus.len());
        let mut values = Vec::new();
        for (t, inputs) in stimulus.iter().enumerate() {
            let f = flip.filter(|f| f.cycle == t).map(|f| f.net);
            self.eval_cycle(&state, inputs, f, &mut values);
            state = self.next_state(&values);
            cycles.push(values.clone());
        }
        Trace { cycles }
    }

    /// Simulates named stimulus. Every non-clock primary input must be
    /// assigned in every cycle; extra names are ignored.
    pub fn simulate(&self, stimulus: &[BTreeMap<String, bool>]) -> Result<Trace, NetlistError> {
        self.simulate_with_flip(stimulus, None)
    }

    pub fn simulate_with_flip(
        &self,
        stimulus: &[BTreeMap<String, bool>],
        flip: Option<Flip>,
    ) -> Result<Trace, NetlistError> {
        if stimulus.is_empty() {
            return Err(NetlistError::EmptyStimulus);
        }
        let vectors = self.vectors_from_named(stimulus)?;
        Ok(self.simulate_vectors(&vectors, flip))
    }

    pub fn vectors_from_named(&self, stimulus: &[BTreeMap<String, bool>]) -> Result<Vec<Vec<bool>>, NetlistError> {
        stimulus
            .iter()
            .enumerate()
            .map(|(t, m)| {
                self.stimulus_inputs()
                    .iter()
                    .map(|&i| {
                        let name = self.net_name(i);
                        m.get(name)
                            .copied()
                            .ok_or_else(|| NetlistError::MissingInput { cycle: t, input: name.to_string() })
                    })
                    .collect()
            })
            .collect()
    }

    pub fn named_from_vectors(&self, vectors: &[Vec<bool>]) -> Vec<BTreeMap<String, bool>> {
        vectors
            .iter()
            .map(|v| {
                self.stimulus_inputs()
                    .iter()
                    .zip(v)
                    .map(|(&i, &b)| (self.net_name(i).to_string(), b))
                    .collect()
            })
            .collect()
    }

    /// True when the net is a primary input or a register output.
    pub fn is_state_or_input(&self, net: NetId) -> bool {
        match self.driver(net) {
            Driver::Input => true,
            Driver::Cell(c) => self.cell(c).kind.is_sequential(),
        }
    }
}
