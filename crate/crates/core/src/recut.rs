//! Extraction of the sub-netlist that implements an FSM: the union of the
//! state registers' fan-in cones, stopping at primary inputs and register
//! outputs.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{Driver, NetId, Netlist, NetlistBuilder};
use crate::topology::StateWord;

/// The state word of an FSM and its reset value. Register `i` of
/// `state_registers` is bit `i` of every [`StateWord`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsmSpec {
    pub state_registers: Vec<String>,
    pub reset: StateWord,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("unknown state register `{0}`")]
    UnknownRegister(String),
    #[error("state register `{0}` listed twice")]
    DuplicateRegister(String),
    #[error("state word needs at least one register")]
    Empty,
    #[error("reset state `{reset}` has {} bits but {width} state registers were given", reset.width())]
    WidthMismatch { reset: StateWord, width: usize },
}

impl FsmSpec {
    pub fn new(state_registers: Vec<String>, reset: StateWord) -> Result<Self, SpecError> {
        if state_registers.is_empty() {
            return Err(SpecError::Empty);
        }
        if reset.width() != state_registers.len() {
            return Err(SpecError::WidthMismatch { reset, width: state_registers.len() });
        }
        let mut seen = HashSet::new();
        for r in &state_registers {
            if !seen.insert(r) {
                return Err(SpecError::DuplicateRegister(r.clone()));
            }
        }
        Ok(FsmSpec { state_registers, reset })
    }

    pub fn width(&self) -> usize {
        self.state_registers.len()
    }

    /// Register indices in `netlist`, in state-word order.
    pub fn resolve(&self, netlist: &Netlist) -> Result<Vec<usize>, SpecError> {
        let spec = FsmSpec::new(self.state_registers.clone(), self.reset.clone())?;
        spec.state_registers
            .iter()
            .map(|name| netlist.register_index(name).ok_or_else(|| SpecError::UnknownRegister(name.clone())))
            .collect()
    }
}

/// A netlist prepared for enumeration: which registers hold the state and
/// which nets are unconstrained.
#[derive(Debug, Clone)]
pub struct Cut {
    pub netlist: Netlist,
    /// Primary inputs plus outputs of non-state registers, ascending by id.
    pub free_inputs: Vec<NetId>,
    /// Register indices in `netlist`, in state-word order.
    pub state_registers: Vec<usize>,
    visited: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutStats {
    pub inputs: usize,
    pub regs: usize,
    pub gates: usize,
}

impl fmt::Display for CutStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "inputs={} regs={} gates={}", self.inputs, self.regs, self.gates)
    }
}

impl Cut {
    /// Uses the whole netlist unchanged. Non-state register outputs are
    /// treated as free, exactly as in a cut.
    pub fn whole(netlist: Netlist, spec: &FsmSpec) -> Result<Cut, SpecError> {
        let state_registers = spec.resolve(&netlist)?;
        let state_q: HashSet<NetId> = state_registers.iter().map(|&r| netlist.registers()[r].q).collect();
        let mut free_inputs: Vec<NetId> = netlist.inputs().to_vec();
        free_inputs.extend(netlist.registers().iter().map(|r| r.q).filter(|q| !state_q.contains(q)));
        free_inputs.sort();
        Ok(Cut { netlist, free_inputs, state_registers, visited: 0 })
    }

    pub fn stats(&self) -> CutStats {
        CutStats { inputs: self.free_inputs.len(), regs: self.state_registers.len(), gates: self.netlist.gates().len() }
    }

    pub fn width(&self) -> usize {
        self.state_registers.len()
    }

    pub fn q_nets(&self) -> Vec<NetId> {
        self.state_registers.iter().map(|&r| self.netlist.registers()[r].q).collect()
    }

    pub fn d_nets(&self) -> Vec<NetId> {
        self.state_registers.iter().map(|&r| self.netlist.registers()[r].d).collect()
    }

    /// Nets and gates dequeued by the extraction that produced this cut.
    pub fn visited(&self) -> usize {
        self.visited
    }
}

pub fn cut_stats(cut: &Cut) -> CutStats {
    cut.stats()
}

/// Breadth-first traversal of the fan-in cones of the state registers' D
/// nets. Non-state registers reached by the traversal become primary inputs
/// of the cut; net names are preserved and net ids keep their relative order.
pub fn fsm_cut(netlist: &Netlist, spec: &FsmSpec) -> Result<Cut, SpecError> {
    let state_regs = spec.resolve(netlist)?;
    let regs = netlist.registers();
    let mut is_state = vec![false; regs.len()];
    for &r in &state_regs {
        is_state[r] = true;
    }

    let n = netlist.net_count();
    let mut in_cut = vec![false; n];
    let mut free = vec![false; n];
    let mut gate_in_cut = vec![false; netlist.gates().len()];
    let mut visited = 0;
    let mut work: VecDeque<NetId> = state_regs.iter().map(|&r| regs[r].d).collect();
    while let Some(net) = work.pop_front() {
        if in_cut[net.index()] {
            continue;
        }
        in_cut[net.index()] = true;
        visited += 1;
        match netlist.driver(net) {
            Driver::Input => free[net.index()] = true,
            Driver::Register(r) => free[net.index()] = !is_state[r],
            Driver::Gate(g) => {
                gate_in_cut[g] = true;
                visited += 1;
                work.extend(netlist.gates()[g].inputs.iter().copied());
            }
        }
    }
    for &r in &state_regs {
        in_cut[regs[r].q.index()] = true;
    }

    // A sub-netlist of a valid netlist cannot violate the builder's rules.
    const VALID: &str = "cut of a valid netlist";
    let mut b = NetlistBuilder::new();
    let mut remap = vec![NetId(u32::MAX); n];
    for i in (0..n).filter(|&i| in_cut[i]) {
        remap[i] = b.net(netlist.net_name(NetId(i as u32)));
    }
    let mut free_inputs = Vec::new();
    for i in (0..n).filter(|&i| free[i]) {
        free_inputs.push(b.add_input(netlist.net_name(NetId(i as u32))).expect(VALID));
    }
    for &r in &state_regs {
        let reg = &regs[r];
        b.add_register_ids(&reg.name, remap[reg.q.index()], remap[reg.d.index()]).expect(VALID);
    }
    for (gate, _) in netlist.gates().iter().zip(&gate_in_cut).filter(|(_, &c)| c) {
        let inputs = gate.inputs.iter().map(|i| remap[i.index()]).collect();
        b.add_gate_ids(gate.kind, remap[gate.output.index()], inputs).expect(VALID);
    }
    for &r in &state_regs {
        b.add_output(netlist.net_name(regs[r].q));
    }
    let cut_netlist = b.finish().expect(VALID);
    free_inputs.sort();
    Ok(Cut { netlist: cut_netlist, free_inputs, state_registers: (0..state_regs.len()).collect(), visited })
}
