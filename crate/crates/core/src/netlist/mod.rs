//! Gate-level netlists: nets, combinational gates and D flip-flops.
//!
//! A [`Netlist`] is only ever produced by [`NetlistBuilder::finish`], which
//! enforces the structural rules every consumer relies on: one driver per
//! net, correct gate arity, and an acyclic combinational part.

mod bench;
mod json;
mod ternary;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use bench::{parse_bench, write_bench};
pub use json::NetlistJson;
pub use ternary::Ternary;

/// Dense net index, assigned in first-appearance order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NetId(pub u32);

impl NetId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    And,
    Nand,
    Or,
    Nor,
    Not,
    Buff,
    Xor,
    Xnor,
    /// `MUX(select, in0, in1)`: `in1` when select is high.
    Mux,
    Const0,
    Const1,
}

impl GateKind {
    pub const ALL: [GateKind; 11] = [
        GateKind::And,
        GateKind::Nand,
        GateKind::Or,
        GateKind::Nor,
        GateKind::Not,
        GateKind::Buff,
        GateKind::Xor,
        GateKind::Xnor,
        GateKind::Mux,
        GateKind::Const0,
        GateKind::Const1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Nand => "NAND",
            GateKind::Or => "OR",
            GateKind::Nor => "NOR",
            GateKind::Not => "NOT",
            GateKind::Buff => "BUFF",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Mux => "MUX",
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
        }
    }

    pub fn arity_ok(self, n: usize) -> bool {
        match self {
            GateKind::Not | GateKind::Buff => n == 1,
            GateKind::Mux => n == 3,
            GateKind::Const0 | GateKind::Const1 => n == 0,
            _ => n >= 2,
        }
    }

    fn arity_text(self) -> &'static str {
        match self {
            GateKind::Not | GateKind::Buff => "exactly 1",
            GateKind::Mux => "exactly 3",
            GateKind::Const0 | GateKind::Const1 => "no",
            _ => "at least 2",
        }
    }

    /// Two-valued evaluation.
    pub fn eval(self, inputs: &[bool]) -> bool {
        match self {
            GateKind::And => inputs.iter().all(|&v| v),
            GateKind::Nand => !inputs.iter().all(|&v| v),
            GateKind::Or => inputs.iter().any(|&v| v),
            GateKind::Nor => !inputs.iter().any(|&v| v),
            GateKind::Not => !inputs[0],
            GateKind::Buff => inputs[0],
            GateKind::Xor => inputs.iter().fold(false, |a, &v| a ^ v),
            GateKind::Xnor => !inputs.iter().fold(false, |a, &v| a ^ v),
            GateKind::Mux => {
                if inputs[0] {
                    inputs[2]
                } else {
                    inputs[1]
                }
            }
            GateKind::Const0 => false,
            GateKind::Const1 => true,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = ();

    /// Case-insensitive; accepts `BUF` as an alias of `BUFF`.
    fn from_str(s: &str) -> Result<Self, ()> {
        let upper = s.to_ascii_uppercase();
        let kind = match upper.as_str() {
            "AND" => GateKind::And,
            "NAND" => GateKind::Nand,
            "OR" => GateKind::Or,
            "NOR" => GateKind::Nor,
            "NOT" | "INV" => GateKind::Not,
            "BUFF" | "BUF" => GateKind::Buff,
            "XOR" => GateKind::Xor,
            "XNOR" => GateKind::Xnor,
            "MUX" => GateKind::Mux,
            "CONST0" => GateKind::Const0,
            "CONST1" => GateKind::Const1,
            _ => return Err(()),
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<NetId>,
    pub output: NetId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub d: NetId,
    pub q: NetId,
}

/// What drives a net.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    Input,
    Gate(usize),
    Register(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{}net `{name}` is used but never driven", at(*.line))]
    UndefinedNet { name: String, line: Option<usize> },
    #[error("{}net `{name}` has more than one driver", at(*.line))]
    DuplicateDriver { name: String, line: Option<usize> },
    #[error("{}{kind} gate driving `{output}` takes {} inputs, got {found}", at(*.line), kind.arity_text())]
    Arity { kind: GateKind, output: String, found: usize, line: Option<usize> },
    #[error("combinational cycle through nets: {}", nets.join(" -> "))]
    CombinationalCycle { nets: Vec<String> },
    #[error("unknown net id {0}")]
    UnknownNetId(u32),
}

fn at(line: Option<usize>) -> String {
    match line {
        Some(l) => format!("line {l}: "),
        None => String::new(),
    }
}

/// A validated gate-level netlist. Immutable once built.
#[derive(Debug, Clone)]
pub struct Netlist {
    names: Vec<String>,
    index: HashMap<String, NetId>,
    drivers: Vec<Driver>,
    gates: Vec<Gate>,
    registers: Vec<Register>,
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    topo: Vec<usize>,
}

impl Netlist {
    pub fn net_count(&self) -> usize {
        self.names.len()
    }

    pub fn net_name(&self, id: NetId) -> &str {
        &self.names[id.index()]
    }

    pub fn net_names(&self) -> &[String] {
        &self.names
    }

    pub fn net_id(&self, name: &str) -> Option<NetId> {
        self.index.get(name).copied()
    }

    pub fn driver(&self, id: NetId) -> Driver {
        self.drivers[id.index()]
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register_index(&self, name: &str) -> Option<usize> {
        self.registers.iter().position(|r| r.name == name)
    }

    /// Primary inputs in declaration order.
    pub fn inputs(&self) -> &[NetId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[NetId] {
        &self.outputs
    }

    pub fn is_input(&self, id: NetId) -> bool {
        self.drivers[id.index()] == Driver::Input
    }

    pub fn is_register_output(&self, id: NetId) -> bool {
        matches!(self.drivers[id.index()], Driver::Register(_))
    }

    /// Gate indices such that every gate follows the gates driving its
    /// inputs; ties are broken by ascending output net id.
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    /// Two-valued evaluation of all nets. `values` must hold the primary
    /// input and register output values; gate outputs are overwritten.
    pub fn eval_bool_in_place(&self, values: &mut [bool]) {
        let mut buf = Vec::new();
        for &g in &self.topo {
            let gate = &self.gates[g];
            buf.clear();
            buf.extend(gate.inputs.iter().map(|n| values[n.index()]));
            values[gate.output.index()] = gate.kind.eval(&buf);
        }
    }

    /// Three-valued evaluation in place; see [`Netlist::simulate_ternary`].
    pub fn eval_ternary_in_place(&self, values: &mut [Ternary]) {
        for &g in &self.topo {
            let gate = &self.gates[g];
            values[gate.output.index()] = Ternary::eval_gate(gate.kind, gate.inputs.iter().map(|n| values[n.index()]));
        }
    }

    /// Three-valued simulation from an assignment of the primary inputs and
    /// register outputs. Sources missing from `assignment` are treated as X.
    pub fn simulate_ternary(&self, assignment: &HashMap<NetId, Ternary>) -> Vec<Ternary> {
        let mut values = vec![Ternary::X; self.net_count()];
        for (&net, &v) in assignment {
            values[net.index()] = v;
        }
        self.eval_ternary_in_place(&mut values);
        values
    }

    /// Nets in the transitive fan-in of `roots`, stopping at primary inputs
    /// and register outputs (which are included).
    pub fn fanin_cone(&self, roots: impl IntoIterator<Item = NetId>) -> Vec<bool> {
        let mut seen = vec![false; self.net_count()];
        let mut stack: Vec<NetId> = roots.into_iter().collect();
        while let Some(net) = stack.pop() {
            if std::mem::replace(&mut seen[net.index()], true) {
                continue;
            }
            if let Driver::Gate(g) = self.drivers[net.index()] {
                stack.extend(self.gates[g].inputs.iter().copied());
            }
        }
        seen
    }
}

/// Incremental construction of a [`Netlist`]. Nets are created on first
/// mention, so forward references are allowed; [`NetlistBuilder::finish`]
/// checks the structural rules.
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    names: Vec<String>,
    index: HashMap<String, NetId>,
    first_use: Vec<Option<usize>>,
    drivers: Vec<Option<Driver>>,
    gates: Vec<Gate>,
    registers: Vec<Register>,
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    line: Option<usize>,
}

impl NetlistBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Source line attached to errors raised by subsequent calls.
    pub fn set_line(&mut self, line: Option<usize>) {
        self.line = line;
    }

    /// Returns the id of `name`, creating the net if needed.
    pub fn net(&mut self, name: &str) -> NetId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = NetId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.first_use.push(self.line);
        self.drivers.push(None);
        id
    }

    pub fn name(&self, id: NetId) -> &str {
        &self.names[id.index()]
    }

    fn drive(&mut self, id: NetId, driver: Driver) -> Result<(), NetlistError> {
        let slot = &mut self.drivers[id.index()];
        if slot.is_some() {
            return Err(NetlistError::DuplicateDriver { name: self.names[id.index()].clone(), line: self.line });
        }
        *slot = Some(driver);
        Ok(())
    }

    pub fn add_input(&mut self, name: &str) -> Result<NetId, NetlistError> {
        let id = self.net(name);
        self.drive(id, Driver::Input)?;
        self.inputs.push(id);
        Ok(id)
    }

    pub fn add_output(&mut self, name: &str) -> NetId {
        let id = self.net(name);
        if !self.outputs.contains(&id) {
            self.outputs.push(id);
        }
        id
    }

    pub fn add_gate(&mut self, kind: GateKind, output: &str, inputs: &[&str]) -> Result<NetId, NetlistError> {
        let out = self.net(output);
        let ins: Vec<NetId> = inputs.iter().map(|n| self.net(n)).collect();
        self.add_gate_ids(kind, out, ins)
    }

    pub fn add_gate_ids(&mut self, kind: GateKind, output: NetId, inputs: Vec<NetId>) -> Result<NetId, NetlistError> {
        if !kind.arity_ok(inputs.len()) {
            return Err(NetlistError::Arity {
                kind,
                output: self.names[output.index()].clone(),
                found: inputs.len(),
                line: self.line,
            });
        }
        self.drive(output, Driver::Gate(self.gates.len()))?;
        self.gates.push(Gate { kind, inputs, output });
        Ok(output)
    }

    /// Adds a flip-flop whose output net is named `q`; the register takes
    /// the same name.
    pub fn add_register(&mut self, q: &str, d: &str) -> Result<NetId, NetlistError> {
        let q_id = self.net(q);
        let d_id = self.net(d);
        self.add_register_ids(q, q_id, d_id)
    }

    pub fn add_register_ids(&mut self, name: &str, q: NetId, d: NetId) -> Result<NetId, NetlistError> {
        self.drive(q, Driver::Register(self.registers.len()))?;
        self.registers.push(Register { name: name.to_string(), d, q });
        Ok(q)
    }

    pub fn finish(self) -> Result<Netlist, NetlistError> {
        let mut drivers = Vec::with_capacity(self.drivers.len());
        for (i, d) in self.drivers.iter().enumerate() {
            match d {
                Some(d) => drivers.push(*d),
                None => {
                    return Err(NetlistError::UndefinedNet { name: self.names[i].clone(), line: self.first_use[i] })
                }
            }
        }
        let topo = topo_sort(&self.names, &drivers, &self.gates)?;
        Ok(Netlist {
            names: self.names,
            index: self.index,
            drivers,
            gates: self.gates,
            registers: self.registers,
            inputs: self.inputs,
            outputs: self.outputs,
            topo,
        })
    }
}

/// Kahn's algorithm with a min-heap on output net id.
fn topo_sort(names: &[String], drivers: &[Driver], gates: &[Gate]) -> Result<Vec<usize>, NetlistError> {
    let mut pending = vec![0usize; gates.len()];
    let mut fanout: Vec<Vec<usize>> = vec![Vec::new(); names.len()];
    for (g, gate) in gates.iter().enumerate() {
        for &inp in &gate.inputs {
            if let Driver::Gate(_) = drivers[inp.index()] {
                pending[g] += 1;
                fanout[inp.index()].push(g);
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<(NetId, usize)>> =
        gates.iter().enumerate().filter(|(g, _)| pending[*g] == 0).map(|(g, gate)| Reverse((gate.output, g))).collect();
    let mut order = Vec::with_capacity(gates.len());
    while let Some(Reverse((out, g))) = ready.pop() {
        order.push(g);
        for &succ in &fanout[out.index()] {
            pending[succ] -= 1;
            if pending[succ] == 0 {
                ready.push(Reverse((gates[succ].output, succ)));
            }
        }
    }
    if order.len() == gates.len() {
        return Ok(order);
    }
    Err(NetlistError::CombinationalCycle { nets: find_cycle(names, drivers, gates, &pending) })
}

/// Walks backwards through gates that never became ready until a net
/// repeats; every such gate has at least one blocked gate input.
fn find_cycle(names: &[String], drivers: &[Driver], gates: &[Gate], pending: &[usize]) -> Vec<String> {
    let blocked = |g: usize| pending[g] > 0;
    let start = (0..gates.len()).find(|&g| blocked(g)).expect("cycle exists");
    let mut pos: HashMap<usize, usize> = HashMap::new();
    let mut path = Vec::new();
    let mut g = start;
    loop {
        if let Some(&p) = pos.get(&g) {
            let mut cycle: Vec<String> =
                path[p..].iter().map(|&g: &usize| names[gates[g].output.index()].clone()).collect();
            cycle.reverse();
            cycle.push(cycle[0].clone());
            return cycle;
        }
        pos.insert(g, path.len());
        path.push(g);
        g = gates[g]
            .inputs
            .iter()
            .find_map(|inp| match drivers[inp.index()] {
                Driver::Gate(h) if blocked(h) => Some(h),
                _ => None,
            })
            .expect("blocked gate has a blocked predecessor");
    }
}
