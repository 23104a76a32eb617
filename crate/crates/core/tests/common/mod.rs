//! Helpers shared by the integration suites: a random sequential netlist
//! generator and a reference evaluator that does not use the library's gate
//! semantics.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use fsmforge::netlist::{Driver, GateKind, NetId, Netlist, NetlistBuilder};
use fsmforge::{FsmSpec, StateWord};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random netlist with inputs `i*`, registers `r*` and gates `g*`. Gates
/// read only inputs, register outputs and earlier gates, so the
/// combinational part is acyclic. Every register's D is a gate output or an
/// input.
pub fn random_netlist(seed: u64, n_inputs: usize, n_regs: usize, n_gates: usize) -> Netlist {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = NetlistBuilder::new();
    let mut pool: Vec<NetId> = (0..n_inputs).map(|i| b.add_input(&format!("i{i}")).unwrap()).collect();
    let q: Vec<NetId> = (0..n_regs).map(|r| b.net(&format!("r{r}"))).collect();
    pool.extend(&q);
    const KINDS: [GateKind; 11] = [
        GateKind::And,
        GateKind::Nand,
        GateKind::Or,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Xnor,
        GateKind::Not,
        GateKind::Buff,
        GateKind::Mux,
        GateKind::Const0,
        GateKind::Const1,
    ];
    let mut gates = Vec::new();
    for g in 0..n_gates {
        let kind = if rng.gen_bool(0.05) { KINDS[9 + rng.gen_range(0..2)] } else { KINDS[rng.gen_range(0..9)] };
        let arity = match kind {
            GateKind::Const0 | GateKind::Const1 => 0,
            GateKind::Not | GateKind::Buff => 1,
            GateKind::Mux => 3,
            _ => rng.gen_range(2..=4),
        };
        let ins: Vec<NetId> = (0..arity).map(|_| *pool.choose(&mut rng).unwrap()).collect();
        let out = b.net(&format!("g{g}"));
        b.add_gate_ids(kind, out, ins).unwrap();
        pool.push(out);
        gates.push(out);
    }
    for (r, &qn) in q.iter().enumerate() {
        let d = if gates.is_empty() { *pool.choose(&mut rng).unwrap() } else { *gates.choose(&mut rng).unwrap() };
        b.add_register_ids(&format!("r{r}"), qn, d).unwrap();
    }
    if let Some(&last) = gates.last() {
        let name = b.name(last).to_string();
        b.add_output(&name);
    }
    b.finish().unwrap()
}

fn reference_gate(kind: GateKind, v: &[bool]) -> bool {
    let ones = v.iter().filter(|&&b| b).count();
    match kind {
        GateKind::And => ones == v.len(),
        GateKind::Nand => ones != v.len(),
        GateKind::Or => ones > 0,
        GateKind::Nor => ones == 0,
        GateKind::Xor => ones % 2 == 1,
        GateKind::Xnor => ones % 2 == 0,
        GateKind::Not => !v[0],
        GateKind::Buff => v[0],
        GateKind::Mux => {
            if v[0] {
                v[2]
            } else {
                v[1]
            }
        }
        GateKind::Const0 => false,
        GateKind::Const1 => true,
    }
}

/// Value of every net given values of the inputs and register outputs,
/// computed by memoized recursion over drivers.
pub fn reference_eval(n: &Netlist, free: &BTreeMap<NetId, bool>) -> Vec<bool> {
    fn go(n: &Netlist, free: &BTreeMap<NetId, bool>, memo: &mut Vec<Option<bool>>, id: NetId) -> bool {
        if let Some(v) = memo[id.index()] {
            return v;
        }
        let v = match n.driver(id) {
            Driver::Gate(g) => {
                let gate = &n.gates()[g];
                let ins: Vec<bool> = gate.inputs.iter().map(|&i| go(n, free, memo, i)).collect();
                reference_gate(gate.kind, &ins)
            }
            _ => free[&id],
        };
        memo[id.index()] = Some(v);
        v
    }
    let mut memo = vec![None; n.net_count()];
    (0..n.net_count() as u32).map(|i| go(n, free, &mut memo, NetId(i))).collect()
}

/// Nets that are free in one evaluation step: primary inputs and every
/// register output.
pub fn step_sources(n: &Netlist) -> Vec<NetId> {
    let mut v: Vec<NetId> = n.inputs().to_vec();
    v.extend(n.registers().iter().map(|r| r.q));
    v.sort();
    v
}

/// Topology by exhaustive simulation of the full netlist: state registers
/// take the state, every other source ranges over all values.
pub fn reference_topology(n: &Netlist, spec: &FsmSpec) -> BTreeMap<StateWord, BTreeSet<StateWord>> {
    let regs: Vec<usize> = spec.state_registers.iter().map(|r| n.register_index(r).unwrap()).collect();
    let q: Vec<NetId> = regs.iter().map(|&r| n.registers()[r].q).collect();
    let d: Vec<NetId> = regs.iter().map(|&r| n.registers()[r].d).collect();
    let others: Vec<NetId> = step_sources(n).into_iter().filter(|s| !q.contains(s)).collect();
    assert!(others.len() <= 16, "reference topology limited to 16 free bits");
    let mut out = BTreeMap::new();
    let mut queue = VecDeque::from([spec.reset.clone()]);
    while let Some(s) = queue.pop_front() {
        if out.contains_key(&s) {
            continue;
        }
        let mut succ = BTreeSet::new();
        for word in 0u64..1 << others.len() {
            let mut free: BTreeMap<NetId, bool> =
                others.iter().enumerate().map(|(k, &id)| (id, word >> k & 1 == 1)).collect();
            free.extend(q.iter().zip(s.bits()).map(|(&id, &b)| (id, b)));
            let v = reference_eval(n, &free);
            succ.insert(StateWord::new(d.iter().map(|id| v[id.index()]).collect()));
        }
        queue.extend(succ.iter().cloned());
        out.insert(s, succ);
    }
    out
}

/// A spec over the first `width` registers with a reset drawn from `seed`.
pub fn spec_for(n: &Netlist, width: usize, seed: u64) -> FsmSpec {
    let regs: Vec<String> = n.registers()[..width].iter().map(|r| r.name.clone()).collect();
    FsmSpec::new(regs, StateWord::from_lsb(seed, width)).unwrap()
}

/// Two registers whose next states can never both be 1: `U1` needs `I0` and
/// `U3` needs its inverse.
pub const EXCLUSIVE_PAIR: &str = "\
INPUT(I0)
U2 = DFF(U1)
U4 = DFF(U3)
U1 = AND(I0, U4)
U5 = NOT(I0)
U3 = AND(U2, U5)
";
