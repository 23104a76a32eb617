//! Seeded synthetic FSMs with known topology, and their gate-level
//! realizations.
//!
//! All randomness comes from ChaCha8 seeded with `seed_from_u64`, so a seed
//! reproduces the same FSM on every platform.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{GateKind, NetId, Netlist, NetlistBuilder};
use crate::recut::FsmSpec;
use crate::topology::StateWord;

pub const MAX_STATES: usize = 64;
pub const MAX_INPUTS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TestkitError {
    #[error("state count {0} outside 1..={MAX_STATES}")]
    States(usize),
    #[error("input count {0} exceeds {MAX_INPUTS}")]
    Inputs(usize),
    #[error("density {0} outside (0, 1]")]
    Density(f64),
    #[error("parity FSM needs 1 <= min_fanin <= inputs, got {min_fanin} of {inputs}")]
    Fanin { min_fanin: usize, inputs: usize },
}

/// Ground truth for a generated FSM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsmTruth {
    pub seed: u64,
    pub n_states: usize,
    pub n_inputs: usize,
    /// `transition[state][input_word]` is the next state.
    pub transition: Vec<Vec<usize>>,
    /// Register encoding of each state; state 0 is the reset state.
    pub encoding: Vec<StateWord>,
}

impl FsmTruth {
    pub fn width(&self) -> usize {
        self.encoding[0].width()
    }

    pub fn reset(&self) -> &StateWord {
        &self.encoding[0]
    }

    /// Encoded successor sets of every state.
    pub fn topology(&self) -> BTreeMap<StateWord, BTreeSet<StateWord>> {
        self.transition
            .iter()
            .enumerate()
            .map(|(s, row)| (self.encoding[s].clone(), row.iter().map(|&t| self.encoding[t].clone()).collect()))
            .collect()
    }

    /// `truth.json` document: the fields above plus the reset word and a
    /// flat `[state, input_word, next]` transition list.
    pub fn to_json(&self) -> serde_json::Value {
        let transitions: Vec<[usize; 3]> = self
            .transition
            .iter()
            .enumerate()
            .flat_map(|(s, row)| row.iter().enumerate().map(move |(x, &t)| [s, x, t]))
            .collect();
        serde_json::json!({
            "seed": self.seed,
            "n_states": self.n_states,
            "n_inputs": self.n_inputs,
            "width": self.width(),
            "reset": self.reset().to_string(),
            "encoding": self.encoding.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "transitions": transitions,
        })
    }
}

fn state_width(n_states: usize) -> usize {
    (usize::BITS - (n_states.max(2) - 1).leading_zeros()) as usize
}

/// Random FSM in which every state reaches roughly `density` of the possible
/// distinct successors and every state is reachable from state 0.
pub fn generate(seed: u64, n_states: usize, n_inputs: usize, density: f64) -> Result<FsmTruth, TestkitError> {
    if !(1..=MAX_STATES).contains(&n_states) {
        return Err(TestkitError::States(n_states));
    }
    if n_inputs > MAX_INPUTS {
        return Err(TestkitError::Inputs(n_inputs));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(TestkitError::Density(density));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = 1usize << n_inputs;
    let fanout = ((density * n_states.min(words) as f64).round() as usize).max(1);

    // Spanning tree first: each state hangs off an earlier state that still
    // has a free successor slot. Among the first j states at most j - 1
    // slots are used, so a free one always exists.
    let mut order: Vec<usize> = (1..n_states).collect();
    order.shuffle(&mut rng);
    order.insert(0, 0);
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n_states];
    for j in 1..n_states {
        let open: Vec<usize> = order[..j].iter().copied().filter(|&s| succ[s].len() < fanout).collect();
        let parent = *open.choose(&mut rng).expect("a free successor slot");
        succ[parent].push(order[j]);
    }
    for targets in &mut succ {
        while targets.len() < fanout {
            let t = rng.gen_range(0..n_states);
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
    }

    let transition = succ
        .iter()
        .map(|targets| {
            let mut inputs: Vec<usize> = (0..words).collect();
            inputs.shuffle(&mut rng);
            let mut row = vec![0; words];
            for (k, &x) in inputs.iter().enumerate() {
                row[x] = if k < targets.len() { targets[k] } else { *targets.choose(&mut rng).expect("nonempty") };
            }
            row
        })
        .collect();

    let width = state_width(n_states);
    let mut codes: Vec<u64> = (0..1u64 << width).collect();
    codes.shuffle(&mut rng);
    let encoding = codes[..n_states].iter().map(|&c| StateWord::from_lsb(c, width)).collect();
    Ok(FsmTruth { seed, n_states, n_inputs, transition, encoding })
}

/// Shape parameters drawn from `seed`: 1–64 states, 0–6 inputs, density in
/// [0.1, 1].
pub fn random_shape(seed: u64) -> (usize, usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f5a1_0c0d_e000);
    let n_states = rng.gen_range(1..=MAX_STATES);
    let n_inputs = rng.gen_range(0..=MAX_INPUTS);
    let density = rng.gen_range(0.1..=1.0);
    (n_states, n_inputs, density)
}

/// [`generate`] with shape parameters from [`random_shape`].
pub fn generate_from_seed(seed: u64) -> FsmTruth {
    let (s, i, d) = random_shape(seed);
    generate(seed, s, i, d).expect("random_shape stays in bounds")
}

enum Term {
    Literal(NetId, bool),
    Minterm(NetId),
}

/// Two-level sum-of-products realization: one register per state bit, one
/// minterm per `(state, input word)` row, one OR per next-state bit. Single
/// literals and single terms are wired through without an AND/OR.
pub fn synthesize(truth: &FsmTruth) -> (Netlist, FsmSpec) {
    let width = truth.width();
    let mut b = NetlistBuilder::new();
    let inputs: Vec<NetId> = (0..truth.n_inputs).map(|j| b.add_input(&format!("x{j}")).expect("fresh name")).collect();
    let regs: Vec<String> = (0..width).map(|i| format!("s{i}")).collect();
    let q: Vec<NetId> =
        regs.iter().enumerate().map(|(i, r)| b.add_register(r, &format!("d{i}")).expect("fresh name")).collect();

    let mut terms: Vec<Vec<(usize, usize)>> = vec![Vec::new(); width];
    for (s, row) in truth.transition.iter().enumerate() {
        for (x, &t) in row.iter().enumerate() {
            for (i, bit_terms) in terms.iter_mut().enumerate() {
                if truth.encoding[t].bit(i) {
                    bit_terms.push((s, x));
                }
            }
        }
    }

    let mut inverted: BTreeMap<NetId, NetId> = BTreeMap::new();
    let mut minterms: BTreeMap<(usize, usize), NetId> = BTreeMap::new();
    let literals = |s: usize, x: usize| -> Vec<(NetId, bool)> {
        let code = &truth.encoding[s];
        let mut lits: Vec<(NetId, bool)> = (0..width).map(|i| (q[i], code.bit(i))).collect();
        lits.extend((0..truth.n_inputs).map(|j| (inputs[j], x >> j & 1 == 1)));
        lits
    };
    for (i, bit_terms) in terms.iter().enumerate() {
        let d = b.net(&format!("d{i}"));
        let mut realized = Vec::with_capacity(bit_terms.len());
        for &(s, x) in bit_terms {
            let lits = literals(s, x);
            if let [(net, pol)] = lits.as_slice() {
                realized.push(Term::Literal(*net, *pol));
                continue;
            }
            let m = match minterms.get(&(s, x)) {
                Some(&m) => m,
                None => {
                    let ins: Vec<NetId> = lits
                        .iter()
                        .map(|&(net, pol)| {
                            if pol {
                                net
                            } else {
                                *inverted.entry(net).or_insert_with(|| {
                                    let name = format!("{}_n", b.name(net));
                                    let out = b.net(&name);
                                    b.add_gate_ids(GateKind::Not, out, vec![net]).expect("fresh inverter");
                                    out
                                })
                            }
                        })
                        .collect();
                    let out = b.net(&format!("m{s}_{x}"));
                    b.add_gate_ids(GateKind::And, out, ins).expect("fresh minterm");
                    minterms.insert((s, x), out);
                    out
                }
            };
            realized.push(Term::Minterm(m));
        }
        match realized.as_slice() {
            [] => {
                b.add_gate_ids(GateKind::Const0, d, vec![]).expect("fresh next-state net");
            }
            [Term::Literal(net, pol)] => {
                let kind = if *pol { GateKind::Buff } else { GateKind::Not };
                b.add_gate_ids(kind, d, vec![*net]).expect("fresh next-state net");
            }
            [Term::Minterm(m)] => {
                b.add_gate_ids(GateKind::Buff, d, vec![*m]).expect("fresh next-state net");
            }
            many => {
                let ins: Vec<NetId> = many
                    .iter()
                    .map(|t| match t {
                        Term::Minterm(m) => *m,
                        Term::Literal(..) => unreachable!("single-literal minterms only occur with one row"),
                    })
                    .collect();
                b.add_gate_ids(GateKind::Or, d, ins).expect("fresh next-state net");
            }
        }
    }
    for &qn in &q {
        let name = b.name(qn).to_string();
        b.add_output(&name);
    }
    let netlist = b.finish().expect("synthesized netlist is well formed");
    let spec = FsmSpec::new(regs, truth.reset().clone()).expect("valid spec");
    (netlist, spec)
}

/// Each next-state bit `d_i = XOR(q_{i+1 mod k}, inputs...)` over a random
/// subset of at least `min_fanin` inputs; together the subsets cover every
/// input. Parity admits no don't-cares, so every state has `2^inputs`
/// condition cubes.
pub fn parity_fsm(
    seed: u64,
    state_bits: usize,
    n_inputs: usize,
    min_fanin: usize,
) -> Result<(Netlist, FsmSpec), TestkitError> {
    if min_fanin == 0 || min_fanin > n_inputs {
        return Err(TestkitError::Fanin { min_fanin, inputs: n_inputs });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = NetlistBuilder::new();
    let inputs: Vec<String> = (0..n_inputs).map(|j| format!("x{j}")).collect();
    for i in &inputs {
        b.add_input(i).expect("fresh name");
    }
    let regs: Vec<String> = (0..state_bits).map(|i| format!("s{i}")).collect();
    for (i, r) in regs.iter().enumerate() {
        b.add_register(r, &format!("d{i}")).expect("fresh name");
    }
    let mut covered = vec![false; n_inputs];
    let mut subsets: Vec<Vec<usize>> = (0..state_bits)
        .map(|_| {
            let size = rng.gen_range(min_fanin..=n_inputs);
            let mut all: Vec<usize> = (0..n_inputs).collect();
            all.shuffle(&mut rng);
            let mut pick = all[..size].to_vec();
            pick.sort();
            for &j in &pick {
                covered[j] = true;
            }
            pick
        })
        .collect();
    for (j, _) in covered.iter().enumerate().filter(|(_, c)| !**c) {
        subsets[0].push(j);
    }
    for (i, subset) in subsets.iter_mut().enumerate() {
        subset.sort();
        let mut args: Vec<&str> = vec![regs[(i + 1) % state_bits].as_str()];
        args.extend(subset.iter().map(|&j| inputs[j].as_str()));
        b.add_gate(GateKind::Xor, &format!("d{i}"), &args).expect("fresh next-state net");
    }
    for r in &regs {
        b.add_output(r);
    }
    let netlist = b.finish().expect("parity netlist is well formed");
    let spec = FsmSpec::new(regs, StateWord::zeros(state_bits)).expect("valid spec");
    Ok((netlist, spec))
}

/// Input-free binary up-counter, bit 0 least significant.
pub fn binary_counter(width: usize) -> (Netlist, FsmSpec) {
    assert!(width >= 1);
    let mut b = NetlistBuilder::new();
    let regs: Vec<String> = (0..width).map(|i| format!("c{i}")).collect();
    for (i, r) in regs.iter().enumerate() {
        b.add_register(r, &format!("n{i}")).expect("fresh name");
    }
    b.add_gate(GateKind::Not, "n0", &["c0"]).expect("fresh name");
    let mut carry = "c0".to_string();
    for (i, reg) in regs.iter().enumerate().skip(1) {
        b.add_gate(GateKind::Xor, &format!("n{i}"), &[reg, &carry]).expect("fresh name");
        if i + 1 < width {
            let next = format!("k{i}");
            b.add_gate(GateKind::And, &next, &[&carry, reg]).expect("fresh name");
            carry = next;
        }
    }
    let netlist = b.finish().expect("counter is well formed");
    (netlist, FsmSpec::new(regs, StateWord::zeros(width)).expect("valid spec"))
}

/// Appends random logic and registers that read from the existing design but
/// never feed back into it, so no existing fan-in cone changes.
pub fn pad_with_noise(netlist: &Netlist, n_extra_gates: usize, n_extra_regs: usize, seed: u64) -> Netlist {
    if n_extra_gates == 0 && n_extra_regs == 0 {
        return netlist.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = NetlistBuilder::new();
    for name in netlist.net_names() {
        b.net(name);
    }
    const VALID: &str = "copy of a valid netlist";
    for &i in netlist.inputs() {
        b.add_input(netlist.net_name(i)).expect(VALID);
    }
    for &o in netlist.outputs() {
        b.add_output(netlist.net_name(o));
    }
    for r in netlist.registers() {
        b.add_register_ids(&r.name, r.q, r.d).expect(VALID);
    }
    for g in netlist.gates() {
        b.add_gate_ids(g.kind, g.output, g.inputs.clone()).expect(VALID);
    }

    let mut prefix = String::from("nz");
    while netlist.net_names().iter().any(|n| n.starts_with(&prefix)) {
        prefix.push('_');
    }
    let mut pool: Vec<NetId> = (0..netlist.net_count() as u32).map(NetId).collect();
    let reg_q: Vec<NetId> = (0..n_extra_regs).map(|k| b.net(&format!("{prefix}r{k}"))).collect();
    pool.extend(&reg_q);

    const KINDS: [GateKind; 9] = [
        GateKind::And,
        GateKind::Nand,
        GateKind::Or,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Xnor,
        GateKind::Not,
        GateKind::Buff,
        GateKind::Mux,
    ];
    let mut noise_out = Vec::with_capacity(n_extra_gates);
    for k in 0..n_extra_gates {
        let kind = *KINDS.choose(&mut rng).expect("nonempty");
        let arity = match kind {
            GateKind::Not | GateKind::Buff => 1,
            GateKind::Mux => 3,
            _ => rng.gen_range(2..=3),
        };
        let ins: Vec<NetId> = (0..arity).map(|_| *pool.choose(&mut rng).expect("nonempty pool")).collect();
        let out = b.net(&format!("{prefix}g{k}"));
        b.add_gate_ids(kind, out, ins).expect("fresh noise gate");
        noise_out.push(out);
        pool.push(out);
    }
    for (k, &q) in reg_q.iter().enumerate() {
        let d = *noise_out.choose(&mut rng).unwrap_or_else(|| pool.choose(&mut rng).expect("nonempty pool"));
        b.add_register_ids(&format!("{prefix}r{k}"), q, d).expect("fresh noise register");
    }
    for &o in noise_out.iter().rev().take(8) {
        let name = b.name(o).to_string();
        b.add_output(&name);
    }
    b.finish().expect("padding keeps the netlist well formed")
}
