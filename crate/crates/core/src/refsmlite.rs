//! Baseline enumerator that recovers every transition condition.
//!
//! Starting with all free inputs unknown, the cut is simulated in
//! three-valued logic. When every next-state bit is known the assigned
//! inputs form a condition cube; otherwise the lowest-numbered unassigned
//! input is set to 0 and then to 1 and the search recurses. Controlling
//! values let many inputs stay unassigned, but the search still has to cover
//! the whole input space of each state.

use std::collections::BTreeMap;
use std::io;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::netlist::{NetId, Ternary};
use crate::recut::{Cut, FsmSpec};
use crate::topology::{explore, Expansion, StateWord, TransitionGraph};

pub const DEFAULT_MAX_INPUTS: usize = 24;

/// A partial assignment of free inputs; unassigned inputs are don't-cares.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ConditionCube {
    assignments: Vec<(NetId, bool)>,
}

impl ConditionCube {
    pub fn new(mut assignments: Vec<(NetId, bool)>) -> Self {
        assignments.sort();
        ConditionCube { assignments }
    }

    pub fn assignments(&self) -> &[(NetId, bool)] {
        &self.assignments
    }

    pub fn get(&self, net: NetId) -> Option<bool> {
        self.assignments.iter().find(|(n, _)| *n == net).map(|&(_, b)| b)
    }

    pub fn assigned(&self) -> usize {
        self.assignments.len()
    }

    /// One character per entry of `inputs`: `0`, `1`, or `-` for don't-care.
    pub fn render(&self, inputs: &[NetId]) -> String {
        inputs
            .iter()
            .map(|&i| match self.get(i) {
                Some(true) => '1',
                Some(false) => '0',
                None => '-',
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct BruteConfig {
    pub max_states: usize,
    pub threads: usize,
    /// Refuse cuts whose next state depends on more free inputs than this.
    pub max_inputs: usize,
    pub extra_seeds: Vec<StateWord>,
}

impl Default for BruteConfig {
    fn default() -> Self {
        BruteConfig {
            max_states: crate::enumsat::DEFAULT_MAX_STATES,
            threads: 1,
            max_inputs: DEFAULT_MAX_INPUTS,
            extra_seeds: Vec::new(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BruteError {
    #[error("state `{state}` has {} bits but the FSM has {expected} state registers", state.width())]
    WidthMismatch { state: StateWord, expected: usize },
    #[error("next state depends on {found} free inputs; condition enumeration is limited to {limit}")]
    TooManyInputs { found: usize, limit: usize },
}

/// Topology plus the condition cubes of every transition.
#[derive(Debug, Clone)]
pub struct ConditionedGraph {
    pub base: TransitionGraph,
    pub conditions: BTreeMap<(StateWord, StateWord), Vec<ConditionCube>>,
    /// Free inputs the cubes range over, ascending by net id.
    pub inputs: Vec<NetId>,
    pub input_names: Vec<String>,
    pub simulations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubeStats {
    pub netlist: String,
    pub states: usize,
    pub edges: usize,
    pub cubes: u64,
    pub acpt: f64,
}

impl ConditionedGraph {
    pub fn total_cubes(&self) -> u64 {
        self.conditions.values().map(|c| c.len() as u64).sum()
    }

    /// Average number of condition cubes per transition.
    pub fn acpt(&self) -> f64 {
        match self.base.edges.len() {
            0 => 0.0,
            e => self.total_cubes() as f64 / e as f64,
        }
    }

    pub fn stats(&self, netlist: &str) -> CubeStats {
        CubeStats {
            netlist: netlist.to_string(),
            states: self.base.states.len(),
            edges: self.base.edges.len(),
            cubes: self.total_cubes(),
            acpt: self.acpt(),
        }
    }

    /// The graph's JSON form extended with `acpt`, the input order and the
    /// cubes of every edge.
    pub fn to_json_value(&self) -> serde_json::Value {
        let mut v = self.base.to_json_value();
        let obj = v.as_object_mut().expect("graph json is an object");
        obj.insert("acpt".into(), self.acpt().into());
        obj.insert("cubes".into(), self.total_cubes().into());
        obj.insert("free_inputs".into(), self.input_names.clone().into());
        let conditions: Vec<serde_json::Value> = self
            .conditions
            .iter()
            .map(|((from, to), cubes)| {
                serde_json::json!({
                    "from": from.to_string(),
                    "to": to.to_string(),
                    "cubes": cubes.iter().map(|c| c.render(&self.inputs)).collect::<Vec<_>>(),
                })
            })
            .collect();
        obj.insert("conditions".into(), conditions.into());
        v
    }
}

/// Writes `netlist,states,edges,cubes,acpt` rows with a header.
pub fn write_stats_csv<W: io::Write>(out: W, rows: &[CubeStats]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

struct Search<'a> {
    cut: &'a Cut,
    branch: Vec<NetId>,
    q: Vec<NetId>,
    d: Vec<NetId>,
}

struct Found {
    by_next: BTreeMap<StateWord, Vec<ConditionCube>>,
    simulations: u64,
}

impl<'a> Search<'a> {
    fn new(cut: &'a Cut, max_inputs: usize) -> Result<Self, BruteError> {
        let d = cut.d_nets();
        let cone = cut.netlist.fanin_cone(d.iter().copied());
        // Inputs outside every D cone can never be needed to resolve D.
        let branch: Vec<NetId> = cut.free_inputs.iter().copied().filter(|i| cone[i.index()]).collect();
        if branch.len() > max_inputs {
            return Err(BruteError::TooManyInputs { found: branch.len(), limit: max_inputs });
        }
        Ok(Search { cut, branch, q: cut.q_nets(), d })
    }

    fn run(&self, current: &StateWord) -> Found {
        let mut values = vec![Ternary::X; self.cut.netlist.net_count()];
        for (&q, &b) in self.q.iter().zip(current.bits()) {
            values[q.index()] = Ternary::from_bool(b);
        }
        let mut found = Found { by_next: BTreeMap::new(), simulations: 0 };
        let mut assigned = Vec::with_capacity(self.branch.len());
        self.recurse(&mut values, &mut assigned, &mut found);
        found
    }

    fn recurse(&self, values: &mut [Ternary], assigned: &mut Vec<(NetId, bool)>, found: &mut Found) {
        self.cut.netlist.eval_ternary_in_place(values);
        found.simulations += 1;
        let next: Option<Vec<bool>> = self.d.iter().map(|d| values[d.index()].to_bool()).collect();
        if let Some(bits) = next {
            found
                .by_next
                .entry(StateWord::new(bits))
                .or_default()
                .push(ConditionCube { assignments: assigned.clone() });
            return;
        }
        let input =
            *self.branch.get(assigned.len()).expect("next state is determined once every cone input is assigned");
        for b in [false, true] {
            values[input.index()] = Ternary::from_bool(b);
            assigned.push((input, b));
            self.recurse(values, assigned, found);
            assigned.pop();
        }
        values[input.index()] = Ternary::X;
    }
}

fn check_width(cut: &Cut, state: &StateWord) -> Result<(), BruteError> {
    if state.width() != cut.width() {
        return Err(BruteError::WidthMismatch { state: state.clone(), expected: cut.width() });
    }
    Ok(())
}

/// Condition cubes of every transition out of `current`, keyed by next state.
pub fn enumerate_conditions(
    cut: &Cut,
    current: &StateWord,
) -> Result<BTreeMap<StateWord, Vec<ConditionCube>>, BruteError> {
    check_width(cut, current)?;
    Ok(Search::new(cut, DEFAULT_MAX_INPUTS)?.run(current).by_next)
}

/// Breadth-first enumeration from the reset state, recording the conditions
/// of every transition.
pub fn enumerate_with_conditions(
    cut: &Cut,
    spec: &FsmSpec,
    config: &BruteConfig,
) -> Result<ConditionedGraph, BruteError> {
    let start = Instant::now();
    let mut seeds = vec![spec.reset.clone()];
    seeds.extend(config.extra_seeds.iter().cloned());
    for s in &seeds {
        check_width(cut, s)?;
    }
    let search = Search::new(cut, config.max_inputs)?;
    let sims = std::sync::atomic::AtomicU64::new(0);
    let ex = explore(&seeds, config.max_states, config.threads, |state| {
        let found = search.run(state);
        sims.fetch_add(found.simulations, std::sync::atomic::Ordering::Relaxed);
        Ok::<_, BruteError>(Expansion {
            successors: found.by_next.into_iter().collect(),
            solve_calls: 0,
            exhausted: false,
        })
    })?;
    let base = TransitionGraph {
        reset: spec.reset.clone(),
        states: ex.states,
        edges: ex.edges.keys().cloned().collect(),
        solve_calls: 0,
        wall_time: start.elapsed(),
        completion: ex.completion,
    };
    let names = search.branch.iter().map(|&i| cut.netlist.net_name(i).to_string()).collect();
    Ok(ConditionedGraph {
        base,
        conditions: ex.edges,
        inputs: search.branch,
        input_names: names,
        simulations: sims.into_inner(),
    })
}
