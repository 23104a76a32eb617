//! Topology enumeration by repeated SAT solving.
//!
//! For each reachable state the cut's CNF is instantiated with the current
//! state fixed on the Q variables. Every model yields a next state on the D
//! variables, which is then excluded with a blocking clause until the
//! problem becomes unsatisfiable. Input conditions are never enumerated: one
//! witness per transition is enough.

use std::collections::BTreeSet;
use std::time::Instant;

use thiserror::Error;

use crate::cnf::{encode, Clause, CnfError, CnfProblem, Lit, Var};
use crate::recut::{Cut, FsmSpec};
use crate::satcore::{SatResult, Solver};
use crate::topology::{explore, Expansion, StateWord, TransitionGraph};

pub const DEFAULT_MAX_STATES: usize = 1 << 20;

#[derive(Debug, Clone)]
pub struct EnumConfig {
    /// Exploration stops growing the state set beyond this many states.
    pub max_states: usize,
    /// Worker threads expanding states of the same BFS level.
    pub threads: usize,
    /// Conflict budget for each individual solve call.
    pub conflict_budget: Option<u64>,
    /// Start states explored in addition to the reset state.
    pub extra_seeds: Vec<StateWord>,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig { max_states: DEFAULT_MAX_STATES, threads: 1, conflict_budget: None, extra_seeds: Vec::new() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("state `{state}` has {} bits but the FSM has {expected} state registers", state.width())]
    WidthMismatch { state: StateWord, expected: usize },
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// Successors of one state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NextStates {
    pub states: BTreeSet<StateWord>,
    pub solve_calls: u64,
    /// False when a solve call ran out of budget; `states` is then a subset.
    pub complete: bool,
}

fn check_width(cut: &Cut, state: &StateWord) -> Result<(), EnumError> {
    if state.width() != cut.width() {
        return Err(EnumError::WidthMismatch { state: state.clone(), expected: cut.width() });
    }
    Ok(())
}

/// All states reachable from `current` in one step.
pub fn next_states(cut: &Cut, current: &StateWord) -> Result<NextStates, EnumError> {
    check_width(cut, current)?;
    successors(&Base::new(&encode(cut)), current, None)
}

/// The cut's CNF loaded into a solver once; every state starts from a
/// clone of it, so no state sees another state's blocking clauses.
struct Base {
    solver: Solver,
    q: Vec<Var>,
    d: Vec<Var>,
}

impl Base {
    fn new(problem: &CnfProblem) -> Base {
        Base {
            solver: Solver::from_problem(problem),
            q: problem.varmap.q_vars.clone(),
            d: problem.varmap.d_vars.clone(),
        }
    }
}

/// `vars == value` as unit clauses (`negate == false`) or the single clause
/// `vars != value` (`negate == true`).
fn fix(solver: &mut Solver, vars: &[Var], value: &[bool], negate: bool) -> Result<(), EnumError> {
    let lits = |v: &Var, b: &bool| Lit::new(*v, *b != negate);
    let clauses: Vec<Vec<Lit>> = if negate {
        vec![vars.iter().zip(value).map(|(v, b)| lits(v, b)).collect()]
    } else {
        vars.iter().zip(value).map(|(v, b)| vec![lits(v, b)]).collect()
    };
    for c in clauses {
        if let Some(c) = Clause::new(c)? {
            solver.add_clause(&c).expect("state variables belong to the problem");
        }
    }
    Ok(())
}

/// Solves with Q fixed to `current`, blocking each next state found.
fn successors(base: &Base, current: &StateWord, budget: Option<u64>) -> Result<NextStates, EnumError> {
    let mut solver = base.solver.clone();
    fix(&mut solver, &base.q, current.bits(), false)?;
    solver.set_conflict_budget(budget);

    let mut states = BTreeSet::new();
    let mut solve_calls = 0;
    loop {
        solve_calls += 1;
        match solver.solve() {
            SatResult::Sat(model) => {
                let next: Vec<bool> = base.d.iter().map(|&v| model.value(v)).collect();
                fix(&mut solver, &base.d, &next, true)?;
                states.insert(StateWord::new(next));
            }
            SatResult::Unsat => return Ok(NextStates { states, solve_calls, complete: true }),
            SatResult::BudgetExhausted => return Ok(NextStates { states, solve_calls, complete: false }),
        }
    }
}

/// Breadth-first enumeration of the FSM topology from the reset state.
///
/// The cut is encoded once and every dequeued state gets a fresh copy of
/// that CNF in its own solver.
pub fn enumerate_topology(cut: &Cut, spec: &FsmSpec, config: &EnumConfig) -> Result<TransitionGraph, EnumError> {
    let start = Instant::now();
    let mut seeds = vec![spec.reset.clone()];
    seeds.extend(config.extra_seeds.iter().cloned());
    for s in &seeds {
        check_width(cut, s)?;
    }
    let base = Base::new(&encode(cut));
    let ex = explore(&seeds, config.max_states, config.threads, |state| {
        let next = successors(&base, state, config.conflict_budget)?;
        Ok::<_, EnumError>(Expansion {
            successors: next.states.into_iter().map(|s| (s, ())).collect(),
            solve_calls: next.solve_calls,
            exhausted: !next.complete,
        })
    })?;
    Ok(TransitionGraph {
        reset: spec.reset.clone(),
        states: ex.states,
        edges: ex.edges.into_keys().collect(),
        solve_calls: ex.solve_calls,
        wall_time: start.elapsed(),
        completion: ex.completion,
    })
}
