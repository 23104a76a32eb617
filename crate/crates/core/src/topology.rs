//! State words, transition graphs, and the breadth-first exploration shared
//! by both enumeration engines.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The value of the state registers, bit `i` belonging to state register `i`.
/// Rendered as a `0`/`1` string with bit 0 leftmost.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct StateWord(Vec<bool>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid state word `{0}`: expected a string of 0s and 1s")]
pub struct StateWordError(pub String);

impl StateWord {
    pub fn new(bits: Vec<bool>) -> Self {
        StateWord(bits)
    }

    pub fn zeros(width: usize) -> Self {
        StateWord(vec![false; width])
    }

    /// Low `width` bits of `value`, least significant bit first.
    pub fn from_lsb(value: u64, width: usize) -> Self {
        StateWord((0..width).map(|i| value >> i & 1 == 1).collect())
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i]
    }
}

impl fmt::Display for StateWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_char(if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for StateWord {
    type Err = StateWordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(StateWordError(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(StateWord)
    }
}

impl Serialize for StateWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StateWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Why an exploration stopped before covering every reachable state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Completion {
    Complete,
    StateCapReached,
    BudgetExhausted,
}

/// FSM topology: reachable states and the transitions between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionGraph {
    pub reset: StateWord,
    pub states: BTreeSet<StateWord>,
    pub edges: BTreeSet<(StateWord, StateWord)>,
    /// SAT solver invocations; zero for engines that do not use a solver.
    pub solve_calls: u64,
    pub wall_time: Duration,
    pub completion: Completion,
}

#[derive(Serialize)]
struct GraphJson<'a> {
    version: &'static str,
    reset: &'a StateWord,
    states: Vec<&'a StateWord>,
    edges: Vec<[&'a StateWord; 2]>,
    solve_calls: u64,
    wall_time_ms: f64,
    completion: Completion,
}

impl TransitionGraph {
    pub fn is_complete(&self) -> bool {
        self.completion == Completion::Complete
    }

    pub fn successors(&self) -> BTreeMap<StateWord, BTreeSet<StateWord>> {
        let mut map: BTreeMap<StateWord, BTreeSet<StateWord>> =
            self.states.iter().map(|s| (s.clone(), BTreeSet::new())).collect();
        for (from, to) in &self.edges {
            map.entry(from.clone()).or_default().insert(to.clone());
        }
        map
    }

    /// Same states, edges and reset, ignoring counters and timing.
    pub fn same_topology(&self, other: &TransitionGraph) -> bool {
        self.reset == other.reset && self.states == other.states && self.edges == other.edges
    }

    /// Graphviz rendering with nodes and edges in sorted order; the reset
    /// node is drawn with a double border.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph fsm {\n");
        for s in &self.states {
            if *s == self.reset {
                let _ = writeln!(out, "  \"{s}\" [peripheries=2];");
            } else {
                let _ = writeln!(out, "  \"{s}\";");
            }
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  \"{a}\" -> \"{b}\";");
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(GraphJson {
            version: crate::VERSION,
            reset: &self.reset,
            states: self.states.iter().collect(),
            edges: self.edges.iter().map(|(a, b)| [a, b]).collect(),
            solve_calls: self.solve_calls,
            wall_time_ms: self.wall_time.as_secs_f64() * 1e3,
            completion: self.completion,
        })
        .expect("graph serializes")
    }
}

/// Result of expanding one state.
pub(crate) struct Expansion<T> {
    pub successors: Vec<(StateWord, T)>,
    pub solve_calls: u64,
    pub exhausted: bool,
}

pub(crate) struct Exploration<T> {
    pub states: BTreeSet<StateWord>,
    pub edges: BTreeMap<(StateWord, StateWord), T>,
    pub solve_calls: u64,
    pub completion: Completion,
}

/// Level-synchronous breadth-first search from `seeds`. Each level's states
/// are expanded independently (in parallel when `threads > 1`) and merged in
/// frontier order, so the result does not depend on the thread count.
pub(crate) fn explore<T, E, F>(
    seeds: &[StateWord],
    max_states: usize,
    threads: usize,
    expand: F,
) -> Result<Exploration<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(&StateWord) -> Result<Expansion<T>, E> + Sync,
{
    let pool = if threads > 1 {
        Some(rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool"))
    } else {
        None
    };

    let mut states = BTreeSet::new();
    let mut edges = BTreeMap::new();
    let mut solve_calls = 0;
    let mut completion = Completion::Complete;
    let mut frontier = Vec::new();
    for s in seeds {
        if states.len() >= max_states {
            completion = Completion::StateCapReached;
            break;
        }
        if states.insert(s.clone()) {
            frontier.push(s.clone());
        }
    }

    while !frontier.is_empty() {
        let results: Vec<Result<Expansion<T>, E>> = match &pool {
            Some(pool) => {
                use rayon::prelude::*;
                pool.install(|| frontier.par_iter().map(&expand).collect())
            }
            None => frontier.iter().map(&expand).collect(),
        };
        let mut next = Vec::new();
        for (from, result) in frontier.iter().zip(results) {
            let exp = result?;
            solve_calls += exp.solve_calls;
            if exp.exhausted {
                completion = Completion::BudgetExhausted;
            }
            for (to, data) in exp.successors {
                if !states.contains(&to) {
                    if states.len() >= max_states {
                        if completion == Completion::Complete {
                            completion = Completion::StateCapReached;
                        }
                        continue;
                    }
                    states.insert(to.clone());
                    next.push(to.clone());
                }
                edges.insert((from.clone(), to), data);
            }
        }
        frontier = next;
    }
    Ok(Exploration { states, edges, solve_calls, completion })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> StateWord {
        s.parse().unwrap()
    }

    #[test]
    fn state_word_rendering() {
        let s = StateWord::new(vec![true, false, true]);
        assert_eq!(s.to_string(), "101");
        assert_eq!(w("101"), s);
        assert_eq!(StateWord::from_lsb(0b110, 3).to_string(), "011");
        assert!("10x".parse::<StateWord>().is_err());
    }

    #[test]
    fn state_word_order_matches_string_order() {
        let mut words: Vec<StateWord> = (0..8).map(|v| StateWord::from_lsb(v, 3)).collect();
        words.sort();
        let strings: Vec<String> = words.iter().map(ToString::to_string).collect();
        let mut sorted = strings.clone();
        sorted.sort();
        assert_eq!(strings, sorted);
    }

    fn ring(n: u64) -> impl Fn(&StateWord) -> Result<Expansion<()>, ()> + Sync {
        move |s: &StateWord| {
            let v: u64 = s.bits().iter().enumerate().map(|(i, &b)| (b as u64) << i).sum();
            Ok(Expansion {
                successors: vec![(StateWord::from_lsb((v + 1) % n, 3), ())],
                solve_calls: 2,
                exhausted: false,
            })
        }
    }

    #[test]
    fn explore_ring() {
        let ex = explore(&[StateWord::zeros(3)], 1 << 20, 1, ring(8)).unwrap();
        assert_eq!(ex.states.len(), 8);
        assert_eq!(ex.edges.len(), 8);
        assert_eq!(ex.solve_calls, 16);
        assert_eq!(ex.completion, Completion::Complete);
    }

    #[test]
    fn explore_respects_state_cap() {
        let ex = explore(&[StateWord::zeros(3)], 5, 1, ring(8)).unwrap();
        assert_eq!(ex.states.len(), 5);
        assert_eq!(ex.completion, Completion::StateCapReached);
        for (a, b) in ex.edges.keys() {
            assert!(ex.states.contains(a) && ex.states.contains(b));
        }
    }

    #[test]
    fn explore_threads_do_not_change_result() {
        let a = explore(&[StateWord::zeros(3)], 1 << 20, 1, ring(8)).unwrap();
        let b = explore(&[StateWord::zeros(3)], 1 << 20, 4, ring(8)).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.edges.keys().collect::<Vec<_>>(), b.edges.keys().collect::<Vec<_>>());
    }

    #[test]
    fn dot_is_sorted_and_marks_reset() {
        let g = TransitionGraph {
            reset: w("11"),
            states: [w("11"), w("00")].into_iter().collect(),
            edges: [(w("11"), w("00")), (w("00"), w("00"))].into_iter().collect(),
            solve_calls: 0,
            wall_time: Duration::ZERO,
            completion: Completion::Complete,
        };
        assert_eq!(
            g.to_dot(),
            "digraph fsm {\n  \"00\";\n  \"11\" [peripheries=2];\n  \"00\" -> \"00\";\n  \"11\" -> \"00\";\n}\n"
        );
        let j = g.to_json_value();
        assert_eq!(j["edges"][1], serde_json::json!(["11", "00"]));
        assert_eq!(j["reset"], "11");
    }
}
