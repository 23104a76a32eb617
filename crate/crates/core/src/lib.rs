//! Extraction of finite-state-machine topologies from gate-level netlists.
//!
//! A netlist is cut down to the logic that drives a chosen set of state
//! registers ([`recut`]), encoded as CNF ([`cnf`]) and explored state by state
//! with a CDCL solver ([`enumsat`]). [`refsmlite`] is the simulation baseline
//! that enumerates input conditions per transition.

pub mod cnf;
pub mod enumsat;
pub mod netlist;
pub mod recut;
pub mod refsmlite;
pub mod satcore;
pub mod testkit;
pub mod topology;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use enumsat::{enumerate_topology, EnumConfig, EnumError};
pub use netlist::{parse_bench, write_bench, Netlist, NetlistError};
pub use recut::{fsm_cut, Cut, FsmSpec, SpecError};
pub use refsmlite::{enumerate_with_conditions, BruteConfig, BruteError, ConditionedGraph};
pub use topology::{Completion, StateWord, TransitionGraph};
