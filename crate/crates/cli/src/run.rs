use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use fsmforge::cnf::encode;
use fsmforge::recut::{CutStats, SpecError};
use fsmforge::refsmlite::BruteError;
use fsmforge::testkit;
use fsmforge::{
    enumerate_topology, enumerate_with_conditions, fsm_cut, parse_bench, write_bench, BruteConfig, Cut, EnumConfig,
    FsmSpec, Netlist, StateWord, TransitionGraph,
};
use serde::Serialize;

use crate::{Engine, Failure, SuiteKind};

#[derive(Debug, Args)]
pub struct EnumArgs {
    #[arg(long)]
    netlist: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    state_regs: Vec<String>,
    /// Reset state word, bit 0 (first state register) leftmost.
    #[arg(long)]
    reset: String,
    #[arg(long, value_enum)]
    engine: Engine,
    /// Enumerate on the full netlist instead of the cut.
    #[arg(long)]
    no_cut: bool,
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, default_value_t = fsmforge::enumsat::DEFAULT_MAX_STATES)]
    max_states: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Additional start states, for FSMs with parts unreachable from reset.
    #[arg(long = "seed-state")]
    seed_states: Vec<String>,
    /// Conflict budget per solve call (sat engine).
    #[arg(long)]
    conflict_budget: Option<u64>,
    /// Free-input limit for condition enumeration (brute engine).
    #[arg(long, default_value_t = fsmforge::refsmlite::DEFAULT_MAX_INPUTS)]
    max_inputs: usize,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = SuiteKind::Random)]
    kind: SuiteKind,
    /// Overridden by the FSMFORGE_SEED environment variable.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// State count; drawn from the seed when omitted.
    #[arg(long)]
    states: Option<usize>,
    /// Input count; drawn from the seed when omitted.
    #[arg(long)]
    inputs: Option<usize>,
    /// Fraction of possible successors per state; drawn from the seed when omitted.
    #[arg(long)]
    density: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pad_gates: usize,
    #[arg(long, default_value_t = 0)]
    pad_regs: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// File stem; defaults to `<kind>-<seed>`.
    #[arg(long)]
    name: Option<String>,
}

pub fn read_netlist(path: &Path) -> Result<Netlist, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_bench(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn spec_failure(e: SpecError) -> Failure {
    match e {
        SpecError::UnknownRegister(_) => Failure::Spec(e.to_string()),
        _ => Failure::Usage(e.to_string()),
    }
}

fn parse_word(s: &str) -> Result<StateWord, Failure> {
    s.parse().map_err(|e| Failure::Usage(format!("state word `{s}`: {e}")))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn cmd_cut(netlist: &Path, state_regs: Vec<String>, out: Option<&Path>) -> Result<(), Failure> {
    let n = read_netlist(netlist)?;
    let width = state_regs.len();
    let spec = FsmSpec::new(state_regs, StateWord::zeros(width)).map_err(spec_failure)?;
    let cut = fsm_cut(&n, &spec).map_err(spec_failure)?;
    if let Some(out) = out {
        write_file(out, &write_bench(&cut.netlist))?;
    }
    println!("{}", cut.stats());
    Ok(())
}

pub fn cmd_cnf(netlist: &Path, state_regs: Vec<String>, no_cut: bool, out: Option<&Path>) -> Result<(), Failure> {
    let n = read_netlist(netlist)?;
    let width = state_regs.len();
    let spec = FsmSpec::new(state_regs, StateWord::zeros(width)).map_err(spec_failure)?;
    let cut = if no_cut { Cut::whole(n, &spec) } else { fsm_cut(&n, &spec) }.map_err(spec_failure)?;
    let dimacs = encode(&cut).to_dimacs();
    match out {
        Some(out) => write_file(out, &dimacs),
        None => {
            print!("{dimacs}");
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Timings {
    pub parse_ms: f64,
    pub cut_ms: f64,
    pub enumerate_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct RunConfig {
    pub reset: String,
    pub seed_states: Vec<String>,
    pub max_states: usize,
    pub threads: usize,
    pub conflict_budget: Option<u64>,
    pub max_inputs: usize,
}

/// Summary of one `enum` run, printed as JSON on stdout.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub netlist_name: String,
    pub engine: Engine,
    pub cut_used: bool,
    pub cut_stats: CutStats,
    pub states: usize,
    pub edges: usize,
    pub acpt: Option<f64>,
    pub completion: fsmforge::Completion,
    pub solve_calls: Option<u64>,
    pub simulations: Option<u64>,
    pub timings: Timings,
    pub config: RunConfig,
}

pub fn cmd_enum(a: &EnumArgs) -> Result<(), Failure> {
    let t = Instant::now();
    let netlist = read_netlist(&a.netlist)?;
    let parse_ms = ms(t);
    let spec = FsmSpec::new(a.state_regs.clone(), parse_word(&a.reset)?).map_err(spec_failure)?;
    let seeds = a.seed_states.iter().map(|s| parse_word(s)).collect::<Result<Vec<_>, _>>()?;
    if let Some(s) = seeds.iter().find(|s| s.width() != spec.width()) {
        return Err(Failure::Usage(format!("seed state `{s}` has {} bits, expected {}", s.width(), spec.width())));
    }
    if a.threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }

    let t = Instant::now();
    let cut = if a.no_cut { Cut::whole(netlist, &spec) } else { fsm_cut(&netlist, &spec) }.map_err(spec_failure)?;
    let cut_ms = ms(t);

    let t = Instant::now();
    let (graph, json, acpt, simulations): (TransitionGraph, serde_json::Value, Option<f64>, Option<u64>) =
        match a.engine {
            Engine::Sat => {
                let cfg = EnumConfig {
                    max_states: a.max_states,
                    threads: a.threads,
                    conflict_budget: a.conflict_budget,
                    extra_seeds: seeds,
                };
                let g = enumerate_topology(&cut, &spec, &cfg).map_err(|e| Failure::Usage(e.to_string()))?;
                let json = g.to_json_value();
                (g, json, None, None)
            }
            Engine::Brute => {
                let cfg = BruteConfig {
                    max_states: a.max_states,
                    threads: a.threads,
                    max_inputs: a.max_inputs,
                    extra_seeds: seeds,
                };
                let g = enumerate_with_conditions(&cut, &spec, &cfg).map_err(|e| match e {
                    BruteError::TooManyInputs { .. } => Failure::Incomplete(e.to_string()),
                    BruteError::WidthMismatch { .. } => Failure::Usage(e.to_string()),
                })?;
                let json = g.to_json_value();
                let (acpt, sims) = (g.acpt(), g.simulations);
                (g.base, json, Some(acpt), Some(sims))
            }
        };
    let enumerate_ms = ms(t);

    let report = RunReport {
        version: fsmforge::VERSION,
        netlist_name: a.netlist.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        engine: a.engine,
        cut_used: !a.no_cut,
        cut_stats: cut.stats(),
        states: graph.states.len(),
        edges: graph.edges.len(),
        acpt,
        completion: graph.completion,
        solve_calls: (a.engine == Engine::Sat).then_some(graph.solve_calls),
        simulations,
        timings: Timings { parse_ms, cut_ms, enumerate_ms },
        config: RunConfig {
            reset: spec.reset.to_string(),
            seed_states: a.seed_states.clone(),
            max_states: a.max_states,
            threads: a.threads,
            conflict_budget: a.conflict_budget,
            max_inputs: a.max_inputs,
        },
    };
    let report_json = serde_json::to_value(&report).expect("report serializes");

    if let Some(path) = &a.dot {
        write_file(path, &graph.to_dot())?;
    }
    if let Some(path) = &a.json {
        let mut doc = json;
        doc.as_object_mut().expect("graph json is an object").insert("report".into(), report_json.clone());
        write_file(path, &serde_json::to_string_pretty(&doc).expect("json serializes"))?;
    }
    println!("{}", serde_json::to_string_pretty(&report_json).expect("json serializes"));
    if !graph.is_complete() {
        return Err(Failure::Incomplete(format!("enumeration incomplete: {:?}", graph.completion)));
    }
    Ok(())
}

/// `FSMFORGE_SEED`, when set, replaces seeds given on the command line.
pub fn seed_override() -> Result<Option<u64>, Failure> {
    match std::env::var("FSMFORGE_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("FSMFORGE_SEED `{v}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// Generated case: netlist, its spec and, for random FSMs, the ground truth.
pub struct Generated {
    pub name: String,
    pub netlist: Netlist,
    pub spec: FsmSpec,
    pub truth: Option<testkit::FsmTruth>,
}

/// Shape of the parity designs: 3 state bits over 18 inputs, each bit
/// reading at least 14 of them.
pub const PARITY_SHAPE: (usize, usize, usize) = (3, 18, 14);

pub fn generate_case(
    kind: SuiteKind,
    seed: u64,
    shape: (Option<usize>, Option<usize>, Option<f64>),
) -> Result<Generated, Failure> {
    let bad = |e: testkit::TestkitError| Failure::Usage(e.to_string());
    match kind {
        SuiteKind::Random => {
            let (s, i, d) = testkit::random_shape(seed);
            let truth = testkit::generate(seed, shape.0.unwrap_or(s), shape.1.unwrap_or(i), shape.2.unwrap_or(d))
                .map_err(bad)?;
            let (netlist, spec) = testkit::synthesize(&truth);
            Ok(Generated { name: format!("random-{seed}"), netlist, spec, truth: Some(truth) })
        }
        SuiteKind::Parity => {
            let (bits, inputs, fanin) = PARITY_SHAPE;
            let inputs = shape.1.unwrap_or(inputs);
            let (netlist, spec) = testkit::parity_fsm(seed, bits, inputs, fanin.min(inputs)).map_err(bad)?;
            Ok(Generated { name: format!("parity-{seed}"), netlist, spec, truth: None })
        }
    }
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<(), Failure> {
    let seed = seed_override()?.unwrap_or(a.seed);
    let g = generate_case(a.kind, seed, (a.states, a.inputs, a.density))?;
    let netlist = testkit::pad_with_noise(&g.netlist, a.pad_gates, a.pad_regs, seed);
    let stem = a.name.clone().unwrap_or(g.name);
    fs::create_dir_all(&a.out_dir).map_err(|e| Failure::Usage(format!("{}: {e}", a.out_dir.display())))?;
    let path = |ext: &str| a.out_dir.join(format!("{stem}.{ext}"));
    write_file(&path("bench"), &write_bench(&netlist))?;
    write_file(&path("fsm.json"), &serde_json::to_string_pretty(&g.spec).expect("spec serializes"))?;
    if let Some(truth) = &g.truth {
        write_file(&path("truth.json"), &serde_json::to_string_pretty(&truth.to_json()).expect("truth serializes"))?;
    }
    println!("{}", path("bench").display());
    Ok(())
}
