use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use fsmforge::testkit;
use fsmforge::{
    enumerate_topology, enumerate_with_conditions, fsm_cut, BruteConfig, Cut, EnumConfig, FsmSpec, Netlist,
    TransitionGraph,
};
use serde::Serialize;

use crate::run::{generate_case, ms, read_netlist, seed_override, Generated};
use crate::{Failure, SuiteKind};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of `<name>.bench` files, each with a `<name>.fsm.json` spec.
    #[arg(long, conflicts_with = "generate", required_unless_present = "generate")]
    suite: Option<PathBuf>,
    /// Generated suite, `seeds=A..B` (inclusive) or `seeds=N`.
    #[arg(long)]
    generate: Option<String>,
    #[arg(long, value_enum, default_value_t = SuiteKind::Random)]
    kind: SuiteKind,
    /// Noise gates added to generated designs so the full netlist differs from the cut.
    #[arg(long, default_value_t = 2000)]
    pad_gates: usize,
    #[arg(long, default_value_t = 200)]
    pad_regs: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = fsmforge::refsmlite::DEFAULT_MAX_INPUTS)]
    max_inputs: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// One CSV row. Timings are milliseconds; empty cells mark a failed phase.
#[derive(Debug, Serialize)]
struct Row {
    netlist: String,
    recut_ms: Option<f64>,
    full_brute_ms: Option<f64>,
    full_sat_ms: Option<f64>,
    cut_brute_ms: Option<f64>,
    cut_sat_ms: Option<f64>,
    states: Option<usize>,
    edges: Option<usize>,
    acpt: Option<f64>,
    status: String,
}

impl Row {
    fn failed(netlist: String, message: String) -> Row {
        Row {
            netlist,
            recut_ms: None,
            full_brute_ms: None,
            full_sat_ms: None,
            cut_brute_ms: None,
            cut_sat_ms: None,
            states: None,
            edges: None,
            acpt: None,
            status: format!("error: {message}"),
        }
    }

    fn ok(&self) -> bool {
        self.status == "ok"
    }
}

fn round3(x: f64) -> f64 {
    (x * 1e3).round() / 1e3
}

pub fn parse_seeds(text: &str) -> Result<(u64, u64), Failure> {
    let bad = || Failure::Usage(format!("--generate expects `seeds=A..B` or `seeds=N`, got `{text}`"));
    let range = text.strip_prefix("seeds=").unwrap_or(text);
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    let (lo, hi) = match range.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let n = num(range)?;
            (n, n)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

struct Case {
    name: String,
    netlist: Netlist,
    spec: FsmSpec,
    truth: Option<testkit::FsmTruth>,
}

/// A case, or the name and error of one that could not be loaded.
type Loaded = Result<Case, (String, String)>;

fn load_suite(dir: &Path) -> Result<Vec<Loaded>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    let mut benches: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bench"))
        .collect();
    benches.sort();
    if benches.is_empty() {
        return Err(Failure::Usage(format!("{}: no .bench files", dir.display())));
    }
    Ok(benches
        .into_iter()
        .map(|path| {
            let name = path.file_stem().expect("has extension").to_string_lossy().into_owned();
            let spec_path = path.with_extension("fsm.json");
            let spec = fs::read_to_string(&spec_path)
                .map_err(|e| format!("{}: {e}", spec_path.display()))
                .and_then(|t| serde_json::from_str::<FsmSpec>(&t).map_err(|e| format!("{}: {e}", spec_path.display())))
                .and_then(|s| FsmSpec::new(s.state_registers, s.reset).map_err(|e| e.to_string()));
            let netlist = read_netlist(&path).map_err(|f| match f {
                Failure::Usage(m) | Failure::Spec(m) | Failure::Incomplete(m) => m,
            });
            match (netlist, spec) {
                (Ok(netlist), Ok(spec)) => Ok(Case { name, netlist, spec, truth: None }),
                (Err(e), _) | (_, Err(e)) => Err((name, e)),
            }
        })
        .collect())
}

fn run_case(case: &Case, args: &BenchArgs) -> Row {
    let t = Instant::now();
    let cut = match fsm_cut(&case.netlist, &case.spec) {
        Ok(c) => c,
        Err(e) => return Row::failed(case.name.clone(), e.to_string()),
    };
    let recut_ms = ms(t);
    let full = Cut::whole(case.netlist.clone(), &case.spec).expect("spec resolved by the cut");

    let sat_cfg = EnumConfig { threads: args.threads, ..Default::default() };
    let brute_cfg = BruteConfig { threads: args.threads, max_inputs: args.max_inputs, ..Default::default() };
    let mut errors = Vec::new();
    let mut sat = |c: &Cut, label: &str| {
        let t = Instant::now();
        match enumerate_topology(c, &case.spec, &sat_cfg) {
            Ok(g) => Some((g, ms(t))),
            Err(e) => {
                errors.push(format!("{label}: {e}"));
                None
            }
        }
    };
    let full_sat = sat(&full, "full_sat");
    let cut_sat = sat(&cut, "cut_sat");
    let mut brute = |c: &Cut, label: &str| {
        let t = Instant::now();
        match enumerate_with_conditions(c, &case.spec, &brute_cfg) {
            Ok(g) => Some((g, ms(t))),
            Err(e) => {
                errors.push(format!("{label}: {e}"));
                None
            }
        }
    };
    let full_brute = brute(&full, "full_brute");
    let cut_brute = brute(&cut, "cut_brute");

    let graphs: Vec<&TransitionGraph> = [full_sat.as_ref().map(|g| &g.0), cut_sat.as_ref().map(|g| &g.0)]
        .into_iter()
        .chain([full_brute.as_ref().map(|g| &g.0.base), cut_brute.as_ref().map(|g| &g.0.base)])
        .flatten()
        .collect();
    let status = if !errors.is_empty() {
        format!("error: {}", errors.join("; "))
    } else if graphs.iter().any(|g| !g.is_complete()) {
        "incomplete".to_string()
    } else if graphs.windows(2).any(|w| !w[0].same_topology(w[1])) {
        "mismatch".to_string()
    } else if case.truth.as_ref().is_some_and(|t| t.topology() != graphs[0].successors()) {
        "truth_mismatch".to_string()
    } else {
        "ok".to_string()
    };
    let reference = cut_sat.as_ref().map(|g| &g.0);
    Row {
        netlist: case.name.clone(),
        recut_ms: Some(round3(recut_ms)),
        full_brute_ms: full_brute.as_ref().map(|g| round3(g.1)),
        full_sat_ms: full_sat.as_ref().map(|g| round3(g.1)),
        cut_brute_ms: cut_brute.as_ref().map(|g| round3(g.1)),
        cut_sat_ms: cut_sat.as_ref().map(|g| round3(g.1)),
        states: reference.map(|g| g.states.len()),
        edges: reference.map(|g| g.edges.len()),
        acpt: cut_brute.as_ref().map(|g| g.0.acpt()),
        status,
    }
}

pub fn cmd_bench(args: &BenchArgs) -> Result<(), Failure> {
    let cases: Vec<Loaded> = match (&args.suite, &args.generate) {
        (Some(dir), _) => load_suite(dir)?,
        (None, Some(spec)) => {
            let (lo, hi) = match seed_override()? {
                Some(s) => (s, s),
                None => parse_seeds(spec)?,
            };
            (lo..=hi)
                .map(|seed| {
                    let Generated { name, netlist, spec, truth } = generate_case(args.kind, seed, (None, None, None))?;
                    let netlist = testkit::pad_with_noise(&netlist, args.pad_gates, args.pad_regs, seed);
                    Ok(Ok(Case { name, netlist, spec, truth }))
                })
                .collect::<Result<_, Failure>>()?
        }
        (None, None) => unreachable!("clap requires --suite or --generate"),
    };

    let rows: Vec<Row> = cases
        .into_iter()
        .map(|c| match c {
            Ok(case) => run_case(&case, args),
            Err((name, message)) => Row::failed(name, message),
        })
        .collect();

    let sink: Box<dyn io::Write> = match &args.out {
        Some(p) => Box::new(fs::File::create(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?),
        None => Box::new(io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for r in &rows {
        w.serialize(r).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    w.flush().map_err(|e| Failure::Usage(e.to_string()))?;

    let failed = rows.iter().filter(|r| !r.ok()).count();
    if failed > 0 {
        return Err(Failure::Usage(format!("{failed} of {} cases did not pass", rows.len())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seeds("seeds=1..10").unwrap(), (1, 10));
        assert_eq!(parse_seeds("seeds=1..=10").unwrap(), (1, 10));
        assert_eq!(parse_seeds("7").unwrap(), (7, 7));
        assert!(parse_seeds("seeds=5..1").is_err());
        assert!(parse_seeds("seeds=x").is_err());
    }
}
