use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fsmforge::testkit;
use fsmforge::write_bench;

const EXCLUSIVE_PAIR: &str = "\
INPUT(I0)
U2 = DFF(U1)
U4 = DFF(U3)
U1 = AND(I0, U4)
U5 = NOT(I0)
U3 = AND(U2, U5)
";

fn fsmforge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsmforge"))
        .current_dir(dir)
        .env_remove("FSMFORGE_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn pair_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("pair.bench"), EXCLUSIVE_PAIR).unwrap();
    dir
}

#[test]
fn cut_prints_stats_and_writes_bench() {
    let dir = pair_dir();
    let o = fsmforge(dir.path(), &["cut", "--netlist", "pair.bench", "--state-regs", "U2,U4", "--out", "cut.bench"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "inputs=1 regs=2 gates=3");
    let cut = fsmforge::parse_bench(&fs::read_to_string(dir.path().join("cut.bench")).unwrap()).unwrap();
    assert_eq!(cut.gates().len(), 3);
    assert_eq!(cut.registers().len(), 2);
}

#[test]
fn cut_exit_codes() {
    let dir = pair_dir();
    let missing = fsmforge(dir.path(), &["cut", "--netlist", "missing.bench", "--state-regs", "U2"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(!missing.stderr.is_empty());
    let bogus = fsmforge(dir.path(), &["cut", "--netlist", "pair.bench", "--state-regs", "BOGUS"]);
    assert_eq!(bogus.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bogus.stderr).contains("BOGUS"));
    fs::write(dir.path().join("bad.bench"), "x = AND(a\n").unwrap();
    let parse = fsmforge(dir.path(), &["cut", "--netlist", "bad.bench", "--state-regs", "U2"]);
    assert_eq!(parse.status.code(), Some(1));
    let usage = fsmforge(dir.path(), &["cut", "--netlist", "pair.bench"]);
    assert_eq!(usage.status.code(), Some(1));
}

#[test]
fn enum_pair_dot_and_json_agree() {
    let dir = pair_dir();
    let o = fsmforge(
        dir.path(),
        &[
            "enum",
            "--netlist",
            "pair.bench",
            "--state-regs",
            "U2,U4",
            "--reset",
            "11",
            "--engine",
            "sat",
            "--dot",
            "g.dot",
            "--json",
            "g.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let dot = fs::read_to_string(dir.path().join("g.dot")).unwrap();
    let nodes = dot.lines().filter(|l| l.trim_end().ends_with(';') && !l.contains("->")).count();
    let edges: Vec<&str> = dot.lines().filter(|l| l.contains("->")).collect();
    assert_eq!(nodes, 4);
    assert_eq!(edges.len(), 7);

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("g.json")).unwrap()).unwrap();
    assert_eq!(json["states"].as_array().unwrap().len(), nodes);
    assert_eq!(json["edges"].as_array().unwrap().len(), edges.len());
    for e in json["edges"].as_array().unwrap() {
        let line = format!("  \"{}\" -> \"{}\";", e[0].as_str().unwrap(), e[1].as_str().unwrap());
        assert!(edges.contains(&line.as_str()), "{line}");
    }
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["version"], fsmforge::VERSION);
    assert_eq!(report["states"], 4);
    assert_eq!(report["edges"], 7);
    assert_eq!(report["solve_calls"], 11);
    assert_eq!(report["cut_used"], true);
    assert_eq!(report["engine"], "sat");
    assert_eq!(json["report"]["edges"], 7);
    for phase in ["parse_ms", "cut_ms", "enumerate_ms"] {
        assert!(report["timings"][phase].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn engines_emit_identical_dot() {
    let dir = pair_dir();
    for (engine, extra) in [("sat", None), ("brute", None), ("sat", Some("--no-cut")), ("brute", Some("--no-cut"))] {
        let out = format!("{engine}{}.dot", extra.map_or("", |_| "-full"));
        let mut args = vec![
            "enum",
            "--netlist",
            "pair.bench",
            "--state-regs",
            "U2,U4",
            "--reset",
            "11",
            "--engine",
            engine,
            "--dot",
            &out,
        ];
        args.extend(extra);
        assert_eq!(fsmforge(dir.path(), &args).status.code(), Some(0));
    }
    let read = |n: &str| fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("sat.dot"), read("brute.dot"));
    assert_eq!(read("sat.dot"), read("sat-full.dot"));
    assert_eq!(read("sat.dot"), read("brute-full.dot"));
}

#[test]
fn enum_brute_reports_acpt() {
    let dir = pair_dir();
    let o = fsmforge(
        dir.path(),
        &["enum", "--netlist", "pair.bench", "--state-regs", "U2,U4", "--reset", "11", "--engine", "brute"],
    );
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["acpt"], 1.0);
    assert_eq!(report["solve_calls"], serde_json::Value::Null);
}

#[test]
fn enum_usage_errors() {
    let dir = pair_dir();
    let base = ["enum", "--netlist", "pair.bench", "--state-regs", "U2,U4"];
    let run = |extra: &[&str]| {
        let mut args = base.to_vec();
        args.extend(extra);
        fsmforge(dir.path(), &args).status.code()
    };
    assert_eq!(run(&["--reset", "1", "--engine", "sat"]), Some(1));
    assert_eq!(run(&["--reset", "1x", "--engine", "sat"]), Some(1));
    assert_eq!(run(&["--engine", "sat"]), Some(1), "reset is mandatory");
    assert_eq!(run(&["--reset", "11", "--engine", "magic"]), Some(1));
    assert_eq!(run(&["--reset", "11", "--engine", "sat", "--seed-state", "0"]), Some(1));
}

#[test]
fn enum_state_cap_exits_3() {
    let dir = pair_dir();
    let o = fsmforge(
        dir.path(),
        &[
            "enum",
            "--netlist",
            "pair.bench",
            "--state-regs",
            "U2,U4",
            "--reset",
            "11",
            "--engine",
            "sat",
            "--max-states",
            "2",
            "--dot",
            "g.dot",
        ],
    );
    assert_eq!(o.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["completion"], "state_cap_reached");
    assert!(dir.path().join("g.dot").exists());
}

#[test]
fn enum_input_guard_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let ins: Vec<String> = (0..6).map(|i| format!("i{i}")).collect();
    let mut text: String = ins.iter().map(|i| format!("INPUT({i})\n")).collect();
    text.push_str(&format!("s = DFF(p)\np = XOR({})\n", ins.join(", ")));
    fs::write(dir.path().join("x.bench"), text).unwrap();
    let args =
        ["enum", "--netlist", "x.bench", "--state-regs", "s", "--reset", "0", "--engine", "brute", "--max-inputs", "4"];
    assert_eq!(fsmforge(dir.path(), &args).status.code(), Some(3));
}

#[test]
fn seed_states_reach_disconnected_parts() {
    let dir = pair_dir();
    let o = fsmforge(
        dir.path(),
        &[
            "enum",
            "--netlist",
            "pair.bench",
            "--state-regs",
            "U2,U4",
            "--reset",
            "00",
            "--engine",
            "sat",
            "--seed-state",
            "10",
        ],
    );
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["states"], 3);
}

#[test]
fn bench_suite_with_counter() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite");
    fs::create_dir(&suite).unwrap();
    let (n, spec) = testkit::binary_counter(3);
    fs::write(suite.join("counter.bench"), write_bench(&n)).unwrap();
    fs::write(suite.join("counter.fsm.json"), serde_json::to_string(&spec).unwrap()).unwrap();
    let o = fsmforge(dir.path(), &["bench", "--suite", "suite"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let headers: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        headers,
        [
            "netlist",
            "recut_ms",
            "full_brute_ms",
            "full_sat_ms",
            "cut_brute_ms",
            "cut_sat_ms",
            "states",
            "edges",
            "acpt",
            "status"
        ]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "counter");
    assert_eq!(&rows[0][6], "8");
    assert_eq!(&rows[0][7], "8");
    assert_eq!(rows[0][8].parse::<f64>().unwrap(), 1.0);
    assert_eq!(&rows[0][9], "ok");
}

#[test]
fn bench_records_case_failures() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite");
    fs::create_dir(&suite).unwrap();
    fs::write(suite.join("a.bench"), EXCLUSIVE_PAIR).unwrap();
    fs::write(suite.join("a.fsm.json"), r#"{"state_registers":["U2","U4"],"reset":"11"}"#).unwrap();
    fs::write(suite.join("b.bench"), EXCLUSIVE_PAIR).unwrap();
    let o = fsmforge(dir.path(), &["bench", "--suite", "suite"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("a,") && lines[1].ends_with(",ok"));
    assert!(lines[2].starts_with("b,") && lines[2].contains("error"));
}

#[test]
fn bench_empty_suite_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("empty")).unwrap();
    assert_eq!(fsmforge(dir.path(), &["bench", "--suite", "empty"]).status.code(), Some(1));
}

#[test]
fn bench_generated_parity_suite_cut_sat_beats_full_brute() {
    let dir = tempfile::tempdir().unwrap();
    let o = fsmforge(
        dir.path(),
        &["bench", "--generate", "seeds=1", "--kind", "parity", "--pad-gates", "40", "--pad-regs", "4"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    for row in rdr.records() {
        let row = row.unwrap();
        let cut_sat: f64 = row[5].parse().unwrap();
        let full_brute: f64 = row[2].parse().unwrap();
        assert!(cut_sat < full_brute, "{row:?}");
        assert!(row[8].parse::<f64>().unwrap() >= (1 << 14) as f64);
    }
}

#[test]
fn generate_is_deterministic_and_seed_overridable() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_fsmforge"));
        cmd.current_dir(dir.path()).env_remove("FSMFORGE_SEED");
        if let Some(v) = env {
            cmd.env("FSMFORGE_SEED", v);
        }
        let o = cmd
            .args(["generate", "--seed", "5", "--pad-gates", "50", "--pad-regs", "3", "--name", name])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        let read = |ext: &str| fs::read_to_string(dir.path().join(format!("{name}.{ext}"))).unwrap();
        (read("bench"), read("fsm.json"), read("truth.json"))
    };
    let a = run("a", None);
    let b = run("b", None);
    let c = run("c", Some("6"));
    assert_eq!(a, b);
    assert_ne!(a.2, c.2);

    let truth: serde_json::Value = serde_json::from_str(&a.2).unwrap();
    assert_eq!(truth["seed"], 5);
    let spec: fsmforge::FsmSpec = serde_json::from_str(&a.1).unwrap();
    assert_eq!(spec.reset.to_string(), truth["reset"]);
    let expected = testkit::synthesize(&testkit::generate_from_seed(5)).0;
    let padded = fsmforge::parse_bench(&a.0).unwrap();
    assert_eq!(padded.gates().len(), expected.gates().len() + 50);
}

#[test]
fn cnf_dump_parses_back() {
    let dir = pair_dir();
    let o = fsmforge(dir.path(), &["cnf", "--netlist", "pair.bench", "--state-regs", "U2,U4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let (vars, clauses) = fsmforge::cnf::parse_dimacs(&text).unwrap();
    assert_eq!(vars, 6);
    assert!(!clauses.is_empty());
    assert!(text.contains("c var"));
}
