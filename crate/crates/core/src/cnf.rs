//! CNF encoding of a cut's combinational logic.
//!
//! Every net gets one variable (net id `i` is variable `i + 1`). A state
//! register contributes its Q net as the current-state variable and its D net
//! as the next-state variable; no copies are made. Wide XOR/XNOR gates are the
//! only source of auxiliary variables.

use std::fmt::{self, Write as _};
use std::ops::Not;

use thiserror::Error;

use crate::netlist::{GateKind, NetId};
use crate::recut::Cut;

/// 1-based variable index.
pub type Var = u32;

/// A signed literal in DIMACS convention: `+v` or `-v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(i32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        assert!(var > 0 && var <= i32::MAX as u32, "variable out of range: {var}");
        Lit(if positive { var as i32 } else { -(var as i32) })
    }

    pub fn pos(var: Var) -> Lit {
        Lit::new(var, true)
    }

    pub fn neg(var: Var) -> Lit {
        Lit::new(var, false)
    }

    pub fn from_dimacs(v: i32) -> Option<Lit> {
        (v != 0).then_some(Lit(v))
    }

    pub fn var(self) -> Var {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    /// Literal value under `value(var)`.
    pub fn eval(self, value: impl Fn(Var) -> bool) -> bool {
        value(self.var()) == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A disjunction of literals, sorted by variable with duplicates removed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause(Vec<Lit>);

impl Clause {
    /// Normalizes `lits`. Returns `None` for a tautology (a clause holding
    /// both `v` and `-v`), which constrains nothing.
    pub fn new(mut lits: Vec<Lit>) -> Result<Option<Clause>, CnfError> {
        if lits.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        lits.sort_by_key(|l| (l.var(), l.is_positive()));
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return Ok(None);
        }
        Ok(Some(Clause(lits)))
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn max_var(&self) -> Var {
        self.0.iter().map(|l| l.var()).max().unwrap_or(0)
    }

    pub fn is_satisfied_by(&self, value: impl Fn(Var) -> bool + Copy) -> bool {
        self.0.iter().any(|l| l.eval(value))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("clause has no literals")]
    EmptyClause,
    #[error("{vars} variables but a {bits}-bit value")]
    LengthMismatch { vars: usize, bits: usize },
    #[error("cannot exclude the value of an empty variable list")]
    EmptyExclusion,
    #[error("variable {var} out of range (problem has {count})")]
    VarOutOfRange { var: Var, count: Var },
    #[error("DIMACS line {line}: {message}")]
    Dimacs { line: usize, message: String },
}

/// Variable assignment for nets and state registers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarMap {
    net_vars: Vec<Var>,
    /// Current-state variables in state-word order.
    pub q_vars: Vec<Var>,
    /// Next-state variables in state-word order.
    pub d_vars: Vec<Var>,
    names: Vec<String>,
}

impl VarMap {
    pub fn net_var(&self, net: NetId) -> Var {
        self.net_vars[net.index()]
    }

    pub fn net_count(&self) -> usize {
        self.net_vars.len()
    }

    pub fn net_name(&self, net: NetId) -> &str {
        &self.names[net.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfProblem {
    pub var_count: Var,
    pub clauses: Vec<Clause>,
    pub varmap: VarMap,
}

struct Emitter {
    clauses: Vec<Clause>,
    var_count: Var,
}

impl Emitter {
    fn clause(&mut self, lits: Vec<Lit>) {
        if let Some(c) = Clause::new(lits).expect("gate clauses are nonempty") {
            self.clauses.push(c);
        }
    }

    fn fresh(&mut self) -> Var {
        self.var_count += 1;
        self.var_count
    }

    /// `out <-> a ^ b`
    fn xor2(&mut self, out: Lit, a: Lit, b: Lit) {
        self.clause(vec![!out, a, b]);
        self.clause(vec![!out, !a, !b]);
        self.clause(vec![out, !a, b]);
        self.clause(vec![out, a, !b]);
    }

    fn gate(&mut self, kind: GateKind, out: Var, ins: &[Var]) {
        let o = Lit::pos(out);
        match kind {
            GateKind::And | GateKind::Nand => {
                let o = if kind == GateKind::And { o } else { !o };
                for &i in ins {
                    self.clause(vec![!o, Lit::pos(i)]);
                }
                let mut big: Vec<Lit> = ins.iter().map(|&i| Lit::neg(i)).collect();
                big.push(o);
                self.clause(big);
            }
            GateKind::Or | GateKind::Nor => {
                let o = if kind == GateKind::Or { o } else { !o };
                for &i in ins {
                    self.clause(vec![o, Lit::neg(i)]);
                }
                let mut big: Vec<Lit> = ins.iter().map(|&i| Lit::pos(i)).collect();
                big.push(!o);
                self.clause(big);
            }
            GateKind::Not | GateKind::Buff => {
                let o = if kind == GateKind::Buff { o } else { !o };
                let a = Lit::pos(ins[0]);
                self.clause(vec![!o, a]);
                self.clause(vec![o, !a]);
            }
            GateKind::Xor | GateKind::Xnor => {
                let o = if kind == GateKind::Xor { o } else { !o };
                let mut acc = Lit::pos(ins[0]);
                for (k, &i) in ins.iter().enumerate().skip(1) {
                    let target = if k + 1 == ins.len() { o } else { Lit::pos(self.fresh()) };
                    self.xor2(target, acc, Lit::pos(i));
                    acc = target;
                }
            }
            GateKind::Mux => {
                let (s, a, b) = (Lit::pos(ins[0]), Lit::pos(ins[1]), Lit::pos(ins[2]));
                self.clause(vec![s, !a, o]);
                self.clause(vec![s, a, !o]);
                self.clause(vec![!s, !b, o]);
                self.clause(vec![!s, b, !o]);
            }
            GateKind::Const0 => self.clause(vec![!o]),
            GateKind::Const1 => self.clause(vec![o]),
        }
    }
}

/// Consistency encoding of every gate in the cut. Free inputs and Q nets are
/// left unconstrained, so the models are exactly the consistent signal
/// assignments of the cut.
pub fn encode(cut: &Cut) -> CnfProblem {
    let n = &cut.netlist;
    let net_vars: Vec<Var> = (1..=n.net_count() as Var).collect();
    let mut em = Emitter { clauses: Vec::new(), var_count: n.net_count() as Var };
    for gate in n.gates() {
        let ins: Vec<Var> = gate.inputs.iter().map(|i| net_vars[i.index()]).collect();
        em.gate(gate.kind, net_vars[gate.output.index()], &ins);
    }
    let varmap = VarMap {
        q_vars: cut.q_nets().iter().map(|q| net_vars[q.index()]).collect(),
        d_vars: cut.d_nets().iter().map(|d| net_vars[d.index()]).collect(),
        net_vars,
        names: n.net_names().to_vec(),
    };
    CnfProblem { var_count: em.var_count, clauses: em.clauses, varmap }
}

impl CnfProblem {
    /// Appends a clause, checking its variables against `var_count`.
    pub fn add_clause(&mut self, clause: Clause) -> Result<(), CnfError> {
        let v = clause.max_var();
        if v > self.var_count {
            return Err(CnfError::VarOutOfRange { var: v, count: self.var_count });
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// Forces `vars` to `value` with one unit clause per bit.
    pub fn set_equal(&mut self, vars: &[Var], value: &[bool]) -> Result<(), CnfError> {
        if vars.len() != value.len() {
            return Err(CnfError::LengthMismatch { vars: vars.len(), bits: value.len() });
        }
        for (&v, &b) in vars.iter().zip(value) {
            let unit = Clause::new(vec![Lit::new(v, b)])?.expect("unit clause");
            self.add_clause(unit)?;
        }
        Ok(())
    }

    /// Blocks `value`: adds the single clause requiring at least one of
    /// `vars` to differ from it.
    pub fn set_not_equal(&mut self, vars: &[Var], value: &[bool]) -> Result<(), CnfError> {
        if vars.len() != value.len() {
            return Err(CnfError::LengthMismatch { vars: vars.len(), bits: value.len() });
        }
        if vars.is_empty() {
            return Err(CnfError::EmptyExclusion);
        }
        let lits = vars.iter().zip(value).map(|(&v, &b)| Lit::new(v, !b)).collect();
        match Clause::new(lits)? {
            Some(c) => self.add_clause(c),
            // Repeated variable with conflicting bits: the value is already
            // impossible, nothing to block.
            None => Ok(()),
        }
    }

    /// DIMACS text with a comment block naming each net variable and the
    /// state-register variables.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let names = &self.varmap.names;
        for (i, name) in names.iter().enumerate() {
            let _ = writeln!(out, "c var {} {}", self.varmap.net_vars[i], name);
        }
        for (i, (q, d)) in self.varmap.q_vars.iter().zip(&self.varmap.d_vars).enumerate() {
            let _ = writeln!(out, "c state {i} q={q} d={d}");
        }
        let _ = writeln!(out, "p cnf {} {}", self.var_count, self.clauses.len());
        for c in &self.clauses {
            for l in c.lits() {
                let _ = write!(out, "{l} ");
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Parses DIMACS CNF into a variable count and clause list. Tautologies are
/// dropped.
pub fn parse_dimacs(text: &str) -> Result<(Var, Vec<Clause>), CnfError> {
    let mut header: Option<(Var, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    let mut declared = 0;
    for (idx, line) in text.lines().enumerate() {
        let err = |message: String| CnfError::Dimacs { line: idx + 1, message };
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            match parts.as_slice() {
                ["cnf", v, c] => {
                    let v = v.parse().map_err(|_| err(format!("bad variable count `{v}`")))?;
                    let c = c.parse().map_err(|_| err(format!("bad clause count `{c}`")))?;
                    header = Some((v, c));
                }
                _ => return Err(err("expected `p cnf <vars> <clauses>`".into())),
            }
            continue;
        }
        let (vars, _) = header.ok_or_else(|| err("clause before header".into()))?;
        for tok in line.split_whitespace() {
            let v: i32 = tok.parse().map_err(|_| err(format!("bad literal `{tok}`")))?;
            match Lit::from_dimacs(v) {
                Some(l) if l.var() > vars => return Err(err(format!("variable {} exceeds {vars}", l.var()))),
                Some(l) => current.push(l),
                None => {
                    declared += 1;
                    if let Some(c) = Clause::new(std::mem::take(&mut current)).map_err(|e| err(e.to_string()))? {
                        clauses.push(c);
                    }
                }
            }
        }
    }
    let (vars, count) = header.ok_or(CnfError::Dimacs { line: 0, message: "missing header".into() })?;
    if !current.is_empty() || declared != count {
        return Err(CnfError::Dimacs {
            line: 0,
            message: format!("header declares {count} clauses, found {declared}"),
        });
    }
    Ok((vars, clauses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{parse_bench, tests::EXCLUSIVE_PAIR};
    use crate::recut::{fsm_cut, FsmSpec};

    fn whole(text: &str, regs: &[&str]) -> Cut {
        let n = parse_bench(text).unwrap();
        let spec =
            FsmSpec::new(regs.iter().map(|s| s.to_string()).collect(), crate::topology::StateWord::zeros(regs.len()))
                .unwrap();
        Cut::whole(n, &spec).unwrap()
    }

    /// All models over the first `vars` variables, by enumeration.
    fn models(p: &CnfProblem) -> Vec<Vec<bool>> {
        let n = p.var_count as usize;
        (0..1u64 << n)
            .map(|m| (0..n).map(|i| m >> i & 1 == 1).collect::<Vec<bool>>())
            .filter(|a| p.clauses.iter().all(|c| c.is_satisfied_by(|v| a[v as usize - 1])))
            .collect()
    }

    #[test]
    fn clause_normalization() {
        let c = Clause::new(vec![Lit::pos(3), Lit::neg(1), Lit::pos(3)]).unwrap().unwrap();
        assert_eq!(c.lits(), &[Lit::neg(1), Lit::pos(3)]);
        assert_eq!(Clause::new(vec![Lit::pos(2), Lit::neg(2)]).unwrap(), None);
        assert_eq!(Clause::new(vec![]), Err(CnfError::EmptyClause));
    }

    #[test]
    fn and_gate_models_are_its_truth_table() {
        let cut = whole("INPUT(a)\nINPUT(b)\no = AND(a, b)\nr = DFF(o)\n", &["r"]);
        let p = encode(&cut);
        assert_eq!(p.clauses.len(), 3);
        let n = &cut.netlist;
        let (a, b, o) = (n.net_id("a").unwrap(), n.net_id("b").unwrap(), n.net_id("o").unwrap());
        let mut rows: Vec<(bool, bool, bool)> =
            models(&p).iter().map(|m| (m[a.index()], m[b.index()], m[o.index()])).collect();
        rows.sort();
        rows.dedup();
        assert_eq!(rows, vec![(false, false, false), (false, true, false), (true, false, false), (true, true, true)]);
    }

    #[test]
    fn const1_is_a_unit_clause() {
        let cut = whole("c = CONST1()\nr = DFF(c)\n", &["r"]);
        let p = encode(&cut);
        let c = p.varmap.net_var(cut.netlist.net_id("c").unwrap());
        assert_eq!(p.clauses, vec![Clause(vec![Lit::pos(c)])]);
        assert!(models(&p).iter().all(|m| m[c as usize - 1]));
    }

    #[test]
    fn pair_next_state_never_11() {
        let n = parse_bench(EXCLUSIVE_PAIR).unwrap();
        let spec = FsmSpec::new(vec!["U2".into(), "U4".into()], "00".parse().unwrap()).unwrap();
        let p = encode(&fsm_cut(&n, &spec).unwrap());
        let d = p.varmap.d_vars.clone();
        let all = models(&p);
        assert!(!all.is_empty());
        assert!(all.iter().all(|m| !(m[d[0] as usize - 1] && m[d[1] as usize - 1])));
    }

    #[test]
    fn wide_xor_uses_chain_variables() {
        let cut = whole("INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(e)\nx = XNOR(a, b, c, e)\nr = DFF(x)\n", &["r"]);
        let p = encode(&cut);
        assert_eq!(p.var_count as usize, cut.netlist.net_count() + 2);
        assert_eq!(p.clauses.len(), 12);
    }

    #[test]
    fn set_equal_units() {
        let cut = whole("INPUT(a)\nr = DFF(a)\n", &["r"]);
        let mut p = encode(&cut);
        let before = p.clauses.len();
        p.set_equal(&[1, 2], &[true, false]).unwrap();
        assert_eq!(&p.clauses[before..], &[Clause(vec![Lit::pos(1)]), Clause(vec![Lit::neg(2)])]);
        p.set_equal(&[], &[]).unwrap();
        assert_eq!(p.clauses.len(), before + 2);
        assert_eq!(p.set_equal(&[1], &[]), Err(CnfError::LengthMismatch { vars: 1, bits: 0 }));
    }

    #[test]
    fn set_equal_101_on_three_q_vars() {
        let cut = whole("INPUT(a)\nINPUT(b)\nINPUT(c)\nr0 = DFF(a)\nr1 = DFF(b)\nr2 = DFF(c)\n", &["r0", "r1", "r2"]);
        let mut p = encode(&cut);
        let q = p.varmap.q_vars.clone();
        p.set_equal(&q, &[true, false, true]).unwrap();
        assert_eq!(
            p.clauses,
            vec![Clause(vec![Lit::pos(q[0])]), Clause(vec![Lit::neg(q[1])]), Clause(vec![Lit::pos(q[2])])]
        );
    }

    #[test]
    fn set_not_equal_001() {
        let cut = whole("INPUT(a)\nINPUT(b)\nINPUT(c)\nr0 = DFF(a)\nr1 = DFF(b)\nr2 = DFF(c)\n", &["r0", "r1", "r2"]);
        let mut p = encode(&cut);
        let d = p.varmap.d_vars.clone();
        p.set_not_equal(&d, &[false, false, true]).unwrap();
        let mut expected = vec![Lit::pos(d[0]), Lit::pos(d[1]), Lit::neg(d[2])];
        expected.sort_by_key(|l| l.var());
        assert_eq!(p.clauses.last().unwrap().lits(), expected.as_slice());
        p.set_not_equal(&d[..1], &[true]).unwrap();
        assert_eq!(p.clauses.last().unwrap().lits(), &[Lit::neg(d[0])]);
        assert_eq!(p.set_not_equal(&[], &[]), Err(CnfError::EmptyExclusion));
    }

    #[test]
    fn excluding_every_value_is_unsat() {
        for k in 1..=3usize {
            let mut p = CnfProblem {
                var_count: k as Var,
                clauses: vec![],
                varmap: VarMap { net_vars: vec![], q_vars: vec![], d_vars: vec![], names: vec![] },
            };
            let vars: Vec<Var> = (1..=k as Var).collect();
            for value in 0..1u64 << k {
                assert!(!models(&p).is_empty());
                let bits: Vec<bool> = (0..k).map(|i| value >> i & 1 == 1).collect();
                p.set_not_equal(&vars, &bits).unwrap();
            }
            assert!(models(&p).is_empty());
        }
    }

    #[test]
    fn dimacs_round_trip() {
        let n = parse_bench(EXCLUSIVE_PAIR).unwrap();
        let spec = FsmSpec::new(vec!["U2".into(), "U4".into()], "00".parse().unwrap()).unwrap();
        let p = encode(&fsm_cut(&n, &spec).unwrap());
        let text = p.to_dimacs();
        assert!(text.contains("c var 1 I0\n"));
        let (vars, clauses) = parse_dimacs(&text).unwrap();
        assert_eq!(vars, p.var_count);
        assert_eq!(clauses, p.clauses);
    }

    #[test]
    fn dimacs_errors() {
        assert!(parse_dimacs("1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 3 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 2\n1 2 0\n").is_err());
    }
}
