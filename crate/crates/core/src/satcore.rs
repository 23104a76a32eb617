//! Conflict-driven clause-learning SAT solver.
//!
//! Two-watched-literal propagation, first-UIP learning with basic clause
//! minimization, VSIDS variable activities, Luby restarts, and phase saving
//! starting from negative polarity. Clauses can be added between calls to
//! [`Solver::solve`]; learned clauses are kept, which is sound because the
//! clause set only ever grows. There is no randomness, so identical clause
//! sequences give identical answers and models.

use thiserror::Error;

use crate::cnf::{Clause, CnfProblem, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct SLit(u32);

impl SLit {
    fn from_lit(l: crate::cnf::Lit) -> SLit {
        SLit((l.var() - 1) << 1 | (!l.is_positive()) as u32)
    }

    #[inline]
    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    fn negated(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    fn not(self) -> SLit {
        SLit(self.0 ^ 1)
    }

    fn with_var(var: usize, negated: bool) -> SLit {
        SLit((var as u32) << 1 | negated as u32)
    }
}

// Per-variable assignment: 0 unassigned, 1 true, -1 false.
const UNDEF: i8 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Undef,
}

#[derive(Debug, Clone, Copy)]
struct Watch {
    cref: u32,
    blocker: SLit,
}

/// Clauses stored back to back; a clause reference is an index into
/// `spans`. Cloning copies three flat vectors.
#[derive(Debug, Clone, Default)]
struct Arena {
    lits: Vec<SLit>,
    spans: Vec<(u32, u32)>,
}

impl Arena {
    fn push(&mut self, lits: &[SLit]) -> u32 {
        let cref = self.spans.len() as u32;
        self.spans.push((self.lits.len() as u32, lits.len() as u32));
        self.lits.extend_from_slice(lits);
        cref
    }

    #[inline]
    fn get(&self, cref: u32) -> &[SLit] {
        let (start, len) = self.spans[cref as usize];
        &self.lits[start as usize..(start + len) as usize]
    }

    #[inline]
    fn get_mut(&mut self, cref: u32) -> &mut [SLit] {
        let (start, len) = self.spans[cref as usize];
        &mut self.lits[start as usize..(start + len) as usize]
    }

    fn iter(&self) -> impl Iterator<Item = &[SLit]> {
        (0..self.spans.len() as u32).map(|c| self.get(c))
    }
}

#[inline]
fn lit_value(assigns: &[i8], l: SLit) -> Value {
    match assigns[l.var()] {
        UNDEF => Value::Undef,
        a => {
            if (a > 0) != l.negated() {
                Value::True
            } else {
                Value::False
            }
        }
    }
}

/// A total assignment. Index with 1-based variables via [`Model::value`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model(Vec<bool>);

impl Model {
    pub fn value(&self, var: Var) -> bool {
        self.0[var as usize - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    Sat(Model),
    Unsat,
    /// The conflict budget ran out before an answer was found.
    BudgetExhausted,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("variable {var} out of range (solver has {count})")]
    VarOutOfRange { var: Var, count: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub solves: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learned: u64,
}

/// Max-heap of variables keyed by activity, ties to the lower index.
#[derive(Debug, Default, Clone)]
struct VarOrder {
    heap: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl VarOrder {
    fn better(act: &[f64], a: usize, b: usize) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v].is_some()
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v] = Some(self.heap.len());
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn bumped(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.pos[v] {
            self.sift_up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("nonempty");
        self.pos[top] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::better(act, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i]] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let child = if r < self.heap.len() && Self::better(act, self.heap[r], self.heap[l]) { r } else { l };
            if !Self::better(act, self.heap[child], v) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i]] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }
}

const VAR_DECAY: f64 = 0.95;
const RESTART_BASE: u64 = 100;

#[derive(Debug, Clone)]
pub struct Solver {
    clauses: Arena,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    trail: Vec<SLit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    order: VarOrder,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    budget: Option<u64>,
    stats: SolverStats,
    // input clauses as given, kept in debug builds to check every model
    original: Arena,
}

impl Solver {
    pub fn new(num_vars: usize) -> Self {
        let mut s = Solver {
            clauses: Arena::default(),
            watches: vec![Vec::new(); 2 * num_vars],
            assigns: vec![UNDEF; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::with_capacity(num_vars),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; num_vars],
            var_inc: 1.0,
            order: VarOrder { heap: Vec::with_capacity(num_vars), pos: vec![None; num_vars] },
            phase: vec![false; num_vars],
            seen: vec![false; num_vars],
            ok: true,
            budget: None,
            stats: SolverStats::default(),
            original: Arena::default(),
        };
        for v in 0..num_vars {
            s.order.insert(v, &s.activity);
        }
        s
    }

    /// Loads every clause of `problem`.
    pub fn from_problem(problem: &CnfProblem) -> Self {
        let mut s = Solver::new(problem.var_count as usize);
        for c in &problem.clauses {
            s.add_clause(c).expect("problem clauses are within its variable range");
        }
        s
    }

    /// Caps the number of conflicts a single [`Solver::solve`] call may spend.
    pub fn set_conflict_budget(&mut self, budget: Option<u64>) {
        self.budget = budget;
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    #[inline]
    fn value(&self, l: SLit) -> Value {
        lit_value(&self.assigns, l)
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: SLit, reason: Option<u32>) {
        let v = l.var();
        self.assigns[v] = if l.negated() { -1 } else { 1 };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var();
            self.phase[v] = !l.negated();
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            self.order.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn attach(&mut self, lits: &[SLit]) -> u32 {
        let cref = self.clauses.push(lits);
        self.watches[lits[0].code()].push(Watch { cref, blocker: lits[1] });
        self.watches[lits[1].code()].push(Watch { cref, blocker: lits[0] });
        cref
    }

    /// Adds a clause permanently.
    pub fn add_clause(&mut self, clause: &Clause) -> Result<(), SolverError> {
        let n = self.num_vars();
        if let Some(l) = clause.lits().iter().find(|l| l.var() as usize > n) {
            return Err(SolverError::VarOutOfRange { var: l.var(), count: n });
        }
        if cfg!(debug_assertions) {
            let lits: Vec<SLit> = clause.lits().iter().map(|&l| SLit::from_lit(l)).collect();
            self.original.push(&lits);
        }
        self.cancel_until(0);
        if !self.ok {
            return Ok(());
        }
        let mut lits = Vec::with_capacity(clause.lits().len());
        for &l in clause.lits() {
            let sl = SLit::from_lit(l);
            match self.value(sl) {
                Value::True => return Ok(()),
                Value::False => {}
                Value::Undef => lits.push(sl),
            }
        }
        match lits.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(lits[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(&lits);
            }
        }
        Ok(())
    }

    pub fn add_clauses<'a>(&mut self, clauses: impl IntoIterator<Item = &'a Clause>) -> Result<(), SolverError> {
        for c in clauses {
            self.add_clause(c)?;
        }
        Ok(())
    }

    /// Unit propagation; returns a conflicting clause if one is found.
    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p.not();
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let (mut i, mut j) = (0, 0);
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == Value::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let lits = self.clauses.get_mut(w.cref);
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let kept = Watch { cref: w.cref, blocker: first };
                if first != w.blocker && lit_value(&self.assigns, first) == Value::True {
                    ws[j] = kept;
                    j += 1;
                    continue;
                }
                let mut new_watch = None;
                for k in 2..lits.len() {
                    if lit_value(&self.assigns, lits[k]) != Value::False {
                        lits.swap(1, k);
                        new_watch = Some(lits[1]);
                        break;
                    }
                }
                if let Some(l) = new_watch {
                    self.watches[l.code()].push(kept);
                    continue;
                }
                ws[j] = kept;
                j += 1;
                if self.value(first) == Value::False {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                    self.qhead = self.trail.len();
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(v, &self.activity);
    }

    /// First-UIP conflict analysis. Returns the learned clause (asserting
    /// literal first, highest remaining level second) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<SLit>, u32) {
        let mut learnt = vec![SLit(0)];
        let mut path = 0;
        let mut p: Option<SLit> = None;
        let mut idx = self.trail.len();
        let dl = self.decision_level();
        loop {
            let start = usize::from(p.is_some());
            for k in start..self.clauses.get(confl).len() {
                let q = self.clauses.get(confl)[k];
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump(v);
                    self.seen[v] = true;
                    if self.level[v] >= dl {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            self.seen[lit.var()] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            confl = self.reason[lit.var()].expect("implied literal has a reason");
        }
        learnt[0] = p.expect("conflict at decision level > 0").not();

        // Drop literals implied by the rest of the clause.
        let marked: Vec<SLit> = learnt[1..].to_vec();
        let mut j = 1;
        for i in 1..learnt.len() {
            let l = learnt[i];
            let redundant = match self.reason[l.var()] {
                None => false,
                Some(r) => self.clauses.get(r)[1..].iter().all(|q| self.seen[q.var()] || self.level[q.var()] == 0),
            };
            if !redundant {
                learnt[j] = l;
                j += 1;
            }
        }
        learnt.truncate(j);
        for l in marked {
            self.seen[l.var()] = false;
        }

        let bt = if learnt.len() == 1 {
            0
        } else {
            let (best, _) = learnt
                .iter()
                .enumerate()
                .skip(1)
                .max_by_key(|(i, l)| (self.level[l.var()], std::cmp::Reverse(*i)))
                .expect("at least two literals");
            learnt.swap(1, best);
            self.level[learnt[1].var()]
        };
        (learnt, bt)
    }

    fn luby(mut x: u64) -> u64 {
        // Position of x in 1,1,2,1,1,2,4,1,1,2,...
        let (mut size, mut seq) = (1u64, 0u32);
        while size < x + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        while size - 1 != x {
            size = (size - 1) >> 1;
            seq -= 1;
            x %= size;
        }
        1 << seq
    }

    /// Decides satisfiability of all clauses added so far.
    pub fn solve(&mut self) -> SatResult {
        self.stats.solves += 1;
        if !self.ok {
            return SatResult::Unsat;
        }
        self.cancel_until(0);
        let mut conflicts_here = 0u64;
        let mut restart_idx = 0u64;
        let mut restart_limit = Self::luby(restart_idx) * RESTART_BASE;
        let mut since_restart = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_here += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SatResult::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                self.stats.learned += 1;
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(&learnt);
                    self.enqueue(first, Some(cref));
                }
                self.var_inc /= VAR_DECAY;
                if self.budget.is_some_and(|b| conflicts_here >= b) {
                    self.cancel_until(0);
                    return SatResult::BudgetExhausted;
                }
            } else {
                if since_restart >= restart_limit {
                    self.stats.restarts += 1;
                    restart_idx += 1;
                    restart_limit = Self::luby(restart_idx) * RESTART_BASE;
                    since_restart = 0;
                    self.cancel_until(0);
                    continue;
                }
                let next = loop {
                    match self.order.pop(&self.activity) {
                        Some(v) if self.assigns[v] != UNDEF => continue,
                        other => break other,
                    }
                };
                match next {
                    Some(v) => {
                        self.stats.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(SLit::with_var(v, !self.phase[v]), None);
                    }
                    None => {
                        let model = Model(self.assigns.iter().map(|&a| a > 0).collect());
                        debug_assert!(
                            self.original.iter().all(|c| c.iter().any(|&l| lit_value(&self.assigns, l) == Value::True)),
                            "model violates an input clause"
                        );
                        return SatResult::Sat(model);
                    }
                }
            }
        }
    }
}
