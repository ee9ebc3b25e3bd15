//! Conflict-driven clause-learning SAT engine with assumptions, final-conflict
//! core extraction and DRUP proof logging.
//!
//! The engine is MiniSat-shaped: two watched literals with blockers, first-UIP
//! learning with local minimization, VSIDS over an indexed heap, phase saving,
//! Luby restarts and activity-based learnt-clause reduction. Every learnt
//! clause is logged as an addition and every reduction as a deletion, so the
//! logged trace is checkable by reverse unit propagation against the input
//! formula.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use crate::drup::{write_proof, ProofStep, ProofTrace};
pub use crate::formula::CnfFormula;
use crate::formula::{Assignment, Lit, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Satisfiable,
    Unsatisfiable,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
}

/// Result of one `solve` call. `model` is set iff satisfiable; `core` iff
/// unsatisfiable under a nonempty assumption list; `proof` iff unsatisfiable
/// with logging enabled.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub model: Option<Assignment>,
    pub core: Option<Vec<Lit>>,
    pub proof: Option<ProofTrace>,
    pub stats: SolveStats,
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        self.status == SolveStatus::Satisfiable
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("conflict budget of {0} exhausted; outcome indeterminate")]
    BudgetExhausted(u64),
    #[error("assumption {0} references a variable outside the formula")]
    AssumptionOutOfRange(i32),
    #[error("no core: outcome is satisfiable")]
    CoreOfSatisfiable,
    #[error("no core: outcome was produced without assumptions")]
    NoAssumptions,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    /// Seeds the initial activity perturbation; equal seeds give equal runs.
    pub seed: u64,
    /// Maximum number of conflicts per `solve` call; `None` is unlimited.
    pub conflict_budget: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            conflict_budget: None,
        }
    }
}

/// Solves `f` under `assumptions` with a fresh engine.
pub fn solve(
    f: &CnfFormula,
    assumptions: &[Lit],
    log_proof: bool,
    config: &SolverConfig,
) -> Result<SolveOutcome, SolveError> {
    let mut solver = Solver::new(f, log_proof, config.clone());
    solver.solve(assumptions)
}

/// The subset of assumptions responsible for an unsatisfiable outcome.
pub fn extract_core(outcome: &SolveOutcome) -> Result<Vec<Lit>, SolveError> {
    match (&outcome.status, &outcome.core) {
        (SolveStatus::Satisfiable, _) => Err(SolveError::CoreOfSatisfiable),
        (SolveStatus::Unsatisfiable, None) => Err(SolveError::NoAssumptions),
        (SolveStatus::Unsatisfiable, Some(core)) => Ok(core.clone()),
    }
}

const TRUE: i8 = 1;
const FALSE: i8 = -1;
const UNDEF: i8 = 0;

type CRef = usize;

#[derive(Clone, Copy, Debug)]
struct Watcher {
    cref: CRef,
    blocker: Lit,
}

#[derive(Debug)]
struct StoredClause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

/// Max-heap of variable indices keyed by activity.
#[derive(Debug, Default)]
struct VarOrder {
    heap: Vec<usize>,
    position: Vec<Option<usize>>,
}

impl VarOrder {
    fn with_vars(n: usize) -> VarOrder {
        VarOrder {
            heap: Vec::with_capacity(n),
            position: vec![None; n],
        }
    }

    fn contains(&self, v: usize) -> bool {
        self.position[v].is_some()
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.position[v] = Some(self.heap.len());
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn bumped(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.position[v] {
            self.sift_up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.position[top] = None;
        if !self.heap.is_empty() {
            self.position[self.heap[0]] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !better(v, self.heap[parent], act) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.position[self.heap[i]] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.position[v] = Some(i);
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let left = 2 * i + 1;
            if left >= self.heap.len() {
                break;
            }
            let right = left + 1;
            let child = if right < self.heap.len() && better(self.heap[right], self.heap[left], act)
            {
                right
            } else {
                left
            };
            if !better(self.heap[child], v, act) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.position[self.heap[i]] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.position[v] = Some(i);
    }
}

// Ties broken by lower index so the order is total and deterministic.
fn better(a: usize, b: usize, act: &[f64]) -> bool {
    act[a] > act[b] || (act[a] == act[b] && a < b)
}

fn luby(y: f64, mut x: u64) -> f64 {
    let mut size = 1u64;
    let mut seq = 0i32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}

const RESTART_BASE: f64 = 100.0;
const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;

/// A single-threaded CDCL engine over a fixed clause set. Learnt clauses are
/// kept across `solve` calls.
pub struct Solver {
    num_vars: usize,
    clauses: Vec<StoredClause>,
    learnts: Vec<CRef>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<CRef>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    order: VarOrder,
    phase: Vec<bool>,
    seen: Vec<bool>,
    proof: Option<ProofTrace>,
    ok: bool,
    max_learnts: f64,
    config: SolverConfig,
    stats: SolveStats,
}

impl Solver {
    pub fn new(f: &CnfFormula, log_proof: bool, config: SolverConfig) -> Solver {
        let n = f.num_vars as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let activity: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 1e-5).collect();
        let mut order = VarOrder::with_vars(n);
        for v in 0..n {
            order.insert(v, &activity);
        }
        let mut solver = Solver {
            num_vars: n,
            clauses: Vec::with_capacity(f.clauses.len()),
            learnts: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![UNDEF; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            var_inc: 1.0,
            cla_inc: 1.0,
            order,
            phase: vec![false; n],
            seen: vec![false; n],
            proof: log_proof.then(ProofTrace::new),
            ok: true,
            max_learnts: (f.clauses.len() as f64 / 3.0).max(200.0),
            config,
            stats: SolveStats::default(),
        };
        for clause in &f.clauses {
            let lits = clause.lits();
            match lits.len() {
                0 => solver.ok = false,
                1 => match solver.lit_value(lits[0]) {
                    UNDEF => solver.enqueue(lits[0], None),
                    FALSE => solver.ok = false,
                    _ => {}
                },
                _ => {
                    let cref = solver.clauses.len();
                    solver.clauses.push(StoredClause {
                        lits: lits.to_vec(),
                        learnt: false,
                        deleted: false,
                        activity: 0.0,
                    });
                    solver.attach(cref);
                }
            }
        }
        solver
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// The proof logged so far (learnt additions and deletions).
    pub fn proof(&self) -> Option<&ProofTrace> {
        self.proof.as_ref()
    }

    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<SolveOutcome, SolveError> {
        if let Some(bad) = assumptions
            .iter()
            .find(|l| l.var().index() >= self.num_vars)
        {
            return Err(SolveError::AssumptionOutOfRange(bad.to_dimacs()));
        }
        self.stats = SolveStats::default();
        let core_default = (!assumptions.is_empty()).then(Vec::new);
        if !self.ok {
            return Ok(self.refuted(core_default));
        }
        let mut restarts = 0u64;
        let mut restart_limit = (luby(2.0, restarts) * RESTART_BASE) as u64;
        let mut conflicts_since_restart = 0u64;

        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_since_restart += 1;
                if let Some(budget) = self.config.conflict_budget {
                    if self.stats.conflicts > budget {
                        self.cancel_until(0);
                        return Err(SolveError::BudgetExhausted(budget));
                    }
                }
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Ok(self.refuted(core_default));
                }
                let (learnt, backtrack_level) = self.analyze(confl);
                self.cancel_until(backtrack_level);
                if let Some(proof) = self.proof.as_mut() {
                    proof.steps.push(ProofStep::Add(learnt.clone()));
                }
                let asserting = learnt[0];
                if learnt.len() == 1 {
                    self.enqueue(asserting, None);
                } else {
                    let cref = self.clauses.len();
                    self.clauses.push(StoredClause {
                        lits: learnt,
                        learnt: true,
                        deleted: false,
                        activity: 0.0,
                    });
                    self.attach(cref);
                    self.learnts.push(cref);
                    self.bump_clause(cref);
                    self.enqueue(asserting, Some(cref));
                }
                self.var_inc /= VAR_DECAY;
                self.cla_inc /= CLAUSE_DECAY;
                continue;
            }

            if conflicts_since_restart >= restart_limit {
                restarts += 1;
                restart_limit = (luby(2.0, restarts) * RESTART_BASE) as u64;
                conflicts_since_restart = 0;
                self.cancel_until(0);
                continue;
            }
            if self.learnts.len() as f64 >= self.max_learnts {
                self.reduce_db();
                self.max_learnts *= 1.1;
            }

            let mut next = None;
            while self.decision_level() < assumptions.len() {
                let p = assumptions[self.decision_level()];
                match self.lit_value(p) {
                    TRUE => self.trail_lim.push(self.trail.len()),
                    FALSE => {
                        let core = self.analyze_final(p);
                        self.cancel_until(0);
                        return Ok(self.refuted(Some(core)));
                    }
                    _ => {
                        next = Some(p);
                        break;
                    }
                }
            }
            let decision = match next {
                Some(p) => p,
                None => match self.pick_branch() {
                    Some(p) => {
                        self.stats.decisions += 1;
                        p
                    }
                    None => {
                        let model = Assignment::from_values(
                            self.assigns.iter().map(|&v| v == TRUE).collect(),
                        );
                        self.cancel_until(0);
                        return Ok(SolveOutcome {
                            status: SolveStatus::Satisfiable,
                            model: Some(model),
                            core: None,
                            proof: None,
                            stats: self.stats.clone(),
                        });
                    }
                },
            };
            self.trail_lim.push(self.trail.len());
            self.enqueue(decision, None);
        }
    }

    // The returned proof ends with the empty clause. A refutation that
    // depends on assumptions is only valid together with unit clauses for the
    // core, so its final step stays out of the running log.
    fn refuted(&mut self, core: Option<Vec<Lit>>) -> SolveOutcome {
        let relative = self.ok;
        let proof = self.proof.as_mut().map(|log| {
            if relative {
                let mut trace = log.clone();
                trace.steps.push(ProofStep::Add(Vec::new()));
                trace
            } else {
                if !log.is_refutation() {
                    log.steps.push(ProofStep::Add(Vec::new()));
                }
                log.clone()
            }
        });
        SolveOutcome {
            status: SolveStatus::Unsatisfiable,
            model: None,
            core,
            proof,
            stats: self.stats.clone(),
        }
    }

    fn lit_value(&self, lit: Lit) -> i8 {
        let v = self.assigns[lit.var().index()];
        if lit.is_negated() {
            -v
        } else {
            v
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn attach(&mut self, cref: CRef) {
        let lits = &self.clauses[cref].lits;
        let (a, b) = (lits[0], lits[1]);
        self.watches[a.code()].push(Watcher { cref, blocker: b });
        self.watches[b.code()].push(Watcher { cref, blocker: a });
    }

    fn enqueue(&mut self, lit: Lit, reason: Option<CRef>) {
        let v = lit.var().index();
        debug_assert_eq!(self.assigns[v], UNDEF);
        self.assigns[v] = if lit.is_negated() { FALSE } else { TRUE };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn cancel_until(&mut self, target: usize) {
        if self.decision_level() <= target {
            return;
        }
        let keep = self.trail_lim[target];
        for i in (keep..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = lit.var().index();
            self.phase[v] = !lit.is_negated();
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            self.order.insert(v, &self.activity);
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(target);
        self.qhead = keep;
    }

    /// Unit propagation; returns the conflicting clause, if any.
    fn propagate(&mut self) -> Option<CRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.clauses[w.cref].deleted {
                    continue;
                }
                if self.lit_value(w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref;
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                let kept = Watcher {
                    cref,
                    blocker: first,
                };
                if first != w.blocker && self.lit_value(first) == TRUE {
                    ws[j] = kept;
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let candidate = self.clauses[cref].lits[k];
                    if self.lit_value(candidate) != FALSE {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[candidate.code()].push(kept);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = kept;
                j += 1;
                if self.lit_value(first) == FALSE {
                    conflict = Some(cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                    self.qhead = self.trail.len();
                } else {
                    self.enqueue(first, Some(cref));
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

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: CRef) {
        self.clauses[cref].activity += self.cla_inc;
        if self.clauses[cref].activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first, highest remaining level second) and the backjump level.
    fn analyze(&mut self, confl: CRef) -> (Vec<Lit>, usize) {
        let current = self.decision_level() as u32;
        let mut learnt = vec![Lit::from_dimacs(1)];
        let mut open = 0usize;
        let mut pivot: Option<Lit> = None;
        let mut index = self.trail.len();
        let mut clause = confl;
        loop {
            if self.clauses[clause].learnt {
                self.bump_clause(clause);
            }
            let start = usize::from(pivot.is_some());
            for k in start..self.clauses[clause].lits.len() {
                let q = self.clauses[clause].lits[k];
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        open += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let p = self.trail[index];
            let v = p.var().index();
            self.seen[v] = false;
            open -= 1;
            pivot = Some(p);
            if open == 0 {
                break;
            }
            clause = self.reason[v].expect("implied literal has a reason");
        }
        learnt[0] = !pivot.unwrap();

        // local minimization: drop literals implied by other learnt literals
        let mut kept = vec![learnt[0]];
        for &q in &learnt[1..] {
            let v = q.var().index();
            let redundant = match self.reason[v] {
                None => false,
                Some(r) => self.clauses[r].lits[1..].iter().all(|x| {
                    let xv = x.var().index();
                    self.seen[xv] || self.level[xv] == 0
                }),
            };
            if !redundant {
                kept.push(q);
            }
        }
        for &q in &learnt[1..] {
            self.seen[q.var().index()] = false;
        }
        let mut learnt = kept;

        let backtrack = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = k;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().index()] as usize
        };
        (learnt, backtrack)
    }

    /// Assumptions responsible for `failed` being false. Every decision on
    /// the trail at this point is an assumption.
    fn analyze_final(&mut self, failed: Lit) -> Vec<Lit> {
        let mut core = vec![failed];
        let fv = failed.var().index();
        if self.level[fv] == 0 {
            return core;
        }
        self.seen[fv] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = lit.var().index();
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                None => core.push(lit),
                Some(r) => {
                    for k in 1..self.clauses[r].lits.len() {
                        let q = self.clauses[r].lits[k].var().index();
                        if self.level[q] > 0 {
                            self.seen[q] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        core
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                return Some(Lit::new(Var::new(v as u32 + 1), !self.phase[v]));
            }
        }
        None
    }

    fn locked(&self, cref: CRef) -> bool {
        let first = self.clauses[cref].lits[0];
        self.reason[first.var().index()] == Some(cref) && self.lit_value(first) == TRUE
    }

    fn reduce_db(&mut self) {
        let mut candidates: Vec<CRef> = self.learnts.clone();
        candidates.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .partial_cmp(&self.clauses[b].activity)
                .unwrap()
                .then(a.cmp(&b))
        });
        let limit = candidates.len() / 2;
        let mut removed = 0;
        for &cref in &candidates {
            if removed >= limit {
                break;
            }
            if self.clauses[cref].lits.len() > 2 && !self.locked(cref) {
                self.clauses[cref].deleted = true;
                if let Some(proof) = self.proof.as_mut() {
                    proof
                        .steps
                        .push(ProofStep::Delete(self.clauses[cref].lits.clone()));
                }
                removed += 1;
            }
        }
        let clauses = &self.clauses;
        self.learnts.retain(|&c| !clauses[c].deleted);
        for clause in self.clauses.iter_mut().filter(|c| c.deleted) {
            clause.lits = Vec::new();
        }
    }
}
