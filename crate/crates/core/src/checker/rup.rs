//! Forward DRUP checking: every added clause must be a reverse unit
//! propagation consequence of the clauses alive at that point.

use std::collections::HashMap;

use crate::drup::{ProofStep, ProofTrace};
use crate::formula::{CnfFormula, Lit};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RupError {
    /// 1-based step whose clause is not RUP.
    StepFailed { step: usize },
    /// 1-based step deleting a clause that is not in the database.
    UnknownDeletion { step: usize },
    /// The trace never derives the empty clause as its final step.
    Incomplete,
}

const NO_REASON: usize = usize::MAX;

struct Database {
    clauses: Vec<Vec<Lit>>,
    alive: Vec<bool>,
    by_key: HashMap<Vec<Lit>, Vec<usize>>,
    watches: Vec<Vec<usize>>,
    values: Vec<i8>,
    reason: Vec<usize>,
    trail_pos: Vec<usize>,
    trail: Vec<Lit>,
    qhead: usize,
    /// Top-level unit propagation already reached a conflict.
    inconsistent: bool,
}

fn key(lits: &[Lit]) -> Vec<Lit> {
    let mut k = lits.to_vec();
    k.sort();
    k.dedup();
    k
}

impl Database {
    fn new(num_vars: u32) -> Database {
        let mut db = Database {
            clauses: Vec::new(),
            alive: Vec::new(),
            by_key: HashMap::new(),
            watches: Vec::new(),
            values: Vec::new(),
            reason: Vec::new(),
            trail_pos: Vec::new(),
            trail: Vec::new(),
            qhead: 0,
            inconsistent: false,
        };
        db.grow(num_vars as usize);
        db
    }

    fn grow(&mut self, num_vars: usize) {
        if self.values.len() < num_vars {
            self.values.resize(num_vars, 0);
            self.reason.resize(num_vars, NO_REASON);
            self.trail_pos.resize(num_vars, 0);
            self.watches.resize(2 * num_vars, Vec::new());
        }
    }

    fn value(&self, lit: Lit) -> i8 {
        let v = self.values[lit.var().index()];
        if lit.is_negated() {
            -v
        } else {
            v
        }
    }

    fn assign(&mut self, lit: Lit, reason: usize) {
        let idx = lit.var().index();
        self.values[idx] = if lit.is_negated() { -1 } else { 1 };
        self.reason[idx] = reason;
        self.trail_pos[idx] = self.trail.len();
        self.trail.push(lit);
    }

    fn backtrack(&mut self, len: usize) {
        for lit in self.trail.drain(len..) {
            let idx = lit.var().index();
            self.values[idx] = 0;
            self.reason[idx] = NO_REASON;
        }
        self.qhead = len;
    }

    /// Unit propagation from `qhead`; true on conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut conflict = false;
            while i < ws.len() {
                let cid = ws[i];
                if !self.alive[cid] {
                    ws.swap_remove(i);
                    continue;
                }
                let mut lits = std::mem::take(&mut self.clauses[cid]);
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                if self.value(lits[0]) == 1 {
                    self.clauses[cid] = lits;
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    if self.value(lits[k]) != -1 {
                        lits.swap(1, k);
                        self.watches[lits[1].code()].push(cid);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    self.clauses[cid] = lits;
                    ws.swap_remove(i);
                    continue;
                }
                let first = lits[0];
                self.clauses[cid] = lits;
                i += 1;
                match self.value(first) {
                    -1 => {
                        conflict = true;
                        break;
                    }
                    0 => self.assign(first, cid),
                    _ => {}
                }
            }
            let slot = &mut self.watches[false_lit.code()];
            ws.append(slot);
            *slot = ws;
            if conflict {
                return true;
            }
        }
        false
    }

    fn add(&mut self, lits: &[Lit]) {
        let max = lits.iter().map(|l| l.var().id() as usize).max().unwrap_or(0);
        self.grow(max);
        let k = key(lits);
        let id = self.clauses.len();
        self.by_key.entry(k.clone()).or_default().push(id);
        self.clauses.push(k);
        self.alive.push(true);
        self.attach(id);
    }

    /// Watches clause `id` and propagates anything it forces at top level.
    fn attach(&mut self, id: usize) {
        if self.inconsistent {
            return;
        }
        let mut lits = std::mem::take(&mut self.clauses[id]);
        if lits.windows(2).any(|w| w[0] == !w[1]) {
            // tautology: never propagates
            self.clauses[id] = lits;
            return;
        }
        // non-false literals first, false ones by decreasing trail position
        lits.sort_by_key(|&l| match self.value(l) {
            -1 => (1, usize::MAX - self.trail_pos[l.var().index()]),
            _ => (0, 0),
        });
        let (first_value, len) = (lits.first().map(|&l| self.value(l)), lits.len());
        if len >= 2 {
            self.watches[lits[0].code()].push(id);
            self.watches[lits[1].code()].push(id);
        }
        let unit = lits.first().copied();
        let second_false = len < 2 || self.value(lits[1]) == -1;
        self.clauses[id] = lits;
        match (unit, first_value) {
            (None, _) | (Some(_), Some(-1)) => self.inconsistent = true,
            (Some(l), Some(0)) if second_false => {
                self.assign(l, id);
                if self.propagate() {
                    self.inconsistent = true;
                }
            }
            _ => {}
        }
    }

    /// True when asserting the negation of `lits` propagates to a conflict.
    fn is_rup(&mut self, lits: &[Lit]) -> bool {
        if self.inconsistent {
            return true;
        }
        let max = lits.iter().map(|l| l.var().id() as usize).max().unwrap_or(0);
        self.grow(max);
        let mark = self.trail.len();
        let mut conflict = false;
        for &l in lits {
            match self.value(l) {
                1 => {
                    conflict = true;
                    break;
                }
                -1 => {}
                _ => self.assign(!l, NO_REASON),
            }
        }
        if !conflict {
            conflict = self.propagate();
        }
        self.backtrack(mark);
        conflict
    }

    /// Removes one copy of `lits`; false if no such clause is alive.
    fn delete(&mut self, lits: &[Lit]) -> bool {
        let Some(ids) = self.by_key.get_mut(&key(lits)) else {
            return false;
        };
        let Some(id) = ids.pop() else {
            return false;
        };
        if ids.is_empty() {
            self.by_key.remove(&key(lits));
        }
        self.alive[id] = false;
        let is_reason = self.trail.iter().any(|l| self.reason[l.var().index()] == id);
        if self.inconsistent || is_reason || self.clauses[id].len() < 2 {
            self.rebuild();
        }
        true
    }

    fn rebuild(&mut self) {
        self.backtrack(0);
        self.inconsistent = false;
        self.watches.iter_mut().for_each(Vec::clear);
        for id in 0..self.clauses.len() {
            if self.alive[id] {
                self.attach(id);
            }
        }
    }
}

/// Checks that `proof` refutes `f`.
pub fn check_refutation(f: &CnfFormula, proof: &ProofTrace) -> Result<(), RupError> {
    let mut db = Database::new(f.num_vars);
    for clause in &f.clauses {
        db.add(clause.lits());
    }
    for (i, step) in proof.steps.iter().enumerate() {
        match step {
            ProofStep::Add(lits) => {
                if !db.is_rup(lits) {
                    return Err(RupError::StepFailed { step: i + 1 });
                }
                db.add(lits);
            }
            ProofStep::Delete(lits) => {
                if !db.delete(lits) {
                    return Err(RupError::UnknownDeletion { step: i + 1 });
                }
            }
        }
    }
    if proof.is_refutation() {
        Ok(())
    } else {
        Err(RupError::Incomplete)
    }
}
