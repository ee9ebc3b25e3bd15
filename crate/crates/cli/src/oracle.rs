//! Exhaustive-enumeration MaxSAT optimum, used as ground truth.

use anyhow::{bail, Result};
use maxcert::formula::{Clause, WcnfInstance};

pub const MAX_ORACLE_VARS: u32 = 20;

fn satisfied(clause: &Clause, bits: u32) -> bool {
    clause
        .lits()
        .iter()
        .any(|l| (bits >> l.var().index() & 1 == 1) != l.is_negated())
}

/// Minimum number of falsified soft clauses over all assignments satisfying
/// the hard clauses; `None` when the hard clauses are unsatisfiable.
pub fn brute_force_optimum(inst: &WcnfInstance) -> Result<Option<usize>> {
    if inst.num_vars > MAX_ORACLE_VARS {
        bail!(
            "oracle limited to {MAX_ORACLE_VARS} variables, instance has {}",
            inst.num_vars
        );
    }
    let mut best: Option<usize> = None;
    for bits in 0u32..1 << inst.num_vars {
        if !inst.hard.iter().all(|c| satisfied(c, bits)) {
            continue;
        }
        let cost = inst.soft.iter().filter(|c| !satisfied(c, bits)).count();
        if best.is_none_or(|b| cost < b) {
            best = Some(cost);
            if cost == 0 {
                break;
            }
        }
    }
    Ok(best)
}

/// True iff the hard clauses have a model.
pub fn hard_feasible(inst: &WcnfInstance) -> Result<bool> {
    let hard_only = WcnfInstance {
        num_vars: inst.num_vars,
        hard: inst.hard.clone(),
        soft: Vec::new(),
    };
    Ok(brute_force_optimum(&hard_only)?.is_some())
}
