//! Sequential-counter CNF encoding of `sum(inputs) <= k`.
//!
//! For `n` inputs and `0 < k < n` the encoding introduces auxiliary
//! variables `s(i, j)` for `i in 1..n` and `j in 1..=k`, read as "at least
//! `j` of the first `i` inputs are true", numbered row-major from the first
//! fresh variable:
//!
//! ```text
//! s(i, j) = first_fresh + (i - 1) * k + (j - 1)
//! ```
//!
//! Closed forms: `(n - 1) * k` auxiliary variables and
//! `2 * n * k + n - 3 * k - 1` clauses. `k = 0` yields the units `(-x_i)`;
//! `k >= n` yields no clauses at all.

use std::ops::Range;

use thiserror::Error;

use crate::formula::{Clause, Lit, Var};

/// Name recorded in run manifests.
pub const ENCODING_ID: &str = "sequential-counter";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtMostEncoding {
    pub clauses: Vec<Clause>,
    /// Auxiliary variable ids, half-open.
    pub aux_vars: Range<u32>,
    pub inputs: Vec<Lit>,
    pub bound: usize,
}

impl AtMostEncoding {
    pub fn num_aux(&self) -> u32 {
        self.aux_vars.end - self.aux_vars.start
    }

    /// Highest variable id used by inputs or auxiliaries.
    pub fn max_var(&self) -> u32 {
        let input_max = self.inputs.iter().map(|l| l.var().id()).max().unwrap_or(0);
        input_max.max(self.aux_vars.end.saturating_sub(1))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("fresh variable range starting at {first} collides with input variable {input}")]
    FreshVarCollision { first: u32, input: u32 },
    #[error("strict bound must be at least 1")]
    NonPositiveStrictBound,
}

pub fn aux_count(n: usize, k: usize) -> usize {
    if k == 0 || k >= n {
        0
    } else {
        (n - 1) * k
    }
}

pub fn clause_count(n: usize, k: usize) -> usize {
    if k >= n {
        0
    } else if k == 0 {
        n
    } else {
        2 * n * k + n - 3 * k - 1
    }
}

/// Encodes `sum(inputs) <= k` with auxiliaries allocated contiguously from
/// `first_fresh_var`.
pub fn encode_atmost(
    inputs: &[Lit],
    k: usize,
    first_fresh_var: Var,
) -> Result<AtMostEncoding, EncodeError> {
    let n = inputs.len();
    let first = first_fresh_var.id();
    let aux_end = first + aux_count(n, k) as u32;
    if let Some(input) = inputs
        .iter()
        .map(|l| l.var().id())
        .find(|&v| v >= first && v < aux_end.max(first + 1))
    {
        return Err(EncodeError::FreshVarCollision { first, input });
    }

    let mut clauses = Vec::with_capacity(clause_count(n, k));
    if k == 0 {
        clauses.extend(inputs.iter().map(|&x| unit(!x)));
    } else if k < n {
        let s = |i: usize, j: usize| -> Lit {
            debug_assert!((1..n).contains(&i) && (1..=k).contains(&j));
            Var::new(first + ((i - 1) * k + (j - 1)) as u32).pos()
        };
        let x = |i: usize| inputs[i - 1];

        clauses.push(pair(!x(1), s(1, 1)));
        for j in 2..=k {
            clauses.push(unit(!s(1, j)));
        }
        for i in 2..n {
            clauses.push(pair(!x(i), s(i, 1)));
            clauses.push(pair(!s(i - 1, 1), s(i, 1)));
            for j in 2..=k {
                clauses.push(triple(!x(i), !s(i - 1, j - 1), s(i, j)));
                clauses.push(pair(!s(i - 1, j), s(i, j)));
            }
            clauses.push(pair(!x(i), !s(i - 1, k)));
        }
        clauses.push(pair(!x(n), !s(n - 1, k)));
    }
    debug_assert_eq!(clauses.len(), clause_count(n, k));
    Ok(AtMostEncoding {
        clauses,
        aux_vars: first..aux_end,
        inputs: inputs.to_vec(),
        bound: k,
    })
}

/// Encodes `sum(inputs) < k`, i.e. `sum(inputs) <= k - 1`.
pub fn encode_strictly_less(
    inputs: &[Lit],
    k: usize,
    first_fresh_var: Var,
) -> Result<AtMostEncoding, EncodeError> {
    if k == 0 {
        return Err(EncodeError::NonPositiveStrictBound);
    }
    encode_atmost(inputs, k - 1, first_fresh_var)
}

fn unit(a: Lit) -> Clause {
    Clause::new(vec![a]).expect("unit clause")
}

fn pair(a: Lit, b: Lit) -> Clause {
    Clause::new(vec![a, b]).expect("distinct variables")
}

fn triple(a: Lit, b: Lit, c: Lit) -> Clause {
    Clause::new(vec![a, b, c]).expect("distinct variables")
}
