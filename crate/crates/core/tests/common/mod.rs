//! Independent oracles and random instances shared by the integration tests.
#![allow(dead_code)]

use maxcert::formula::{Clause, CnfFormula, Lit, Var, WcnfInstance};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EXAMPLE1: &[u8] = b"c soft units over a hard 5-cycle of binary clauses
p wcnf 5 10 6
1 -1 0
1 -2 0
1 -3 0
1 -4 0
1 -5 0
6 1 2 0
6 2 3 0
6 3 4 0
6 4 5 0
6 1 5 0
";

fn clause_true(c: &Clause, bits: u64) -> bool {
    c.lits()
        .iter()
        .any(|l| (bits >> l.var().index() & 1 == 1) != l.is_negated())
}

/// Exhaustive satisfiability; returns a model as a bit mask.
pub fn brute_sat(f: &CnfFormula) -> Option<u64> {
    assert!(f.num_vars <= 22);
    (0u64..1 << f.num_vars).find(|&bits| f.clauses.iter().all(|c| clause_true(c, bits)))
}

/// Exhaustive MaxSAT optimum; `None` when the hard clauses are infeasible.
pub fn brute_optimum(inst: &WcnfInstance) -> Option<usize> {
    assert!(inst.num_vars <= 20);
    (0u64..1 << inst.num_vars)
        .filter(|&bits| inst.hard.iter().all(|c| clause_true(c, bits)))
        .map(|bits| inst.soft.iter().filter(|c| !clause_true(c, bits)).count())
        .min()
}

pub fn random_clause(rng: &mut ChaCha8Rng, vars: u32, max_width: usize) -> Clause {
    let width = rng.gen_range(1..=max_width.min(vars as usize));
    let lits = sample(rng, vars as usize, width)
        .into_iter()
        .map(|i| Lit::new(Var::new(i as u32 + 1), rng.gen_bool(0.5)))
        .collect();
    Clause::new(lits).unwrap()
}

pub fn random_cnf(seed: u64, max_vars: u32, max_clauses: usize) -> CnfFormula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = rng.gen_range(1..=max_vars);
    let m = rng.gen_range(0..=max_clauses);
    let clauses = (0..m).map(|_| random_clause(&mut rng, vars, 3)).collect();
    CnfFormula::new(vars, clauses)
}

/// Uniform random k-CNF with exactly `vars` variables and `m` clauses.
pub fn random_kcnf(seed: u64, vars: u32, m: usize, k: usize) -> CnfFormula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = (0..m)
        .map(|_| {
            let lits = sample(&mut rng, vars as usize, k)
                .into_iter()
                .map(|i| Lit::new(Var::new(i as u32 + 1), rng.gen_bool(0.5)))
                .collect();
            Clause::new(lits).unwrap()
        })
        .collect();
    CnfFormula::new(vars, clauses)
}

/// Random partial MaxSAT instance with a satisfiable hard part.
pub fn random_instance(seed: u64, max_vars: u32, max_clauses: usize) -> WcnfInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let vars = rng.gen_range(2..=max_vars);
        let total = rng.gen_range(2..=max_clauses);
        let n_hard = rng.gen_range(0..=total / 2);
        let inst = WcnfInstance {
            num_vars: vars,
            hard: (0..n_hard).map(|_| random_clause(&mut rng, vars, 3)).collect(),
            soft: (n_hard..total).map(|_| random_clause(&mut rng, vars, 2)).collect(),
        };
        if brute_optimum(&inst).is_some() {
            return inst;
        }
    }
}
