//! Seeded random partial MaxSAT instances with a satisfiable hard part.

use anyhow::{bail, ensure, Result};
use maxcert::formula::{Clause, Lit, Var, WcnfInstance};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle::{hard_feasible, MAX_ORACLE_VARS};

/// Rejection rounds before giving up on a feasible hard part.
pub const MAX_ROUNDS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub vars: u32,
    pub hard: usize,
    pub soft: usize,
    pub width: usize,
    pub seed: u64,
}

fn random_clause(rng: &mut ChaCha8Rng, vars: u32, width: usize) -> Clause {
    let lits = sample(rng, vars as usize, width)
        .into_iter()
        .map(|i| Lit::new(Var::new(i as u32 + 1), rng.gen_bool(0.5)))
        .collect();
    Clause::new(lits).expect("distinct variables")
}

pub fn generate(p: &GenParams) -> Result<WcnfInstance> {
    ensure!(
        (1..=MAX_ORACLE_VARS).contains(&p.vars),
        "--vars must be between 1 and {MAX_ORACLE_VARS}"
    );
    ensure!(
        (1..=p.vars as usize).contains(&p.width),
        "--width must be between 1 and --vars"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    for _ in 0..MAX_ROUNDS {
        let hard: Vec<Clause> = (0..p.hard)
            .map(|_| random_clause(&mut rng, p.vars, p.width))
            .collect();
        let mut inst = WcnfInstance {
            num_vars: p.vars,
            hard,
            soft: Vec::new(),
        };
        if !hard_feasible(&inst)? {
            continue;
        }
        inst.soft = (0..p.soft)
            .map(|_| random_clause(&mut rng, p.vars, p.width))
            .collect();
        return Ok(inst);
    }
    bail!("no satisfiable hard part after {MAX_ROUNDS} attempts")
}

pub fn render(p: &GenParams, inst: &WcnfInstance) -> String {
    format!(
        "c maxcert gen --vars {} --hard {} --soft {} --width {} --seed {}\n{}",
        p.vars,
        p.hard,
        p.soft,
        p.width,
        p.seed,
        inst.to_wcnf_string()
    )
}
