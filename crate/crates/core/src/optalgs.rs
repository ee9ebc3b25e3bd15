//! SAT-based MaxSAT search with certificate emission.
//!
//! All four algorithms share the working formula layout of
//! [`crate::certs::working_formula`]; they differ in which bounds they test
//! and, for `msu3`, which soft clauses carry relaxation variables.
//!
//! Certificates for unsatisfiable iterations are always DRUP refutations of
//! the plain iteration instance, without assumptions, so the checker can
//! rebuild exactly the refuted formula. `msu3` extracts its cores from a
//! separate selector-guarded solve and re-solves the plain instance when a
//! proof is needed.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::cardenc::{EncodeError, ENCODING_ID};
use crate::certs::{
    self, format_model, iteration_proof_file, minimality_instance, sat_certificate_id,
    unsat_certificate_id, working_formula, Algorithm, CertMode, CertificateEntry,
    FeasibilityRecord, IterStatus, IterationRecord, MinimalityRecord, Reconstructed,
    ReconstructError, RunManifest, RunOutcome, VariableLayout, FORMAT_VERSION,
    HARD_PROOF_FILE, INSTANCE_FILE, MINIMALITY_PROOF_FILE,
};
use crate::drup::ProofTrace;
use crate::formula::{Assignment, CnfFormula, Lit, Var, WcnfInstance};
use crate::satcore::{self, SolveError, SolveOutcome, SolverConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub algorithm: Algorithm,
    pub cert_mode: CertMode,
    /// When false no proofs are logged and no certificates are kept; the
    /// manifest still records the iterations.
    pub certify: bool,
    pub seed: u64,
    pub conflict_budget: Option<u64>,
}

impl RunOptions {
    pub fn new(algorithm: Algorithm, cert_mode: CertMode) -> RunOptions {
        RunOptions {
            algorithm,
            cert_mode,
            certify: true,
            seed: 0,
            conflict_budget: None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OptError {
    #[error("SAT engine: {0}")]
    Solve(#[from] SolveError),
    #[error("cardinality encoding: {0}")]
    Encode(#[from] EncodeError),
    #[error("instance construction: {0}")]
    Reconstruct(#[from] ReconstructError),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub outcome: RunOutcome,
    pub manifest: RunManifest,
    /// Proof traces keyed by bundle file name.
    pub proofs: BTreeMap<String, ProofTrace>,
    /// The plain CNF tested at each iteration, in iteration order.
    pub solved: Vec<CnfFormula>,
}

impl RunResult {
    pub fn optimum(&self) -> Option<usize> {
        self.outcome.optimum()
    }

    pub fn iterations(&self) -> &[IterationRecord] {
        &self.manifest.iterations
    }
}

struct Run<'a> {
    inst: &'a WcnfInstance,
    opts: RunOptions,
    config: SolverConfig,
    layout: VariableLayout,
    records: Vec<IterationRecord>,
    certificates: Vec<CertificateEntry>,
    proofs: BTreeMap<String, ProofTrace>,
    solved: Vec<CnfFormula>,
    /// Latest satisfiable model, kept for last-only certification.
    last_sat: Option<(usize, Assignment)>,
}

impl<'a> Run<'a> {
    fn new(inst: &'a WcnfInstance, opts: &RunOptions) -> Run<'a> {
        Run {
            inst,
            config: SolverConfig {
                seed: opts.seed,
                conflict_budget: opts.conflict_budget,
            },
            layout: VariableLayout::for_instance(inst, opts.algorithm),
            opts: opts.clone(),
            records: Vec::new(),
            certificates: Vec::new(),
            proofs: BTreeMap::new(),
            solved: Vec::new(),
            last_sat: None,
        }
    }

    fn log_each(&self) -> bool {
        self.opts.certify && self.opts.cert_mode == CertMode::All
    }

    fn all_relaxed(&self, bound: usize) -> Result<Reconstructed, OptError> {
        let base = self.layout.relax_base;
        let vars: Vec<Option<Var>> = (0..self.inst.num_soft())
            .map(|i| Some(Var::new(base + i as u32)))
            .collect();
        let lits: Vec<Lit> = vars.iter().map(|v| v.unwrap().pos()).collect();
        Ok(working_formula(self.inst, &vars, &lits, bound, self.layout.aux_base, false)?)
    }

    fn solve(&self, f: &CnfFormula, assumptions: &[Lit], log: bool) -> Result<SolveOutcome, OptError> {
        Ok(satcore::solve(f, assumptions, log, &self.config)?)
    }

    /// Records iteration `index` (1-based, the next one) and keeps its
    /// certificate in all-mode.
    fn record(
        &mut self,
        bound: usize,
        formula: CnfFormula,
        model: Option<&Assignment>,
        proof: Option<ProofTrace>,
    ) -> IterStatus {
        let index = self.records.len() + 1;
        let status = if model.is_some() {
            IterStatus::Sat
        } else {
            IterStatus::Unsat
        };
        let mut certificate = None;
        if let Some(a) = model {
            let a = a.truncated(formula.num_vars);
            if self.log_each() {
                certificate = Some(self.push_sat(index, bound, &a));
            } else if self.opts.certify {
                self.last_sat = Some((index, a));
            }
        } else if let Some(proof) = proof {
            certificate = Some(self.push_unsat(index, bound, proof));
        }
        self.records.push(IterationRecord {
            index,
            bound_kind: self.opts.algorithm.bound_kind(),
            bound,
            status,
            aux_base: self.layout.aux_base,
            core_soft_ids: Vec::new(),
            newly_relaxed: Vec::new(),
            certificate,
        });
        self.solved.push(formula);
        status
    }

    fn push_sat(&mut self, index: usize, bound: usize, a: &Assignment) -> String {
        let id = sat_certificate_id(index);
        self.certificates.push(CertificateEntry::Sat {
            id: id.clone(),
            iteration: index,
            bound,
            assignment: format_model(a),
        });
        id
    }

    fn push_unsat(&mut self, index: usize, bound: usize, proof: ProofTrace) -> String {
        let id = unsat_certificate_id(index);
        let file = iteration_proof_file(index);
        self.certificates.push(CertificateEntry::Unsat {
            id: id.clone(),
            iteration: index,
            bound,
            proof_file: file.clone(),
        });
        self.proofs.insert(file, proof);
        id
    }

    /// Solves the plain formula of an iteration, logging in all-mode.
    fn iteration(&mut self, bound: usize, rebuilt: Reconstructed) -> Result<Option<Assignment>, OptError> {
        let out = self.solve(&rebuilt.formula, &[], self.log_each())?;
        let model = out.model;
        self.record(bound, rebuilt.formula, model.as_ref(), out.proof);
        Ok(model)
    }

    /// Attaches last-mode certificates: the last satisfiable model and a
    /// refutation of the last unsatisfiable instance.
    fn finish_last_mode(&mut self) -> Result<(), OptError> {
        if !self.opts.certify || self.opts.cert_mode != CertMode::Last {
            return Ok(());
        }
        if let Some((index, a)) = self.last_sat.take() {
            let bound = self.records[index - 1].bound;
            let id = self.push_sat(index, bound, &a);
            self.records[index - 1].certificate = Some(id);
        }
        if let Some(rec) = self.records.iter().rev().find(|r| r.status == IterStatus::Unsat) {
            let index = rec.index;
            self.certify_unsat(index)?;
        }
        self.certificates.sort_by_key(CertificateEntry::iteration);
        Ok(())
    }

    /// Refutes the recorded plain formula of iteration `index`.
    fn certify_unsat(&mut self, index: usize) -> Result<(), OptError> {
        let f = &self.solved[index - 1];
        let out = self.solve(f, &[], true)?;
        let proof = match (out.is_sat(), out.proof) {
            (false, Some(p)) => p,
            _ => {
                return Err(OptError::Internal(format!(
                    "iteration {index} is satisfiable without assumptions"
                )))
            }
        };
        let bound = self.records[index - 1].bound;
        let id = self.push_unsat(index, bound, proof);
        self.records[index - 1].certificate = Some(id);
        Ok(())
    }

    fn relaxed_count(&self, a: &Assignment) -> usize {
        (0..self.inst.num_soft())
            .filter(|&i| a.value(Var::new(self.layout.relax_base + i as u32)) == Some(true))
            .count()
    }

    fn manifest(&self, result: RunOutcome, feasibility: FeasibilityRecord, minimality: Option<MinimalityRecord>) -> RunManifest {
        RunManifest {
            format_version: FORMAT_VERSION,
            instance_file: INSTANCE_FILE.to_string(),
            instance_sha256: String::new(),
            algorithm: self.opts.algorithm,
            cert_mode: self.opts.cert_mode,
            encoding: ENCODING_ID.to_string(),
            seed: self.opts.seed,
            search_rule: self.opts.algorithm.search_rule().to_string(),
            layout: self.layout.clone(),
            result,
            feasibility,
            iterations: self.records.clone(),
            certificates: self.certificates.clone(),
            minimality,
        }
    }
}

/// Solves the hard clauses alone. When they are infeasible the refutation
/// is stored as the hard-clause proof.
fn hard_feasibility(run: &mut Run) -> Result<FeasibilityRecord, OptError> {
    let hard = run.inst.hard_formula();
    let out = run.solve(&hard, &[], run.opts.certify)?;
    Ok(match out.model {
        Some(model) => FeasibilityRecord {
            status: IterStatus::Sat,
            assignment: Some(format_model(&model.truncated(run.inst.num_vars))),
            proof_file: None,
        },
        None => {
            let proof_file = out.proof.map(|p| {
                run.proofs.insert(HARD_PROOF_FILE.to_string(), p);
                HARD_PROOF_FILE.to_string()
            });
            FeasibilityRecord {
                status: IterStatus::Unsat,
                assignment: None,
                proof_file,
            }
        }
    })
}

fn linear_search_us(run: &mut Run) -> Result<usize, OptError> {
    let n_soft = run.inst.num_soft();
    for lambda in 0..=n_soft {
        let rebuilt = run.all_relaxed(lambda)?;
        if run.iteration(lambda, rebuilt)?.is_some() {
            return Ok(lambda);
        }
    }
    Err(OptError::Internal("vacuous bound is unsatisfiable".into()))
}

fn linear_search_su(run: &mut Run) -> Result<usize, OptError> {
    let mut bound = run.inst.num_soft();
    loop {
        let rebuilt = run.all_relaxed(bound)?;
        match run.iteration(bound, rebuilt)? {
            Some(a) => {
                let mu = run.relaxed_count(&a);
                if mu == 0 {
                    return Ok(0);
                }
                if mu > bound {
                    return Err(OptError::Internal("model exceeds its cardinality bound".into()));
                }
                bound = mu - 1;
            }
            None if bound == run.inst.num_soft() => {
                return Err(OptError::Internal("vacuous bound is unsatisfiable".into()))
            }
            None => return Ok(bound + 1),
        }
    }
}

fn binary_search(run: &mut Run) -> Result<usize, OptError> {
    let mut mu = run.inst.num_soft() as i64;
    let mut lambda: i64 = -1;
    while mu > lambda + 1 {
        let tau = (mu + lambda).div_euclid(2);
        let rebuilt = run.all_relaxed(tau as usize)?;
        match run.iteration(tau as usize, rebuilt)? {
            Some(a) => mu = run.relaxed_count(&a) as i64,
            None => lambda = tau,
        }
    }
    Ok(mu as usize)
}

fn msu3(run: &mut Run) -> Result<usize, OptError> {
    let inst = run.inst;
    let n_soft = inst.num_soft();
    let mut relax_var: Vec<Option<Var>> = vec![None; n_soft];
    let mut relax_lits: Vec<Lit> = Vec::new();
    let mut lambda = 0usize;
    loop {
        let plain = working_formula(inst, &relax_var, &relax_lits, lambda, run.layout.aux_base, false)?.formula;
        // selector s_j guards each unrelaxed soft clause: (omega_j or -s_j)
        let mut guarded = plain.clone();
        let mut selectors: Vec<(Lit, usize)> = Vec::new();
        for (j, rv) in relax_var.iter().enumerate() {
            if rv.is_some() {
                continue;
            }
            let s = Var::new(plain.num_vars + selectors.len() as u32 + 1);
            let pos = inst.hard.len() + j;
            guarded.clauses[pos] = guarded.clauses[pos].with_lit(s.neg());
            selectors.push((s.pos(), j + 1));
        }
        guarded.num_vars += selectors.len() as u32;
        let assumptions: Vec<Lit> = selectors.iter().map(|&(s, _)| s).collect();
        let out = run.solve(&guarded, &assumptions, false)?;

        if let Some(model) = out.model {
            run.record(lambda, plain, Some(&model), None);
            return Ok(lambda);
        }
        let core: Vec<usize> = match out.core {
            Some(core) => {
                let mut ids: Vec<usize> = selectors
                    .iter()
                    .filter(|(s, _)| core.contains(s))
                    .map(|&(_, id)| id)
                    .collect();
                ids.sort_unstable();
                ids
            }
            None => Vec::new(),
        };
        if core.is_empty() && lambda >= relax_lits.len() {
            return Err(OptError::Internal(format!(
                "hard-only core at bound {lambda} with {} relaxed clauses",
                relax_lits.len()
            )));
        }
        let proof = if run.log_each() {
            let out = run.solve(&plain, &[], true)?;
            if out.is_sat() {
                return Err(OptError::Internal("core instance satisfiable without selectors".into()));
            }
            out.proof
        } else {
            None
        };
        run.record(lambda, plain, None, proof);
        let rec = run.records.last_mut().expect("just recorded");
        rec.core_soft_ids = core.clone();
        rec.newly_relaxed = core.clone();
        for id in core {
            let r = Var::new(run.layout.relax_base + relax_lits.len() as u32);
            relax_var[id - 1] = Some(r);
            relax_lits.push(r.pos());
        }
        lambda += 1;
        if lambda > n_soft {
            return Err(OptError::Internal("bound exceeded the number of soft clauses".into()));
        }
    }
}

/// Refutation of every assignment with fewer than `optimum` falsified soft
/// clauses, over the canonical all-relaxed layout.
fn minimality_proof(run: &mut Run, optimum: usize) -> Result<Option<MinimalityRecord>, OptError> {
    if !run.opts.certify || run.opts.algorithm != Algorithm::Msu3 || optimum == 0 {
        return Ok(None);
    }
    let rebuilt = minimality_instance(run.inst, optimum)?;
    let out = run.solve(&rebuilt.formula, &[], true)?;
    match (out.is_sat(), out.proof) {
        (false, Some(proof)) => {
            run.proofs.insert(MINIMALITY_PROOF_FILE.to_string(), proof);
            Ok(Some(MinimalityRecord {
                optimum,
                proof_file: MINIMALITY_PROOF_FILE.to_string(),
            }))
        }
        _ => Err(OptError::Internal(format!(
            "an assignment with fewer than {optimum} falsified soft clauses exists"
        ))),
    }
}

/// Runs `opts.algorithm` on `inst`.
pub fn run(inst: &WcnfInstance, opts: &RunOptions) -> Result<RunResult, OptError> {
    let mut run = Run::new(inst, opts);
    let feasibility = hard_feasibility(&mut run)?;
    if feasibility.status == IterStatus::Unsat {
        let manifest = run.manifest(RunOutcome::Infeasible, feasibility, None);
        return Ok(RunResult {
            outcome: RunOutcome::Infeasible,
            manifest,
            proofs: run.proofs,
            solved: run.solved,
        });
    }
    let optimum = if inst.num_soft() == 0 {
        0
    } else {
        match opts.algorithm {
            Algorithm::Lsus => linear_search_us(&mut run)?,
            Algorithm::Lssu => linear_search_su(&mut run)?,
            Algorithm::Binary => binary_search(&mut run)?,
            Algorithm::Msu3 => msu3(&mut run)?,
        }
    };
    run.finish_last_mode()?;
    let minimality = minimality_proof(&mut run, optimum)?;
    let outcome = RunOutcome::Optimum { value: optimum };
    let manifest = run.manifest(outcome, feasibility, minimality);
    Ok(RunResult {
        outcome,
        manifest,
        proofs: run.proofs,
        solved: run.solved,
    })
}

pub fn linear_search_unsat_sat(inst: &WcnfInstance, opts: &RunOptions) -> Result<RunResult, OptError> {
    run(inst, &RunOptions { algorithm: Algorithm::Lsus, ..opts.clone() })
}

pub fn linear_search_sat_unsat(inst: &WcnfInstance, opts: &RunOptions) -> Result<RunResult, OptError> {
    run(inst, &RunOptions { algorithm: Algorithm::Lssu, ..opts.clone() })
}

pub fn binary(inst: &WcnfInstance, opts: &RunOptions) -> Result<RunResult, OptError> {
    run(inst, &RunOptions { algorithm: Algorithm::Binary, ..opts.clone() })
}

pub fn core_guided(inst: &WcnfInstance, opts: &RunOptions) -> Result<RunResult, OptError> {
    run(inst, &RunOptions { algorithm: Algorithm::Msu3, ..opts.clone() })
}

/// Runs and packages the result as a bundle for `instance_bytes`.
pub fn solve_to_bundle(instance_bytes: &[u8], opts: &RunOptions) -> Result<(RunResult, certs::Bundle), SolveBundleError> {
    let inst = crate::formula::parse_wcnf(instance_bytes).map_err(certs::BundleError::from)?;
    let result = run(&inst, opts)?;
    let bundle = certs::Bundle::assemble(result.manifest.clone(), &result.proofs, instance_bytes)?;
    Ok((result, bundle))
}

#[derive(Debug, Error)]
pub enum SolveBundleError {
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error(transparent)]
    Bundle(#[from] certs::BundleError),
}
