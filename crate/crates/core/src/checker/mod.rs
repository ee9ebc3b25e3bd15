//! Independent verification of run bundles.
//!
//! Method 1 replays the whole search: every iteration's bound must follow
//! from the previous outcomes and every iteration's certificate must check.
//! Method 2 checks only the certificates that pin the optimum: the last
//! satisfiable iteration (upper bound), the last unsatisfiable iteration at
//! `optimum - 1` (lower bound), and for `msu3` the minimality refutation.
//!
//! The checker never calls the SAT engine: unsatisfiability claims are only
//! accepted through DRUP refutations checked by [`rup`].

pub mod rup;

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::certs::{
    self, minimality_instance, reconstruct_instance, Algorithm, Bundle, IterStatus,
    IterationRecord, Reconstructed, RunOutcome, SatCertificate,
};
use crate::drup::{parse_proof, step_lines};
use crate::formula::{count_falsified_soft, evaluate_clause, Assignment, CnfFormula, FormulaError, Lit};
use rup::{check_refutation, RupError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum VerdictStatus {
    Valid,
    Invalid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Reason {
    SatCertFalsifiesClause,
    SatCertBoundMismatch,
    RupStepFailed,
    ProofIncomplete,
    ProofDeletesUnknownClause,
    MinimalityRefuted,
    StructureError,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = serde_json::to_value(self).expect("reason serializes");
        f.write_str(text.as_str().unwrap_or_default())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// 1-based clause index in the checked instance.
    ClauseIndex(usize),
    /// 1-based line in the proof file.
    ProofLine(usize),
    /// DIMACS model of the offending assignment.
    Assignment(Vec<i32>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<Reason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iteration: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub certificates_checked: usize,
}

impl Verdict {
    pub fn valid(certificates_checked: usize) -> Verdict {
        Verdict {
            status: VerdictStatus::Valid,
            reason: None,
            witness: None,
            iteration: None,
            file: None,
            message: None,
            certificates_checked,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.status == VerdictStatus::Valid
    }

    /// 0 for VALID, 2 for structural problems, 1 for other rejections.
    pub fn exit_code(&self) -> i32 {
        match (self.status, self.reason) {
            (VerdictStatus::Valid, _) => 0,
            (_, Some(Reason::StructureError)) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdict serializes")
    }
}

/// A rejection on its way to becoming a [`Verdict`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub reason: Reason,
    pub witness: Option<Witness>,
    pub iteration: Option<usize>,
    pub file: Option<String>,
    pub message: String,
}

impl Failure {
    fn new(reason: Reason, message: impl Into<String>) -> Failure {
        Failure {
            reason,
            witness: None,
            iteration: None,
            file: None,
            message: message.into(),
        }
    }

    fn structure(message: impl Into<String>) -> Failure {
        Failure::new(Reason::StructureError, message)
    }

    fn witness(mut self, w: Witness) -> Failure {
        self.witness = Some(w);
        self
    }

    fn at(mut self, iteration: usize) -> Failure {
        self.iteration.get_or_insert(iteration);
        self
    }

    fn in_file(mut self, file: &str) -> Failure {
        self.file.get_or_insert_with(|| file.to_string());
        self
    }

    fn into_verdict(self, certificates_checked: usize) -> Verdict {
        Verdict {
            status: VerdictStatus::Invalid,
            reason: Some(self.reason),
            witness: self.witness,
            iteration: self.iteration,
            file: self.file,
            message: Some(self.message),
            certificates_checked,
        }
    }
}

fn to_verdict(result: Result<usize, Failure>, checked: usize) -> Verdict {
    match result {
        Ok(n) => Verdict::valid(n),
        Err(f) => f.into_verdict(checked),
    }
}

/// Checks that `a` satisfies every clause of `f` and sets at most `bound` of
/// `relax_lits` true.
pub fn sat_check(f: &CnfFormula, relax_lits: &[Lit], bound: usize, a: &Assignment) -> Result<(), Failure> {
    if a.num_vars() < f.num_vars {
        return Err(Failure::structure(format!(
            "assignment covers {} variables, instance has {}",
            a.num_vars(),
            f.num_vars
        )));
    }
    for (i, clause) in f.clauses.iter().enumerate() {
        if !evaluate_clause(clause, a).unwrap_or(false) {
            return Err(Failure::new(
                Reason::SatCertFalsifiesClause,
                format!("assignment falsifies clause {}: {clause}", i + 1),
            )
            .witness(Witness::ClauseIndex(i + 1)));
        }
    }
    let relaxed = relax_lits
        .iter()
        .filter(|&&l| a.lit_value(l) == Some(true))
        .count();
    if relaxed > bound {
        return Err(Failure::new(
            Reason::SatCertBoundMismatch,
            format!("{relaxed} relaxation variables true, bound is {bound}"),
        )
        .witness(Witness::Assignment(a.to_dimacs())));
    }
    Ok(())
}

pub fn check_sat_certificate(f: &CnfFormula, relax_lits: &[Lit], cert: &SatCertificate) -> Verdict {
    let result = sat_check(f, relax_lits, cert.bound, &cert.assignment).map_err(|e| e.at(cert.iteration));
    to_verdict(result.map(|_| 1), 0)
}

/// Checks a DRUP refutation of `f` given as text.
pub fn unsat_check(f: &CnfFormula, proof_text: &str) -> Result<(), Failure> {
    let proof = parse_proof(proof_text).map_err(|e| {
        Failure::structure(e.to_string()).witness(Witness::ProofLine(e.line))
    })?;
    let line_of = |step: usize| step_lines(proof_text).get(step - 1).copied().unwrap_or(step);
    check_refutation(f, &proof).map_err(|e| match e {
        RupError::StepFailed { step } => Failure::new(
            Reason::RupStepFailed,
            format!("proof step {step} is not a RUP consequence"),
        )
        .witness(Witness::ProofLine(line_of(step))),
        RupError::UnknownDeletion { step } => Failure::new(
            Reason::ProofDeletesUnknownClause,
            format!("proof step {step} deletes a clause not in the database"),
        )
        .witness(Witness::ProofLine(line_of(step))),
        RupError::Incomplete => {
            Failure::new(Reason::ProofIncomplete, "proof does not end with the empty clause")
        }
    })
}

pub fn check_unsat_certificate(f: &CnfFormula, proof_text: &str) -> Verdict {
    to_verdict(unsat_check(f, proof_text).map(|_| 1), 0)
}

/// Falsified soft clauses of `a` over the problem variables must equal the
/// reported optimum.
fn optimum_check(bundle: &Bundle, a: &Assignment, optimum: usize) -> Result<(), Failure> {
    let inst = &bundle.instance;
    if a.num_vars() < inst.num_vars {
        return Err(Failure::structure("assignment does not cover the problem variables"));
    }
    match count_falsified_soft(inst, &a.truncated(inst.num_vars)) {
        Ok(cost) if cost == optimum => Ok(()),
        Ok(cost) => Err(Failure::new(
            Reason::SatCertBoundMismatch,
            format!("assignment falsifies {cost} soft clauses, reported optimum is {optimum}"),
        )
        .witness(Witness::Assignment(a.to_dimacs()))),
        Err(FormulaError::HardViolated { index }) => Err(Failure::new(
            Reason::SatCertFalsifiesClause,
            format!("assignment falsifies hard clause {index}"),
        )
        .witness(Witness::ClauseIndex(index))),
        Err(e) => Err(Failure::structure(e.to_string())),
    }
}

struct Ctx<'a> {
    bundle: &'a Bundle,
    checked: usize,
}

impl<'a> Ctx<'a> {
    fn rebuild(&self, iteration: usize) -> Result<Reconstructed, Failure> {
        reconstruct_instance(&self.bundle.instance, &self.bundle.manifest, iteration)
            .map_err(|e| Failure::structure(e.to_string()).at(iteration))
    }

    fn proof(&self, file: &str) -> Result<&'a str, Failure> {
        self.bundle
            .proof_text(file)
            .ok_or_else(|| Failure::structure(format!("missing proof file {file}")))
    }

    fn sat_iteration(&mut self, rec: &IterationRecord, bound: usize) -> Result<(Assignment, Reconstructed), Failure> {
        let cert = self
            .bundle
            .sat_certificate(rec.index)
            .ok_or_else(|| Failure::structure("missing satisfiable certificate").at(rec.index))?;
        let rebuilt = self.rebuild(rec.index)?;
        self.checked += 1;
        sat_check(&rebuilt.formula, &rebuilt.relax_lits, bound, &cert.assignment)
            .map_err(|e| e.at(rec.index))?;
        Ok((cert.assignment, rebuilt))
    }

    fn unsat_iteration(&mut self, rec: &IterationRecord) -> Result<(), Failure> {
        let cert = self
            .bundle
            .unsat_certificate(rec.index)
            .ok_or_else(|| Failure::structure("missing unsatisfiable certificate").at(rec.index))?;
        let rebuilt = self.rebuild(rec.index)?;
        let text = self.proof(&cert.proof_file).map_err(|e| e.at(rec.index))?;
        self.checked += 1;
        unsat_check(&rebuilt.formula, text).map_err(|e| e.at(rec.index).in_file(&cert.proof_file))
    }

    fn feasibility(&mut self, optimum: usize) -> Result<(), Failure> {
        let feas = &self.bundle.manifest.feasibility;
        let model = feas
            .assignment
            .as_deref()
            .and_then(certs::parse_model)
            .ok_or_else(|| Failure::structure("missing feasibility assignment"))?;
        self.checked += 1;
        optimum_check(self.bundle, &model, optimum)
    }

    fn infeasible(&mut self) -> Result<(), Failure> {
        let m = &self.bundle.manifest;
        if !m.iterations.is_empty() {
            return Err(Failure::structure("iterations recorded for an infeasible instance"));
        }
        let file = m
            .feasibility
            .proof_file
            .as_deref()
            .ok_or_else(|| Failure::structure("missing refutation of the hard clauses"))?;
        let text = self.proof(file)?;
        self.checked += 1;
        unsat_check(&self.bundle.instance.hard_formula(), text).map_err(|e| e.in_file(file))
    }

    fn minimality(&mut self, optimum: usize) -> Result<(), Failure> {
        let m = &self.bundle.manifest;
        if m.algorithm != Algorithm::Msu3 || optimum == 0 {
            return Ok(());
        }
        let rec = m
            .minimality
            .as_ref()
            .ok_or_else(|| Failure::structure("missing minimality certificate"))?;
        if rec.optimum != optimum {
            return Err(Failure::structure(format!(
                "minimality certificate is for optimum {}, reported {optimum}",
                rec.optimum
            )));
        }
        let text = self.proof(&rec.proof_file)?;
        let rebuilt = minimality_instance(&self.bundle.instance, optimum)
            .map_err(|e| Failure::structure(e.to_string()))?;
        self.checked += 1;
        unsat_check(&rebuilt.formula, text).map_err(|e| Failure {
            reason: Reason::MinimalityRefuted,
            message: format!("minimality proof rejected: {}", e.message),
            ..e.in_file(&rec.proof_file)
        })
    }
}

fn relaxed_count(a: &Assignment, relax_lits: &[Lit]) -> usize {
    relax_lits
        .iter()
        .filter(|&&l| a.lit_value(l) == Some(true))
        .count()
}

/// Search state replayed by method 1.
enum Search {
    Linear { lambda: usize },
    SatUnsat { next: usize },
    Binary { mu: usize, lambda: i64 },
}

fn method1(bundle: &Bundle, ctx: &mut Ctx) -> Result<usize, Failure> {
    bundle
        .validate()
        .map_err(|e| Failure::structure(e.to_string()))?;
    let m = &bundle.manifest;
    let optimum = match m.result {
        RunOutcome::Infeasible => {
            ctx.infeasible()?;
            return Ok(ctx.checked);
        }
        RunOutcome::Optimum { value } => value,
    };
    let alg = m.algorithm;
    let n_soft = bundle.instance.num_soft();
    let mut search = match alg {
        Algorithm::Lsus | Algorithm::Msu3 => Search::Linear { lambda: 0 },
        Algorithm::Lssu => Search::SatUnsat { next: n_soft },
        Algorithm::Binary => Search::Binary {
            mu: n_soft,
            lambda: -1,
        },
    };
    let mut result = match search {
        Search::Binary { mu, lambda } if mu as i64 <= lambda + 1 => Some(mu),
        _ if n_soft == 0 => Some(0),
        _ => None,
    };
    let last_sat = m.last_with_status(IterStatus::Sat).map(|r| r.index);

    for rec in &m.iterations {
        let i = rec.index;
        if result.is_some() {
            return Err(Failure::structure("iteration recorded after the search terminated").at(i));
        }
        if rec.bound_kind != alg.bound_kind() {
            return Err(Failure::structure("bound kind does not match the algorithm").at(i));
        }
        if alg != Algorithm::Msu3 || rec.status == IterStatus::Sat {
            if !rec.newly_relaxed.is_empty() {
                return Err(Failure::structure("unexpected relaxation record").at(i));
            }
        }
        let expected = match search {
            Search::Linear { lambda } => lambda,
            Search::SatUnsat { next } => next,
            Search::Binary { mu, lambda } => (mu as i64 + lambda).div_euclid(2) as usize,
        };
        if rec.bound != expected {
            return Err(Failure::structure(format!(
                "bound {} does not follow from earlier iterations (expected {expected})",
                rec.bound
            ))
            .at(i));
        }
        if rec.certificate.is_none() {
            return Err(Failure::structure("iteration has no certificate").at(i));
        }
        match rec.status {
            IterStatus::Sat => {
                let (a, rebuilt) = ctx.sat_iteration(rec, rec.bound)?;
                if Some(i) == last_sat {
                    optimum_check(bundle, &a, optimum).map_err(|e| e.at(i))?;
                }
                let count = relaxed_count(&a, &rebuilt.relax_lits);
                match &mut search {
                    Search::Linear { lambda } => result = Some(*lambda),
                    Search::SatUnsat { next } => {
                        if count == 0 {
                            result = Some(0);
                        } else {
                            *next = count - 1;
                        }
                    }
                    Search::Binary { mu, .. } => *mu = count,
                }
            }
            IterStatus::Unsat => {
                ctx.unsat_iteration(rec)?;
                match &mut search {
                    Search::Linear { lambda } => *lambda += 1,
                    Search::SatUnsat { next } => result = Some(*next + 1),
                    Search::Binary { lambda, .. } => *lambda = rec.bound as i64,
                }
            }
        }
        if let Search::Binary { mu, lambda } = search {
            if mu as i64 <= lambda + 1 {
                result = Some(mu);
            }
        }
    }

    let result = result.ok_or_else(|| Failure::structure("search did not terminate"))?;
    if last_sat.is_none() {
        ctx.feasibility(optimum)?;
    }
    if result != optimum {
        return Err(Failure::new(
            Reason::SatCertBoundMismatch,
            format!("iterations establish optimum {result}, manifest reports {optimum}"),
        ));
    }
    ctx.minimality(optimum)?;
    Ok(ctx.checked)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Method2Options {
    /// Check the minimality certificate of core-guided runs. Disabling this
    /// is only meant for demonstrating what the certificate guards against.
    pub minimality: bool,
}

impl Default for Method2Options {
    fn default() -> Self {
        Method2Options { minimality: true }
    }
}

fn method2(bundle: &Bundle, ctx: &mut Ctx, opts: Method2Options) -> Result<usize, Failure> {
    bundle
        .validate()
        .map_err(|e| Failure::structure(e.to_string()))?;
    let m = &bundle.manifest;
    let optimum = match m.result {
        RunOutcome::Infeasible => {
            ctx.infeasible()?;
            return Ok(ctx.checked);
        }
        RunOutcome::Optimum { value } => value,
    };
    let n_soft = bundle.instance.num_soft();
    match m.last_with_status(IterStatus::Sat) {
        Some(rec) => {
            let (a, _) = ctx.sat_iteration(rec, optimum)?;
            optimum_check(bundle, &a, optimum).map_err(|e| e.at(rec.index))?;
        }
        None if m.algorithm == Algorithm::Binary || n_soft == 0 => ctx.feasibility(optimum)?,
        None => return Err(Failure::structure("no satisfiable iteration recorded")),
    }
    if optimum > 0 {
        let rec = m
            .last_with_status(IterStatus::Unsat)
            .ok_or_else(|| Failure::structure("no unsatisfiable iteration recorded"))?;
        if rec.bound + 1 != optimum {
            return Err(Failure::structure(format!(
                "last unsatisfiable bound {} is not optimum - 1",
                rec.bound
            ))
            .at(rec.index));
        }
        ctx.unsat_iteration(rec)?;
    }
    if opts.minimality {
        ctx.minimality(optimum)?;
    }
    Ok(ctx.checked)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Every iteration.
    All,
    /// Last satisfiable and last unsatisfiable iterations only.
    Last,
}

pub fn check_method1(bundle: &Bundle) -> Verdict {
    let mut ctx = Ctx { bundle, checked: 0 };
    let result = method1(bundle, &mut ctx);
    to_verdict(result, ctx.checked)
}

pub fn check_method2(bundle: &Bundle) -> Verdict {
    check_method2_with(bundle, Method2Options::default())
}

pub fn check_method2_with(bundle: &Bundle, opts: Method2Options) -> Verdict {
    let mut ctx = Ctx { bundle, checked: 0 };
    let result = method2(bundle, &mut ctx, opts);
    to_verdict(result, ctx.checked)
}

pub fn check_minimality(bundle: &Bundle) -> Verdict {
    let mut ctx = Ctx { bundle, checked: 0 };
    let result = match bundle.manifest.result.optimum() {
        Some(opt) => ctx.minimality(opt).map(|_| ctx.checked),
        None => Ok(0),
    };
    to_verdict(result, ctx.checked)
}

pub fn check(bundle: &Bundle, method: Method) -> Verdict {
    match method {
        Method::All => check_method1(bundle),
        Method::Last => check_method2(bundle),
    }
}

/// Reads the bundle in `dir` and checks it; unreadable bundles are
/// structural failures.
pub fn check_dir(dir: &Path, method: Method) -> Verdict {
    match certs::read_bundle(dir) {
        Ok(bundle) => check(&bundle, method),
        Err(e) => Failure::structure(e.to_string()).into_verdict(0),
    }
}
