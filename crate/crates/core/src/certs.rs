//! Certificates, the run manifest, and the on-disk bundle shared by the
//! solver and the checker.
//!
//! A bundle directory holds:
//!
//! - `manifest.json`: the [`RunManifest`], UTF-8, keys in schema order;
//! - `instance.wcnf`: a byte copy of the solved instance (SHA-256 in the manifest);
//! - `proof_<iter>.drup`: DRUP refutations of unsatisfiable iterations;
//! - `proof_minimality.drup`: core-guided runs only, refutation of the
//!   all-relaxed instance under `sum(r) < optimum`;
//! - `proof_hard.drup`: infeasible runs only, refutation of the hard clauses.
//!
//! Iteration instances are not stored. [`reconstruct_instance`] rebuilds them
//! from the instance, the variable layout and the recorded bounds (plus the
//! relaxation history for `msu3`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cardenc::{self, encode_atmost, encode_strictly_less, EncodeError};
use crate::drup::ProofTrace;
use crate::formula::{parse_wcnf, Assignment, Clause, CnfFormula, Lit, ParseError, Var, WcnfInstance};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const INSTANCE_FILE: &str = "instance.wcnf";
pub const MINIMALITY_PROOF_FILE: &str = "proof_minimality.drup";
pub const HARD_PROOF_FILE: &str = "proof_hard.drup";

pub fn iteration_proof_file(index: usize) -> String {
    format!("proof_{index}.drup")
}

pub fn sat_certificate_id(index: usize) -> String {
    format!("sat_{index}")
}

pub fn unsat_certificate_id(index: usize) -> String {
    format!("unsat_{index}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Linear search, unsatisfiable towards satisfiable.
    Lsus,
    /// Linear search, satisfiable towards unsatisfiable.
    Lssu,
    Binary,
    /// Simplified core-guided MSU3.
    Msu3,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Lsus,
        Algorithm::Lssu,
        Algorithm::Binary,
        Algorithm::Msu3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lsus => "lsus",
            Algorithm::Lssu => "lssu",
            Algorithm::Binary => "binary",
            Algorithm::Msu3 => "msu3",
        }
    }

    /// Bound-update rule recorded in the manifest; the checker refuses
    /// manifests whose rule it does not recognise.
    pub fn search_rule(self) -> &'static str {
        match self {
            Algorithm::Lsus => "lambda = 0; UNSAT: lambda += 1; stop at first SAT",
            Algorithm::Lssu => {
                "bound = |soft|; SAT: mu = sum(r), bound = mu - 1 (stop if mu = 0); stop at first UNSAT"
            }
            Algorithm::Binary => {
                "mu = |soft|, lambda = -1; while mu > lambda + 1: tau = floor((mu + lambda) / 2); SAT: mu = sum(r); UNSAT: lambda = tau"
            }
            Algorithm::Msu3 => {
                "lambda = 0, R = {}; UNSAT: lambda += 1, relax core soft clauses lacking r; stop at first SAT"
            }
        }
    }

    pub fn bound_kind(self) -> BoundKind {
        match self {
            Algorithm::Lsus | Algorithm::Msu3 => BoundKind::Lambda,
            Algorithm::Lssu => BoundKind::Mu,
            Algorithm::Binary => BoundKind::Tau,
        }
    }

    /// True when every soft clause is relaxed up front.
    pub fn relaxes_all(self) -> bool {
        self != Algorithm::Msu3
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?} (expected lsus, lssu, binary or msu3)"))
    }
}

/// Which certificates a run retains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertMode {
    /// Every iteration's certificate.
    All,
    /// Only the last satisfiable and last unsatisfiable certificates.
    Last,
}

impl FromStr for CertMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(CertMode::All),
            "last" => Ok(CertMode::Last),
            _ => Err(format!("unknown certificate mode {s:?} (expected all or last)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Lambda,
    Mu,
    Tau,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IterStatus {
    #[serde(rename = "SATISFIABLE")]
    Sat,
    #[serde(rename = "UNSATISFIABLE")]
    Unsat,
}

/// Variable numbering shared by solver and checker: problem variables
/// `1..=problem_vars`, relaxation variables from `relax_base`, cardinality
/// auxiliaries from `aux_base`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableLayout {
    pub problem_vars: u32,
    pub num_soft: usize,
    pub relax_base: u32,
    pub aux_base: u32,
    /// `soft_id` (relaxation var `relax_base + id - 1`) or `first_relaxation`
    /// (k-th relaxed clause gets `relax_base + k - 1`).
    pub relax_order: String,
    /// Layout of the minimality instance: always `all_soft_by_id`.
    pub minimality_layout: String,
}

pub const RELAX_ORDER_SOFT_ID: &str = "soft_id";
pub const RELAX_ORDER_FIRST: &str = "first_relaxation";
pub const MINIMALITY_LAYOUT: &str = "all_soft_by_id";

impl VariableLayout {
    pub fn for_instance(inst: &WcnfInstance, algorithm: Algorithm) -> VariableLayout {
        let relax_base = inst.num_vars + 1;
        VariableLayout {
            problem_vars: inst.num_vars,
            num_soft: inst.num_soft(),
            relax_base,
            aux_base: relax_base + inst.num_soft() as u32,
            relax_order: if algorithm.relaxes_all() {
                RELAX_ORDER_SOFT_ID
            } else {
                RELAX_ORDER_FIRST
            }
            .to_string(),
            minimality_layout: MINIMALITY_LAYOUT.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based.
    pub index: usize,
    pub bound_kind: BoundKind,
    pub bound: usize,
    pub status: IterStatus,
    pub aux_base: u32,
    /// Soft clauses reported in the core (msu3 UNSAT iterations).
    #[serde(default)]
    pub core_soft_ids: Vec<usize>,
    /// Soft clauses that gained a relaxation variable after this iteration
    /// (msu3 only), in relaxation order.
    #[serde(default)]
    pub newly_relaxed: Vec<usize>,
    pub certificate: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CertificateEntry {
    Sat {
        id: String,
        iteration: usize,
        bound: usize,
        /// DIMACS model: one signed literal per variable.
        assignment: String,
    },
    Unsat {
        id: String,
        iteration: usize,
        bound: usize,
        proof_file: String,
    },
}

impl CertificateEntry {
    pub fn id(&self) -> &str {
        match self {
            CertificateEntry::Sat { id, .. } | CertificateEntry::Unsat { id, .. } => id,
        }
    }

    pub fn iteration(&self) -> usize {
        match self {
            CertificateEntry::Sat { iteration, .. } | CertificateEntry::Unsat { iteration, .. } => {
                *iteration
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityRecord {
    pub status: IterStatus,
    /// Model of the hard clauses over the problem variables.
    pub assignment: Option<String>,
    pub proof_file: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalityRecord {
    pub optimum: usize,
    pub proof_file: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "UPPERCASE")]
pub enum RunOutcome {
    Optimum { value: usize },
    Infeasible,
}

impl RunOutcome {
    pub fn optimum(self) -> Option<usize> {
        match self {
            RunOutcome::Optimum { value } => Some(value),
            RunOutcome::Infeasible => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub instance_file: String,
    /// Hex SHA-256 of the instance file bytes.
    pub instance_sha256: String,
    pub algorithm: Algorithm,
    pub cert_mode: CertMode,
    pub encoding: String,
    pub seed: u64,
    pub search_rule: String,
    pub layout: VariableLayout,
    pub result: RunOutcome,
    pub feasibility: FeasibilityRecord,
    pub iterations: Vec<IterationRecord>,
    pub certificates: Vec<CertificateEntry>,
    pub minimality: Option<MinimalityRecord>,
}

impl RunManifest {
    pub fn certificate(&self, id: &str) -> Option<&CertificateEntry> {
        self.certificates.iter().find(|c| c.id() == id)
    }

    pub fn iteration(&self, index: usize) -> Option<&IterationRecord> {
        index.checked_sub(1).and_then(|i| self.iterations.get(i))
    }

    pub fn last_with_status(&self, status: IterStatus) -> Option<&IterationRecord> {
        self.iterations.iter().rev().find(|r| r.status == status)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatCertificate {
    pub iteration: usize,
    pub bound: usize,
    pub assignment: Assignment,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnsatCertificate {
    pub iteration: usize,
    pub bound: usize,
    pub proof_file: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalityCertificate {
    pub optimum: usize,
    pub proof_file: String,
}

pub fn parse_model(text: &str) -> Option<Assignment> {
    let lits: Vec<i32> = text
        .split_whitespace()
        .map(|t| t.parse().ok())
        .collect::<Option<_>>()?;
    Assignment::from_dimacs(&lits)
}

pub fn format_model(a: &Assignment) -> String {
    a.to_dimacs()
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("refusing to overwrite non-empty directory {0}")]
    NotEmpty(String),
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format_version {0}")]
    Version(u32),
    #[error("instance digest mismatch: manifest {expected}, file {actual}")]
    DigestMismatch { expected: String, actual: String },
    #[error("dangling certificate reference {0}")]
    Dangling(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("instance: {0}")]
    Instance(#[from] ParseError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> BundleError + '_ {
    move |source| BundleError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// An in-memory bundle: the instance, its bytes, the manifest and the text
/// of every referenced proof file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bundle {
    pub instance: WcnfInstance,
    pub instance_bytes: Vec<u8>,
    pub manifest: RunManifest,
    pub proofs: BTreeMap<String, String>,
}

impl Bundle {
    /// Builds a bundle from a solver manifest, its proofs and the raw
    /// instance bytes; fills in the digest.
    pub fn assemble(
        mut manifest: RunManifest,
        proofs: &BTreeMap<String, ProofTrace>,
        instance_bytes: &[u8],
    ) -> Result<Bundle, BundleError> {
        manifest.instance_file = INSTANCE_FILE.to_string();
        manifest.instance_sha256 = sha256_hex(instance_bytes);
        let bundle = Bundle {
            instance: parse_wcnf(instance_bytes)?,
            instance_bytes: instance_bytes.to_vec(),
            manifest,
            proofs: proofs
                .iter()
                .map(|(name, p)| (name.clone(), p.to_drup_string()))
                .collect(),
        };
        bundle.validate()?;
        Ok(bundle)
    }

    /// Structural validation: schema, digest, reference resolution. No
    /// semantic checking.
    pub fn validate(&self) -> Result<(), BundleError> {
        let m = &self.manifest;
        if m.format_version != FORMAT_VERSION {
            return Err(BundleError::Version(m.format_version));
        }
        let actual = sha256_hex(&self.instance_bytes);
        if actual != m.instance_sha256 {
            return Err(BundleError::DigestMismatch {
                expected: m.instance_sha256.clone(),
                actual,
            });
        }
        let schema = |msg: String| Err(BundleError::Schema(msg));
        if m.encoding != cardenc::ENCODING_ID {
            return schema(format!("unknown encoding {:?}", m.encoding));
        }
        if m.search_rule != m.algorithm.search_rule() {
            return schema(format!("search rule does not match algorithm {}", m.algorithm));
        }
        if m.layout != VariableLayout::for_instance(&self.instance, m.algorithm) {
            return schema("variable layout does not match the instance".into());
        }

        let mut ids = BTreeSet::new();
        for cert in &m.certificates {
            if !ids.insert(cert.id().to_string()) {
                return schema(format!("duplicate certificate id {}", cert.id()));
            }
            match cert {
                CertificateEntry::Sat { assignment, .. } => {
                    if parse_model(assignment).is_none() {
                        return schema(format!("certificate {}: malformed assignment", cert.id()));
                    }
                }
                CertificateEntry::Unsat { proof_file, .. } => self.require_proof(proof_file)?,
            }
        }
        for (i, rec) in m.iterations.iter().enumerate() {
            if rec.index != i + 1 {
                return schema(format!("iteration {} recorded at position {}", rec.index, i + 1));
            }
            let Some(id) = &rec.certificate else { continue };
            let cert = m
                .certificate(id)
                .ok_or_else(|| BundleError::Dangling(id.clone()))?;
            let kind_ok = matches!(
                (cert, rec.status),
                (CertificateEntry::Sat { .. }, IterStatus::Sat)
                    | (CertificateEntry::Unsat { .. }, IterStatus::Unsat)
            );
            if !kind_ok || cert.iteration() != rec.index {
                return schema(format!("certificate {id} does not belong to iteration {}", rec.index));
            }
        }
        for cert in &m.certificates {
            let owner = m.iteration(cert.iteration());
            if owner.and_then(|r| r.certificate.as_deref()) != Some(cert.id()) {
                return schema(format!("certificate {} is not referenced by its iteration", cert.id()));
            }
        }

        let feas = &m.feasibility;
        match feas.status {
            IterStatus::Sat => {
                if let Some(model) = &feas.assignment {
                    if parse_model(model).is_none() {
                        return schema("feasibility assignment malformed".into());
                    }
                }
            }
            IterStatus::Unsat => {
                if m.result != RunOutcome::Infeasible {
                    return schema("infeasible hard clauses but an optimum is reported".into());
                }
                if let Some(file) = &feas.proof_file {
                    self.require_proof(file)?;
                }
            }
        }
        if m.result == RunOutcome::Infeasible && feas.status != IterStatus::Unsat {
            return schema("INFEASIBLE reported for feasible hard clauses".into());
        }
        if let Some(min) = &m.minimality {
            self.require_proof(&min.proof_file)?;
        }
        Ok(())
    }

    fn require_proof(&self, name: &str) -> Result<(), BundleError> {
        if !is_plain_file_name(name) {
            return Err(BundleError::Schema(format!("proof file name {name:?} is not a plain file name")));
        }
        match self.proofs.get(name) {
            None => Err(BundleError::Dangling(name.to_string())),
            Some(text) if text.is_empty() => {
                Err(BundleError::Schema(format!("proof file {name} is empty")))
            }
            Some(_) => Ok(()),
        }
    }

    pub fn sat_certificate(&self, iteration: usize) -> Option<SatCertificate> {
        let id = self.manifest.iteration(iteration)?.certificate.as_ref()?;
        match self.manifest.certificate(id)? {
            CertificateEntry::Sat {
                iteration,
                bound,
                assignment,
                ..
            } => Some(SatCertificate {
                iteration: *iteration,
                bound: *bound,
                assignment: parse_model(assignment)?,
            }),
            CertificateEntry::Unsat { .. } => None,
        }
    }

    pub fn unsat_certificate(&self, iteration: usize) -> Option<UnsatCertificate> {
        let id = self.manifest.iteration(iteration)?.certificate.as_ref()?;
        match self.manifest.certificate(id)? {
            CertificateEntry::Unsat {
                iteration,
                bound,
                proof_file,
                ..
            } => Some(UnsatCertificate {
                iteration: *iteration,
                bound: *bound,
                proof_file: proof_file.clone(),
            }),
            CertificateEntry::Sat { .. } => None,
        }
    }

    pub fn minimality_certificate(&self) -> Option<MinimalityCertificate> {
        self.manifest.minimality.as_ref().map(|m| MinimalityCertificate {
            optimum: m.optimum,
            proof_file: m.proof_file.clone(),
        })
    }

    pub fn proof_text(&self, file: &str) -> Option<&str> {
        self.proofs.get(file).map(String::as_str)
    }

    /// Number of certificates of each kind: (sat, unsat).
    pub fn certificate_counts(&self) -> (usize, usize) {
        let sat = self
            .manifest
            .certificates
            .iter()
            .filter(|c| matches!(c, CertificateEntry::Sat { .. }))
            .count();
        (sat, self.manifest.certificates.len() - sat)
    }
}

fn is_plain_file_name(name: &str) -> bool {
    !name.is_empty()
        && !name.contains('/')
        && !name.contains('\\')
        && name != "."
        && name != ".."
}

/// Writes `bundle` into `dir`, creating it if needed. A non-empty directory
/// is only overwritten with `force`, in which case earlier bundle files are
/// removed first.
pub fn write_bundle(bundle: &Bundle, dir: &Path, force: bool) -> Result<(), BundleError> {
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(io_err(dir))?;
        if entries.next().is_some() {
            if !force {
                return Err(BundleError::NotEmpty(dir.display().to_string()));
            }
            for entry in fs::read_dir(dir).map_err(io_err(dir))? {
                let path = entry.map_err(io_err(dir))?.path();
                let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
                let ours = name == MANIFEST_FILE
                    || name == INSTANCE_FILE
                    || (name.starts_with("proof_") && name.ends_with(".drup"));
                if ours && path.is_file() {
                    fs::remove_file(&path).map_err(io_err(&path))?;
                }
            }
        }
    } else {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let write = |name: &str, bytes: &[u8]| -> Result<(), BundleError> {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))
    };
    write(INSTANCE_FILE, &bundle.instance_bytes)?;
    for (name, text) in &bundle.proofs {
        write(name, text.as_bytes())?;
    }
    write(MANIFEST_FILE, bundle.manifest.to_json().as_bytes())
}

/// Reads and structurally validates a bundle directory.
pub fn read_bundle(dir: &Path) -> Result<Bundle, BundleError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
    let manifest: RunManifest = serde_json::from_str(&text)?;
    if !is_plain_file_name(&manifest.instance_file) {
        return Err(BundleError::Schema("instance_file is not a plain file name".into()));
    }
    let instance_path = dir.join(&manifest.instance_file);
    let instance_bytes = fs::read(&instance_path).map_err(io_err(&instance_path))?;
    let actual = sha256_hex(&instance_bytes);
    if actual != manifest.instance_sha256 {
        return Err(BundleError::DigestMismatch {
            expected: manifest.instance_sha256.clone(),
            actual,
        });
    }
    let instance = parse_wcnf(&instance_bytes)?;

    let mut referenced: Vec<&str> = manifest
        .certificates
        .iter()
        .filter_map(|c| match c {
            CertificateEntry::Unsat { proof_file, .. } => Some(proof_file.as_str()),
            CertificateEntry::Sat { .. } => None,
        })
        .collect();
    referenced.extend(manifest.feasibility.proof_file.as_deref());
    referenced.extend(manifest.minimality.as_ref().map(|m| m.proof_file.as_str()));
    let mut proofs = BTreeMap::new();
    for name in referenced {
        if !is_plain_file_name(name) {
            return Err(BundleError::Schema(format!("proof file name {name:?} is not a plain file name")));
        }
        let path = dir.join(name);
        if !path.is_file() {
            return Err(BundleError::Dangling(name.to_string()));
        }
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        proofs.insert(name.to_string(), text);
    }
    let bundle = Bundle {
        instance,
        instance_bytes,
        manifest,
        proofs,
    };
    bundle.validate()?;
    Ok(bundle)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReconstructError {
    #[error("iteration {0} is out of range")]
    IterationOutOfRange(usize),
    #[error("relaxed soft id {0} is out of range")]
    SoftIdOutOfRange(usize),
    #[error("soft clause {0} relaxed twice")]
    RelaxedTwice(usize),
    #[error("layout inconsistent with instance: {0}")]
    Layout(String),
    #[error("cardinality encoding: {0}")]
    Encode(#[from] EncodeError),
}

/// A rebuilt iteration instance together with its relaxation literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reconstructed {
    pub formula: CnfFormula,
    /// Relaxation literals in the order given to the cardinality encoding.
    pub relax_lits: Vec<Lit>,
}

/// Working formula: hard clauses, then soft clauses in id order (relaxed
/// where `relax_var` has an entry), then `sum(relax_lits) <= bound`.
pub fn working_formula(
    inst: &WcnfInstance,
    relax_var: &[Option<Var>],
    relax_lits: &[Lit],
    bound: usize,
    aux_base: u32,
    strict: bool,
) -> Result<Reconstructed, ReconstructError> {
    let mut clauses: Vec<Clause> = inst.hard.clone();
    for (i, clause) in inst.soft.iter().enumerate() {
        clauses.push(match relax_var[i] {
            Some(r) => clause.with_lit(r.pos()),
            None => clause.clone(),
        });
    }
    let enc = if strict {
        encode_strictly_less(relax_lits, bound, Var::new(aux_base))?
    } else {
        encode_atmost(relax_lits, bound, Var::new(aux_base))?
    };
    let num_vars = (aux_base - 1).max(enc.max_var());
    clauses.extend(enc.clauses);
    Ok(Reconstructed {
        formula: CnfFormula::new(num_vars, clauses),
        relax_lits: relax_lits.to_vec(),
    })
}

fn check_layout(inst: &WcnfInstance, layout: &VariableLayout) -> Result<(), ReconstructError> {
    let expected_relax = inst.num_vars + 1;
    if layout.problem_vars != inst.num_vars
        || layout.num_soft != inst.num_soft()
        || layout.relax_base != expected_relax
        || layout.aux_base < expected_relax + inst.num_soft() as u32
    {
        return Err(ReconstructError::Layout(format!(
            "expected {} problem vars, {} soft clauses, relaxation from {}",
            inst.num_vars,
            inst.num_soft(),
            expected_relax
        )));
    }
    Ok(())
}

/// Relaxation state in force at `iteration`: per-soft relaxation variable and
/// the relaxation literals in encoding order.
pub fn relaxation_at(
    inst: &WcnfInstance,
    manifest: &RunManifest,
    iteration: usize,
) -> Result<(Vec<Option<Var>>, Vec<Lit>), ReconstructError> {
    let layout = &manifest.layout;
    check_layout(inst, layout)?;
    let n_soft = inst.num_soft();
    if manifest.algorithm.relaxes_all() {
        let vars: Vec<Option<Var>> = (0..n_soft)
            .map(|i| Some(Var::new(layout.relax_base + i as u32)))
            .collect();
        let lits = vars.iter().map(|v| v.unwrap().pos()).collect();
        return Ok((vars, lits));
    }
    let mut vars = vec![None; n_soft];
    let mut lits = Vec::new();
    for rec in &manifest.iterations[..iteration - 1] {
        for &soft_id in &rec.newly_relaxed {
            if soft_id == 0 || soft_id > n_soft {
                return Err(ReconstructError::SoftIdOutOfRange(soft_id));
            }
            if vars[soft_id - 1].is_some() {
                return Err(ReconstructError::RelaxedTwice(soft_id));
            }
            let r = Var::new(layout.relax_base + lits.len() as u32);
            vars[soft_id - 1] = Some(r);
            lits.push(r.pos());
        }
    }
    Ok((vars, lits))
}

/// Rebuilds the CNF the solver tested at `iteration` (1-based).
pub fn reconstruct_instance(
    inst: &WcnfInstance,
    manifest: &RunManifest,
    iteration: usize,
) -> Result<Reconstructed, ReconstructError> {
    let rec = manifest
        .iteration(iteration)
        .ok_or(ReconstructError::IterationOutOfRange(iteration))?;
    let (vars, lits) = relaxation_at(inst, manifest, iteration)?;
    if rec.aux_base < manifest.layout.aux_base {
        return Err(ReconstructError::Layout(format!(
            "iteration {iteration}: aux base {} overlaps relaxation variables",
            rec.aux_base
        )));
    }
    working_formula(inst, &vars, &lits, rec.bound, rec.aux_base, false)
}

/// The minimality instance: every soft clause relaxed in id order and
/// `sum(r) < optimum`.
pub fn minimality_instance(inst: &WcnfInstance, optimum: usize) -> Result<Reconstructed, ReconstructError> {
    let relax_base = inst.num_vars + 1;
    let vars: Vec<Option<Var>> = (0..inst.num_soft())
        .map(|i| Some(Var::new(relax_base + i as u32)))
        .collect();
    let lits: Vec<Lit> = vars.iter().map(|v| v.unwrap().pos()).collect();
    let aux_base = relax_base + inst.num_soft() as u32;
    working_formula(inst, &vars, &lits, optimum, aux_base, true)
}
