//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use maxcert::cardenc::encode_atmost;
use maxcert::certs::{
    format_model, minimality_instance, read_bundle, reconstruct_instance,
    Algorithm, Bundle, CertMode, CertificateEntry, IterStatus, RunOutcome,
};
use maxcert::checker::{
    check_method1, check_method2, check_method2_with, check_unsat_certificate, Method2Options,
    Reason, Verdict,
};
use maxcert::formula::{evaluate_clause, Clause, Lit, Var, WcnfInstance};
use maxcert::optalgs::{run, RunOptions, RunResult};
use maxcert_cli::bench::bench;
use maxcert_cli::gen::{generate, render, GenParams};
use maxcert_cli::oracle::brute_force_optimum;

const EXAMPLE1: &str = "p wcnf 5 10 6
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

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// A corpus entry: instance text, parsed instance and oracle optimum.
struct Entry {
    text: String,
    inst: WcnfInstance,
    optimum: Option<usize>,
}

fn corpus() -> Vec<Entry> {
    (0..200u64)
        .map(|i| {
            let hard = (i % 8) as usize;
            let p = GenParams {
                vars: 4 + (i % 9) as u32,
                hard,
                soft: 6 + ((i * 7) % 17) as usize,
                width: 1 + (i % 3) as usize,
                seed: 1000 + i,
            };
            let inst = generate(&p).expect("generator");
            let text = render(&p, &inst);
            let optimum = brute_force_optimum(&inst).expect("oracle");
            Entry { text, inst, optimum }
        })
        .collect()
}

fn solve(entry: &Entry, alg: Algorithm, mode: CertMode) -> (RunResult, Bundle) {
    let r = run(&entry.inst, &RunOptions::new(alg, mode)).expect("run");
    let b = Bundle::assemble(r.manifest.clone(), &r.proofs, entry.text.as_bytes()).expect("bundle");
    (r, b)
}

fn criterion1() -> Outcome {
    let start = Instant::now();
    let inst = maxcert::formula::parse_wcnf(EXAMPLE1.as_bytes()).unwrap();
    let all = run(&inst, &RunOptions::new(Algorithm::Lsus, CertMode::All)).unwrap();
    let last = run(&inst, &RunOptions::new(Algorithm::Lsus, CertMode::Last)).unwrap();
    let shape: Vec<(usize, IterStatus)> = all.iterations().iter().map(|r| (r.bound, r.status)).collect();
    use IterStatus::*;
    let elapsed = start.elapsed().as_secs_f64();
    let pass = shape == vec![(0, Unsat), (1, Unsat), (2, Unsat), (3, Sat)]
        && all.optimum() == Some(3)
        && all.manifest.certificates.len() == 4
        && last.manifest.certificates.len() == 2
        && elapsed < 1.0;
    outcome(
        pass,
        format!(
            "{} iterations, optimum {:?}, {} certificates (all) / {} (last), {elapsed:.3}s",
            shape.len(),
            all.optimum(),
            all.manifest.certificates.len(),
            last.manifest.certificates.len()
        ),
    )
}

fn criterion2() -> Outcome {
    let start = Instant::now();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/buggy_msu3");
    let bundle = match read_bundle(&dir) {
        Ok(b) => b,
        Err(e) => return outcome(false, format!("fixture unreadable: {e}")),
    };
    let without = check_method2_with(&bundle, Method2Options { minimality: false });
    let full = check_method2(&bundle);
    let elapsed = start.elapsed().as_secs_f64();
    let pass = without.is_valid()
        && !full.is_valid()
        && full.reason == Some(Reason::MinimalityRefuted)
        && elapsed < 1.0;
    outcome(
        pass,
        format!(
            "without minimality {}, full {} ({:?}), {elapsed:.3}s",
            if without.is_valid() { "VALID" } else { "INVALID" },
            if full.is_valid() { "VALID" } else { "INVALID" },
            full.reason
        ),
    )
}

struct CorpusRuns {
    /// (entry index, algorithm) -> run and all-mode bundle
    runs: BTreeMap<(usize, Algorithm), (RunResult, Bundle)>,
    disagreements: Vec<String>,
    secs: f64,
}

fn run_corpus(corpus: &[Entry]) -> CorpusRuns {
    let start = Instant::now();
    let mut runs = BTreeMap::new();
    let mut disagreements = Vec::new();
    for (i, e) in corpus.iter().enumerate() {
        for alg in Algorithm::ALL {
            let (r, b) = solve(e, alg, CertMode::All);
            if r.optimum() != e.optimum {
                disagreements.push(format!("instance {i} {alg}: {:?} vs oracle {:?}", r.optimum(), e.optimum));
            }
            runs.insert((i, alg), (r, b));
        }
    }
    CorpusRuns {
        runs,
        disagreements,
        secs: start.elapsed().as_secs_f64(),
    }
}

fn criterion3(corpus: &[Entry], runs: &CorpusRuns) -> Outcome {
    let max_vars = corpus.iter().map(|e| e.inst.num_vars).max().unwrap_or(0);
    let max_clauses = corpus
        .iter()
        .map(|e| e.inst.hard.len() + e.inst.soft.len())
        .max()
        .unwrap_or(0);
    let mixed = corpus.iter().filter(|e| !e.inst.hard.is_empty()).count();
    let pass = corpus.len() >= 200
        && max_vars <= 12
        && max_clauses <= 30
        && mixed > 0
        && runs.disagreements.is_empty()
        && runs.secs < 300.0;
    let first = runs.disagreements.first().cloned().unwrap_or_default();
    outcome(
        pass,
        format!(
            "{} instances (<= {max_vars} vars, <= {max_clauses} clauses, {mixed} with hard clauses) x 4 algorithms, {} disagreements, {:.1}s {first}",
            corpus.len(),
            runs.disagreements.len(),
            runs.secs
        ),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Mutation {
    FlipSatBit,
    OptimumUp,
    OptimumDown,
    DropLastLemma,
    SwapLemmaWithEmpty,
    ShiftUnsatBound,
    DropMinimality,
}

impl Mutation {
    const ALL: [Mutation; 7] = [
        Mutation::FlipSatBit,
        Mutation::OptimumUp,
        Mutation::OptimumDown,
        Mutation::DropLastLemma,
        Mutation::SwapLemmaWithEmpty,
        Mutation::ShiftUnsatBound,
        Mutation::DropMinimality,
    ];

    fn expected(self) -> Reason {
        match self {
            Mutation::FlipSatBit => Reason::SatCertFalsifiesClause,
            Mutation::OptimumUp | Mutation::OptimumDown => Reason::SatCertBoundMismatch,
            Mutation::DropLastLemma | Mutation::SwapLemmaWithEmpty => Reason::RupStepFailed,
            Mutation::ShiftUnsatBound | Mutation::DropMinimality => Reason::StructureError,
        }
    }
}

/// Index of the last lemma line directly before the closing empty clause.
fn last_lemma(lines: &[&str]) -> Option<usize> {
    if lines.last() != Some(&"0") {
        return None;
    }
    lines[..lines.len() - 1]
        .iter()
        .rposition(|l| !l.starts_with('d'))
}

fn last_unsat_proof(b: &Bundle) -> Option<(usize, String)> {
    let rec = b.manifest.last_with_status(IterStatus::Unsat)?;
    let cert = b.unsat_certificate(rec.index)?;
    Some((rec.index, cert.proof_file))
}

fn mutate(b: &Bundle, m: Mutation) -> Option<Bundle> {
    let mut out = b.clone();
    let optimum = b.manifest.result.optimum()?;
    match m {
        Mutation::FlipSatBit => {
            let rec = b.manifest.last_with_status(IterStatus::Sat)?;
            let id = rec.certificate.clone()?;
            let rebuilt = reconstruct_instance(&b.instance, &b.manifest, rec.index).ok()?;
            let cert = b.sat_certificate(rec.index)?;
            let flipped = (1..=cert.assignment.num_vars()).find_map(|v| {
                let mut a = cert.assignment.clone();
                let var = Var::new(v);
                a.set(var, !a.value(var).unwrap());
                let breaks = rebuilt
                    .formula
                    .clauses
                    .iter()
                    .any(|c| !evaluate_clause(c, &a).unwrap_or(true));
                breaks.then_some(a)
            })?;
            for c in &mut out.manifest.certificates {
                if let CertificateEntry::Sat { id: cid, assignment, .. } = c {
                    if *cid == id {
                        *assignment = format_model(&flipped);
                    }
                }
            }
        }
        Mutation::OptimumUp => out.manifest.result = RunOutcome::Optimum { value: optimum + 1 },
        Mutation::OptimumDown => {
            if optimum == 0 {
                return None;
            }
            out.manifest.result = RunOutcome::Optimum { value: optimum - 1 };
        }
        Mutation::DropLastLemma | Mutation::SwapLemmaWithEmpty => {
            let (_, file) = last_unsat_proof(b)?;
            let text = b.proofs.get(&file)?;
            let mut lines: Vec<&str> = text.lines().collect();
            let k = last_lemma(&lines)?;
            if m == Mutation::DropLastLemma {
                lines.remove(k);
            } else {
                let end = lines.len() - 1;
                lines.swap(k, end);
            }
            out.proofs.insert(file, lines.join("\n") + "\n");
        }
        Mutation::ShiftUnsatBound => {
            let (index, _) = last_unsat_proof(b)?;
            let rec = &mut out.manifest.iterations[index - 1];
            rec.bound += 1;
            let id = rec.certificate.clone();
            for c in &mut out.manifest.certificates {
                if let CertificateEntry::Unsat { id: cid, bound, .. } = c {
                    if Some(cid.clone()) == id {
                        *bound += 1;
                    }
                }
            }
        }
        Mutation::DropMinimality => {
            let rec = out.manifest.minimality.take()?;
            out.proofs.remove(&rec.proof_file);
        }
    }
    Some(out)
}

fn reason_name(v: &Verdict) -> String {
    v.reason.map_or("VALID".to_string(), |r| r.to_string())
}

struct MutationStats {
    applied: BTreeMap<Mutation, usize>,
    wrong: Vec<String>,
    /// Method 1 / method 2 validity disagreements on non-core-guided bundles.
    discrepancies: Vec<String>,
    compared: usize,
    honest_invalid: Vec<String>,
}

/// Records a method 1 / method 2 validity disagreement on bundles both
/// methods can process.
fn compare(stats: &mut MutationStats, label: &str, alg: Algorithm, v1: &Verdict, v2: &Verdict) {
    if alg == Algorithm::Msu3 {
        return;
    }
    let structural = |v: &Verdict| v.reason == Some(Reason::StructureError);
    if structural(v1) || structural(v2) {
        return;
    }
    stats.compared += 1;
    if v1.is_valid() != v2.is_valid() {
        stats
            .discrepancies
            .push(format!("{label}: method 1 {} vs method 2 {}", reason_name(v1), reason_name(v2)));
    }
}

fn run_mutations(runs: &CorpusRuns) -> MutationStats {
    let mut stats = MutationStats {
        applied: BTreeMap::new(),
        wrong: Vec::new(),
        discrepancies: Vec::new(),
        compared: 0,
        honest_invalid: Vec::new(),
    };
    for ((i, alg), (_, bundle)) in &runs.runs {
        let label = format!("instance {i} {alg}");
        let v1 = check_method1(bundle);
        let v2 = check_method2(bundle);
        if !v1.is_valid() || !v2.is_valid() {
            stats
                .honest_invalid
                .push(format!("{label}: {} / {}", reason_name(&v1), reason_name(&v2)));
        }
        compare(&mut stats, &label, *alg, &v1, &v2);
        for m in Mutation::ALL {
            let Some(mutated) = mutate(bundle, m) else { continue };
            *stats.applied.entry(m).or_default() += 1;
            let v1 = check_method1(&mutated);
            let v2 = check_method2(&mutated);
            let label = format!("{label} {m:?}");
            for (name, v) in [("method 1", &v1), ("method 2", &v2)] {
                if v.is_valid() || v.reason != Some(m.expected()) {
                    stats.wrong.push(format!("{label} {name}: got {}", reason_name(v)));
                }
            }
            compare(&mut stats, &label, *alg, &v1, &v2);
        }
    }
    stats
}

fn criterion4(stats: &MutationStats) -> Outcome {
    let pass = stats.discrepancies.is_empty() && stats.honest_invalid.is_empty() && stats.compared > 0;
    outcome(
        pass,
        format!(
            "{} bundle pairs compared (honest and mutated, lsus/lssu/binary), {} discrepancies, {} honest bundles rejected {}",
            stats.compared,
            stats.discrepancies.len(),
            stats.honest_invalid.len(),
            stats
                .discrepancies
                .first()
                .or(stats.honest_invalid.first())
                .cloned()
                .unwrap_or_default()
        ),
    )
}

fn criterion5(stats: &MutationStats) -> Outcome {
    let classes_ok = Mutation::ALL
        .iter()
        .filter(|m| stats.applied.get(m).copied().unwrap_or(0) >= 50)
        .count();
    let counts: Vec<String> = Mutation::ALL
        .iter()
        .map(|m| format!("{m:?}={}", stats.applied.get(m).copied().unwrap_or(0)))
        .collect();
    let pass = classes_ok >= 6 && stats.wrong.is_empty();
    outcome(
        pass,
        format!(
            "{classes_ok} classes with >= 50 bundles [{}], {} unexpected verdicts {}",
            counts.join(", "),
            stats.wrong.len(),
            stats.wrong.first().cloned().unwrap_or_default()
        ),
    )
}

/// Exhaustive search over auxiliaries with pruning on falsified clauses.
fn extends(clauses: &[Clause], values: &mut Vec<Option<bool>>, rest: &[usize]) -> bool {
    let falsified = clauses.iter().any(|c| {
        c.lits()
            .iter()
            .all(|l| values[l.var().index()] == Some(l.is_negated()))
    });
    if falsified {
        return false;
    }
    let Some((&v, tail)) = rest.split_first() else {
        return true;
    };
    for value in [false, true] {
        values[v] = Some(value);
        if extends(clauses, values, tail) {
            values[v] = None;
            return true;
        }
    }
    values[v] = None;
    false
}

fn criterion6() -> Outcome {
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for n in 1..=6usize {
        for k in 0..=6usize {
            let inputs: Vec<Lit> = (1..=n as u32).map(|v| Var::new(v).pos()).collect();
            let enc = encode_atmost(&inputs, k, Var::new(n as u32 + 1)).unwrap();
            let aux: Vec<usize> = enc.aux_vars.clone().map(|v| v as usize - 1).collect();
            let total = enc.max_var().max(n as u32) as usize;
            for bits in 0u32..1 << n {
                let mut values = vec![None; total];
                for (i, slot) in values.iter_mut().enumerate().take(n) {
                    *slot = Some(bits >> i & 1 == 1);
                }
                let sat = extends(&enc.clauses, &mut values, &aux);
                checked += 1;
                if sat != (bits.count_ones() as usize <= k) {
                    failures.push(format!("n={n} k={k} inputs={bits:0n$b}"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{checked} input assignments over n in 1..6, k in 0..6, {} mismatches {}",
            failures.len(),
            failures.first().cloned().unwrap_or_default()
        ),
    )
}

fn infeasible_instances() -> Vec<Entry> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    let mut out = Vec::new();
    while out.len() < 20 {
        let vars = rng.gen_range(3..=8u32);
        let hard: Vec<Clause> = (0..rng.gen_range(8..=30))
            .map(|_| {
                let mut lits: Vec<Lit> = Vec::new();
                while lits.len() < 2 {
                    let l = Lit::new(Var::new(rng.gen_range(1..=vars)), rng.gen_bool(0.5));
                    if !lits.iter().any(|x| x.var() == l.var()) {
                        lits.push(l);
                    }
                }
                Clause::new(lits).unwrap()
            })
            .collect();
        let inst = WcnfInstance {
            num_vars: vars,
            hard,
            soft: vec![Clause::from_dimacs(&[1])],
        };
        if brute_force_optimum(&inst).unwrap().is_none() {
            out.push(Entry {
                text: inst.to_wcnf_string(),
                inst,
                optimum: None,
            });
        }
    }
    out
}

#[derive(Default)]
struct ProofAudit {
    proofs: usize,
    rejected: Vec<String>,
    corrupted: usize,
    accepted_corrupt: Vec<String>,
}

impl ProofAudit {
    fn check(&mut self, label: String, f: &maxcert::formula::CnfFormula, text: &str) {
        self.proofs += 1;
        if !check_unsat_certificate(f, text).is_valid() {
            self.rejected.push(label.clone());
        }
        let lines: Vec<&str> = text.lines().collect();
        // without the closing empty clause
        let mut variants = vec![lines[..lines.len() - 1].join("\n")];
        if let Some(k) = last_lemma(&lines) {
            let mut dropped = lines.clone();
            dropped.remove(k);
            variants.push(dropped.join("\n"));
            let mut swapped = lines.clone();
            let end = swapped.len() - 1;
            swapped.swap(k, end);
            variants.push(swapped.join("\n"));
        }
        for v in variants {
            self.corrupted += 1;
            if check_unsat_certificate(f, &(v + "\n")).is_valid() {
                self.accepted_corrupt.push(label.clone());
            }
        }
    }
}

fn criterion7(runs: &CorpusRuns) -> Outcome {
    let mut audit = ProofAudit::default();
    for ((i, alg), (_, b)) in &runs.runs {
        for rec in &b.manifest.iterations {
            let Some(cert) = b.unsat_certificate(rec.index) else { continue };
            let f = reconstruct_instance(&b.instance, &b.manifest, rec.index).unwrap().formula;
            audit.check(format!("instance {i} {alg} iteration {}", rec.index), &f, &b.proofs[&cert.proof_file]);
        }
        if let Some(min) = &b.manifest.minimality {
            let f = minimality_instance(&b.instance, min.optimum).unwrap().formula;
            audit.check(format!("instance {i} {alg} minimality"), &f, &b.proofs[&min.proof_file]);
        }
    }
    for (i, e) in infeasible_instances().iter().enumerate() {
        for alg in Algorithm::ALL {
            let (r, b) = solve(e, alg, CertMode::All);
            if r.outcome != RunOutcome::Infeasible {
                audit.rejected.push(format!("infeasible {i} {alg}: reported {:?}", r.outcome));
                continue;
            }
            let file = b.manifest.feasibility.proof_file.clone().unwrap();
            audit.check(format!("infeasible {i} {alg} hard"), &e.inst.hard_formula(), &b.proofs[&file]);
        }
    }
    outcome(
        audit.rejected.is_empty() && audit.accepted_corrupt.is_empty(),
        format!(
            "{} emitted proofs, {} rejected; {} corrupted variants, {} accepted {}",
            audit.proofs,
            audit.rejected.len(),
            audit.corrupted,
            audit.accepted_corrupt.len(),
            audit
                .rejected
                .first()
                .or(audit.accepted_corrupt.first())
                .cloned()
                .unwrap_or_default()
        ),
    )
}

/// `copies` disjoint pigeonhole blocks with `holes + 1` soft pigeon clauses
/// and hard at-most-one-pigeon-per-hole clauses; optimum is `copies`.
fn pigeon_blocks(copies: usize, holes: usize) -> String {
    let pigeons = holes + 1;
    let per_block = pigeons * holes;
    let var = |b: usize, p: usize, h: usize| (b * per_block + p * holes + h + 1) as i64;
    let mut hard = Vec::new();
    let mut soft = Vec::new();
    for b in 0..copies {
        for p in 0..pigeons {
            soft.push((0..holes).map(|h| var(b, p, h)).collect::<Vec<_>>());
        }
        for h in 0..holes {
            for p in 0..pigeons {
                for q in p + 1..pigeons {
                    hard.push(vec![-var(b, p, h), -var(b, q, h)]);
                }
            }
        }
    }
    let top = soft.len() + 1;
    let mut out = format!("p wcnf {} {} {top}\n", copies * per_block, hard.len() + soft.len());
    for (w, c) in hard.iter().map(|c| (top, c)).chain(soft.iter().map(|c| (1, c))) {
        let lits: Vec<String> = c.iter().map(|l| l.to_string()).collect();
        out.push_str(&format!("{w} {} 0\n", lits.join(" ")));
    }
    out
}

fn criterion8() -> Outcome {
    let many = tempfile::tempdir().unwrap();
    for (copies, holes) in [(5, 3), (6, 3), (5, 4), (7, 3), (8, 3), (9, 3)] {
        fs::write(many.path().join(format!("blocks_{copies}x{holes}.wcnf")), pigeon_blocks(copies, holes)).unwrap();
    }
    let single = tempfile::tempdir().unwrap();
    for holes in [6, 7] {
        fs::write(single.path().join(format!("php_{holes}.wcnf")), pigeon_blocks(1, holes)).unwrap();
    }
    let many_report = bench(many.path(), Algorithm::Lsus, 5, 0).unwrap();
    let single_report = bench(single.path(), Algorithm::Lsus, 5, 0).unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    for r in &many_report.rows {
        let ok = r.unsat_iterations >= 5
            && r.check_one_secs < r.check_all_secs
            && r.check_all_valid
            && r.check_one_valid;
        pass &= ok;
        notes.push(format!(
            "{}: {} UNSAT, all {:.4}s one {:.4}s",
            r.instance, r.unsat_iterations, r.check_all_secs, r.check_one_secs
        ));
    }
    for r in &single_report.rows {
        let diff = (r.check_all_secs - r.check_one_secs).abs() / r.check_all_secs.max(r.check_one_secs);
        let ok = r.unsat_iterations == 1 && diff < 0.2 && r.check_all_valid && r.check_one_valid;
        pass &= ok;
        notes.push(format!(
            "{}: {} UNSAT, all {:.4}s one {:.4}s ({:.0}% apart)",
            r.instance,
            r.unsat_iterations,
            r.check_all_secs,
            r.check_one_secs,
            diff * 100.0
        ));
    }
    pass &= !many_report.rows.is_empty() && !single_report.rows.is_empty();
    outcome(pass, notes.join("; "))
}

fn criterion9(corpus: &[Entry], runs: &CorpusRuns) -> Outcome {
    let mut bad = Vec::new();
    for (i, e) in corpus.iter().enumerate() {
        let Some(opt) = e.optimum else { continue };
        let lsus = runs.runs[&(i, Algorithm::Lsus)].0.iterations().len();
        if lsus != opt + 1 {
            bad.push(format!("instance {i}: lsus {lsus} iterations, optimum {opt}"));
        }
        let binary = runs.runs[&(i, Algorithm::Binary)].0.iterations().len();
        let soft = e.inst.num_soft();
        // ceil(log2(soft + 1)) + 1
        let limit = (usize::BITS - soft.leading_zeros()) as usize + 1;
        if binary > limit {
            bad.push(format!("instance {i}: binary {binary} iterations, limit {limit}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} instances, {} violations {}",
            corpus.len(),
            bad.len(),
            bad.first().cloned().unwrap_or_default()
        ),
    )
}

fn main() {
    let start = Instant::now();
    let corpus = corpus();
    let runs = run_corpus(&corpus);
    let stats = run_mutations(&runs);
    let results = [
        ("Example 1 regression", criterion1()),
        ("buggy core-guided counterexample", criterion2()),
        ("oracle equivalence", criterion3(&corpus, &runs)),
        ("method 1 / method 2 equivalence", criterion4(&stats)),
        ("mutation soundness", criterion5(&stats)),
        ("encoding projection", criterion6()),
        ("proof soundness", criterion7(&runs)),
        ("check-one vs check-all timing", criterion8()),
        ("iteration counts", criterion9(&corpus, &runs)),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!(
            "criterion {}: {} - {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
