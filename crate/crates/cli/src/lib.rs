//! The `maxcert` command line: solve, check, gen, oracle and bench.

pub mod bench;
pub mod gen;
pub mod oracle;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use maxcert::certs::{write_bundle, Algorithm, Bundle, CertMode, RunOutcome};
use maxcert::checker::{check_dir, Method};
use maxcert::formula::parse_wcnf;
use maxcert::optalgs::{run, RunOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "maxcert", version, about = "Certified partial MaxSAT solving and checking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a WCNF instance and write a certificate bundle.
    Solve {
        #[arg(long, default_value = "lsus")]
        alg: Algorithm,
        #[arg(long = "cert-mode", default_value = "all")]
        cert_mode: CertMode,
        /// Bundle directory; without it no certificates are produced.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Overwrite a non-empty bundle directory.
        #[arg(long)]
        force: bool,
        instance: PathBuf,
    },
    /// Check a bundle; prints a JSON verdict.
    Check {
        /// 1 checks every iteration, 2 only the last SAT and UNSAT ones.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        method: u8,
        bundle: PathBuf,
    },
    /// Generate a random instance with a satisfiable hard part.
    Gen {
        #[arg(long)]
        vars: u32,
        #[arg(long)]
        hard: usize,
        #[arg(long)]
        soft: usize,
        #[arg(long, default_value_t = 3)]
        width: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force optimum of a small instance.
    Oracle { instance: PathBuf },
    /// Time check-all against check-one over a corpus directory.
    Bench {
        corpus: PathBuf,
        #[arg(long, default_value = "binary")]
        alg: Algorithm,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Machine-readable report.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

/// Runs a parsed command, writing results to `out` and diagnostics to
/// `err`; returns the process exit code.
pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Solve {
            alg,
            cert_mode,
            out: dir,
            seed,
            force,
            instance,
        } => cmd_solve(&instance, alg, cert_mode, dir.as_deref(), seed, force, out),
        Command::Check { method, bundle } => {
            let method = if method == 1 { Method::All } else { Method::Last };
            let verdict = check_dir(&bundle, method);
            writeln!(out, "{}", verdict.to_json()).ok();
            Ok(verdict.exit_code())
        }
        Command::Gen {
            vars,
            hard,
            soft,
            width,
            seed,
            out: path,
        } => cmd_gen(
            &gen::GenParams {
                vars,
                hard,
                soft,
                width,
                seed,
            },
            path.as_deref(),
            out,
        ),
        Command::Oracle { instance } => cmd_oracle(&instance, out),
        Command::Bench {
            corpus,
            alg,
            reps,
            seed,
            json,
        } => cmd_bench(&corpus, alg, reps, seed, json.as_deref(), out, err),
    };
    match result {
        Ok(code) => code,
        Err(CmdError { code, error }) => {
            writeln!(err, "error: {error:#}").ok();
            code
        }
    }
}

struct CmdError {
    code: i32,
    error: anyhow::Error,
}

trait ExitWith<T> {
    fn exit_with(self, code: i32) -> Result<T, CmdError>;
}

impl<T, E: Into<anyhow::Error>> ExitWith<T> for Result<T, E> {
    fn exit_with(self, code: i32) -> Result<T, CmdError> {
        self.map_err(|e| CmdError {
            code,
            error: e.into(),
        })
    }
}

fn read_instance(path: &Path) -> Result<(Vec<u8>, maxcert::formula::WcnfInstance)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = parse_wcnf(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    Ok((bytes, inst))
}

fn cmd_solve(
    path: &Path,
    alg: Algorithm,
    cert_mode: CertMode,
    dir: Option<&Path>,
    seed: u64,
    force: bool,
    out: &mut dyn Write,
) -> Result<i32, CmdError> {
    let (bytes, inst) = read_instance(path).exit_with(EXIT_INPUT)?;
    let opts = RunOptions {
        certify: dir.is_some(),
        seed,
        ..RunOptions::new(alg, cert_mode)
    };
    let result = run(&inst, &opts).exit_with(EXIT_INTERNAL)?;
    if let Some(dir) = dir {
        let bundle = Bundle::assemble(result.manifest.clone(), &result.proofs, &bytes).exit_with(EXIT_INTERNAL)?;
        write_bundle(&bundle, dir, force).exit_with(EXIT_INPUT)?;
    }
    match result.outcome {
        RunOutcome::Optimum { value } => writeln!(out, "o {value}"),
        RunOutcome::Infeasible => writeln!(out, "s INFEASIBLE"),
    }
    .exit_with(EXIT_INPUT)?;
    Ok(EXIT_OK)
}

fn cmd_gen(p: &gen::GenParams, path: Option<&Path>, out: &mut dyn Write) -> Result<i32, CmdError> {
    let inst = gen::generate(p).exit_with(EXIT_INPUT)?;
    let text = gen::render(p, &inst);
    match path {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => out.write_all(text.as_bytes()).map_err(Into::into),
    }
    .exit_with(EXIT_INPUT)?;
    Ok(EXIT_OK)
}

fn cmd_oracle(path: &Path, out: &mut dyn Write) -> Result<i32, CmdError> {
    let (_, inst) = read_instance(path).exit_with(EXIT_INPUT)?;
    match oracle::brute_force_optimum(&inst).exit_with(EXIT_INPUT)? {
        Some(value) => writeln!(out, "o {value}"),
        None => writeln!(out, "s INFEASIBLE"),
    }
    .exit_with(EXIT_INPUT)?;
    Ok(EXIT_OK)
}

fn cmd_bench(
    corpus: &Path,
    alg: Algorithm,
    reps: usize,
    seed: u64,
    json: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CmdError> {
    let report = bench::bench(corpus, alg, reps, seed).exit_with(EXIT_INPUT)?;
    out.write_all(report.to_tsv().as_bytes()).exit_with(EXIT_INPUT)?;
    if let Some(path) = json {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        fs::write(path, text + "\n")
            .with_context(|| format!("writing {}", path.display()))
            .exit_with(EXIT_INPUT)?;
    }
    let mut code = EXIT_OK;
    for row in &report.rows {
        if !(row.check_all_valid && row.check_one_valid) {
            writeln!(err, "error: {}: bundle failed its check", row.instance).ok();
            code = EXIT_INVALID;
        } else if row.unsat_iterations > 1 && !row.ordering_holds() {
            writeln!(
                err,
                "warning: {}: check-one ({:.6}s) slower than check-all ({:.6}s)",
                row.instance, row.check_one_secs, row.check_all_secs
            )
            .ok();
        }
    }
    Ok(code)
}
