//! Clause-addition/deletion proof traces in textual DRUP format.
//!
//! One step per line: an addition is its literals followed by `0`, a deletion
//! is prefixed with `d `. A refutation ends with the line `0`.

use std::io::{self, Write};

use thiserror::Error;

use crate::formula::Lit;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProofStep {
    Add(Vec<Lit>),
    Delete(Vec<Lit>),
}

impl ProofStep {
    pub fn lits(&self) -> &[Lit] {
        match self {
            ProofStep::Add(lits) | ProofStep::Delete(lits) => lits,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ProofTrace {
    pub steps: Vec<ProofStep>,
}

impl ProofTrace {
    pub fn new() -> ProofTrace {
        ProofTrace::default()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// True if the last step adds the empty clause.
    pub fn is_refutation(&self) -> bool {
        matches!(self.steps.last(), Some(ProofStep::Add(lits)) if lits.is_empty())
    }

    pub fn to_drup_string(&self) -> String {
        let mut buf = Vec::new();
        write_proof(self, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("DRUP output is ASCII")
    }
}

/// Writes `proof` as DRUP text: ASCII, LF line endings.
pub fn write_proof<W: Write>(proof: &ProofTrace, sink: &mut W) -> io::Result<()> {
    let mut out = io::BufWriter::new(sink);
    for step in &proof.steps {
        if let ProofStep::Delete(_) = step {
            out.write_all(b"d ")?;
        }
        for lit in step.lits() {
            write!(out, "{} ", lit.to_dimacs())?;
        }
        out.write_all(b"0\n")?;
    }
    out.flush()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("proof line {line}: {msg}")]
pub struct DrupParseError {
    pub line: usize,
    pub msg: String,
}

/// Parses DRUP text. Each non-blank, non-comment line must hold exactly one
/// step terminated by `0`.
pub fn parse_proof(text: &str) -> Result<ProofTrace, DrupParseError> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: &str| DrupParseError {
            line,
            msg: msg.to_string(),
        };
        let mut tokens = raw.split_whitespace().peekable();
        match tokens.peek() {
            None => continue,
            Some(t) if t.starts_with('c') => continue,
            _ => {}
        }
        let delete = tokens.peek() == Some(&"d");
        if delete {
            tokens.next();
        }
        let mut lits = Vec::new();
        let mut terminated = false;
        for token in tokens {
            if terminated {
                return Err(err("tokens after terminating 0"));
            }
            let value: i32 = token
                .parse()
                .map_err(|_| err(&format!("invalid literal {token:?}")))?;
            if value == 0 {
                terminated = true;
            } else {
                lits.push(Lit::from_dimacs(value));
            }
        }
        if !terminated {
            return Err(err("step not terminated by 0"));
        }
        steps.push(if delete {
            ProofStep::Delete(lits)
        } else {
            ProofStep::Add(lits)
        });
    }
    Ok(ProofTrace { steps })
}

/// Maps 1-based step numbers to 1-based line numbers of `text`.
pub fn step_lines(text: &str) -> Vec<usize> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('c')
        })
        .map(|(i, _)| i + 1)
        .collect()
}
