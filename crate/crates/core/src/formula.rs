//! Problem representation: variables, literals, clauses, partial MaxSAT
//! instances, assignments, and the DIMACS (W)CNF reader/writer shared by the
//! solver and the checker.

use std::fmt;
use std::ops::Not;

use thiserror::Error;

/// A Boolean variable with a 1-based DIMACS id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Creates a variable from its 1-based id. Panics on id 0.
    pub fn new(id: u32) -> Var {
        assert!(id >= 1, "variable ids are 1-based");
        Var(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    /// 0-based position, for indexing per-variable tables.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn pos(self) -> Lit {
        Lit::new(self, false)
    }

    pub fn neg(self) -> Lit {
        Lit::new(self, true)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A literal, packed as `2 * (id - 1) + negated`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, negated: bool) -> Lit {
        Lit(2 * (var.0 - 1) + negated as u32)
    }

    /// Converts a nonzero signed DIMACS integer. Panics on 0.
    pub fn from_dimacs(value: i32) -> Lit {
        assert!(value != 0, "0 is not a literal");
        Lit::new(Var::new(value.unsigned_abs()), value < 0)
    }

    pub fn to_dimacs(self) -> i32 {
        let id = self.var().id() as i32;
        if self.is_negated() {
            -id
        } else {
            id
        }
    }

    pub fn var(self) -> Var {
        Var(self.0 / 2 + 1)
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    /// Dense index usable for per-literal tables (watch lists).
    pub fn code(self) -> usize {
        self.0 as usize
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClauseError {
    #[error("duplicate literal {0}")]
    DuplicateLiteral(i32),
    #[error("tautological clause contains both {0} and its complement")]
    Tautology(i32),
}

/// A disjunction of literals without duplicates or complementary pairs.
/// The empty clause is allowed and is falsified by every assignment.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    pub fn new(lits: Vec<Lit>) -> Result<Clause, ClauseError> {
        let mut sorted = lits.clone();
        sorted.sort_unstable();
        for pair in sorted.windows(2) {
            if pair[0] == pair[1] {
                return Err(ClauseError::DuplicateLiteral(pair[0].to_dimacs()));
            }
            if pair[0].var() == pair[1].var() {
                return Err(ClauseError::Tautology(pair[0].var().id() as i32));
            }
        }
        Ok(Clause { lits })
    }

    /// Builds a clause from DIMACS integers. Panics on malformed input; meant
    /// for literals known to be well formed (tests, encodings).
    pub fn from_dimacs(lits: &[i32]) -> Clause {
        Clause::new(lits.iter().map(|&l| Lit::from_dimacs(l)).collect())
            .expect("well-formed clause")
    }

    pub fn empty() -> Clause {
        Clause { lits: Vec::new() }
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    /// The largest variable id mentioned, 0 for the empty clause.
    pub fn max_var(&self) -> u32 {
        self.lits.iter().map(|l| l.var().id()).max().unwrap_or(0)
    }

    /// Returns this clause with `lit` appended. Panics if the result would
    /// repeat a variable.
    pub fn with_lit(&self, lit: Lit) -> Clause {
        assert!(
            self.lits.iter().all(|l| l.var() != lit.var()),
            "appended literal must use a fresh variable"
        );
        let mut lits = self.lits.clone();
        lits.push(lit);
        Clause { lits }
    }

    pub fn to_dimacs(&self) -> Vec<i32> {
        self.lits.iter().map(|l| l.to_dimacs()).collect()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, lit) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{lit}")?;
        }
        write!(f, ")")
    }
}

/// A plain CNF formula over variables `1..=num_vars`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> CnfFormula {
        debug_assert!(clauses.iter().all(|c| c.max_var() <= num_vars));
        CnfFormula { num_vars, clauses }
    }

    /// Renders the formula in DIMACS CNF.
    pub fn to_dimacs_string(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause.lits() {
                out.push_str(&lit.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("variable {var} outside assignment range 1..={range}")]
    VarOutOfRange { var: u32, range: u32 },
    #[error("hard clause {index} is falsified")]
    HardViolated { index: usize },
}

/// A total assignment over variables `1..=num_vars`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn all_false(num_vars: u32) -> Assignment {
        Assignment {
            values: vec![false; num_vars as usize],
        }
    }

    pub fn from_values(values: Vec<bool>) -> Assignment {
        Assignment { values }
    }

    /// Builds an assignment from a DIMACS model line: one signed literal per
    /// variable, in any order. Returns `None` unless the literals cover
    /// exactly `1..=len` once each.
    pub fn from_dimacs(lits: &[i32]) -> Option<Assignment> {
        let n = lits.len();
        let mut values = vec![None; n];
        for &l in lits {
            let idx = l.unsigned_abs() as usize;
            if l == 0 || idx > n || values[idx - 1].is_some() {
                return None;
            }
            values[idx - 1] = Some(l > 0);
        }
        Some(Assignment {
            values: values.into_iter().map(|v| v.unwrap()).collect(),
        })
    }

    pub fn to_dimacs(&self) -> Vec<i32> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| if v { i as i32 + 1 } else { -(i as i32 + 1) })
            .collect()
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn value(&self, var: Var) -> Option<bool> {
        self.values.get(var.index()).copied()
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.value(lit.var()).map(|v| v != lit.is_negated())
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.values[var.index()] = value;
    }

    /// Keeps only variables `1..=num_vars`.
    pub fn truncated(&self, num_vars: u32) -> Assignment {
        Assignment {
            values: self.values[..num_vars as usize].to_vec(),
        }
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }
}

/// A partial MaxSAT instance. Soft clause ids are 1-based file positions
/// among the soft clauses.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct WcnfInstance {
    pub num_vars: u32,
    pub hard: Vec<Clause>,
    pub soft: Vec<Clause>,
}

impl WcnfInstance {
    pub fn num_soft(&self) -> usize {
        self.soft.len()
    }

    /// Soft clause by 1-based id.
    pub fn soft_clause(&self, soft_id: usize) -> Option<&Clause> {
        soft_id.checked_sub(1).and_then(|i| self.soft.get(i))
    }

    pub fn soft_ids(&self) -> impl Iterator<Item = usize> {
        1..=self.soft.len()
    }

    pub fn hard_formula(&self) -> CnfFormula {
        CnfFormula::new(self.num_vars, self.hard.clone())
    }

    /// Renders the instance as old-style WCNF with `top = |soft| + 1`, hard
    /// clauses first.
    pub fn to_wcnf_string(&self) -> String {
        let top = self.soft.len() + 1;
        let mut out = format!(
            "p wcnf {} {} {}\n",
            self.num_vars,
            self.hard.len() + self.soft.len(),
            top
        );
        let mut line = |weight: usize, clause: &Clause| {
            out.push_str(&weight.to_string());
            for lit in clause.lits() {
                out.push(' ');
                out.push_str(&lit.to_dimacs().to_string());
            }
            out.push_str(" 0\n");
        };
        for clause in &self.hard {
            line(top, clause);
        }
        for clause in &self.soft {
            line(1, clause);
        }
        out
    }
}

/// True iff some literal of `clause` is satisfied by `a`.
pub fn evaluate_clause(clause: &Clause, a: &Assignment) -> Result<bool, FormulaError> {
    let mut satisfied = false;
    for &lit in clause.lits() {
        match a.lit_value(lit) {
            Some(v) => satisfied |= v,
            None => {
                return Err(FormulaError::VarOutOfRange {
                    var: lit.var().id(),
                    range: a.num_vars(),
                })
            }
        }
    }
    Ok(satisfied)
}

/// Number of soft clauses falsified by `a`; fails if `a` violates a hard
/// clause (1-based index in the error).
pub fn count_falsified_soft(inst: &WcnfInstance, a: &Assignment) -> Result<usize, FormulaError> {
    for (i, clause) in inst.hard.iter().enumerate() {
        if !evaluate_clause(clause, a)? {
            return Err(FormulaError::HardViolated { index: i + 1 });
        }
    }
    let mut falsified = 0;
    for clause in &inst.soft {
        if !evaluate_clause(clause, a)? {
            falsified += 1;
        }
    }
    Ok(falsified)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: malformed header: {msg}")]
    Header { line: usize, msg: String },
    #[error("line {line}: invalid token {token:?}")]
    Token { line: usize, token: String },
    #[error("line {line}: literal {lit} out of range 1..={num_vars}")]
    LiteralOutOfRange { line: usize, lit: i64, num_vars: u32 },
    #[error("line {line}: unsupported weight {weight} (only 1 and top are accepted{})", top.map(|t| format!(", top={t}")).unwrap_or_default())]
    UnsupportedWeight { line: usize, weight: u64, top: Option<u64> },
    #[error("line {line}: clause not terminated by 0")]
    Unterminated { line: usize },
    #[error("line {line}: {error}")]
    Clause { line: usize, error: ClauseError },
    #[error("input is not valid UTF-8")]
    Encoding,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Cnf,
    Wcnf { top: Option<u64> },
}

/// Parses DIMACS WCNF (`p wcnf <vars> <clauses> <top>`) or CNF (`p cnf`,
/// every clause soft). Hard and soft clauses keep file order.
pub fn parse_wcnf(bytes: &[u8]) -> Result<WcnfInstance, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|_| ParseError::Encoding)?;
    let mut header: Option<(Format, u32)> = None;
    let mut inst = WcnfInstance::default();
    // tokens of the clause being read, with the line it started on
    let mut pending: Vec<i64> = Vec::new();
    let mut pending_line = 0;
    let mut last_line = 0;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::Header {
                    line,
                    msg: "duplicate header".into(),
                });
            }
            header = Some(parse_header(trimmed, line)?);
            continue;
        }
        let (format, num_vars) = header.ok_or_else(|| ParseError::Header {
            line,
            msg: "clause before header".into(),
        })?;
        for token in trimmed.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| ParseError::Token {
                line,
                token: token.to_string(),
            })?;
            if pending.is_empty() {
                pending_line = line;
            }
            let is_weight = matches!(format, Format::Wcnf { .. }) && pending.is_empty();
            if is_weight {
                if value < 1 {
                    return Err(ParseError::Token {
                        line,
                        token: token.to_string(),
                    });
                }
                pending.push(value);
                continue;
            }
            if value != 0 {
                if value.unsigned_abs() > num_vars as u64 {
                    return Err(ParseError::LiteralOutOfRange {
                        line,
                        lit: value,
                        num_vars,
                    });
                }
                pending.push(value);
                continue;
            }
            let (weight, lits) = match format {
                Format::Cnf => (None, &pending[..]),
                Format::Wcnf { .. } => (Some(pending[0] as u64), &pending[1..]),
            };
            let clause = Clause::new(lits.iter().map(|&l| Lit::from_dimacs(l as i32)).collect())
                .map_err(|error| ParseError::Clause {
                    line: pending_line,
                    error,
                })?;
            match (format, weight) {
                (Format::Cnf, _) => inst.soft.push(clause),
                (Format::Wcnf { top }, Some(w)) => {
                    if Some(w) == top {
                        inst.hard.push(clause);
                    } else if w == 1 {
                        inst.soft.push(clause);
                    } else {
                        return Err(ParseError::UnsupportedWeight {
                            line: pending_line,
                            weight: w,
                            top,
                        });
                    }
                }
                (Format::Wcnf { .. }, None) => unreachable!(),
            }
            pending.clear();
        }
    }
    let (_, num_vars) = header.ok_or(ParseError::Header {
        line: last_line.max(1),
        msg: "missing `p cnf` / `p wcnf` header".into(),
    })?;
    if !pending.is_empty() {
        return Err(ParseError::Unterminated { line: pending_line });
    }
    inst.num_vars = num_vars;
    Ok(inst)
}

fn parse_header(line_text: &str, line: usize) -> Result<(Format, u32), ParseError> {
    let bad = |msg: &str| ParseError::Header {
        line,
        msg: msg.to_string(),
    };
    let fields: Vec<&str> = line_text.split_whitespace().collect();
    if fields.first() != Some(&"p") {
        return Err(bad("expected `p`"));
    }
    let num = |i: usize| -> Result<u64, ParseError> {
        fields
            .get(i)
            .ok_or_else(|| bad("missing field"))?
            .parse::<u64>()
            .map_err(|_| bad("non-numeric field"))
    };
    match fields.get(1).copied() {
        Some("cnf") if fields.len() == 4 => {
            let vars = num(2)?;
            num(3)?;
            Ok((Format::Cnf, u32::try_from(vars).map_err(|_| bad("too many variables"))?))
        }
        Some("wcnf") if fields.len() == 4 || fields.len() == 5 => {
            let vars = num(2)?;
            num(3)?;
            let top = if fields.len() == 5 { Some(num(4)?) } else { None };
            if top == Some(0) {
                return Err(bad("top must be positive"));
            }
            Ok((
                Format::Wcnf { top },
                u32::try_from(vars).map_err(|_| bad("too many variables"))?,
            ))
        }
        _ => Err(bad("expected `p cnf <vars> <clauses>` or `p wcnf <vars> <clauses> <top>`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const EXAMPLE1: &str = "\
c soft units, hard 5-cycle
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

    fn assignment(bits: &[bool]) -> Assignment {
        Assignment::from_values(bits.to_vec())
    }

    #[test]
    fn literal_complement_roundtrip() {
        for v in [1, 2, 17, 4000] {
            let l = Lit::from_dimacs(v);
            assert_ne!(l, !l);
            assert_eq!(!!l, l);
            assert_eq!((!l).to_dimacs(), -v);
            assert_eq!(l.var(), (!l).var());
        }
    }

    #[test]
    fn smallest_mixed_instance() {
        let inst = parse_wcnf(b"p wcnf 1 2 2\n2 1 0\n1 -1 0\n").unwrap();
        assert_eq!(inst.hard, vec![Clause::from_dimacs(&[1])]);
        assert_eq!(inst.soft, vec![Clause::from_dimacs(&[-1])]);
        assert_eq!(inst.num_vars, 1);
    }

    #[test]
    fn example1_shape() {
        let inst = parse_wcnf(EXAMPLE1.as_bytes()).unwrap();
        assert_eq!(inst.num_soft(), 5);
        assert_eq!(inst.hard.len(), 5);
        assert_eq!(inst.num_vars, 5);
        assert_eq!(inst.soft_clause(3), Some(&Clause::from_dimacs(&[-3])));
    }

    #[test]
    fn rejects_other_weights() {
        let err = parse_wcnf(b"p wcnf 1 1 2\n3 1 0\n").unwrap_err();
        assert!(matches!(err, ParseError::UnsupportedWeight { weight: 3, .. }));
    }

    #[test]
    fn rejects_malformed_inputs() {
        assert!(matches!(
            parse_wcnf(b"p wcnf 1\n").unwrap_err(),
            ParseError::Header { .. }
        ));
        assert!(matches!(
            parse_wcnf(b"1 0\n").unwrap_err(),
            ParseError::Header { .. }
        ));
        assert!(matches!(
            parse_wcnf(b"p wcnf 2 1 3\n1 3 0\n").unwrap_err(),
            ParseError::LiteralOutOfRange { lit: 3, .. }
        ));
        assert!(matches!(
            parse_wcnf(b"p wcnf 2 1 3\n1 1 2\n").unwrap_err(),
            ParseError::Unterminated { line: 2 }
        ));
        assert!(matches!(
            parse_wcnf(b"p wcnf 2 1 3\n1 1 -1 0\n").unwrap_err(),
            ParseError::Clause {
                error: ClauseError::Tautology(1),
                ..
            }
        ));
        assert!(matches!(
            parse_wcnf(b"p cnf 2 1\n1 x 0\n").unwrap_err(),
            ParseError::Token { .. }
        ));
    }

    #[test]
    fn cnf_is_all_soft_and_empty_clause_allowed() {
        let inst = parse_wcnf(b"p cnf 1 2\n1 0\n0\n").unwrap();
        assert!(inst.hard.is_empty());
        assert_eq!(inst.soft, vec![Clause::from_dimacs(&[1]), Clause::empty()]);
        let inst = parse_wcnf(b"p wcnf 1 2 3\n1 1 0\n1 0\n").unwrap();
        assert_eq!(inst.soft[1], Clause::empty());
    }

    #[test]
    fn clause_may_span_lines() {
        let inst = parse_wcnf(b"p wcnf 3 1 4\n4 1\n 2 3\n0\n").unwrap();
        assert_eq!(inst.hard, vec![Clause::from_dimacs(&[1, 2, 3])]);
    }

    #[test]
    fn evaluate_examples() {
        let c = Clause::from_dimacs(&[1, -2]);
        assert!(evaluate_clause(&c, &assignment(&[false, false])).unwrap());
        assert!(!evaluate_clause(&Clause::empty(), &assignment(&[true])).unwrap());
        assert!(!evaluate_clause(&Clause::from_dimacs(&[-1]), &assignment(&[true])).unwrap());
        assert_eq!(
            evaluate_clause(&Clause::from_dimacs(&[3]), &assignment(&[true])),
            Err(FormulaError::VarOutOfRange { var: 3, range: 1 })
        );
    }

    #[test]
    fn count_falsified_examples() {
        let inst = parse_wcnf(EXAMPLE1.as_bytes()).unwrap();
        let a = assignment(&[true, false, true, true, false]);
        assert_eq!(count_falsified_soft(&inst, &a), Ok(3));
        assert_eq!(
            count_falsified_soft(&inst, &Assignment::all_false(5)),
            Err(FormulaError::HardViolated { index: 1 })
        );
        let all_soft = parse_wcnf(b"p cnf 1 1\n1 0\n").unwrap();
        assert_eq!(count_falsified_soft(&all_soft, &assignment(&[true])), Ok(0));
    }

    #[test]
    fn example1_brute_force_minimum_is_three() {
        let inst = parse_wcnf(EXAMPLE1.as_bytes()).unwrap();
        let best = (0u32..32)
            .filter_map(|bits| {
                let a = Assignment::from_values((0..5).map(|i| bits >> i & 1 == 1).collect());
                count_falsified_soft(&inst, &a).ok()
            })
            .min();
        assert_eq!(best, Some(3));
    }

    #[test]
    fn model_line_roundtrip() {
        let a = assignment(&[true, false, true]);
        assert_eq!(a.to_dimacs(), vec![1, -2, 3]);
        assert_eq!(Assignment::from_dimacs(&[-2, 1, 3]), Some(a));
        assert_eq!(Assignment::from_dimacs(&[1, 3]), None);
        assert_eq!(Assignment::from_dimacs(&[1, 1]), None);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn clause_strategy(num_vars: u32) -> impl Strategy<Value = Clause> {
            proptest::sample::subsequence((1..=num_vars).collect::<Vec<_>>(), 0..=3.min(num_vars as usize))
                .prop_flat_map(|vars| {
                    let n = vars.len();
                    (Just(vars), proptest::collection::vec(any::<bool>(), n))
                })
                .prop_map(|(vars, signs)| {
                    Clause::new(
                        vars.iter()
                            .zip(signs)
                            .map(|(&v, s)| Lit::new(Var::new(v), s))
                            .collect(),
                    )
                    .unwrap()
                })
        }

        fn instance_strategy() -> impl Strategy<Value = WcnfInstance> {
            (1u32..6).prop_flat_map(|n| {
                (
                    Just(n),
                    proptest::collection::vec(clause_strategy(n), 0..5),
                    proptest::collection::vec(clause_strategy(n), 0..6),
                )
                    .prop_map(|(num_vars, hard, soft)| WcnfInstance {
                        num_vars,
                        hard,
                        soft,
                    })
            })
        }

        proptest! {
            #[test]
            fn print_parse_roundtrip(inst in instance_strategy()) {
                let text = inst.to_wcnf_string();
                prop_assert_eq!(parse_wcnf(text.as_bytes()).unwrap(), inst);
            }

            #[test]
            fn adding_satisfied_literal_keeps_clause_true(
                clause in clause_strategy(4),
                bits in proptest::collection::vec(any::<bool>(), 5),
                sign in any::<bool>(),
            ) {
                let a = Assignment::from_values(bits.clone());
                let before = evaluate_clause(&clause, &a).unwrap();
                // variable 5 is never used by clause_strategy(4)
                let lit = Lit::new(Var::new(5), sign);
                let extended = clause.with_lit(lit);
                let after = evaluate_clause(&extended, &a).unwrap();
                prop_assert!(!before || after);
                if a.lit_value(lit) == Some(true) {
                    prop_assert!(after);
                }
            }
        }
    }
}
