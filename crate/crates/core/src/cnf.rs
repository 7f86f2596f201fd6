//! Strict 3SAT formulas: literals, sorted 3-clauses, DIMACS I/O, evaluation
//! and the polarity inversion transform.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::structure::Triad;

/// A 1-based variable index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(u32);

impl VarId {
    /// Returns `None` for index 0.
    pub fn new(index: u32) -> Option<Self> {
        (index >= 1).then_some(VarId(index))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Zero-based position, used for array indexing.
    pub fn pos(self) -> usize {
        self.0 as usize - 1
    }

    pub(crate) fn from_pos(pos: usize) -> Self {
        VarId(pos as u32 + 1)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A variable or its negation.
///
/// Literals on distinct variables order by variable index; on the same
/// variable the positive literal comes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub var: VarId,
    pub positive: bool,
}

impl Literal {
    pub fn new(var: VarId, positive: bool) -> Self {
        Literal { var, positive }
    }

    pub fn pos(var: VarId) -> Self {
        Literal::new(var, true)
    }

    pub fn neg(var: VarId) -> Self {
        Literal::new(var, false)
    }

    pub fn negate(self) -> Self {
        Literal::new(self.var, !self.positive)
    }

    /// Signed DIMACS form; returns `None` for 0.
    pub fn from_dimacs(lit: i64) -> Option<Self> {
        let index = u32::try_from(lit.unsigned_abs()).ok()?;
        VarId::new(index).map(|var| Literal::new(var, lit > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var.get() as i64;
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn is_true_under(self, a: &Assignment) -> bool {
        a.value(self.var) == self.positive
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.var
            .cmp(&other.var)
            .then_with(|| other.positive.cmp(&self.positive))
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "A{}", self.var)
        } else {
            write!(f, "~A{}", self.var)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClauseError {
    #[error("clause needs exactly 3 literals, found {0}")]
    Width(usize),
    #[error("variable {0} occurs more than once in the clause")]
    RepeatedVariable(VarId),
}

/// Disjunction of three literals on distinct variables, stored sorted by
/// variable index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Clause3 {
    lits: [Literal; 3],
}

impl Clause3 {
    pub fn new(mut lits: [Literal; 3]) -> Result<Self, ClauseError> {
        lits.sort();
        for w in lits.windows(2) {
            if w[0].var == w[1].var {
                return Err(ClauseError::RepeatedVariable(w[0].var));
            }
        }
        Ok(Clause3 { lits })
    }

    pub fn from_slice(lits: &[Literal]) -> Result<Self, ClauseError> {
        let arr: [Literal; 3] = lits.try_into().map_err(|_| ClauseError::Width(lits.len()))?;
        Clause3::new(arr)
    }

    /// Builds the clause whose polarities are encoded in `bits`
    /// (bit 2 = first variable, 1 = positive).
    pub fn from_triad_bits(triad: Triad, bits: u8) -> Self {
        let vars = triad.vars();
        let lits = [
            Literal::new(vars[0], bits & 0b100 != 0),
            Literal::new(vars[1], bits & 0b010 != 0),
            Literal::new(vars[2], bits & 0b001 != 0),
        ];
        Clause3 { lits }
    }

    pub fn literals(&self) -> &[Literal; 3] {
        &self.lits
    }

    pub fn triad(&self) -> Triad {
        Triad::new(self.lits[0].var, self.lits[1].var, self.lits[2].var)
            .expect("clause variables are strictly increasing")
    }

    /// Polarity bits in the project-wide encoding.
    pub fn bits(&self) -> u8 {
        self.lits
            .iter()
            .fold(0u8, |acc, l| (acc << 1) | u8::from(l.positive))
    }

    pub fn max_var(&self) -> VarId {
        self.lits[2].var
    }

    pub fn invert(&self) -> Self {
        Clause3 {
            lits: self.lits.map(Literal::negate),
        }
    }

    pub fn is_true_under(&self, a: &Assignment) -> bool {
        self.lits.iter().any(|l| l.is_true_under(a))
    }
}

impl fmt::Display for Clause3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.lits;
        write!(f, "({a} or {b} or {c})")
    }
}

/// Truth values V1..Vn.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn all(n: usize, value: bool) -> Self {
        Assignment(vec![value; n])
    }

    /// Decodes the integer `code` with variable 1 as the most significant bit.
    pub fn from_code(n: usize, code: u64) -> Self {
        Assignment((0..n).map(|p| code >> (n - 1 - p) & 1 == 1).collect())
    }

    /// Inverse of [`Assignment::from_code`]; requires `len() <= 64`.
    pub fn code(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &v| (acc << 1) | u64::from(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn value(&self, var: VarId) -> bool {
        self.0[var.pos()]
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }

    pub fn flipped(&self) -> Self {
        Assignment(self.0.iter().map(|v| !v).collect())
    }

    /// Pattern of this assignment on a triad, in the structure's bit encoding.
    pub fn pattern_on(&self, triad: Triad) -> u8 {
        triad
            .vars()
            .iter()
            .fold(0u8, |acc, &v| (acc << 1) | u8::from(self.value(v)))
    }

    /// DIMACS model line, e.g. `v -1 2 3 4 0`.
    pub fn to_dimacs_model(&self) -> String {
        let mut out = String::from("v");
        for (p, &v) in self.0.iter().enumerate() {
            let i = p as i64 + 1;
            out.push_str(&format!(" {}", if v { i } else { -i }));
        }
        out.push_str(" 0");
        out
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &v in &self.0 {
            f.write_str(if v { "T" } else { "F" })?;
        }
        Ok(())
    }
}

impl FromStr for Assignment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                'T' | 't' => Ok(true),
                'F' | 'f' => Ok(false),
                other => Err(format!("invalid truth value {other:?}")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Assignment)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("clause {clause} uses variable {var} but the formula has {n} variables")]
    VarOutOfRange { clause: Clause3, var: VarId, n: usize },
    #[error("assignment has {got} values, formula has {n} variables")]
    LengthMismatch { got: usize, n: usize },
}

/// A duplicate-free, ordered set of 3-clauses over `n` variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Formula {
    n: usize,
    clauses: BTreeSet<Clause3>,
}

impl Formula {
    /// Duplicate clauses collapse silently; use [`parse_dimacs`] to count them.
    pub fn new(n: usize, clauses: impl IntoIterator<Item = Clause3>) -> Result<Self, FormulaError> {
        let mut set = BTreeSet::new();
        for clause in clauses {
            let var = clause.max_var();
            if var.get() as usize > n {
                return Err(FormulaError::VarOutOfRange { clause, var, n });
            }
            set.insert(clause);
        }
        Ok(Formula { n, clauses: set })
    }

    pub fn empty(n: usize) -> Self {
        Formula {
            n,
            clauses: BTreeSet::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause3> + '_ {
        self.clauses.iter()
    }

    pub fn contains(&self, clause: &Clause3) -> bool {
        self.clauses.contains(clause)
    }

    pub fn evaluate(&self, a: &Assignment) -> Result<bool, FormulaError> {
        if a.len() != self.n {
            return Err(FormulaError::LengthMismatch { got: a.len(), n: self.n });
        }
        Ok(self.clauses.iter().all(|c| c.is_true_under(a)))
    }

    /// Every literal replaced by its negation.
    pub fn invert(&self) -> Formula {
        Formula {
            n: self.n,
            clauses: self.clauses.iter().map(Clause3::invert).collect(),
        }
    }
}

pub fn invert_formula(f: &Formula) -> Formula {
    f.invert()
}

pub fn evaluate(f: &Formula, a: &Assignment) -> Result<bool, FormulaError> {
    f.evaluate(a)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("missing `p cnf <vars> <clauses>` header")]
    MissingHeader,
    #[error("line {line}, column {column}: malformed header `{text}`")]
    MalformedHeader { line: usize, column: usize, text: String },
    #[error("line {line}, column {column}: duplicate header")]
    DuplicateHeader { line: usize, column: usize },
    #[error("line {line}, column {column}: invalid literal `{token}`")]
    InvalidToken { line: usize, column: usize, token: String },
    #[error("line {line}, column {column}: variable {var} out of range 1..={n}")]
    VarOutOfRange { line: usize, column: usize, var: u64, n: usize },
    #[error("clause {clause_index} (line {line}) has {found} literals, expected exactly 3")]
    ClauseWidth { clause_index: usize, line: usize, found: usize },
    #[error("clause {clause_index} (line {line}) repeats variable {var}")]
    RepeatedVariable { clause_index: usize, line: usize, var: VarId },
    #[error("clause {clause_index} (line {line}) is not terminated by 0")]
    Unterminated { clause_index: usize, line: usize },
}

/// Result of [`parse_dimacs`] with the non-fatal warning counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedFormula {
    pub formula: Formula,
    pub duplicates_dropped: usize,
    pub declared_clauses: usize,
}

/// Parses strict 3SAT DIMACS CNF.
pub fn parse_dimacs(text: &str) -> Result<ParsedFormula, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = BTreeSet::new();
    let mut duplicates = 0usize;
    let mut current: Vec<Literal> = Vec::with_capacity(3);
    let mut clause_index = 1usize;
    let mut clause_line = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        let indent = raw.len() - trimmed.len();
        if trimmed.starts_with('p') {
            let column = indent + 1;
            if header.is_some() {
                return Err(ParseError::DuplicateHeader { line, column });
            }
            let bad = || ParseError::MalformedHeader {
                line,
                column,
                text: trimmed.trim_end().to_string(),
            };
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(bad());
            }
            let n = parts[2].parse::<usize>().map_err(|_| bad())?;
            let m = parts[3].parse::<usize>().map_err(|_| bad())?;
            header = Some((n, m));
            continue;
        }
        let Some((n, _)) = header else {
            return Err(ParseError::MissingHeader);
        };

        let mut offset = 0usize;
        for token in raw.split_whitespace() {
            let at = raw[offset..].find(token).map_or(offset, |p| offset + p);
            offset = at + token.len();
            let column = at + 1;
            let value: i64 = token.parse().map_err(|_| ParseError::InvalidToken {
                line,
                column,
                token: token.to_string(),
            })?;
            if value == 0 {
                if current.len() != 3 {
                    return Err(ParseError::ClauseWidth {
                        clause_index,
                        line: if current.is_empty() { line } else { clause_line },
                        found: current.len(),
                    });
                }
                let clause = Clause3::from_slice(&current).map_err(|e| match e {
                    ClauseError::RepeatedVariable(var) => ParseError::RepeatedVariable {
                        clause_index,
                        line: clause_line,
                        var,
                    },
                    ClauseError::Width(found) => ParseError::ClauseWidth {
                        clause_index,
                        line: clause_line,
                        found,
                    },
                })?;
                if !clauses.insert(clause) {
                    duplicates += 1;
                }
                current.clear();
                clause_index += 1;
                continue;
            }
            let var = value.unsigned_abs();
            if var as usize > n {
                return Err(ParseError::VarOutOfRange { line, column, var, n });
            }
            if current.is_empty() {
                clause_line = line;
            }
            if current.len() == 3 {
                return Err(ParseError::ClauseWidth {
                    clause_index,
                    line: clause_line,
                    found: 4,
                });
            }
            current.push(Literal::from_dimacs(value).expect("non-zero literal"));
        }
    }

    let Some((n, m)) = header else {
        return Err(ParseError::MissingHeader);
    };
    if !current.is_empty() {
        return Err(ParseError::Unterminated {
            clause_index,
            line: clause_line,
        });
    }
    Ok(ParsedFormula {
        formula: Formula { n, clauses },
        duplicates_dropped: duplicates,
        declared_clauses: m,
    })
}

pub fn write_dimacs(f: &Formula) -> String {
    let mut out = format!("p cnf {} {}\n", f.n, f.clauses.len());
    for clause in &f.clauses {
        let [a, b, c] = clause.lits;
        out.push_str(&format!("{} {} {} 0\n", a.to_dimacs(), b.to_dimacs(), c.to_dimacs()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    fn lit(x: i64) -> Literal {
        Literal::from_dimacs(x).unwrap()
    }

    fn clause(a: i64, b: i64, c: i64) -> Clause3 {
        Clause3::new([lit(a), lit(b), lit(c)]).unwrap()
    }

    #[test]
    fn parses_single_clause() {
        let p = parse_dimacs("p cnf 3 1\n1 -2 3 0").unwrap();
        assert_eq!(p.formula, Formula::new(3, [clause(1, -2, 3)]).unwrap());
        assert_eq!(p.duplicates_dropped, 0);
    }

    #[test]
    fn sorts_literals_on_parse() {
        let a = parse_dimacs("p cnf 3 1\n3 -2 1 0").unwrap().formula;
        let b = parse_dimacs("p cnf 3 1\n1 -2 3 0").unwrap().formula;
        assert_eq!(a, b);
        let c = a.clauses().next().unwrap();
        assert_eq!(c.literals().map(Literal::to_dimacs), [1, -2, 3]);
    }

    #[test]
    fn worked_example_has_twelve_clauses() {
        let p = parse_dimacs(fixture::EXAMPLE_DIMACS).unwrap();
        assert_eq!(p.formula.num_vars(), 4);
        assert_eq!(p.formula.len(), 12);
        assert_eq!(p.declared_clauses, 12);
    }

    #[test]
    fn tolerates_whitespace_comments_and_split_clauses() {
        let text = "c hello\n\n  p  cnf 4 2 \n 1 -2\n  3 0 2 3\n4 0\n";
        let f = parse_dimacs(text).unwrap().formula;
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn counts_duplicates() {
        let p = parse_dimacs("p cnf 3 2\n1 2 3 0\n3 2 1 0\n").unwrap();
        assert_eq!(p.formula.len(), 1);
        assert_eq!(p.duplicates_dropped, 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(parse_dimacs("1 2 3 0\n"), Err(ParseError::MissingHeader));
        assert_eq!(parse_dimacs(""), Err(ParseError::MissingHeader));
        assert!(matches!(
            parse_dimacs("p cnf x 1\n"),
            Err(ParseError::MalformedHeader { line: 1, .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 3 1\n1 -1 2 0\n"),
            Err(ParseError::RepeatedVariable { clause_index: 1, .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 3 2\n1 2 3 0\n1 2 0\n"),
            Err(ParseError::ClauseWidth { clause_index: 2, found: 2, .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 4 1\n1 2 3 4 0\n"),
            Err(ParseError::ClauseWidth { clause_index: 1, found: 4, .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 3 1\n1 2 4 0\n"),
            Err(ParseError::VarOutOfRange { line: 2, column: 5, var: 4, .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 3 1\n1 2 3\n"),
            Err(ParseError::Unterminated { clause_index: 1, .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 3 1\n1 a 3 0\n"),
            Err(ParseError::InvalidToken { line: 2, column: 3, .. })
        ));
    }

    #[test]
    fn writes_dimacs() {
        let f = Formula::new(3, [clause(1, -2, 3)]).unwrap();
        assert_eq!(write_dimacs(&f), "p cnf 3 1\n1 -2 3 0\n");
        assert_eq!(write_dimacs(&Formula::empty(4)), "p cnf 4 0\n");
        let ex = write_dimacs(&fixture::example_formula());
        assert!(ex.starts_with("p cnf 4 12\n"));
        assert_eq!(ex.lines().count(), 13);
    }

    #[test]
    fn evaluates_worked_example() {
        let f = fixture::example_formula();
        let eval = |s: &str| f.evaluate(&s.parse().unwrap()).unwrap();
        assert!(eval("FTTT"));
        assert!(eval("FTFT"));
        assert!(!eval("TTTT"));
        assert_eq!(
            f.evaluate(&Assignment::all(3, true)),
            Err(FormulaError::LengthMismatch { got: 3, n: 4 })
        );
    }

    #[test]
    fn example_has_exactly_two_models() {
        // Brute force over all 16 assignments.
        let f = fixture::example_formula();
        let models: Vec<String> = (0..16u64)
            .map(|c| Assignment::from_code(4, c))
            .filter(|a| f.evaluate(a).unwrap())
            .map(|a| a.to_string())
            .collect();
        assert_eq!(models, ["FTFT", "FTTT"]);
    }

    #[test]
    fn inversion() {
        let f = Formula::new(3, [clause(1, -2, 3)]).unwrap();
        assert_eq!(f.invert(), Formula::new(3, [clause(-1, 2, -3)]).unwrap());
        assert_eq!(Formula::empty(5).invert(), Formula::empty(5));

        let ex = fixture::example_formula();
        let inv = invert_formula(&ex);
        assert_eq!(inv.len(), ex.len());
        for s in ["FTTT", "FTFT"] {
            let a: Assignment = s.parse().unwrap();
            assert!(inv.evaluate(&a.flipped()).unwrap());
        }
    }

    #[test]
    fn literal_order_puts_positive_first() {
        assert!(lit(1) < lit(-1));
        assert!(lit(-1) < lit(2));
    }

    #[test]
    fn clause_bits_follow_encoding() {
        let c = clause(1, -2, 3);
        assert_eq!(c.bits(), 0b101);
        assert_eq!(Clause3::from_triad_bits(c.triad(), 0b101), c);
    }

    #[test]
    fn assignment_codes() {
        let a: Assignment = "FTFT".parse().unwrap();
        assert_eq!(a.code(), 0b0101);
        assert_eq!(Assignment::from_code(4, 5), a);
        assert_eq!(a.to_dimacs_model(), "v -1 2 -3 4 0");
    }
}
