//! The complement structure: one row per triad of variables, each row an
//! 8-bit mask of the AClausole (3-literal conjunctions) still allowed.
//!
//! Bit encoding, fixed across the crate: within the row of triad `(i, j, k)`,
//! bit index `b` has bit 2 for variable `i`, bit 1 for `j`, bit 0 for `k`,
//! and a set bit means the literal is positive. An assignment satisfies a
//! row iff the row contains the assignment's pattern on that triad, and the
//! clause with bits `c` corresponds to the AClausola `c ^ 0b111`.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Assignment, Clause3, Formula, Literal, VarId};

pub const FULL_ROW: u8 = 0xFF;

/// Default variable limit for exhaustive solution enumeration.
pub const ENUMERATION_GUARD: usize = 20;

/// Bits of the row whose literal at position `p` has polarity `pol`.
/// Indexed `[position][positive as usize]`.
const KEEP: [[u8; 2]; 3] = [[0x0F, 0xF0], [0x33, 0xCC], [0x55, 0xAA]];

/// Position pairs inside a triad, in literal order.
const POSITION_PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("triad {triad} does not fit in {n} variables")]
    TriadOutOfRange { triad: Triad, n: usize },
    #[error("variable {var} out of range for {n} variables")]
    VarOutOfRange { var: VarId, n: usize },
    #[error("expected {expected} rows for {n} variables, got {got}")]
    RowCount { n: usize, expected: usize, got: usize },
    #[error("AClausola {0} is not present")]
    AClausolaAbsent(AClausolaId),
    #[error("variable {var} is not in triad {triad}")]
    VarNotInTriad { var: VarId, triad: Triad },
    #[error("pair {0} must join two distinct variables in ascending order")]
    InvalidPair(PairKey),
    #[error("sub-structure needs at least 3 distinct variables, got {0}")]
    SubsetTooSmall(usize),
    #[error("{n} variables exceeds the enumeration guard of {guard}")]
    GuardExceeded { n: usize, guard: usize },
    #[error("structure has an empty row at {0}")]
    EmptyRow(Triad),
}

/// Three variables `i < j < k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triad([VarId; 3]);

impl Triad {
    pub fn new(i: VarId, j: VarId, k: VarId) -> Option<Self> {
        (i < j && j < k).then_some(Triad([i, j, k]))
    }

    /// Sorts three distinct variables into a triad.
    pub fn sorted(mut vars: [VarId; 3]) -> Option<Self> {
        vars.sort();
        Triad::new(vars[0], vars[1], vars[2])
    }

    pub fn from_indices(i: u32, j: u32, k: u32) -> Option<Self> {
        Triad::new(VarId::new(i)?, VarId::new(j)?, VarId::new(k)?)
    }

    fn from_positions(a: usize, b: usize, c: usize) -> Self {
        Triad([VarId::from_pos(a), VarId::from_pos(b), VarId::from_pos(c)])
    }

    pub fn vars(&self) -> [VarId; 3] {
        self.0
    }

    /// Position (0, 1 or 2) of `v` inside the triad.
    pub fn position_of(&self, v: VarId) -> Option<usize> {
        self.0.iter().position(|&x| x == v)
    }

    /// Lexicographic rank among all triads over `n` variables.
    pub fn rank(&self, n: usize) -> Result<usize, StructureError> {
        if self.0[2].get() as usize > n {
            return Err(StructureError::TriadOutOfRange { triad: *self, n });
        }
        Ok(rank_of(n, self.0[0].pos(), self.0[1].pos(), self.0[2].pos()))
    }

    pub fn unrank(rank: usize, n: usize) -> Option<Self> {
        if rank >= num_triads(n) {
            return None;
        }
        triads(n).nth(rank)
    }
}

impl fmt::Display for Triad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

pub fn triad_rank(t: Triad, n: usize) -> Result<usize, StructureError> {
    t.rank(n)
}

fn choose2(x: usize) -> usize {
    if x < 2 {
        0
    } else {
        x * (x - 1) / 2
    }
}

fn choose3(x: usize) -> usize {
    if x < 3 {
        0
    } else {
        x * (x - 1) * (x - 2) / 6
    }
}

/// C(n, 3).
pub fn num_triads(n: usize) -> usize {
    choose3(n)
}

/// Size of the AClausola (and clause) universe, 8·C(n, 3).
pub fn universe_size(n: usize) -> usize {
    8 * choose3(n)
}

/// Rank of zero-based `a < b < c`.
#[inline]
fn rank_of(n: usize, a: usize, b: usize, c: usize) -> usize {
    choose3(n) - choose3(n - a) + choose2(n - a - 1) - choose2(n - b) + (c - b - 1)
}

/// All triads over `n` variables in row order.
pub fn triads(n: usize) -> impl Iterator<Item = Triad> {
    (0..n).flat_map(move |a| {
        (a + 1..n).flat_map(move |b| (b + 1..n).map(move |c| Triad::from_positions(a, b, c)))
    })
}

/// Sorted zero-based triad made of the pair `(u, v)` and a third variable
/// `w`, with the positions of `u` and `v` inside it.
#[inline]
fn triad_with(u: usize, v: usize, w: usize) -> ([usize; 3], usize, usize) {
    debug_assert!(u < v);
    if w < u {
        ([w, u, v], 1, 2)
    } else if w < v {
        ([u, w, v], 0, 2)
    } else {
        ([u, v, w], 0, 1)
    }
}

/// One AClausola: a triad plus its polarity bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AClausolaId {
    pub triad: Triad,
    pub bits: u8,
}

impl AClausolaId {
    pub fn new(triad: Triad, bits: u8) -> Self {
        debug_assert!(bits < 8);
        AClausolaId { triad, bits }
    }

    pub fn from_literals(lits: [Literal; 3]) -> Option<Self> {
        let c = Clause3::new(lits).ok()?;
        Some(AClausolaId::new(c.triad(), c.bits()))
    }

    pub fn literals(&self) -> [Literal; 3] {
        *Clause3::from_triad_bits(self.triad, self.bits).literals()
    }
}

impl fmt::Display for AClausolaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.literals();
        write!(f, "[{a} {b} {c}]")
    }
}

/// A pair of literals on distinct variables, first variable lower.
///
/// Ordered by the two variables, then positive before negative on the first
/// literal, then on the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairKey {
    pub first: Literal,
    pub second: Literal,
}

impl PairKey {
    fn sort_key(&self) -> (VarId, VarId, bool, bool) {
        (self.first.var, self.second.var, !self.first.positive, !self.second.positive)
    }
}

impl Ord for PairKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for PairKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl PairKey {
    pub fn new(first: Literal, second: Literal) -> Option<Self> {
        (first.var < second.var).then_some(PairKey { first, second })
    }

    #[cfg(test)]
    fn id(&self, n: usize) -> usize {
        let code = (usize::from(!self.first.positive) << 1) | usize::from(!self.second.positive);
        pair_id(n, self.first.var.pos(), self.second.var.pos(), code)
    }

    fn from_id(n: usize, id: usize) -> Self {
        let q = id % 4;
        let uv = id / 4;
        let (u, v) = (uv / n, uv % n);
        PairKey {
            first: Literal::new(VarId::from_pos(u), q & 2 == 0),
            second: Literal::new(VarId::from_pos(v), q & 1 == 0),
        }
    }
}

impl fmt::Display for PairKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.first, self.second)
    }
}

/// Polarity code 0 = (+,+), 1 = (+,-), 2 = (-,+), 3 = (-,-), so ascending id
/// is pair order.
#[inline]
fn pair_id(n: usize, u: usize, v: usize, q: usize) -> usize {
    (u * n + v) * 4 + q
}

#[inline]
fn pair_mask(p: usize, q: usize, code: usize) -> u8 {
    KEEP[p][usize::from(code & 2 == 0)] & KEEP[q][usize::from(code & 1 == 0)]
}

/// Whether `row` (over `triad`) has an AClausola extending `pair`.
pub fn pair_supported(row: u8, triad: Triad, pair: PairKey) -> Result<bool, StructureError> {
    let p = triad.position_of(pair.first.var).ok_or(StructureError::VarNotInTriad {
        var: pair.first.var,
        triad,
    })?;
    let q = triad.position_of(pair.second.var).ok_or(StructureError::VarNotInTriad {
        var: pair.second.var,
        triad,
    })?;
    let mask = KEEP[p][usize::from(pair.first.positive)] & KEEP[q][usize::from(pair.second.positive)];
    Ok(row & mask != 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeletionReason {
    Imposed { literal: Literal },
    BannedPair { pair: PairKey },
    SaturationTest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deletion {
    pub aclausola: AClausolaId,
    pub reason: DeletionReason,
}

/// Ordered audit trail of removed AClausole.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeletionLog {
    pub entries: Vec<Deletion>,
}

impl DeletionLog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn extend(&mut self, other: DeletionLog) {
        self.entries.extend(other.entries);
    }

    fn record(&mut self, triad: Triad, removed: u8, reason: DeletionReason) {
        for bits in (0..8u8).rev().filter(|b| removed >> b & 1 == 1) {
            self.entries.push(Deletion {
                aclausola: AClausolaId::new(triad, bits),
                reason,
            });
        }
    }

    /// Applies every logged deletion to `s`, failing on an entry that is
    /// not present at its turn.
    pub fn replay(&self, s: &Structure) -> Result<Structure, StructureError> {
        let mut out = s.clone();
        for d in &self.entries {
            out.remove(d.aclausola)?;
        }
        Ok(out)
    }
}

/// Result of [`Structure::reduce`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub structure: Structure,
    pub log: DeletionLog,
    /// First row that became (or already was) empty; reduction halts there.
    pub empty: Option<Triad>,
}

/// A polarity mismatch: `var` has different polarity sets in two
/// rows that both contain it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarityViolation {
    pub var: VarId,
    pub row_a: Triad,
    pub polarities_a: Polarities,
    pub row_b: Triad,
    pub polarities_b: Polarities,
}

/// Which literals of a variable occur in a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Polarities {
    pub positive: bool,
    pub negative: bool,
}

impl Polarities {
    pub fn both(&self) -> bool {
        self.positive && self.negative
    }

    /// The single occurring polarity, if exactly one occurs.
    pub fn single(&self) -> Option<bool> {
        match (self.positive, self.negative) {
            (true, false) => Some(true),
            (false, true) => Some(false),
            _ => None,
        }
    }
}

/// Dense array of C(n, 3) rows indexed by triad rank.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Structure {
    n: usize,
    rows: Vec<u8>,
}

impl Structure {
    /// Every row full: no clause excluded.
    pub fn full(n: usize) -> Self {
        Structure {
            n,
            rows: vec![FULL_ROW; num_triads(n)],
        }
    }

    pub fn from_rows(n: usize, rows: Vec<u8>) -> Result<Self, StructureError> {
        let expected = num_triads(n);
        if rows.len() != expected {
            return Err(StructureError::RowCount {
                n,
                expected,
                got: rows.len(),
            });
        }
        Ok(Structure { n, rows })
    }

    /// Rows hold the AClausole whose same-literal clause is absent from `f`.
    pub fn build_complement(f: &Formula) -> Self {
        let mut s = Structure::full(f.num_vars());
        for c in f.clauses() {
            let r = s.rank(c.triad());
            s.rows[r] &= !(1 << c.bits());
        }
        s
    }

    /// Complement of the inverted formula. Its solutions are exactly the
    /// models of `f`.
    pub fn build_ci3sat(f: &Formula) -> Self {
        let mut s = Structure::full(f.num_vars());
        for c in f.clauses() {
            let r = s.rank(c.triad());
            s.rows[r] &= !(1 << (c.bits() ^ 0b111));
        }
        s
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[u8] {
        &self.rows
    }

    fn rank(&self, t: Triad) -> usize {
        rank_of(self.n, t.0[0].pos(), t.0[1].pos(), t.0[2].pos())
    }

    pub fn row(&self, t: Triad) -> Result<u8, StructureError> {
        Ok(self.rows[t.rank(self.n)?])
    }

    pub fn set_row(&mut self, t: Triad, mask: u8) -> Result<(), StructureError> {
        let r = t.rank(self.n)?;
        self.rows[r] = mask;
        Ok(())
    }

    pub fn contains(&self, a: AClausolaId) -> bool {
        a.triad
            .rank(self.n)
            .map(|r| self.rows[r] >> a.bits & 1 == 1)
            .unwrap_or(false)
    }

    pub fn remove(&mut self, a: AClausolaId) -> Result<(), StructureError> {
        if !self.contains(a) {
            return Err(StructureError::AClausolaAbsent(a));
        }
        let r = self.rank(a.triad);
        self.rows[r] &= !(1 << a.bits);
        Ok(())
    }

    pub fn count_aclausole(&self) -> usize {
        self.rows.iter().map(|m| m.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.contains(&0)
    }

    /// Lowest-rank empty row.
    pub fn first_empty_triad(&self) -> Option<Triad> {
        let r = self.rows.iter().position(|&m| m == 0)?;
        Triad::unrank(r, self.n)
    }

    /// Present AClausole in canonical order: row order, then descending bits
    /// (positive literals first).
    pub fn aclausole(&self) -> impl Iterator<Item = AClausolaId> + '_ {
        triads(self.n).zip(self.rows.iter()).flat_map(|(t, &mask)| {
            (0..8u8)
                .rev()
                .filter(move |b| mask >> b & 1 == 1)
                .map(move |b| AClausolaId::new(t, b))
        })
    }

    fn check_var(&self, v: VarId) -> Result<(), StructureError> {
        if v.get() as usize > self.n {
            return Err(StructureError::VarOutOfRange { var: v, n: self.n });
        }
        Ok(())
    }

    /// Calls `f(rank, triad_positions, position_of_v)` for every row containing `v`.
    fn for_rows_with(&self, v: usize, mut f: impl FnMut(usize, [usize; 3], usize)) {
        let n = self.n;
        for a in 0..n {
            if a == v {
                continue;
            }
            for b in a + 1..n {
                if b == v {
                    continue;
                }
                let (t, p) = if v < a {
                    ([v, a, b], 0)
                } else if v < b {
                    ([a, v, b], 1)
                } else {
                    ([a, b, v], 2)
                };
                f(rank_of(n, t[0], t[1], t[2]), t, p);
            }
        }
    }

    /// Removes every AClausola carrying the negation of `lit`. Returns the
    /// number of deletions.
    pub fn impose_in_place(&mut self, lit: Literal, mut log: Option<&mut DeletionLog>) -> usize {
        let v = lit.var.pos();
        assert!(v < self.n, "literal {lit} out of range for {} variables", self.n);
        let mut rows = std::mem::take(&mut self.rows);
        let mut deleted = 0;
        self.for_rows_with(v, |r, t, p| {
            let removed = rows[r] & !KEEP[p][usize::from(lit.positive)];
            if removed != 0 {
                rows[r] &= !removed;
                deleted += removed.count_ones() as usize;
                if let Some(log) = log.as_deref_mut() {
                    log.record(
                        Triad::from_positions(t[0], t[1], t[2]),
                        removed,
                        DeletionReason::Imposed { literal: lit },
                    );
                }
            }
        });
        self.rows = rows;
        deleted
    }

    pub fn impose(&self, lit: Literal) -> Result<(Structure, DeletionLog), StructureError> {
        self.check_var(lit.var)?;
        let mut out = self.clone();
        let mut log = DeletionLog::default();
        out.impose_in_place(lit, Some(&mut log));
        Ok((out, log))
    }

    /// Runs reduction to its fixpoint, or until a row empties. Returns the
    /// first empty row, if any, and the number of deletions.
    pub fn reduce_in_place(&mut self, mut log: Option<&mut DeletionLog>) -> (Option<Triad>, usize) {
        if let Some(t) = self.first_empty_triad() {
            return (Some(t), 0);
        }
        let n = self.n;
        if n < 3 {
            return (None, 0);
        }
        let mut banned = vec![false; n * n * 4];

        // Seed with every pair unsupported in some row, queued in pair order.
        for (t, &mask) in triads(n).zip(self.rows.iter()) {
            let pos = [t.0[0].pos(), t.0[1].pos(), t.0[2].pos()];
            for &(p, q) in &POSITION_PAIRS {
                for code in 0..4 {
                    if mask & pair_mask(p, q, code) == 0 {
                        banned[pair_id(n, pos[p], pos[q], code)] = true;
                    }
                }
            }
        }
        let mut queue: VecDeque<usize> = banned
            .iter()
            .enumerate()
            .filter_map(|(id, &b)| b.then_some(id))
            .collect();

        let mut deleted = 0usize;
        while let Some(id) = queue.pop_front() {
            let code = id % 4;
            let u = id / 4 / n;
            let v = id / 4 % n;
            for w in 0..n {
                if w == u || w == v {
                    continue;
                }
                let (t, pu, pv) = triad_with(u, v, w);
                let r = rank_of(n, t[0], t[1], t[2]);
                let removed = self.rows[r] & pair_mask(pu, pv, code);
                if removed == 0 {
                    continue;
                }
                self.rows[r] &= !removed;
                deleted += removed.count_ones() as usize;
                let triad = Triad::from_positions(t[0], t[1], t[2]);
                if let Some(log) = log.as_deref_mut() {
                    log.record(
                        triad,
                        removed,
                        DeletionReason::BannedPair {
                            pair: PairKey::from_id(n, id),
                        },
                    );
                }
                let mask = self.rows[r];
                if mask == 0 {
                    return (Some(triad), deleted);
                }
                for &(p, q) in &POSITION_PAIRS {
                    for c in 0..4 {
                        if mask & pair_mask(p, q, c) == 0 {
                            let pid = pair_id(n, t[p], t[q], c);
                            if !banned[pid] {
                                banned[pid] = true;
                                queue.push_back(pid);
                            }
                        }
                    }
                }
            }
        }
        (None, deleted)
    }

    pub fn reduce(&self) -> Reduction {
        let mut structure = self.clone();
        let mut log = DeletionLog::default();
        let (empty, _) = structure.reduce_in_place(Some(&mut log));
        Reduction {
            structure,
            log,
            empty,
        }
    }

    /// Polarities of `v` occurring in each row that contains it, in row order.
    pub fn polarities_of(&self, v: VarId) -> Vec<(Triad, Polarities)> {
        let mut out = Vec::new();
        if v.pos() >= self.n {
            return out;
        }
        self.for_rows_with(v.pos(), |r, t, p| {
            let mask = self.rows[r];
            out.push((
                Triad::from_positions(t[0], t[1], t[2]),
                Polarities {
                    positive: mask & KEEP[p][1] != 0,
                    negative: mask & KEEP[p][0] != 0,
                },
            ));
        });
        out.sort_by_key(|(t, _)| *t);
        out
    }

    /// Polarities of `v` across the whole structure.
    pub fn polarity_union(&self, v: VarId) -> Polarities {
        self.polarities_of(v)
            .into_iter()
            .fold(Polarities::default(), |acc, (_, p)| Polarities {
                positive: acc.positive || p.positive,
                negative: acc.negative || p.negative,
            })
    }

    /// Every variable must show the same polarity set in every row containing
    /// it. Each violation compares a row against the variable's first row.
    pub fn check_theorem7(&self) -> Result<Vec<PolarityViolation>, StructureError> {
        if let Some(t) = self.first_empty_triad() {
            return Err(StructureError::EmptyRow(t));
        }
        let mut violations = Vec::new();
        for p in 0..self.n {
            let var = VarId::from_pos(p);
            let rows = self.polarities_of(var);
            let Some(&(first, first_pol)) = rows.first() else {
                continue;
            };
            for &(t, pol) in &rows[1..] {
                if pol != first_pol {
                    violations.push(PolarityViolation {
                        var,
                        row_a: first,
                        polarities_a: first_pol,
                        row_b: t,
                        polarities_b: pol,
                    });
                }
            }
        }
        Ok(violations)
    }

    /// Whether `a` picks a present AClausola in every row.
    pub fn is_solved_by(&self, a: &Assignment) -> bool {
        triads(self.n)
            .zip(self.rows.iter())
            .all(|(t, &mask)| mask >> a.pattern_on(t) & 1 == 1)
    }

    /// All assignments selecting a present AClausola in every row, ascending.
    pub fn solutions(&self, guard: usize) -> Result<Vec<Assignment>, StructureError> {
        if self.n > guard {
            return Err(StructureError::GuardExceeded { n: self.n, guard });
        }
        let mut out = Vec::new();
        if self.is_empty() {
            return Ok(out);
        }
        let mut values = vec![false; self.n];
        self.extend_solutions(0, &mut values, &mut out);
        Ok(out)
    }

    fn extend_solutions(&self, depth: usize, values: &mut Vec<bool>, out: &mut Vec<Assignment>) {
        if depth == self.n {
            out.push(Assignment::new(values.clone()));
            return;
        }
        for value in [false, true] {
            values[depth] = value;
            // Rows whose last variable is `depth` are now fully decided.
            let consistent = (0..depth).all(|a| {
                (a + 1..depth).all(|b| {
                    let pattern = (u8::from(values[a]) << 2) | (u8::from(values[b]) << 1) | u8::from(value);
                    self.rows[rank_of(self.n, a, b, depth)] >> pattern & 1 == 1
                })
            });
            if consistent {
                self.extend_solutions(depth + 1, values, out);
            }
        }
    }

    /// Rows whose triads lie inside `vars`, re-indexed to `1..=m` in order.
    pub fn extract_substructure(&self, vars: &[VarId]) -> Result<Structure, StructureError> {
        let mut vs = vars.to_vec();
        vs.sort();
        vs.dedup();
        if vs.len() < 3 {
            return Err(StructureError::SubsetTooSmall(vs.len()));
        }
        for &v in &vs {
            self.check_var(v)?;
        }
        let m = vs.len();
        let rows = triads(m)
            .map(|t| {
                let [a, b, c] = t.vars().map(|x| vs[x.pos()]);
                self.rows[rank_of(self.n, a.pos(), b.pos(), c.pos())]
            })
            .collect();
        Ok(Structure { n: m, rows })
    }

    /// Maps back to clause space: clause `c` is present iff AClausola
    /// `c ^ 0b111` is absent.
    pub fn largest_equivalent_3sat(&self) -> Formula {
        let clauses: Vec<Clause3> = triads(self.n)
            .zip(self.rows.iter())
            .flat_map(|(t, &mask)| {
                (0..8u8)
                    .filter(move |c| mask >> (c ^ 0b111) & 1 == 0)
                    .map(move |c| Clause3::from_triad_bits(t, c))
            })
            .collect();
        Formula::new(self.n, clauses).expect("clauses built from in-range triads")
    }

    /// Toggles the polarity of `v` in every row containing it.
    pub fn flip_variable_in_place(&mut self, v: VarId) {
        let p = v.pos();
        assert!(p < self.n, "variable {v} out of range");
        let mut rows = std::mem::take(&mut self.rows);
        self.for_rows_with(p, |r, _, pos| {
            let bit = 1u8 << (2 - pos);
            let mask = rows[r];
            rows[r] = (0..8u8)
                .filter(|b| mask >> b & 1 == 1)
                .fold(0u8, |acc, b| acc | 1 << (b ^ bit));
        });
        self.rows = rows;
    }

    /// One line per non-full row: `i j k : b7..b0`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (t, &mask) in triads(self.n).zip(self.rows.iter()) {
            if mask != FULL_ROW {
                let [i, j, k] = t.vars();
                out.push_str(&format!("{i} {j} {k} : {mask:08b}\n"));
            }
        }
        out
    }
}

pub fn build_complement(f: &Formula) -> Structure {
    Structure::build_complement(f)
}

pub fn build_ci3sat(f: &Formula) -> Structure {
    Structure::build_ci3sat(f)
}

pub fn impose(s: &Structure, lit: Literal) -> Result<(Structure, DeletionLog), StructureError> {
    s.impose(lit)
}

pub fn reduce(s: &Structure) -> Reduction {
    s.reduce()
}

pub fn solutions_of_structure(s: &Structure) -> Result<Vec<Assignment>, StructureError> {
    s.solutions(ENUMERATION_GUARD)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Formula;
    use crate::fixture;

    fn t(i: u32, j: u32, k: u32) -> Triad {
        Triad::from_indices(i, j, k).unwrap()
    }

    fn v(i: u32) -> VarId {
        VarId::new(i).unwrap()
    }

    fn lit(x: i64) -> Literal {
        Literal::from_dimacs(x).unwrap()
    }

    fn mask(bits: &[u8]) -> u8 {
        bits.iter().fold(0, |m, b| m | 1 << b)
    }

    /// Assignments solving `s`, by plain scan over all codes.
    fn scan_solutions(s: &Structure) -> Vec<String> {
        let n = s.num_vars();
        (0..1u64 << n)
            .map(|c| Assignment::from_code(n, c))
            .filter(|a| s.is_solved_by(a))
            .map(|a| a.to_string())
            .collect()
    }

    /// Naive reduction: rescan everything until nothing changes.
    fn naive_reduce(s: &Structure) -> Structure {
        let n = s.num_vars();
        let mut out = s.clone();
        loop {
            let mut changed = false;
            for u in 1..=n as u32 {
                for w in u + 1..=n as u32 {
                    for (pu, pw) in [(true, true), (true, false), (false, true), (false, false)] {
                        let pk = PairKey::new(Literal::new(v(u), pu), Literal::new(v(w), pw)).unwrap();
                        let rows: Vec<Triad> = triads(n)
                            .filter(|t| t.position_of(v(u)).is_some() && t.position_of(v(w)).is_some())
                            .collect();
                        let unsupported = rows
                            .iter()
                            .any(|&t| !pair_supported(out.row(t).unwrap(), t, pk).unwrap());
                        if unsupported {
                            for &t in &rows {
                                let m = out.row(t).unwrap();
                                let keep: u8 = (0..8u8)
                                    .filter(|&b| {
                                        m >> b & 1 == 1 && {
                                            let a = AClausolaId::new(t, b).literals();
                                            !(a.contains(&pk.first) && a.contains(&pk.second))
                                        }
                                    })
                                    .fold(0, |acc, b| acc | 1 << b);
                                if keep != m {
                                    out.set_row(t, keep).unwrap();
                                    changed = true;
                                }
                            }
                        }
                    }
                }
            }
            if !changed {
                return out;
            }
        }
    }

    #[test]
    fn ranks_follow_row_order() {
        assert_eq!(t(1, 2, 3).rank(4).unwrap(), 0);
        assert_eq!(t(1, 2, 4).rank(4).unwrap(), 1);
        assert_eq!(t(2, 3, 4).rank(4).unwrap(), 3);
        assert!(t(2, 3, 5).rank(4).is_err());
        for n in 3..12 {
            for (r, tr) in triads(n).enumerate() {
                assert_eq!(tr.rank(n).unwrap(), r);
                assert_eq!(Triad::unrank(r, n), Some(tr));
            }
            assert_eq!(triads(n).count(), num_triads(n));
        }
    }

    #[test]
    fn complement_counts() {
        let s = Structure::build_complement(&Formula::empty(4));
        assert!(s.rows().iter().all(|&m| m == FULL_ROW));
        assert_eq!(s.count_aclausole(), 32);
        assert_eq!(build_complement(&fixture::example_formula()).count_aclausole(), 20);

        let all = fixture::full_triad_formula(3);
        assert!(build_complement(&all).is_empty());
    }

    #[test]
    fn ci3sat_construction() {
        let ex = fixture::example_formula();
        let s = build_ci3sat(&ex);
        assert_eq!(s.count_aclausole(), 20);
        assert_eq!(s, build_complement(&ex.invert()));
        assert_eq!(build_ci3sat(&Formula::empty(4)), Structure::full(4));

        let one = crate::cnf::parse_dimacs("p cnf 3 1\n1 2 3 0\n").unwrap().formula;
        assert_eq!(build_ci3sat(&one).rows(), &[0xFE]);
    }

    #[test]
    fn emptiness() {
        let mut s = Structure::full(4);
        assert!(!s.is_empty());
        assert_eq!(s.first_empty_triad(), None);
        s.set_row(t(1, 2, 3), 0).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.first_empty_triad(), Some(t(1, 2, 3)));
        assert!(build_ci3sat(&fixture::full_triad_formula(4)).is_empty());
    }

    #[test]
    fn imposition() {
        let (s, log) = Structure::full(3).impose(lit(1)).unwrap();
        assert_eq!(s.rows(), &[mask(&[4, 5, 6, 7])]);
        assert_eq!(log.len(), 4);
        assert!(log.entries.iter().all(|d| matches!(d.reason, DeletionReason::Imposed { .. })));

        let (s, _) = Structure::full(4).impose(lit(1)).unwrap();
        let (s, _) = s.impose(lit(-1)).unwrap();
        for tr in triads(4) {
            let m = s.row(tr).unwrap();
            assert_eq!(m == 0, tr.position_of(v(1)).is_some(), "{tr}");
        }

        let sat = fixture::saturated_example();
        let (after, log) = sat.impose(lit(-1)).unwrap();
        assert_eq!(after, sat);
        assert!(log.is_empty());

        // idempotent
        let (once, _) = sat.impose(lit(3)).unwrap();
        let (twice, log) = once.impose(lit(3)).unwrap();
        assert_eq!(once, twice);
        assert!(log.is_empty());

        assert!(Structure::full(4).impose(lit(5)).is_err());
    }

    #[test]
    fn pair_support() {
        let tr = t(1, 2, 3);
        let only_ttt = mask(&[0b111]);
        let pk = |a, b| PairKey::new(lit(a), lit(b)).unwrap();
        assert!(pair_supported(only_ttt, tr, pk(1, 2)).unwrap());
        assert!(!pair_supported(only_ttt, tr, pk(1, -2)).unwrap());
        for a in [1, -1] {
            for b in [2, -2, 3, -3] {
                assert!(pair_supported(FULL_ROW, tr, pk(a, b)).unwrap());
            }
        }
        for a in [2, -2] {
            for b in [3, -3] {
                assert!(pair_supported(FULL_ROW, tr, pk(a, b)).unwrap());
            }
        }
        assert!(pair_supported(FULL_ROW, tr, pk(1, 4)).is_err());
    }

    #[test]
    fn pair_order_matches_ids() {
        let n = 5;
        let mut keys = Vec::new();
        for u in 1..=n as u32 {
            for w in u + 1..=n as u32 {
                for a in [true, false] {
                    for b in [true, false] {
                        keys.push(PairKey::new(Literal::new(v(u), a), Literal::new(v(w), b)).unwrap());
                    }
                }
            }
        }
        assert_eq!(keys.len(), 2 * n * (n - 1));
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        for w in keys.windows(2) {
            assert!(w[0].id(n) < w[1].id(n));
        }
        for k in keys {
            assert_eq!(PairKey::from_id(n, k.id(n)), k);
        }
    }

    #[test]
    fn reduction_single_pattern_row() {
        let mut s = Structure::full(4);
        s.set_row(t(1, 2, 3), mask(&[0b111])).unwrap();
        let red = s.reduce();
        assert_eq!(red.empty, None);
        // Frozen from naive_reduce and scan_solutions.
        assert_eq!(red.structure.rows(), &[0x80, 0xC0, 0xC0, 0xC0]);
        assert_eq!(red.structure, naive_reduce(&s));
        assert_eq!(scan_solutions(&red.structure), ["TTTF", "TTTT"]);
        assert_eq!(scan_solutions(&s), scan_solutions(&red.structure));
        assert_eq!(red.log.replay(&s).unwrap(), red.structure);
    }

    #[test]
    fn reduction_trivial_cases() {
        let full = Structure::full(5);
        let red = full.reduce();
        assert_eq!(red.structure, full);
        assert!(red.log.is_empty());

        let mut s = Structure::full(4);
        s.set_row(t(1, 3, 4), 0).unwrap();
        s.set_row(t(1, 2, 3), 0x01).unwrap();
        let red = s.reduce();
        assert_eq!(red.structure, s);
        assert_eq!(red.empty, Some(t(1, 3, 4)));
    }

    #[test]
    fn reduction_matches_naive_on_example() {
        let s = build_ci3sat(&fixture::example_formula());
        let red = s.reduce();
        assert_eq!(red.empty, None);
        assert_eq!(red.structure, naive_reduce(&s));
        assert_eq!(scan_solutions(&red.structure), ["FTFT", "FTTT"]);
        assert_eq!(red.structure.reduce().structure, red.structure);
    }

    #[test]
    fn polarity_checker() {
        assert!(fixture::saturated_example().check_theorem7().unwrap().is_empty());
        assert!(Structure::full(5).check_theorem7().unwrap().is_empty());

        let mut s = Structure::full(4);
        s.set_row(t(1, 2, 3), mask(&[0b111])).unwrap();
        s.set_row(t(1, 2, 4), mask(&[0b011])).unwrap();
        let violations = s.check_theorem7().unwrap();
        assert!(violations.iter().any(|x| x.var == v(1)));
        assert!(violations.iter().any(|x| x.var == v(2)));

        let mut e = Structure::full(4);
        e.set_row(t(2, 3, 4), 0).unwrap();
        assert_eq!(e.check_theorem7(), Err(StructureError::EmptyRow(t(2, 3, 4))));
    }

    #[test]
    fn counts_and_solutions() {
        assert_eq!(Structure::full(4).count_aclausole(), 32);
        assert_eq!(fixture::saturated_example().count_aclausole(), 7);

        let all = solutions_of_structure(&Structure::full(4)).unwrap();
        assert_eq!(all.len(), 16);
        let sols: Vec<String> = solutions_of_structure(&build_ci3sat(&fixture::example_formula()))
            .unwrap()
            .iter()
            .map(|a| a.to_string())
            .collect();
        assert_eq!(sols, ["FTFT", "FTTT"]);

        let mut e = Structure::full(4);
        e.set_row(t(1, 2, 4), 0).unwrap();
        assert!(solutions_of_structure(&e).unwrap().is_empty());
        assert!(matches!(
            Structure::full(21).solutions(ENUMERATION_GUARD),
            Err(StructureError::GuardExceeded { n: 21, .. })
        ));
    }

    #[test]
    fn substructures() {
        let sat = fixture::saturated_example();
        let all = sat.extract_substructure(&[v(1), v(2), v(3), v(4)]).unwrap();
        assert_eq!(all, sat);

        let sub = sat.extract_substructure(&[v(4), v(2), v(3)]).unwrap();
        assert_eq!(sub.num_vars(), 3);
        assert_eq!(sub.rows(), &[mask(&[0b111, 0b101])]);

        let full = Structure::full(6);
        let sub = full.extract_substructure(&[v(2), v(5), v(6)]).unwrap();
        assert_eq!(sub.rows(), &[FULL_ROW]);
        assert_eq!(
            full.extract_substructure(&[v(1), v(1), v(2)]),
            Err(StructureError::SubsetTooSmall(2))
        );

        let mut s = Structure::full(5);
        s.set_row(t(2, 4, 5), 0x3C).unwrap();
        let sub = s.extract_substructure(&[v(2), v(3), v(4), v(5)]).unwrap();
        assert_eq!(sub.row(t(1, 3, 4)).unwrap(), 0x3C);
    }

    #[test]
    fn largest_formula() {
        let f = fixture::saturated_example().largest_equivalent_3sat();
        assert_eq!(f.len(), 25);
        let models: Vec<String> = (0..16)
            .map(|c| Assignment::from_code(4, c))
            .filter(|a| f.evaluate(a).unwrap())
            .map(|a| a.to_string())
            .collect();
        assert_eq!(models, ["FTFT", "FTTT"]);

        let mut e = Structure::full(4);
        e.set_row(t(1, 3, 4), 0).unwrap();
        let f = e.largest_equivalent_3sat();
        assert_eq!(f.len(), 8);
        assert!(f.clauses().all(|c| c.triad() == t(1, 3, 4)));
        assert!(Structure::full(4).largest_equivalent_3sat().is_empty());
    }

    #[test]
    fn flips() {
        let mut s = Structure::full(3);
        s.set_row(t(1, 2, 3), mask(&[0b011])).unwrap();
        s.flip_variable_in_place(v(1));
        assert_eq!(s.rows(), &[mask(&[0b111])]);
        s.flip_variable_in_place(v(1));
        assert_eq!(s.rows(), &[mask(&[0b011])]);
    }

    #[test]
    fn dump_format() {
        let d = fixture::saturated_example().dump();
        assert_eq!(
            d,
            "1 2 3 : 00001100\n1 2 4 : 00001000\n1 3 4 : 00001010\n2 3 4 : 10100000\n"
        );
        assert_eq!(Structure::full(4).dump(), "");
    }

    #[test]
    fn canonical_iteration_order() {
        let ids: Vec<String> = fixture::saturated_example().aclausole().map(|a| a.to_string()).collect();
        assert_eq!(
            ids,
            [
                "[~A1 A2 A3]",
                "[~A1 A2 ~A3]",
                "[~A1 A2 A4]",
                "[~A1 A3 A4]",
                "[~A1 ~A3 A4]",
                "[A2 A3 A4]",
                "[A2 ~A3 A4]"
            ]
        );
    }
}
