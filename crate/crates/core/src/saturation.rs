//! Saturation: delete every AClausola whose three literals, imposed together
//! and followed by reduction, empty the structure. Repeats until a full pass
//! deletes nothing or a row empties.

use serde::{Deserialize, Serialize};

use crate::structure::{
    triads, universe_size, AClausolaId, DeletionLog, DeletionReason, Deletion, Structure,
    StructureError, Triad,
};

/// Operation counters for one saturation run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaturationStats {
    pub passes: u64,
    pub tests_run: u64,
    /// Direct deletions plus everything the follow-up reductions removed.
    pub aclausole_deleted: u64,
    pub reduce_calls: u64,
    pub impose_calls: u64,
}

impl SaturationStats {
    /// Checks `passes <= 8·C(n,3) + 1` and `aclausole_deleted <= 8·C(n,3)`.
    pub fn within_bounds(&self, n: usize) -> bool {
        let universe = universe_size(n) as u64;
        self.passes <= universe + 1 && self.aclausole_deleted <= universe
    }
}

/// When to start the next pass after a deletion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanPolicy {
    /// Finish the pass, deletions taking effect immediately; rescan if any.
    #[default]
    FullPass,
    /// Abandon the pass at the first deletion and rescan from the start.
    RestartOnDeletion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Saturated {
    pub structure: Structure,
    pub stats: SaturationStats,
    pub log: DeletionLog,
    /// First empty row, when saturation ended by emptying the structure.
    pub empty: Option<Triad>,
}

fn wipes_out(s: &Structure, a: AClausolaId, stats: &mut SaturationStats) -> bool {
    if s.is_empty() {
        return true;
    }
    let mut trial = s.clone();
    for lit in a.literals() {
        trial.impose_in_place(lit, None);
        stats.impose_calls += 1;
    }
    stats.reduce_calls += 1;
    trial.reduce_in_place(None).0.is_some()
}

/// Imposes the three literals of `a` on a copy of `s`, reduces, and reports
/// whether the copy ended up empty. `s` is untouched.
pub fn test_imposition(s: &Structure, a: AClausolaId) -> Result<bool, StructureError> {
    if !s.contains(a) {
        return Err(StructureError::AClausolaAbsent(a));
    }
    Ok(wipes_out(s, a, &mut SaturationStats::default()))
}

pub fn saturate(s: &Structure) -> Saturated {
    saturate_with(s, ScanPolicy::FullPass)
}

pub fn saturate_with(s: &Structure, policy: ScanPolicy) -> Saturated {
    let mut cur = s.clone();
    let mut stats = SaturationStats::default();
    let mut log = DeletionLog::default();
    if let Some(t) = cur.first_empty_triad() {
        return Saturated {
            structure: cur,
            stats,
            log,
            empty: Some(t),
        };
    }
    let n = cur.num_vars();

    loop {
        stats.passes += 1;
        let mut deleted = false;
        'scan: for (r, triad) in triads(n).enumerate() {
            for bits in (0..8u8).rev() {
                if cur.rows()[r] >> bits & 1 == 0 {
                    continue;
                }
                let a = AClausolaId::new(triad, bits);
                stats.tests_run += 1;
                if !wipes_out(&cur, a, &mut stats) {
                    continue;
                }
                cur.remove(a).expect("tested AClausola is present");
                log.entries.push(Deletion {
                    aclausola: a,
                    reason: DeletionReason::SaturationTest,
                });
                stats.aclausole_deleted += 1;
                stats.reduce_calls += 1;
                let (empty, removed) = cur.reduce_in_place(Some(&mut log));
                stats.aclausole_deleted += removed as u64;
                deleted = true;
                let empty = empty.or_else(|| cur.first_empty_triad());
                if empty.is_some() {
                    return Saturated {
                        structure: cur,
                        stats,
                        log,
                        empty,
                    };
                }
                if policy == ScanPolicy::RestartOnDeletion {
                    break 'scan;
                }
            }
        }
        if !deleted {
            return Saturated {
                structure: cur,
                stats,
                log,
                empty: None,
            };
        }
    }
}

/// Whether no present AClausola of `s` fails its imposition test.
pub fn is_saturated(s: &Structure) -> bool {
    s.is_empty() || s.aclausole().all(|a| !wipes_out(s, a, &mut SaturationStats::default()))
}
