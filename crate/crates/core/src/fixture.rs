//! The 12-clause, 4-variable worked instance and its expected totals.
//!
//! The source text describing this instance mentions both 12 and 10 initial
//! clauses; the clause list itself has 12, which is what is embedded here.

use crate::cnf::{parse_dimacs, Clause3, Formula, Literal};
use crate::structure::{AClausolaId, Structure};

pub const EXAMPLE_DIMACS: &str = "c worked example: 4 variables, 12 clauses
c models: FTFT, FTTT
p cnf 4 12
1 2 3 0
1 2 -3 0
-1 2 3 0
-1 2 -3 0
-1 -2 3 0
-1 -2 -3 0
1 2 -4 0
1 -2 4 0
-1 2 4 0
-1 2 -4 0
-1 3 -4 0
2 3 -4 0
";

/// AClausole surviving saturation of the example, in canonical order.
pub const EXAMPLE_SATURATED: [[i64; 3]; 7] = [
    [-1, 2, 3],
    [-1, 2, -3],
    [-1, 2, 4],
    [-1, 3, 4],
    [-1, -3, 4],
    [2, 3, 4],
    [2, -3, 4],
];

pub const EXAMPLE_CI3SAT_COUNT: usize = 20;
pub const EXAMPLE_SATURATED_COUNT: usize = 7;
pub const EXAMPLE_LARGEST_3SAT: usize = 25;
pub const EXAMPLE_MODELS: [&str; 2] = ["FTFT", "FTTT"];

pub fn example_formula() -> Formula {
    parse_dimacs(EXAMPLE_DIMACS)
        .expect("embedded example parses")
        .formula
}

pub fn aclausola(lits: [i64; 3]) -> AClausolaId {
    AClausolaId::from_literals(lits.map(|l| Literal::from_dimacs(l).expect("non-zero")))
        .expect("distinct variables")
}

/// The 7-AClausola structure listed for the example.
pub fn saturated_example() -> Structure {
    let mut s = Structure::from_rows(4, vec![0; 4]).expect("4 rows");
    for lits in EXAMPLE_SATURATED {
        let a = aclausola(lits);
        let m = s.row(a.triad).expect("in range");
        s.set_row(a.triad, m | 1 << a.bits).expect("in range");
    }
    s
}

/// All 8 clauses on triad (1, 2, 3), over `n` variables.
pub fn full_triad_formula(n: usize) -> Formula {
    let triad = crate::structure::Triad::from_indices(1, 2, 3).expect("valid");
    Formula::new(n, (0..8).map(|b| Clause3::from_triad_bits(triad, b))).expect("n >= 3")
}

#[cfg(test)]
pub(crate) fn var(i: u32) -> crate::cnf::VarId {
    crate::cnf::VarId::new(i).expect("non-zero")
}
