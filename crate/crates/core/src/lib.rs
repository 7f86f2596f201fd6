//! Complement-structure saturation for 3SAT.
//!
//! A formula over `n` variables is turned into a dense structure of C(n, 3)
//! rows, one per triad of variables, each holding the 3-literal patterns the
//! formula still allows there. Imposition, pair reduction and saturation
//! delete patterns without losing models; extraction then tries to read a
//! model off the saturated structure. The [`oracle`] and [`harness`] modules
//! check every step against exhaustive enumeration and fuzz the
//! completeness of the procedure.

pub mod cnf;
pub mod extraction;
pub mod fixture;
pub mod harness;
pub mod oracle;
pub mod saturation;
pub mod structure;

pub use cnf::{parse_dimacs, write_dimacs, Assignment, Clause3, Formula, Literal, VarId};
pub use extraction::{extract_assignment, Extraction, ExtractionFailure, FailureKind, Mode};
pub use harness::{classify, solve_with_method, MethodResult, MethodStatus, Outcome};
pub use saturation::{saturate, SaturationStats};
pub use structure::{AClausolaId, Structure, Triad};

/// Recorded in reports and counterexample bundles.
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
