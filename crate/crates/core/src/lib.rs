//! Decides whether a candidate branching datum for a branched cover of the
//! sphere by the sphere is realizable.
//!
//! The pipeline in [`engine`] checks the Riemann–Hurwitz count, applies the
//! divisibility filters of [`criteria`], reduces structured data to smaller
//! degree with [`reduction`], and falls back to the exhaustive monodromy
//! search in [`oracle`]. Every realizable verdict carries a certificate that
//! [`engine::verify`] re-checks from scratch.

pub mod cli;
pub mod corpus;
pub mod criteria;
pub mod engine;
pub mod error;
pub mod oracle;
pub mod partition;
pub mod perm;
pub mod reduction;
pub mod verdict;

pub use criteria::{
    corollary_filter, detect_structures, family_enumerate, family_generate, prop1_filter,
    songxu_decide, FilterReport, Rule, StructureMatch,
};
pub use engine::{scan, verify, Engine, EngineConfig, ScanMode, ScanReport};
pub use error::Error;
pub use oracle::{ConstellationWitness, SearchBudget};
pub use partition::{
    decompose, divide, enumerate_candidates, parse_datum, rh_defect, CandidateDatum, Decomposition,
    Partition,
};
pub use perm::{canonical_of_type, compose, cycle_type, Permutation};
pub use reduction::{children_thm1, children_thm2, children_thm3, replay, ReductionChain, ReductionStep, Theorem};
pub use verdict::{Certificate, Limit, Method, Status, Verdict};
