//! Exact computation in self-similar groups acting on a rooted regular tree.

pub mod automorphism;
pub mod blocks;
pub mod detect;
pub mod error;
pub mod group_defs;
pub mod level_quotient;
pub mod perm;
pub mod schreier_sims;
pub mod slp;
pub mod structure;
pub mod verdict;
pub mod words;

pub use automorphism::{EqBudget, TreeAutomorphism};
pub use blocks::{BlockStructure, DiagonalSpec};
pub use detect::{block_detect, DetectBudget, DetectionReport, SubgroupHandle};
pub use error::{Error, Result};
pub use group_defs::{ggs, grigorchuk, parse_group, GenLetter, GgsSpec, SelfSimilarGroup};
pub use perm::Perm;
pub use verdict::{Certificate, Status, Verdict};
pub use words::{validate_transversal, Relation, VertexSet, Word};
