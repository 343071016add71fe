//! Symmetric networks of π-calculus processes: syntax, an early labelled
//! transition system, symmetric executions and the checkers built on them.

pub mod canon;
pub mod checkers;
pub mod confluence;
pub mod corpus;
pub mod error;
pub mod execution;
pub mod gen;
pub mod label;
pub mod name;
pub mod parse;
pub mod semantics;
pub mod subst;
pub mod symexec;
pub mod symmetry;
pub mod syntax;

pub use error::*;
pub use label::Label;
pub use name::{FreshSupply, Name};
pub use parse::{parse, parse_raw};
pub use subst::{SymmetryRelation, Substitution};
pub use syntax::{Branch, Fragment, Prefix, Process};
pub use canon::{canonical, congruent, CanonicalForm};
pub use semantics::{tau_transitions, transitions, Transition};
pub use symmetry::{build, is_symmetric, symmetric_action_sequence, LabelRound, SymmetricNetwork};
pub use execution::{enumerate_executions, Execution};
pub use symexec::{has_symmetric_execution, restore_symmetry, subdivide, symmetric_execution, SearchVerdict, SymmetricExecution};
pub use confluence::{check_local_confluence, ConfluenceVerdict};
pub use checkers::{can_step, must_succeed, solves_leader_election_bouge, solves_leader_election_indexed, StepMode, Verdict};
