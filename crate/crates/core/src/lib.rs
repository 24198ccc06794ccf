//! A deductive database engine (stratified Datalog with integrity
//! constraints) that answers view update requests with minimal base-fact
//! transactions and certifies each result against the rationality postulates
//! for knowledge-base revision.
//!
//! The pipeline is split by concern:
//!
//! * [`syntax`], [`parser`], [`ground`], [`stratify`], [`validate`]: the
//!   database language.
//! * [`eval`] and [`sld`]: perfect-model evaluation, integrity checking and
//!   complete ground SLD trees.
//! * [`abduction`] and [`hitting_set`]: explanations of view atoms and their
//!   minimal hitting sets.
//! * [`tableau`]: hyper-tableau based deletion.
//! * [`vu`] and [`magic`]: view-update rules, goal-directed rewriting and
//!   insertion realizations.
//! * [`revision`] and [`postulates`]: generalized revision and the postulate
//!   checker.
//! * [`engine`]: the view update orchestrator.

pub mod abduction;
pub mod engine;
pub mod error;
pub mod eval;
pub mod ground;
pub mod hitting_set;
pub mod magic;
pub mod parser;
pub mod postulates;
pub mod revision;
pub mod sld;
pub mod stratify;
pub mod syntax;
pub mod tableau;
pub mod validate;
pub mod vu;

pub use error::{Error, Result};
pub use syntax::{Atom, Constraint, Database, Literal, Rule, Term};
