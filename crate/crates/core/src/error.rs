use thiserror::Error;

use crate::syntax::Atom;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("predicate {predicate} used with arity {found}, previously {expected}")]
    ArityConflict { predicate: String, expected: usize, found: usize },
    #[error("fact {0} contains variables")]
    NonGroundFact(String),
    #[error("database is not stratifiable: negative cycle through {}", .cycle.join(" -> "))]
    NotStratifiable { cycle: Vec<String> },
    #[error("invalid database: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("{0} is a base atom; explanations are only defined for view atoms")]
    BaseAtom(Atom),
    #[error("{0} is already derivable")]
    AlreadyDerivable(Atom),
    #[error("invalid update request: {}", .0.join("; "))]
    InvalidRequest(Vec<String>),
    #[error("rule cannot be mapped to a view update rule: {0}")]
    Normalization(String),
    #[error("no realization exists: {}", .trace.join("; "))]
    Unrealizable { trace: Vec<String> },
}
