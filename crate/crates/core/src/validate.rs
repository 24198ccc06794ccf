//! Well-formedness checks. Nothing here aborts: every problem found is
//! reported as a human-readable violation.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::syntax::{Constraint, Database, Literal, Name, Rule, EQ};

/// All violations of the database invariants, in a stable order. Empty
/// means the database is valid.
pub fn validate(db: &Database) -> Vec<String> {
    let mut out = Vec::new();
    let views = db.view_preds();

    let mut both: BTreeSet<&Name> = BTreeSet::new();
    for fact in &db.edb {
        if views.contains(&fact.pred) {
            both.insert(&fact.pred);
        }
        if !fact.is_ground() {
            out.push(format!("fact {fact} is not ground"));
        }
        if &*fact.pred == EQ {
            out.push(format!("fact {fact} uses the reserved predicate {EQ}"));
        }
    }
    for p in both {
        out.push(format!("predicate {p} is both view and base"));
    }

    let mut arity: BTreeMap<&Name, usize> = BTreeMap::new();
    let mut conflicts = BTreeSet::new();
    for atom in db.all_atoms() {
        if &*atom.pred == EQ && atom.arity() != 2 {
            conflicts.insert(format!("predicate {EQ} is reserved for binary equality"));
            continue;
        }
        let n = *arity.entry(&atom.pred).or_insert(atom.arity());
        if n != atom.arity() {
            conflicts.insert(format!("predicate {} used with arities {} and {}", atom.pred, n, atom.arity()));
        }
    }
    out.extend(conflicts);

    for rule in &db.idb {
        if rule.body.is_empty() {
            out.push(format!("unit clause {rule} in IDB"));
        }
        if rule.head.iter().any(|h| &*h.pred == EQ) {
            out.push(format!("rule {rule} defines the reserved predicate {EQ}"));
        }
        if !rule.is_range_restricted() {
            out.push(format!("rule {rule} is not range-restricted"));
        }
    }
    for c in &db.ic {
        if c.body.is_empty() {
            out.push("constraint with empty body".to_string());
        } else if !constraint_range_restricted(c) {
            out.push(format!("constraint {c} is not range-restricted"));
        }
    }
    out
}

fn constraint_range_restricted(c: &Constraint) -> bool {
    Rule { head: Vec::new(), body: c.body.clone() }.is_range_restricted()
}

/// [`validate`] as a `Result`.
pub fn ensure_valid(db: &Database) -> Result<()> {
    let v = validate(db);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid(v))
    }
}

/// Literals of a body that are not built-ins.
pub fn non_builtin(body: &[Literal]) -> impl Iterator<Item = &Literal> {
    body.iter().filter(|l| !l.atom.is_builtin())
}
