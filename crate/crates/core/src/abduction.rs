//! Abductive explanations read off complete SLD trees.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::eval::{least_model, satisfies, Evaluator};
use crate::hitting_set::minimize;
use crate::sld::{abductive_tree, sld_tree, Status};
use crate::syntax::{Atom, Database};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Minimal,
    LocallyMinimal,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Explanation {
    pub facts: BTreeSet<Atom>,
    pub kind: Kind,
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let facts: Vec<String> = self.facts.iter().map(Atom::to_string).collect();
        write!(f, "{{{}}}", facts.join(", "))
    }
}

fn require_view(db: &Database, a: &Atom) -> Result<()> {
    if db.is_view(a) {
        Ok(())
    } else {
        Err(Error::BaseAtom(a.clone()))
    }
}

/// Fact sets of the success branches, in branch order, without
/// duplicates. Each is minimal relative to the rules of its own branch.
pub fn locally_minimal_explanations(db: &Database, a: &Atom) -> Result<Vec<Explanation>> {
    require_view(db, a)?;
    let tree = sld_tree(db, a)?;
    let mut out: Vec<Explanation> = Vec::new();
    for b in tree.branches(db) {
        if b.status == Status::Success && !out.iter().any(|e| e.facts == b.facts) {
            out.push(Explanation { facts: b.facts, kind: Kind::LocallyMinimal });
        }
    }
    Ok(out)
}

/// Minimal EDB-closed explanations: the success-branch fact sets with
/// supersets removed. Sorted by size then lexicographically.
pub fn explanations(db: &Database, a: &Atom) -> Result<Vec<Explanation>> {
    let local = locally_minimal_explanations(db, a)?;
    Ok(minimize(local.into_iter().map(|e| e.facts))
        .into_iter()
        .map(|facts| Explanation { facts, kind: Kind::Minimal })
        .collect())
}

/// Explanation fact sets for any atom; a base atom is explained by itself.
pub fn explanation_sets(db: &Database, a: &Atom) -> Result<Vec<BTreeSet<Atom>>> {
    if db.is_view(a) {
        Ok(explanations(db, a)?.into_iter().map(|e| e.facts).collect())
    } else if db.edb.contains(a) {
        Ok(vec![BTreeSet::from([a.clone()])])
    } else {
        Ok(Vec::new())
    }
}

/// Sets of absent base atoms, one per abductive success branch, whose
/// insertion makes `a` derivable. Duplicates removed, branch order kept.
pub fn abductive_candidates(db: &Database, a: &Atom) -> Result<Vec<BTreeSet<Atom>>> {
    let tree = abductive_tree(db, a)?;
    let eval = Evaluator::new(&db.idb)?;
    let mut out: Vec<BTreeSet<Atom>> = Vec::new();
    for b in tree.branches(db) {
        if b.status != Status::Success || out.contains(&b.assumed) {
            continue;
        }
        let mut facts = db.edb.clone();
        facts.extend(b.assumed.iter().cloned());
        if eval.model(&facts).contains(a) {
            out.push(b.assumed);
        }
    }
    Ok(out)
}

/// Minimal sets of base atoms whose insertion makes `a` derivable without
/// violating a constraint.
pub fn insertion_candidates(db: &Database, a: &Atom) -> Result<Vec<Explanation>> {
    if least_model(db)?.contains(a) {
        return Err(Error::AlreadyDerivable(a.clone()));
    }
    let eval = Evaluator::new(&db.idb)?;
    let consistent = abductive_candidates(db, a)?.into_iter().filter(|delta| {
        let mut facts = db.edb.clone();
        facts.extend(delta.iter().cloned());
        satisfies(&eval.model(&facts), &db.ic)
    });
    Ok(minimize(consistent).into_iter().map(|facts| Explanation { facts, kind: Kind::LocallyMinimal }).collect())
}

/// Every base atom occurring on an abductive success branch for `a`,
/// whether already present or assumed.
pub fn abducibles(db: &Database, a: &Atom) -> Result<BTreeSet<Atom>> {
    let tree = abductive_tree(db, a)?;
    Ok(tree.branches(db).into_iter().filter(|b| b.status == Status::Success).flat_map(|b| b.required).collect())
}
