//! Exhaustive grounding over the Herbrand universe of a database.
//!
//! The number of instances of a rule is `|U|^k` for `k` distinct variables,
//! so this is only meant for desk-scale databases.

use std::collections::BTreeSet;

use crate::syntax::{Constraint, Database, Name, Rule, Subst};

/// All substitutions of `vars` over `universe`, in lexicographic order.
pub fn substitutions(vars: &[Name], universe: &BTreeSet<Name>) -> Vec<Subst> {
    let consts: Vec<&Name> = universe.iter().collect();
    if vars.is_empty() {
        return vec![Subst::new()];
    }
    if consts.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; vars.len()];
    loop {
        out.push(vars.iter().zip(&idx).map(|(v, &i)| (v.clone(), consts[i].clone())).collect());
        let mut k = vars.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < consts.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

pub fn ground_rule(rule: &Rule, universe: &BTreeSet<Name>) -> Vec<Rule> {
    substitutions(&rule.vars(), universe).iter().map(|s| rule.apply(s)).collect()
}

pub fn ground_rules(rules: &[Rule], universe: &BTreeSet<Name>) -> Vec<Rule> {
    rules.iter().flat_map(|r| ground_rule(r, universe)).collect()
}

pub fn ground_constraint(c: &Constraint, universe: &BTreeSet<Name>) -> Vec<Constraint> {
    let vars = Rule { head: Vec::new(), body: c.body.clone() }.vars();
    substitutions(&vars, universe)
        .iter()
        .map(|s| Constraint::new(c.body.iter().map(|l| l.apply(s)).collect()))
        .collect()
}

/// Replaces the IDB by its ground instantiation (`IDB_G`). Facts and
/// constraints are kept as written.
pub fn ground(db: &Database) -> Database {
    let universe = db.constants();
    Database { idb: ground_rules(&db.idb, &universe), edb: db.edb.clone(), ic: db.ic.clone() }
}
