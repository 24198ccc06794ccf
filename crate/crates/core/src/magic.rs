//! Ground magic-set rewriting for goal-directed bottom-up evaluation.
//!
//! Magic predicates are named `magic#p`. The `#` cannot appear in parsed
//! names, so they never collide with user predicates.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::Result;
use crate::eval::{Evaluator, Interpretation};
use crate::ground::ground;
use crate::syntax::{Atom, Database, Literal, Rule};

pub const MAGIC_PREFIX: &str = "magic#";

pub fn magic_atom(a: &Atom) -> Atom {
    Atom { pred: format!("{MAGIC_PREFIX}{}", a.pred).into(), args: a.args.clone() }
}

pub fn is_magic(a: &Atom) -> bool {
    a.pred.starts_with(MAGIC_PREFIX)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MagicProgram {
    /// The magic fact for the goal.
    pub seed: Atom,
    pub rules: Vec<Rule>,
}

impl fmt::Display for MagicProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}.", self.seed)?;
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Rewrites the ground instantiation of `db`'s IDB for `goal`: every rule
/// gets its head's magic atom as a guard, and every view atom in a body is
/// made relevant by a propagation rule from the guard and the literals to
/// its left.
pub fn magic_rewrite(db: &Database, goal: &Atom) -> MagicProgram {
    let views = db.view_preds();
    let g = ground(db);
    let mut rules = Vec::new();
    let mut seen = BTreeSet::new();
    for r in &g.idb {
        let h = &r.head[0];
        let guard = Literal::pos(magic_atom(h));
        for (i, l) in r.body.iter().enumerate() {
            if views.contains(&l.atom.pred) {
                let mut body = vec![guard.clone()];
                body.extend_from_slice(&r.body[..i]);
                let prop = Rule::new(magic_atom(&l.atom), body);
                if seen.insert(prop.clone()) {
                    rules.push(prop);
                }
            }
        }
        let mut body = vec![guard];
        body.extend_from_slice(&r.body);
        rules.push(Rule::new(h.clone(), body));
    }
    MagicProgram { seed: magic_atom(goal), rules }
}

impl MagicProgram {
    /// Bottom-up model over `facts` plus the seed.
    pub fn model(&self, facts: &BTreeSet<Atom>) -> Result<Interpretation> {
        let mut f = facts.clone();
        f.insert(self.seed.clone());
        Ok(Evaluator::new(&self.rules)?.model(&f))
    }
}

/// Goal derivability through the rewritten program.
pub fn magic_derives(db: &Database, goal: &Atom) -> Result<bool> {
    if !db.is_view(goal) {
        return Ok(db.edb.contains(goal));
    }
    Ok(magic_rewrite(db, goal).model(&db.edb)?.contains(goal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::least_model;
    use crate::parser::parse_database;

    const VIEWS: &str = "p :- a, e. q :- a, f. p :- b, f. q :- b, e. p :- q. q :- a. a. e. f. :- b.";

    #[test]
    fn views_goal_p() {
        let db = parse_database(VIEWS).unwrap();
        let m = magic_rewrite(&db, &Atom::prop("p")).model(&db.edb).unwrap();
        let plain: BTreeSet<Atom> = m.into_iter().filter(|a| !is_magic(a)).collect();
        // Everything is reachable from p here.
        assert_eq!(plain, least_model(&db).unwrap());
    }

    #[test]
    fn only_relevant_atoms_are_derived() {
        let db = parse_database("p :- a. r :- a. a.").unwrap();
        let m = magic_rewrite(&db, &Atom::prop("p")).model(&db.edb).unwrap();
        assert!(m.contains(&Atom::prop("p")));
        assert!(!m.contains(&Atom::prop("r")));
    }

    #[test]
    fn empty_idb_gives_seed_only() {
        let db = Database::default();
        let prog = magic_rewrite(&db, &Atom::prop("p"));
        assert!(prog.rules.is_empty());
        assert_eq!(prog.to_string(), "magic#p.\n");
        let m = prog.model(&BTreeSet::new()).unwrap();
        assert_eq!(m, BTreeSet::from([magic_atom(&Atom::prop("p"))]));
    }

    #[test]
    fn unreachable_goal() {
        let db = parse_database("p :- a. a.").unwrap();
        let m = magic_rewrite(&db, &Atom::prop("z")).model(&BTreeSet::new()).unwrap();
        assert_eq!(m, BTreeSet::from([magic_atom(&Atom::prop("z"))]));
    }

    #[test]
    fn recursive_program() {
        let db = parse_database(
            "path(X,Y) :- edge(X,Y). path(X,Y) :- edge(X,Z), path(Z,Y).
             edge(a,b). edge(b,c). edge(d,a).",
        )
        .unwrap();
        let model = least_model(&db).unwrap();
        for goal in ["path(a,c)", "path(c,a)", "path(d,c)"] {
            let g = crate::parser::parse_atom(goal).unwrap();
            assert_eq!(magic_derives(&db, &g).unwrap(), model.contains(&g), "{goal}");
        }
    }
}
