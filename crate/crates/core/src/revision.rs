//! Generalized revision of Horn knowledge bases by a ground literal.
//!
//! A knowledge base is a [`Database`]: the rules are the immutable part,
//! the facts the updatable part, the denials the constraints. Revising by
//! `A` makes `A` derivable, revising by `not A` makes it underivable, and
//! either way the result has to satisfy the constraints.

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};

use crate::abduction::{abductive_candidates, explanation_sets, insertion_candidates};
use crate::error::{Error, Result};
use crate::eval::{holds, satisfies, violations_in, Evaluator, Interpretation};
use crate::hitting_set::{minimal_hitting_sets, minimize};
use crate::postulates::realizable_from;
use crate::syntax::{Atom, Constraint, Database, Literal, Name, Rule, Term};
use crate::validate::ensure_valid;

/// `KB = KB_I ∪ KB_U ∪ KB_IC`, stored as rules, facts and denials.
pub type KnowledgeBase = Database;

#[derive(Clone, Debug)]
pub struct Config {
    /// Bound on constraint repair rounds.
    pub max_iter: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config { max_iter: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The literal cannot hold together with the rules and constraints.
    Inconsistent,
    /// The literal already holds and the knowledge base is consistent.
    Entailed,
    Revised,
    /// No consistent revision was found within the repair bound.
    Unrealizable,
}

#[derive(Clone, Debug)]
pub struct Revision {
    pub kb: KnowledgeBase,
    pub outcome: Outcome,
    pub trace: Vec<String>,
}

/// Ground atoms over `preds` with arguments from `universe`.
pub fn herbrand_atoms(preds: &BTreeMap<Name, usize>, universe: &BTreeSet<Name>) -> Vec<Atom> {
    let mut out = Vec::new();
    for (p, &n) in preds {
        let vars: Vec<Name> = (0..n).map(|i| Name::from(format!("V{i}"))).collect();
        let pattern = Atom { pred: p.clone(), args: vars.iter().map(|v| Term::Var(v.clone())).collect() };
        for s in crate::ground::substitutions(&vars, universe) {
            out.push(pattern.apply(&s));
        }
    }
    out
}

/// The ground base atoms of `kb`, over its constants and those of `extra`.
pub fn base_herbrand(kb: &KnowledgeBase, extra: &[&Atom]) -> Vec<Atom> {
    let mut arities = kb.arities();
    for a in extra {
        arities.entry(a.pred.clone()).or_insert(a.arity());
    }
    let views = kb.view_preds();
    arities.retain(|p, _| !views.contains(p) && &**p != crate::syntax::EQ);
    let mut universe = kb.constants();
    universe.extend(extra.iter().flat_map(|a| a.constants().cloned()));
    herbrand_atoms(&arities, &universe)
}

/// Whether some set of base facts makes `alpha` true and satisfies the
/// constraints. `None` when this could not be decided.
pub fn realizable(kb: &KnowledgeBase, alpha: &Literal) -> Result<Option<bool>> {
    realizable_from(kb, &BTreeSet::new(), std::slice::from_ref(alpha))
}

/// Depth-bounded search for a fact set satisfying the constraints,
/// deleting support of violated instances or adding atoms a negative
/// literal needs, without touching `protected` and keeping `goal` true.
pub struct Repairer<'a> {
    pub eval: &'a Evaluator,
    pub rules: &'a [Rule],
    pub ics: &'a [Constraint],
    pub max_iter: usize,
    budget: Cell<usize>,
}

const REPAIR_BUDGET: usize = 4_000;

impl<'a> Repairer<'a> {
    pub fn new(eval: &'a Evaluator, rules: &'a [Rule], ics: &'a [Constraint], max_iter: usize) -> Self {
        Repairer { eval, rules, ics, max_iter, budget: Cell::new(REPAIR_BUDGET) }
    }

    pub fn repair(
        &self,
        facts: &BTreeSet<Atom>,
        protected: &BTreeSet<Atom>,
        goal: &dyn Fn(&Interpretation) -> bool,
        trace: &mut Vec<String>,
    ) -> Result<Option<BTreeSet<Atom>>> {
        self.budget.set(REPAIR_BUDGET);
        self.step(facts, protected, goal, 0, trace)
    }

    fn step(
        &self,
        facts: &BTreeSet<Atom>,
        protected: &BTreeSet<Atom>,
        goal: &dyn Fn(&Interpretation) -> bool,
        depth: usize,
        trace: &mut Vec<String>,
    ) -> Result<Option<BTreeSet<Atom>>> {
        let m = self.eval.model(facts);
        let violations = violations_in(&m, self.ics);
        let Some(v) = violations.first() else {
            return Ok(Some(facts.clone()));
        };
        if depth >= self.max_iter {
            trace.push(format!("gave up after {depth} repair rounds"));
            return Ok(None);
        }
        let db = Database::new(self.rules.to_vec(), facts.iter().cloned(), Vec::new());
        for lit in v.instance() {
            if lit.atom.is_builtin() {
                continue;
            }
            let mut options: Vec<BTreeSet<Atom>> = Vec::new();
            let mut adds: Option<Atom> = None;
            if lit.positive {
                let family: Vec<BTreeSet<Atom>> = explanation_sets(&db, &lit.atom)?
                    .into_iter()
                    .map(|s| s.difference(protected).cloned().collect())
                    .collect();
                if family.is_empty() || family.iter().any(BTreeSet::is_empty) {
                    continue;
                }
                options = minimal_hitting_sets(&family);
            } else if !db.is_view(&lit.atom) && !protected.contains(&lit.atom) {
                adds = Some(lit.atom.clone());
            } else {
                continue;
            }
            let candidates: Vec<(BTreeSet<Atom>, String)> = match adds {
                Some(x) => {
                    let mut f = facts.clone();
                    f.insert(x.clone());
                    vec![(f, format!("{v}: add {x}"))]
                }
                None => options
                    .into_iter()
                    .map(|hs| {
                        let f: BTreeSet<Atom> = facts.difference(&hs).cloned().collect();
                        let names: Vec<String> = hs.iter().map(Atom::to_string).collect();
                        (f, format!("{v}: remove {}", names.join(", ")))
                    })
                    .collect(),
            };
            for (f, note) in candidates {
                if self.budget.get() == 0 {
                    trace.push("repair budget exhausted".to_string());
                    return Ok(None);
                }
                self.budget.set(self.budget.get() - 1);
                if !goal(&self.eval.model(&f)) {
                    continue;
                }
                trace.push(note);
                if let Some(done) = self.step(&f, protected, goal, depth + 1, trace)? {
                    return Ok(Some(done));
                }
                trace.pop();
            }
        }
        Ok(None)
    }

    /// Puts back, one at a time and in order, removed facts whose return
    /// keeps the goal and the constraints.
    pub fn restore(
        &self,
        facts: &BTreeSet<Atom>,
        original: &BTreeSet<Atom>,
        goal: &dyn Fn(&Interpretation) -> bool,
    ) -> BTreeSet<Atom> {
        let mut out = facts.clone();
        for d in original.difference(facts) {
            let mut f = out.clone();
            f.insert(d.clone());
            let m = self.eval.model(&f);
            if goal(&m) && satisfies(&m, self.ics) {
                out = f;
            }
        }
        out
    }
}

/// One application of the abductive revision step: every way of adding a
/// chosen explanation for each atom of `plus` that is not derivable, and
/// removing a minimal hitting set of the explanations of each atom of
/// `minus` that is. Insertion explanations that keep the constraints are
/// preferred; if there are none, unconstrained ones are offered.
pub fn kr_choices(kb: &KnowledgeBase, plus: &BTreeSet<Atom>, minus: &BTreeSet<Atom>) -> Result<Vec<KnowledgeBase>> {
    let eval = Evaluator::new(&kb.idb)?;
    let m = eval.model(&kb.edb);
    let p: Vec<&Atom> = plus.iter().filter(|e| !m.contains(*e)).collect();
    let n: Vec<&Atom> = minus.iter().filter(|e| m.contains(*e)).collect();
    if p.is_empty() && n.is_empty() {
        return Ok(vec![kb.clone()]);
    }
    let mut adds: Vec<BTreeSet<Atom>> = vec![BTreeSet::new()];
    for e in &p {
        let options: Vec<BTreeSet<Atom>> = if kb.is_view(e) {
            let good: Vec<_> = insertion_candidates(kb, e)?.into_iter().map(|x| x.facts).collect();
            if good.is_empty() {
                minimize(abductive_candidates(kb, e)?)
            } else {
                good
            }
        } else {
            vec![BTreeSet::from([(*e).clone()])]
        };
        let mut next = Vec::new();
        for a in &adds {
            for o in &options {
                next.push(a.union(o).cloned().collect());
            }
        }
        adds = next;
    }
    let mut family: Vec<BTreeSet<Atom>> = Vec::new();
    for e in &n {
        family.extend(explanation_sets(kb, e)?);
    }
    let removes = if n.is_empty() { vec![BTreeSet::new()] } else { minimal_hitting_sets(&family) };
    let mut out = Vec::new();
    for r in &removes {
        for a in &adds {
            let mut edb: BTreeSet<Atom> = kb.edb.difference(r).cloned().collect();
            edb.extend(a.iter().cloned());
            let next = kb.with_edb(edb);
            if !out.contains(&next) {
                out.push(next);
            }
        }
    }
    Ok(out)
}

/// The first choice of [`kr_choices`], repeated while an atom of `plus`
/// is underivable or an atom of `minus` derivable and the step still
/// changes something.
pub fn kr(kb: &KnowledgeBase, plus: &BTreeSet<Atom>, minus: &BTreeSet<Atom>) -> Result<KnowledgeBase> {
    let mut cur = kb.clone();
    for _ in 0..Config::default().max_iter {
        let next = kr_choices(&cur, plus, minus)?.into_iter().next().unwrap_or_else(|| cur.clone());
        if next == cur {
            break;
        }
        cur = next;
    }
    Ok(cur)
}

fn split(alpha: &Literal) -> (BTreeSet<Atom>, BTreeSet<Atom>) {
    if alpha.positive {
        (BTreeSet::from([alpha.atom.clone()]), BTreeSet::new())
    } else {
        (BTreeSet::new(), BTreeSet::from([alpha.atom.clone()]))
    }
}

/// Revises `kb` by the ground literal `alpha`. Returns the knowledge base
/// unchanged when `alpha` cannot be made true consistently or already
/// holds in a consistent knowledge base.
pub fn generalized_revision(kb: &KnowledgeBase, alpha: &Literal) -> Result<KnowledgeBase> {
    Ok(revise(kb, alpha, &Config::default())?.kb)
}

pub fn revise(kb: &KnowledgeBase, alpha: &Literal, cfg: &Config) -> Result<Revision> {
    let mut all = revise_with(kb, alpha, cfg, false)?;
    Ok(all.remove(0))
}

/// Every revision reachable through the choices of explanation and
/// hitting set that need no constraint repair, or the first repaired one
/// if there are none.
pub fn revise_all(kb: &KnowledgeBase, alpha: &Literal, cfg: &Config) -> Result<Vec<Revision>> {
    revise_with(kb, alpha, cfg, true)
}

fn revise_with(kb: &KnowledgeBase, alpha: &Literal, cfg: &Config, all: bool) -> Result<Vec<Revision>> {
    ensure_valid(kb)?;
    if !alpha.atom.is_ground() || alpha.atom.is_builtin() {
        return Err(Error::InvalidRequest(vec![format!("{alpha} is not a ground database literal")]));
    }
    let unchanged = |outcome, note: &str| Ok(vec![Revision { kb: kb.clone(), outcome, trace: vec![note.to_string()] }]);
    if realizable(kb, alpha)? == Some(false) {
        return unchanged(Outcome::Inconsistent, "no fact set makes the literal true consistently");
    }
    let eval = Evaluator::new(&kb.idb)?;
    let m = eval.model(&kb.edb);
    if holds(alpha, &m) && satisfies(&m, &kb.ic) {
        return unchanged(Outcome::Entailed, "already entailed");
    }
    let goal = |m: &Interpretation| holds(alpha, m);
    let (plus, minus) = split(alpha);
    let choices = kr_choices(kb, &plus, &minus)?;

    let mut out = Vec::new();
    for c in &choices {
        let cm = eval.model(&c.edb);
        if goal(&cm) && satisfies(&cm, &kb.ic) {
            out.push(Revision { kb: c.clone(), outcome: Outcome::Revised, trace: vec![change_note(kb, c)] });
            if !all {
                return Ok(out);
            }
        }
    }
    if !out.is_empty() {
        return Ok(out);
    }

    let repairer = Repairer::new(&eval, &kb.idb, &kb.ic, cfg.max_iter);
    let mut trace = Vec::new();
    for c in &choices {
        let cm = eval.model(&c.edb);
        if !goal(&cm) {
            continue;
        }
        let added: BTreeSet<Atom> = c.edb.difference(&kb.edb).cloned().collect();
        for keep in support_options(c, alpha, &eval)? {
            let mut protected = added.clone();
            protected.extend(keep);
            let mut steps = vec![change_note(kb, c)];
            if let Some(f) = repairer.repair(&c.edb, &protected, &goal, &mut steps)? {
                let f = repairer.restore(&f, &kb.edb, &goal);
                return Ok(vec![Revision { kb: kb.with_edb(f), outcome: Outcome::Revised, trace: steps }]);
            }
            trace.extend(steps);
        }
    }
    trace.push(format!("no consistent revision by {alpha} found"));
    Ok(vec![Revision { kb: kb.clone(), outcome: Outcome::Unrealizable, trace }])
}

/// Fact sets to keep while repairing: for a positive literal over a view,
/// each minimal explanation that is consistent on its own; otherwise
/// nothing.
fn support_options(kb: &KnowledgeBase, alpha: &Literal, eval: &Evaluator) -> Result<Vec<BTreeSet<Atom>>> {
    if !alpha.positive {
        return Ok(vec![BTreeSet::new()]);
    }
    let sets = explanation_sets(kb, &alpha.atom)?;
    let good: Vec<_> = sets.into_iter().filter(|s| satisfies(&eval.model(s), &kb.ic)).collect();
    Ok(good)
}

fn change_note(old: &KnowledgeBase, new: &KnowledgeBase) -> String {
    let add: Vec<String> = new.edb.difference(&old.edb).map(|a| format!("+{a}")).collect();
    let del: Vec<String> = old.edb.difference(&new.edb).map(|a| format!("-{a}")).collect();
    let mut all = add;
    all.extend(del);
    if all.is_empty() {
        "no change".to_string()
    } else {
        all.join(" ")
    }
}

/// Whether `kb`'s rules together with `facts` derive the ground rule
/// `clause`: its head follows once its body is added.
pub fn derives_clause(eval: &Evaluator, facts: &BTreeSet<Atom>, clause: &Rule) -> bool {
    let mut f = facts.clone();
    f.extend(clause.body.iter().filter(|l| l.positive).map(|l| l.atom.clone()));
    let m = eval.model(&f);
    if !clause.body.iter().filter(|l| !l.positive).all(|l| holds(l, &m)) {
        return true;
    }
    clause.head.iter().any(|h| m.contains(h))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equivalence {
    pub equivalent: bool,
    /// A fact set deriving exactly one of the two clauses.
    pub witness: Option<BTreeSet<Atom>>,
    /// Every fact set over the signature was tried.
    pub exhaustive: bool,
}

/// Bounded check of KB-equivalence: `KB_I ∪ E` derives `alpha` iff it
/// derives `beta`, for every set `E` of at most `bound` ground facts over
/// the signature of `kb`, `alpha` and `beta`.
pub fn kb_equivalence(kb: &KnowledgeBase, alpha: &Rule, beta: &Rule, bound: usize) -> Result<Equivalence> {
    let eval = Evaluator::new(&kb.idb)?;
    let mut arities = kb.arities();
    let mut universe = kb.constants();
    for r in [alpha, beta] {
        for a in r.head.iter().chain(r.body.iter().map(|l| &l.atom)) {
            if !a.is_builtin() {
                arities.entry(a.pred.clone()).or_insert(a.arity());
            }
            universe.extend(a.constants().cloned());
        }
    }
    let atoms = herbrand_atoms(&arities, &universe);
    let mut sets: Vec<BTreeSet<Atom>> = vec![BTreeSet::new()];
    let mut frontier = sets.clone();
    for _ in 0..bound.min(atoms.len()) {
        let mut next = Vec::new();
        for s in &frontier {
            let last = s.iter().next_back();
            for a in &atoms {
                if last.is_none_or(|l| a > l) {
                    let mut t = s.clone();
                    t.insert(a.clone());
                    next.push(t);
                }
            }
        }
        sets.extend(next.iter().cloned());
        frontier = next;
    }
    for e in sets {
        if derives_clause(&eval, &e, alpha) != derives_clause(&eval, &e, beta) {
            return Ok(Equivalence { equivalent: false, witness: Some(e), exhaustive: bound >= atoms.len() });
        }
    }
    Ok(Equivalence { equivalent: true, witness: None, exhaustive: bound >= atoms.len() })
}

pub fn kb_equivalent(kb: &KnowledgeBase, alpha: &Rule, beta: &Rule, bound: usize) -> Result<bool> {
    Ok(kb_equivalence(kb, alpha, beta, bound)?.equivalent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_atom, parse_database};

    const VIEWS: &str = "p :- a, e. q :- a, f. p :- b, f. q :- b, e. p :- q. q :- a. a. e. f. :- b.";

    fn atoms(s: &[&str]) -> BTreeSet<Atom> {
        s.iter().map(|a| parse_atom(a).unwrap()).collect()
    }

    fn pos(s: &str) -> Literal {
        Literal::pos(parse_atom(s).unwrap())
    }

    #[test]
    fn entailed_literal_leaves_kb_alone() {
        let kb = parse_database(VIEWS).unwrap();
        let r = revise(&kb, &pos("p"), &Config::default()).unwrap();
        assert_eq!(r.outcome, Outcome::Entailed);
        assert_eq!(r.kb, kb);
    }

    #[test]
    fn insertion_by_revision() {
        let kb = parse_database(VIEWS).unwrap().with_edb(atoms(&["e", "f"]));
        let out = generalized_revision(&kb, &pos("p")).unwrap();
        assert_eq!(out.edb, atoms(&["a", "e", "f"]));
    }

    #[test]
    fn blocked_by_constraint() {
        let kb = parse_database(VIEWS).unwrap();
        let r = revise(&kb, &pos("b"), &Config::default()).unwrap();
        assert_eq!(r.outcome, Outcome::Inconsistent);
        assert_eq!(r.kb, kb);
    }

    #[test]
    fn deletion_by_revision() {
        let kb = parse_database(VIEWS).unwrap();
        let out = generalized_revision(&kb, &Literal::neg(Atom::prop("p"))).unwrap();
        assert_eq!(out.edb, atoms(&["e", "f"]));
    }

    #[test]
    fn kr_steps() {
        let kb = parse_database(VIEWS).unwrap();
        let ef = kb.with_edb(atoms(&["e", "f"]));
        let none = BTreeSet::new();
        assert_eq!(kr(&ef, &atoms(&["p"]), &none).unwrap().edb, atoms(&["a", "e", "f"]));
        assert_eq!(kr(&kb, &none, &atoms(&["p"])).unwrap().edb, atoms(&["e", "f"]));
        assert_eq!(kr(&kb, &none, &none).unwrap(), kb);
    }

    #[test]
    fn repair_removes_conflicting_fact() {
        let kb = parse_database("v :- x. x. y. :- v, y. :- z.").unwrap();
        // Making w true needs y; nothing else conflicts.
        let kb2 = parse_database("v :- x. w :- y. x. :- v, y.").unwrap();
        let r = revise(&kb2, &pos("w"), &Config::default()).unwrap();
        assert_eq!(r.outcome, Outcome::Revised);
        assert_eq!(r.kb.edb, atoms(&["y"]));
        // Already inconsistent: repair protects the explanation of v.
        let r = revise(&kb, &pos("v"), &Config::default()).unwrap();
        assert_eq!(r.kb.edb, atoms(&["x"]));
    }

    #[test]
    fn equivalence() {
        let kb = parse_database("p :- q.").unwrap();
        let p = Rule::new(Atom::prop("p"), vec![]);
        let q = Rule::new(Atom::prop("q"), vec![]);
        assert!(kb_equivalent(&kb, &p, &p, 2).unwrap());
        let e = kb_equivalence(&kb, &p, &q, 2).unwrap();
        assert!(!e.equivalent);
        assert_eq!(e.witness, Some(atoms(&["p"])));
        let vacuous = kb_equivalence(&kb, &p, &q, 0).unwrap();
        assert!(vacuous.equivalent && !vacuous.exhaustive);
    }

    #[test]
    fn realizability() {
        let kb = parse_database(VIEWS).unwrap();
        assert_eq!(realizable(&kb, &pos("b")).unwrap(), Some(false));
        assert_eq!(realizable(&kb, &pos("p")).unwrap(), Some(true));
        assert_eq!(realizable(&kb, &Literal::neg(Atom::prop("p"))).unwrap(), Some(true));
        let neg = parse_database("p :- a, not c. :- a, c. :- a, not d.").unwrap();
        assert_eq!(realizable(&neg, &pos("p")).unwrap(), Some(true));
    }
}
