//! Bottom-up evaluation: perfect models of stratified databases and
//! integrity checking.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::stratify::{stratify_rules, Strata};
use crate::syntax::{Atom, Constraint, Database, Literal, Name, Rule, Subst};

pub type Interpretation = BTreeSet<Atom>;

/// Ground atoms grouped by predicate.
#[derive(Default, Clone, Debug)]
struct Index {
    by_pred: BTreeMap<Name, Vec<Atom>>,
}

impl Index {
    fn from_atoms<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> Self {
        let mut ix = Index::default();
        for a in atoms {
            ix.insert(a.clone());
        }
        ix
    }

    fn insert(&mut self, a: Atom) {
        self.by_pred.entry(a.pred.clone()).or_default().push(a);
    }

    fn get(&self, pred: &Name) -> &[Atom] {
        self.by_pred.get(pred).map_or(&[], Vec::as_slice)
    }
}

struct Ctx<'a> {
    full: &'a Index,
    model: &'a Interpretation,
    universe: &'a BTreeSet<Name>,
}

/// True when a ground literal holds in `model`.
pub fn holds(lit: &Literal, model: &Interpretation) -> bool {
    let truth = match lit.atom.eval_builtin() {
        Some(t) => t,
        None => model.contains(&lit.atom),
    };
    truth == lit.positive
}

/// Extends `subst` over `body` in every way that makes the body true, with
/// `body[delta.0]` restricted to the atoms in `delta.1`.
fn join(ctx: &Ctx, body: &[Literal], delta: Option<(usize, &Index)>, subst: Subst, out: &mut Vec<Subst>) {
    let mut done = vec![false; body.len()];
    join_rec(ctx, body, delta, &mut done, subst, out);
}

fn join_rec(
    ctx: &Ctx,
    body: &[Literal],
    delta: Option<(usize, &Index)>,
    done: &mut [bool],
    subst: Subst,
    out: &mut Vec<Subst>,
) {
    // Filters first, as soon as they are ground.
    for (i, lit) in body.iter().enumerate() {
        if done[i] || (lit.positive && !lit.atom.is_builtin()) {
            continue;
        }
        let g = lit.apply(&subst);
        if g.atom.is_ground() {
            if !holds(&g, ctx.model) {
                return;
            }
            done[i] = true;
            join_rec(ctx, body, delta, done, subst, out);
            done[i] = false;
            return;
        }
    }
    let next = match delta {
        Some((d, _)) if !done[d] => Some(d),
        _ => body.iter().enumerate().position(|(i, l)| !done[i] && l.positive && !l.atom.is_builtin()),
    };
    match next {
        Some(i) => {
            let pattern = &body[i].atom;
            let source = match delta {
                Some((d, ix)) if d == i => ix.get(&pattern.pred),
                _ => ctx.full.get(&pattern.pred),
            };
            done[i] = true;
            for fact in source {
                if let Some(s) = pattern.match_ground(fact, &subst) {
                    join_rec(ctx, body, delta, done, s, out);
                }
            }
            done[i] = false;
        }
        None => {
            // Remaining filters mention unbound variables: range the first
            // such variable over the universe.
            let free = body
                .iter()
                .enumerate()
                .filter(|(i, _)| !done[*i])
                .flat_map(|(_, l)| l.atom.vars())
                .find(|v| !subst.contains_key(*v))
                .cloned();
            match free {
                Some(v) => {
                    for c in ctx.universe {
                        let mut s = subst.clone();
                        s.insert(v.clone(), c.clone());
                        join_rec(ctx, body, delta, done, s, out);
                    }
                }
                None => out.push(subst),
            }
        }
    }
}

/// A set of rules prepared for repeated evaluation over different fact
/// sets.
#[derive(Clone, Debug)]
pub struct Evaluator {
    rules: Vec<Rule>,
    strata: Strata,
    /// Rule indices per stratum, by head predicate.
    by_stratum: Vec<Vec<usize>>,
    constants: BTreeSet<Name>,
}

impl Evaluator {
    pub fn new(rules: &[Rule]) -> Result<Self> {
        if let Some(r) = rules.iter().find(|r| r.head.len() != 1) {
            return Err(Error::Invalid(vec![format!("rule {r} does not have exactly one head atom")]));
        }
        let strata = stratify_rules(rules)?;
        let at = crate::stratify::stratum_of(&strata);
        let mut by_stratum = vec![Vec::new(); strata.len()];
        for (i, r) in rules.iter().enumerate() {
            by_stratum[at[&r.head[0].pred]].push(i);
        }
        let constants = rules
            .iter()
            .flat_map(|r| r.head.iter().chain(r.body.iter().map(|l| &l.atom)))
            .flat_map(|a| a.constants().cloned())
            .collect();
        Ok(Evaluator { rules: rules.to_vec(), strata, by_stratum, constants })
    }

    pub fn strata(&self) -> &Strata {
        &self.strata
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    fn universe(&self, facts: &BTreeSet<Atom>) -> BTreeSet<Name> {
        let mut u = self.constants.clone();
        u.extend(facts.iter().flat_map(|a| a.constants().cloned()));
        u
    }

    /// Perfect model by semi-naive iteration, one stratum at a time.
    pub fn model(&self, facts: &BTreeSet<Atom>) -> Interpretation {
        let universe = self.universe(facts);
        let mut model = facts.clone();
        let mut full = Index::from_atoms(facts.iter());
        for (s, rule_ids) in self.by_stratum.iter().enumerate() {
            let here = &self.strata[s];
            let mut delta: Vec<Atom> = Vec::new();
            // First round: every rule against everything known so far.
            let mut fresh = BTreeSet::new();
            {
                let ctx = Ctx { full: &full, model: &model, universe: &universe };
                for &r in rule_ids {
                    let rule = &self.rules[r];
                    let mut out = Vec::new();
                    join(&ctx, &rule.body, None, Subst::new(), &mut out);
                    for s in out {
                        let h = rule.head[0].apply(&s);
                        if !model.contains(&h) {
                            fresh.insert(h);
                        }
                    }
                }
            }
            for a in fresh {
                model.insert(a.clone());
                full.insert(a.clone());
                delta.push(a);
            }
            while !delta.is_empty() {
                let delta_ix = Index::from_atoms(delta.iter());
                let mut fresh = BTreeSet::new();
                let ctx = Ctx { full: &full, model: &model, universe: &universe };
                for &r in rule_ids {
                    let rule = &self.rules[r];
                    for (i, lit) in rule.body.iter().enumerate() {
                        if !lit.positive || lit.atom.is_builtin() || !here.contains(&lit.atom.pred) {
                            continue;
                        }
                        let mut out = Vec::new();
                        join(&ctx, &rule.body, Some((i, &delta_ix)), Subst::new(), &mut out);
                        for s in out {
                            let h = rule.head[0].apply(&s);
                            if !model.contains(&h) {
                                fresh.insert(h);
                            }
                        }
                    }
                }
                delta.clear();
                for a in fresh {
                    model.insert(a.clone());
                    full.insert(a.clone());
                    delta.push(a);
                }
            }
        }
        model
    }

    /// Same model, recomputed naively: every rule of the stratum is
    /// re-applied to the whole model until nothing changes.
    pub fn model_naive(&self, facts: &BTreeSet<Atom>) -> Interpretation {
        let universe = self.universe(facts);
        let mut model = facts.clone();
        for rule_ids in &self.by_stratum {
            loop {
                let full = Index::from_atoms(model.iter());
                let ctx = Ctx { full: &full, model: &model, universe: &universe };
                let mut fresh = BTreeSet::new();
                for &r in rule_ids {
                    let rule = &self.rules[r];
                    let mut out = Vec::new();
                    join(&ctx, &rule.body, None, Subst::new(), &mut out);
                    fresh.extend(out.iter().map(|s| rule.head[0].apply(s)));
                }
                let before = model.len();
                model.extend(fresh);
                if model.len() == before {
                    break;
                }
            }
        }
        model
    }
}

pub fn least_model(db: &Database) -> Result<Interpretation> {
    Ok(Evaluator::new(&db.idb)?.model(&db.edb))
}

pub fn least_model_naive(db: &Database) -> Result<Interpretation> {
    Ok(Evaluator::new(&db.idb)?.model_naive(&db.edb))
}

/// Membership of a ground atom in the perfect model.
pub fn derives(db: &Database, a: &Atom) -> Result<bool> {
    if let Some(t) = a.eval_builtin() {
        return Ok(t);
    }
    if !db.all_atoms().any(|b| b.pred == a.pred) {
        return Err(Error::UnknownPredicate(a.pred.to_string()));
    }
    Ok(least_model(db)?.contains(a))
}

/// A violated constraint together with the instance that makes its body
/// true.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub index: usize,
    pub constraint: Constraint,
    pub subst: Subst,
}

impl Violation {
    /// The ground body literals of the violating instance.
    pub fn instance(&self) -> Vec<Literal> {
        self.constraint.body.iter().map(|l| l.apply(&self.subst)).collect()
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.constraint)?;
        if !self.subst.is_empty() {
            let binds: Vec<String> = self.subst.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, " with {}", binds.join(", "))?;
        }
        Ok(())
    }
}

/// Violations of `ics` in an already computed model, in constraint order.
pub fn violations_in(model: &Interpretation, ics: &[Constraint]) -> Vec<Violation> {
    let full = Index::from_atoms(model.iter());
    let universe: BTreeSet<Name> = model
        .iter()
        .chain(ics.iter().flat_map(|c| c.body.iter().map(|l| &l.atom)))
        .flat_map(|a| a.constants().cloned())
        .collect();
    let ctx = Ctx { full: &full, model, universe: &universe };
    let mut out = Vec::new();
    for (index, c) in ics.iter().enumerate() {
        let mut substs = Vec::new();
        join(&ctx, &c.body, None, Subst::new(), &mut substs);
        let substs: BTreeSet<Subst> = substs.into_iter().collect();
        out.extend(substs.into_iter().map(|subst| Violation { index, constraint: c.clone(), subst }));
    }
    out
}

/// True when no constraint has a true instance in `model`.
pub fn satisfies(model: &Interpretation, ics: &[Constraint]) -> bool {
    let full = Index::from_atoms(model.iter());
    let universe: BTreeSet<Name> = model
        .iter()
        .chain(ics.iter().flat_map(|c| c.body.iter().map(|l| &l.atom)))
        .flat_map(|a| a.constants().cloned())
        .collect();
    let ctx = Ctx { full: &full, model, universe: &universe };
    ics.iter().all(|c| {
        let mut substs = Vec::new();
        join(&ctx, &c.body, None, Subst::new(), &mut substs);
        substs.is_empty()
    })
}

/// All constraint violations of `db`.
pub fn check_ic(db: &Database) -> Result<Vec<Violation>> {
    Ok(violations_in(&least_model(db)?, &db.ic))
}

pub fn is_consistent(db: &Database) -> Result<bool> {
    Ok(satisfies(&least_model(db)?, &db.ic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_atom, parse_database};

    const VIEWS: &str = "p :- a, e. q :- a, f. p :- b, f. q :- b, e. p :- q. q :- a. a. e. f. :- b.";
    const STAFF: &str = "
        staff_chair(X,Y) :- staff_group(X,Z), group_chair(Z,Y).
        group_chair(infor1,matthias). group_chair(infor2,gerhard).
        staff_group(delhibabu,infor1). staff_group(aravindan,infor1).
        :- group_chair(X,Y), group_chair(X,Z), not eq(Y,Z).
        :- group_chair(Y,X), group_chair(Z,X), not eq(Y,Z).
    ";

    fn atoms(s: &[&str]) -> Interpretation {
        s.iter().map(|a| parse_atom(a).unwrap()).collect()
    }

    #[test]
    fn views_model() {
        let db = parse_database(VIEWS).unwrap();
        assert_eq!(least_model(&db).unwrap(), atoms(&["a", "e", "f", "p", "q"]));
        assert!(least_model(&db.with_edb([])).unwrap().is_empty());
    }

    #[test]
    fn staff_model() {
        let db = parse_database(STAFF).unwrap();
        let mut expected = db.edb.clone();
        expected.extend(atoms(&["staff_chair(delhibabu,matthias)", "staff_chair(aravindan,matthias)"]));
        assert_eq!(least_model(&db).unwrap(), expected);
    }

    #[test]
    fn derivability() {
        let db = parse_database(VIEWS).unwrap();
        assert!(derives(&db, &Atom::prop("p")).unwrap());
        assert!(!derives(&db, &Atom::prop("b")).unwrap());
        assert_eq!(derives(&db, &Atom::prop("zzz")), Err(Error::UnknownPredicate("zzz".into())));
        let staff = parse_database(STAFF).unwrap();
        assert!(!derives(&staff, &parse_atom("staff_chair(aravindan,gerhard)").unwrap()).unwrap());
    }

    #[test]
    fn constraint_checking() {
        let db = parse_database(VIEWS).unwrap();
        assert!(check_ic(&db).unwrap().is_empty());
        let mut with_b = db.clone();
        with_b.edb.insert(Atom::prop("b"));
        let v = check_ic(&with_b).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint.to_string(), ":- b.");

        let mut staff = parse_database(STAFF).unwrap();
        staff.edb.insert(parse_atom("group_chair(infor1,gerhard)").unwrap());
        let v = check_ic(&staff).unwrap();
        let ic1: Vec<_> = v.iter().filter(|v| v.index == 0).collect();
        assert!(!ic1.is_empty());
        assert!(ic1.iter().all(|v| &*v.subst[&Name::from("X")] == "infor1"));
        // gerhard now chairs two groups as well.
        assert!(v.iter().any(|v| v.index == 1));
    }

    #[test]
    fn stratified_negation() {
        let db = parse_database("p :- e, not q. q :- f. r :- e, not p. e.").unwrap();
        assert_eq!(least_model(&db).unwrap(), atoms(&["e", "p"]));
        let db = db.with_edb(atoms(&["e", "f"]));
        assert_eq!(least_model(&db).unwrap(), atoms(&["e", "f", "q", "r"]));
    }

    #[test]
    fn recursion() {
        let db = parse_database(
            "path(X,Y) :- edge(X,Y). path(X,Y) :- path(X,Z), edge(Z,Y).
             edge(a,b). edge(b,c). edge(c,a).",
        )
        .unwrap();
        let m = least_model(&db).unwrap();
        assert_eq!(m.iter().filter(|a| &*a.pred == "path").count(), 9);
        assert_eq!(m, least_model_naive(&db).unwrap());
    }
}
