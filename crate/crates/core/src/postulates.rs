//! Checker for the rationality postulates of knowledge-base revision.
//!
//! `α` is a set of ground literals read as a conjunction. A fact set `F`
//! is consistent with `α` when some extension of `F` by base facts
//! satisfies the constraints and makes every literal of `α` true.
//! Consequence is ground Horn derivability, extended by the base atoms
//! that occur on abductive derivations of `α`.

use std::collections::BTreeSet;
use std::fmt;

use crate::abduction::{abducibles, abductive_candidates};
use crate::error::Result;
use crate::eval::{holds, satisfies, Evaluator, Interpretation};
use crate::revision::{base_herbrand, KnowledgeBase};
use crate::syntax::{Atom, Constraint, Literal};
use crate::validate::validate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Postulate {
    Closure,
    WeakSuccess,
    Inclusion,
    ImmutableInclusion,
    Vacuity1,
    Vacuity2,
    Consistency,
    Preservation,
    StrongRelevance,
    Relevance,
    WeakRelevance,
}

impl Postulate {
    pub const ALL: [Postulate; 11] = [
        Postulate::Closure,
        Postulate::WeakSuccess,
        Postulate::Inclusion,
        Postulate::ImmutableInclusion,
        Postulate::Vacuity1,
        Postulate::Vacuity2,
        Postulate::Consistency,
        Postulate::Preservation,
        Postulate::StrongRelevance,
        Postulate::Relevance,
        Postulate::WeakRelevance,
    ];

    /// KB*1 to KB*6.
    pub const CORE: [Postulate; 8] = [
        Postulate::Closure,
        Postulate::WeakSuccess,
        Postulate::Inclusion,
        Postulate::ImmutableInclusion,
        Postulate::Vacuity1,
        Postulate::Vacuity2,
        Postulate::Consistency,
        Postulate::Preservation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Postulate::Closure => "KB*1",
            Postulate::WeakSuccess => "KB*2",
            Postulate::Inclusion => "KB*3.1",
            Postulate::ImmutableInclusion => "KB*3.2",
            Postulate::Vacuity1 => "KB*4.1",
            Postulate::Vacuity2 => "KB*4.2",
            Postulate::Consistency => "KB*5",
            Postulate::Preservation => "KB*6",
            Postulate::StrongRelevance => "KB*7.1",
            Postulate::Relevance => "KB*7.2",
            Postulate::WeakRelevance => "KB*7.3",
        }
    }
}

impl fmt::Display for Postulate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// With the evidence checked.
    Holds(String),
    Fails(String),
    Skipped(String),
}

impl Verdict {
    pub fn is_failure(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PostulateReport {
    pub verdicts: Vec<(Postulate, Verdict)>,
}

impl PostulateReport {
    pub fn get(&self, p: Postulate) -> &Verdict {
        &self.verdicts.iter().find(|(q, _)| *q == p).expect("every postulate is checked").1
    }

    pub fn failures(&self) -> Vec<Postulate> {
        self.verdicts.iter().filter(|(_, v)| v.is_failure()).map(|(p, _)| *p).collect()
    }

    /// Whether none of `which` fails.
    pub fn passes(&self, which: &[Postulate]) -> bool {
        which.iter().all(|p| !self.get(*p).is_failure())
    }

    pub fn skipped(&self, which: &[Postulate]) -> usize {
        which.iter().filter(|p| matches!(self.get(**p), Verdict::Skipped(_))).count()
    }
}

impl fmt::Display for PostulateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, v) in &self.verdicts {
            let (word, detail) = match v {
                Verdict::Holds(d) => ("holds", d),
                Verdict::Fails(d) => ("fails", d),
                Verdict::Skipped(d) => ("skipped", d),
            };
            writeln!(f, "{p}\t{word}\t{detail}")?;
        }
        Ok(())
    }
}

/// Largest number of base atoms tried exhaustively as an extension.
pub const BRUTE_FORCE_ATOMS: usize = 12;
/// Largest candidate pool for the relevance searches.
pub const RELEVANCE_POOL: usize = 14;

fn all_hold(alpha: &[Literal], m: &Interpretation) -> bool {
    alpha.iter().all(|l| holds(l, m))
}

fn show_alpha(alpha: &[Literal]) -> String {
    let v: Vec<String> = alpha.iter().map(Literal::to_string).collect();
    v.join(", ")
}

fn show_atoms<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> String {
    let v: Vec<String> = atoms.into_iter().map(Atom::to_string).collect();
    format!("{{{}}}", v.join(", "))
}

/// Whether some base fact set extending `facts` satisfies `kb`'s
/// constraints and every literal of `alpha`. `None` when undecided.
pub fn realizable_from(kb: &KnowledgeBase, facts: &BTreeSet<Atom>, alpha: &[Literal]) -> Result<Option<bool>> {
    let eval = Evaluator::new(&kb.idb)?;
    let good = |f: &BTreeSet<Atom>| {
        let m = eval.model(f);
        all_hold(alpha, &m) && satisfies(&m, &kb.ic)
    };
    let extra: Vec<&Atom> = alpha.iter().map(|l| &l.atom).collect();
    let free: Vec<Atom> = base_herbrand(kb, &extra).into_iter().filter(|a| !facts.contains(a)).collect();
    let monotone = kb.is_definite() && kb.ic.iter().all(Constraint::is_positive);
    if monotone {
        // Adding facts only derives more, so minimal extensions suffice.
        let pos: Vec<&Literal> = alpha.iter().filter(|l| l.positive).collect();
        match pos.as_slice() {
            [] => return Ok(Some(good(facts))),
            [l] => {
                if !kb.is_view(&l.atom) {
                    let mut f = facts.clone();
                    f.insert(l.atom.clone());
                    return Ok(Some(good(&f)));
                }
                let at = kb.with_edb(facts.iter().cloned());
                if eval.model(facts).contains(&l.atom) {
                    return Ok(Some(good(facts)));
                }
                let found = abductive_candidates(&at, &l.atom)?.into_iter().any(|d| {
                    let mut f = facts.clone();
                    f.extend(d);
                    good(&f)
                });
                return Ok(Some(found));
            }
            _ => {}
        }
    }
    if free.len() > BRUTE_FORCE_ATOMS {
        return Ok(None);
    }
    for mask in 0u64..1 << free.len() {
        let mut f = facts.clone();
        f.extend(free.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| a.clone()));
        if good(&f) {
            return Ok(Some(true));
        }
    }
    Ok(Some(false))
}

/// Base atoms a revision by `alpha` may add: positive base literals and
/// the base atoms on abductive derivations of positive view literals.
pub fn abductive_closure(kb: &KnowledgeBase, alpha: &[Literal]) -> Result<BTreeSet<Atom>> {
    let mut out = BTreeSet::new();
    for l in alpha.iter().filter(|l| l.positive) {
        if kb.is_view(&l.atom) {
            out.extend(abducibles(kb, &l.atom)?);
        } else {
            out.insert(l.atom.clone());
        }
    }
    Ok(out)
}

/// A revision operator, used to compare revisions by equivalent inputs.
pub type Operator<'a> = &'a dyn Fn(&KnowledgeBase, &[Literal]) -> Result<KnowledgeBase>;

pub fn check_postulates(kb: &KnowledgeBase, alpha: &[Literal], kb_new: &KnowledgeBase) -> Result<PostulateReport> {
    check_postulates_with(kb, alpha, kb_new, None)
}

pub fn check_postulates_with(
    kb: &KnowledgeBase,
    alpha: &[Literal],
    kb_new: &KnowledgeBase,
    operator: Option<Operator<'_>>,
) -> Result<PostulateReport> {
    let c = Checker::new(kb, alpha, kb_new)?;
    let verdicts = vec![
        (Postulate::Closure, c.closure()),
        (Postulate::WeakSuccess, c.weak_success()),
        (Postulate::Inclusion, c.inclusion()?),
        (Postulate::ImmutableInclusion, c.immutable_inclusion()),
        (Postulate::Vacuity1, c.vacuity1()),
        (Postulate::Vacuity2, c.vacuity2()),
        (Postulate::Consistency, c.consistency()),
        (Postulate::Preservation, c.preservation(operator)?),
        (Postulate::StrongRelevance, c.strong_relevance()?),
        (Postulate::Relevance, c.relevance(true)?),
        (Postulate::WeakRelevance, c.relevance(false)?),
    ];
    Ok(PostulateReport { verdicts })
}

struct Checker<'a> {
    kb: &'a KnowledgeBase,
    alpha: &'a [Literal],
    new: &'a KnowledgeBase,
    realizable: Option<bool>,
    new_model: Option<Interpretation>,
}

const UNDECIDED: &str = "consistency of the input with the rules and constraints undecided";

impl<'a> Checker<'a> {
    fn new(kb: &'a KnowledgeBase, alpha: &'a [Literal], new: &'a KnowledgeBase) -> Result<Self> {
        let realizable = realizable_from(kb, &BTreeSet::new(), alpha)?;
        let new_model = Evaluator::new(&new.idb).ok().map(|e| e.model(&new.edb));
        Ok(Checker { kb, alpha, new, realizable, new_model })
    }

    fn closure(&self) -> Verdict {
        let problems = validate(self.new);
        if !problems.is_empty() {
            return Verdict::Fails(problems.join("; "));
        }
        match &self.new_model {
            Some(_) => Verdict::Holds("valid and stratified".into()),
            None => Verdict::Fails("result is not stratifiable".into()),
        }
    }

    fn weak_success(&self) -> Verdict {
        match (self.realizable, &self.new_model) {
            (None, _) => Verdict::Skipped(UNDECIDED.into()),
            (Some(false), _) => Verdict::Holds("input inconsistent with the rules and constraints".into()),
            (Some(true), None) => Verdict::Fails("result has no model".into()),
            (Some(true), Some(m)) => match self.alpha.iter().find(|l| !holds(l, m)) {
                Some(l) => Verdict::Fails(l.to_string()),
                None => Verdict::Holds(show_alpha(self.alpha)),
            },
        }
    }

    fn inclusion(&self) -> Result<Verdict> {
        if let Some(r) = self.new.idb.iter().find(|r| !self.kb.idb.contains(r)) {
            return Ok(Verdict::Fails(format!("new rule {r}")));
        }
        if let Some(c) = self.new.ic.iter().find(|c| !self.kb.ic.contains(c)) {
            return Ok(Verdict::Fails(format!("new constraint {c}")));
        }
        let mut facts = self.kb.edb.clone();
        facts.extend(abductive_closure(self.kb, self.alpha)?);
        let m = Evaluator::new(&self.kb.idb)?.model(&facts);
        Ok(match self.new.edb.iter().find(|a| !m.contains(*a)) {
            Some(a) => Verdict::Fails(a.to_string()),
            None => Verdict::Holds(format!("{} facts derivable", self.new.edb.len())),
        })
    }

    fn immutable_inclusion(&self) -> Verdict {
        match self.kb.idb.iter().find(|r| !self.new.idb.contains(r)) {
            Some(r) => Verdict::Fails(r.to_string()),
            None => Verdict::Holds(format!("{} rules kept", self.kb.idb.len())),
        }
    }

    fn vacuity1(&self) -> Verdict {
        match self.realizable {
            None => Verdict::Skipped(UNDECIDED.into()),
            Some(true) => Verdict::Holds("input consistent with the rules and constraints".into()),
            Some(false) if self.new == self.kb => Verdict::Holds("unchanged".into()),
            Some(false) => Verdict::Fails(diff(self.kb, self.new)),
        }
    }

    fn vacuity2(&self) -> Verdict {
        // KB ∪ α as a knowledge base: base literals change the facts, view
        // literals must already hold.
        let mut facts = self.kb.edb.clone();
        for l in self.alpha {
            if self.kb.is_view(&l.atom) {
                continue;
            }
            if l.positive {
                facts.insert(l.atom.clone());
            } else if facts.contains(&l.atom) {
                return Verdict::Holds(format!("{} contradicts a fact", l));
            }
        }
        let Ok(eval) = Evaluator::new(&self.kb.idb) else {
            return Verdict::Skipped("input not stratifiable".into());
        };
        let m = eval.model(&facts);
        if !satisfies(&m, &self.kb.ic) {
            return Verdict::Holds("KB ∪ α violates a constraint".into());
        }
        if let Some(l) = self.alpha.iter().find(|l| !holds(l, &m)) {
            if self.kb.is_view(&l.atom) && l.positive {
                return Verdict::Skipped(format!("{l} is a view atom not derivable, KB ∪ α is not a database"));
            }
            return Verdict::Holds(format!("KB ∪ α refutes {l}"));
        }
        let expected = self.kb.with_edb(facts);
        if self.new.edb == expected.edb && self.new.idb == expected.idb && self.new.ic == expected.ic {
            Verdict::Holds("KB ∪ α".into())
        } else {
            Verdict::Fails(diff(&expected, self.new))
        }
    }

    fn consistency(&self) -> Verdict {
        match (self.realizable, &self.new_model) {
            (None, _) => Verdict::Skipped(UNDECIDED.into()),
            (Some(false), _) => Verdict::Holds("input inconsistent with the rules and constraints".into()),
            (Some(true), None) => Verdict::Fails("result has no model".into()),
            (Some(true), Some(m)) => match crate::eval::violations_in(m, &self.new.ic).first() {
                Some(v) => Verdict::Fails(v.to_string()),
                None => Verdict::Holds("no violation".into()),
            },
        }
    }

    fn preservation(&self, operator: Option<Operator<'_>>) -> Result<Verdict> {
        let Some(op) = operator else {
            return Ok(Verdict::Skipped("no revision operator supplied".into()));
        };
        let [lit] = self.alpha else {
            return Ok(Verdict::Skipped("input has several literals".into()));
        };
        let eval = Evaluator::new(&self.kb.idb)?;
        let base = crate::revision::herbrand_atoms(&self.kb.arities(), &{
            let mut u = self.kb.constants();
            u.extend(lit.atom.constants().cloned());
            u
        });
        let mut pool: BTreeSet<Atom> = base.into_iter().collect();
        pool.insert(lit.atom.clone());
        // KB-equivalence over the empty set and all singleton fact sets.
        let probes: Vec<BTreeSet<Atom>> =
            std::iter::once(BTreeSet::new()).chain(pool.iter().map(|a| BTreeSet::from([a.clone()]))).collect();
        let entails = |e: &BTreeSet<Atom>, l: &Literal| holds(l, &eval.model(e));
        let mut tried = 0;
        // The operator's own choice for α, which may differ from the
        // alternative under test when several exist.
        let chosen = op(self.kb, self.alpha)?;
        let mine = Evaluator::new(&chosen.idb)?.model(&chosen.edb);
        for b in &pool {
            let beta = Literal { atom: b.clone(), positive: lit.positive };
            if probes.iter().any(|e| entails(e, lit) != entails(e, &beta)) {
                continue;
            }
            tried += 1;
            let other = op(self.kb, std::slice::from_ref(&beta))?;
            let theirs = Evaluator::new(&other.idb)?.model(&other.edb);
            if theirs != mine || other.ic != chosen.ic {
                return Ok(Verdict::Fails(format!("{beta}: {}", diff(&chosen, &other))));
            }
        }
        Ok(Verdict::Holds(format!("sampled, {tried} equivalent literals")))
    }

    fn strong_relevance(&self) -> Result<Verdict> {
        let no_ic = KnowledgeBase { ic: Vec::new(), ..self.kb.clone() };
        let Some(m) = &self.new_model else {
            return Ok(Verdict::Fails("result has no model".into()));
        };
        Ok(match realizable_from(&no_ic, &BTreeSet::new(), self.alpha)? {
            None => Verdict::Skipped("derivability of the negated input undecided".into()),
            Some(false) => Verdict::Holds("rules refute the input".into()),
            Some(true) => match self.alpha.iter().find(|l| !holds(l, m)) {
                Some(l) => Verdict::Fails(l.to_string()),
                None => Verdict::Holds(show_alpha(self.alpha)),
            },
        })
    }

    /// Every removed fact must be needed: some `KB'` consistent with `α`
    /// turns inconsistent once the fact is added. For KB*7.2 `KB'` also
    /// contains the result.
    fn relevance(&self, anchored: bool) -> Result<Verdict> {
        let removed: Vec<&Atom> = self.kb.edb.difference(&self.new.edb).collect();
        if removed.is_empty() {
            return Ok(Verdict::Holds("nothing removed".into()));
        }
        let mut pool = self.kb.edb.clone();
        pool.extend(abductive_closure(self.kb, self.alpha)?);
        let fixed: BTreeSet<Atom> = if anchored { self.new.edb.clone() } else { BTreeSet::new() };
        if !fixed.is_subset(&pool) {
            return Ok(Verdict::Fails(format!("result adds {} outside KB ∪ α", show_atoms(fixed.difference(&pool)))));
        }
        for beta in removed {
            let free: Vec<&Atom> = pool.iter().filter(|a| *a != beta && !fixed.contains(*a)).collect();
            if free.len() > RELEVANCE_POOL {
                return Ok(Verdict::Skipped(format!("{} candidate facts", free.len())));
            }
            let mut found = None;
            let mut undecided = false;
            for mask in 0u64..1 << free.len() {
                let mut k = fixed.clone();
                k.extend(free.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| (*a).clone()));
                let mut with = k.clone();
                with.insert(beta.clone());
                match (realizable_from(self.kb, &k, self.alpha)?, realizable_from(self.kb, &with, self.alpha)?) {
                    (Some(true), Some(false)) => {
                        found = Some(k);
                        break;
                    }
                    (None, _) | (_, None) => undecided = true,
                    _ => {}
                }
            }
            match found {
                Some(_) => {}
                None if undecided => return Ok(Verdict::Skipped(format!("relevance of {beta} undecided"))),
                None => return Ok(Verdict::Fails(beta.to_string())),
            }
        }
        Ok(Verdict::Holds(format!("{} removed facts relevant", self.kb.edb.difference(&self.new.edb).count())))
    }
}

fn diff(old: &KnowledgeBase, new: &KnowledgeBase) -> String {
    let mut parts: Vec<String> = new.edb.difference(&old.edb).map(|a| format!("+{a}")).collect();
    parts.extend(old.edb.difference(&new.edb).map(|a| format!("-{a}")));
    if old.idb != new.idb {
        parts.push("rules differ".into());
    }
    if old.ic != new.ic {
        parts.push("constraints differ".into());
    }
    if parts.is_empty() {
        "identical".into()
    } else {
        parts.join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_atom, parse_database};
    use crate::revision::generalized_revision;

    const VIEWS: &str = "p :- a, e. q :- a, f. p :- b, f. q :- b, e. p :- q. q :- a. a. e. f. :- b.";

    fn lit(s: &str) -> Literal {
        match s.strip_prefix("not ") {
            Some(a) => Literal::neg(parse_atom(a).unwrap()),
            None => Literal::pos(parse_atom(s).unwrap()),
        }
    }

    fn op(kb: &KnowledgeBase, a: &[Literal]) -> Result<KnowledgeBase> {
        generalized_revision(kb, &a[0])
    }

    #[test]
    fn revision_outputs_pass() {
        let kb = parse_database(VIEWS).unwrap();
        for (edb, a) in [(None, "p"), (Some(vec!["e", "f"]), "p"), (None, "not p"), (None, "b"), (None, "not a")] {
            let kb = match edb {
                Some(f) => kb.with_edb(f.iter().map(|x| Atom::prop(x))),
                None => kb.clone(),
            };
            let alpha = [lit(a)];
            let new = generalized_revision(&kb, &alpha[0]).unwrap();
            let r = check_postulates_with(&kb, &alpha, &new, Some(&op)).unwrap();
            let claimed: Vec<Postulate> = Postulate::CORE.into_iter().chain([Postulate::WeakRelevance]).collect();
            assert!(r.passes(&claimed), "{a}\n{r}");
            // A constraint-blocked input stays out, which strong relevance forbids.
            assert_eq!(r.get(Postulate::StrongRelevance).is_failure(), a == "b", "{a}\n{r}");
            let decided: Vec<Postulate> = Postulate::ALL.into_iter().filter(|p| *p != Postulate::Vacuity2).collect();
            assert_eq!(r.skipped(&decided), 0, "{a}\n{r}");
        }
    }

    #[test]
    fn weak_success_failure() {
        let kb = parse_database("p :- a. a.").unwrap();
        let alpha = [lit("p")];
        let bad = kb.with_edb([]);
        let r = check_postulates(&kb, &alpha, &bad).unwrap();
        assert_eq!(r.get(Postulate::WeakSuccess), &Verdict::Fails("p".into()));
        assert!(r.get(Postulate::Vacuity2).is_failure());
    }

    #[test]
    fn dropped_rule() {
        let kb = parse_database("p :- a. q :- a. a.").unwrap();
        let mut bad = kb.clone();
        bad.idb.pop();
        let r = check_postulates(&kb, &[lit("p")], &bad).unwrap();
        assert_eq!(r.get(Postulate::ImmutableInclusion), &Verdict::Fails("q :- a.".into()));
    }

    #[test]
    fn irrelevant_removal() {
        let kb = parse_database("p :- a. a. e.").unwrap();
        let good = kb.with_edb([Atom::prop("e")]);
        let over = kb.with_edb([]);
        let alpha = [lit("not p")];
        assert!(check_postulates(&kb, &alpha, &good).unwrap().failures().is_empty());
        let r = check_postulates(&kb, &alpha, &over).unwrap();
        assert_eq!(r.get(Postulate::WeakRelevance), &Verdict::Fails("e".into()));
    }

    #[test]
    fn report_lines() {
        let kb = parse_database("p :- a.").unwrap();
        let r = check_postulates(&kb, &[lit("a")], &kb.with_edb([Atom::prop("a")])).unwrap();
        let text = r.to_string();
        assert_eq!(text.lines().count(), 11);
        assert!(text.starts_with("KB*1\tholds\t"));
        assert!(text.contains("KB*6\tskipped\tno revision operator supplied"));
    }
}
