//! View update requests, VU rules and realization search.
//!
//! Rules are first normalized so that every predicate falls into one of the
//! shapes that have VU rules: a join of two positive literals, a positive
//! and a negative literal, a union of copies, a copy, a complement, or a
//! projection of one variable. Auxiliary predicates created on the way have
//! a `#` in their name.
//!
//! Realizations are searched breadth first over worlds, each world a set of
//! ∇-atoms closed under the VU rules, splitting on disjunctive heads.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::eval::{holds, satisfies, Evaluator, Interpretation};
use crate::hitting_set::minimize;
use crate::syntax::{Atom, Database, Literal, Name, Rule, Subst, Term};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VuRequest {
    pub inserts: BTreeSet<Atom>,
    pub deletes: BTreeSet<Atom>,
}

impl VuRequest {
    pub fn insert(a: Atom) -> Self {
        VuRequest { inserts: BTreeSet::from([a]), deletes: BTreeSet::new() }
    }

    pub fn delete(a: Atom) -> Self {
        VuRequest { inserts: BTreeSet::new(), deletes: BTreeSet::from([a]) }
    }

    pub fn is_empty(&self) -> bool {
        self.inserts.is_empty() && self.deletes.is_empty()
    }

    /// Invariant violations against `db` with perfect model `model`.
    pub fn violations(&self, db: &Database, model: &Interpretation) -> Vec<String> {
        let mut out = Vec::new();
        for a in self.inserts.iter().chain(&self.deletes) {
            if !a.is_ground() {
                out.push(format!("{a} is not ground"));
            } else if !db.is_view(a) {
                out.push(format!("{a} is not a view atom"));
            }
        }
        for a in self.inserts.intersection(&self.deletes) {
            out.push(format!("{a} is both inserted and deleted"));
        }
        for a in &self.inserts {
            if model.contains(a) {
                out.push(format!("{a} is already derivable"));
            }
        }
        for a in &self.deletes {
            if !model.contains(a) {
                out.push(format!("{a} is not derivable"));
            }
        }
        out
    }

    pub fn constants(&self) -> BTreeSet<Name> {
        self.inserts.iter().chain(&self.deletes).flat_map(|a| a.constants().cloned()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    Plus,
    Minus,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::Plus => Dir::Minus,
            Dir::Minus => Dir::Plus,
        }
    }
}

/// `∇⁺p(t)` or `∇⁻p(t)`, printed `+p(t)` and `-p(t)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeltaAtom {
    pub dir: Dir,
    pub atom: Atom,
}

impl DeltaAtom {
    pub fn plus(atom: Atom) -> Self {
        DeltaAtom { dir: Dir::Plus, atom }
    }

    pub fn minus(atom: Atom) -> Self {
        DeltaAtom { dir: Dir::Minus, atom }
    }

    fn apply(&self, s: &Subst) -> Self {
        DeltaAtom { dir: self.dir, atom: self.atom.apply(s) }
    }

    /// True without any change: the atom is already in (for `+`) or out
    /// of (for `-`) the model.
    fn achieved(&self, model: &Interpretation) -> bool {
        model.contains(&self.atom) == (self.dir == Dir::Plus)
    }
}

impl fmt::Display for DeltaAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.dir {
            Dir::Plus => '+',
            Dir::Minus => '-',
        };
        write!(f, "{sign}{}", self.atom)
    }
}

pub fn vu_seeds(req: &VuRequest) -> BTreeSet<DeltaAtom> {
    req.inserts.iter().cloned().map(DeltaAtom::plus).chain(req.deletes.iter().cloned().map(DeltaAtom::minus)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VuLiteral {
    Delta(DeltaAtom),
    Plain(Literal),
}

impl fmt::Display for VuLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VuLiteral::Delta(d) => write!(f, "{d}"),
            VuLiteral::Plain(l) => write!(f, "{l}"),
        }
    }
}

/// The rule shapes that have VU rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// `p ← q ∧ r`
    Join,
    /// `p ← q ∧ ¬r`
    Difference,
    /// `p ← q`, `p ← r`, ...
    Union,
    /// `p ← q` with the same variables
    Copy,
    /// `p ← ¬q`
    Complement,
    /// `p(x) ← q(x, Y)`
    Projection,
}

/// `h1 | ... | hn :- body.` over ∇-atoms and plain literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VuRule {
    pub head: Vec<DeltaAtom>,
    pub body: Vec<VuLiteral>,
    pub case: Case,
}

impl fmt::Display for VuRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<String> = self.head.iter().map(DeltaAtom::to_string).collect();
        let body: Vec<String> = self.body.iter().map(VuLiteral::to_string).collect();
        write!(f, "{} :- {}.", head.join(" | "), body.join(", "))
    }
}

fn vars_of<'a>(lits: impl IntoIterator<Item = &'a Literal>) -> Vec<Name> {
    let mut out: Vec<Name> = Vec::new();
    for l in lits {
        for v in l.atom.vars() {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
    }
    out
}

fn atom_vars(a: &Atom) -> Vec<Name> {
    vars_of([&Literal::pos(a.clone())])
}

fn var_atom(pred: &str, vars: &[Name]) -> Atom {
    Atom { pred: pred.into(), args: vars.iter().map(|v| Term::Var(v.clone())).collect() }
}

struct AuxNames<'a> {
    base: &'a str,
    next: usize,
}

impl AuxNames<'_> {
    fn fresh(&mut self) -> String {
        self.next += 1;
        format!("{}#aux{}", self.base, self.next)
    }
}

/// Rewrites `idb` into rules that each match one VU rule case. The
/// normalized program has the same perfect model on the original
/// predicates.
pub fn normalize(idb: &[Rule]) -> Result<Vec<Rule>> {
    let mut groups: Vec<(Name, Vec<&Rule>)> = Vec::new();
    for r in idb {
        if r.head.len() != 1 {
            return Err(Error::Normalization(format!("{r} is disjunctive")));
        }
        let p = &r.head[0].pred;
        match groups.iter_mut().find(|(q, _)| q == p) {
            Some((_, g)) => g.push(r),
            None => groups.push((p.clone(), vec![r])),
        }
    }
    let mut out = Vec::new();
    for (pred, rules) in groups {
        if rules.len() == 1 {
            chain(rules[0], &mut out)?;
            continue;
        }
        let arity = rules[0].head[0].arity();
        let vars: Vec<Name> = (1..=arity).map(|i| Name::from(format!("V#{i}"))).collect();
        let head = var_atom(&pred, &vars);
        for (i, r) in rules.iter().enumerate() {
            let alt = format!("{pred}#{}", i + 1);
            out.push(Rule::new(head.clone(), vec![Literal::pos(var_atom(&alt, &vars))]));
            let mut renamed = (*r).clone();
            renamed.head[0].pred = alt.into();
            chain(&renamed, &mut out)?;
        }
    }
    Ok(out)
}

/// Binarizes one rule, positives first, and splits off projections one
/// variable at a time.
fn chain(rule: &Rule, out: &mut Vec<Rule>) -> Result<()> {
    let head = rule.head[0].clone();
    let base = head.pred.clone();
    let mut names = AuxNames { base: &base, next: 0 };
    let guards: Vec<Literal> = rule.body.iter().filter(|l| l.atom.is_builtin()).cloned().collect();
    let mut lits: Vec<Literal> = rule.body.iter().filter(|l| !l.atom.is_builtin() && l.positive).cloned().collect();
    lits.extend(rule.body.iter().filter(|l| !l.atom.is_builtin() && !l.positive).cloned());
    if lits.is_empty() {
        return Err(Error::Normalization(format!("{rule} has no database literal in its body")));
    }
    let mut acc = lits[0].clone();
    if !acc.positive && lits.len() > 1 {
        let a = var_atom(&names.fresh(), &atom_vars(&acc.atom));
        out.push(Rule::new(a.clone(), vec![acc]));
        acc = Literal::pos(a);
    }
    for l in lits.iter().take(lits.len().saturating_sub(1)).skip(1) {
        let u = vars_of([&acc, l]);
        let a = var_atom(&names.fresh(), &u);
        out.push(Rule::new(a.clone(), vec![acc, l.clone()]));
        acc = Literal::pos(a);
    }
    let mut body = vec![acc];
    if lits.len() > 1 {
        body.push(lits[lits.len() - 1].clone());
    }
    let x = atom_vars(&head);
    let u = vars_of(&body);
    let extra: Vec<Name> = u.iter().filter(|v| !x.contains(v)).cloned().collect();
    if extra.is_empty() {
        body.extend(guards);
        out.push(Rule::new(head, body));
        return Ok(());
    }
    let source = if guards.is_empty() && body.len() == 1 {
        body.pop().unwrap()
    } else {
        let b = var_atom(&names.fresh(), &u);
        body.extend(guards);
        out.push(Rule::new(b.clone(), body));
        Literal::pos(b)
    };
    let mut cur = head;
    let mut bound = x;
    for y in &extra[..extra.len() - 1] {
        bound.push(y.clone());
        let next = var_atom(&names.fresh(), &bound);
        out.push(Rule::new(cur, vec![Literal::pos(next.clone())]));
        cur = next;
    }
    out.push(Rule::new(cur, vec![source]));
    Ok(())
}

fn set(v: Vec<Name>) -> BTreeSet<Name> {
    v.into_iter().collect()
}

/// Case of a rule that is the only one for its head predicate.
pub fn classify(rule: &Rule) -> Option<Case> {
    if rule.head.len() != 1 {
        return None;
    }
    let lits: Vec<&Literal> = rule.body.iter().filter(|l| !l.atom.is_builtin()).collect();
    let hv = set(atom_vars(&rule.head[0]));
    match lits.as_slice() {
        [q, r] if q.positive && r.positive => (hv == set(vars_of([*q, *r]))).then_some(Case::Join),
        [q, r] if q.positive && !r.positive => (hv == set(vars_of([*q, *r]))).then_some(Case::Difference),
        [q] if q.positive => {
            let bv = set(atom_vars(&q.atom));
            if bv == hv {
                Some(Case::Copy)
            } else if hv.is_subset(&bv) && bv.len() == hv.len() + 1 {
                Some(Case::Projection)
            } else {
                None
            }
        }
        [q] => set(atom_vars(&q.atom)).is_subset(&hv).then_some(Case::Complement),
        _ => None,
    }
}

fn is_union_member(rule: &Rule) -> bool {
    let head = &rule.head[0];
    let distinct = set(atom_vars(head)).len() == head.arity() && head.args.iter().all(Term::is_var);
    match rule.body.as_slice() {
        [l] => l.positive && !l.atom.is_builtin() && distinct && l.atom.args == head.args,
        _ => false,
    }
}

/// The VU rules of a normalized rule set. Projection rules enumerate
/// `universe` plus one fresh constant `_new_<n>` per projection rule.
pub fn vu_rules(idb: &[Rule], universe: &BTreeSet<Name>) -> Result<Vec<VuRule>> {
    let mut groups: Vec<(Name, Vec<&Rule>)> = Vec::new();
    for r in idb {
        let Some(h) = r.head.first().filter(|_| r.head.len() == 1) else {
            return Err(Error::Normalization(format!("{r} is disjunctive")));
        };
        match groups.iter_mut().find(|(q, _)| *q == h.pred) {
            Some((_, g)) => g.push(r),
            None => groups.push((h.pred.clone(), vec![r])),
        }
    }
    let plus = |a: &Atom| DeltaAtom::plus(a.clone());
    let minus = |a: &Atom| DeltaAtom::minus(a.clone());
    let d = |x: DeltaAtom| VuLiteral::Delta(x);
    let pl = |l: &Literal| VuLiteral::Plain(l.clone());
    let mut out = Vec::new();
    let mut projections = 0;
    for (_, rules) in groups {
        if rules.len() > 1 {
            if !rules.iter().all(|r| is_union_member(r)) {
                let r = rules.iter().find(|r| !is_union_member(r)).unwrap();
                return Err(Error::Normalization(format!("{r} shares its head predicate with other rules")));
            }
            let head = rules[0].head[0].clone();
            let members: Vec<Atom> = rules
                .iter()
                .map(|r| {
                    let s: Subst = r.head[0]
                        .args
                        .iter()
                        .zip(&head.args)
                        .filter_map(|(a, b)| match (a, b) {
                            (Term::Var(a), Term::Var(b)) => Some((a.clone(), b.clone())),
                            _ => None,
                        })
                        .collect();
                    rename(&r.body[0].atom, &s)
                })
                .collect();
            for m in &members {
                out.push(VuRule {
                    head: vec![minus(m)],
                    body: vec![d(minus(&head)), pl(&Literal::pos(m.clone()))],
                    case: Case::Union,
                });
            }
            out.push(VuRule {
                head: members.iter().map(plus).collect(),
                body: vec![d(plus(&head))],
                case: Case::Union,
            });
            continue;
        }
        let r = rules[0];
        let p = &r.head[0];
        let guards: Vec<VuLiteral> = r.body.iter().filter(|l| l.atom.is_builtin()).map(pl).collect();
        let lits: Vec<&Literal> = r.body.iter().filter(|l| !l.atom.is_builtin()).collect();
        let with = |first: VuLiteral, extra: Vec<VuLiteral>| {
            let mut b = vec![first];
            b.extend(guards.iter().cloned());
            b.extend(extra);
            b
        };
        let case = classify(r).ok_or_else(|| Error::Normalization(r.to_string()))?;
        match case {
            Case::Join => {
                let (q, s) = (&lits[0].atom, &lits[1].atom);
                out.push(VuRule {
                    head: vec![plus(q)],
                    body: with(d(plus(p)), vec![pl(&Literal::neg(q.clone()))]),
                    case,
                });
                out.push(VuRule {
                    head: vec![plus(s)],
                    body: with(d(plus(p)), vec![pl(&Literal::neg(s.clone()))]),
                    case,
                });
                out.push(VuRule { head: vec![minus(q), minus(s)], body: with(d(minus(p)), vec![]), case });
            }
            Case::Difference => {
                let (q, s) = (&lits[0].atom, &lits[1].atom);
                out.push(VuRule {
                    head: vec![plus(q)],
                    body: with(d(plus(p)), vec![pl(&Literal::neg(q.clone()))]),
                    case,
                });
                out.push(VuRule {
                    head: vec![minus(s)],
                    body: with(d(plus(p)), vec![pl(&Literal::pos(s.clone()))]),
                    case,
                });
                out.push(VuRule { head: vec![minus(q), plus(s)], body: with(d(minus(p)), vec![]), case });
            }
            Case::Copy => {
                let q = &lits[0].atom;
                out.push(VuRule { head: vec![plus(q)], body: with(d(plus(p)), vec![]), case });
                out.push(VuRule { head: vec![minus(q)], body: with(d(minus(p)), vec![]), case });
            }
            Case::Complement => {
                let q = &lits[0].atom;
                out.push(VuRule { head: vec![minus(q)], body: with(d(plus(p)), vec![]), case });
                out.push(VuRule { head: vec![plus(q)], body: with(d(minus(p)), vec![]), case });
            }
            Case::Projection => {
                projections += 1;
                let q = &lits[0].atom;
                let hv = atom_vars(p);
                let y = atom_vars(q).into_iter().find(|v| !hv.contains(v)).unwrap();
                out.push(VuRule {
                    head: vec![minus(q)],
                    body: with(d(minus(p)), vec![pl(&Literal::pos(q.clone()))]),
                    case,
                });
                let fresh: Name = format!("_new_{projections}").into();
                let head = universe
                    .iter()
                    .chain(std::iter::once(&fresh))
                    .map(|c| plus(&q.apply(&Subst::from([(y.clone(), c.clone())]))))
                    .collect();
                out.push(VuRule { head, body: with(d(plus(p)), vec![]), case });
            }
            Case::Union => unreachable!(),
        }
    }
    Ok(out)
}

fn rename(a: &Atom, s: &Subst) -> Atom {
    Atom {
        pred: a.pred.clone(),
        args: a
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Var(s.get(v).cloned().unwrap_or_else(|| v.clone())),
                c => c.clone(),
            })
            .collect(),
    }
}

/// A base-fact transaction `⟨u⁺, u⁻⟩`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transaction {
    pub inserts: BTreeSet<Atom>,
    pub deletes: BTreeSet<Atom>,
}

impl Transaction {
    pub fn len(&self) -> usize {
        self.inserts.len() + self.deletes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn apply(&self, edb: &BTreeSet<Atom>) -> BTreeSet<Atom> {
        let mut out: BTreeSet<Atom> = edb.difference(&self.deletes).cloned().collect();
        out.extend(self.inserts.iter().cloned());
        out
    }

    /// Both parts are subsets of the other's.
    pub fn is_subset(&self, other: &Transaction) -> bool {
        self.inserts.is_subset(&other.inserts) && self.deletes.is_subset(&other.deletes)
    }

    /// The transaction without one of its changes, for each change.
    pub fn without_each(&self) -> Vec<Transaction> {
        let mut out = Vec::new();
        for a in &self.inserts {
            let mut t = self.clone();
            t.inserts.remove(a);
            out.push(t);
        }
        for a in &self.deletes {
            let mut t = self.clone();
            t.deletes.remove(a);
            out.push(t);
        }
        out
    }

    pub fn merge(&self, other: &Transaction) -> Transaction {
        Transaction {
            inserts: self.inserts.union(&other.inserts).cloned().collect(),
            deletes: self.deletes.union(&other.deletes).cloned().collect(),
        }
    }
}

impl fmt::Display for Transaction {
    /// One line per change: `+fact.` then `-fact.`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.inserts {
            writeln!(f, "+{a}.")?;
        }
        for a in &self.deletes {
            writeln!(f, "-{a}.")?;
        }
        Ok(())
    }
}

/// Sorts by size, then inserts, then deletes.
pub fn sort_transactions(ts: &mut [Transaction]) {
    ts.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
}

/// Drops duplicates and every transaction that contains another one.
pub fn minimize_transactions(ts: impl IntoIterator<Item = Transaction>) -> Vec<Transaction> {
    let mut all: Vec<Transaction> = ts.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    sort_transactions(&mut all);
    let mut out: Vec<Transaction> = Vec::new();
    for t in all {
        if !out.iter().any(|m| m.is_subset(&t)) {
            out.push(t);
        }
    }
    out
}

/// Whether applying `t` makes every insert true and every delete false.
pub fn realizes(eval: &Evaluator, edb: &BTreeSet<Atom>, t: &Transaction, req: &VuRequest) -> bool {
    let m = eval.model(&t.apply(edb));
    req.inserts.iter().all(|a| m.contains(a)) && req.deletes.iter().all(|a| !m.contains(a))
}

/// Applying `t` leaves every constraint satisfied.
pub fn consistent_after(eval: &Evaluator, db: &Database, t: &Transaction) -> bool {
    satisfies(&eval.model(&t.apply(&db.edb)), &db.ic)
}

/// Outcome of the breadth-first search.
#[derive(Clone, Debug, Default)]
pub struct Search {
    /// Distinct transactions read off saturated worlds that realize the
    /// request, in discovery order. Constraints are not checked.
    pub transactions: Vec<Transaction>,
    /// Every ∇-atom that occurs in some world.
    pub consequences: BTreeSet<DeltaAtom>,
    pub worlds: usize,
    pub truncated: bool,
}

/// Upper bound on the number of worlds expanded by [`search`].
pub const MAX_WORLDS: usize = 20_000;

type World = BTreeSet<DeltaAtom>;

struct Matcher<'a> {
    world: &'a World,
    model: &'a Interpretation,
}

impl Matcher<'_> {
    fn solutions(&self, body: &[VuLiteral], s: Subst, out: &mut Vec<Subst>) {
        let Some((first, rest)) = body.split_first() else {
            out.push(s);
            return;
        };
        match first {
            VuLiteral::Delta(d) => {
                for w in self.world.iter().filter(|w| w.dir == d.dir && w.atom.pred == d.atom.pred) {
                    if let Some(s2) = d.atom.match_ground(&w.atom, &s) {
                        self.solutions(rest, s2, out);
                    }
                }
            }
            VuLiteral::Plain(l) => {
                let g = l.apply(&s);
                if g.atom.is_ground() {
                    if holds(&g, self.model) {
                        self.solutions(rest, s, out);
                    }
                } else if l.positive && !l.atom.is_builtin() {
                    for m in self.model.iter().filter(|m| m.pred == l.atom.pred) {
                        if let Some(s2) = l.atom.match_ground(m, &s) {
                            self.solutions(rest, s2, out);
                        }
                    }
                } else {
                    // Non-ground filter: defer it to the end.
                    let mut reordered: Vec<VuLiteral> = rest.to_vec();
                    if reordered.iter().all(|x| matches!(x, VuLiteral::Plain(p) if !p.positive || p.atom.is_builtin()))
                    {
                        return;
                    }
                    reordered.push(first.clone());
                    self.solutions(&reordered, s, out);
                }
            }
        }
    }
}

/// Closes `world` under the deterministic rules. Returns the disjuncts to
/// branch on, or `None` when the world is saturated. `Err` marks a
/// contradictory world.
fn saturate(
    world: &mut World,
    rules: &[VuRule],
    model: &Interpretation,
) -> std::result::Result<Option<Vec<DeltaAtom>>, ()> {
    loop {
        let mut fired = None;
        'rules: for r in rules {
            let mut subs = Vec::new();
            Matcher { world, model }.solutions(&r.body, Subst::new(), &mut subs);
            for s in subs {
                let head: Vec<DeltaAtom> = r.head.iter().map(|h| h.apply(&s)).collect();
                if head.iter().any(|h| world.contains(h) || h.achieved(model)) {
                    continue;
                }
                fired = Some(head);
                break 'rules;
            }
        }
        match fired {
            None => return Ok(None),
            Some(head) if head.len() == 1 => {
                let h = head.into_iter().next().unwrap();
                if world.contains(&DeltaAtom { dir: h.dir.flip(), atom: h.atom.clone() }) {
                    return Err(());
                }
                world.insert(h);
            }
            Some(head) => return Ok(Some(head)),
        }
    }
}

/// Breadth-first search for realizations of `req`.
pub fn search(db: &Database, req: &VuRequest) -> Result<Search> {
    let eval = Evaluator::new(&db.idb)?;
    let normalized = normalize(&db.idb)?;
    let norm_eval = Evaluator::new(&normalized)?;
    let model = norm_eval.model(&db.edb);
    let mut universe = db.constants();
    universe.extend(req.constants());
    let rules = vu_rules(&normalized, &universe)?;
    let views: BTreeSet<Name> = normalized.iter().map(|r| r.head[0].pred.clone()).collect();

    let mut out = Search::default();
    let mut seen_t: BTreeSet<Transaction> = BTreeSet::new();
    let mut seen_w: BTreeSet<World> = BTreeSet::new();
    let mut queue: VecDeque<World> = VecDeque::from([vu_seeds(req)]);
    while let Some(mut world) = queue.pop_front() {
        if out.worlds >= MAX_WORLDS {
            out.truncated = true;
            break;
        }
        out.worlds += 1;
        let split = saturate(&mut world, &rules, &model);
        out.consequences.extend(world.iter().cloned());
        match split {
            Err(()) => {}
            Ok(Some(disjuncts)) => {
                for d in disjuncts {
                    if world.contains(&DeltaAtom { dir: d.dir.flip(), atom: d.atom.clone() }) {
                        continue;
                    }
                    let mut w = world.clone();
                    w.insert(d);
                    if seen_w.insert(w.clone()) {
                        queue.push_back(w);
                    }
                }
            }
            Ok(None) => {
                let mut t = Transaction::default();
                for d in &world {
                    if views.contains(&d.atom.pred) {
                        continue;
                    }
                    match d.dir {
                        Dir::Plus if !db.edb.contains(&d.atom) => {
                            t.inserts.insert(d.atom.clone());
                        }
                        Dir::Minus if db.edb.contains(&d.atom) => {
                            t.deletes.insert(d.atom.clone());
                        }
                        _ => {}
                    }
                }
                if !seen_t.contains(&t) && realizes(&eval, &db.edb, &t, req) {
                    seen_t.insert(t.clone());
                    out.transactions.push(t);
                }
            }
        }
    }
    Ok(out)
}

/// Keeps the insert sets whose every element is needed: with it `a` is
/// derivable, without any single one it is not.
pub fn minimality_filter_insert(candidates: &[BTreeSet<Atom>], db: &Database, a: &Atom) -> Result<Vec<BTreeSet<Atom>>> {
    let eval = Evaluator::new(&db.idb)?;
    let derives = |extra: &BTreeSet<Atom>| {
        let mut f = db.edb.clone();
        f.extend(extra.iter().cloned());
        eval.model(&f).contains(a)
    };
    Ok(candidates
        .iter()
        .filter(|c| {
            derives(c)
                && c.iter().all(|s| {
                    let mut smaller = (*c).clone();
                    smaller.remove(s);
                    !derives(&smaller)
                })
        })
        .cloned()
        .collect())
}

/// No single change of `t` can be dropped without losing the request.
pub fn is_necessary(eval: &Evaluator, db: &Database, t: &Transaction, req: &VuRequest) -> bool {
    t.without_each().iter().all(|s| !realizes(eval, &db.edb, s, req))
}

/// Minimal realizations of an insertion request that keep the
/// constraints satisfied.
pub fn insertion_realizations(db: &Database, req: &VuRequest) -> Result<Vec<Transaction>> {
    let eval = Evaluator::new(&db.idb)?;
    let model = eval.model(&db.edb);
    let problems = req.violations(db, &model);
    if !problems.is_empty() {
        return Err(Error::InvalidRequest(problems));
    }
    let found = search(db, req)?;
    let total = found.transactions.len();
    let good =
        found.transactions.into_iter().filter(|t| consistent_after(&eval, db, t) && is_necessary(&eval, db, t, req));
    let out = minimize_transactions(good);
    if out.is_empty() {
        return Err(Error::Unrealizable {
            trace: vec![format!("{total} candidate transactions, none consistent with the constraints")],
        });
    }
    Ok(out)
}

/// Sets of atoms, grouped for display.
pub fn as_sets(ts: &[Transaction]) -> Vec<(BTreeSet<Atom>, BTreeSet<Atom>)> {
    ts.iter().map(|t| (t.inserts.clone(), t.deletes.clone())).collect()
}

/// Insert sets only, minimized.
pub fn insert_sets(ts: &[Transaction]) -> Vec<BTreeSet<Atom>> {
    minimize(ts.iter().map(|t| t.inserts.clone()))
}

/// Groups VU rules by case, for display.
pub fn by_case(rules: &[VuRule]) -> BTreeMap<String, Vec<String>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for r in rules {
        out.entry(format!("{:?}", r.case)).or_default().push(r.to_string());
    }
    out
}
