//! Abstract syntax for databases: terms, atoms, literals, rules, denial
//! constraints.
//!
//! Names are reference-counted strings so atoms are cheap to clone and can
//! be shared across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

pub type Name = Arc<str>;

/// Name of the built-in syntactic equality predicate `eq/2`.
pub const EQ: &str = "eq";

/// Variable bindings produced by matching. Variables only ever bind to
/// constants since there are no function symbols.
pub type Subst = BTreeMap<Name, Name>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Const(Name),
    Var(Name),
}

impl Term {
    pub fn constant(name: &str) -> Self {
        Term::Const(name.into())
    }

    pub fn var(name: &str) -> Self {
        Term::Var(name.into())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn apply(&self, subst: &Subst) -> Term {
        match self {
            Term::Var(v) => match subst.get(v) {
                Some(c) => Term::Const(c.clone()),
                None => self.clone(),
            },
            Term::Const(_) => self.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) | Term::Var(c) => f.write_str(c),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Atom {
    pub pred: Name,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Self {
        Atom { pred: pred.into(), args }
    }

    /// A propositional atom.
    pub fn prop(pred: &str) -> Self {
        Atom::new(pred, Vec::new())
    }

    /// A ground atom whose arguments are all constants.
    pub fn ground(pred: &str, consts: &[&str]) -> Self {
        Atom::new(pred, consts.iter().map(|c| Term::constant(c)).collect())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn is_builtin(&self) -> bool {
        &*self.pred == EQ && self.args.len() == 2
    }

    pub fn vars(&self) -> impl Iterator<Item = &Name> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        })
    }

    pub fn constants(&self) -> impl Iterator<Item = &Name> {
        self.args.iter().filter_map(|t| match t {
            Term::Const(c) => Some(c),
            Term::Var(_) => None,
        })
    }

    pub fn apply(&self, subst: &Subst) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(|t| t.apply(subst)).collect() }
    }

    /// Extends `subst` so that `self` instantiated by it equals the ground
    /// atom `fact`. Returns `None` on mismatch.
    pub fn match_ground(&self, fact: &Atom, subst: &Subst) -> Option<Subst> {
        if self.pred != fact.pred || self.args.len() != fact.args.len() {
            return None;
        }
        let mut out = subst.clone();
        for (pattern, value) in self.args.iter().zip(&fact.args) {
            let Term::Const(value) = value else {
                return None;
            };
            match pattern {
                Term::Const(c) if c == value => {}
                Term::Const(_) => return None,
                Term::Var(v) => match out.get(v) {
                    Some(bound) if bound == value => {}
                    Some(_) => return None,
                    None => {
                        out.insert(v.clone(), value.clone());
                    }
                },
            }
        }
        Some(out)
    }

    /// Truth of a ground `eq/2` atom.
    pub fn eval_builtin(&self) -> Option<bool> {
        match (self.is_builtin(), &self.args[..]) {
            (true, [Term::Const(a), Term::Const(b)]) => Some(a == b),
            _ => None,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { atom, positive: false }
    }

    pub fn complement(&self) -> Self {
        Literal { atom: self.atom.clone(), positive: !self.positive }
    }

    pub fn apply(&self, subst: &Subst) -> Literal {
        Literal { atom: self.atom.apply(subst), positive: self.positive }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("not ")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// `h1 | ... | hm :- l1, ..., ln.`
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Rule {
    pub head: Vec<Atom>,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn new(head: Atom, body: Vec<Literal>) -> Self {
        Rule { head: vec![head], body }
    }

    pub fn is_definite(&self) -> bool {
        self.head.len() == 1 && self.body.iter().all(|l| l.positive || l.atom.is_builtin())
    }

    pub fn is_ground(&self) -> bool {
        self.head.iter().all(Atom::is_ground) && self.body.iter().all(|l| l.atom.is_ground())
    }

    /// Variables in order of first occurrence, head first.
    pub fn vars(&self) -> Vec<Name> {
        let mut seen = Vec::new();
        let atoms = self.head.iter().chain(self.body.iter().map(|l| &l.atom));
        for v in atoms.flat_map(|a| a.vars()) {
            if !seen.contains(v) {
                seen.push(v.clone());
            }
        }
        seen
    }

    pub fn apply(&self, subst: &Subst) -> Rule {
        Rule {
            head: self.head.iter().map(|a| a.apply(subst)).collect(),
            body: self.body.iter().map(|l| l.apply(subst)).collect(),
        }
    }

    /// Every variable occurs in a positive, non-built-in body literal.
    pub fn is_range_restricted(&self) -> bool {
        let bound: BTreeSet<&Name> =
            self.body.iter().filter(|l| l.positive && !l.atom.is_builtin()).flat_map(|l| l.atom.vars()).collect();
        self.head.iter().chain(self.body.iter().map(|l| &l.atom)).flat_map(|a| a.vars()).all(|v| bound.contains(v))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, h) in self.head.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{h}")?;
        }
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            write_body(f, &self.body)?;
        }
        f.write_str(".")
    }
}

fn write_body(f: &mut fmt::Formatter<'_>, body: &[Literal]) -> fmt::Result {
    for (i, l) in body.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{l}")?;
    }
    Ok(())
}

/// A denial `:- l1, ..., ln.`: violated when the body has a true instance.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Constraint {
    pub body: Vec<Literal>,
}

impl Constraint {
    pub fn new(body: Vec<Literal>) -> Self {
        Constraint { body }
    }

    /// No negative literals apart from built-ins. Such constraints can only
    /// become violated by adding facts, never by removing them.
    pub fn is_positive(&self) -> bool {
        self.body.iter().all(|l| l.positive || l.atom.is_builtin())
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(":- ")?;
        write_body(f, &self.body)?;
        f.write_str(".")
    }
}

/// A deductive database `<IDB, EDB, IC>`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Database {
    pub idb: Vec<Rule>,
    pub edb: BTreeSet<Atom>,
    pub ic: Vec<Constraint>,
}

impl Database {
    pub fn new(idb: Vec<Rule>, edb: impl IntoIterator<Item = Atom>, ic: Vec<Constraint>) -> Self {
        Database { idb, edb: edb.into_iter().collect(), ic }
    }

    /// Same rules and constraints, different facts.
    pub fn with_edb(&self, edb: impl IntoIterator<Item = Atom>) -> Self {
        Database { idb: self.idb.clone(), edb: edb.into_iter().collect(), ic: self.ic.clone() }
    }

    /// Predicates defined by IDB rules.
    pub fn view_preds(&self) -> BTreeSet<Name> {
        self.idb.iter().flat_map(|r| r.head.iter().map(|a| a.pred.clone())).collect()
    }

    /// Every non-view, non-built-in predicate mentioned anywhere.
    pub fn base_preds(&self) -> BTreeSet<Name> {
        let views = self.view_preds();
        self.all_atoms().filter(|a| !a.is_builtin() && !views.contains(&a.pred)).map(|a| a.pred.clone()).collect()
    }

    pub fn is_view(&self, atom: &Atom) -> bool {
        self.idb.iter().any(|r| r.head.iter().any(|h| h.pred == atom.pred))
    }

    pub fn is_definite(&self) -> bool {
        self.idb.iter().all(Rule::is_definite)
    }

    /// The Herbrand universe: every constant occurring in the database.
    pub fn constants(&self) -> BTreeSet<Name> {
        self.all_atoms().flat_map(|a| a.constants().cloned()).collect()
    }

    /// Predicate arities, first occurrence wins.
    pub fn arities(&self) -> BTreeMap<Name, usize> {
        let mut out = BTreeMap::new();
        for a in self.all_atoms().filter(|a| !a.is_builtin()) {
            out.entry(a.pred.clone()).or_insert(a.arity());
        }
        out
    }

    pub fn all_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.idb
            .iter()
            .flat_map(|r| r.head.iter().chain(r.body.iter().map(|l| &l.atom)))
            .chain(self.edb.iter())
            .chain(self.ic.iter().flat_map(|c| c.body.iter().map(|l| &l.atom)))
    }
}

impl fmt::Display for Database {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fact in &self.edb {
            writeln!(f, "{fact}.")?;
        }
        for rule in &self.idb {
            writeln!(f, "{rule}")?;
        }
        for c in &self.ic {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
