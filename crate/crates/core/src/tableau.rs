//! Hyper tableaux over signed ground atoms, for deletions.
//!
//! A negated atom `~A` is just another positive atom here, so the calculus
//! only needs the hyper extension step: when every body atom of a clause is
//! on a branch and no head atom is, the branch is split once per head atom.
//! A branch holding both `A` and `~A`, or satisfying the body of a clause
//! with an empty head, is closed.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::error::Result;
use crate::eval::{least_model, Evaluator};
use crate::ground::ground;
use crate::syntax::{Atom, Database, Rule};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signed {
    pub atom: Atom,
    pub negated: bool,
}

impl Signed {
    pub fn pos(atom: Atom) -> Self {
        Signed { atom, negated: false }
    }

    pub fn neg(atom: Atom) -> Self {
        Signed { atom, negated: true }
    }

    pub fn complement(&self) -> Self {
        Signed { atom: self.atom.clone(), negated: !self.negated }
    }
}

impl fmt::Display for Signed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("~")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// `h1 | ... | hm :- b1, ..., bn.` over signed atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    pub head: Vec<Signed>,
    pub body: Vec<Signed>,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Signed], sep: &str| v.iter().map(Signed::to_string).collect::<Vec<_>>().join(sep);
        f.write_str(&join(&self.head, " | "))?;
        if !self.body.is_empty() {
            if !self.head.is_empty() {
                f.write_str(" ")?;
            }
            write!(f, ":- {}", join(&self.body, ", "))?;
        }
        f.write_str(".")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub clauses: Vec<Clause>,
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Moves every atom of `s` across the arrow with its sign flipped. Rules
/// must be ground. Built-ins are evaluated: a false one drops the clause.
/// A negative body literal `not B` is read classically as a head atom `B`
/// before moving.
pub fn transform(idb: &[Rule], s: &BTreeSet<Atom>) -> Program {
    let mut clauses = Vec::new();
    'rules: for rule in idb {
        let mut head = Vec::new();
        let mut body = Vec::new();
        let mut moved_up = Vec::new();
        for h in &rule.head {
            if s.contains(h) {
                body.push(Signed::neg(h.clone()));
            } else {
                head.push(Signed::pos(h.clone()));
            }
        }
        let mut stay = Vec::new();
        for l in &rule.body {
            if let Some(t) = l.atom.eval_builtin() {
                if t != l.positive {
                    continue 'rules;
                }
                continue;
            }
            match (l.positive, s.contains(&l.atom)) {
                (true, true) => moved_up.push(Signed::neg(l.atom.clone())),
                (true, false) => stay.push(Signed::pos(l.atom.clone())),
                (false, true) => stay.push(Signed::neg(l.atom.clone())),
                (false, false) => head.push(Signed::pos(l.atom.clone())),
            }
        }
        head.extend(moved_up);
        stay.extend(body);
        clauses.push(Clause { head, body: stay });
    }
    Program { clauses }
}

/// Every ground atom over a view predicate occurring in the ground IDB.
fn ground_view_atoms(rules: &[Rule], db: &Database) -> BTreeSet<Atom> {
    rules
        .iter()
        .flat_map(|r| r.head.iter().chain(r.body.iter().map(|l| &l.atom)))
        .filter(|a| db.is_view(a))
        .cloned()
        .collect()
}

/// The transformation relative to the EDB plus every ground view atom.
pub fn idb_star(db: &Database) -> Program {
    let g = ground(db);
    let mut s = db.edb.clone();
    s.extend(ground_view_atoms(&g.idb, db));
    transform(&g.idb, &s)
}

/// The transformation relative to the perfect model (the materialized
/// view).
pub fn idb_plus(db: &Database) -> Result<Program> {
    let g = ground(db);
    Ok(transform(&g.idb, &least_model(db)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mark {
    Open,
    /// Contains an atom and its complement.
    Complementary,
    /// Satisfies the body of a clause with an empty head.
    Denial,
    /// Failed the strong minimality test.
    NotMinimal,
}

#[derive(Clone, Debug)]
pub struct TNode {
    pub literal: Signed,
    /// Index of the extending clause; `None` for the request.
    pub clause: Option<usize>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TBranch {
    pub literals: Vec<Signed>,
    pub leaf: usize,
    pub mark: Mark,
}

impl TBranch {
    pub fn is_open(&self) -> bool {
        self.mark == Mark::Open
    }

    pub fn literal_set(&self) -> BTreeSet<Signed> {
        self.literals.iter().cloned().collect()
    }
}

#[derive(Clone, Debug)]
pub struct UpdateTableau {
    pub nodes: Vec<TNode>,
    /// Finished branches, left to right.
    pub branches: Vec<TBranch>,
    /// Largest number of branches awaiting expansion at any time.
    pub peak_live: usize,
}

/// Saturates the tableau for `prog` plus the unit clause `request`.
pub fn build_update_tableau(prog: &Program, request: &Signed) -> UpdateTableau {
    let mut nodes = vec![TNode { literal: request.clone(), clause: None, parent: None, children: Vec::new() }];
    let mut branches = Vec::new();
    // Pending branches: (leaf node, literals on the branch).
    let mut stack: Vec<(usize, Vec<Signed>, BTreeSet<Signed>)> =
        vec![(0, vec![request.clone()], BTreeSet::from([request.clone()]))];
    let mut peak_live = 1;
    while let Some((leaf, lits, set)) = stack.pop() {
        if set.contains(&nodes[leaf].literal.complement()) {
            branches.push(TBranch { literals: lits, leaf, mark: Mark::Complementary });
            continue;
        }
        let applicable = prog
            .clauses
            .iter()
            .enumerate()
            .find(|(_, c)| c.body.iter().all(|b| set.contains(b)) && !c.head.iter().any(|h| set.contains(h)));
        match applicable {
            None => branches.push(TBranch { literals: lits, leaf, mark: Mark::Open }),
            Some((_, c)) if c.head.is_empty() => branches.push(TBranch { literals: lits, leaf, mark: Mark::Denial }),
            Some((ci, c)) => {
                let first = nodes.len();
                for h in &c.head {
                    nodes.push(TNode {
                        literal: h.clone(),
                        clause: Some(ci),
                        parent: Some(leaf),
                        children: Vec::new(),
                    });
                }
                nodes[leaf].children = (first..nodes.len()).collect();
                for (k, h) in c.head.iter().enumerate().rev() {
                    let mut l = lits.clone();
                    l.push(h.clone());
                    let mut s = set.clone();
                    s.insert(h.clone());
                    stack.push((first + k, l, s));
                }
                peak_live = peak_live.max(stack.len());
            }
        }
    }
    // Report branches in left-to-right order of their leaves.
    let order = leaf_order(&nodes);
    branches.sort_by_key(|b| order[b.leaf]);
    UpdateTableau { nodes, branches, peak_live }
}

fn leaf_order(nodes: &[TNode]) -> Vec<usize> {
    let mut order = vec![0; nodes.len()];
    let mut stack = vec![0usize];
    let mut k = 0;
    while let Some(n) = stack.pop() {
        order[n] = k;
        k += 1;
        stack.extend(nodes[n].children.iter().rev());
    }
    order
}

/// `{A ∈ EDB | ~A ∈ b}`.
pub fn hitting_set_of_branch(b: &TBranch, db: &Database) -> BTreeSet<Atom> {
    b.literals.iter().filter(|l| l.negated && db.edb.contains(&l.atom)).map(|l| l.atom.clone()).collect()
}

/// Closes every open branch whose hitting set has an element that, put
/// back on its own, does not restore derivability of `a`.
pub fn strong_minimality_filter(t: &UpdateTableau, db: &Database, a: &Atom) -> Result<UpdateTableau> {
    let eval = Evaluator::new(&db.idb)?;
    let mut out = t.clone();
    for b in out.branches.iter_mut().filter(|b| b.is_open()) {
        let hs = hitting_set_of_branch(b, db);
        let rest: BTreeSet<Atom> = db.edb.difference(&hs).cloned().collect();
        let minimal = hs.iter().all(|s| {
            let mut facts = rest.clone();
            facts.insert(s.clone());
            eval.model(&facts).contains(a)
        });
        if !minimal {
            b.mark = Mark::NotMinimal;
        }
    }
    Ok(out)
}

/// Every way of choosing one negated EDB atom from each open branch, as a
/// deduplicated family of sets.
pub fn edb_cuts(t: &UpdateTableau, db: &Database) -> Vec<BTreeSet<Atom>> {
    let open: Vec<Vec<Atom>> =
        t.branches.iter().filter(|b| b.is_open()).map(|b| hitting_set_of_branch(b, db).into_iter().collect()).collect();
    if open.is_empty() {
        return Vec::new();
    }
    let mut cuts: BTreeSet<BTreeSet<Atom>> = BTreeSet::from([BTreeSet::new()]);
    for choices in &open {
        let mut next = BTreeSet::new();
        for cut in &cuts {
            for x in choices {
                let mut c = cut.clone();
                c.insert(x.clone());
                next.insert(c);
            }
        }
        cuts = next;
    }
    let mut out: Vec<_> = cuts.into_iter().collect();
    crate::hitting_set::sort_sets(&mut out);
    out
}

impl UpdateTableau {
    pub fn open_branches(&self) -> impl Iterator<Item = &TBranch> {
        self.branches.iter().filter(|b| b.is_open())
    }

    /// Indented rendering with the extending clause number and a mark on
    /// every leaf.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_node(0, 0, &mut s);
        s
    }

    fn render_node(&self, id: usize, depth: usize, s: &mut String) {
        let n = &self.nodes[id];
        write!(s, "{}{}", "  ".repeat(depth), n.literal).unwrap();
        if let Some(c) = n.clause {
            write!(s, "  [{}]", c + 1).unwrap();
        }
        if let Some(b) = self.branches.iter().find(|b| b.leaf == id) {
            let mark = match b.mark {
                Mark::Open => "open",
                Mark::Complementary => "closed",
                Mark::Denial => "closed (denial)",
                Mark::NotMinimal => "closed (not minimal)",
            };
            write!(s, "  {mark}").unwrap();
        }
        s.push('\n');
        for &c in &n.children {
            self.render_node(c, depth + 1, s);
        }
    }
}

impl fmt::Display for UpdateTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_database;

    const VIEWS: &str = "p :- a, e. q :- a, f. p :- b, f. q :- b, e. p :- q. q :- a. a. e. f. :- b.";

    fn lits(s: &[&str]) -> BTreeSet<Signed> {
        s.iter()
            .map(|x| match x.strip_prefix('~') {
                Some(a) => Signed::neg(Atom::prop(a)),
                None => Signed::pos(Atom::prop(x)),
            })
            .collect()
    }

    fn atoms(s: &[&str]) -> BTreeSet<Atom> {
        s.iter().map(|a| Atom::prop(a)).collect()
    }

    #[test]
    fn transform_clauses() {
        let s = atoms(&["a", "e", "f", "p", "q"]);
        let db = parse_database("p :- a, e. p :- b, f. p :- q.").unwrap();
        let prog = transform(&db.idb, &s);
        let text: Vec<String> = prog.clauses.iter().map(Clause::to_string).collect();
        assert_eq!(text, vec!["~a | ~e :- ~p.", "~f :- b, ~p.", "~q :- ~p."]);
        let unchanged = transform(&db.idb[2..], &BTreeSet::new());
        assert_eq!(unchanged.clauses[0].to_string(), "p :- q.");
    }

    #[test]
    fn views_idb_star() {
        let db = parse_database(VIEWS).unwrap();
        let text = idb_star(&db).to_string();
        assert_eq!(text, "~a | ~e :- ~p.\n~a | ~f :- ~q.\n~f :- b, ~p.\n~e :- b, ~q.\n~q :- ~p.\n~a :- ~q.\n");
        assert_eq!(idb_plus(&db).unwrap(), idb_star(&db));
        assert!(idb_star(&Database::default()).clauses.is_empty());
        let single = parse_database("p :- e, f. e. f.").unwrap();
        assert_eq!(idb_star(&single).to_string(), "~e | ~f :- ~p.\n");
    }

    #[test]
    fn idb_plus_keeps_false_heads() {
        let db = parse_database(VIEWS).unwrap().with_edb(atoms(&["e", "f"]));
        let prog = idb_plus(&db).unwrap();
        assert_eq!(prog.clauses[0].to_string(), "p | ~e :- a.");
    }

    #[test]
    fn views_tableau() {
        let db = parse_database(VIEWS).unwrap();
        let t = build_update_tableau(&idb_star(&db), &Signed::neg(Atom::prop("p")));
        let open: Vec<_> = t.open_branches().map(TBranch::literal_set).collect();
        assert_eq!(
            open,
            vec![lits(&["~p", "~q", "~a"]), lits(&["~p", "~e", "~q", "~a"]), lits(&["~p", "~e", "~q", "~f", "~a"]),]
        );
        let hs: Vec<_> = t.open_branches().map(|b| hitting_set_of_branch(b, &db)).collect();
        assert_eq!(hs, vec![atoms(&["a"]), atoms(&["a", "e"]), atoms(&["a", "e", "f"])]);

        let filtered = strong_minimality_filter(&t, &db, &Atom::prop("p")).unwrap();
        let left: Vec<_> = filtered.open_branches().map(|b| hitting_set_of_branch(b, &db)).collect();
        assert_eq!(left, vec![atoms(&["a"])]);
        assert_eq!(filtered.branches.iter().filter(|b| b.mark == Mark::NotMinimal).count(), 2);

        let cuts = edb_cuts(&t, &db);
        assert!(cuts.contains(&atoms(&["a"])));
    }

    #[test]
    fn trivial_tableaux() {
        let t = build_update_tableau(&Program::default(), &Signed::neg(Atom::prop("p")));
        assert_eq!(t.branches.len(), 1);
        assert_eq!(t.branches[0].literal_set(), lits(&["~p"]));
        assert!(t.branches[0].is_open());
        assert!(hitting_set_of_branch(&t.branches[0], &Database::default()).is_empty());

        let prog = Program {
            clauses: vec![
                Clause { head: vec![Signed::neg(Atom::prop("a"))], body: vec![Signed::neg(Atom::prop("p"))] },
                Clause { head: vec![Signed::pos(Atom::prop("a"))], body: vec![] },
            ],
        };
        let t = build_update_tableau(&prog, &Signed::neg(Atom::prop("p")));
        assert_eq!(t.open_branches().count(), 0);
        assert!(edb_cuts(&t, &Database::default()).is_empty());
    }

    #[test]
    fn strong_minimality_on_conjunction() {
        let db = parse_database("p :- e, f. e. f.").unwrap();
        let t = build_update_tableau(&idb_star(&db), &Signed::neg(Atom::prop("p")));
        let hs: Vec<_> = t.open_branches().map(|b| hitting_set_of_branch(b, &db)).collect();
        assert_eq!(hs, vec![atoms(&["e"]), atoms(&["f"])]);
        let f = strong_minimality_filter(&t, &db, &Atom::prop("p")).unwrap();
        assert_eq!(f.open_branches().count(), 2);
        // A hand-made branch deleting both facts fails the test.
        let mut both = t.clone();
        both.branches[0].literals.push(Signed::neg(Atom::prop("f")));
        let f = strong_minimality_filter(&both, &db, &Atom::prop("p")).unwrap();
        assert_eq!(f.branches[0].mark, Mark::NotMinimal);
    }

    #[test]
    fn one_branch_cuts() {
        let db = parse_database(VIEWS).unwrap();
        let t = UpdateTableau {
            nodes: Vec::new(),
            branches: vec![TBranch {
                literals: lits(&["~p", "~e", "~q", "~a"]).into_iter().collect(),
                leaf: 0,
                mark: Mark::Open,
            }],
            peak_live: 1,
        };
        assert_eq!(edb_cuts(&t, &db), vec![atoms(&["a"]), atoms(&["e"])]);
    }

    #[test]
    fn render_marks_leaves() {
        let db = parse_database("p :- e, f. e. f.").unwrap();
        let t = build_update_tableau(&idb_star(&db), &Signed::neg(Atom::prop("p")));
        assert_eq!(t.render(), "~p\n  ~e  [1]  open\n  ~f  [1]  open\n");
    }
}
