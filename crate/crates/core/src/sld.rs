//! Complete ground SLD trees.
//!
//! The selection rule is leftmost. A selected view atom is resolved with
//! every ground instance of every rule whose head matches it, in rule order
//! and then in lexicographic order of the remaining variable bindings; a
//! selected base atom is resolved with the EDB fact if present. Negative
//! literals are looked up in the perfect model, which is fixed for lower
//! strata. A node whose goal multiset contains that of an ancestor is cut
//! as a loop.
//!
//! In abductive mode a selected base atom that is not in the EDB is assumed
//! instead of failing, so success leaves carry the base atoms that would
//! have to be added.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::eval::{least_model, Interpretation};
use crate::ground::substitutions;
use crate::syntax::{Atom, Database, Literal, Name, Rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Failure {
    /// No clause or fact matches the selected atom.
    NoClause,
    /// The selected negative literal or built-in is false.
    False,
    /// The goal repeats an ancestor goal.
    Loop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    Failure(Failure),
    Inner,
}

/// The input clause on the edge from a node's parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Input {
    Rule(Rule),
    Fact(Atom),
    Assumed(Atom),
    /// A negative literal or built-in checked against the model.
    Check(Literal),
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Input::Rule(r) => write!(f, "{r}"),
            Input::Fact(a) => write!(f, "{a}."),
            Input::Assumed(a) => write!(f, "assume {a}."),
            Input::Check(l) => write!(f, "check {l}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub goals: Vec<Literal>,
    pub input: Option<Input>,
    pub status: Status,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SldTree {
    pub nodes: Vec<Node>,
    pub abductive: bool,
}

/// Everything collected along one root-to-leaf path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub leaf: usize,
    pub status: Status,
    /// EDB facts used as input clauses.
    pub facts: BTreeSet<Atom>,
    /// Base atoms assumed in abductive mode.
    pub assumed: BTreeSet<Atom>,
    /// For failure leaves, `facts` plus the positive base atoms still
    /// pending; for success leaves, `facts` plus `assumed`.
    pub required: BTreeSet<Atom>,
    pub rules: Vec<Rule>,
    pub pending: Vec<Literal>,
}

type Children = std::result::Result<Vec<(Input, Vec<Literal>)>, Failure>;

struct Builder<'a> {
    db: &'a Database,
    views: BTreeSet<Name>,
    universe: BTreeSet<Name>,
    model: Option<Interpretation>,
    abduce: bool,
}

impl Builder<'_> {
    fn model(&mut self) -> Result<&Interpretation> {
        if self.model.is_none() {
            self.model = Some(least_model(self.db)?);
        }
        Ok(self.model.as_ref().unwrap())
    }

    /// Children of a goal list, as (input, new goals) pairs, or the reason
    /// the goal fails.
    fn resolve(&mut self, goals: &[Literal]) -> Result<Children> {
        let (sel, rest) = goals.split_first().expect("non-empty goal");
        if let Some(t) = sel.atom.eval_builtin() {
            return Ok(if t == sel.positive {
                Ok(vec![(Input::Check(sel.clone()), rest.to_vec())])
            } else {
                Err(Failure::False)
            });
        }
        if !sel.positive {
            let holds = !self.model()?.contains(&sel.atom);
            return Ok(if holds { Ok(vec![(Input::Check(sel.clone()), rest.to_vec())]) } else { Err(Failure::False) });
        }
        let g = &sel.atom;
        let mut out = Vec::new();
        if self.views.contains(&g.pred) {
            for rule in &self.db.idb {
                let head = &rule.head[0];
                let Some(bound) = head.match_ground(g, &Default::default()) else {
                    continue;
                };
                let free: Vec<Name> = rule.vars().into_iter().filter(|v| !bound.contains_key(v)).collect();
                for mut s in substitutions(&free, &self.universe) {
                    s.extend(bound.iter().map(|(k, v)| (k.clone(), v.clone())));
                    let inst = rule.apply(&s);
                    let mut next = inst.body.clone();
                    next.extend_from_slice(rest);
                    out.push((Input::Rule(inst), next));
                }
            }
        } else if self.db.edb.contains(g) {
            out.push((Input::Fact(g.clone()), rest.to_vec()));
        } else if self.abduce {
            out.push((Input::Assumed(g.clone()), rest.to_vec()));
        }
        Ok(if out.is_empty() { Err(Failure::NoClause) } else { Ok(out) })
    }
}

fn sorted(goals: &[Literal]) -> Vec<Literal> {
    let mut v = goals.to_vec();
    v.sort();
    v
}

/// Multiset inclusion of sorted sequences.
fn includes(big: &[Literal], small: &[Literal]) -> bool {
    let mut it = big.iter();
    'outer: for x in small {
        for y in it.by_ref() {
            match y.cmp(x) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

fn build(db: &Database, goals: Vec<Literal>, abduce: bool) -> Result<SldTree> {
    if let Some(r) = db.idb.iter().find(|r| r.head.len() != 1) {
        return Err(Error::Invalid(vec![format!("rule {r} is disjunctive")]));
    }
    let mut b = Builder { db, views: db.view_preds(), universe: db.constants(), model: None, abduce };
    b.universe.extend(goals.iter().flat_map(|l| l.atom.constants().cloned()));
    let mut nodes = vec![Node { goals, input: None, status: Status::Inner, parent: None, children: Vec::new() }];
    let mut keys = vec![sorted(&nodes[0].goals)];
    let mut stack = vec![0usize];
    while let Some(id) = stack.pop() {
        if nodes[id].goals.is_empty() {
            nodes[id].status = Status::Success;
            continue;
        }
        // Loop check against proper ancestors.
        let mut anc = nodes[id].parent;
        let mut looped = false;
        while let Some(a) = anc {
            if includes(&keys[id], &keys[a]) {
                looped = true;
                break;
            }
            anc = nodes[a].parent;
        }
        if looped {
            nodes[id].status = Status::Failure(Failure::Loop);
            continue;
        }
        match b.resolve(&nodes[id].goals)? {
            Err(reason) => nodes[id].status = Status::Failure(reason),
            Ok(children) => {
                let first = nodes.len();
                for (input, goals) in children {
                    keys.push(sorted(&goals));
                    nodes.push(Node {
                        goals,
                        input: Some(input),
                        status: Status::Inner,
                        parent: Some(id),
                        children: Vec::new(),
                    });
                }
                nodes[id].children = (first..nodes.len()).collect();
                stack.extend((first..nodes.len()).rev());
            }
        }
    }
    Ok(SldTree { nodes, abductive: abduce })
}

/// The complete SLD tree for a single ground goal atom.
pub fn sld_tree(db: &Database, goal: &Atom) -> Result<SldTree> {
    build(db, vec![Literal::pos(goal.clone())], false)
}

/// The SLD tree in abductive mode: absent base atoms are assumed.
pub fn abductive_tree(db: &Database, goal: &Atom) -> Result<SldTree> {
    build(db, vec![Literal::pos(goal.clone())], true)
}

/// Tree for an arbitrary ground goal list, such as a constraint instance.
pub fn sld_tree_for(db: &Database, goals: Vec<Literal>, abductive: bool) -> Result<SldTree> {
    build(db, goals, abductive)
}

impl SldTree {
    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_empty())
    }

    pub fn branch(&self, leaf: usize, views: &BTreeSet<Name>) -> Branch {
        let mut facts = BTreeSet::new();
        let mut assumed = BTreeSet::new();
        let mut rules = Vec::new();
        let mut cur = Some(leaf);
        while let Some(id) = cur {
            match &self.nodes[id].input {
                Some(Input::Fact(a)) => {
                    facts.insert(a.clone());
                }
                Some(Input::Assumed(a)) => {
                    assumed.insert(a.clone());
                }
                Some(Input::Rule(r)) => rules.push(r.clone()),
                Some(Input::Check(_)) | None => {}
            }
            cur = self.nodes[id].parent;
        }
        rules.reverse();
        let node = &self.nodes[leaf];
        let mut required: BTreeSet<Atom> = facts.union(&assumed).cloned().collect();
        if matches!(node.status, Status::Failure(_)) {
            required.extend(
                node.goals
                    .iter()
                    .filter(|l| l.positive && !l.atom.is_builtin() && !views.contains(&l.atom.pred))
                    .map(|l| l.atom.clone()),
            );
        }
        Branch { leaf, status: node.status, facts, assumed, required, rules, pending: node.goals.clone() }
    }

    /// All root-to-leaf branches, left to right.
    pub fn branches(&self, db: &Database) -> Vec<Branch> {
        let views = db.view_preds();
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let n = &self.nodes[id];
            if n.children.is_empty() {
                out.push(self.branch(id, &views));
            } else {
                stack.extend(n.children.iter().rev());
            }
        }
        out
    }

    pub fn has_success(&self) -> bool {
        self.nodes.iter().any(|n| n.status == Status::Success)
    }

    /// Indented rendering, one node per line.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_node(0, 0, &mut s);
        s
    }

    fn render_node(&self, id: usize, depth: usize, s: &mut String) {
        let n = &self.nodes[id];
        let pad = "  ".repeat(depth);
        let goals = if n.goals.is_empty() {
            "[]".to_string()
        } else {
            n.goals.iter().map(Literal::to_string).collect::<Vec<_>>().join(", ")
        };
        let mark = match n.status {
            Status::Success => "  success",
            Status::Failure(Failure::NoClause) => "  failure",
            Status::Failure(Failure::False) => "  failure (false)",
            Status::Failure(Failure::Loop) => "  failure (loop)",
            Status::Inner => "",
        };
        match &n.input {
            None => writeln!(s, "{pad}?- {goals}{mark}").unwrap(),
            Some(inp) => writeln!(s, "{pad}[{inp}] ?- {goals}{mark}").unwrap(),
        }
        for &c in &n.children {
            self.render_node(c, depth + 1, s);
        }
    }
}

impl fmt::Display for SldTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
