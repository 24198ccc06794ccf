//! Stratification of view predicates by the predicate dependency graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::error::{Error, Result};
use crate::syntax::{Database, Name, Rule};

/// Strata of view predicates, lowest first. Base predicates are implicitly
/// below every stratum and are not listed.
pub type Strata = Vec<BTreeSet<Name>>;

/// Computes strata for the view predicates of `db`. A negative dependency
/// inside a strongly connected component is reported with a witness cycle.
pub fn stratify(db: &Database) -> Result<Strata> {
    stratify_rules(&db.idb)
}

pub fn stratify_rules(rules: &[Rule]) -> Result<Strata> {
    let views: BTreeSet<Name> = rules.iter().flat_map(|r| r.head.iter().map(|a| a.pred.clone())).collect();
    let mut graph: DiGraph<Name, bool> = DiGraph::new();
    let index: BTreeMap<Name, NodeIndex> = views.iter().map(|p| (p.clone(), graph.add_node(p.clone()))).collect();
    for rule in rules {
        for h in &rule.head {
            let from = index[&h.pred];
            // Heads of one rule are tied together so they share a stratum.
            for other in &rule.head {
                if other.pred != h.pred {
                    graph.update_edge(from, index[&other.pred], false);
                }
            }
            for lit in &rule.body {
                if let Some(&to) = index.get(&lit.atom.pred) {
                    let negative = !lit.positive;
                    match graph.find_edge(from, to) {
                        Some(e) if graph[e] || !negative => {}
                        _ => {
                            graph.update_edge(from, to, negative);
                        }
                    }
                }
            }
        }
    }

    // Tarjan yields components in reverse topological order, so every edge
    // leaving a component points to one that has already been levelled.
    let sccs = tarjan_scc(&graph);
    let mut component = vec![0usize; graph.node_count()];
    for (i, scc) in sccs.iter().enumerate() {
        for n in scc {
            component[n.index()] = i;
        }
    }
    let mut level = vec![0usize; sccs.len()];
    for (i, scc) in sccs.iter().enumerate() {
        let members: BTreeSet<NodeIndex> = scc.iter().copied().collect();
        for &n in scc {
            for e in graph.edges(n) {
                use petgraph::visit::EdgeRef;
                let (to, negative) = (e.target(), *e.weight());
                if members.contains(&to) {
                    if negative {
                        return Err(Error::NotStratifiable { cycle: cycle_through(&graph, &members, n, to) });
                    }
                } else {
                    let l = level[component[to.index()]] + usize::from(negative);
                    level[i] = level[i].max(l);
                }
            }
        }
    }

    let mut by_level: BTreeMap<usize, BTreeSet<Name>> = BTreeMap::new();
    for (i, scc) in sccs.iter().enumerate() {
        for n in scc {
            by_level.entry(level[i]).or_default().insert(graph[*n].clone());
        }
    }
    Ok(by_level.into_values().collect())
}

/// `from -> to -> ... -> from`, staying inside one component.
fn cycle_through(
    graph: &DiGraph<Name, bool>,
    members: &BTreeSet<NodeIndex>,
    from: NodeIndex,
    to: NodeIndex,
) -> Vec<String> {
    let mut parent: BTreeMap<NodeIndex, NodeIndex> = BTreeMap::new();
    let mut queue = VecDeque::from([to]);
    let mut seen = BTreeSet::from([to]);
    while let Some(n) = queue.pop_front() {
        if n == from {
            break;
        }
        for m in graph.neighbors(n) {
            if members.contains(&m) && seen.insert(m) {
                parent.insert(m, n);
                queue.push_back(m);
            }
        }
    }
    let mut path = vec![from];
    let mut cur = from;
    while cur != to {
        cur = parent[&cur];
        path.push(cur);
    }
    path.reverse();
    let mut cycle = vec![graph[from].to_string()];
    cycle.extend(path.iter().map(|n| graph[*n].to_string()));
    cycle
}

/// Stratum index of every view predicate.
pub fn stratum_of(strata: &Strata) -> BTreeMap<Name, usize> {
    strata.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |p| (p.clone(), i))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_database;

    fn names(strata: &Strata) -> Vec<Vec<String>> {
        strata.iter().map(|s| s.iter().map(|p| p.to_string()).collect()).collect()
    }

    #[test]
    fn negation_free_is_one_stratum() {
        let db = parse_database("p :- a, e. q :- a, f. p :- b, f. q :- b, e. p :- q. q :- a.").unwrap();
        assert_eq!(names(&stratify(&db).unwrap()), vec![vec!["p", "q"]]);
    }

    #[test]
    fn negation_pushes_up() {
        let db = parse_database("p :- not q. q :- e.").unwrap();
        assert_eq!(names(&stratify(&db).unwrap()), vec![vec!["q"], vec!["p"]]);
    }

    #[test]
    fn self_negation_is_rejected() {
        let db = parse_database("p :- not p.").unwrap();
        assert_eq!(stratify(&db), Err(Error::NotStratifiable { cycle: vec!["p".into(), "p".into()] }));
    }

    #[test]
    fn longer_negative_cycle_is_reported() {
        let db = parse_database("p :- q. q :- r. r :- not p, e.").unwrap();
        let Err(Error::NotStratifiable { cycle }) = stratify(&db) else {
            panic!("expected a cycle");
        };
        assert_eq!(cycle.first(), cycle.last());
        assert_eq!(cycle.len(), 4);
    }

    #[test]
    fn disjunctive_heads_share_stratum() {
        let db = parse_database("a | b :- c. c :- e. d :- not c. a :- d.").unwrap();
        let strata = stratify(&db).unwrap();
        let at = stratum_of(&strata);
        assert_eq!(at[&Name::from("a")], at[&Name::from("b")]);
        assert!(at[&Name::from("d")] > at[&Name::from("c")]);
    }
}
