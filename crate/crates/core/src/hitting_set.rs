//! Hitting sets of set families.

use std::collections::BTreeSet;

/// Family of sets, deduplicated and ordered.
pub type Family<T> = BTreeSet<BTreeSet<T>>;

/// `h ⊆ ⋃s` and `h` meets every non-empty member of `s`.
pub fn is_hitting_set<'a, T: Ord + 'a>(h: &BTreeSet<T>, s: impl IntoIterator<Item = &'a BTreeSet<T>> + Clone) -> bool {
    let within = h.iter().all(|x| s.clone().into_iter().any(|r| r.contains(x)));
    within && s.into_iter().all(|r| r.is_empty() || r.iter().any(|x| h.contains(x)))
}

/// Orders sets by size, then lexicographically.
pub fn sort_sets<T: Ord>(sets: &mut [BTreeSet<T>]) {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
}

/// Drops every set that has a proper subset in the collection, and
/// duplicates. Output is sorted by size then lexicographically.
pub fn minimize<T: Ord + Clone>(sets: impl IntoIterator<Item = BTreeSet<T>>) -> Vec<BTreeSet<T>> {
    let mut all: Vec<BTreeSet<T>> = sets.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    sort_sets(&mut all);
    let mut out: Vec<BTreeSet<T>> = Vec::new();
    for s in all {
        if !out.iter().any(|m| m.is_subset(&s)) {
            out.push(s);
        }
    }
    out
}

/// All inclusion-minimal hitting sets, sorted by size then
/// lexicographically.
///
/// Branches on the elements of the first member not yet hit; every
/// minimal hitting set is reached this way and the rest is filtered out.
pub fn minimal_hitting_sets<T: Ord + Clone>(s: &[BTreeSet<T>]) -> Vec<BTreeSet<T>> {
    let members: Vec<&BTreeSet<T>> = s.iter().filter(|r| !r.is_empty()).collect();
    let mut found: Vec<BTreeSet<T>> = Vec::new();
    let mut seen: BTreeSet<BTreeSet<T>> = BTreeSet::new();
    let mut stack = vec![BTreeSet::new()];
    while let Some(chosen) = stack.pop() {
        if !seen.insert(chosen.clone()) {
            continue;
        }
        // A superset of a hitting set already found cannot be minimal.
        if found.iter().any(|f| f.is_subset(&chosen)) {
            continue;
        }
        match members.iter().find(|r| r.is_disjoint(&chosen)) {
            None => found.push(chosen),
            Some(r) => {
                for x in r.iter().rev() {
                    let mut next = chosen.clone();
                    next.insert(x.clone());
                    stack.push(next);
                }
            }
        }
    }
    minimize(found)
}

/// Reference version: every subset of `⋃s` in order of size, skipping
/// supersets of hitting sets already found.
pub fn minimal_hitting_sets_exhaustive<T: Ord + Clone>(s: &[BTreeSet<T>]) -> Vec<BTreeSet<T>> {
    let universe: Vec<T> = s.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    assert!(universe.len() < 26, "exhaustive hitting sets limited to 25 elements");
    let mut subsets: Vec<BTreeSet<T>> = (0u32..1 << universe.len())
        .map(|mask| universe.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| x.clone()).collect())
        .collect();
    sort_sets(&mut subsets);
    let mut out: Vec<BTreeSet<T>> = Vec::new();
    for h in subsets {
        if out.iter().any(|m| m.is_subset(&h)) {
            continue;
        }
        if is_hitting_set(&h, s.iter()) {
            out.push(h);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(s: &[&str]) -> Vec<BTreeSet<char>> {
        s.iter().map(|m| m.chars().collect()).collect()
    }

    #[test]
    fn hitting_set_checks() {
        let empty: Vec<BTreeSet<char>> = Vec::new();
        assert!(is_hitting_set(&BTreeSet::new(), empty.iter()));
        let s = fam(&["ae", "af", "a"]);
        assert!(is_hitting_set(&"a".chars().collect(), s.iter()));
        assert!(!is_hitting_set(&"ef".chars().collect(), s.iter()));
        assert!(!is_hitting_set(&"az".chars().collect(), s.iter()));
    }

    #[test]
    fn minimal_sets() {
        assert_eq!(minimal_hitting_sets(&fam(&["ae", "af", "a"])), fam(&["a"]));
        assert_eq!(minimal_hitting_sets(&fam(&["xy", "yz"])), fam(&["y", "xz"]));
        assert_eq!(minimal_hitting_sets::<char>(&[]), fam(&[""]));
        assert_eq!(minimal_hitting_sets(&fam(&["", "ab"])), fam(&["a", "b"]));
    }

    #[test]
    fn agrees_with_exhaustive_search() {
        for s in [fam(&["abc", "cd", "de", "a"]), fam(&["ab", "bc", "ca"]), fam(&["abcd"]), fam(&["ab", "cd", "ef"])] {
            assert_eq!(minimal_hitting_sets(&s), minimal_hitting_sets_exhaustive(&s));
        }
    }

    #[test]
    fn minimize_drops_supersets() {
        assert_eq!(minimize(fam(&["ae", "af", "a", "a"])), fam(&["a"]));
        assert_eq!(minimize(fam(&["b", "ac"])), fam(&["b", "ac"]));
    }
}
