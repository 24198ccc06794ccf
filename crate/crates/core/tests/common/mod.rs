//! Random small databases and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vud_core::eval::{satisfies, Evaluator};
use vud_core::parser::parse_database;
use vud_core::syntax::{Atom, Database, Literal};
use vud_core::vu::Transaction;

pub const BASE: [&str; 6] = ["a", "b", "c", "d", "e", "f"];
pub const VIEWS: [&str; 3] = ["p", "q", "r"];

#[derive(Clone, Debug)]
pub struct Shape {
    pub base: usize,
    pub views: usize,
    pub rules: usize,
    pub ics: usize,
    /// Chance of a negative body literal.
    pub negation: f64,
    /// Keep only databases whose facts satisfy the constraints.
    pub consistent: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { base: 6, views: 3, rules: 8, ics: 2, negation: 0.0, consistent: true }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random propositional database. Views only depend on views of
/// lower index when negated, so the result is always stratified.
pub fn random_db(r: &mut ChaCha8Rng, shape: &Shape) -> Database {
    loop {
        let nb = r.gen_range(2..=shape.base);
        let nv = r.gen_range(1..=shape.views);
        let base = &BASE[..nb];
        let views = &VIEWS[..nv];
        let nr = r.gen_range(nv..=shape.rules.max(nv));
        let mut text = String::new();
        for i in 0..nr {
            let head = if i < nv { i } else { r.gen_range(0..nv) };
            let len = r.gen_range(1..=3);
            let mut body: Vec<String> = Vec::new();
            for _ in 0..len {
                let use_view = r.gen_bool(0.3);
                let atom = if use_view { views[r.gen_range(0..nv)] } else { base[r.gen_range(0..nb)] };
                let neg = r.gen_bool(shape.negation);
                let lit = if neg {
                    // Negate base atoms or strictly lower views only.
                    let lower: Vec<&str> = views[..head].to_vec();
                    if use_view && !lower.is_empty() {
                        format!("not {}", lower[r.gen_range(0..lower.len())])
                    } else {
                        format!("not {}", base[r.gen_range(0..nb)])
                    }
                } else {
                    atom.to_string()
                };
                if !body.contains(&lit) {
                    body.push(lit);
                }
            }
            if body.iter().all(|l| l.starts_with("not ")) {
                body.insert(0, base[r.gen_range(0..nb)].to_string());
            }
            text.push_str(&format!("{} :- {}.\n", views[head], body.join(", ")));
        }
        for _ in 0..r.gen_range(0..=shape.ics) {
            let len = r.gen_range(1..=2);
            let mut body: Vec<&str> = Vec::new();
            for _ in 0..len {
                let pool: Vec<&str> = base.iter().chain(views.iter()).copied().collect();
                let x = pool[r.gen_range(0..pool.len())];
                if !body.contains(&x) {
                    body.push(x);
                }
            }
            text.push_str(&format!(":- {}.\n", body.join(", ")));
        }
        for b in base {
            if r.gen_bool(0.5) {
                text.push_str(&format!("{b}.\n"));
            }
        }
        let Ok(db) = parse_database(&text) else { continue };
        if !vud_core::validate::validate(&db).is_empty() {
            continue;
        }
        let Ok(eval) = Evaluator::new(&db.idb) else { continue };
        if shape.consistent && !satisfies(&eval.model(&db.edb), &db.ic) {
            continue;
        }
        return db;
    }
}

/// Every ground atom the database mentions, base and view.
pub fn atoms_of(db: &Database) -> Vec<Atom> {
    let mut out: BTreeSet<Atom> = BTreeSet::new();
    for a in db.all_atoms() {
        if a.is_ground() && !a.is_builtin() {
            out.insert(a.clone());
        }
    }
    out.into_iter().collect()
}

pub fn random_literal(r: &mut ChaCha8Rng, db: &Database) -> Literal {
    let atoms = atoms_of(db);
    let a = atoms.choose(r).expect("nonempty").clone();
    if r.gen_bool(0.5) {
        Literal::pos(a)
    } else {
        Literal::neg(a)
    }
}

pub fn subsets<T: Ord + Clone>(items: &[T]) -> Vec<BTreeSet<T>> {
    assert!(items.len() < 24);
    (0u32..1 << items.len())
        .map(|m| items.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, x)| x.clone()).collect())
        .collect()
}

pub fn minimal<T: Ord + Clone>(sets: Vec<BTreeSet<T>>) -> BTreeSet<BTreeSet<T>> {
    sets.iter().filter(|s| !sets.iter().any(|t| t.len() < s.len() && t.is_subset(s))).cloned().collect()
}

/// Minimal subsets of the facts that derive `a`.
pub fn explanation_oracle(db: &Database, a: &Atom) -> BTreeSet<BTreeSet<Atom>> {
    let eval = Evaluator::new(&db.idb).unwrap();
    let facts: Vec<Atom> = db.edb.iter().cloned().collect();
    minimal(subsets(&facts).into_iter().filter(|s| eval.model(s).contains(a)).collect())
}

/// Minimal sets of facts whose deletion makes `a` underivable and keeps
/// the constraints.
pub fn deletion_oracle(db: &Database, a: &Atom) -> BTreeSet<BTreeSet<Atom>> {
    let eval = Evaluator::new(&db.idb).unwrap();
    let facts: Vec<Atom> = db.edb.iter().cloned().collect();
    minimal(
        subsets(&facts)
            .into_iter()
            .filter(|d| {
                let rest: BTreeSet<Atom> = db.edb.difference(d).cloned().collect();
                let m = eval.model(&rest);
                !m.contains(a) && satisfies(&m, &db.ic)
            })
            .collect(),
    )
}

/// Minimal transactions over `pool` of at most `max` changes that make
/// every atom of `ins` derivable, every atom of `del` underivable, and
/// keep the constraints.
pub fn transaction_oracle(db: &Database, pool: &[Atom], ins: &[Atom], del: &[Atom], max: usize) -> Vec<Transaction> {
    let eval = Evaluator::new(&db.idb).unwrap();
    let changes: Vec<(bool, Atom)> = pool.iter().map(|a| (!db.edb.contains(a), a.clone())).collect();
    let mut found: Vec<Transaction> = Vec::new();
    let mut pick = |idx: &[usize]| {
        let mut t = Transaction::default();
        for &i in idx {
            let (add, a) = &changes[i];
            if *add {
                t.inserts.insert(a.clone());
            } else {
                t.deletes.insert(a.clone());
            }
        }
        let m = eval.model(&t.apply(&db.edb));
        if ins.iter().all(|a| m.contains(a)) && del.iter().all(|a| !m.contains(a)) && satisfies(&m, &db.ic) {
            found.push(t);
        }
    };
    let n = changes.len();
    pick(&[]);
    for i in 0..n {
        pick(&[i]);
        if max >= 2 {
            for j in i + 1..n {
                pick(&[i, j]);
            }
        }
    }
    let all = found.clone();
    found.retain(|t| !all.iter().any(|s| s != t && s.is_subset(t)));
    found.sort();
    found
}

/// Signed atoms as opaque propositions: `(atom, negated)`.
pub type Prop = (Atom, bool);
