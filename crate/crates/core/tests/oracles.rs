//! Engine results against brute-force oracles on a seeded corpus. The
//! totals were computed by the oracles and frozen.

mod common;

use std::collections::BTreeSet;

use common::{deletion_oracle, explanation_oracle, minimal, random_db, rng, subsets, Shape};
use vud_core::abduction::explanation_sets;
use vud_core::engine::{view_update, Config, Variant};
use vud_core::eval::{least_model, satisfies, Evaluator};
use vud_core::hitting_set::minimal_hitting_sets;
use vud_core::syntax::{Atom, Database};
use vud_core::vu::VuRequest;

const SEED: u64 = 0x0ac1e;
const DATABASES: usize = 120;

fn corpus(shape: &Shape) -> Vec<Database> {
    let mut r = rng(SEED);
    (0..DATABASES).map(|_| random_db(&mut r, shape)).collect()
}

fn views(db: &Database) -> Vec<Atom> {
    db.view_preds().into_iter().map(|p| Atom::prop(&p)).collect()
}

fn quiet() -> Config {
    Config { postulates: false, ..Config::default() }
}

#[test]
fn explanations_match_subset_oracle() {
    let mut total = 0;
    for db in corpus(&Shape::default()) {
        let model = least_model(&db).unwrap();
        for a in views(&db).into_iter().filter(|a| model.contains(a)) {
            let got: BTreeSet<_> = explanation_sets(&db, &a).unwrap().into_iter().collect();
            let want = explanation_oracle(&db, &a);
            assert_eq!(got, want, "{db}\n{a}");
            total += want.len();
        }
    }
    assert_eq!(total, EXPLANATIONS);
}

#[test]
fn deletions_match_oracle() {
    let shape = Shape { ics: 0, ..Shape::default() };
    let mut total = 0;
    for db in corpus(&shape) {
        let model = least_model(&db).unwrap();
        for a in views(&db).into_iter().filter(|a| model.contains(a)) {
            let want = deletion_oracle(&db, &a);
            let hs: BTreeSet<_> = minimal_hitting_sets(&explanation_sets(&db, &a).unwrap()).into_iter().collect();
            assert_eq!(hs, want, "{db}\n{a}");
            let out = view_update_with_quiet(&db, &VuRequest::delete(a.clone()), Variant::Minimal);
            let got: BTreeSet<_> = out.into_iter().map(|t| t.1).collect();
            assert_eq!(got, want, "{db}\n{a}");
            total += want.len();
        }
    }
    assert_eq!(total, DELETIONS);
}

fn view_update_with_quiet(db: &Database, req: &VuRequest, v: Variant) -> Vec<(BTreeSet<Atom>, BTreeSet<Atom>)> {
    vud_core::engine::view_update_with(db, req, v, &quiet())
        .unwrap()
        .alternatives
        .into_iter()
        .map(|a| (a.transaction.inserts, a.transaction.deletes))
        .collect()
}

/// Minimal sets of absent base atoms whose insertion derives `a` and
/// keeps the constraints.
fn insertion_oracle(db: &Database, a: &Atom) -> BTreeSet<BTreeSet<Atom>> {
    let eval = Evaluator::new(&db.idb).unwrap();
    let views = db.view_preds();
    let absent: Vec<Atom> = common::BASE
        .iter()
        .map(|b| Atom::prop(b))
        .filter(|b| !views.contains(&b.pred) && !db.edb.contains(b))
        .collect();
    minimal(
        subsets(&absent)
            .into_iter()
            .filter(|d| {
                let mut f = db.edb.clone();
                f.extend(d.iter().cloned());
                let m = eval.model(&f);
                m.contains(a) && satisfies(&m, &db.ic)
            })
            .collect(),
    )
}

#[test]
fn insertions_match_oracle() {
    let mut total = 0;
    for db in corpus(&Shape::default()) {
        let model = least_model(&db).unwrap();
        for a in views(&db).into_iter().filter(|a| !model.contains(a)) {
            let want = insertion_oracle(&db, &a);
            if want.is_empty() {
                continue;
            }
            for v in [Variant::Minimal, Variant::Materialized] {
                let out = view_update_with_quiet(&db, &VuRequest::insert(a.clone()), v);
                assert!(out.iter().all(|t| t.1.is_empty()), "{db}\n{a}");
                let got: BTreeSet<_> = out.into_iter().map(|t| t.0).collect();
                assert_eq!(got, want, "{db}\n{a} {v}");
            }
            total += want.len();
        }
    }
    assert_eq!(total, INSERTIONS);
}

#[test]
fn minimal_outcomes_appear_among_materialized() {
    for db in corpus(&Shape { ics: 3, ..Shape::default() }) {
        let model = least_model(&db).unwrap();
        for a in views(&db) {
            let req = if model.contains(&a) { VuRequest::delete(a.clone()) } else { VuRequest::insert(a.clone()) };
            let (Ok(min), Ok(mat)) =
                (view_update(&db, &req, Variant::Minimal), view_update(&db, &req, Variant::Materialized))
            else {
                continue;
            };
            let mat: Vec<_> = mat.transactions().into_iter().cloned().collect();
            for t in min.transactions() {
                assert!(mat.contains(t), "{db}\n{a}: {t}");
            }
        }
    }
}

const EXPLANATIONS: usize = 90;
const DELETIONS: usize = 130;
const INSERTIONS: usize = 78;
