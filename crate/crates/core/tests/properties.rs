//! Invariants over random small databases.

mod common;

use std::collections::BTreeSet;

use common::{atoms_of, explanation_oracle, random_db, random_literal, rng, Shape};
use proptest::prelude::*;
use vud_core::abduction::explanation_sets;
use vud_core::engine::{view_update_with, Config, Variant};
use vud_core::eval::{least_model, least_model_naive, satisfies, Evaluator};
use vud_core::ground::ground;
use vud_core::hitting_set::{is_hitting_set, minimal_hitting_sets, minimal_hitting_sets_exhaustive};
use vud_core::magic::magic_derives;
use vud_core::parser::parse_database;
use vud_core::revision::{revise, Config as RevisionConfig, Outcome};
use vud_core::syntax::{Atom, Database, Literal};
use vud_core::tableau::{build_update_tableau, hitting_set_of_branch, idb_star, strong_minimality_filter, Signed};
use vud_core::vu::{normalize, VuRequest};

fn db(seed: u64) -> Database {
    random_db(&mut rng(seed), &Shape::default())
}

fn stratified(seed: u64) -> Database {
    random_db(&mut rng(seed), &Shape { negation: 0.25, ..Shape::default() })
}

fn derived_views(db: &Database) -> Vec<Atom> {
    let m = least_model(db).unwrap();
    db.view_preds().into_iter().map(|p| Atom::prop(&p)).filter(|a| m.contains(a)).collect()
}

fn quiet() -> Config {
    Config { postulates: false, ..Config::default() }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn semi_naive_agrees_with_naive(seed in any::<u64>()) {
        let db = stratified(seed);
        prop_assert_eq!(least_model(&db).unwrap(), least_model_naive(&db).unwrap());
    }

    #[test]
    fn grounding_keeps_the_model(seed in any::<u64>()) {
        let db = stratified(seed);
        prop_assert_eq!(least_model(&ground(&db)).unwrap(), least_model(&db).unwrap());
    }

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let db = stratified(seed);
        prop_assert_eq!(parse_database(&db.to_string()).unwrap(), db);
    }

    #[test]
    fn normalization_keeps_the_model(seed in any::<u64>()) {
        let db = stratified(seed);
        let norm = Evaluator::new(&normalize(&db.idb).unwrap()).unwrap().model(&db.edb);
        let orig = least_model(&db).unwrap();
        let preds: BTreeSet<_> = db.all_atoms().map(|a| a.pred.clone()).collect();
        let norm: BTreeSet<_> = norm.into_iter().filter(|a| preds.contains(&a.pred)).collect();
        prop_assert_eq!(norm, orig.into_iter().collect::<BTreeSet<_>>());
    }

    #[test]
    fn magic_sets_answer_like_the_model(seed in any::<u64>()) {
        let db = db(seed);
        let m = least_model(&db).unwrap();
        for a in atoms_of(&db) {
            prop_assert_eq!(magic_derives(&db, &a).unwrap(), m.contains(&a), "{}", a);
        }
    }

    #[test]
    fn explanations_are_the_minimal_supports(seed in any::<u64>()) {
        let db = db(seed);
        for a in derived_views(&db) {
            let got: BTreeSet<_> = explanation_sets(&db, &a).unwrap().into_iter().collect();
            prop_assert_eq!(got, explanation_oracle(&db, &a));
        }
    }

    #[test]
    fn hitting_sets_match_exhaustive(sets in prop::collection::vec(prop::collection::btree_set(0u8..7, 1..4), 0..5)) {
        let fast: BTreeSet<_> = minimal_hitting_sets(&sets).into_iter().collect();
        let slow: BTreeSet<_> = minimal_hitting_sets_exhaustive(&sets).into_iter().collect();
        for h in &fast {
            prop_assert!(is_hitting_set(h, &sets));
        }
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn filtered_branches_are_minimal_hitting_sets(seed in any::<u64>()) {
        let db = db(seed);
        for a in derived_views(&db) {
            let t = build_update_tableau(&idb_star(&db), &Signed::neg(a.clone()));
            let t = strong_minimality_filter(&t, &db, &a).unwrap();
            let hs = minimal_hitting_sets(&explanation_sets(&db, &a).unwrap());
            for b in t.branches.iter().filter(|b| b.is_open()) {
                let h = hitting_set_of_branch(b, &db);
                prop_assert!(hs.contains(&h), "{} {:?}", a, h);
            }
        }
    }

    #[test]
    fn updates_realize_the_request(seed in any::<u64>(), pick in any::<u64>()) {
        let db = stratified(seed);
        let m = least_model(&db).unwrap();
        let views: Vec<Atom> = db.view_preds().into_iter().map(|p| Atom::prop(&p)).collect();
        let a = views[(pick % views.len() as u64) as usize].clone();
        let req = if m.contains(&a) { VuRequest::delete(a.clone()) } else { VuRequest::insert(a.clone()) };
        let eval = Evaluator::new(&db.idb).unwrap();
        for v in [Variant::Minimal, Variant::Materialized] {
            let Ok(out) = view_update_with(&db, &req, v, &quiet()) else { continue };
            for alt in &out.alternatives {
                let after = eval.model(&alt.database.edb);
                prop_assert_eq!(after.contains(&a), !m.contains(&a));
                prop_assert!(satisfies(&after, &db.ic));
                prop_assert_eq!(&alt.database.edb, &alt.transaction.apply(&db.edb));
            }
        }
    }

    #[test]
    fn revision_is_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let db = random_db(&mut r, &Shape::default());
        let alpha = random_literal(&mut r, &db);
        let cfg = RevisionConfig::default();
        let Ok(once) = revise(&db, &alpha, &cfg) else { return Ok(()) };
        if once.outcome == Outcome::Revised {
            let twice = revise(&once.kb, &alpha, &cfg).unwrap();
            prop_assert_eq!(twice.outcome, Outcome::Entailed);
            prop_assert_eq!(twice.kb, once.kb);
        }
    }

    #[test]
    fn revising_by_a_present_fact_is_vacuous(seed in any::<u64>()) {
        let db = db(seed);
        for a in db.edb.clone() {
            let r = revise(&db, &Literal::pos(a), &RevisionConfig::default()).unwrap();
            prop_assert_eq!(r.kb, db.clone());
        }
    }
}
