//! View updates: route the request, produce transactions, keep the
//! constraints, certify every result against the postulates.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::eval::{least_model, satisfies, Evaluator, Interpretation};
use crate::hitting_set::minimize;
use crate::postulates::{check_postulates_with, PostulateReport};
use crate::revision::Repairer;
use crate::syntax::{Atom, Database, Literal};
use crate::tableau::{
    build_update_tableau, hitting_set_of_branch, idb_plus, idb_star, strong_minimality_filter, Signed,
};
use crate::validate::ensure_valid;
use crate::vu::{
    consistent_after, is_necessary, minimize_transactions, realizes, search, sort_transactions, Transaction, VuRequest,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Variant {
    /// Only transactions passing the minimality tests.
    #[default]
    Minimal,
    /// Works off the materialized model; no minimality test on deletions.
    Materialized,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Minimal => "minimal",
            Variant::Materialized => "materialized",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "minimal" => Ok(Variant::Minimal),
            "materialized" => Ok(Variant::Materialized),
            _ => Err(format!("unknown variant {s}, expected minimal or materialized")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Config {
    pub max_iter: usize,
    pub postulates: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config { max_iter: 16, postulates: true }
    }
}

#[derive(Clone, Debug)]
pub struct Alternative {
    pub transaction: Transaction,
    pub database: Database,
    pub report: Option<PostulateReport>,
}

#[derive(Clone, Debug)]
pub struct UpdateOutcome {
    pub variant: Variant,
    pub alternatives: Vec<Alternative>,
    /// How the transactions were found.
    pub trace: Vec<String>,
}

impl UpdateOutcome {
    pub fn transactions(&self) -> Vec<&Transaction> {
        self.alternatives.iter().map(|a| &a.transaction).collect()
    }

    pub fn new_databases(&self) -> Vec<&Database> {
        self.alternatives.iter().map(|a| &a.database).collect()
    }
}

impl fmt::Display for UpdateOutcome {
    /// One block per alternative: the transaction lines, then the report.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.alternatives.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(f, "% alternative {}", i + 1)?;
            write!(f, "{}", a.transaction)?;
            if let Some(r) = &a.report {
                write!(f, "{r}")?;
            }
        }
        Ok(())
    }
}

/// The request as a conjunction of ground literals.
pub fn request_literals(req: &VuRequest) -> Vec<Literal> {
    let mut out: Vec<Literal> = req.inserts.iter().cloned().map(Literal::pos).collect();
    out.extend(req.deletes.iter().cloned().map(Literal::neg));
    out
}

pub fn view_update(db: &Database, req: &VuRequest, variant: Variant) -> Result<UpdateOutcome> {
    view_update_with(db, req, variant, &Config::default())
}

pub fn view_update_with(db: &Database, req: &VuRequest, variant: Variant, cfg: &Config) -> Result<UpdateOutcome> {
    ensure_valid(db)?;
    let eval = Evaluator::new(&db.idb)?;
    let model = eval.model(&db.edb);
    let problems = req.violations(db, &model);
    if !problems.is_empty() {
        return Err(Error::InvalidRequest(problems));
    }
    let mut trace = Vec::new();
    let candidates = candidates(db, req, variant, &eval, &mut trace)?;
    trace.push(format!("{} candidate transactions", candidates.len()));

    let mut chosen: Vec<Transaction> = candidates.iter().filter(|t| consistent_after(&eval, db, t)).cloned().collect();
    if chosen.is_empty() && !candidates.is_empty() {
        trace.push("no candidate keeps the constraints, repairing".into());
        chosen = repaired(db, req, &eval, &candidates, cfg, &mut trace)?;
    }
    if chosen.is_empty() {
        trace.push("no transaction realizes the request within the constraints".into());
        return Err(Error::Unrealizable { trace });
    }
    sort_transactions(&mut chosen);

    let alpha = request_literals(req);
    let inner = Config { postulates: false, ..cfg.clone() };
    let op = |kb: &Database, beta: &[Literal]| -> Result<Database> {
        let mut r = VuRequest::default();
        for l in beta {
            if l.positive {
                r.inserts.insert(l.atom.clone());
            } else {
                r.deletes.insert(l.atom.clone());
            }
        }
        match view_update_with(kb, &r, variant, &inner) {
            Ok(o) => Ok(o.alternatives[0].database.clone()),
            Err(Error::InvalidRequest(_)) | Err(Error::Unrealizable { .. }) => Ok(kb.clone()),
            Err(e) => Err(e),
        }
    };
    let mut alternatives = Vec::new();
    for t in chosen {
        let database = db.with_edb(t.apply(&db.edb));
        let report = if cfg.postulates { Some(check_postulates_with(db, &alpha, &database, Some(&op))?) } else { None };
        alternatives.push(Alternative { transaction: t, database, report });
    }
    Ok(UpdateOutcome { variant, alternatives, trace })
}

/// Transactions realizing `req`, constraints not yet considered.
fn candidates(
    db: &Database,
    req: &VuRequest,
    variant: Variant,
    eval: &Evaluator,
    trace: &mut Vec<String>,
) -> Result<Vec<Transaction>> {
    if req.inserts.is_empty() && req.deletes.len() == 1 && db.is_definite() {
        let a = req.deletes.iter().next().expect("one delete");
        let (prog, name) = match variant {
            Variant::Minimal => (idb_star(db), "IDB*"),
            Variant::Materialized => (idb_plus(db)?, "IDB+"),
        };
        let mut t = build_update_tableau(&prog, &Signed::neg(a.clone()));
        if variant == Variant::Minimal {
            t = strong_minimality_filter(&t, db, a)?;
        }
        trace.push(format!("update tableau over {name}: {} open branches", t.open_branches().count()));
        let cuts: Vec<BTreeSet<Atom>> = t.open_branches().map(|b| hitting_set_of_branch(b, db)).collect();
        let out: Vec<Transaction> = minimize(cuts)
            .into_iter()
            .map(|deletes| Transaction { inserts: BTreeSet::new(), deletes })
            .filter(|t| realizes(eval, &db.edb, t, req))
            .collect();
        return Ok(out);
    }
    let found = search(db, req)?;
    trace.push(format!("VU search: {} worlds, {} transactions", found.worlds, found.transactions.len()));
    if found.truncated {
        trace.push("VU search truncated".into());
    }
    let ts = found.transactions.into_iter();
    Ok(match variant {
        Variant::Minimal => minimize_transactions(ts.filter(|t| is_necessary(eval, db, t, req))),
        Variant::Materialized => minimize_transactions(ts),
    })
}

fn repaired(
    db: &Database,
    req: &VuRequest,
    eval: &Evaluator,
    candidates: &[Transaction],
    cfg: &Config,
    trace: &mut Vec<String>,
) -> Result<Vec<Transaction>> {
    let goal =
        |m: &Interpretation| req.inserts.iter().all(|a| m.contains(a)) && req.deletes.iter().all(|a| !m.contains(a));
    let repairer = Repairer::new(eval, &db.idb, &db.ic, cfg.max_iter);
    let mut out: Vec<Transaction> = Vec::new();
    for t in candidates {
        let facts = t.apply(&db.edb);
        let applied = db.with_edb(facts.clone());
        // Keep the inserted facts and one consistent derivation of each
        // inserted atom.
        let mut protected = t.inserts.clone();
        for a in &req.inserts {
            let sets = crate::abduction::explanation_sets(&applied, a)?;
            if let Some(s) = sets.into_iter().find(|s| satisfies(&eval.model(s), &db.ic)) {
                protected.extend(s);
            }
        }
        let mut steps = Vec::new();
        if let Some(f) = repairer.repair(&facts, &protected, &goal, &mut steps)? {
            let f = repairer.restore(&f, &db.edb, &goal);
            let fixed = Transaction {
                inserts: f.difference(&db.edb).cloned().collect(),
                deletes: db.edb.difference(&f).cloned().collect(),
            };
            trace.extend(steps);
            if !out.contains(&fixed) {
                out.push(fixed);
            }
        } else {
            trace.extend(steps);
        }
    }
    Ok(out)
}

/// Least model of `db`, computed from scratch.
pub fn refresh_materialized_view(db: &Database) -> Result<Interpretation> {
    least_model(db)
}

/// A database with its model kept between queries. Any change to the
/// facts drops the cached model.
#[derive(Clone, Debug)]
pub struct MaterializedView {
    db: Database,
    model: Option<Interpretation>,
    pub refreshes: usize,
}

impl MaterializedView {
    pub fn new(db: Database) -> Self {
        MaterializedView { db, model: None, refreshes: 0 }
    }

    pub fn database(&self) -> &Database {
        &self.db
    }

    pub fn model(&mut self) -> Result<&Interpretation> {
        if self.model.is_none() {
            self.model = Some(refresh_materialized_view(&self.db)?);
            self.refreshes += 1;
        }
        Ok(self.model.as_ref().expect("just computed"))
    }

    pub fn apply(&mut self, t: &Transaction) {
        if !t.is_empty() {
            self.db = self.db.with_edb(t.apply(&self.db.edb));
            self.model = None;
        }
    }

    pub fn replace(&mut self, db: Database) {
        if db != self.db {
            self.db = db;
            self.model = None;
        }
    }
}
