//! Interactive session state and command interpreter.

use std::collections::BTreeSet;

use vud_core::engine::{view_update_with, Config, Variant};
use vud_core::error::Error;
use vud_core::eval::{check_ic, least_model};
use vud_core::parser::{parse_database, parse_ground_atom};
use vud_core::sld::sld_tree;
use vud_core::syntax::{Atom, Database};
use vud_core::vu::{Transaction, VuRequest};

/// `+a. -b.` on one line.
pub fn one_line(t: &Transaction) -> String {
    if t.is_empty() {
        return "(no change)".to_string();
    }
    let mut parts: Vec<String> = t.inserts.iter().map(|a| format!("+{a}.")).collect();
    parts.extend(t.deletes.iter().map(|a| format!("-{a}.")));
    parts.join(" ")
}

pub struct Session {
    pub db: Database,
    initial: Database,
    pub history: Vec<Transaction>,
    pub pending: Vec<Transaction>,
    pub variant: Variant,
    pub config: Config,
}

pub enum Reply {
    Text(String),
    Quit,
}

const HELP: &str = "\
commands:
  query <atom>.        is the atom derivable
  insert <atom>.       propose transactions making a view atom true
  delete <atom>.       propose transactions making a view atom false
  choose <n>           apply proposal n
  show model|facts|ic  print the model, the facts or constraint violations
  show tree <atom>     print the SLD tree of an atom
  save <path>          write the database
  undo                 revert the last applied transaction
  quit";

impl Session {
    pub fn new(db: Database, variant: Variant, config: Config) -> Self {
        Session { initial: db.clone(), db, history: Vec::new(), pending: Vec::new(), variant, config }
    }

    /// The initial database with every applied transaction replayed.
    pub fn replay(&self) -> Database {
        let mut edb = self.initial.edb.clone();
        for t in &self.history {
            edb = t.apply(&edb);
        }
        self.initial.with_edb(edb)
    }

    pub fn execute(&mut self, line: &str) -> Reply {
        let line = line.trim();
        let line = line.strip_suffix('.').unwrap_or(line).trim();
        let (cmd, arg) = match line.split_once(char::is_whitespace) {
            Some((c, a)) => (c, a.trim()),
            None => (line, ""),
        };
        let text = match (cmd, arg) {
            ("", _) => return Reply::Text(String::new()),
            ("quit" | "exit", _) => return Reply::Quit,
            ("help", _) => HELP.to_string(),
            ("query", a) => self.query(a),
            ("insert", a) => self.propose(a, true),
            ("delete", a) => self.propose(a, false),
            ("choose", n) => self.choose(n),
            ("show", what) => self.show(what),
            ("save", path) if !path.is_empty() => match std::fs::write(path, self.db.to_string()) {
                Ok(()) => format!("saved {path}"),
                Err(e) => format!("error: {e}"),
            },
            ("undo", "") => match self.history.pop() {
                Some(t) => {
                    self.db = self.replay();
                    self.pending.clear();
                    format!("undone: {}", one_line(&t))
                }
                None => "nothing to undo".to_string(),
            },
            _ => format!("error: unknown command `{line}`, try help"),
        };
        Reply::Text(text)
    }

    fn atom(&self, text: &str) -> Result<Atom, String> {
        parse_ground_atom(text).map_err(|e| format!("error: {e}"))
    }

    fn query(&self, a: &str) -> String {
        let atom = match self.atom(a) {
            Ok(x) => x,
            Err(e) => return e,
        };
        match least_model(&self.db) {
            Ok(m) => m.contains(&atom).to_string(),
            Err(e) => format!("error: {e}"),
        }
    }

    fn propose(&mut self, a: &str, insert: bool) -> String {
        let atom = match self.atom(a) {
            Ok(x) => x,
            Err(e) => return e,
        };
        let req = if insert { VuRequest::insert(atom) } else { VuRequest::delete(atom) };
        let cfg = Config { postulates: false, ..self.config.clone() };
        match view_update_with(&self.db, &req, self.variant, &cfg) {
            Ok(out) => {
                self.pending = out.alternatives.into_iter().map(|x| x.transaction).collect();
                let mut lines: Vec<String> =
                    self.pending.iter().enumerate().map(|(i, t)| format!("{}: {}", i + 1, one_line(t))).collect();
                lines.push("choose <n> to apply".to_string());
                lines.join("\n")
            }
            Err(e) => {
                self.pending.clear();
                format!("error: {e}")
            }
        }
    }

    fn choose(&mut self, n: &str) -> String {
        let Ok(i) = n.parse::<usize>() else {
            return format!("error: `{n}` is not a number");
        };
        if i == 0 || i > self.pending.len() {
            return format!("error: no proposal {i}");
        }
        let t = self.pending.swap_remove(i - 1);
        self.pending.clear();
        self.db = self.db.with_edb(t.apply(&self.db.edb));
        let text = format!("applied: {}", one_line(&t));
        self.history.push(t);
        text
    }

    fn show(&self, what: &str) -> String {
        let (what, rest) = match what.split_once(char::is_whitespace) {
            Some((w, r)) => (w, r.trim()),
            None => (what, ""),
        };
        match (what, rest) {
            ("model", "") => match least_model(&self.db) {
                Ok(m) => lines(&m),
                Err(e) => format!("error: {e}"),
            },
            ("facts", "") => lines(&self.db.edb),
            ("ic", "") => match check_ic(&self.db) {
                Ok(v) if v.is_empty() => "no violations".to_string(),
                Ok(v) => v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("\n"),
                Err(e) => format!("error: {e}"),
            },
            ("tree", a) if !a.is_empty() => {
                let atom = match self.atom(a) {
                    Ok(x) => x,
                    Err(e) => return e,
                };
                match sld_tree(&self.db, &atom) {
                    Ok(t) => t.render().trim_end().to_string(),
                    Err(e) => format!("error: {e}"),
                }
            }
            _ => "error: show model|facts|ic|tree <atom>".to_string(),
        }
    }
}

pub fn lines(atoms: &BTreeSet<Atom>) -> String {
    atoms.iter().map(|a| format!("{a}.")).collect::<Vec<_>>().join("\n")
}

pub fn load(path: &str) -> Result<Database, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(vec![format!("{path}: {e}")]))?;
    parse_database(&text)
}
