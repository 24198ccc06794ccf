//! `vud`: query and update deductive databases from the command line.

mod session;

use std::io::{self, BufRead, IsTerminal, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vud_core::abduction::explanations;
use vud_core::engine::{view_update_with, Config, Variant};
use vud_core::error::Error;
use vud_core::eval::{check_ic, least_model};
use vud_core::parser::{parse_ground_atom, parse_literal};
use vud_core::revision::{revise, Config as RevisionConfig};
use vud_core::sld::sld_tree;
use vud_core::stratify::stratify;
use vud_core::tableau::{build_update_tableau, idb_plus, idb_star, strong_minimality_filter, Signed};
use vud_core::validate::ensure_valid;
use vud_core::vu::VuRequest;

use session::{lines, load, one_line, Reply, Session};

#[derive(Parser)]
#[command(name = "vud", version, about = "View updates for stratified Datalog databases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Tsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Minimal,
    Materialized,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Minimal => Variant::Minimal,
            VariantArg::Materialized => Variant::Materialized,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate a database and report constraint violations.
    Check { file: String },
    /// Print the perfect model.
    Model { file: String },
    /// Is a ground atom derivable.
    Query {
        file: String,
        atom: String,
        /// Print the SLD tree.
        #[arg(long)]
        tree: bool,
        /// Print the minimal explanations.
        #[arg(long)]
        explain: bool,
    },
    /// Compute transactions that insert or delete a view atom.
    Update {
        file: String,
        #[arg(long, conflicts_with = "delete", required_unless_present = "delete")]
        insert: Option<String>,
        #[arg(long)]
        delete: Option<String>,
        #[arg(long, value_enum, default_value = "minimal")]
        variant: VariantArg,
        /// List every alternative instead of applying the first.
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 16)]
        max_iter: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Print the postulate report of each alternative.
        #[arg(long)]
        report: bool,
        /// Write the updated database.
        #[arg(long)]
        save: Option<String>,
    },
    /// Print the update tableau for deleting a view atom.
    Tableau {
        file: String,
        atom: String,
        #[arg(long, value_enum, default_value = "minimal")]
        variant: VariantArg,
    },
    /// Revise the database by a ground literal such as `p` or `not p`.
    Revise {
        file: String,
        literal: String,
        #[arg(long, default_value_t = 16)]
        max_iter: usize,
    },
    /// Interactive session.
    Repl {
        file: String,
        #[arg(long, value_enum, default_value = "minimal")]
        variant: VariantArg,
        #[arg(long, default_value_t = 16)]
        max_iter: usize,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Unrealizable { .. } => 2,
        Error::NotStratifiable { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    match run(cli.command, &mut out) {
        Ok(()) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            print!("{out}");
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cmd: Command, out: &mut String) -> Result<(), Error> {
    use std::fmt::Write as _;
    match cmd {
        Command::Check { file } => {
            let db = load(&file)?;
            ensure_valid(&db)?;
            let strata = stratify(&db)?;
            writeln!(
                out,
                "ok: {} facts, {} rules, {} constraints, {} strata",
                db.edb.len(),
                db.idb.len(),
                db.ic.len(),
                strata.len()
            )
            .unwrap();
            let v = check_ic(&db)?;
            if v.is_empty() {
                writeln!(out, "no violations").unwrap();
            }
            for x in v {
                writeln!(out, "violated: {x}").unwrap();
            }
        }
        Command::Model { file } => {
            let db = load(&file)?;
            ensure_valid(&db)?;
            let m = least_model(&db)?;
            if !m.is_empty() {
                writeln!(out, "{}", lines(&m)).unwrap();
            }
        }
        Command::Query { file, atom, tree, explain } => {
            let db = load(&file)?;
            ensure_valid(&db)?;
            let a = parse_ground_atom(&atom)?;
            writeln!(out, "{}", least_model(&db)?.contains(&a)).unwrap();
            if tree {
                write!(out, "{}", sld_tree(&db, &a)?.render()).unwrap();
            }
            if explain && db.is_view(&a) {
                for e in explanations(&db, &a)? {
                    writeln!(out, "explanation: {e}").unwrap();
                }
            }
        }
        Command::Update { file, insert, delete, variant, all, max_iter, format, report, save } => {
            let db = load(&file)?;
            let req = match (insert, delete) {
                (Some(a), _) => VuRequest::insert(parse_ground_atom(&a)?),
                (None, Some(a)) => VuRequest::delete(parse_ground_atom(&a)?),
                (None, None) => unreachable!("clap requires one of the two"),
            };
            let cfg = Config { max_iter, postulates: report };
            let outcome = view_update_with(&db, &req, variant.into(), &cfg)?;
            let shown = if all { outcome.alternatives.len() } else { 1 };
            for (i, alt) in outcome.alternatives.iter().take(shown).enumerate() {
                match format {
                    Format::Tsv => {
                        for a in &alt.transaction.inserts {
                            writeln!(out, "{}\t+\t{a}", i + 1).unwrap();
                        }
                        for a in &alt.transaction.deletes {
                            writeln!(out, "{}\t-\t{a}", i + 1).unwrap();
                        }
                    }
                    Format::Text if all => writeln!(out, "{}: {}", i + 1, one_line(&alt.transaction)).unwrap(),
                    Format::Text => {
                        write!(out, "{}", alt.transaction).unwrap();
                        writeln!(out, "% facts after update").unwrap();
                        if !alt.database.edb.is_empty() {
                            writeln!(out, "{}", lines(&alt.database.edb)).unwrap();
                        }
                    }
                }
                if let Some(r) = &alt.report {
                    write!(out, "{r}").unwrap();
                }
            }
            if let Some(path) = save {
                let first = &outcome.alternatives[0].database;
                std::fs::write(&path, first.to_string()).map_err(|e| Error::Invalid(vec![format!("{path}: {e}")]))?;
            }
        }
        Command::Tableau { file, atom, variant } => {
            let db = load(&file)?;
            ensure_valid(&db)?;
            let a = parse_ground_atom(&atom)?;
            let t = match Variant::from(variant) {
                Variant::Minimal => {
                    let t = build_update_tableau(&idb_star(&db), &Signed::neg(a.clone()));
                    strong_minimality_filter(&t, &db, &a)?
                }
                Variant::Materialized => build_update_tableau(&idb_plus(&db)?, &Signed::neg(a.clone())),
            };
            write!(out, "{}", t.render()).unwrap();
        }
        Command::Revise { file, literal, max_iter } => {
            let db = load(&file)?;
            let alpha = parse_literal(&literal)?;
            let r = revise(&db, &alpha, &RevisionConfig { max_iter })?;
            writeln!(out, "% {:?}", r.outcome).unwrap();
            for a in r.kb.edb.difference(&db.edb) {
                writeln!(out, "+{a}.").unwrap();
            }
            for a in db.edb.difference(&r.kb.edb) {
                writeln!(out, "-{a}.").unwrap();
            }
        }
        Command::Repl { file, variant, max_iter } => {
            let db = load(&file)?;
            ensure_valid(&db)?;
            stratify(&db)?;
            repl(Session::new(db, variant.into(), Config { max_iter, postulates: false }));
        }
    }
    Ok(())
}

fn repl(mut s: Session) {
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    let mut stdout = io::stdout();
    loop {
        if interactive {
            print!("vud> ");
            let _ = stdout.flush();
        }
        let mut line = String::new();
        match stdin.lock().read_line(&mut line) {
            Ok(0) | Err(_) => break,
            Ok(_) => {}
        }
        match s.execute(&line) {
            Reply::Quit => break,
            Reply::Text(t) if t.is_empty() => {}
            Reply::Text(t) => println!("{t}"),
        }
    }
}
