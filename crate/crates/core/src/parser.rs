//! Text format.
//!
//! ```text
//! % comment to end of line
//! edge(a,b).                    fact
//! path(X,Y) :- edge(X,Y).       rule
//! p :- q, not r.                negation
//! a | b :- c.                   disjunctive head
//! :- p, q.                      denial constraint
//! ```
//!
//! Identifiers starting with an uppercase letter are variables; anything
//! else (lowercase, digit or underscore initial) is a constant or predicate.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::syntax::{Atom, Constraint, Database, Literal, Name, Rule, Term};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Pipe,
    Implies,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        let tok = match c {
            c if c.is_whitespace() => {
                bump(&mut chars);
                continue;
            }
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
                continue;
            }
            '(' => {
                bump(&mut chars);
                Tok::LParen
            }
            ')' => {
                bump(&mut chars);
                Tok::RParen
            }
            ',' => {
                bump(&mut chars);
                Tok::Comma
            }
            '.' => {
                bump(&mut chars);
                Tok::Dot
            }
            '|' => {
                bump(&mut chars);
                Tok::Pipe
            }
            ':' => {
                bump(&mut chars);
                if chars.peek() != Some(&'-') {
                    return Err(syntax(l, col, "expected ':-'"));
                }
                bump(&mut chars);
                Tok::Implies
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        s.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            other => return Err(syntax(l, col, &format!("unexpected character '{other}'"))),
        };
        out.push(Spanned { tok, line: l, column: col });
    }
    Ok(out)
}

fn syntax(line: usize, column: usize, message: &str) -> Error {
    Error::Syntax { line, column, message: message.to_string() }
}

enum Clause {
    Fact(Atom),
    Rule(Rule),
    Constraint(Constraint),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        let toks = lex(text)?;
        let lines = text.split('\n').count();
        let last = text.rsplit('\n').next().map_or(0, |l| l.chars().count());
        Ok(Parser { toks, pos: 0, end: (lines, last + 1) })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |s| (s.line, s.column))
    }

    fn error<T>(&self, message: &str) -> Result<T> {
        let (line, column) = self.here();
        Err(syntax(line, column, message))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(&format!("expected {what}"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error("expected identifier"),
        }
    }

    fn term(&mut self) -> Result<Term> {
        let name = self.ident()?;
        if name.starts_with(|c: char| c.is_uppercase()) {
            Ok(Term::Var(name.into()))
        } else {
            Ok(Term::Const(name.into()))
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        let (line, column) = self.here();
        let pred = self.ident()?;
        if pred.starts_with(|c: char| c.is_uppercase()) {
            return Err(syntax(line, column, "predicate names must not be capitalized"));
        }
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            loop {
                args.push(self.term()?);
                match self.peek() {
                    Some(Tok::Comma) => self.pos += 1,
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        break;
                    }
                    _ => return self.error("expected ',' or ')'"),
                }
            }
        }
        Ok(Atom { pred: pred.into(), args })
    }

    fn literal(&mut self) -> Result<Literal> {
        if let Some(Tok::Ident(s)) = self.peek() {
            if s == "not" && matches!(self.toks.get(self.pos + 1), Some(Spanned { tok: Tok::Ident(_), .. })) {
                self.pos += 1;
                return Ok(Literal::neg(self.atom()?));
            }
        }
        Ok(Literal::pos(self.atom()?))
    }

    fn body(&mut self) -> Result<Vec<Literal>> {
        let mut body = vec![self.literal()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            body.push(self.literal()?);
        }
        Ok(body)
    }

    fn clause(&mut self) -> Result<Clause> {
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            let body = self.body()?;
            self.expect(Tok::Dot, "'.'")?;
            return Ok(Clause::Constraint(Constraint::new(body)));
        }
        let mut head = vec![self.atom()?];
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            head.push(self.atom()?);
        }
        let body = if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            self.body()?
        } else {
            Vec::new()
        };
        self.expect(Tok::Dot, "'.'")?;
        if body.is_empty() && head.len() == 1 {
            Ok(Clause::Fact(head.pop().unwrap()))
        } else {
            Ok(Clause::Rule(Rule { head, body }))
        }
    }
}

/// Parses a database. Facts go to the EDB, rules (including disjunctive
/// facts) to the IDB, denials to the constraints.
pub fn parse_database(text: &str) -> Result<Database> {
    let mut parser = Parser::new(text)?;
    let mut db = Database::default();
    while parser.peek().is_some() {
        match parser.clause()? {
            Clause::Fact(atom) => {
                if !atom.is_ground() {
                    return Err(Error::NonGroundFact(atom.to_string()));
                }
                db.edb.insert(atom);
            }
            Clause::Rule(rule) => db.idb.push(rule),
            Clause::Constraint(c) => db.ic.push(c),
        }
    }
    check_arities(&db)?;
    Ok(db)
}

fn check_arities(db: &Database) -> Result<()> {
    let mut seen: BTreeMap<Name, usize> = BTreeMap::new();
    for atom in db.all_atoms() {
        match seen.get(&atom.pred) {
            Some(&n) if n != atom.arity() => {
                return Err(Error::ArityConflict { predicate: atom.pred.to_string(), expected: n, found: atom.arity() })
            }
            Some(_) => {}
            None => {
                seen.insert(atom.pred.clone(), atom.arity());
            }
        }
    }
    Ok(())
}

/// Parses a single atom; a trailing `.` is optional.
pub fn parse_atom(text: &str) -> Result<Atom> {
    let mut parser = Parser::new(text)?;
    let atom = parser.atom()?;
    if parser.peek() == Some(&Tok::Dot) {
        parser.pos += 1;
    }
    if parser.peek().is_some() {
        return parser.error("trailing input after atom");
    }
    Ok(atom)
}

pub fn parse_ground_atom(text: &str) -> Result<Atom> {
    let atom = parse_atom(text)?;
    if !atom.is_ground() {
        return Err(Error::NonGroundFact(atom.to_string()));
    }
    Ok(atom)
}

/// Parses a single literal such as `not p(a)`; a trailing `.` is optional.
pub fn parse_literal(text: &str) -> Result<Literal> {
    let mut parser = Parser::new(text)?;
    let lit = parser.literal()?;
    if parser.peek() == Some(&Tok::Dot) {
        parser.pos += 1;
    }
    if parser.peek().is_some() {
        return parser.error("trailing input after literal");
    }
    Ok(lit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_with_conjunctive_body() {
        let db = parse_database("p :- a, e.").unwrap();
        assert_eq!(
            db.idb,
            vec![Rule::new(Atom::prop("p"), vec![Literal::pos(Atom::prop("a")), Literal::pos(Atom::prop("e"))])]
        );
        assert!(db.edb.is_empty() && db.ic.is_empty());
    }

    #[test]
    fn empty_input_is_empty_database() {
        assert_eq!(parse_database("").unwrap(), Database::default());
        assert_eq!(parse_database("  % only a comment\n").unwrap(), Database::default());
    }

    #[test]
    fn denial_constraint() {
        let db = parse_database(":- b.").unwrap();
        assert_eq!(db.ic, vec![Constraint::new(vec![Literal::pos(Atom::prop("b"))])]);
    }

    #[test]
    fn negation_and_disjunction() {
        let db = parse_database("a | b :- c, not d(X), e(X).").unwrap();
        let r = &db.idb[0];
        assert_eq!(r.head.len(), 2);
        assert!(!r.body[1].positive);
        assert_eq!(r.body[1].atom.args, vec![Term::var("X")]);
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_database("p :- a.\nq :- ,").unwrap_err();
        assert_eq!(err, Error::Syntax { line: 2, column: 6, message: "expected identifier".into() });
        assert!(matches!(parse_database("p :- a"), Err(Error::Syntax { line: 1, .. })));
        assert!(matches!(parse_database("p :- a ?"), Err(Error::Syntax { column: 8, .. })));
    }

    #[test]
    fn arity_conflict() {
        let err = parse_database("p(a). q :- p(a, b).").unwrap_err();
        assert!(matches!(err, Error::ArityConflict { ref predicate, .. } if predicate == "p"));
    }

    #[test]
    fn fact_with_variable_rejected() {
        assert!(matches!(parse_database("p(X)."), Err(Error::NonGroundFact(_))));
    }

    #[test]
    fn comments_and_whitespace_are_ignored() {
        let a = parse_database("p :- a. % trailing\n\n  a.").unwrap();
        let b = parse_database("p:-a.a.").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_atoms() {
        assert_eq!(
            parse_atom("staff_chair(aravindan,gerhard).").unwrap(),
            Atom::ground("staff_chair", &["aravindan", "gerhard"])
        );
        assert!(parse_ground_atom("p(X)").is_err());
        assert_eq!(parse_literal("not q").unwrap(), Literal::neg(Atom::prop("q")));
        assert!(parse_atom("p q").is_err());
    }
}
