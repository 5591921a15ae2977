//! Problem files: a TPTP CNF subset and a native implication syntax.
//!
//! ```text
//! % comment
//! cnf(c1, axiom, (~p(Y, a) | ~p(Z, b))).
//! s(X) -> p(X, g(X)).
//! -> s(a).
//! p(a, g(b)) -> .
//! ```
//!
//! Variables start with an uppercase letter or `_` and are scoped to their
//! clause. An uppercase identifier directly followed by `(` is a symbol;
//! that form only occurs in reserved names and is rejected in user input.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::clause_set::{ClauseId, ClauseSet};
use crate::error::Error;
use crate::symbols::is_reserved;
use crate::terms::{Atom, Clause, Symbol, Term, Var};

/// A parsed problem: clauses with their names.
#[derive(Clone, Debug, Default)]
pub struct ProblemFile {
    pub clauses: Vec<(String, Clause)>,
}

impl ProblemFile {
    pub fn clause_set(&self) -> ClauseSet {
        ClauseSet::from_clauses(self.clauses.iter().map(|(_, c)| c.clone()))
    }

    pub fn name_of(&self, id: ClauseId) -> Option<&str> {
        self.clauses.get(id.0 as usize).map(|(n, _)| n.as_str())
    }

    /// Prints in TPTP CNF syntax.
    pub fn to_tptp(&self) -> String {
        let mut out = String::new();
        for (name, c) in &self.clauses {
            let _ = writeln!(out, "cnf({name}, axiom, {}).", tptp_clause(c));
        }
        out
    }
}

pub fn tptp_clause(c: &Clause) -> String {
    if c.is_empty() {
        return "$false".into();
    }
    let lits: Vec<String> =
        c.neg.iter().map(|a| format!("~{a}")).chain(c.pos.iter().map(|a| a.to_string())).collect();
    format!("({})", lits.join(" | "))
}

/// Native syntax for one clause, terminated by a period.
pub fn native_clause(c: &Clause) -> String {
    format!("{c}.")
}

/// Mathematical rendering: capitalised predicates, lowercase variables.
pub fn math_clause(c: &Clause) -> String {
    fn term(t: &Term, out: &mut String) {
        match t {
            Term::Var(v) => {
                let _ = write!(out, "x{v}");
            }
            Term::App(f, args) => {
                out.push_str(f.as_str());
                if !args.is_empty() {
                    out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        term(a, out);
                    }
                    out.push(')');
                }
            }
        }
    }
    fn atom(a: &Atom) -> String {
        let mut s = String::new();
        let mut chars = a.pred.as_str().chars();
        if let Some(c) = chars.next() {
            s.extend(c.to_uppercase());
            s.push_str(chars.as_str());
        }
        if !a.args.is_empty() {
            s.push('(');
            for (i, t) in a.args.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                term(t, &mut s);
            }
            s.push(')');
        }
        s
    }
    let side = |atoms: &[Atom]| atoms.iter().map(atom).collect::<Vec<_>>().join(", ");
    match (c.neg.is_empty(), c.pos.is_empty()) {
        (true, _) => side(&c.pos),
        (false, true) => format!("{} ->", side(&c.neg)),
        (false, false) => format!("{} -> {}", side(&c.neg), side(&c.pos)),
    }
}

pub fn parse(input: &str) -> Result<ProblemFile, Error> {
    Parser::new(input, false).problem()
}

/// Parses with reserved symbols allowed (internal files and tests).
pub fn parse_internal(input: &str) -> Result<ProblemFile, Error> {
    Parser::new(input, true).problem()
}

pub fn parse_clause(input: &str) -> Result<Clause, Error> {
    let mut p = Parser::new(input, true);
    let (_, c) = p.statement(0)?;
    p.skip_ws();
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(c)
}

pub fn parse_term(input: &str) -> Result<Term, Error> {
    let mut p = Parser::new(input, true);
    let mut vars = BTreeMap::new();
    let t = p.term(&mut vars)?;
    p.skip_ws();
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(t)
}

pub fn parse_atom(input: &str) -> Result<Atom, Error> {
    let mut p = Parser::new(input, true);
    let mut vars = BTreeMap::new();
    let a = p.atom(&mut vars)?;
    p.skip_ws();
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(a)
}

/// Parses clauses whose variables are shared across statements, as in a
/// conflicting core. Reserved symbols are allowed.
pub fn parse_rigid(input: &str) -> Result<Vec<Clause>, Error> {
    let mut p = Parser::new(input, true);
    p.rigid = true;
    Ok(p.problem()?.clauses.into_iter().map(|(_, c)| c).collect())
}

/// Parses a list of clauses in native syntax, one per statement.
pub fn parse_clauses(input: &str) -> Result<Vec<Clause>, Error> {
    Ok(parse_internal(input)?.clauses.into_iter().map(|(_, c)| c).collect())
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    internal: bool,
    funcs: BTreeMap<String, usize>,
    preds: BTreeMap<String, usize>,
    rigid: bool,
    shared: BTreeMap<String, Var>,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str, internal: bool) -> Self {
        Parser { src: input.as_bytes(), pos: 0, internal, funcs: BTreeMap::new(), preds: BTreeMap::new(), rigid: false, shared: BTreeMap::new() }
    }

    fn location(&self, at: usize) -> (usize, usize) {
        let before = &self.src[..at.min(self.src.len())];
        let line = before.iter().filter(|b| **b == b'\n').count() + 1;
        let col = at - before.iter().rposition(|b| *b == b'\n').map_or(0, |p| p + 1) + 1;
        (line, col)
    }

    fn err(&self, msg: &str) -> Error {
        self.err_at(self.pos, msg)
    }

    fn err_at(&self, at: usize, msg: &str) -> Error {
        let (line, col) = self.location(at);
        Error::Parse { line, col, msg: msg.to_string() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => self.pos += 1,
                Some(b'%') => self.skip_line(),
                Some(b'/') if self.src.get(self.pos + 1) == Some(&b'/') => self.skip_line(),
                _ => break,
            }
        }
    }

    fn skip_line(&mut self) {
        while let Some(c) = self.peek() {
            self.pos += 1;
            if c == b'\n' {
                break;
            }
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), Error> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{s}`")))
        }
    }

    fn ident(&mut self) -> Option<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        (self.pos > start).then(|| (start, String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()))
    }

    fn problem(&mut self) -> Result<ProblemFile, Error> {
        let mut pf = ProblemFile::default();
        loop {
            self.skip_ws();
            if self.peek().is_none() {
                break;
            }
            let (name, c) = self.statement(pf.clauses.len())?;
            pf.clauses.push((name, c));
        }
        Ok(pf)
    }

    fn statement(&mut self, index: usize) -> Result<(String, Clause), Error> {
        self.skip_ws();
        let save = self.pos;
        if let Some((_, id)) = self.ident() {
            if id == "cnf" && self.eat("(") {
                return self.cnf();
            }
        }
        self.pos = save;
        let c = self.native()?;
        Ok((format!("c{}", index + 1), c))
    }

    fn cnf(&mut self) -> Result<(String, Clause), Error> {
        let (_, name) = self.ident().ok_or_else(|| self.err("expected clause name"))?;
        self.expect(",")?;
        self.ident().ok_or_else(|| self.err("expected role"))?;
        self.expect(",")?;
        let mut vars = self.scope();
        let mut neg = Vec::new();
        let mut pos = Vec::new();
        let parens = self.eat("(");
        if self.eat("$false") {
        } else {
            loop {
                if self.eat("~") {
                    neg.push(self.atom(&mut vars)?);
                } else {
                    pos.push(self.atom(&mut vars)?);
                }
                if !self.eat("|") {
                    break;
                }
            }
        }
        if parens {
            self.expect(")")?;
        }
        self.expect(")")?;
        self.expect(".")?;
        self.close(vars);
        Ok((name, Clause::new(neg, pos)))
    }

    /// Variable table for the next clause.
    fn scope(&mut self) -> BTreeMap<String, Var> {
        if self.rigid {
            std::mem::take(&mut self.shared)
        } else {
            BTreeMap::new()
        }
    }

    fn close(&mut self, vars: BTreeMap<String, Var>) {
        if self.rigid {
            self.shared = vars;
        }
    }

    fn native(&mut self) -> Result<Clause, Error> {
        let mut vars = self.scope();
        let mut left = Vec::new();
        if !self.at_arrow() && !self.at_period() {
            left = self.atom_list(&mut vars)?;
        }
        if self.eat("->") {
            let right = if self.at_period() { Vec::new() } else { self.atom_list(&mut vars)? };
            self.expect(".")?;
            self.close(vars);
            Ok(Clause::new(left, right))
        } else {
            self.expect(".")?;
            self.close(vars);
            Ok(Clause::new(vec![], left))
        }
    }

    fn at_arrow(&mut self) -> bool {
        self.skip_ws();
        self.src[self.pos..].starts_with(b"->")
    }

    fn at_period(&mut self) -> bool {
        self.skip_ws();
        self.peek() == Some(b'.')
    }

    fn atom_list(&mut self, vars: &mut BTreeMap<String, Var>) -> Result<Vec<Atom>, Error> {
        let mut out = vec![self.atom(vars)?];
        while self.eat(",") {
            out.push(self.atom(vars)?);
        }
        Ok(out)
    }

    fn check_symbol(&mut self, at: usize, name: &str, arity: usize, pred: bool) -> Result<(), Error> {
        if !self.internal && is_reserved(name) {
            return Err(self.err_at(at, &format!("reserved symbol `{name}`")));
        }
        let table = if pred { &mut self.preds } else { &mut self.funcs };
        match table.get(name) {
            Some(&a) if a != arity => {
                let kind = if pred { "predicate" } else { "function" };
                Err(self.err_at(at, &format!("{kind} `{name}` used with arity {arity} and {a}")))
            }
            _ => {
                table.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    fn atom(&mut self, vars: &mut BTreeMap<String, Var>) -> Result<Atom, Error> {
        let (at, name) = self.ident().ok_or_else(|| self.err("expected atom"))?;
        let starts_upper = name.starts_with(|c: char| c.is_ascii_uppercase() || c == '_');
        let args = if self.eat("(") { self.args(vars)? } else { Vec::new() };
        if starts_upper && args.is_empty() {
            return Err(self.err_at(at, "variable used as atom"));
        }
        if !name.starts_with(|c: char| c.is_ascii_alphabetic()) {
            return Err(self.err_at(at, "bad predicate name"));
        }
        self.check_symbol(at, &name, args.len(), true)?;
        Ok(Atom { pred: Symbol::new(&name), args })
    }

    fn args(&mut self, vars: &mut BTreeMap<String, Var>) -> Result<Vec<Term>, Error> {
        let mut out = vec![self.term(vars)?];
        loop {
            if self.eat(",") {
                out.push(self.term(vars)?);
            } else if self.eat(")") {
                return Ok(out);
            } else {
                return Err(self.err("expected `,` or `)`"));
            }
        }
    }

    fn term(&mut self, vars: &mut BTreeMap<String, Var>) -> Result<Term, Error> {
        let (at, name) = self.ident().ok_or_else(|| self.err("expected term"))?;
        let upper = name.starts_with(|c: char| c.is_ascii_uppercase() || c == '_');
        self.skip_ws();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let args = self.args(vars)?;
            self.check_symbol(at, &name, args.len(), false)?;
            return Ok(Term::App(Symbol::new(&name), args));
        }
        if upper {
            let n = vars.len() as Var;
            return Ok(Term::Var(*vars.entry(name).or_insert(n)));
        }
        self.check_symbol(at, &name, 0, false)?;
        Ok(Term::App(Symbol::new(&name), vec![]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::variant;

    #[test]
    fn rigid_variables_are_shared() {
        let cs = parse_rigid("-> p(Y, a).\n-> p(Z, b).\np(Y, a), p(Z, b) -> .").unwrap();
        assert_eq!(cs[0].pos[0].args[0], Term::Var(0));
        assert_eq!(cs[1].pos[0].args[0], Term::Var(1));
        assert_eq!(cs[2].vars().len(), 2);
    }

    #[test]
    fn native_implication() {
        let c = parse_clause("s(X) -> p(X, g(X)).").unwrap();
        assert_eq!(c.neg, vec![Atom::new("s", vec![Term::Var(0)])]);
        assert_eq!(
            c.pos,
            vec![Atom::new("p", vec![Term::Var(0), Term::app("g", vec![Term::Var(0)])])]
        );
        let g = parse_clause("p(a) -> .").unwrap();
        assert!(g.pos.is_empty());
        let f = parse_clause("-> p(a).").unwrap();
        assert!(f.neg.is_empty());
    }

    #[test]
    fn tptp_cnf() {
        let pf = parse("cnf(c1, axiom, (~p(Y,a) | ~p(Z,b))).").unwrap();
        let c = &pf.clauses[0].1;
        assert_eq!(pf.clauses[0].0, "c1");
        assert_eq!(c.neg.len(), 2);
        assert!(c.pos.is_empty());
        let d = parse("cnf(c2, axiom, p(X, Y)).").unwrap();
        assert_eq!(d.clauses[0].1.pos.len(), 1);
    }

    #[test]
    fn syntax_error_location() {
        let e = parse("p(X X).").unwrap_err();
        match e {
            Error::Parse { line, col, .. } => assert_eq!((line, col), (1, 5)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn arity_clash_and_reserved() {
        assert!(matches!(parse("p(a). p(a, b)."), Err(Error::Parse { .. })));
        assert!(matches!(parse("-> f_p(a)."), Err(Error::Parse { .. })));
        assert!(matches!(parse("-> T(a)."), Err(Error::Parse { .. })));
        assert!(parse_internal("-> T(f_p(a)).").is_ok());
    }

    #[test]
    fn tptp_round_trip() {
        let src = "s(X) -> p(X, g(X)).\n-> s(a).\np(a, g(b)) -> .\ncnf(n, axiom, (~q(X) | r(X, Y) | r(Y, X))).";
        let pf = parse(src).unwrap();
        let again = parse(&pf.to_tptp()).unwrap();
        assert_eq!(pf.clauses.len(), again.clauses.len());
        for ((n1, c1), (n2, c2)) in pf.clauses.iter().zip(&again.clauses) {
            assert_eq!(n1, n2);
            assert!(variant(c1, c2), "{c1} vs {c2}");
        }
    }

    #[test]
    fn math_rendering() {
        let c = parse_clause("s(X), r(Y) -> t(f_p(X, Y)).").unwrap();
        assert_eq!(math_clause(&c), "R(x1), S(x0) -> T(f_p(x0,x1))");
    }
}
