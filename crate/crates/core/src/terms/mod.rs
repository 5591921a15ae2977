//! Terms, atoms and clauses, together with positions, substitutions,
//! unification and matching.
//!
//! Variables are plain numbers scoped to the clause (or conflicting core)
//! that holds them. Nothing here renames apart implicitly: callers that
//! combine clauses must call [`Clause::rename_apart`] or offset variables
//! themselves.

mod signature;
mod subst;

pub use signature::{tuples, Signature};
pub use subst::{
    have_common_instances, match_atom, match_instance, match_instance_modulo_dups, match_instances_from, match_term,
    mgu, mgu_atoms, unify_pairs, variant, Subst,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::Error;

/// Interned-ish symbol name shared between terms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

pub type Var = u32;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Var(Var),
    App(Symbol, Vec<Term>),
}

/// Argument path addressing a subterm. For atoms the first index selects
/// the atom argument.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Position {
    fn from(v: Vec<usize>) -> Self {
        Position(v)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        let parts: Vec<String> = self.0.iter().map(|i| (i + 1).to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

impl Term {
    pub fn var(v: Var) -> Self {
        Term::Var(v)
    }

    pub fn app(f: &str, args: Vec<Term>) -> Self {
        Term::App(Symbol::new(f), args)
    }

    pub fn constant(c: &str) -> Self {
        Term::App(Symbol::new(c), Vec::new())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(|a| a.depth() + 1).max().unwrap_or(0),
        }
    }

    /// Number of symbol and variable occurrences.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn head(&self) -> Option<&Symbol> {
        match self {
            Term::App(f, _) => Some(f),
            Term::Var(_) => None,
        }
    }

    /// Pushes every variable occurrence, left to right.
    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => out.push(*v),
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut v = Vec::new();
        self.collect_vars(&mut v);
        v.into_iter().collect()
    }

    pub fn occurs(&self, v: Var) -> bool {
        match self {
            Term::Var(w) => *w == v,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    pub fn max_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            Term::App(_, args) => args.iter().filter_map(Term::max_var).max(),
        }
    }

    /// No variable occurs twice.
    pub fn is_linear(&self) -> bool {
        let mut v = Vec::new();
        self.collect_vars(&mut v);
        let n = v.len();
        v.sort_unstable();
        v.dedup();
        v.len() == n
    }

    pub fn subterm_at(&self, pos: &[usize]) -> Option<&Term> {
        match pos.split_first() {
            None => Some(self),
            Some((i, rest)) => match self {
                Term::App(_, args) => args.get(*i)?.subterm_at(rest),
                Term::Var(_) => None,
            },
        }
    }

    pub fn replace_at(&self, pos: &[usize], by: Term) -> Result<Term, Error> {
        match pos.split_first() {
            None => Ok(by),
            Some((i, rest)) => match self {
                Term::App(f, args) if *i < args.len() => {
                    let mut args = args.clone();
                    args[*i] = args[*i].replace_at(rest, by)?;
                    Ok(Term::App(f.clone(), args))
                }
                _ => Err(Error::InvalidPosition(format!("{pos:?} in {self}"))),
            },
        }
    }

    /// Positions (relative to this term) of every occurrence of `v`.
    pub fn positions_of(&self, v: Var) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        fn walk(t: &Term, v: Var, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            match t {
                Term::Var(w) if *w == v => out.push(path.clone()),
                Term::Var(_) => {}
                Term::App(_, args) => {
                    for (i, a) in args.iter().enumerate() {
                        path.push(i);
                        walk(a, v, path, out);
                        path.pop();
                    }
                }
            }
        }
        walk(self, v, &mut Vec::new(), &mut out);
        out
    }

    pub fn apply(&self, s: &Subst) -> Term {
        match self {
            Term::Var(v) => s.get(*v).cloned().unwrap_or(Term::Var(*v)),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.apply(s)).collect()),
        }
    }

    pub fn rename(&self, map: &dyn Fn(Var) -> Var) -> Term {
        match self {
            Term::Var(v) => Term::Var(map(*v)),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.rename(map)).collect()),
        }
    }

    pub fn collect_symbols(&self, out: &mut BTreeMap<Symbol, usize>) {
        if let Term::App(f, args) = self {
            out.insert(f.clone(), args.len());
            args.iter().for_each(|a| a.collect_symbols(out));
        }
    }
}

/// Replaces every variable occurrence by a distinct fresh variable taken
/// from `next`.
pub fn skeleton(t: &Term, next: &mut Var) -> Term {
    match t {
        Term::Var(_) => {
            let v = *next;
            *next += 1;
            Term::Var(v)
        }
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| skeleton(a, next)).collect()),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "X{v}"),
            Term::App(s, args) if args.is_empty() => write!(f, "{s}"),
            Term::App(s, args) => {
                write!(f, "{s}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Atom {
    pub pred: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Self {
        Atom { pred: Symbol::new(pred), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_monadic(&self) -> bool {
        self.args.len() <= 1
    }

    pub fn is_shallow(&self) -> bool {
        self.args.iter().all(|a| a.depth() <= 1)
    }

    pub fn is_linear(&self) -> bool {
        let mut v = Vec::new();
        self.collect_vars(&mut v);
        let n = v.len();
        v.sort_unstable();
        v.dedup();
        v.len() == n
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    /// Maximal argument depth.
    pub fn depth(&self) -> usize {
        self.args.iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Term::size).sum::<usize>()
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        self.args.iter().for_each(|a| a.collect_vars(out));
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut v = Vec::new();
        self.collect_vars(&mut v);
        v.into_iter().collect()
    }

    pub fn max_var(&self) -> Option<Var> {
        self.args.iter().filter_map(Term::max_var).max()
    }

    pub fn subterm_at(&self, pos: &[usize]) -> Option<&Term> {
        let (i, rest) = pos.split_first()?;
        self.args.get(*i)?.subterm_at(rest)
    }

    pub fn replace_at(&self, pos: &[usize], by: Term) -> Result<Atom, Error> {
        let Some((i, rest)) = pos.split_first() else {
            return Err(Error::InvalidPosition(format!("root of atom {self}")));
        };
        if *i >= self.args.len() {
            return Err(Error::InvalidPosition(format!("{pos:?} in {self}")));
        }
        let mut args = self.args.clone();
        args[*i] = args[*i].replace_at(rest, by)?;
        Ok(Atom { pred: self.pred.clone(), args })
    }

    pub fn positions_of(&self, v: Var) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for (i, a) in self.args.iter().enumerate() {
            for mut p in a.positions_of(v) {
                p.insert(0, i);
                out.push(p);
            }
        }
        out
    }

    pub fn apply(&self, s: &Subst) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(|a| a.apply(s)).collect() }
    }

    pub fn rename(&self, map: &dyn Fn(Var) -> Var) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(|a| a.rename(map)).collect() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// A clause `Γ -> Δ`: `neg` holds the atoms of the negative literals and
/// `pos` those of the positive ones. Both sides are kept sorted, so derived
/// equality is multiset equality. Duplicate literals are preserved.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Clause {
    pub neg: Vec<Atom>,
    pub pos: Vec<Atom>,
}

/// Selects one literal of a clause.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum LitRef {
    Neg(usize),
    Pos(usize),
}

impl Clause {
    pub fn new(mut neg: Vec<Atom>, mut pos: Vec<Atom>) -> Self {
        neg.sort();
        pos.sort();
        Clause { neg, pos }
    }

    pub fn fact(a: Atom) -> Self {
        Clause::new(vec![], vec![a])
    }

    pub fn goal(neg: Vec<Atom>) -> Self {
        Clause::new(neg, vec![])
    }

    pub fn empty() -> Self {
        Clause::default()
    }

    pub fn is_empty(&self) -> bool {
        self.neg.is_empty() && self.pos.is_empty()
    }

    pub fn len(&self) -> usize {
        self.neg.len() + self.pos.len()
    }

    pub fn is_horn(&self) -> bool {
        self.pos.len() <= 1
    }

    pub fn is_monadic(&self) -> bool {
        self.atoms().all(Atom::is_monadic)
    }

    /// Positive atoms only: negative literals may be arbitrarily deep.
    pub fn is_shallow(&self) -> bool {
        self.pos.iter().all(Atom::is_shallow)
    }

    /// No variable occurs twice across the positive atoms.
    pub fn is_linear(&self) -> bool {
        let mut v = Vec::new();
        self.pos.iter().for_each(|a| a.collect_vars(&mut v));
        let n = v.len();
        v.sort_unstable();
        v.dedup();
        v.len() == n
    }

    pub fn is_ground(&self) -> bool {
        self.atoms().all(Atom::is_ground)
    }

    pub fn is_tautology(&self) -> bool {
        self.neg.iter().any(|a| self.pos.contains(a))
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.neg.iter().chain(self.pos.iter())
    }

    pub fn literal(&self, l: LitRef) -> &Atom {
        match l {
            LitRef::Neg(i) => &self.neg[i],
            LitRef::Pos(i) => &self.pos[i],
        }
    }

    pub fn depth(&self) -> usize {
        self.atoms().map(Atom::depth).max().unwrap_or(0)
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        self.atoms().for_each(|a| a.collect_vars(out));
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut v = Vec::new();
        self.collect_vars(&mut v);
        v.into_iter().collect()
    }

    pub fn max_var(&self) -> Option<Var> {
        self.atoms().filter_map(Atom::max_var).max()
    }

    pub fn next_var(&self) -> Var {
        self.max_var().map_or(0, |v| v + 1)
    }

    pub fn apply(&self, s: &Subst) -> Clause {
        Clause::new(
            self.neg.iter().map(|a| a.apply(s)).collect(),
            self.pos.iter().map(|a| a.apply(s)).collect(),
        )
    }

    pub fn rename(&self, map: &dyn Fn(Var) -> Var) -> Clause {
        Clause::new(
            self.neg.iter().map(|a| a.rename(map)).collect(),
            self.pos.iter().map(|a| a.rename(map)).collect(),
        )
    }

    /// Shifts every variable by `offset`.
    pub fn rename_apart(&self, offset: Var) -> Clause {
        self.rename(&|v| v + offset)
    }

    /// Renames variables to `0, 1, ...` in order of first occurrence and
    /// returns the renaming used.
    pub fn normalized(&self) -> (Clause, Subst) {
        let mut seen = Vec::new();
        self.collect_vars(&mut seen);
        let mut map = BTreeMap::new();
        for v in seen {
            let n = map.len() as Var;
            map.entry(v).or_insert(n);
        }
        let s = Subst::from_iter(map.iter().map(|(v, n)| (*v, Term::Var(*n))));
        (self.apply(&s), s)
    }

    /// Order-independent variant key: variables renamed by first occurrence
    /// after sorting under a variable-blind key. Equal keys imply variants in
    /// the common case; use [`variant`] for an exact check.
    pub fn variant_key(&self) -> String {
        fn blind(t: &Term, out: &mut String) {
            match t {
                Term::Var(_) => out.push('_'),
                Term::App(f, args) => {
                    out.push_str(f.as_str());
                    if !args.is_empty() {
                        out.push('(');
                        for a in args {
                            blind(a, out);
                            out.push(',');
                        }
                        out.push(')');
                    }
                }
            }
        }
        let key = |a: &Atom| {
            let mut s = a.pred.to_string();
            a.args.iter().for_each(|t| {
                s.push('|');
                blind(t, &mut s)
            });
            s
        };
        let mut neg: Vec<&Atom> = self.neg.iter().collect();
        let mut pos: Vec<&Atom> = self.pos.iter().collect();
        neg.sort_by_cached_key(|a| key(a));
        pos.sort_by_cached_key(|a| key(a));
        let mut map: BTreeMap<Var, usize> = BTreeMap::new();
        let mut out = String::new();
        let mut emit = |a: &Atom, out: &mut String| {
            let mut vs = Vec::new();
            a.collect_vars(&mut vs);
            out.push_str(&key(a));
            out.push('[');
            for v in vs {
                let n = map.len();
                let id = *map.entry(v).or_insert(n);
                out.push_str(&id.to_string());
                out.push(',');
            }
            out.push(']');
        };
        for a in neg {
            emit(a, &mut out);
        }
        out.push_str("->");
        for a in pos {
            emit(a, &mut out);
        }
        out
    }

    pub fn collect_symbols(
        &self,
        funcs: &mut BTreeMap<Symbol, usize>,
        preds: &mut BTreeMap<Symbol, usize>,
    ) {
        for a in self.atoms() {
            preds.insert(a.pred.clone(), a.arity());
            a.args.iter().for_each(|t| t.collect_symbols(funcs));
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |atoms: &[Atom]| atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ");
        if self.neg.is_empty() {
            write!(f, "-> {}", side(&self.pos))
        } else if self.pos.is_empty() {
            write!(f, "{} ->", side(&self.neg))
        } else {
            write!(f, "{} -> {}", side(&self.neg), side(&self.pos))
        }
    }
}

/// Structural flags of a clause set.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Classification {
    pub monadic: bool,
    pub shallow: bool,
    pub linear: bool,
    pub horn: bool,
}

impl Classification {
    pub fn is_mslh(&self) -> bool {
        self.monadic && self.shallow && self.linear && self.horn
    }
}

pub fn classify<'a>(clauses: impl IntoIterator<Item = &'a Clause>) -> Classification {
    let mut c = Classification { monadic: true, shallow: true, linear: true, horn: true };
    for cl in clauses {
        c.monadic &= cl.is_monadic();
        c.shallow &= cl.is_shallow();
        c.linear &= cl.is_linear();
        c.horn &= cl.is_horn();
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_clause, parse_term};

    #[test]
    fn depth_of_terms() {
        assert_eq!(parse_term("X").unwrap().depth(), 0);
        assert_eq!(parse_term("a").unwrap().depth(), 0);
        assert_eq!(parse_term("f(X, g(a))").unwrap().depth(), 2);
    }

    #[test]
    fn skeleton_examples() {
        let mut next = 10;
        assert_eq!(skeleton(&Term::Var(0), &mut next), Term::Var(10));
        let t = parse_term("f(X, g(X))").unwrap();
        let s = skeleton(&t, &mut next);
        assert_eq!(s, Term::app("f", vec![Term::Var(11), Term::app("g", vec![Term::Var(12)])]));
        assert!(s.is_linear());
        assert!(match_term(&s, &t, &mut Subst::new()));
        let a = Term::constant("a");
        assert_eq!(skeleton(&a, &mut next), a);
    }

    #[test]
    fn replace_and_subterm() {
        let p = parse_clause("-> p(X, g(X)).").unwrap().pos[0].clone();
        let r = p.replace_at(&[1], Term::Var(7)).unwrap();
        assert_eq!(r, Atom::new("p", vec![Term::Var(0), Term::Var(7)]));
        let t = parse_term("g(X)").unwrap();
        assert_eq!(t.replace_at(&[], Term::Var(3)).unwrap(), Term::Var(3));
        let r = parse_clause("-> r(X, f(Y)).").unwrap().pos[0].clone();
        assert_eq!(r.subterm_at(&[1]).unwrap(), &parse_term("f(Y)").unwrap().rename(&|_| 1));
        assert!(r.replace_at(&[2], Term::Var(0)).is_err());
        assert!(r.replace_at(&[0, 0], Term::Var(0)).is_err());
    }

    #[test]
    fn classify_examples() {
        let mslh = [
            "s(X), r(Y) -> t(fp(X, Y)).",
            "s(X) -> r(g(X)).",
            "-> s(a).",
            "-> s(b).",
            "-> s(g(X)).",
            "t(fp(a, g(b))) ->.",
            "t(fp(g(X), g(g(X)))) ->.",
        ];
        let set: Vec<Clause> = mslh.iter().map(|s| parse_clause(s).unwrap()).collect();
        assert!(classify(&set).is_mslh());

        let nl = parse_clause("s(X) -> p(X, g(X)).").unwrap();
        assert!(!classify([&nl]).linear);

        let nh = parse_clause("q(X) -> p(X), r(X).").unwrap();
        assert!(!classify([&nh]).horn);
    }

    #[test]
    fn classification_is_invariant_under_renaming() {
        let c = parse_clause("s(X), q(Y) -> p(f(X, Y)).").unwrap();
        let r = c.rename(&|v| v * 3 + 5);
        assert_eq!(classify([&c]), classify([&r]));
    }

    #[test]
    fn clause_equality_is_multiset() {
        let a = parse_clause("p(a), q(b) -> r(a).").unwrap();
        let b = parse_clause("q(b), p(a) -> r(a).").unwrap();
        assert_eq!(a, b);
        let dup = parse_clause("-> p(a), p(a).").unwrap();
        assert_eq!(dup.pos.len(), 2);
    }
}
