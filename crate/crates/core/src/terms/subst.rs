use std::collections::BTreeMap;
use std::fmt;

use super::{Atom, Clause, Term, Var};

/// Finite map from variables to terms. Bindings produced by [`mgu`] are
/// idempotent: no bound variable occurs in the range.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Subst(BTreeMap<Var, Term>);

impl Subst {
    pub fn new() -> Self {
        Subst(BTreeMap::new())
    }

    pub fn single(v: Var, t: Term) -> Self {
        let mut s = Subst::new();
        s.bind(v, t);
        s
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.0.get(&v)
    }

    pub fn bind(&mut self, v: Var, t: Term) {
        if t == Term::Var(v) {
            self.0.remove(&v);
        } else {
            self.0.insert(v, t);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.keys().copied()
    }

    /// `self` followed by `then`: `t.apply(&s.compose(&u)) == t.apply(&s).apply(&u)`.
    pub fn compose(&self, then: &Subst) -> Subst {
        let mut out = Subst::new();
        for (v, t) in &self.0 {
            out.bind(*v, t.apply(then));
        }
        for (v, t) in &then.0 {
            if !self.0.contains_key(v) {
                out.bind(*v, t.clone());
            }
        }
        out
    }

    pub fn restrict(&self, keep: impl Fn(Var) -> bool) -> Subst {
        Subst(self.0.iter().filter(|(v, _)| keep(**v)).map(|(v, t)| (*v, t.clone())).collect())
    }

    /// Maps variables injectively onto variables.
    pub fn is_renaming(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.0.values().all(|t| matches!(t, Term::Var(w) if seen.insert(*w)))
    }

    /// Every range term is linear and no variable is shared between range
    /// terms.
    pub fn is_linear(&self) -> bool {
        let mut all = Vec::new();
        self.0.values().for_each(|t| t.collect_vars(&mut all));
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        all.len() == n
    }

    /// Fully resolves triangular bindings so that the result is idempotent.
    fn resolved(&self) -> Subst {
        let mut out = Subst::new();
        for v in self.0.keys() {
            out.bind(*v, walk_deep(&Term::Var(*v), self));
        }
        out
    }
}

impl FromIterator<(Var, Term)> for Subst {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        let mut s = Subst::new();
        for (v, t) in iter {
            s.bind(v, t);
        }
        s
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "X{v}->{t}")?;
        }
        f.write_str("}")
    }
}

fn walk<'a>(t: &'a Term, s: &'a Subst) -> &'a Term {
    let mut t = t;
    while let Term::Var(v) = t {
        match s.0.get(v) {
            Some(b) => t = b,
            None => break,
        }
    }
    t
}

fn walk_deep(t: &Term, s: &Subst) -> Term {
    match walk(t, s) {
        Term::Var(v) => Term::Var(*v),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| walk_deep(a, s)).collect()),
    }
}

fn occurs_in(v: Var, t: &Term, s: &Subst) -> bool {
    match walk(t, s) {
        Term::Var(w) => *w == v,
        Term::App(_, args) => args.iter().any(|a| occurs_in(v, a, s)),
    }
}

/// Extends the triangular substitution `s` to unify `a` and `b`.
fn unify_into(a: &Term, b: &Term, s: &mut Subst) -> bool {
    let mut stack = vec![(a.clone(), b.clone())];
    while let Some((x, y)) = stack.pop() {
        let x = walk(&x, s).clone();
        let y = walk(&y, s).clone();
        match (&x, &y) {
            (Term::Var(v), Term::Var(w)) if v == w => {}
            (Term::Var(v), t) | (t, Term::Var(v)) => {
                if occurs_in(*v, t, s) {
                    return false;
                }
                s.0.insert(*v, t.clone());
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return false;
                }
                stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            }
        }
    }
    true
}

/// Most general unifier with occurs check.
pub fn mgu(a: &Term, b: &Term) -> Option<Subst> {
    let mut s = Subst::new();
    unify_into(a, b, &mut s).then(|| s.resolved())
}

pub fn mgu_atoms(a: &Atom, b: &Atom) -> Option<Subst> {
    if a.pred != b.pred || a.args.len() != b.args.len() {
        return None;
    }
    unify_pairs(a.args.iter().zip(b.args.iter()))
}

/// Simultaneous unifier of all pairs.
pub fn unify_pairs<'a>(pairs: impl IntoIterator<Item = (&'a Term, &'a Term)>) -> Option<Subst> {
    let mut s = Subst::new();
    for (x, y) in pairs {
        if !unify_into(x, y, &mut s) {
            return None;
        }
    }
    Some(s.resolved())
}

/// One-way matching: extends `s` so that `pattern.apply(s) == target`.
/// Variables of `target` are treated as constants.
pub fn match_term(pattern: &Term, target: &Term, s: &mut Subst) -> bool {
    match pattern {
        Term::Var(v) => match s.0.get(v) {
            Some(b) => b == target,
            None => {
                s.0.insert(*v, target.clone());
                true
            }
        },
        Term::App(f, xs) => match target {
            Term::App(g, ys) if f == g && xs.len() == ys.len() => {
                xs.iter().zip(ys).all(|(x, y)| match_term(x, y, s))
            }
            _ => false,
        },
    }
}

pub fn match_atom(pattern: &Atom, target: &Atom, s: &mut Subst) -> bool {
    pattern.pred == target.pred
        && pattern.args.len() == target.args.len()
        && pattern.args.iter().zip(&target.args).all(|(x, y)| match_term(x, y, s))
}

/// Multiset matching of `general` onto `candidate`: some σ with
/// `general·σ == candidate` literal for literal.
pub fn match_instance(general: &Clause, candidate: &Clause) -> Option<Subst> {
    match_instances_from(general, candidate, &Subst::new(), 1).pop()
}

/// Up to `limit` distinct matchers of `general` onto `candidate` that extend
/// `init`.
pub fn match_instances_from(general: &Clause, candidate: &Clause, init: &Subst, limit: usize) -> Vec<Subst> {
    if general.neg.len() != candidate.neg.len() || general.pos.len() != candidate.pos.len() {
        return vec![];
    }
    let gl: Vec<(bool, &Atom)> =
        general.neg.iter().map(|a| (false, a)).chain(general.pos.iter().map(|a| (true, a))).collect();
    let cl: Vec<(bool, &Atom)> =
        candidate.neg.iter().map(|a| (false, a)).chain(candidate.pos.iter().map(|a| (true, a))).collect();
    let mut used = vec![false; cl.len()];
    let mut out = Vec::new();
    search(&gl, &cl, 0, &mut used, init.clone(), true, limit, &mut out);
    out
}

/// Matching modulo duplicate literals: `set(general·σ) == set(candidate)`.
pub fn match_instance_modulo_dups(general: &Clause, candidate: &Clause) -> Option<Subst> {
    let gl: Vec<(bool, &Atom)> =
        general.neg.iter().map(|a| (false, a)).chain(general.pos.iter().map(|a| (true, a))).collect();
    let mut cands: Vec<(bool, &Atom)> =
        candidate.neg.iter().map(|a| (false, a)).chain(candidate.pos.iter().map(|a| (true, a))).collect();
    cands.dedup();
    let mut used = vec![false; cands.len()];
    let mut out = Vec::new();
    search(&gl, &cands, 0, &mut used, Subst::new(), false, 1, &mut out);
    out.pop()
}

fn search(
    gl: &[(bool, &Atom)],
    cl: &[(bool, &Atom)],
    i: usize,
    used: &mut Vec<bool>,
    s: Subst,
    injective: bool,
    limit: usize,
    out: &mut Vec<Subst>,
) {
    if out.len() >= limit {
        return;
    }
    if i == gl.len() {
        if used.iter().all(|u| *u) && !out.contains(&s) {
            out.push(s);
        }
        return;
    }
    let (sign, atom) = gl[i];
    for j in 0..cl.len() {
        if cl[j].0 != sign || (injective && used[j]) {
            continue;
        }
        let mut s2 = s.clone();
        if match_atom(atom, cl[j].1, &mut s2) {
            let was = used[j];
            used[j] = true;
            search(gl, cl, i + 1, used, s2, injective, limit, out);
            used[j] = was;
            if out.len() >= limit {
                return;
            }
        }
    }
}

/// True when both clauses are equal up to a bijective variable renaming.
pub fn variant(a: &Clause, b: &Clause) -> bool {
    match match_instance(a, b) {
        Some(s) => s.is_renaming() && a.vars().len() == b.vars().len(),
        None => false,
    }
}

/// `s` and `t` unify once renamed apart.
pub fn have_common_instances(s: &Term, t: &Term) -> bool {
    let off = s.max_var().map_or(0, |v| v + 1);
    let t2 = t.rename(&|v| v + off);
    mgu(s, &t2).is_some()
}
