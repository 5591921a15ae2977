//! Instantiation refinement of the original clause set after a failed
//! lifting step.

use std::fmt;

use crate::approximation::{ApproxTrace, StepKind};
use crate::clause_set::{ClauseId, ClauseSet};
use crate::error::{Error, Result};
use crate::lifting::FailWitness;
use crate::syntax::math_clause;
use crate::terms::{have_common_instances, Clause, Signature, Subst, Symbol, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementAction {
    pub target: ClauseId,
    pub target_clause: Clause,
    pub replacements: Vec<Clause>,
    pub witness: FailWitness,
    pub note: String,
}

impl RefinementAction {
    pub fn apply(&self, n: &ClauseSet) -> ClauseSet {
        let mut out = n.clone();
        out.remove(self.target);
        for c in &self.replacements {
            out.push(c.clone());
        }
        out
    }
}

impl fmt::Display for RefinementAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let reps: Vec<String> = self.replacements.iter().map(math_clause).collect();
        write!(f, "replace {} by {{{}}}", math_clause(&self.target_clause), reps.join("; "))?;
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        Ok(())
    }
}

/// Function symbols available for case splits, with a constant guaranteed.
pub fn split_signature(n: &ClauseSet, extra: &Signature) -> Signature {
    let mut sig = n.signature();
    sig.merge(extra);
    sig.ensure_constant();
    sig
}

fn fresh_app(f: &Symbol, arity: usize, next: &mut Var) -> Term {
    let args = (0..arity)
        .map(|_| {
            *next += 1;
            Term::Var(*next - 1)
        })
        .collect();
    Term::App(f.clone(), args)
}

fn normalize(c: Clause) -> Clause {
    c.normalized().0
}

/// Partitions the instances of `c` by the top symbol at variable `x`,
/// descending into arguments while `t1` and `t2` share their top symbol.
fn split_var(c: &Clause, x: Var, t1: &Term, t2: &Term, sig: &Signature, out: &mut Vec<Clause>) -> Result<()> {
    let (Term::App(h1, a1), Term::App(h2, a2)) = (t1, t2) else {
        return Err(Error::Precondition(format!("cannot separate {t1} and {t2} by instantiation")));
    };
    let mut next = c.next_var();
    for (f, arity) in &sig.functions {
        let t = fresh_app(f, *arity, &mut next);
        let inst = c.apply(&Subst::single(x, t.clone()));
        if f == h1 && f == h2 && a1.len() == *arity && a2.len() == *arity {
            let args = match &t {
                Term::App(_, xs) => xs.clone(),
                Term::Var(_) => unreachable!(),
            };
            let i = (0..*arity)
                .find(|i| !have_common_instances(&a1[*i], &a2[*i]))
                .or_else(|| (0..*arity).find(|i| a1[*i] != a2[*i]))
                .ok_or_else(|| Error::Precondition(format!("{t1} and {t2} coincide")))?;
            let Term::Var(xi) = args[i] else { unreachable!() };
            split_var(&inst, xi, &a1[i], &a2[i], sig, out)?;
        } else {
            out.push(inst);
        }
    }
    Ok(())
}

/// Instances of `c` covering all its ground instances, none of which has
/// both `c·s1` and `c·s2` as instances.
pub fn specific_instances(c: &Clause, s1: &Subst, s2: &Subst, sig: &Signature) -> Result<Vec<Clause>> {
    let (c1, c2) = (c.apply(s1), c.apply(s2));
    let off = c1.next_var().max(c.next_var());
    let c2r = c2.rename(&|v| v + off);
    if clauses_unify(&c1, &c2r) {
        return Err(Error::Precondition(format!("{c1} and {c2} have common instances")));
    }
    let img = |s: &Subst, v: Var| s.get(v).cloned().unwrap_or(Term::Var(v));
    let vars: Vec<Var> = c.vars().into_iter().collect();
    let x = vars
        .iter()
        .copied()
        .find(|v| !have_common_instances(&img(s1, *v), &img(s2, *v)))
        .or_else(|| vars.iter().copied().find(|v| !img(s1, *v).is_var() && !img(s2, *v).is_var() && img(s1, *v) != img(s2, *v)))
        .ok_or_else(|| Error::Precondition("no variable separates the two instantiations".into()))?;
    let mut out = Vec::new();
    split_var(c, x, &img(s1, x), &img(s2, x), sig, &mut out)?;
    Ok(out.into_iter().map(normalize).collect())
}

/// Both clauses have a common instance under one unifier of corresponding
/// literals (literal order as stored).
fn clauses_unify(a: &Clause, b: &Clause) -> bool {
    if a.neg.len() != b.neg.len() || a.pos.len() != b.pos.len() {
        return false;
    }
    let pairs: Vec<(&crate::terms::Atom, &crate::terms::Atom)> = a.neg.iter().zip(&b.neg).chain(a.pos.iter().zip(&b.pos)).collect();
    if pairs.iter().any(|(x, y)| x.pred != y.pred) {
        return false;
    }
    crate::terms::unify_pairs(pairs.iter().flat_map(|(x, y)| x.args.iter().zip(&y.args))).is_some()
}

/// Complement of the linear term `t` among instances of a fresh variable.
fn complement(t: &Term, sig: &Signature, next: &mut Var) -> Vec<Term> {
    let Term::App(h, args) = t else { return vec![] };
    let mut out = Vec::new();
    for (f, arity) in &sig.functions {
        if f != h || *arity != args.len() {
            out.push(fresh_app(f, *arity, next));
        }
    }
    for i in 0..args.len() {
        for r in complement(&args[i], sig, next) {
            let mut xs: Vec<Term> = args[..i].to_vec();
            xs.push(r);
            for _ in i + 1..args.len() {
                *next += 1;
                xs.push(Term::Var(*next - 1));
            }
            out.push(Term::App(h.clone(), xs));
        }
    }
    out
}

/// `c·σ` followed by pairwise disjoint instances of `c` that cover every
/// other ground instance. `σ` must be linear.
pub fn specific_instances_single(c: &Clause, sigma: &Subst, sig: &Signature) -> Result<Vec<Clause>> {
    let sigma = sigma.restrict(|v| c.vars().contains(&v));
    if !sigma.is_linear() {
        return Err(Error::Precondition(format!("{sigma} is not linear")));
    }
    let off = c.next_var().max(sigma.iter().filter_map(|(_, t)| t.max_var()).max().map_or(0, |v| v + 1));
    let shift: Subst = sigma.iter().map(|(v, t)| (*v, t.rename(&|w| w + off))).collect();
    let mut next = off * 2 + c.next_var() + 1;
    let mut out = vec![c.apply(&sigma)];
    let dom: Vec<Var> = c.vars().into_iter().filter(|v| shift.get(*v).is_some()).collect();
    for (k, x) in dom.iter().enumerate() {
        let fixed: Subst = dom[..k].iter().map(|v| (*v, shift.get(*v).cloned().expect("bound"))).collect();
        for r in complement(shift.get(*x).expect("bound"), sig, &mut next) {
            let mut s = fixed.clone();
            s.bind(*x, r);
            out.push(c.apply(&s));
        }
    }
    Ok(out.into_iter().map(normalize).collect())
}

fn root_clause(n: &ClauseSet, trace: &ApproxTrace, step: usize) -> Result<(ClauseId, Clause)> {
    let s = trace.steps.get(step).ok_or_else(|| Error::Precondition(format!("no step {step}")))?;
    let id = trace.root_of(s.ancestor);
    let c = n.get(id).cloned().ok_or_else(|| Error::Precondition(format!("clause {id} is not in the set")))?;
    Ok((id, c))
}

pub fn refine_linear(n: &ClauseSet, trace: &ApproxTrace, step: usize, w: &FailWitness, sig: &Signature) -> Result<RefinementAction> {
    let FailWitness::Linear { sigma, var, fresh, .. } = w else {
        return Err(Error::Precondition("not a linear witness".into()));
    };
    let img = |v: Var| sigma.get(v).cloned().unwrap_or(Term::Var(v));
    let (a, b) = (img(*var), img(*fresh));
    if have_common_instances(&a, &b) {
        return Err(Error::RedirectToInstantiation(format!("{a} and {b} have common instances")));
    }
    let (id, c) = root_clause(n, trace, step)?;
    if !c.vars().contains(var) {
        return Err(Error::Precondition(format!("x{var} does not occur in {c}")));
    }
    let reps = specific_instances(&c, &Subst::single(*var, a), &Subst::single(*var, b), sig)?;
    Ok(RefinementAction { target: id, target_clause: c, replacements: reps, witness: w.clone(), note: String::new() })
}

pub fn refine_shallow(n: &ClauseSet, trace: &ApproxTrace, step: usize, w: &FailWitness, sig: &Signature) -> Result<RefinementAction> {
    let FailWitness::Shallow { sigma_left, sigma_right, var, .. } = w else {
        return Err(Error::Precondition("not a shallow witness".into()));
    };
    let img = |s: &Subst| s.get(*var).cloned().unwrap_or(Term::Var(*var));
    let (a, b) = (img(sigma_left), img(sigma_right));
    if have_common_instances(&a, &b) {
        return Err(Error::RedirectToInstantiation(format!("{a} and {b} have common instances")));
    }
    let (id, c) = root_clause(n, trace, step)?;
    if !c.vars().contains(var) {
        return Err(Error::Precondition(format!("x{var} does not occur in {c}")));
    }
    let reps = specific_instances(&c, &Subst::single(*var, a), &Subst::single(*var, b), sig)?;
    Ok(RefinementAction { target: id, target_clause: c, replacements: reps, witness: w.clone(), note: String::new() })
}

pub fn refine_horn(n: &ClauseSet, trace: &ApproxTrace, step: usize, w: &FailWitness, sig: &Signature) -> Result<RefinementAction> {
    let FailWitness::Horn { sigma, .. } = w else {
        return Err(Error::Precondition("not a horn witness".into()));
    };
    let (id, c) = root_clause(n, trace, step)?;
    let mut s = sigma.restrict(|v| c.vars().contains(&v));
    let mut note = String::new();
    if !s.is_linear() {
        let k = sig.constants().next().cloned().expect("signature has a constant");
        let ground: Subst =
            s.iter().flat_map(|(_, t)| t.vars()).map(|v| (v, Term::constant(k.as_str()))).collect();
        s = s.iter().map(|(v, t)| (*v, t.apply(&ground))).collect();
        note = "instantiation grounded to obtain a linear substitution".into();
    }
    let reps = specific_instances_single(&c, &s, sig)?;
    Ok(RefinementAction { target: id, target_clause: c, replacements: reps, witness: w.clone(), note })
}

/// Dispatches on the witness kind.
pub fn refine(n: &ClauseSet, trace: &ApproxTrace, step: usize, w: &FailWitness, sig: &Signature) -> Result<RefinementAction> {
    match (&trace.steps.get(step).map(|s| &s.kind), w) {
        (Some(StepKind::Linear { .. }), FailWitness::Linear { .. }) => refine_linear(n, trace, step, w, sig),
        (Some(StepKind::Shallow { .. }), FailWitness::Shallow { .. }) => refine_shallow(n, trace, step, w, sig),
        (Some(StepKind::Horn { .. }), FailWitness::Horn { .. }) => refine_horn(n, trace, step, w, sig),
        _ => Err(Error::Precondition(format!("witness does not fit step {step}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_clause, parse_clauses};
    use crate::terms::{match_instance, variant};

    fn sig(src: &str) -> Signature {
        let mut s = Signature::default();
        for item in src.split(',') {
            let (f, a) = item.trim().split_once('/').unwrap();
            s.add_function(f, a.parse().unwrap());
        }
        s
    }

    fn same(got: &[Clause], want: &str) {
        let want = parse_clauses(want).unwrap();
        assert_eq!(got.len(), want.len(), "{got:?}");
        for w in &want {
            assert!(got.iter().any(|g| variant(g, w)), "missing {w} in {got:?}");
        }
    }

    fn a() -> Term {
        Term::constant("a")
    }
    fn b() -> Term {
        Term::constant("b")
    }

    #[test]
    fn separate_two_constants() {
        let c = parse_clause("-> p(X, X).").unwrap();
        let r = specific_instances(&c, &Subst::single(0, a()), &Subst::single(0, b()), &sig("a/0, b/0")).unwrap();
        same(&r, "-> p(a, a).\n-> p(b, b).");
    }

    #[test]
    fn separate_with_function_symbol() {
        let c = parse_clause("-> p(X).").unwrap();
        let r = specific_instances(&c, &Subst::single(0, a()), &Subst::single(0, b()), &sig("a/0, f/1")).unwrap();
        same(&r, "-> p(a).\n-> p(f(X)).");
    }

    #[test]
    fn shallow_example_instances() {
        let c = parse_clause("-> p(f(X, g(X))).").unwrap();
        let r = specific_instances(&c, &Subst::single(0, a()), &Subst::single(0, b()), &sig("a/0, b/0, g/1, f/2")).unwrap();
        same(&r, "-> p(f(a, g(a))).\n-> p(f(b, g(b))).\n-> p(f(g(X), g(g(X)))).\n-> p(f(f(X, Y), g(f(X, Y)))).");
    }

    #[test]
    fn overlapping_instantiations_rejected() {
        let c = parse_clause("-> p(X).").unwrap();
        assert!(specific_instances(&c, &Subst::single(0, Term::var(5)), &Subst::single(0, b()), &sig("a/0, b/0")).is_err());
    }

    #[test]
    fn single_instantiation() {
        let c = parse_clause("-> p(X).").unwrap();
        same(&specific_instances_single(&c, &Subst::single(0, a()), &sig("a/0, f/1")).unwrap(), "-> p(a).\n-> p(f(X)).");
        let c = parse_clause("-> p(X), q(X).").unwrap();
        same(
            &specific_instances_single(&c, &Subst::single(0, a()), &sig("a/0, f/1")).unwrap(),
            "-> p(a), q(a).\n-> p(f(X)), q(f(X)).",
        );
        assert_eq!(specific_instances_single(&c, &Subst::new(), &sig("a/0")).unwrap(), vec![c]);
    }

    #[test]
    fn single_instantiation_covers_and_separates() {
        let c = parse_clause("p(X, Y) -> q(Y, X).").unwrap();
        let s: Subst = [(0, Term::app("f", vec![a()])), (1, Term::app("g", vec![Term::var(7), b()]))].into_iter().collect();
        let sg = sig("a/0, b/0, f/1, g/2");
        let r = specific_instances_single(&c, &s, &sg).unwrap();
        for g in crate::ground::ground_instances(&c, &sg.ground_terms(2)) {
            let hits = r.iter().filter(|i| match_instance(i, &g).is_some()).count();
            assert_eq!(hits, 1, "{g}");
        }
    }
}
