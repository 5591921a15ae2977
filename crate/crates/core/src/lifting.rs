//! Lifting a conflicting core of an approximation back through the trace,
//! one step at a time in reverse order.
//!
//! Every approximation step keeps the variable numbering of its ancestor,
//! so a substitution on a step clause restricted to the ancestor's variables
//! is the corresponding instantiation of the ancestor.

use std::collections::BTreeSet;
use std::fmt;

use crate::approximation::{unproject_atom_for, ApproxStep, ApproxTrace, StepKind};
use crate::clause_set::{ClauseId, ClauseSet};
use crate::cores::{check_core, instantiate_core, CheckConfig, ConflictingCore, CoreClause, Tokens};
use crate::error::{Error, Result};
use crate::syntax::math_clause;
use crate::terms::{
    have_common_instances, match_atom, match_instance, match_instance_modulo_dups, match_instances_from, mgu_atoms,
    unify_pairs, Atom, Clause, Subst, Term, Var,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailWitness {
    /// `clause = C'σ` with `xσ`, `x'σ` sharing no instances.
    Linear { clause: Clause, sigma: Subst, var: Var, fresh: Var },
    /// Resolvent of `left = C₁σ₁` and `right = C₂σ₂` on the S-atom that is
    /// no instance of the ancestor; `yσ₁`, `yσ₂` share no instances.
    Shallow { resolvent: Clause, left: Clause, right: Clause, sigma_left: Subst, sigma_right: Subst, var: Var },
    /// Core instance `C'σ` of the Horn clause with `σ` not a renaming.
    Horn { clause: Clause, sigma: Subst, checks: Vec<String> },
}

impl fmt::Display for FailWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailWitness::Linear { clause, sigma, var, fresh } => {
                let img = |v: &Var| sigma.get(*v).cloned().unwrap_or(Term::Var(*v));
                write!(f, "linear: {} with x{var}={} but x{fresh}={}", math_clause(clause), img(var), img(fresh))
            }
            FailWitness::Shallow { resolvent, left, right, var, sigma_left, sigma_right } => {
                let img = |s: &Subst| s.get(*var).cloned().unwrap_or(Term::Var(*var));
                write!(
                    f,
                    "shallow: resolvent {} of {} and {}, x{var}={} vs {}",
                    math_clause(resolvent),
                    math_clause(left),
                    math_clause(right),
                    img(sigma_left),
                    img(sigma_right)
                )
            }
            FailWitness::Horn { clause, sigma, checks } => {
                write!(f, "horn: {} under {sigma} ({})", math_clause(clause), checks.join("; "))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum LiftOutcome {
    Lifted(ConflictingCore),
    /// The set before the step is satisfiable because this residual set is.
    Satisfiable(ClauseSet),
    /// `step` indexes the trace.
    Failed { step: usize, witness: FailWitness },
}

/// Verdict of the recursive call made by indirect Horn lifting.
#[derive(Clone, Debug)]
pub enum Residual {
    Unsat(ConflictingCore),
    Sat,
    Unknown(String),
}

#[derive(Clone, Debug)]
pub struct LiftOptions {
    /// Resolve shallow atoms only between literals resolved together in the
    /// source refutation.
    pub unique_s: bool,
    /// Check every intermediate core with [`check_core`].
    pub validate: bool,
    pub max_rounds: usize,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions { unique_s: false, validate: true, max_rounds: 16 }
    }
}

pub type SolveCallback<'a> = dyn FnMut(&ClauseSet) -> Result<Residual> + 'a;

/// Result of [`lift`] plus one log line per step.
#[derive(Clone, Debug)]
pub struct Lifting {
    pub outcome: LiftOutcome,
    pub log: Vec<String>,
}

/// The clause sets before each step, followed by the final set.
pub fn intermediate_sets(trace: &ApproxTrace) -> Result<Vec<ClauseSet>> {
    let mut sets = vec![trace.initial.clone()];
    for step in &trace.steps {
        let (next, _) = crate::approximation::apply_step(sets.last().expect("nonempty"), step.ancestor, &step.kind)?;
        sets.push(next);
    }
    Ok(sets)
}

/// Lifts `core`, a core of the trace's final set, to the initial set.
pub fn lift(core: &ConflictingCore, trace: &ApproxTrace, opts: &LiftOptions, solve: &mut SolveCallback) -> Result<Lifting> {
    let sets = intermediate_sets(trace)?;
    let last = sets.last().expect("nonempty");
    if !core.origins_match(last) {
        return Err(Error::CoreMismatch("core is not over the approximated set".into()));
    }
    let mut cur = core.clone();
    let mut log = Vec::new();
    let mut k = trace.steps.len();
    while k > 0 {
        k -= 1;
        let step = &trace.steps[k];
        // projection steps of one predicate are lifted together
        let mut first = k;
        if let StepKind::Monadic { pred } = &step.kind {
            while first > 0 && matches!(&trace.steps[first - 1].kind, StepKind::Monadic { pred: q } if q == pred) {
                first -= 1;
            }
        }
        let group = &trace.steps[first..=k];
        if !cur.clauses.iter().any(|c| group.iter().any(|s| s.produced.contains(&c.origin))) {
            k = first;
            continue;
        }
        let pre = &sets[first];
        let out = match &step.kind {
            StepKind::Monadic { .. } => {
                let mut c = cur.clone();
                for s in group.iter().rev() {
                    let LiftOutcome::Lifted(next) = lift_monadic_step(&c, s)? else { unreachable!() };
                    c = next;
                }
                LiftOutcome::Lifted(c)
            }
            StepKind::Linear { .. } => lift_linear_step(&cur, step, pre, k)?,
            StepKind::Shallow { .. } => lift_shallow_step(&cur, step, pre, k, opts.unique_s)?,
            StepKind::Horn { .. } => match lift_horn_direct(&cur, step) {
                Some(c) => LiftOutcome::Lifted(c),
                None => lift_horn_indirect(&cur, step, pre, k, opts, solve)?,
            },
        };
        let label = if first == k { format!("step {k} ({})", step.kind.name()) } else { format!("steps {first}-{k} ({})", step.kind.name()) };
        k = first;
        match out {
            LiftOutcome::Lifted(c) => {
                if !c.origins_match(pre) {
                    return Err(Error::CoreMismatch(format!("lifted core does not match the set before {label}")));
                }
                if opts.validate && check_core(&c, &CheckConfig::default()) == Some(false) {
                    return Err(Error::CoreMismatch(format!("lifted core at {label} is satisfiable")));
                }
                log.push(format!("{label} lifted"));
                cur = c;
            }
            LiftOutcome::Failed { step: s, witness } => {
                log.push(format!("{label} failed: {witness}"));
                return Ok(Lifting { outcome: LiftOutcome::Failed { step: s, witness }, log });
            }
            LiftOutcome::Satisfiable(r) => {
                log.push(format!("{label} residual set satisfiable"));
                return Ok(Lifting { outcome: LiftOutcome::Satisfiable(r), log });
            }
        }
    }
    Ok(Lifting { outcome: LiftOutcome::Lifted(cur), log })
}

/// Rebuilds literals of `clause`, giving each the union of the tokens that
/// literals with the same sign and atom carried in `pool`.
fn transfer(pool: &[&CoreClause], clause: Clause, origin: ClauseId) -> CoreClause {
    let tok = |neg: bool, a: &Atom| -> Tokens {
        let mut t = Tokens::new();
        for c in pool {
            let (ns, ps) = c.literals();
            for (b, bt) in if neg { ns } else { ps } {
                if &b == a {
                    t.extend(bt);
                }
            }
        }
        t
    };
    let neg = clause.neg.iter().map(|a| (a.clone(), tok(true, a))).collect();
    let pos = clause.pos.iter().map(|a| (a.clone(), tok(false, a))).collect();
    CoreClause::from_literals(neg, pos, origin)
}

fn produced_clause(pre: &ClauseSet, step: &ApproxStep, i: usize) -> Result<Clause> {
    let (post, _) = crate::approximation::apply_step(pre, step.ancestor, &step.kind)?;
    post.get(step.produced[i]).cloned().ok_or_else(|| Error::CoreMismatch("trace does not replay".into()))
}

fn matcher(general: &Clause, inst: &Clause) -> Result<Subst> {
    match_instance(general, inst)
        .or_else(|| match_instance_modulo_dups(general, inst))
        .ok_or_else(|| Error::CoreMismatch(format!("{inst} is no instance of {general}")))
}

fn image(s: &Subst, v: Var) -> Term {
    s.get(v).cloned().unwrap_or(Term::Var(v))
}

/// Replaces every projected atom by the atom it encodes.
pub fn lift_monadic_step(core: &ConflictingCore, step: &ApproxStep) -> Result<LiftOutcome> {
    let StepKind::Monadic { pred } = &step.kind else {
        return Err(Error::Precondition("not a monadic step".into()));
    };
    let mut out = Vec::new();
    for c in &core.clauses {
        if !step.produced.contains(&c.origin) {
            out.push(c.clone());
            continue;
        }
        let (neg, pos) = c.literals();
        let un = |xs: Vec<(Atom, Tokens)>| -> Result<Vec<(Atom, Tokens)>> {
            xs.into_iter().map(|(a, t)| Ok((unproject_atom_for(&a, Some(pred))?, t))).collect()
        };
        out.push(CoreClause::from_literals(un(neg)?, un(pos)?, step.ancestor));
    }
    Ok(LiftOutcome::Lifted(ConflictingCore { clauses: out }))
}

/// Some variable of the core mapped to a ground term, used to ground cores
/// whose disagreements cannot be removed by unification.
fn grounding_for(core: &ConflictingCore, pre: &ClauseSet) -> Subst {
    let mut sig = pre.signature();
    sig.merge(&core.signature());
    let c = sig.ensure_constant();
    core.vars().into_iter().map(|v| (v, Term::constant(c.as_str()))).collect()
}

pub fn lift_linear_step(core: &ConflictingCore, step: &ApproxStep, pre: &ClauseSet, index: usize) -> Result<LiftOutcome> {
    let StepKind::Linear { var, fresh, .. } = &step.kind else {
        return Err(Error::Precondition("not a linear step".into()));
    };
    let (var, fresh) = (*var, *fresh);
    let produced = produced_clause(pre, step, 0)?;
    let pairs = |core: &ConflictingCore| -> Result<Vec<(usize, Subst)>> {
        core.clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| c.origin == step.produced[0])
            .map(|(i, c)| Ok((i, matcher(&produced, &c.clause)?)))
            .collect()
    };
    let mut cur = core.clone();
    let mut grounded = false;
    loop {
        let ms = pairs(&cur)?;
        let diff: Vec<(Term, Term)> =
            ms.iter().map(|(_, s)| (image(s, var), image(s, fresh))).filter(|(a, b)| a != b).collect();
        if diff.is_empty() {
            let mut out = Vec::new();
            for (i, c) in cur.clauses.iter().enumerate() {
                match ms.iter().find(|(j, _)| *j == i) {
                    Some((_, s)) => out.push(transfer(&[c], step.ancestor_clause.apply(s), step.ancestor)),
                    None => out.push(c.clone()),
                }
            }
            return Ok(LiftOutcome::Lifted(ConflictingCore { clauses: out }));
        }
        if let Some(tau) = unify_pairs(diff.iter().map(|(a, b)| (a, b))) {
            cur = instantiate_core(&cur, &tau);
            continue;
        }
        if let Some((i, s)) = ms.iter().find(|(_, s)| !have_common_instances(&image(s, var), &image(s, fresh))) {
            let sigma = s.restrict(|v| produced.vars().contains(&v));
            return Ok(LiftOutcome::Failed {
                step: index,
                witness: FailWitness::Linear { clause: cur.clauses[*i].clause.clone(), sigma, var, fresh },
            });
        }
        if grounded {
            return Err(Error::RefinementLoop("linear lifting made no progress on a ground core".into()));
        }
        cur = instantiate_core(&cur, &grounding_for(&cur, pre));
        grounded = true;
    }
}

/// Index of the S-literal of a core clause (negative for the left clause,
/// positive for the right one).
fn s_literal(c: &Clause, pred: &crate::terms::Symbol, neg: bool) -> Option<usize> {
    let side = if neg { &c.neg } else { &c.pos };
    side.iter().position(|a| &a.pred == pred)
}

struct ShallowPair {
    left: usize,
    right: usize,
    theta: Subst,
}

pub fn lift_shallow_step(
    core: &ConflictingCore,
    step: &ApproxStep,
    pre: &ClauseSet,
    index: usize,
    unique_s: bool,
) -> Result<LiftOutcome> {
    let StepKind::Shallow { pred, .. } = &step.kind else {
        return Err(Error::Precondition("not a shallow step".into()));
    };
    let c1 = produced_clause(pre, step, 0)?;
    let c2 = produced_clause(pre, step, 1)?;
    let shared: Vec<Var> = c1.vars().intersection(&c2.vars()).copied().collect();
    let ancestor = &step.ancestor_clause;
    let mut cur = core.clone();
    let mut grounded = false;
    for _ in 0..64 {
        let lefts: Vec<usize> = (0..cur.clauses.len()).filter(|i| cur.clauses[*i].origin == step.produced[0]).collect();
        let rights: Vec<usize> = (0..cur.clauses.len()).filter(|i| cur.clauses[*i].origin == step.produced[1]).collect();
        let mut resolvable = Vec::new();
        for &l in &lefts {
            for &r in &rights {
                let lc = &cur.clauses[l];
                let rc = &cur.clauses[r];
                let (Some(li), Some(ri)) = (s_literal(&lc.clause, pred, true), s_literal(&rc.clause, pred, false)) else {
                    return Err(Error::CoreMismatch("shallow clause without its S-atom".into()));
                };
                if unique_s && lc.token(crate::terms::LitRef::Neg(li)).is_disjoint(rc.token(crate::terms::LitRef::Pos(ri))) {
                    continue;
                }
                if let Some(theta) = mgu_atoms(&lc.clause.neg[li], &rc.clause.pos[ri]) {
                    resolvable.push(ShallowPair { left: l, right: r, theta });
                }
            }
        }
        let resolvent = |p: &ShallowPair| -> (Clause, Vec<(Atom, Tokens)>, Vec<(Atom, Tokens)>) {
            let (mut ln, lp) = cur.clauses[p.left].apply(&p.theta).literals();
            let (rn, mut rp) = cur.clauses[p.right].apply(&p.theta).literals();
            ln.remove(ln.iter().position(|(a, _)| &a.pred == pred).expect("S-atom"));
            rp.remove(rp.iter().position(|(a, _)| &a.pred == pred).expect("S-atom"));
            let neg: Vec<(Atom, Tokens)> = ln.into_iter().chain(rn).collect();
            let pos: Vec<(Atom, Tokens)> = lp.into_iter().chain(rp).collect();
            let c = Clause::new(neg.iter().map(|x| x.0.clone()).collect(), pos.iter().map(|x| x.0.clone()).collect());
            (c, neg, pos)
        };
        let mut lifted = Vec::new();
        let mut failures = Vec::new();
        for p in &resolvable {
            let (r, neg, pos) = resolvent(p);
            match match_instance(ancestor, &r).or_else(|| match_instance_modulo_dups(ancestor, &r)) {
                Some(s) => {
                    let tmp = CoreClause::from_literals(neg, pos, step.ancestor);
                    lifted.push(transfer(&[&tmp], ancestor.apply(&s), step.ancestor));
                }
                None => failures.push((p, r)),
            }
        }
        if failures.is_empty() {
            let mut out: Vec<CoreClause> =
                cur.clauses.iter().filter(|c| !step.produced.contains(&c.origin)).cloned().collect();
            out.extend(lifted);
            return Ok(LiftOutcome::Lifted(ConflictingCore { clauses: out }));
        }
        // disagreements on shared variables between the parents
        let mut diffs: Vec<(Term, Term)> = Vec::new();
        let mut witness = None;
        for (p, r) in &failures {
            let left = cur.clauses[p.left].clause.apply(&p.theta);
            let right = cur.clauses[p.right].clause.apply(&p.theta);
            let ls = match_instances_from(&c1, &left, &Subst::new(), 16);
            let rs = match_instances_from(&c2, &right, &Subst::new(), 16);
            let (ls, rs) = (
                if ls.is_empty() { vec![matcher(&c1, &left)?] } else { ls },
                if rs.is_empty() { vec![matcher(&c2, &right)?] } else { rs },
            );
            let (s1, s2) = (&ls[0], &rs[0]);
            for y in &shared {
                let (a, b) = (image(s1, *y), image(s2, *y));
                if a != b {
                    diffs.push((a.clone(), b.clone()));
                    if witness.is_none() && !have_common_instances(&a, &b) {
                        witness = Some(FailWitness::Shallow {
                            resolvent: r.clone(),
                            left: left.clone(),
                            right: right.clone(),
                            sigma_left: s1.restrict(|v| c1.vars().contains(&v)),
                            sigma_right: s2.restrict(|v| c2.vars().contains(&v)),
                            var: *y,
                        });
                    }
                }
            }
        }
        if let Some(w) = witness {
            return Ok(LiftOutcome::Failed { step: index, witness: w });
        }
        let thetas: Vec<&Subst> = failures.iter().map(|(p, _)| &p.theta).collect();
        let mut pairs: Vec<(Term, Term)> = diffs;
        for t in thetas {
            pairs.extend(t.iter().map(|(v, x)| (Term::Var(*v), x.clone())));
        }
        match unify_pairs(pairs.iter().map(|(a, b)| (a, b))) {
            Some(tau) if !tau.is_empty() => cur = instantiate_core(&cur, &tau),
            _ if !grounded => {
                cur = instantiate_core(&cur, &grounding_for(&cur, pre));
                grounded = true;
            }
            _ => return Err(Error::RefinementLoop("shallow lifting made no progress".into())),
        }
    }
    Err(Error::ResourceOut("shallow lifting rounds".into()))
}

/// Tries to show that each core instance of the Horn clause follows from an
/// instance of its ancestor, either because the removed atoms collapse onto
/// the kept one or because unit clauses of the core refute them.
pub fn lift_horn_direct(core: &ConflictingCore, step: &ApproxStep) -> Option<ConflictingCore> {
    let (lifted, rest) = horn_direct_partial(core, step);
    rest.is_empty().then_some(lifted)
}

/// Lifts the instances that pass the direct checks; returns the indices of
/// the remaining ones.
fn horn_direct_partial(core: &ConflictingCore, step: &ApproxStep) -> (ConflictingCore, Vec<usize>) {
    let StepKind::Horn { kept } = &step.kind else {
        return (core.clone(), vec![]);
    };
    let anc = &step.ancestor_clause;
    let units: Vec<&Atom> =
        core.clauses.iter().filter(|c| c.clause.pos.is_empty() && c.clause.neg.len() == 1).map(|c| &c.clause.neg[0]).collect();
    let produced = Clause::new(anc.neg.clone(), vec![anc.pos[*kept].clone()]);
    let mut out = Vec::new();
    let mut rest = Vec::new();
    for (i, c) in core.clauses.iter().enumerate() {
        if c.origin != step.produced[0] {
            out.push(c.clone());
            continue;
        }
        let Some(sigma) = match_instance(&produced, &c.clause) else {
            rest.push(i);
            out.push(c.clone());
            continue;
        };
        let target = anc.pos[*kept].apply(&sigma);
        let mut s = sigma.clone();
        let mut ok = true;
        for (l, e) in anc.pos.iter().enumerate() {
            if l == *kept {
                continue;
            }
            let mut s2 = s.clone();
            if match_atom(e, &target, &mut s2) {
                s = s2;
                continue;
            }
            if let Some(s2) = units.iter().find_map(|u| {
                let mut s2 = s.clone();
                match_atom(e, u, &mut s2).then_some(s2)
            }) {
                s = s2;
                continue;
            }
            ok = false;
            break;
        }
        if ok {
            out.push(transfer(&[c], anc.apply(&s), step.ancestor));
        } else {
            rest.push(i);
            out.push(c.clone());
        }
    }
    (ConflictingCore { clauses: out }, rest)
}

/// Lifting through a Horn step by recursively solving the set in which the
/// approximated clause is replaced by its removed positive atoms.
pub fn lift_horn_indirect(
    core: &ConflictingCore,
    step: &ApproxStep,
    pre: &ClauseSet,
    index: usize,
    opts: &LiftOptions,
    solve: &mut SolveCallback,
) -> Result<LiftOutcome> {
    let StepKind::Horn { kept } = &step.kind else {
        return Err(Error::Precondition("not a horn step".into()));
    };
    let anc = &step.ancestor_clause;
    let produced = Clause::new(anc.neg.clone(), vec![anc.pos[*kept].clone()]);
    let removed: Vec<Atom> = anc.pos.iter().enumerate().filter(|(l, _)| l != kept).map(|(_, a)| a.clone()).collect();
    let mut cur = core.clone();
    for _ in 0..opts.max_rounds {
        let (partial, rest) = horn_direct_partial(&cur, step);
        if rest.is_empty() {
            return Ok(LiftOutcome::Lifted(partial));
        }
        let sigmas: Vec<(usize, Subst)> =
            rest.iter().map(|i| Ok((*i, matcher(&produced, &partial.clauses[*i].clause)?))).collect::<Result<_>>()?;
        if let Some((i, s)) = sigmas.iter().find(|(_, s)| !s.restrict(|v| produced.vars().contains(&v)).is_renaming() || !injective_on(s, &produced)) {
            return Ok(LiftOutcome::Failed {
                step: index,
                witness: FailWitness::Horn {
                    clause: partial.clauses[*i].clause.clone(),
                    sigma: s.restrict(|v| produced.vars().contains(&v)),
                    checks: vec!["no collapse of the removed atoms".into(), "no refuting unit clauses".into()],
                },
            });
        }
        let (i, sigma) = sigmas[0].clone();
        let mut residual = pre.clone();
        residual.remove(step.ancestor);
        let unit_id = residual.push(Clause::new(vec![], removed.clone()));
        let sub = match solve(&residual)? {
            Residual::Sat => return Ok(LiftOutcome::Satisfiable(residual)),
            Residual::Unknown(why) => return Err(Error::ResourceOut(format!("indirect horn lifting: {why}"))),
            Residual::Unsat(c) => c,
        };
        // the approximated core with the Horn instance widened back to the ancestor
        let mut widened = partial.clone();
        let inst = partial.clauses[i].clone();
        for j in rest.iter().filter(|j| partial.clauses[**j] == inst) {
            widened.clauses[*j] = transfer(&[&inst], anc.apply(&sigma), step.ancestor);
        }
        let root: Vec<Atom> = removed.iter().map(|a| a.apply(&sigma)).collect();
        let mut out: Vec<CoreClause> = Vec::new();
        let mut next = sub.next_var();
        for c in &sub.clauses {
            if c.origin != unit_id {
                out.push(c.clone());
                continue;
            }
            // splice a renamed copy of the widened core proving this instance
            let off = next.max(widened.next_var());
            let copy = instantiate_core(
                &widened,
                &widened.vars().into_iter().map(|v| (v, Term::Var(v + off))).collect(),
            );
            next = off + widened.next_var() + 1;
            let root_copy: Vec<Atom> = root.iter().map(|a| a.rename(&|v| v + off)).collect();
            let rc = Clause::new(vec![], root_copy);
            let Some(rho) = match_instance(&rc, &c.clause) else {
                return Err(Error::CoreMismatch(format!("{} is no instance of {}", c.clause, rc)));
            };
            out.extend(instantiate_core(&copy, &rho).clauses);
        }
        let mut clauses: Vec<CoreClause> = Vec::new();
        for c in out {
            if !clauses.contains(&c) {
                clauses.push(c);
            }
        }
        cur = ConflictingCore { clauses };
        if cur.clauses.iter().all(|c| c.origin != step.produced[0]) {
            return Ok(LiftOutcome::Lifted(cur));
        }
    }
    Err(Error::ResourceOut("indirect horn lifting rounds".into()))
}

/// `s` maps the variables of `c` to pairwise distinct variables.
fn injective_on(s: &Subst, c: &Clause) -> bool {
    let mut seen = BTreeSet::new();
    c.vars().into_iter().all(|v| matches!(image(s, v), Term::Var(w) if seen.insert(w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximation::{approximate, apply_step, ApproxOptions};
    use crate::syntax::parse_clauses;

    fn set(src: &str) -> ClauseSet {
        ClauseSet::from_clauses(parse_clauses(src).unwrap())
    }

    fn trace_of(initial: &ClauseSet, steps: &[(ClauseId, StepKind)]) -> ApproxTrace {
        let mut cur = initial.clone();
        let mut out = Vec::new();
        for (id, k) in steps {
            let (n, s) = apply_step(&cur, *id, k).unwrap();
            cur = n;
            out.push(s);
        }
        ApproxTrace { initial: initial.clone(), steps: out, result: cur, options: ApproxOptions::default() }
    }

    fn no_solve(_: &ClauseSet) -> Result<Residual> {
        panic!("unexpected recursive call")
    }

    #[test]
    fn empty_trace_is_identity() {
        let n = set("-> p(a).\np(a) -> .");
        let (_, t) = approximate(&n);
        assert!(t.steps.is_empty());
        let core = ConflictingCore::from_clauses(n.iter().map(|(id, c)| (c.clone(), id)));
        let l = lift(&core, &t, &LiftOptions::default(), &mut no_solve).unwrap();
        assert!(matches!(l.outcome, LiftOutcome::Lifted(ref c) if *c == core));
    }

    #[test]
    fn monadic_lift_reverts_projection() {
        let n = set("-> p(X, X2).\np(Y, a), p(Z, b) -> .");
        let (m, t) = approximate(&n);
        let yz = |a: &str, b: &str| -> Vec<(Clause, ClauseId)> {
            let ids: Vec<ClauseId> = m.ids();
            let c = parse_clauses(&format!("-> T(f_p({a}, a)).\n-> T(f_p({b}, b)).\nT(f_p({a}, a)), T(f_p({b}, b)) -> .")).unwrap();
            vec![(c[0].clone(), ids[0]), (c[1].clone(), ids[0]), (c[2].clone(), ids[1])]
        };
        let core = ConflictingCore::from_clauses(yz("a", "b"));
        let l = lift(&core, &t, &LiftOptions::default(), &mut no_solve).unwrap();
        let LiftOutcome::Lifted(c) = l.outcome else { panic!() };
        assert!(c.origins_match(&n));
        assert_eq!(c.clause_list(), {
            let mut v = parse_clauses("-> p(a, a).\n-> p(b, b).\np(a, a), p(b, b) -> .").unwrap();
            v.sort();
            v
        });
    }

    #[test]
    fn linear_lift_and_failure() {
        let n = set("-> p(X, X).\np(Y, a), p(Z, b) -> .");
        let t = trace_of(
            &n,
            &[(ClauseId(0), StepKind::Linear { atom: 0, var: 0, fresh: 1, p: vec![0].into(), q: vec![1].into() })],
        );
        let lin = t.steps[0].produced[0];
        let mk = |src: &str| {
            let c = parse_clauses(src).unwrap();
            ConflictingCore::from_clauses(vec![(c[0].clone(), lin), (c[1].clone(), lin), (c[2].clone(), ClauseId(1))])
        };
        let ok = mk("-> p(a, a).\n-> p(b, b).\np(a, a), p(b, b) -> .");
        let l = lift(&ok, &t, &LiftOptions::default(), &mut no_solve).unwrap();
        assert!(matches!(l.outcome, LiftOutcome::Lifted(ref c) if c.origins_match(&n)));
        let bad = mk("-> p(a, a).\n-> p(a, b).\np(a, a), p(a, b) -> .");
        let l = lift(&bad, &t, &LiftOptions::default(), &mut no_solve).unwrap();
        let LiftOutcome::Failed { witness: FailWitness::Linear { sigma, .. }, .. } = l.outcome else { panic!() };
        assert_eq!(sigma.get(0), Some(&Term::constant("a")));
        assert_eq!(sigma.get(1), Some(&Term::constant("b")));
    }

    #[test]
    fn horn_indirect_satisfiable() {
        let n = set("-> p(a), q(a).\np(X) -> .");
        let (_, t) = approximate(&n);
        let hs = &t.steps[0];
        let c = parse_clauses("-> p(a).\np(a) -> .").unwrap();
        let core = ConflictingCore::from_clauses(vec![(c[0].clone(), hs.produced[0]), (c[1].clone(), ClauseId(1))]);
        assert!(lift_horn_direct(&core, hs).is_none());
        let mut seen = None;
        let mut cb = |r: &ClauseSet| -> Result<Residual> {
            seen = Some(r.clone());
            Ok(Residual::Sat)
        };
        let l = lift(&core, &t, &LiftOptions::default(), &mut cb).unwrap();
        assert!(matches!(l.outcome, LiftOutcome::Satisfiable(_)));
        let r = seen.unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.clauses().any(|c| *c == parse_clauses("-> q(a).").unwrap()[0]));
    }
}
