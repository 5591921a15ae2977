//! Models of satisfiable approximations.
//!
//! A saturated mslH set represents its minimal Herbrand model implicitly.
//! Ground queries are decided by saturating the set together with the
//! negated atom. The depth-bounded partial model construction and the
//! skeleton check serve as oracles in tests.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::approximation::{project_atom, unproject_atom};
use crate::clause_set::ClauseSet;
use crate::ordering::cmp_ground_atoms;
use crate::saturation::{saturate_with_support, selected, Limits, SaturationResult};
use crate::symbols::{is_projection_fn, is_shallow_pred};
use crate::terms::{match_atom, skeleton, tuples, Atom, Clause, Signature, Subst, Symbol, Term, Var};

#[derive(Clone, Debug)]
pub struct ModelHandle {
    /// Saturated, empty-clause-free Horn set whose minimal model is meant.
    pub saturated: ClauseSet,
    pub signature: Signature,
    /// Predicates encoded as `T(f_P(..))` in the saturated set.
    pub projected: BTreeSet<Symbol>,
    /// Translate queries over projected predicates before evaluation.
    pub encode_queries: bool,
    pub limits: Limits,
    /// Clause set whose approximation saturated to `saturated`; empty when
    /// the handle was built directly.
    pub source: ClauseSet,
}

impl ModelHandle {
    pub fn new(saturated: ClauseSet, signature: Signature, projected: impl IntoIterator<Item = Symbol>) -> Self {
        ModelHandle {
            saturated,
            signature,
            projected: projected.into_iter().collect(),
            encode_queries: false,
            limits: Limits::default(),
            source: ClauseSet::new(),
        }
    }

    fn encode(&self, a: &Atom) -> Atom {
        if self.encode_queries && self.projected.contains(&a.pred) {
            project_atom(a, &a.pred)
        } else {
            a.clone()
        }
    }

    /// The depth-bounded minimal model slice over the original predicates.
    pub fn dump(&self, d: usize) -> BoundedInterpretation {
        let mut i = bounded_partial_model(&self.saturated, d);
        if self.encode_queries {
            i.atoms = i
                .atoms
                .iter()
                .filter(|a| !is_shallow_pred(&a.pred))
                .filter_map(|a| unproject_atom(a).ok())
                .collect();
        }
        i
    }
}

/// Membership of a ground atom in the minimal model. `None` when the atom
/// is not ground, deeper than `d`, or the saturation budget ran out.
pub fn query_atom(m: &ModelHandle, a: &Atom, d: usize) -> Option<bool> {
    if !a.is_ground() || a.depth() > d {
        return None;
    }
    let goal = m.encode(a);
    if !m.saturated.clauses().any(|c| c.pos.iter().any(|p| p.pred == goal.pred)) {
        return Some(false);
    }
    let extra = ClauseSet::from_clauses([Clause::goal(vec![goal])]);
    let mut limits = m.limits;
    limits.max_depth = limits.max_depth.max(d + 4);
    match saturate_with_support(&m.saturated, &extra, limits) {
        Ok(SaturationResult::Refutation(_)) => Some(true),
        Ok(SaturationResult::Saturated(_)) => Some(false),
        _ => None,
    }
}

pub fn unproject_model(m: &ModelHandle) -> ModelHandle {
    ModelHandle { encode_queries: true, ..m.clone() }
}

/// Checks every ground instance of `n` with substituted terms of depth at
/// most `d`. `None` when some query is indeterminate or there are too
/// many instances.
pub fn verify_model(n: &ClauseSet, m: &ModelHandle, d: usize) -> Option<bool> {
    const MAX_INSTANCES: usize = 200_000;
    let mut sig = n.signature();
    sig.ensure_constant();
    let terms = sig.ground_terms(d);
    let mut cache: HashMap<Atom, bool> = HashMap::new();
    let mut holds = |a: &Atom| -> Option<bool> {
        if let Some(v) = cache.get(a) {
            return Some(*v);
        }
        let v = query_atom(m, a, a.depth())?;
        cache.insert(a.clone(), v);
        Some(v)
    };
    let mut total = 0usize;
    for c in n.clauses() {
        let vars: Vec<Var> = c.vars().into_iter().collect();
        total = total.saturating_add(terms.len().saturating_pow(vars.len() as u32));
        if total > MAX_INSTANCES {
            return None;
        }
        for ts in tuples(&terms, vars.len()) {
            let g = c.apply(&vars.iter().copied().zip(ts).collect());
            let mut sat = false;
            for a in &g.neg {
                if !holds(a)? {
                    sat = true;
                    break;
                }
            }
            if !sat {
                for a in &g.pos {
                    if holds(a)? {
                        sat = true;
                        break;
                    }
                }
            }
            if !sat {
                return Some(false);
            }
        }
    }
    Some(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedInterpretation {
    pub atoms: BTreeSet<Atom>,
    pub depth: usize,
    pub ordering: &'static str,
}

impl BoundedInterpretation {
    pub fn contains(&self, a: &Atom) -> bool {
        self.atoms.contains(a)
    }
}

impl fmt::Display for BoundedInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut atoms: Vec<String> = self.atoms.iter().map(Atom::to_string).collect();
        atoms.sort();
        for a in atoms {
            writeln!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Term depth of an atom with projection undone.
pub fn model_depth(a: &Atom) -> usize {
    unproject_atom(a).map_or_else(|_| a.depth(), |u| u.depth())
}

fn nesting_bounds(t: &Term, budget: isize, out: &mut BTreeMap<Var, isize>) {
    match t {
        Term::Var(v) => {
            let e = out.entry(*v).or_insert(budget);
            *e = (*e).min(budget);
        }
        Term::App(f, args) => {
            let next = if is_projection_fn(f) { budget } else { budget - 1 };
            args.iter().for_each(|a| nesting_bounds(a, next, out));
        }
    }
}

/// Ground instances of `c` all of whose atoms have model depth at most `d`.
fn bounded_instances(c: &Clause, levels: &[Vec<Term>], d: usize) -> Vec<Clause> {
    let mut bounds = BTreeMap::new();
    for a in c.atoms() {
        a.args.iter().for_each(|t| nesting_bounds(t, d as isize, &mut bounds));
    }
    if bounds.values().any(|b| *b < 0) {
        return vec![];
    }
    let mut out = vec![Subst::new()];
    for (v, b) in bounds {
        let choices: Vec<&Term> = levels[..=(b as usize).min(levels.len() - 1)].iter().flatten().collect();
        out = out
            .into_iter()
            .flat_map(|s| {
                choices.iter().map(move |t| {
                    let mut s2 = s.clone();
                    s2.bind(v, (*t).clone());
                    s2
                })
            })
            .collect();
    }
    out.into_iter().map(|s| c.apply(&s)).filter(|g| g.atoms().all(|a| model_depth(a) <= d)).collect()
}

/// Literals of a ground clause, largest first; a negative literal lies
/// just above the positive literal of the same atom.
fn clause_key(c: &Clause) -> Vec<(&Atom, bool)> {
    let mut lits: Vec<(&Atom, bool)> = c.neg.iter().map(|a| (a, true)).chain(c.pos.iter().map(|a| (a, false))).collect();
    lits.sort_by(|x, y| cmp_lit(y, x));
    lits
}

fn cmp_lit(x: &(&Atom, bool), y: &(&Atom, bool)) -> Ordering {
    cmp_ground_atoms(x.0, y.0).then(x.1.cmp(&y.1))
}

/// Multiset extension of the literal order.
fn cmp_clauses(a: &[(&Atom, bool)], b: &[(&Atom, bool)]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match cmp_lit(x, y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Ordered production over the ground instances of `n` whose atoms have
/// depth at most `d`: a clause false in the atoms produced so far, with a
/// strictly maximal positive atom and no literal selected by saturation,
/// produces that atom.
pub fn bounded_partial_model(n: &ClauseSet, d: usize) -> BoundedInterpretation {
    let mut sig = n.signature().filter_functions(|f| !is_projection_fn(f));
    sig.ensure_constant();
    let all = sig.ground_terms(d);
    let mut levels: Vec<Vec<Term>> = vec![Vec::new(); d + 1];
    for t in all {
        levels[t.depth()].push(t);
    }
    let mut ground: Vec<(Clause, bool)> = n
        .clauses()
        .flat_map(|c| {
            let productive = selected(c).is_empty();
            bounded_instances(c, &levels, d).into_iter().map(move |g| (g, productive))
        })
        .filter(|(g, _)| !g.is_tautology())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    ground.sort_by(|a, b| cmp_clauses(&clause_key(&a.0), &clause_key(&b.0)));
    let mut atoms = BTreeSet::new();
    for (g, productive) in &ground {
        let falsified = g.neg.iter().all(|a| atoms.contains(a)) && !g.pos.iter().any(|a| atoms.contains(a));
        if !falsified || !productive {
            continue;
        }
        let key = clause_key(g);
        if let Some((top, false)) = key.first() {
            if key.get(1).map_or(true, |next| cmp_ground_atoms(next.0, top) == Ordering::Less) {
                atoms.insert((*top).clone());
            }
        }
    }
    BoundedInterpretation { atoms, depth: d, ordering: "ground clause multiset extension of the saturation atom order" }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonViolation {
    pub atom: Atom,
}

impl fmt::Display for SkeletonViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} is not an instance of any positive literal skeleton", self.atom)
    }
}

/// Every atom of `i` over a predicate of `nk` (projected atoms included)
/// must instantiate the skeleton of some positive literal of `nk`.
pub fn skeleton_property_check(nk: &ClauseSet, i: &BoundedInterpretation) -> Vec<SkeletonViolation> {
    let mut skeletons: BTreeMap<Symbol, Vec<Atom>> = BTreeMap::new();
    for c in nk.clauses() {
        for p in &c.pos {
            let mut next = 0;
            let sk = Atom { pred: p.pred.clone(), args: p.args.iter().map(|t| skeleton(t, &mut next)).collect() };
            skeletons.entry(p.pred.clone()).or_default().push(sk);
        }
    }
    let preds = nk.signature().predicates;
    let mut out = Vec::new();
    for a in &i.atoms {
        let Ok(u) = unproject_atom(a) else {
            out.push(SkeletonViolation { atom: a.clone() });
            continue;
        };
        if !preds.contains_key(&u.pred) {
            continue;
        }
        let ok = skeletons
            .get(&u.pred)
            .is_some_and(|sks| sks.iter().any(|sk| match_atom(sk, &u, &mut Subst::new())));
        if !ok {
            out.push(SkeletonViolation { atom: a.clone() });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximation::approximate;
    use crate::saturation::saturate;
    use crate::syntax::{parse_atom, parse_clauses};

    const PARITY: &str = "-> p(a).\np(f(a)) -> .\np(X) -> p(f(f(X))).\np(f(f(X))) -> p(X).";

    fn set(src: &str) -> ClauseSet {
        ClauseSet::from_clauses(parse_clauses(src).unwrap())
    }

    fn fpow(n: usize) -> String {
        let mut s = "a".to_string();
        for _ in 0..n {
            s = format!("f({s})");
        }
        format!("p({s})")
    }

    fn handle(n: &ClauseSet) -> ModelHandle {
        let (approx, trace) = approximate(n);
        let SaturationResult::Saturated(s) = saturate(&approx, Limits::default()).unwrap() else { panic!("unsat") };
        unproject_model(&ModelHandle::new(s, n.signature(), trace.projected_predicates()))
    }

    #[test]
    fn parity_queries() {
        let n = set(PARITY);
        let m = handle(&n);
        for k in 0..=6 {
            assert_eq!(query_atom(&m, &parse_atom(&fpow(k)).unwrap(), 8), Some(k % 2 == 0), "{k}");
        }
        assert_eq!(query_atom(&m, &parse_atom(&fpow(6)).unwrap(), 3), None);
        assert_eq!(verify_model(&n, &m, 4), Some(true));
    }

    #[test]
    fn empty_model() {
        let m = ModelHandle::new(ClauseSet::new(), Signature::default(), []);
        assert_eq!(query_atom(&m, &parse_atom("p(a)").unwrap(), 2), Some(false));
        assert_eq!(verify_model(&set("-> p(a)."), &m, 2), Some(false));
    }

    #[test]
    fn projected_queries() {
        let s = set("-> t(f_p(a, b)).");
        let raw = ModelHandle::new(
            ClauseSet::from_clauses(s.clauses().map(|c| {
                let a = &c.pos[0];
                Clause::fact(Atom { pred: Symbol::new("T"), args: a.args.clone() })
            })),
            Signature::default(),
            [Symbol::new("p")],
        );
        let q = parse_atom("p(a, b)").unwrap();
        assert_eq!(query_atom(&raw, &q, 2), Some(false));
        let m = unproject_model(&raw);
        assert_eq!(query_atom(&m, &q, 2), Some(true));
        assert_eq!(query_atom(&m, &parse_atom("p(b, a)").unwrap(), 2), Some(false));
    }

    #[test]
    fn partial_model_parity() {
        let n = set(PARITY);
        assert_eq!(bounded_partial_model(&set("-> p(a)."), 2).atoms.len(), 1);
        assert!(bounded_partial_model(&ClauseSet::new(), 2).atoms.is_empty());
        let (approx, _) = approximate(&n);
        let SaturationResult::Saturated(s) = saturate(&approx, Limits::default()).unwrap() else { panic!() };
        let i = bounded_partial_model(&s, 4);
        let m = handle(&n);
        for k in 0..=3 {
            let a = parse_atom(&fpow(k)).unwrap();
            assert_eq!(i.contains(&a), query_atom(&m, &a, 8).unwrap(), "{a}");
        }
        assert!(skeleton_property_check(&n, &i).is_empty());
        let even = set("-> p(a).\np(X) -> p(f(f(X))).");
        let mut bad = bounded_partial_model(&even, 4);
        assert!(skeleton_property_check(&even, &bad).is_empty());
        bad.atoms.insert(parse_atom("p(g(a))").unwrap());
        assert_eq!(skeleton_property_check(&even, &bad).len(), 1);
    }
}
