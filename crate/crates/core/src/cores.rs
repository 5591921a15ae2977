//! Conflicting cores: finite sets of clause instances over one shared scope
//! of rigid variables that are unsatisfiable under every simultaneous
//! grounding.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::clause_set::{ClauseId, ClauseSet};
use crate::error::{Error, Result};
use crate::ground::ground_satisfiable;
use crate::saturation::{Refutation, Rule};
use crate::symbols::fresh_constant;
use crate::syntax::math_clause;
use crate::terms::{match_instance, match_instances_from, Atom, Clause, LitRef, Signature, Subst, Term, Var};

/// Ids of the inference steps that consumed a literal. Two literals carrying
/// a common token were resolved against each other in the source proof.
pub type Tokens = BTreeSet<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreClause {
    pub clause: Clause,
    pub origin: ClauseId,
    /// One entry per literal, negative literals first.
    pub tokens: Vec<Tokens>,
}

impl CoreClause {
    pub fn new(clause: Clause, origin: ClauseId) -> Self {
        let tokens = vec![Tokens::new(); clause.len()];
        CoreClause { clause, origin, tokens }
    }

    /// Builds a clause from literals with their tokens, sorting each side.
    pub fn from_literals(neg: Vec<(Atom, Tokens)>, pos: Vec<(Atom, Tokens)>, origin: ClauseId) -> Self {
        let mut neg = neg;
        let mut pos = pos;
        neg.sort_by(|a, b| a.0.cmp(&b.0));
        pos.sort_by(|a, b| a.0.cmp(&b.0));
        let tokens = neg.iter().chain(pos.iter()).map(|(_, t)| t.clone()).collect();
        CoreClause {
            clause: Clause { neg: neg.into_iter().map(|(a, _)| a).collect(), pos: pos.into_iter().map(|(a, _)| a).collect() },
            origin,
            tokens,
        }
    }

    pub fn literals(&self) -> (Vec<(Atom, Tokens)>, Vec<(Atom, Tokens)>) {
        let k = self.clause.neg.len();
        let neg = self.clause.neg.iter().cloned().zip(self.tokens[..k].iter().cloned()).collect();
        let pos = self.clause.pos.iter().cloned().zip(self.tokens[k..].iter().cloned()).collect();
        (neg, pos)
    }

    pub fn token(&self, l: LitRef) -> &Tokens {
        match l {
            LitRef::Neg(i) => &self.tokens[i],
            LitRef::Pos(i) => &self.tokens[self.clause.neg.len() + i],
        }
    }

    pub fn apply(&self, s: &Subst) -> CoreClause {
        let (neg, pos) = self.literals();
        let f = |xs: Vec<(Atom, Tokens)>| xs.into_iter().map(|(a, t)| (a.apply(s), t)).collect();
        CoreClause::from_literals(f(neg), f(pos), self.origin)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConflictingCore {
    pub clauses: Vec<CoreClause>,
}

impl ConflictingCore {
    pub fn from_clauses(cs: impl IntoIterator<Item = (Clause, ClauseId)>) -> Self {
        ConflictingCore { clauses: cs.into_iter().map(|(c, id)| CoreClause::new(c, id)).collect() }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.clauses.iter().flat_map(|c| c.clause.vars()).collect()
    }

    pub fn next_var(&self) -> Var {
        self.vars().last().map_or(0, |v| v + 1)
    }

    /// Distinct clause instances, sorted.
    pub fn clause_list(&self) -> Vec<Clause> {
        let set: BTreeSet<&Clause> = self.clauses.iter().map(|c| &c.clause).collect();
        set.into_iter().cloned().collect()
    }

    pub fn signature(&self) -> Signature {
        Signature::from_clauses(self.clauses.iter().map(|c| &c.clause))
    }

    /// Every clause is an instance of the clause of `n` it names as origin.
    pub fn origins_match(&self, n: &ClauseSet) -> bool {
        self.clauses.iter().all(|c| n.get(c.origin).is_some_and(|o| match_instance(o, &c.clause).is_some()))
    }

    /// Renames the shared variables by first occurrence in the sorted
    /// clause list.
    pub fn normalized(&self) -> ConflictingCore {
        let mut order = Vec::new();
        for c in self.clause_list() {
            c.collect_vars(&mut order);
        }
        let mut map = BTreeMap::new();
        for v in order {
            let n = map.len() as Var;
            map.entry(v).or_insert(n);
        }
        let s: Subst = map.iter().map(|(v, n)| (*v, Term::Var(*n))).collect();
        instantiate_core(self, &s)
    }
}

impl fmt::Display for ConflictingCore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.normalized().clause_list() {
            writeln!(f, "{}", math_clause(&c))?;
        }
        Ok(())
    }
}

/// The core of a refutation: input clauses instantiated with the
/// substitutions accumulated along every path from the root.
pub fn extract_core(r: &Refutation) -> Result<ConflictingCore> {
    let Some(root) = r.nodes.len().checked_sub(1) else {
        return Err(Error::MalformedProof("empty refutation".into()));
    };
    if !r.nodes[root].conclusion.is_empty() {
        return Err(Error::MalformedProof("root is not the empty clause".into()));
    }
    let image = |s: &Subst, v: Var| s.get(v).cloned().unwrap_or(Term::Var(v));
    let mut next: Var = 0;
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Subst, Vec<Tokens>)> = vec![(root, Subst::new(), vec![])];
    while let Some((i, theta, toks)) = stack.pop() {
        let node = &r.nodes[i];
        let conclusion_vars = node.conclusion.vars();
        let parents: Vec<(usize, &Subst, u8)> = match &node.rule {
            Rule::Input(id) => {
                let lits = |side: &[Atom], off: usize| -> Vec<(Atom, Tokens)> {
                    side.iter().enumerate().map(|(k, a)| (a.apply(&theta), toks[off + k].clone())).collect()
                };
                let c = &node.conclusion;
                out.push(CoreClause::from_literals(lits(&c.neg, 0), lits(&c.pos, c.neg.len()), *id));
                continue;
            }
            Rule::Resolution { left, right, sigma_left, sigma_right, .. } => {
                vec![(*left, sigma_left, 0), (*right, sigma_right, 1)]
            }
            Rule::Factoring { parent, sigma, .. } => vec![(*parent, sigma, 0)],
        };
        if parents.iter().any(|(p, _, _)| *p >= i) {
            return Err(Error::MalformedProof(format!("node {i} precedes a parent")));
        }
        // variables eliminated by this inference get fresh rigid names
        let mut theta = theta;
        let mut locals = BTreeSet::new();
        for (p, s, _) in &parents {
            for v in r.nodes[*p].conclusion.vars() {
                locals.extend(image(s, v).vars().into_iter().filter(|u| !conclusion_vars.contains(u)));
            }
        }
        for u in locals {
            theta.bind(u, Term::Var(next));
            next += 1;
        }
        for (p, s, slot) in parents {
            let pc = &r.nodes[p].conclusion;
            let sub: Subst = pc.vars().into_iter().map(|v| (v, image(s, v).apply(&theta))).collect();
            let refs = pc.neg.iter().enumerate().map(|(k, _)| LitRef::Neg(k)).chain(pc.pos.iter().enumerate().map(|(k, _)| LitRef::Pos(k)));
            let mut ptoks = Vec::new();
            for l in refs {
                let inherited = |l: LitRef| {
                    node.origin.iter().position(|o| *o == (slot, l)).map(|m| toks[m].clone())
                };
                let t = match &node.rule {
                    Rule::Resolution { left_lit, right_lit, .. } => {
                        let resolved = (slot == 0 && l == LitRef::Pos(*left_lit)) || (slot == 1 && l == LitRef::Neg(*right_lit));
                        if resolved {
                            Some(Tokens::from([i]))
                        } else {
                            inherited(l)
                        }
                    }
                    Rule::Factoring { kept, dropped, .. } => inherited(if l == *dropped { *kept } else { l }),
                    Rule::Input(_) => unreachable!(),
                };
                let Some(t) = t else {
                    return Err(Error::MalformedProof(format!("node {i}: literal {l:?} of parent {p} has no descendant")));
                };
                ptoks.push(t);
            }
            stack.push((p, sub, ptoks));
        }
    }
    out.reverse();
    Ok(ConflictingCore { clauses: out })
}

pub fn instantiate_core(core: &ConflictingCore, tau: &Subst) -> ConflictingCore {
    ConflictingCore { clauses: core.clauses.iter().map(|c| c.apply(tau)).collect() }
}

/// Some τ with `instantiate_core(general, τ)` equal to `specific` as a set
/// of clauses.
pub fn match_core(general: &ConflictingCore, specific: &ConflictingCore) -> Option<Subst> {
    let gen = general.clause_list();
    let spec = specific.clause_list();
    fn go(gen: &[Clause], spec: &[Clause], i: usize, s: &Subst) -> Option<Subst> {
        if i == gen.len() {
            let image: BTreeSet<Clause> = gen.iter().map(|c| c.apply(s)).collect();
            return (image.into_iter().collect::<Vec<_>>() == spec).then(|| s.clone());
        }
        for target in spec {
            for s2 in match_instances_from(&gen[i], target, s, 64) {
                if let Some(r) = go(gen, spec, i + 1, &s2) {
                    return Some(r);
                }
            }
        }
        None
    }
    go(&gen, &spec, 0, &Subst::new()).map(|s| s.iter().filter(|(v, t)| **t != Term::Var(**v)).map(|(v, t)| (*v, t.clone())).collect())
}

/// Equal up to a bijective renaming of the shared variables.
pub fn cores_equivalent(a: &ConflictingCore, b: &ConflictingCore) -> bool {
    let (ca, cb) = (a.clause_list(), b.clause_list());
    ca.len() == cb.len()
        && a.vars().len() == b.vars().len()
        && match_core(a, b).is_some_and(|s| s.is_renaming())
}

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub samples: usize,
    pub depth: usize,
    pub seed: u64,
    pub max_decisions: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { samples: 20, depth: 2, seed: 0x5eed, max_decisions: 100_000 }
    }
}

/// Whether the core is unsatisfiable under the sampled simultaneous
/// groundings: every shared variable mapped to its own fresh constant, then
/// `samples` random groundings by terms up to `depth`. `None` when the
/// ground check ran out of budget.
pub fn check_core(core: &ConflictingCore, cfg: &CheckConfig) -> Option<bool> {
    let vars: Vec<Var> = core.vars().into_iter().collect();
    let mut groundings = vec![vars.iter().map(|v| (*v, Term::constant(fresh_constant(*v as usize).as_str()))).collect::<Subst>()];
    let mut sig = core.signature();
    sig.ensure_constant();
    let terms = sig.ground_terms(cfg.depth);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    if !vars.is_empty() {
        for _ in 0..cfg.samples {
            groundings.push(vars.iter().map(|v| (*v, terms.choose(&mut rng).expect("a constant").clone())).collect());
        }
    }
    let mut verdict = Some(true);
    for tau in groundings {
        let ground: Vec<Clause> = core.clauses.iter().map(|c| c.clause.apply(&tau)).collect();
        match ground_satisfiable(&ground, cfg.max_decisions) {
            Some(false) => {}
            Some(true) => return Some(false),
            None => verdict = None,
        }
    }
    verdict
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saturation::{saturate_with, verify_refutation, SatOptions, SaturationResult};
    use crate::syntax::{parse_clause, parse_clauses};

    fn core(src: &str) -> ConflictingCore {
        ConflictingCore::from_clauses(parse_clauses(src).unwrap().into_iter().map(|c| (c, ClauseId(0))))
    }

    /// Parses a core whose clauses share variables by name.
    fn rigid(src: &str) -> ConflictingCore {
        let mut vars: BTreeMap<String, Var> = BTreeMap::new();
        let mut out = Vec::new();
        for line in src.lines() {
            let c = parse_clause(line).unwrap();
            let mut names_here = Vec::new();
            for tok in line.split(|ch: char| !ch.is_alphanumeric() && ch != '_') {
                if tok.starts_with(|ch: char| ch.is_ascii_uppercase()) && !names_here.contains(&tok.to_string()) {
                    names_here.push(tok.to_string());
                }
            }
            let map: Subst = names_here
                .iter()
                .enumerate()
                .map(|(i, n)| {
                    let k = vars.len() as Var;
                    (i as Var, Term::Var(*vars.entry(n.clone()).or_insert(k)))
                })
                .collect();
            out.push((c.rename(&|v| match map.get(v) {
                Some(Term::Var(w)) => *w,
                _ => v,
            }), ClauseId(0)));
        }
        ConflictingCore::from_clauses(out)
    }

    #[test]
    fn check_core_examples() {
        let cfg = CheckConfig::default();
        assert_eq!(check_core(&core("-> p(a).\np(a) -> ."), &cfg), Some(true));
        assert_eq!(check_core(&core("-> p(a).\nq(a) -> ."), &cfg), Some(false));
        let yz = rigid("-> p(Y, a).\n-> p(Z, b).\np(Y, a), p(Z, b) -> .");
        assert_eq!(check_core(&yz, &cfg), Some(true));
    }

    #[test]
    fn grounding_is_shared() {
        let c = rigid("-> p(Y).\np(Y) -> .");
        assert_eq!(check_core(&c, &CheckConfig::default()), Some(true));
        // grounding each clause on its own admits a model
        let apart = vec![parse_clause("-> p(a).").unwrap(), parse_clause("p(b) -> .").unwrap()];
        assert_eq!(ground_satisfiable(&apart, 10), Some(true));
    }

    fn refute(src: &str) -> (ClauseSet, Refutation) {
        let n = ClauseSet::from_clauses(parse_clauses(src).unwrap());
        let r = saturate_with(&n, &SatOptions::default()).unwrap();
        let SaturationResult::Refutation(p) = r else { panic!("no refutation") };
        verify_refutation(&p, &n).unwrap();
        (n, p)
    }

    #[test]
    fn general_core_from_refutation() {
        let (n, p) = refute("-> p(X, X2).\np(Y, a), p(Z, b) -> .");
        let c = extract_core(&p).unwrap();
        assert!(c.origins_match(&n));
        let yz = rigid("-> p(Y, a).\n-> p(Z, b).\np(Y, a), p(Z, b) -> .");
        assert!(cores_equivalent(&c, &yz), "{c}");
        let ba = core("-> p(b, a).\n-> p(a, b).\np(b, a), p(a, b) -> .");
        let tau = match_core(&c, &ba).unwrap();
        assert_eq!(instantiate_core(&c, &tau).clause_list(), ba.clause_list());
        assert_eq!(check_core(&c, &CheckConfig::default()), Some(true));
    }

    #[test]
    fn tokens_pair_resolved_literals() {
        let (_, p) = refute("-> q(a).\nq(X) -> r(X).\nr(a) -> .");
        let c = extract_core(&p).unwrap();
        let all: Vec<&Tokens> = c.clauses.iter().flat_map(|k| k.tokens.iter()).collect();
        assert_eq!(all.len(), 4);
        for t in &all {
            assert_eq!(t.len(), 1);
            assert_eq!(all.iter().filter(|u| *u == t).count(), 2);
        }
    }

    #[test]
    fn trivial_refutation() {
        let (_, p) = refute("-> .");
        let c = extract_core(&p).unwrap();
        assert_eq!(c.clause_list(), vec![Clause::empty()]);
    }

    #[test]
    fn identity_instantiation() {
        let c = rigid("-> p(Y, a).\np(Y, a) -> .");
        assert_eq!(instantiate_core(&c, &Subst::new()), c);
        let tau = Subst::single(0, Term::constant("b"));
        let g = instantiate_core(&c, &tau);
        assert_eq!(check_core(&g, &CheckConfig::default()), Some(true));
    }
}
