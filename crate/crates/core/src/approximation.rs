//! Over-approximation into monadic shallow linear Horn clauses.
//!
//! Four rewrite rules act on one clause at a time:
//!
//! * Monadic: `P(t1,..,tn)` becomes `T(f_P(t1,..,tn))`.
//! * Horn: `G -> E1,..,En` keeps a single positive literal.
//! * Shallow: `G -> E[s]_p` becomes `S(x),G1 -> E[x]_p` and `G2 -> S(s)`.
//! * Linear: a second occurrence of `x` in the positive atom becomes a fresh
//!   `x'`, duplicating the negative atoms that mention `x`.
//!
//! Every application is recorded as an [`ApproxStep`] so that lifting and
//! refinement can walk from the approximation back to the input.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::clause_set::{ClauseId, ClauseSet};
use crate::error::{Error, Result};
use crate::symbols::{is_projection_fn, is_shallow_pred, projected_pred, projection_fn, shallow_pred};
use crate::symbols::PROJECTION_PRED;
use crate::terms::{Atom, Clause, Position, Symbol, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepKind {
    Monadic {
        pred: Symbol,
    },
    Horn {
        /// Index into the ancestor's positive atoms.
        kept: usize,
    },
    Shallow {
        /// Index into the ancestor's positive atoms.
        atom: usize,
        pos: Position,
        sub: Term,
        pred: Symbol,
        var: Var,
        /// Indices into the ancestor's negative atoms.
        gamma1: Vec<usize>,
        gamma2: Vec<usize>,
    },
    Linear {
        atom: usize,
        var: Var,
        fresh: Var,
        p: Position,
        q: Position,
    },
}

impl StepKind {
    pub fn name(&self) -> &'static str {
        match self {
            StepKind::Monadic { .. } => "monadic",
            StepKind::Horn { .. } => "horn",
            StepKind::Shallow { .. } => "shallow",
            StepKind::Linear { .. } => "linear",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxStep {
    pub kind: StepKind,
    pub ancestor: ClauseId,
    pub ancestor_clause: Clause,
    /// For Shallow: `[S(x),G1 -> E[x]_p, G2 -> S(s)]`.
    pub produced: Vec<ClauseId>,
}

impl fmt::Display for ApproxStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let produced: Vec<String> = self.produced.iter().map(|p| p.0.to_string()).collect();
        let list = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{} {} -> {}", self.kind.name(), self.ancestor.0, produced.join(","))?;
        match &self.kind {
            StepKind::Monadic { pred } => write!(f, " pred={pred}"),
            StepKind::Horn { kept } => write!(f, " kept={kept}"),
            StepKind::Shallow { atom, pos, sub, pred, var, gamma1, gamma2 } => write!(
                f,
                " atom={atom} pos={pos} sub={sub} pred={pred} var=X{var} g1=[{}] g2=[{}]",
                list(gamma1),
                list(gamma2)
            ),
            StepKind::Linear { atom, var, fresh, p, q } => {
                write!(f, " atom={atom} var=X{var} fresh=X{fresh} p={p} q={q}")
            }
        }
    }
}

/// Order in which the Shallow and Linear rules are tried on a clause.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RuleOrder {
    /// Remove non-linear positive occurrences before extracting subterms.
    #[default]
    LinearFirst,
    /// Extract subterms first, linearise afterwards.
    ShallowFirst,
}

#[derive(Clone, Debug, Default)]
pub struct ApproxOptions {
    pub order: RuleOrder,
}

#[derive(Clone, Debug)]
pub struct ApproxTrace {
    pub initial: ClauseSet,
    pub steps: Vec<ApproxStep>,
    pub result: ClauseSet,
    pub options: ApproxOptions,
}

impl ApproxTrace {
    /// Step that produced `id`, if any.
    pub fn producer(&self, id: ClauseId) -> Option<&ApproxStep> {
        self.steps.iter().find(|s| s.produced.contains(&id))
    }

    /// Follows ancestor links back to a clause of the initial set.
    pub fn root_of(&self, mut id: ClauseId) -> ClauseId {
        while let Some(s) = self.producer(id) {
            id = s.ancestor;
        }
        id
    }

    /// Predicates encoded through projection functions.
    pub fn projected_predicates(&self) -> Vec<Symbol> {
        self.steps
            .iter()
            .filter_map(|s| match &s.kind {
                StepKind::Monadic { pred } => Some(pred.clone()),
                _ => None,
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Re-applies every recorded step to the initial set.
    pub fn replay(&self) -> Result<ClauseSet> {
        let mut n = self.initial.clone();
        for step in &self.steps {
            let (next, again) = apply_step(&n, step.ancestor, &step.kind)?;
            if again.produced != step.produced || again.ancestor_clause != step.ancestor_clause {
                return Err(Error::Precondition(format!("replay diverged at step `{step}`")));
            }
            n = next;
        }
        Ok(n)
    }
}

impl fmt::Display for ApproxTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Reads the line format written by the `Display` impl of [`ApproxTrace`]
/// and replays it on `initial`. Blank lines and `%` comments are skipped.
pub fn parse_trace(initial: &ClauseSet, text: &str, options: ApproxOptions) -> Result<ApproxTrace> {
    let mut cur = initial.clone();
    let mut steps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, col: 1, msg };
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() < 4 || words[2] != "->" {
            return Err(err(format!("expected `kind ancestor -> produced ...`, got `{line}`")));
        }
        let ancestor = ClauseId(words[1].parse().map_err(|_| err(format!("bad clause id `{}`", words[1])))?);
        let fields: BTreeMap<&str, &str> = words[4..].iter().filter_map(|w| w.split_once('=')).collect();
        let field = |k: &str| fields.get(k).copied().ok_or_else(|| err(format!("missing `{k}=`")));
        let num = |k: &str| -> Result<usize> { field(k)?.parse().map_err(|_| err(format!("bad `{k}=`"))) };
        let var = |k: &str| -> Result<Var> {
            field(k)?.strip_prefix('X').and_then(|v| v.parse().ok()).ok_or_else(|| err(format!("bad `{k}=`")))
        };
        let pos = |k: &str| -> Result<Position> {
            let f = field(k)?;
            if f == "e" {
                return Ok(Position::root());
            }
            f.split('.')
                .map(|p| p.parse::<usize>().ok().and_then(|p| p.checked_sub(1)))
                .collect::<Option<Vec<usize>>>()
                .map(Position)
                .ok_or_else(|| err(format!("bad `{k}=`")))
        };
        let list = |k: &str| -> Result<Vec<usize>> {
            let f = field(k)?.trim_start_matches('[').trim_end_matches(']');
            f.split(',').filter(|x| !x.is_empty()).map(|x| x.parse().map_err(|_| err(format!("bad `{k}=`")))).collect()
        };
        let kind = match words[0] {
            "monadic" => StepKind::Monadic { pred: Symbol::new(field("pred")?) },
            "horn" => StepKind::Horn { kept: num("kept")? },
            "shallow" => {
                let atom = num("atom")?;
                let pos = pos("pos")?;
                let c = get(&cur, ancestor)?;
                let sub = c
                    .pos
                    .get(atom)
                    .and_then(|e| e.subterm_at(pos.as_slice()))
                    .cloned()
                    .ok_or_else(|| err(format!("no subterm at {pos} of atom {atom}")))?;
                StepKind::Shallow {
                    atom,
                    pos,
                    sub,
                    pred: Symbol::new(field("pred")?),
                    var: var("var")?,
                    gamma1: list("g1")?,
                    gamma2: list("g2")?,
                }
            }
            "linear" => StepKind::Linear { atom: num("atom")?, var: var("var")?, fresh: var("fresh")?, p: pos("p")?, q: pos("q")? },
            k => return Err(err(format!("unknown step kind `{k}`"))),
        };
        let (next, step) = apply_step(&cur, ancestor, &kind)?;
        let produced: Vec<String> = step.produced.iter().map(|p| p.0.to_string()).collect();
        if produced.join(",") != words[3] {
            return Err(err(format!("step produces {} instead of {}", produced.join(","), words[3])));
        }
        cur = next;
        steps.push(step);
    }
    Ok(ApproxTrace { initial: initial.clone(), steps, result: cur, options })
}

fn get(n: &ClauseSet, id: ClauseId) -> Result<&Clause> {
    n.get(id).ok_or_else(|| Error::RuleNotApplicable(format!("no clause {id}")))
}

fn replace(n: &ClauseSet, id: ClauseId, by: Vec<Clause>) -> (ClauseSet, Vec<ClauseId>) {
    let mut out = n.clone();
    out.remove(id);
    let ids = by.into_iter().map(|c| out.push(c)).collect();
    (out, ids)
}

/// Applies one step described by `kind` to clause `id`.
pub fn apply_step(n: &ClauseSet, id: ClauseId, kind: &StepKind) -> Result<(ClauseSet, ApproxStep)> {
    let c = get(n, id)?.clone();
    let produced_clauses = match kind {
        StepKind::Monadic { pred } => {
            if !c.atoms().any(|a| &a.pred == pred && a.arity() > 1) {
                return Err(Error::RuleNotApplicable(format!("no non-monadic {pred} in {c}")));
            }
            vec![project_clause(&c, pred)]
        }
        StepKind::Horn { kept } => {
            if c.pos.len() < 2 || *kept >= c.pos.len() {
                return Err(Error::RuleNotApplicable(format!("horn step on {c}")));
            }
            vec![Clause::new(c.neg.clone(), vec![c.pos[*kept].clone()])]
        }
        StepKind::Shallow { atom, pos, sub, pred, var, gamma1, gamma2 } => {
            let e = c.pos.get(*atom).ok_or_else(|| Error::RuleNotApplicable(format!("atom {atom} of {c}")))?;
            if pos.is_root() {
                return Err(Error::RuleNotApplicable("top position".into()));
            }
            let s = e.subterm_at(pos.as_slice()).ok_or_else(|| Error::InvalidPosition(format!("{pos} in {e}")))?;
            if s.is_var() || s != sub {
                return Err(Error::RuleNotApplicable(format!("subterm at {pos} of {e} is not {sub}")));
            }
            if c.vars().contains(var) {
                return Err(Error::RuleNotApplicable(format!("X{var} is not fresh in {c}")));
            }
            let covered: BTreeSet<usize> = gamma1.iter().chain(gamma2).copied().collect();
            if covered != (0..c.neg.len()).collect() || covered.iter().any(|i| *i >= c.neg.len()) {
                return Err(Error::RuleNotApplicable("split does not cover the negative atoms".into()));
            }
            let ex = e.replace_at(pos.as_slice(), Term::Var(*var))?;
            let mut pos1: Vec<Atom> = c.pos.clone();
            pos1[*atom] = ex;
            let mut neg1: Vec<Atom> = gamma1.iter().map(|i| c.neg[*i].clone()).collect();
            neg1.push(Atom { pred: pred.clone(), args: vec![Term::Var(*var)] });
            let neg2: Vec<Atom> = gamma2.iter().map(|i| c.neg[*i].clone()).collect();
            let mut pos2: Vec<Atom> = c.pos.clone();
            pos2[*atom] = Atom { pred: pred.clone(), args: vec![s.clone()] };
            vec![Clause::new(neg1, pos1), Clause::new(neg2, pos2)]
        }
        StepKind::Linear { atom, var, fresh, p, q } => {
            let e = c.pos.get(*atom).ok_or_else(|| Error::RuleNotApplicable(format!("atom {atom} of {c}")))?;
            let at = |pp: &Position| e.subterm_at(pp.as_slice()) == Some(&Term::Var(*var));
            if p == q || !at(p) || !at(q) {
                return Err(Error::RuleNotApplicable(format!("{p},{q} are not two occurrences of X{var} in {e}")));
            }
            if c.vars().contains(fresh) {
                return Err(Error::RuleNotApplicable(format!("X{fresh} is not fresh in {c}")));
            }
            let mut pos1 = c.pos.clone();
            pos1[*atom] = e.replace_at(q.as_slice(), Term::Var(*fresh))?;
            let mut neg1 = c.neg.clone();
            if c.neg.iter().any(|a| a.vars().contains(var)) {
                let ren = crate::terms::Subst::single(*var, Term::Var(*fresh));
                neg1.extend(c.neg.iter().map(|a| a.apply(&ren)));
            }
            vec![Clause::new(neg1, pos1)]
        }
    };
    let (out, produced) = replace(n, id, produced_clauses);
    Ok((out, ApproxStep { kind: kind.clone(), ancestor: id, ancestor_clause: c, produced }))
}

/// Rewrites every clause containing a non-monadic `pred` atom.
pub fn monadic_step(n: &ClauseSet, pred: &Symbol) -> Result<(ClauseSet, Vec<ApproxStep>)> {
    let targets: Vec<ClauseId> =
        n.iter().filter(|(_, c)| c.atoms().any(|a| &a.pred == pred)).map(|(id, _)| id).collect();
    let arity = n.signature().predicates.get(pred).copied().unwrap_or(0);
    if arity <= 1 {
        if targets.is_empty() {
            return Ok((n.clone(), vec![]));
        }
        return Err(Error::RuleNotApplicable(format!("{pred} is monadic")));
    }
    let mut cur = n.clone();
    let mut steps = Vec::new();
    for id in targets {
        let (next, step) = apply_step(&cur, id, &StepKind::Monadic { pred: pred.clone() })?;
        cur = next;
        steps.push(step);
    }
    Ok((cur, steps))
}

pub fn horn_step(n: &ClauseSet, id: ClauseId, kept: usize) -> Result<(ClauseSet, ApproxStep)> {
    apply_step(n, id, &StepKind::Horn { kept })
}

/// Shallow step on positive atom `atom` at `pos`. Without an explicit split
/// the sharing heuristic of [`default_split`] is used; the fresh predicate
/// is the next unused `S_i`.
pub fn shallow_step(
    n: &ClauseSet,
    id: ClauseId,
    atom: usize,
    pos: &Position,
    split: Option<(Vec<usize>, Vec<usize>)>,
) -> Result<(ClauseSet, ApproxStep)> {
    let c = get(n, id)?;
    let e = c.pos.get(atom).ok_or_else(|| Error::RuleNotApplicable(format!("atom {atom} of {c}")))?;
    let sub = e.subterm_at(pos.as_slice()).ok_or_else(|| Error::InvalidPosition(format!("{pos} in {e}")))?.clone();
    let var = c.next_var();
    let (gamma1, gamma2) = split.unwrap_or_else(|| default_split(c, atom, pos));
    let pred = shallow_pred(next_shallow_index(n));
    apply_step(n, id, &StepKind::Shallow { atom, pos: pos.clone(), sub, pred, var, gamma1, gamma2 })
}

/// Linear step renaming the occurrence of `var` at `q`.
pub fn linear_step(
    n: &ClauseSet,
    id: ClauseId,
    atom: usize,
    var: Var,
    p: &Position,
    q: &Position,
) -> Result<(ClauseSet, ApproxStep)> {
    let fresh = get(n, id)?.next_var();
    apply_step(n, id, &StepKind::Linear { atom, var, fresh, p: p.clone(), q: q.clone() })
}

/// Assigns each negative atom to the side it shares variables with: the
/// `E[x]_p` side, the extracted-term side, or both. Atoms sharing with
/// neither go to the first side.
pub fn default_split(c: &Clause, atom: usize, pos: &Position) -> (Vec<usize>, Vec<usize>) {
    let e = &c.pos[atom];
    let sub_vars = e.subterm_at(pos.as_slice()).map(Term::vars).unwrap_or_default();
    let mut rest_vars: BTreeSet<Var> = BTreeSet::new();
    if let Ok(ex) = e.replace_at(pos.as_slice(), Term::constant("_")) {
        rest_vars = ex.vars();
    }
    for (i, a) in c.pos.iter().enumerate() {
        if i != atom {
            rest_vars.extend(a.vars());
        }
    }
    let (mut g1, mut g2) = (Vec::new(), Vec::new());
    for (i, a) in c.neg.iter().enumerate() {
        let vs = a.vars();
        let left = !vs.is_disjoint(&rest_vars);
        let right = !vs.is_disjoint(&sub_vars);
        if left || !right {
            g1.push(i);
        }
        if right {
            g2.push(i);
        }
    }
    (g1, g2)
}

fn next_shallow_index(n: &ClauseSet) -> usize {
    n.signature()
        .predicates
        .keys()
        .filter(|p| is_shallow_pred(p))
        .filter_map(|p| p.as_str()[2..].parse::<usize>().ok())
        .map(|i| i + 1)
        .max()
        .unwrap_or(0)
}

/// First positive atom with a term of depth at least 2, and the position of
/// a complex argument of that term.
fn deep_position(c: &Clause) -> Option<(usize, Position)> {
    for (ai, a) in c.pos.iter().enumerate() {
        for (ti, t) in a.args.iter().enumerate() {
            if t.depth() >= 2 {
                if let Term::App(_, args) = t {
                    let j = args.iter().position(|s| s.depth() >= 1)?;
                    return Some((ai, Position(vec![ti, j])));
                }
            }
        }
    }
    None
}

/// First variable occurring twice across the positive atoms, with two of
/// its positions in one atom. Occurrences in different atoms only arise in
/// non-Horn clauses, which the Horn rule has already removed.
fn repeated_var(c: &Clause) -> Option<(usize, Var, Position, Position)> {
    for (ai, a) in c.pos.iter().enumerate() {
        let mut vars = Vec::new();
        a.collect_vars(&mut vars);
        for v in vars {
            let ps = a.positions_of(v);
            if ps.len() >= 2 {
                return Some((ai, v, Position(ps[0].clone()), Position(ps[1].clone())));
            }
        }
    }
    None
}

/// Approximates `n` into mslH with the default options.
pub fn approximate(n: &ClauseSet) -> (ClauseSet, ApproxTrace) {
    approximate_with(n, &ApproxOptions::default())
}

pub fn approximate_with(n: &ClauseSet, opts: &ApproxOptions) -> (ClauseSet, ApproxTrace) {
    fn record(cur: &mut ClauseSet, steps: &mut Vec<ApproxStep>, r: Result<(ClauseSet, ApproxStep)>) {
        let (next, step) = r.expect("step chosen by its own applicability test");
        *cur = next;
        steps.push(step);
    }
    let mut cur = n.clone();
    let mut steps = Vec::new();

    let non_monadic: Vec<Symbol> =
        n.signature().predicates.iter().filter(|(_, a)| **a > 1).map(|(p, _)| p.clone()).collect();
    for p in &non_monadic {
        let (next, more) = monadic_step(&cur, p).expect("non-monadic predicate");
        cur = next;
        steps.extend(more);
    }

    loop {
        let next = cur.iter().find(|(_, c)| !c.is_horn()).map(|(id, _)| id);
        let Some(id) = next else { break };
        let r = horn_step(&cur, id, 0);
        record(&mut cur, &mut steps, r);
    }

    loop {
        let pending = cur.iter().find(|(_, c)| !c.is_shallow() || !c.is_linear()).map(|(id, c)| (id, c.clone()));
        let Some((id, c)) = pending else { break };
        let linear_now = match opts.order {
            RuleOrder::LinearFirst => !c.is_linear(),
            RuleOrder::ShallowFirst => c.is_shallow(),
        };
        let r = if linear_now {
            let (atom, v, p, q) = repeated_var(&c).expect("non-linear clause");
            linear_step(&cur, id, atom, v, &p, &q)
        } else {
            let (atom, pos) = deep_position(&c).expect("non-shallow clause");
            shallow_step(&cur, id, atom, &pos, None)
        };
        record(&mut cur, &mut steps, r);
    }
    let trace = ApproxTrace { initial: n.clone(), steps, result: cur.clone(), options: opts.clone() };
    (cur, trace)
}

pub fn project_atom(a: &Atom, pred: &Symbol) -> Atom {
    if &a.pred == pred && a.arity() > 1 {
        Atom {
            pred: Symbol::new(PROJECTION_PRED),
            args: vec![Term::App(projection_fn(pred), a.args.clone())],
        }
    } else {
        a.clone()
    }
}

pub fn project_clause(c: &Clause, pred: &Symbol) -> Clause {
    Clause::new(
        c.neg.iter().map(|a| project_atom(a, pred)).collect(),
        c.pos.iter().map(|a| project_atom(a, pred)).collect(),
    )
}

pub fn project_set(n: &ClauseSet, pred: &Symbol) -> ClauseSet {
    let mut out = ClauseSet::new();
    for (id, c) in n.iter() {
        out.insert(id, project_clause(c, pred));
    }
    out.reserve_ids_below(n.next_id());
    out
}

fn contains_projection(t: &Term) -> bool {
    match t {
        Term::Var(_) => false,
        Term::App(f, args) => is_projection_fn(f) || args.iter().any(contains_projection),
    }
}

/// Inverts projection on one atom. With `only`, just that predicate is
/// reverted and other projected atoms stay as they are.
pub fn unproject_atom_for(a: &Atom, only: Option<&Symbol>) -> Result<Atom> {
    if a.pred.as_str() == PROJECTION_PRED && a.arity() == 1 {
        if let Term::App(f, args) = &a.args[0] {
            if let Some(p) = projected_pred(f) {
                if args.iter().any(contains_projection) {
                    return Err(Error::MalformedProjection(a.to_string()));
                }
                if only.map_or(true, |q| *q == p) {
                    return Ok(Atom { pred: p, args: args.clone() });
                }
                return Ok(a.clone());
            }
        }
    }
    if a.args.iter().any(contains_projection) {
        return Err(Error::MalformedProjection(a.to_string()));
    }
    Ok(a.clone())
}

pub fn unproject_atom(a: &Atom) -> Result<Atom> {
    unproject_atom_for(a, None)
}

pub fn unproject_clause_for(c: &Clause, only: Option<&Symbol>) -> Result<Clause> {
    Ok(Clause::new(
        c.neg.iter().map(|a| unproject_atom_for(a, only)).collect::<Result<_>>()?,
        c.pos.iter().map(|a| unproject_atom_for(a, only)).collect::<Result<_>>()?,
    ))
}

pub fn unproject_clause(c: &Clause) -> Result<Clause> {
    unproject_clause_for(c, None)
}

pub fn unproject_set(n: &ClauseSet) -> Result<ClauseSet> {
    let mut out = ClauseSet::new();
    for (id, c) in n.iter() {
        out.insert(id, unproject_clause(c)?);
    }
    out.reserve_ids_below(n.next_id());
    Ok(out)
}

/// Termination measure of a single step, as (before, after): the count of
/// non-monadic atoms, the count of non-Horn clauses, the sizes of the
/// rewritten positive atom, or the count of repeated positive occurrences.
pub fn step_measure(step: &ApproxStep, after: &ClauseSet) -> (Vec<usize>, Vec<usize>) {
    let produced: Vec<&Clause> = step.produced.iter().filter_map(|id| after.get(*id)).collect();
    let anc = &step.ancestor_clause;
    match &step.kind {
        StepKind::Monadic { .. } => {
            let count = |c: &Clause| c.atoms().filter(|a| a.arity() > 1).count();
            (vec![count(anc)], produced.iter().map(|c| count(c)).collect())
        }
        StepKind::Horn { .. } => {
            let count = |c: &Clause| usize::from(!c.is_horn());
            (vec![count(anc)], produced.iter().map(|c| count(c)).collect())
        }
        StepKind::Shallow { atom, pos, var, pred, sub, .. } => {
            let e = &anc.pos[*atom];
            let ex = e.replace_at(pos.as_slice(), Term::Var(*var)).expect("recorded position");
            let sx = Atom { pred: pred.clone(), args: vec![sub.clone()] };
            let present = produced.iter().any(|c| c.pos.contains(&ex)) && produced.iter().any(|c| c.pos.contains(&sx));
            if !present {
                return (vec![0], vec![0]);
            }
            (vec![e.size()], vec![ex.size(), sx.size()])
        }
        StepKind::Linear { .. } => {
            let dup = |c: &Clause| {
                let mut v = Vec::new();
                c.pos.iter().for_each(|a| a.collect_vars(&mut v));
                let n = v.len();
                v.sort_unstable();
                v.dedup();
                n - v.len()
            };
            (vec![dup(anc)], produced.iter().map(|c| dup(c)).collect())
        }
    }
}

/// Multiset extension of `>` on naturals: `a` is strictly greater than `b`.
pub fn multiset_greater(a: &[usize], b: &[usize]) -> bool {
    let mut count: BTreeMap<usize, i64> = BTreeMap::new();
    a.iter().for_each(|x| *count.entry(*x).or_default() += 1);
    b.iter().for_each(|x| *count.entry(*x).or_default() -= 1);
    count.retain(|_, c| *c != 0);
    if count.is_empty() {
        return false;
    }
    // the largest element where they differ must be in excess in `a`
    let (_, c) = count.iter().next_back().expect("non-empty");
    *c > 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_clauses, parse_internal};
    use crate::terms::variant;

    fn set(src: &str) -> ClauseSet {
        ClauseSet::from_clauses(parse_clauses(src).unwrap())
    }

    fn same_clauses(a: &ClauseSet, b: &ClauseSet) -> bool {
        let mut rest: Vec<Clause> = b.clauses().cloned().collect();
        if a.len() != rest.len() {
            return false;
        }
        for c in a.clauses() {
            match rest.iter().position(|d| variant(c, d)) {
                Some(i) => {
                    rest.remove(i);
                }
                None => return false,
            }
        }
        true
    }

    #[test]
    fn monadic_projects_every_occurrence() {
        let n = set("-> p(X, Y).\np(Y, a), p(Z, b) -> .");
        let (m, steps) = monadic_step(&n, &Symbol::new("p")).unwrap();
        assert_eq!(steps.len(), 2);
        assert!(same_clauses(&m, &set("-> T(f_p(X, Y)).\nT(f_p(Y, a)), T(f_p(Z, b)) -> .")));
        let q = set("-> q(a).");
        assert!(monadic_step(&q, &Symbol::new("q")).is_err());
        assert_eq!(monadic_step(&q, &Symbol::new("r")).unwrap().1.len(), 0);
    }

    #[test]
    fn horn_keeps_selected_literal() {
        let n = set("p(a, b) -> .\n-> p(X, b), p(a, Y).");
        let (m, step) = horn_step(&n, ClauseId(1), 0).unwrap();
        assert_eq!(step.ancestor, ClauseId(1));
        assert!(same_clauses(&m, &set("p(a, b) -> .\n-> p(X, b).")));
        assert!(horn_step(&n, ClauseId(0), 0).is_err());
    }

    #[test]
    fn shallow_split_by_sharing() {
        let n = set("p(X), q(Y) -> r(X, f(Y)).");
        let (m, step) = shallow_step(&n, ClauseId(0), 0, &Position(vec![1]), None).unwrap();
        assert!(same_clauses(&m, &set("S_0(Z), p(X) -> r(X, Z).\nq(Y) -> S_0(f(Y)).")));
        assert_eq!(step.produced.len(), 2);
        assert!(shallow_step(&n, ClauseId(0), 0, &Position(vec![0]), None).is_err());
    }

    #[test]
    fn linear_duplicates_only_when_needed() {
        let n = set("-> p(X, X).");
        let (m, _) = linear_step(&n, ClauseId(0), 0, 0, &Position(vec![0]), &Position(vec![1])).unwrap();
        assert!(same_clauses(&m, &set("-> p(X, Y).")));
        let n = set("s(X) -> t(f(X, g(X))).");
        let (m, _) = linear_step(&n, ClauseId(0), 0, 0, &Position(vec![0, 0]), &Position(vec![0, 1, 0])).unwrap();
        assert!(same_clauses(&m, &set("s(X), s(Y) -> t(f(X, g(Y))).")));
    }

    #[test]
    fn intro_approximation() {
        let n = ClauseSet::from_clauses(
            parse_internal(
                "s(X) -> p(X, g(X)).\n-> s(a).\n-> s(b).\n-> s(g(X)).\np(a, g(b)) -> .\np(g(X), g(g(X))) -> .",
            )
            .unwrap()
            .clauses
            .into_iter()
            .map(|(_, c)| c),
        );
        let expected = set(
            "s(X), S_0(Y) -> T(f_p(X, Y)).\ns(X) -> S_0(g(X)).\n-> s(a).\n-> s(b).\n-> s(g(X)).\n\
             T(f_p(a, g(b))) -> .\nT(f_p(g(X), g(g(X)))) -> .",
        );
        for order in [RuleOrder::LinearFirst, RuleOrder::ShallowFirst] {
            let (m, trace) = approximate_with(&n, &ApproxOptions { order });
            assert!(m.classify().is_mslh());
            assert!(same_clauses(&m, &expected), "{order:?}\n{m}");
            let replayed = trace.replay().unwrap();
            assert_eq!(replayed.sorted_clauses(), m.sorted_clauses());
        }
        let (_, trace) = approximate(&n);
        let kinds: Vec<&str> = trace.steps.iter().map(|s| s.kind.name()).collect();
        assert_eq!(kinds, ["monadic", "monadic", "monadic", "linear", "shallow"]);
    }

    #[test]
    fn parity_approximation() {
        let n = set("-> p(a).\np(f(a)) -> .\np(X) -> p(f(f(X))).\np(f(f(X))) -> p(X).");
        let (m, _) = approximate(&n);
        let expected =
            set("-> p(a).\np(f(a)) -> .\nS_0(Y) -> p(f(Y)).\np(X) -> S_0(f(X)).\np(f(f(X))) -> p(X).");
        assert!(same_clauses(&m, &expected), "{m}");
    }

    #[test]
    fn mslh_input_is_untouched() {
        let n = set("-> p(a).\np(X) -> q(f(X)).");
        let (m, trace) = approximate(&n);
        assert!(trace.steps.is_empty());
        assert_eq!(m.sorted_clauses(), n.sorted_clauses());
    }

    #[test]
    fn projection_round_trip() {
        let c = parse_clauses("p(X, a) -> q(X), p(a, b).").unwrap().remove(0);
        let p = project_clause(&c, &Symbol::new("p"));
        assert_eq!(unproject_clause(&p).unwrap(), c);
        let bad = parse_clauses("-> q(f_p(a, b)).").unwrap().remove(0);
        assert!(unproject_clause(&bad).is_err());
    }

    #[test]
    fn trace_text_round_trip() {
        let n = set("s(X) -> p(X, g(X)).\n-> s(a).\n-> q(X, X), r(f(X)).");
        let (m, trace) = approximate(&n);
        let back = parse_trace(&n, &trace.to_string(), ApproxOptions::default()).unwrap();
        assert_eq!(back.steps, trace.steps);
        assert_eq!(back.result.sorted_clauses(), m.sorted_clauses());
        assert!(parse_trace(&n, "horn 9 -> 10 kept=0", ApproxOptions::default()).is_err());
    }

    #[test]
    fn measures_decrease() {
        let n = set("s(X) -> p(X, g(X)), q(h(h(X))).\n-> r(X, f(X, g(X))).");
        let (_, trace) = approximate(&n);
        let mut cur = trace.initial.clone();
        for step in &trace.steps {
            let (next, _) = apply_step(&cur, step.ancestor, &step.kind).unwrap();
            let (b, a) = step_measure(step, &next);
            assert!(multiset_greater(&b, &a), "{step}: {b:?} vs {a:?}");
            cur = next;
        }
    }
}
