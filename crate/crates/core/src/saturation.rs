//! Ordered resolution with selection for Horn clause sets.
//!
//! Negative atoms over shallow-introduced predicates are always selected,
//! then negative atoms with a non-variable argument; otherwise inferences
//! use (strictly) maximal literals under
//! [`crate::ordering`]. Every derived clause is a node of a proof arena, so
//! refutations can be extracted, checked, turned into conflicting cores and
//! exported as DOT graphs.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::fmt::Write as _;

use crate::clause_set::{ClauseId, ClauseSet};
use crate::error::{Error, Result};
use crate::ordering::is_maximal;
use crate::symbols::is_shallow_pred;
use crate::terms::{match_atom, mgu_atoms, variant, Atom, Clause, LitRef, Subst, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_clauses: usize,
    pub max_depth: usize,
    pub max_steps: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_clauses: 50_000, max_depth: 12, max_steps: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    Input(ClauseId),
    /// `left` contributes its positive atom `left_lit`, `right` its negative
    /// atom `right_lit`.
    Resolution {
        left: usize,
        right: usize,
        left_lit: usize,
        right_lit: usize,
        sigma_left: Subst,
        sigma_right: Subst,
    },
    /// Drops `dropped`, which equals `kept` under `sigma`.
    Factoring { parent: usize, sigma: Subst, kept: LitRef, dropped: LitRef },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofNode {
    pub conclusion: Clause,
    pub rule: Rule,
    /// For each conclusion literal (negative ones first), the parent slot
    /// (0 = left or sole parent, 1 = right) and literal it descends from.
    pub origin: Vec<(u8, LitRef)>,
}

impl ProofNode {
    pub fn parents(&self) -> Vec<usize> {
        match &self.rule {
            Rule::Input(_) => vec![],
            Rule::Resolution { left, right, .. } => vec![*left, *right],
            Rule::Factoring { parent, .. } => vec![*parent],
        }
    }
}

/// A proof DAG rooted at the empty clause. Parents precede children and the
/// root is the last node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refutation {
    pub nodes: Vec<ProofNode>,
}

impl Refutation {
    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn inputs(&self) -> BTreeSet<ClauseId> {
        self.nodes
            .iter()
            .filter_map(|n| match n.rule {
                Rule::Input(id) => Some(id),
                _ => None,
            })
            .collect()
    }

    /// Maximal term depth over all clauses of the proof.
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.conclusion.depth()).max().unwrap_or(0)
    }

    /// Structural key used to tell refutations apart.
    pub fn key(&self) -> String {
        fn go(r: &Refutation, i: usize, out: &mut String) {
            match &r.nodes[i].rule {
                Rule::Input(id) => {
                    let _ = write!(out, "i{}", id.0);
                }
                Rule::Resolution { left, right, left_lit, right_lit, .. } => {
                    let _ = write!(out, "r{left_lit}.{right_lit}(");
                    go(r, *left, out);
                    out.push(',');
                    go(r, *right, out);
                    out.push(')');
                }
                Rule::Factoring { parent, kept, dropped, .. } => {
                    let _ = write!(out, "f{kept:?}{dropped:?}(");
                    go(r, *parent, out);
                    out.push(')');
                }
            }
        }
        let mut s = String::new();
        go(self, self.root(), &mut s);
        s
    }

    /// True when every resolution on a shallow-predicate atom has an input
    /// clause as one of its parents.
    pub fn s_atoms_only_at_leaves(&self) -> bool {
        self.nodes.iter().all(|n| match &n.rule {
            Rule::Resolution { left, right, left_lit, .. } => {
                let a = &self.nodes[*left].conclusion.pos[*left_lit];
                !is_shallow_pred(&a.pred)
                    || matches!(self.nodes[*left].rule, Rule::Input(_))
                    || matches!(self.nodes[*right].rule, Rule::Input(_))
            }
            _ => true,
        })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph refutation {\n  node [shape=box];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let label = if n.conclusion.is_empty() { "⊥".to_string() } else { n.conclusion.to_string() };
            let tag = match &n.rule {
                Rule::Input(id) => format!("input {}", id.0),
                Rule::Resolution { .. } => "resolution".into(),
                Rule::Factoring { .. } => "factoring".into(),
            };
            let _ = writeln!(out, "  n{i} [label=\"{}\\n{}\"];", escape(&label), tag);
        }
        for (i, n) in self.nodes.iter().enumerate() {
            match &n.rule {
                Rule::Input(_) => {}
                Rule::Resolution { left, right, sigma_left, sigma_right, .. } => {
                    let _ = writeln!(out, "  n{left} -> n{i} [label=\"{}\"];", escape(&sigma_left.to_string()));
                    let _ = writeln!(out, "  n{right} -> n{i} [label=\"{}\"];", escape(&sigma_right.to_string()));
                }
                Rule::Factoring { parent, sigma, .. } => {
                    let _ = writeln!(out, "  n{parent} -> n{i} [label=\"{}\"];", escape(&sigma.to_string()));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Clone, Debug)]
pub enum SaturationResult {
    Refutation(Refutation),
    Saturated(ClauseSet),
    ResourceOut(String),
}

impl SaturationResult {
    pub fn is_refutation(&self) -> bool {
        matches!(self, SaturationResult::Refutation(_))
    }
}

#[derive(Clone, Debug, Default)]
pub struct SatOptions {
    pub limits: Limits,
    /// Reject input outside monadic shallow linear Horn.
    pub require_mslh: bool,
}

impl SatOptions {
    pub fn mslh() -> Self {
        SatOptions { limits: Limits::default(), require_mslh: true }
    }
}

/// Decides an mslH clause set.
pub fn saturate(n: &ClauseSet, limits: Limits) -> Result<SaturationResult> {
    saturate_with(n, &SatOptions { limits, require_mslh: true })
}

pub fn saturate_with(n: &ClauseSet, opts: &SatOptions) -> Result<SaturationResult> {
    check_input(n, opts.require_mslh)?;
    let mut s = Saturator::new(opts.limits, Mode::First);
    for (id, c) in n.iter() {
        s.add_input(id, c);
    }
    Ok(s.run())
}

/// Saturation of `base` (already saturated) together with `extra`, only
/// performing inferences that involve a descendant of `extra`.
pub fn saturate_with_support(base: &ClauseSet, extra: &ClauseSet, limits: Limits) -> Result<SaturationResult> {
    check_input(base, false)?;
    check_input(extra, false)?;
    let mut s = Saturator::new(limits, Mode::First);
    for (id, c) in base.iter() {
        s.add_active_input(id, c);
    }
    for (id, c) in extra.iter() {
        s.add_input(id, c);
    }
    Ok(s.run())
}

/// Saturation with the proof discipline in which shallow-predicate atoms
/// are resolved only between leaves. Selection of negative S-atoms and the
/// ordering already enforce it; this entry point additionally checks the
/// produced refutation.
pub fn leaf_s_discipline(n: &ClauseSet, limits: Limits) -> Result<SaturationResult> {
    let r = saturate(n, limits)?;
    if let SaturationResult::Refutation(p) = &r {
        if !p.s_atoms_only_at_leaves() {
            return Err(Error::MalformedProof("shallow atom resolved below the leaves".into()));
        }
    }
    Ok(r)
}

fn check_input(n: &ClauseSet, mslh: bool) -> Result<()> {
    if let Some((id, c)) = n.iter().find(|(_, c)| !c.is_horn()) {
        return Err(Error::Precondition(format!("non-Horn clause {id}: {c}")));
    }
    if mslh && !n.classify().is_mslh() {
        return Err(Error::Precondition("input is not monadic shallow linear Horn".into()));
    }
    Ok(())
}

/// Lazily yields distinct refutations by increasing depth bound.
pub struct RefutationStream {
    set: ClauseSet,
    limits: Limits,
    level: usize,
    budget: usize,
    per_level: usize,
    seen: BTreeSet<String>,
    buffer: VecDeque<Refutation>,
    pub resource_out: bool,
}

/// Refutations of `n` ordered by the depth bound under which they are first
/// found, up to `depth_budget`.
pub fn enumerate_refutations(n: &ClauseSet, depth_budget: usize, limits: Limits) -> Result<RefutationStream> {
    check_input(n, true)?;
    Ok(RefutationStream {
        set: n.clone(),
        limits,
        level: 0,
        budget: depth_budget,
        per_level: 32,
        seen: BTreeSet::new(),
        buffer: VecDeque::new(),
        resource_out: false,
    })
}

impl Iterator for RefutationStream {
    type Item = Refutation;

    fn next(&mut self) -> Option<Refutation> {
        while self.buffer.is_empty() {
            if self.level > self.budget {
                return None;
            }
            let limits = Limits { max_depth: self.level.min(self.limits.max_depth), ..self.limits };
            let mut s = Saturator::new(limits, Mode::All { cap: self.per_level });
            for (id, c) in self.set.iter() {
                s.add_input(id, c);
            }
            if let SaturationResult::ResourceOut(_) = s.run() {
                if s.resource_hit {
                    self.resource_out = true;
                }
            }
            for root in s.found.clone() {
                let r = s.extract(root);
                if self.seen.insert(r.key()) {
                    self.buffer.push_back(r);
                }
            }
            self.level += 1;
        }
        self.buffer.pop_front()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    First,
    All { cap: usize },
}

struct Saturator {
    limits: Limits,
    mode: Mode,
    nodes: Vec<ProofNode>,
    alive: Vec<bool>,
    active: Vec<usize>,
    passive: BinaryHeap<Reverse<(usize, usize)>>,
    steps: usize,
    /// Some clause was dropped for exceeding the depth bound.
    incomplete: bool,
    resource_hit: bool,
    found: Vec<usize>,
}

/// Selected negative literals: every shallow-predicate atom, otherwise the
/// first atom with a non-variable argument.
pub fn selected(c: &Clause) -> Vec<usize> {
    let s: Vec<usize> = c.neg.iter().enumerate().filter(|(_, a)| is_shallow_pred(&a.pred)).map(|(i, _)| i).collect();
    if !s.is_empty() {
        return s;
    }
    c.neg.iter().position(|a| a.args.iter().any(|t| !t.is_var())).into_iter().collect()
}

fn weight(c: &Clause) -> usize {
    c.atoms().map(Atom::size).sum()
}

impl Saturator {
    fn new(limits: Limits, mode: Mode) -> Self {
        Saturator {
            limits,
            mode,
            nodes: Vec::new(),
            alive: Vec::new(),
            active: Vec::new(),
            passive: BinaryHeap::new(),
            steps: 0,
            incomplete: false,
            resource_hit: false,
            found: Vec::new(),
        }
    }

    fn push_node(&mut self, node: ProofNode) -> usize {
        self.nodes.push(node);
        self.alive.push(true);
        self.nodes.len() - 1
    }

    fn input_node(&mut self, id: ClauseId, c: &Clause) -> usize {
        let (norm, _) = c.normalized();
        self.push_node(ProofNode { conclusion: norm, rule: Rule::Input(id), origin: vec![] })
    }

    fn add_input(&mut self, id: ClauseId, c: &Clause) {
        let i = self.input_node(id, c);
        let i = self.condense(i);
        self.offer(i);
    }

    fn add_active_input(&mut self, id: ClauseId, c: &Clause) {
        let i = self.input_node(id, c);
        let i = self.condense(i);
        self.active.push(i);
    }

    /// Queues a new clause unless it is trivially redundant or too deep.
    fn offer(&mut self, i: usize) {
        let c = &self.nodes[i].conclusion;
        if c.is_empty() {
            self.found.push(i);
            return;
        }
        if c.is_tautology() {
            return;
        }
        if c.depth() > self.limits.max_depth {
            self.incomplete = true;
            return;
        }
        self.passive.push(Reverse((weight(c), i)));
    }

    /// Removes identical duplicate literals through factoring nodes.
    fn condense(&mut self, mut i: usize) -> usize {
        loop {
            let c = &self.nodes[i].conclusion;
            let dup = (1..c.neg.len())
                .find(|k| c.neg[*k] == c.neg[*k - 1])
                .map(|k| (LitRef::Neg(k - 1), LitRef::Neg(k)))
                .or_else(|| {
                    (1..c.pos.len()).find(|k| c.pos[*k] == c.pos[*k - 1]).map(|k| (LitRef::Pos(k - 1), LitRef::Pos(k)))
                });
            let Some((kept, dropped)) = dup else { return i };
            let mut neg: Vec<(Atom, (u8, LitRef))> =
                c.neg.iter().enumerate().map(|(k, a)| (a.clone(), (0, LitRef::Neg(k)))).collect();
            let mut pos: Vec<(Atom, (u8, LitRef))> =
                c.pos.iter().enumerate().map(|(k, a)| (a.clone(), (0, LitRef::Pos(k)))).collect();
            match dropped {
                LitRef::Neg(k) => {
                    neg.remove(k);
                }
                LitRef::Pos(k) => {
                    pos.remove(k);
                }
            }
            let origin = neg.iter().chain(pos.iter()).map(|(_, o)| *o).collect();
            let conclusion = Clause { neg: neg.into_iter().map(|(a, _)| a).collect(), pos: pos.into_iter().map(|(a, _)| a).collect() };
            i = self.push_node(ProofNode {
                conclusion,
                rule: Rule::Factoring { parent: i, sigma: Subst::new(), kept, dropped },
                origin,
            });
        }
    }

    fn subsumed(&self, c: &Clause) -> bool {
        self.active.iter().any(|j| self.alive[*j] && subsumes(&self.nodes[*j].conclusion, c))
    }

    fn run(&mut self) -> SaturationResult {
        loop {
            if let Some(r) = self.stop_condition() {
                return r;
            }
            let Some(Reverse((_, given))) = self.passive.pop() else { break };
            let g = self.nodes[given].conclusion.clone();
            if self.subsumed(&g) {
                continue;
            }
            for j in self.active.clone() {
                if self.alive[j] && subsumes(&g, &self.nodes[j].conclusion) {
                    self.alive[j] = false;
                }
            }
            self.active.retain(|j| self.alive[*j]);
            self.active.push(given);
            for j in self.active.clone() {
                self.infer(given, j);
                if j != given {
                    self.infer(j, given);
                }
                if self.stop_condition().is_some() {
                    break;
                }
            }
        }
        if let Some(r) = self.stop_condition() {
            return r;
        }
        if let Mode::All { .. } = self.mode {
            return SaturationResult::ResourceOut("enumeration".into());
        }
        if self.incomplete {
            return SaturationResult::ResourceOut(format!("clauses deeper than {} were dropped", self.limits.max_depth));
        }
        let mut out = ClauseSet::new();
        for j in &self.active {
            out.push(self.nodes[*j].conclusion.clone());
        }
        SaturationResult::Saturated(out)
    }

    fn stop_condition(&mut self) -> Option<SaturationResult> {
        match self.mode {
            Mode::First => {
                if let Some(root) = self.found.first() {
                    return Some(SaturationResult::Refutation(self.extract(*root)));
                }
            }
            Mode::All { cap } => {
                if self.found.len() >= cap {
                    return Some(SaturationResult::ResourceOut("refutation cap".into()));
                }
            }
        }
        if self.steps > self.limits.max_steps {
            self.resource_hit = true;
            return Some(SaturationResult::ResourceOut(format!("more than {} inferences", self.limits.max_steps)));
        }
        if self.nodes.len() > self.limits.max_clauses {
            self.resource_hit = true;
            return Some(SaturationResult::ResourceOut(format!("more than {} clauses", self.limits.max_clauses)));
        }
        None
    }

    /// All ordered resolution inferences with `l` contributing the positive
    /// literal and `r` the negative one.
    fn infer(&mut self, l: usize, r: usize) {
        let left = self.nodes[l].conclusion.clone();
        let right = self.nodes[r].conclusion.clone();
        if left.pos.is_empty() || !selected(&left).is_empty() {
            return;
        }
        let sel = selected(&right);
        let candidates: Vec<usize> = if sel.is_empty() { (0..right.neg.len()).collect() } else { sel.clone() };
        for li in 0..left.pos.len() {
            for &rj in &candidates {
                self.steps += 1;
                if left.pos[li].pred != right.neg[rj].pred {
                    continue;
                }
                let Some(res) = resolve(&left, li, &right, rj) else { continue };
                let (l_inst, r_inst) = (left.apply(&res.sigma_left), right.apply(&res.sigma_right));
                let li2 = l_inst.pos.iter().position(|a| *a == left.pos[li].apply(&res.sigma_left)).expect("literal survives");
                if !is_maximal(&l_inst, LitRef::Pos(li2), true) {
                    continue;
                }
                if sel.is_empty() {
                    let a = right.neg[rj].apply(&res.sigma_right);
                    let rj2 = r_inst.neg.iter().position(|b| *b == a).expect("literal survives");
                    if !is_maximal(&r_inst, LitRef::Neg(rj2), false) {
                        continue;
                    }
                }
                let node = ProofNode {
                    conclusion: res.conclusion,
                    rule: Rule::Resolution {
                        left: l,
                        right: r,
                        left_lit: li,
                        right_lit: rj,
                        sigma_left: res.sigma_left,
                        sigma_right: res.sigma_right,
                    },
                    origin: res.origin,
                };
                let i = self.push_node(node);
                let i = self.condense(i);
                self.offer(i);
            }
        }
    }

    /// Copies the sub-DAG below `root` into a standalone refutation.
    fn extract(&self, root: usize) -> Refutation {
        let mut order = Vec::new();
        let mut seen = BTreeSet::new();
        fn visit(s: &Saturator, i: usize, seen: &mut BTreeSet<usize>, order: &mut Vec<usize>) {
            if !seen.insert(i) {
                return;
            }
            for p in s.nodes[i].parents() {
                visit(s, p, seen, order);
            }
            order.push(i);
        }
        visit(self, root, &mut seen, &mut order);
        let index: BTreeMap<usize, usize> = order.iter().enumerate().map(|(k, i)| (*i, k)).collect();
        let nodes = order
            .iter()
            .map(|i| {
                let mut n = self.nodes[*i].clone();
                n.rule = match n.rule {
                    Rule::Resolution { left, right, left_lit, right_lit, sigma_left, sigma_right } => Rule::Resolution {
                        left: index[&left],
                        right: index[&right],
                        left_lit,
                        right_lit,
                        sigma_left,
                        sigma_right,
                    },
                    Rule::Factoring { parent, sigma, kept, dropped } => {
                        Rule::Factoring { parent: index[&parent], sigma, kept, dropped }
                    }
                    r => r,
                };
                n
            })
            .collect();
        Refutation { nodes }
    }
}

struct Resolvent {
    conclusion: Clause,
    sigma_left: Subst,
    sigma_right: Subst,
    origin: Vec<(u8, LitRef)>,
}

/// Resolvent of `left.pos[li]` against `right.neg[rj]`. Conclusion variables
/// are renumbered from 0; variables eliminated by the inference are numbered
/// above them, so the recorded substitutions never capture.
fn resolve(left: &Clause, li: usize, right: &Clause, rj: usize) -> Option<Resolvent> {
    let off = left.next_var();
    let r2 = right.rename_apart(off);
    let mgu = mgu_atoms(&left.pos[li], &r2.neg[rj])?;
    let mut neg: Vec<(Atom, (u8, LitRef))> = Vec::new();
    let mut pos: Vec<(Atom, (u8, LitRef))> = Vec::new();
    for (i, a) in left.neg.iter().enumerate() {
        neg.push((a.apply(&mgu), (0, LitRef::Neg(i))));
    }
    for (i, a) in left.pos.iter().enumerate().filter(|(i, _)| *i != li) {
        pos.push((a.apply(&mgu), (0, LitRef::Pos(i))));
    }
    for (j, a) in r2.neg.iter().enumerate().filter(|(j, _)| *j != rj) {
        neg.push((a.apply(&mgu), (1, LitRef::Neg(j))));
    }
    for (j, a) in r2.pos.iter().enumerate() {
        pos.push((a.apply(&mgu), (1, LitRef::Pos(j))));
    }
    neg.sort_by(|a, b| a.0.cmp(&b.0));
    pos.sort_by(|a, b| a.0.cmp(&b.0));

    let mut rho: BTreeMap<Var, Var> = BTreeMap::new();
    let mut order = Vec::new();
    neg.iter().chain(pos.iter()).for_each(|(a, _)| a.collect_vars(&mut order));
    for v in order {
        let n = rho.len() as Var;
        rho.entry(v).or_insert(n);
    }
    let mut images: Vec<Term> = Vec::new();
    for v in left.vars() {
        images.push(Term::Var(v).apply(&mgu));
    }
    for v in r2.vars() {
        images.push(Term::Var(v).apply(&mgu));
    }
    let mut extra = Vec::new();
    images.iter().for_each(|t| t.collect_vars(&mut extra));
    for v in extra {
        let n = rho.len() as Var;
        rho.entry(v).or_insert(n);
    }
    let ren: Subst = rho.iter().map(|(v, n)| (*v, Term::Var(*n))).collect();
    let finish = |xs: Vec<(Atom, (u8, LitRef))>| {
        let mut ys: Vec<(Atom, (u8, LitRef))> = xs.into_iter().map(|(a, o)| (a.apply(&ren), o)).collect();
        ys.sort_by(|a, b| a.0.cmp(&b.0));
        ys
    };
    let neg = finish(neg);
    let pos = finish(pos);
    let origin = neg.iter().chain(pos.iter()).map(|(_, o)| *o).collect();
    let conclusion = Clause { neg: neg.into_iter().map(|(a, _)| a).collect(), pos: pos.into_iter().map(|(a, _)| a).collect() };
    let sigma_left: Subst = left.vars().into_iter().map(|v| (v, Term::Var(v).apply(&mgu).apply(&ren))).collect();
    let sigma_right: Subst =
        right.vars().into_iter().map(|v| (v, Term::Var(v + off).apply(&mgu).apply(&ren))).collect();
    Some(Resolvent { conclusion, sigma_left, sigma_right, origin })
}

/// `c` subsumes `d`: some σ maps the literals of `c` injectively onto
/// literals of `d`.
pub fn subsumes(c: &Clause, d: &Clause) -> bool {
    if c.neg.len() > d.neg.len() || c.pos.len() > d.pos.len() {
        return false;
    }
    let cl: Vec<(bool, &Atom)> = c.neg.iter().map(|a| (false, a)).chain(c.pos.iter().map(|a| (true, a))).collect();
    let dl: Vec<(bool, &Atom)> = d.neg.iter().map(|a| (false, a)).chain(d.pos.iter().map(|a| (true, a))).collect();
    fn go(cl: &[(bool, &Atom)], dl: &[(bool, &Atom)], i: usize, used: &mut [bool], s: &Subst) -> bool {
        if i == cl.len() {
            return true;
        }
        for j in 0..dl.len() {
            if used[j] || dl[j].0 != cl[i].0 {
                continue;
            }
            let mut s2 = s.clone();
            if match_atom(cl[i].1, dl[j].1, &mut s2) {
                used[j] = true;
                let ok = go(cl, dl, i + 1, used, &s2);
                used[j] = false;
                if ok {
                    return true;
                }
            }
        }
        false
    }
    let mut used = vec![false; dl.len()];
    go(&cl, &dl, 0, &mut used, &Subst::new())
}

fn without(c: &Clause, l: LitRef) -> Clause {
    let mut neg = c.neg.clone();
    let mut pos = c.pos.clone();
    match l {
        LitRef::Neg(i) => {
            neg.remove(i);
        }
        LitRef::Pos(i) => {
            pos.remove(i);
        }
    }
    Clause::new(neg, pos)
}

fn merge(a: Clause, b: Clause) -> Clause {
    let mut neg = a.neg;
    neg.extend(b.neg);
    let mut pos = a.pos;
    pos.extend(b.pos);
    Clause::new(neg, pos)
}

/// Independent check of every inference of `r` against the input set.
pub fn verify_refutation(r: &Refutation, input: &ClauseSet) -> Result<()> {
    if r.nodes.is_empty() || !r.nodes[r.root()].conclusion.is_empty() {
        return Err(Error::MalformedProof("root is not the empty clause".into()));
    }
    for (i, n) in r.nodes.iter().enumerate() {
        let bad = |m: &str| Err(Error::MalformedProof(format!("node {i}: {m}")));
        if n.parents().iter().any(|p| *p >= i) {
            return bad("parent does not precede child");
        }
        match &n.rule {
            Rule::Input(id) => match input.get(*id) {
                Some(c) if variant(c, &n.conclusion) => {}
                _ => return bad("input clause mismatch"),
            },
            Rule::Resolution { left, right, left_lit, right_lit, sigma_left, sigma_right } => {
                let lc = &r.nodes[*left].conclusion;
                let rc = &r.nodes[*right].conclusion;
                let (Some(a), Some(b)) = (lc.pos.get(*left_lit), rc.neg.get(*right_lit)) else {
                    return bad("literal index out of range");
                };
                if a.apply(sigma_left) != b.apply(sigma_right) {
                    return bad("resolved atoms differ under the recorded substitutions");
                }
                let expect = merge(
                    without(lc, LitRef::Pos(*left_lit)).apply(sigma_left),
                    without(rc, LitRef::Neg(*right_lit)).apply(sigma_right),
                );
                if expect != n.conclusion {
                    return bad("conclusion is not the resolvent");
                }
            }
            Rule::Factoring { parent, sigma, kept, dropped } => {
                let pc = r.nodes[*parent].conclusion.apply(sigma);
                let pc0 = &r.nodes[*parent].conclusion;
                let same_side = matches!((kept, dropped), (LitRef::Neg(_), LitRef::Neg(_)) | (LitRef::Pos(_), LitRef::Pos(_)));
                if !same_side || kept == dropped || pc0.literal(*kept).apply(sigma) != pc0.literal(*dropped).apply(sigma) {
                    return bad("factored literals differ");
                }
                if without(pc0, *dropped).apply(sigma) != n.conclusion || pc.len() != n.conclusion.len() + 1 {
                    return bad("conclusion is not the factor");
                }
            }
        }
    }
    Ok(())
}

/// Structural check of DOT text produced by [`Refutation::to_dot`]: every
/// edge joins declared nodes and exactly one node has no outgoing edge.
pub fn validate_dot(dot: &str) -> bool {
    let body = dot.trim();
    if !body.starts_with("digraph") || !body.ends_with('}') {
        return false;
    }
    let mut nodes = BTreeSet::new();
    let mut edges = Vec::new();
    for line in body.lines().map(str::trim) {
        if let Some((lhs, _)) = line.split_once(" [") {
            if let Some((a, b)) = lhs.split_once(" -> ") {
                edges.push((a.to_string(), b.to_string()));
            } else if lhs.starts_with('n') && lhs != "node" {
                nodes.insert(lhs.to_string());
            }
        }
    }
    if nodes.is_empty() || edges.iter().any(|(a, b)| !nodes.contains(a) || !nodes.contains(b)) {
        return false;
    }
    let sources: BTreeSet<&String> = edges.iter().map(|(a, _)| a).collect();
    nodes.iter().filter(|n| !sources.contains(n)).count() == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_clauses;

    fn set(src: &str) -> ClauseSet {
        ClauseSet::from_clauses(parse_clauses(src).unwrap())
    }

    fn intro() -> ClauseSet {
        set("s(X), S_0(Y) -> T(f_p(X, Y)).\ns(X) -> S_0(g(X)).\n-> s(a).\n-> s(b).\n-> s(g(X)).\n\
             T(f_p(a, g(b))) -> .\nT(f_p(g(X), g(g(X)))) -> .")
    }

    #[test]
    fn refutes_intro_approximation() {
        let n = intro();
        let r = saturate(&n, Limits::default()).unwrap();
        let SaturationResult::Refutation(p) = r else { panic!("expected refutation") };
        verify_refutation(&p, &n).unwrap();
        assert!(validate_dot(&p.to_dot()));
        assert!(p.s_atoms_only_at_leaves());
    }

    #[test]
    fn two_refutations_by_depth() {
        let n = intro();
        let all: Vec<Refutation> = enumerate_refutations(&n, 3, Limits::default()).unwrap().collect();
        let goals: Vec<BTreeSet<ClauseId>> = all.iter().map(|r| r.inputs()).collect();
        let first = goals.iter().position(|g| g.contains(&ClauseId(5))).unwrap();
        let second = goals.iter().position(|g| g.contains(&ClauseId(6))).unwrap();
        assert!(first < second);
        for r in &all {
            verify_refutation(r, &n).unwrap();
        }
        assert_eq!(enumerate_refutations(&n, 1, Limits::default()).unwrap().count(), 0);
    }

    #[test]
    fn parity_saturates() {
        let n = set("-> p(a).\np(f(a)) -> .\nS_0(Y) -> p(f(Y)).\np(X) -> S_0(f(X)).\np(f(f(X))) -> p(X).");
        let SaturationResult::Saturated(m) = saturate(&n, Limits::default()).unwrap() else { panic!() };
        let want = parse_clauses("p(X) -> p(f(f(X))).").unwrap().remove(0);
        assert!(m.clauses().any(|c| variant(c, &want)));
        assert_eq!(m.len(), 6, "{m}");
    }

    #[test]
    fn empty_set_is_saturated() {
        let r = saturate(&ClauseSet::new(), Limits::default()).unwrap();
        assert!(matches!(r, SaturationResult::Saturated(ref m) if m.is_empty()));
    }

    #[test]
    fn rejects_non_mslh() {
        assert!(saturate(&set("-> p(X, X)."), Limits::default()).is_err());
    }

    #[test]
    fn subsumption() {
        let c = parse_clauses("p(X) -> .\np(a), q(b) -> .\np(X), p(Y) -> .\np(a) -> .").unwrap();
        assert!(subsumes(&c[0], &c[1]));
        assert!(!subsumes(&c[1], &c[0]));
        assert!(!subsumes(&c[2], &c[3]));
        assert!(subsumes(&c[0], &c[2]));
    }
}
