//! The approximation-refinement loop.
//!
//! Each iteration approximates the current set from scratch, saturates the
//! approximation and either returns a model, lifts a refutation to the
//! original set, or refines the current set by instantiation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;

use crate::approximation::{approximate_with, ApproxOptions, ApproxTrace};
use crate::clause_set::{ClauseId, ClauseSet};
use crate::cores::{check_core, extract_core, CheckConfig, ConflictingCore};
use crate::error::{Error, Result};
use crate::lifting::{lift, FailWitness, LiftOptions, LiftOutcome, Residual};
use crate::model::{unproject_model, verify_model, ModelHandle};
use crate::refinement::{refine, split_signature, RefinementAction};
use crate::saturation::{enumerate_refutations, saturate, Limits, SaturationResult};
use crate::terms::Signature;

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub max_iterations: usize,
    pub depth_budget: usize,
    pub limits: Limits,
    pub unique_s: bool,
    /// Further refutations tried after a lifting failure before refining.
    pub retries: usize,
    /// Among the candidate refutations, refine on a non-liftable one even
    /// when another one lifts.
    pub adversarial: bool,
    pub approx: ApproxOptions,
    /// Extra function symbols for refinement case splits.
    pub sigma: Signature,
    /// Term depth for checking a model against the input; 0 disables it.
    pub verify_depth: usize,
    /// Nesting allowed for the recursive calls of indirect Horn lifting.
    pub recursion: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_iterations: 20,
            depth_budget: 8,
            limits: Limits::default(),
            unique_s: false,
            retries: 3,
            adversarial: false,
            approx: ApproxOptions::default(),
            sigma: Signature::default(),
            verify_depth: 2,
            recursion: 3,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub iterations: usize,
    pub refinements: usize,
    pub refutations: usize,
    pub lift_failures: usize,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Unsat(ConflictingCore, Stats),
    Sat(ModelHandle),
    Unknown(String),
}

impl Verdict {
    pub fn status(&self) -> &'static str {
        match self {
            Verdict::Unsat(..) => "Unsatisfiable",
            Verdict::Sat(_) => "Satisfiable",
            Verdict::Unknown(_) => "Unknown",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub iteration: usize,
    pub phase: &'static str,
    pub payload: String,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.iteration, self.phase, self.payload.replace('\n', " | "))
    }
}

#[derive(Clone, Debug)]
pub struct State {
    pub original: ClauseSet,
    pub current: ClauseSet,
    /// Clause of `original` each clause of `current` instantiates.
    pub lineage: BTreeMap<ClauseId, ClauseId>,
    pub stats: Stats,
    pub actions: Vec<RefinementAction>,
    pub events: Vec<Event>,
    /// DOT renderings of the refutations examined.
    pub proofs: Vec<String>,
    pub last_trace: Option<ApproxTrace>,
    pub verdict: Option<Verdict>,
    seen: BTreeSet<String>,
    split_sig: Signature,
}

impl State {
    pub fn new(n: &ClauseSet, cfg: &EngineConfig) -> Self {
        State {
            original: n.clone(),
            current: n.clone(),
            lineage: n.ids().into_iter().map(|id| (id, id)).collect(),
            stats: Stats::default(),
            actions: Vec::new(),
            events: Vec::new(),
            proofs: Vec::new(),
            last_trace: None,
            verdict: None,
            seen: BTreeSet::new(),
            split_sig: split_signature(n, &cfg.sigma),
        }
    }

    fn log(&mut self, phase: &'static str, payload: impl Into<String>) {
        self.events.push(Event { iteration: self.stats.iterations, phase, payload: payload.into() });
    }

    fn finish(&mut self, v: Verdict) {
        let line = match &v {
            Verdict::Unknown(why) => format!("Unknown ({why})"),
            v => v.status().to_string(),
        };
        self.log("verdict", line);
        self.verdict = Some(v);
    }
}

enum Attempt {
    Lifted(ConflictingCore),
    Satisfiable(ModelHandle),
    Failed { step: usize, witness: FailWitness },
    Broken(String),
}

/// One approximate, saturate, lift-or-refine round.
pub fn solve_step(mut st: State, cfg: &EngineConfig) -> Result<State> {
    if st.verdict.is_some() {
        return Ok(st);
    }
    if st.stats.iterations >= cfg.max_iterations {
        st.finish(Verdict::Unknown("refinement iteration budget exhausted".into()));
        return Ok(st);
    }
    st.stats.iterations += 1;
    let (approx, trace) = approximate_with(&st.current, &cfg.approx);
    st.log("approximate", format!("{} steps, {} clauses", trace.steps.len(), approx.len()));
    st.last_trace = Some(trace.clone());
    match saturate(&approx, cfg.limits)? {
        SaturationResult::Saturated(s) => {
            st.log("saturate", format!("saturated with {} clauses", s.len()));
            let mut raw = ModelHandle::new(s, st.original.signature(), trace.projected_predicates());
            raw.source = st.current.clone();
            let m = unproject_model(&raw);
            let v = checked_model(&st.original, m, cfg);
            st.finish(v);
            return Ok(st);
        }
        SaturationResult::ResourceOut(why) => {
            st.finish(Verdict::Unknown(format!("saturation: {why}")));
            return Ok(st);
        }
        SaturationResult::Refutation(_) => st.log("saturate", "refutation found"),
    }

    let cap = if cfg.adversarial { cfg.retries.max(31) + 1 } else { cfg.retries + 1 };
    let mut stream = enumerate_refutations(&approx, cfg.depth_budget, cfg.limits)?;
    let mut failure: Option<(usize, FailWitness)> = None;
    let mut lifted: Option<ConflictingCore> = None;
    let mut tried = 0;
    for r in stream.by_ref() {
        if tried == cap {
            break;
        }
        tried += 1;
        st.stats.refutations += 1;
        st.proofs.push(r.to_dot());
        st.log("refutation", format!("depth {}, inputs {:?}", r.depth(), r.inputs()));
        let attempt = match extract_core(&r) {
            Ok(core) => attempt_lift(&core, &trace, cfg),
            Err(e) => Attempt::Broken(e.to_string()),
        };
        match attempt {
            Attempt::Lifted(core) => {
                st.log("lift", "lifted");
                if !cfg.adversarial || failure.is_some() {
                    lifted = Some(core);
                    break;
                }
                lifted.get_or_insert(core);
            }
            Attempt::Satisfiable(m) => {
                st.log("lift", "residual set satisfiable");
                let v = checked_model(&st.original, m, cfg);
                st.finish(v);
                return Ok(st);
            }
            Attempt::Failed { step, witness } => {
                st.stats.lift_failures += 1;
                st.log("lift", format!("failed at step {step}: {witness}"));
                if failure.is_none() {
                    failure = Some((step, witness));
                }
                if cfg.adversarial {
                    break;
                }
            }
            Attempt::Broken(why) => {
                st.stats.lift_failures += 1;
                st.log("lift", format!("error: {why}"));
            }
        }
    }

    let refine_on = match (failure, lifted) {
        (Some(f), _) if cfg.adversarial => f,
        (_, Some(core)) => {
            let v = unsat_verdict(&st, core)?;
            st.finish(v);
            return Ok(st);
        }
        (Some(f), None) => f,
        (None, None) => {
            let why = if tried == 0 && stream.resource_out {
                "refutation enumeration ran out of resources".to_string()
            } else if tried == 0 {
                format!("no refutation within depth budget {}", cfg.depth_budget)
            } else {
                "no refutation could be lifted or refined".to_string()
            };
            st.finish(Verdict::Unknown(why));
            return Ok(st);
        }
    };

    let (step, witness) = refine_on;
    let action = match refine(&st.current, &trace, step, &witness, &st.split_sig) {
        Ok(a) => a,
        Err(e @ Error::RedirectToInstantiation(_)) => {
            st.finish(Verdict::Unknown(e.to_string()));
            return Ok(st);
        }
        Err(e) => return Err(e),
    };
    let key = action.to_string();
    if !st.seen.insert(key.clone()) {
        st.log("refine", format!("repeated: {key}"));
        return Err(Error::RefinementLoop(key));
    }
    st.log("refine", key);
    let root = st.lineage[&action.target];
    let next_id = st.current.next_id();
    st.current = action.apply(&st.current);
    st.lineage.remove(&action.target);
    for k in 0..action.replacements.len() {
        st.lineage.insert(ClauseId(next_id + k as u32), root);
    }
    st.stats.refinements += 1;
    st.actions.push(action);
    Ok(st)
}

fn attempt_lift(core: &ConflictingCore, trace: &ApproxTrace, cfg: &EngineConfig) -> Attempt {
    let opts = LiftOptions { unique_s: cfg.unique_s, ..LiftOptions::default() };
    let mut residual_model: Option<ModelHandle> = None;
    let mut callback = |n: &ClauseSet| -> Result<Residual> {
        if cfg.recursion == 0 {
            return Ok(Residual::Unknown("recursion budget exhausted".into()));
        }
        let inner = EngineConfig { recursion: cfg.recursion - 1, verify_depth: 0, ..cfg.clone() };
        Ok(match solve(n, &inner)? {
            Verdict::Unsat(c, _) => Residual::Unsat(c),
            Verdict::Sat(m) => {
                residual_model = Some(m);
                Residual::Sat
            }
            Verdict::Unknown(why) => Residual::Unknown(why),
        })
    };
    let out = lift(core, trace, &opts, &mut callback);
    match out {
        Ok(l) => match l.outcome {
            LiftOutcome::Lifted(c) => Attempt::Lifted(c),
            LiftOutcome::Failed { step, witness } => Attempt::Failed { step, witness },
            LiftOutcome::Satisfiable(_) => {
                let mut m = residual_model.expect("residual solved as satisfiable");
                m.projected.extend(trace.projected_predicates());
                Attempt::Satisfiable(m)
            }
        },
        Err(e) => Attempt::Broken(e.to_string()),
    }
}

fn checked_model(n: &ClauseSet, m: ModelHandle, cfg: &EngineConfig) -> Verdict {
    if cfg.verify_depth > 0 && verify_model(n, &m, cfg.verify_depth) == Some(false) {
        return Verdict::Unknown("model failed verification".into());
    }
    Verdict::Sat(m)
}

/// Renames origins to the clauses of the original set.
fn unsat_verdict(st: &State, mut core: ConflictingCore) -> Result<Verdict> {
    for c in &mut core.clauses {
        c.origin = *st
            .lineage
            .get(&c.origin)
            .ok_or_else(|| Error::CoreMismatch(format!("clause {} has no lineage", c.origin)))?;
    }
    if !core.origins_match(&st.original) {
        return Err(Error::CoreMismatch("lifted core does not instantiate the input".into()));
    }
    if check_core(&core, &CheckConfig::default()) == Some(false) {
        return Err(Error::CoreMismatch("lifted core is satisfiable".into()));
    }
    Ok(Verdict::Unsat(core.normalized(), st.stats.clone()))
}

/// Runs the loop to a verdict, keeping the full state for inspection.
pub fn run(n: &ClauseSet, cfg: &EngineConfig) -> Result<State> {
    run_until(n, cfg, &AtomicBool::new(false))
}

fn run_until(n: &ClauseSet, cfg: &EngineConfig, stop: &AtomicBool) -> Result<State> {
    if n.clauses().any(|c| c.is_empty()) {
        let mut st = State::new(n, cfg);
        let (id, c) = n.iter().find(|(_, c)| c.is_empty()).expect("empty clause");
        let core = ConflictingCore::from_clauses([(c.clone(), id)]);
        let v = Verdict::Unsat(core, Stats::default());
        st.finish(v);
        return Ok(st);
    }
    let mut st = State::new(n, cfg);
    while st.verdict.is_none() {
        if stop.load(Ordering::Relaxed) {
            st.finish(Verdict::Unknown("cancelled".into()));
            break;
        }
        st = solve_step(st, cfg)?;
    }
    Ok(st)
}

pub fn solve(n: &ClauseSet, cfg: &EngineConfig) -> Result<Verdict> {
    Ok(run(n, cfg)?.verdict.expect("run ends with a verdict"))
}

/// Runs several configurations concurrently; the first definite verdict
/// wins and the others are cancelled.
pub fn solve_portfolio(n: &ClauseSet, cfgs: &[EngineConfig]) -> Result<Verdict> {
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|s| {
        for cfg in cfgs {
            let tx = tx.clone();
            let stop = &stop;
            s.spawn(move || {
                let r = run_until(n, cfg, stop).map(|st| st.verdict.expect("verdict"));
                if matches!(r, Ok(Verdict::Unsat(..) | Verdict::Sat(_))) {
                    stop.store(true, Ordering::Relaxed);
                }
                let _ = tx.send(r);
            });
        }
    });
    drop(tx);
    let mut fallback = None;
    for r in rx {
        match r {
            Ok(Verdict::Unknown(why)) => fallback = fallback.or(Some(Ok(Verdict::Unknown(why)))),
            Ok(v) => return Ok(v),
            Err(e) => fallback = Some(fallback.unwrap_or(Err(e))),
        }
    }
    fallback.unwrap_or_else(|| Ok(Verdict::Unknown("no configuration".into())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::query_atom;
    use crate::syntax::{parse, parse_atom};

    fn set(src: &str) -> ClauseSet {
        parse(src).unwrap().clause_set()
    }

    const INTRO: &str = "s(X) -> p(X, g(X)).\n-> s(a).\n-> s(b).\ns(X) -> s(g(X)).\np(a, g(b)) -> .\np(g(X), g(g(X))) -> .";

    #[test]
    fn intro_unsat() {
        let n = set(INTRO);
        let Verdict::Unsat(core, _) = solve(&n, &EngineConfig::default()).unwrap() else { panic!("not unsat") };
        assert!(core.origins_match(&n));
        assert_eq!(check_core(&core, &CheckConfig::default()), Some(true));
    }

    #[test]
    fn intro_adversarial_refines_once() {
        let n = set(INTRO);
        let cfg = EngineConfig { retries: 0, ..EngineConfig::default() };
        let st = run(&n, &cfg).unwrap();
        assert!(matches!(st.verdict, Some(Verdict::Unsat(..))), "{:?}", st.events);
        assert_eq!(st.actions.len(), 1, "{:?}", st.events);
        assert_eq!(st.actions[0].replacements.len(), 3);
    }

    #[test]
    fn parity_sat() {
        let n = set("-> p(a).\np(f(a)) -> .\np(X) -> p(f(f(X))).\np(f(f(X))) -> p(X).");
        let st = run(&n, &EngineConfig::default()).unwrap();
        assert!(st.actions.is_empty());
        let Some(Verdict::Sat(m)) = st.verdict else { panic!() };
        assert_eq!(query_atom(&m, &parse_atom("p(f(f(a)))").unwrap(), 4), Some(true));
        assert_eq!(query_atom(&m, &parse_atom("p(f(a))").unwrap(), 4), Some(false));
    }

    #[test]
    fn shallow_refinement_sat() {
        let n = set("-> p(f(X, g(X))).\np(f(a, g(b))) -> .");
        let st = run(&n, &EngineConfig::default()).unwrap();
        assert!(matches!(st.verdict, Some(Verdict::Sat(_))), "{:?}", st.events);
        assert_eq!(st.actions.len(), 1);
        assert_eq!(st.actions[0].replacements.len(), 4);
    }

    #[test]
    fn trivial_cases() {
        assert!(matches!(solve(&set("-> p(a).\np(X) -> ."), &EngineConfig::default()).unwrap(), Verdict::Unsat(..)));
        assert!(matches!(solve(&ClauseSet::new(), &EngineConfig::default()).unwrap(), Verdict::Sat(_)));
        let v = solve_portfolio(&set("-> p(a).\np(X) -> ."), &[EngineConfig::default(), EngineConfig { unique_s: true, ..EngineConfig::default() }]);
        assert!(matches!(v.unwrap(), Verdict::Unsat(..)));
    }
}
