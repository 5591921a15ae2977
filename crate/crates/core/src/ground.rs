//! Brute-force ground reasoning: Herbrand instantiation up to a term depth
//! and a small DPLL procedure. Used as a test oracle and by core checking,
//! never on the solving path.

use std::collections::HashMap;

use crate::clause_set::ClauseSet;
use crate::terms::{tuples, Atom, Clause, Signature, Subst, Term};

/// Propositional satisfiability of ground clauses. `None` when more than
/// `max_decisions` branching steps were needed.
pub fn ground_satisfiable(clauses: &[Clause], max_decisions: usize) -> Option<bool> {
    let mut atoms: HashMap<&Atom, usize> = HashMap::new();
    let mut cnf: Vec<Vec<i32>> = Vec::with_capacity(clauses.len());
    for c in clauses {
        debug_assert!(c.is_ground(), "non-ground clause {c}");
        let mut lits = Vec::new();
        for (a, sign) in c.neg.iter().map(|a| (a, -1)).chain(c.pos.iter().map(|a| (a, 1))) {
            let n = atoms.len();
            let v = *atoms.entry(a).or_insert(n) as i32 + 1;
            lits.push(sign * v);
        }
        lits.sort_unstable();
        lits.dedup();
        if lits.iter().any(|l| lits.contains(&-l)) {
            continue;
        }
        cnf.push(lits);
    }
    let mut occurs: Vec<Vec<usize>> = vec![Vec::new(); 2 * (atoms.len() + 1)];
    for (i, c) in cnf.iter().enumerate() {
        for l in c {
            occurs[lit_index(*l)].push(i);
        }
    }
    let mut solver = Dpll { cnf: &cnf, occurs, assign: vec![0; atoms.len() + 1], budget: max_decisions };
    let units: Vec<i32> = cnf.iter().filter(|c| c.len() == 1).map(|c| c[0]).collect();
    if cnf.iter().any(|c| c.is_empty()) {
        return Some(false);
    }
    let mut trail = Vec::new();
    for l in units {
        if !solver.assign_and_propagate(l, &mut trail) {
            return Some(false);
        }
    }
    solver.search(1)
}

fn lit_index(l: i32) -> usize {
    2 * l.unsigned_abs() as usize + usize::from(l < 0)
}

struct Dpll<'a> {
    cnf: &'a [Vec<i32>],
    /// Clauses containing each literal.
    occurs: Vec<Vec<usize>>,
    assign: Vec<i8>,
    budget: usize,
}

impl Dpll<'_> {
    fn value(&self, l: i32) -> i8 {
        let v = self.assign[l.unsigned_abs() as usize];
        if l > 0 {
            v
        } else {
            -v
        }
    }

    /// Sets `l` and propagates units; false on conflict. Assigned variables
    /// are pushed to `trail` either way.
    fn assign_and_propagate(&mut self, l: i32, trail: &mut Vec<usize>) -> bool {
        match self.value(l) {
            1 => return true,
            -1 => return false,
            _ => {}
        }
        let mut queue = vec![l];
        self.set(l, trail);
        while let Some(l) = queue.pop() {
            for ci in self.occurs[lit_index(-l)].clone() {
                let mut open = None;
                let mut count = 0;
                let mut sat = false;
                for &m in &self.cnf[ci] {
                    match self.value(m) {
                        1 => {
                            sat = true;
                            break;
                        }
                        0 => {
                            count += 1;
                            open = Some(m);
                        }
                        _ => {}
                    }
                }
                if sat {
                    continue;
                }
                match (count, open) {
                    (0, _) => return false,
                    (1, Some(u)) => {
                        self.set(u, trail);
                        queue.push(u);
                    }
                    _ => {}
                }
            }
        }
        true
    }

    fn set(&mut self, l: i32, trail: &mut Vec<usize>) {
        self.assign[l.unsigned_abs() as usize] = if l > 0 { 1 } else { -1 };
        trail.push(l.unsigned_abs() as usize);
    }

    fn undo(&mut self, trail: &[usize]) {
        for v in trail {
            self.assign[*v] = 0;
        }
    }

    /// Some clause containing variable `v` is not yet satisfied.
    fn relevant(&self, v: usize) -> bool {
        self.occurs[2 * v].iter().chain(&self.occurs[2 * v + 1]).any(|ci| !self.cnf[*ci].iter().any(|l| self.value(*l) == 1))
    }

    /// Variables below `from` are assigned or occur only in satisfied
    /// clauses, which stays so below this branch.
    fn search(&mut self, from: usize) -> Option<bool> {
        let mut v = from;
        while v < self.assign.len() && (self.assign[v] != 0 || !self.relevant(v)) {
            v += 1;
        }
        if v == self.assign.len() {
            return Some(true);
        }
        if self.budget == 0 {
            return None;
        }
        self.budget -= 1;
        let mut result = Some(false);
        for choice in [v as i32, -(v as i32)] {
            let mut trail = Vec::new();
            let r = if self.assign_and_propagate(choice, &mut trail) { self.search(v + 1) } else { Some(false) };
            self.undo(&trail);
            match r {
                Some(true) => return Some(true),
                Some(false) => {}
                None => result = None,
            }
        }
        result
    }
}

/// All instances of `c` whose variables range over `terms`.
pub fn ground_instances(c: &Clause, terms: &[Term]) -> Vec<Clause> {
    let vars: Vec<_> = c.vars().into_iter().collect();
    tuples(terms, vars.len())
        .into_iter()
        .map(|ts| {
            let s: Subst = vars.iter().copied().zip(ts).collect();
            c.apply(&s)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Unsat,
    /// Satisfiable, and the Herbrand universe is finite.
    Sat,
    /// No contradiction among instances up to the given depth.
    SatUpTo(usize),
    Unknown,
}

/// Herbrand instantiation over terms up to `depth` followed by DPLL.
/// Unsatisfiability is definitive; satisfiability is definitive only for
/// function-free signatures.
pub fn herbrand_oracle(n: &ClauseSet, depth: usize, max_instances: usize) -> OracleVerdict {
    let mut sig: Signature = n.signature();
    sig.ensure_constant();
    let finite = sig.functions.values().all(|a| *a == 0);
    let top = if finite { 0 } else { depth };
    for d in 0..=top {
        let terms = sig.ground_terms(d);
        let mut inst = Vec::new();
        for c in n.clauses() {
            let k = c.vars().len() as u32;
            if (terms.len() as f64).powi(k as i32) + inst.len() as f64 > max_instances as f64 {
                return OracleVerdict::Unknown;
            }
            inst.extend(ground_instances(c, &terms));
        }
        match ground_satisfiable(&inst, 100_000) {
            Some(false) => return OracleVerdict::Unsat,
            Some(true) => {}
            None => return OracleVerdict::Unknown,
        }
    }
    if finite {
        OracleVerdict::Sat
    } else {
        OracleVerdict::SatUpTo(depth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_clauses;

    fn g(src: &str) -> Vec<Clause> {
        parse_clauses(src).unwrap()
    }

    #[test]
    fn propositional() {
        assert_eq!(ground_satisfiable(&g("-> p(a).\np(a) -> ."), 100), Some(false));
        assert_eq!(ground_satisfiable(&g("-> p(a).\nq(a) -> ."), 100), Some(true));
        assert_eq!(ground_satisfiable(&g("-> p(a), q(a).\np(a) -> .\nq(a) -> ."), 100), Some(false));
        assert_eq!(ground_satisfiable(&g("p(a) -> p(a)."), 100), Some(true));
        assert_eq!(ground_satisfiable(&[Clause::empty()], 100), Some(false));
        assert_eq!(ground_satisfiable(&[], 100), Some(true));
    }

    #[test]
    fn pigeonhole_three_into_two() {
        let mut src = String::new();
        for p in 0..3 {
            src += &format!("-> h(p{p}, a), h(p{p}, b).\n");
        }
        for h in ["a", "b"] {
            for p in 0..3 {
                for q in p + 1..3 {
                    src += &format!("h(p{p}, {h}), h(p{q}, {h}) -> .\n");
                }
            }
        }
        assert_eq!(ground_satisfiable(&g(&src), 1000), Some(false));
    }

    #[test]
    fn herbrand() {
        let n = ClauseSet::from_clauses(g("-> p(X, X2).\np(Y, a), p(Z, b) -> ."));
        assert_eq!(herbrand_oracle(&n, 2, 10_000), OracleVerdict::Unsat);
        let n = ClauseSet::from_clauses(g("-> p(a).\np(f(a)) -> .\np(X) -> p(f(f(X))).\np(f(f(X))) -> p(X)."));
        assert_eq!(herbrand_oracle(&n, 2, 10_000), OracleVerdict::SatUpTo(2));
        let n = ClauseSet::from_clauses(g("-> p(a), p(b).\np(a) -> ."));
        assert_eq!(herbrand_oracle(&n, 2, 10_000), OracleVerdict::Sat);
    }
}
