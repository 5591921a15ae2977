//! Atom ordering used by saturation and by the partial model construction.
//!
//! Knuth-Bendix ordering with every symbol and variable weighing 1 and a
//! total precedence (arity, then name). Atoms are compared first by class,
//! so that shallow-introduced predicates lie above every other atom, and
//! then by KBO with the predicate acting as the root symbol.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::symbols::is_shallow_pred;
use crate::terms::{Atom, Clause, Symbol, Term, Var};

fn weight(t: &Term) -> usize {
    t.size()
}

fn count_vars(t: &Term, sign: i64, out: &mut BTreeMap<Var, i64>) {
    match t {
        Term::Var(v) => *out.entry(*v).or_default() += sign,
        Term::App(_, args) => args.iter().for_each(|a| count_vars(a, sign, out)),
    }
}

fn precedence(f: &Symbol, fa: usize, g: &Symbol, ga: usize) -> Ordering {
    fa.cmp(&ga).then_with(|| f.as_str().cmp(g.as_str()))
}

/// Variable-balance of `s` against `t`: (s has at least as many of each,
/// t has at least as many of each).
fn var_balance(s: &[Term], t: &[Term]) -> (bool, bool) {
    let mut m = BTreeMap::new();
    s.iter().for_each(|x| count_vars(x, 1, &mut m));
    t.iter().for_each(|x| count_vars(x, -1, &mut m));
    (m.values().all(|c| *c >= 0), m.values().all(|c| *c <= 0))
}

/// KBO on `head(args)` shapes, shared by terms and atoms.
fn kbo_app(f: &Symbol, fs: &[Term], g: &Symbol, gs: &[Term]) -> Option<Ordering> {
    let ws: usize = 1 + fs.iter().map(weight).sum::<usize>();
    let wt: usize = 1 + gs.iter().map(weight).sum::<usize>();
    let (s_ge, t_ge) = var_balance(fs, gs);
    let decide = |o: Ordering| match o {
        Ordering::Greater if s_ge => Some(Ordering::Greater),
        Ordering::Less if t_ge => Some(Ordering::Less),
        Ordering::Equal => Some(Ordering::Equal),
        _ => None,
    };
    if ws != wt {
        return decide(ws.cmp(&wt));
    }
    match precedence(f, fs.len(), g, gs.len()) {
        Ordering::Equal => {
            for (a, b) in fs.iter().zip(gs) {
                match compare_terms(a, b) {
                    Some(Ordering::Equal) => continue,
                    Some(o) => return decide(o),
                    None => return None,
                }
            }
            Some(Ordering::Equal)
        }
        o => decide(o),
    }
}

/// Partial comparison; `None` means incomparable.
pub fn compare_terms(s: &Term, t: &Term) -> Option<Ordering> {
    match (s, t) {
        (Term::Var(x), Term::Var(y)) => (x == y).then_some(Ordering::Equal),
        (Term::Var(x), u) => u.occurs(*x).then_some(Ordering::Less),
        (u, Term::Var(y)) => u.occurs(*y).then_some(Ordering::Greater),
        (Term::App(f, fs), Term::App(g, gs)) => kbo_app(f, fs, g, gs),
    }
}

fn class(a: &Atom) -> u8 {
    u8::from(is_shallow_pred(&a.pred))
}

pub fn compare_atoms(a: &Atom, b: &Atom) -> Option<Ordering> {
    match class(a).cmp(&class(b)) {
        Ordering::Equal => kbo_app(&a.pred, &a.args, &b.pred, &b.args),
        o => Some(o),
    }
}

/// Total order on ground atoms (compare_atoms restricted to ground atoms).
pub fn cmp_ground_atoms(a: &Atom, b: &Atom) -> Ordering {
    compare_atoms(a, b).unwrap_or_else(|| a.cmp(b))
}

fn greater(a: &Atom, b: &Atom) -> bool {
    compare_atoms(a, b) == Some(Ordering::Greater)
}

/// No literal of `c` other than the one at `lit` is greater than it; with
/// `strict`, none is greater or equal either. A negative and a positive
/// occurrence of the same atom count the negative one as greater.
pub fn is_maximal(c: &Clause, lit: crate::terms::LitRef, strict: bool) -> bool {
    use crate::terms::LitRef;
    let me = c.literal(lit);
    let my_neg = matches!(lit, LitRef::Neg(_));
    let others = c
        .neg
        .iter()
        .enumerate()
        .map(|(i, a)| (LitRef::Neg(i), a, true))
        .chain(c.pos.iter().enumerate().map(|(i, a)| (LitRef::Pos(i), a, false)));
    for (r, other, neg) in others {
        if r == lit {
            continue;
        }
        if greater(other, me) {
            return false;
        }
        if other == me {
            if neg && !my_neg {
                return false;
            }
            if strict && neg == my_neg {
                return false;
            }
        }
    }
    true
}
