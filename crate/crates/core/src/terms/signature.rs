use std::collections::BTreeMap;

use super::{Clause, Symbol, Term};

/// Function and predicate symbols with their arities.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Signature {
    pub functions: BTreeMap<Symbol, usize>,
    pub predicates: BTreeMap<Symbol, usize>,
}

impl Signature {
    pub fn from_clauses<'a>(clauses: impl IntoIterator<Item = &'a Clause>) -> Self {
        let mut sig = Signature::default();
        for c in clauses {
            c.collect_symbols(&mut sig.functions, &mut sig.predicates);
        }
        sig
    }

    pub fn merge(&mut self, other: &Signature) {
        self.functions.extend(other.functions.iter().map(|(k, v)| (k.clone(), *v)));
        self.predicates.extend(other.predicates.iter().map(|(k, v)| (k.clone(), *v)));
    }

    pub fn add_function(&mut self, name: &str, arity: usize) {
        self.functions.insert(Symbol::new(name), arity);
    }

    pub fn constants(&self) -> impl Iterator<Item = &Symbol> {
        self.functions.iter().filter(|(_, a)| **a == 0).map(|(s, _)| s)
    }

    pub fn has_constant(&self) -> bool {
        self.constants().next().is_some()
    }

    /// Some constant, adding `a` when the signature has none.
    pub fn ensure_constant(&mut self) -> Symbol {
        if let Some(c) = self.constants().next() {
            return c.clone();
        }
        self.add_function("a", 0);
        Symbol::new("a")
    }

    /// Signature restricted to function symbols accepted by `keep`.
    pub fn filter_functions(&self, keep: impl Fn(&Symbol) -> bool) -> Signature {
        Signature {
            functions: self.functions.iter().filter(|(s, _)| keep(s)).map(|(s, a)| (s.clone(), *a)).collect(),
            predicates: self.predicates.clone(),
        }
    }

    /// Every ground term of depth at most `depth`, shallowest first.
    pub fn ground_terms(&self, depth: usize) -> Vec<Term> {
        let mut levels: Vec<Vec<Term>> = Vec::new();
        let consts: Vec<Term> = self.constants().map(|c| Term::App(c.clone(), vec![])).collect();
        levels.push(consts);
        for d in 1..=depth {
            let below: Vec<Term> = levels.iter().flatten().cloned().collect();
            let mut level = Vec::new();
            for (f, &n) in &self.functions {
                if n == 0 {
                    continue;
                }
                // at least one argument of depth exactly d-1
                for args in tuples(&below, n) {
                    if args.iter().any(|a| a.depth() == d - 1) {
                        level.push(Term::App(f.clone(), args));
                    }
                }
            }
            levels.push(level);
        }
        levels.into_iter().flatten().collect()
    }
}

/// All `n`-tuples over `items`.
pub fn tuples<T: Clone>(items: &[T], n: usize) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * items.len());
        for prefix in &out {
            for it in items {
                let mut p = prefix.clone();
                p.push(it.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_clause;

    #[test]
    fn ground_terms_by_depth() {
        let c = parse_clause("p(f(X), a) -> p(b, X).").unwrap();
        let sig = Signature::from_clauses([&c]);
        assert_eq!(sig.ground_terms(0).len(), 2);
        assert_eq!(sig.ground_terms(1).len(), 4);
        assert_eq!(sig.ground_terms(2).len(), 6);
        assert_eq!(sig.predicates.get(&Symbol::new("p")), Some(&2));
    }
}
