use std::collections::BTreeMap;
use std::fmt;

use crate::terms::{classify, Classification, Clause, Signature};

/// Stable clause identifier. Ids are never reused inside one set or trace.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ClauseId(pub u32);

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Ordered set of identified clauses.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ClauseSet {
    entries: BTreeMap<ClauseId, Clause>,
    next: u32,
}

impl ClauseSet {
    pub fn new() -> Self {
        ClauseSet::default()
    }

    pub fn from_clauses(clauses: impl IntoIterator<Item = Clause>) -> Self {
        let mut s = ClauseSet::new();
        for c in clauses {
            s.push(c);
        }
        s
    }

    pub fn push(&mut self, c: Clause) -> ClauseId {
        let id = ClauseId(self.next);
        self.next += 1;
        self.entries.insert(id, c);
        id
    }

    /// Inserts under a caller-chosen id; later pushes never reuse it.
    pub fn insert(&mut self, id: ClauseId, c: Clause) {
        self.next = self.next.max(id.0 + 1);
        self.entries.insert(id, c);
    }

    /// Makes sure freshly pushed ids start at `n` or later.
    pub fn reserve_ids_below(&mut self, n: u32) {
        self.next = self.next.max(n);
    }

    pub fn next_id(&self) -> u32 {
        self.next
    }

    pub fn get(&self, id: ClauseId) -> Option<&Clause> {
        self.entries.get(&id)
    }

    pub fn contains(&self, id: ClauseId) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn remove(&mut self, id: ClauseId) -> Option<Clause> {
        self.entries.remove(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClauseId, &Clause)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn ids(&self) -> Vec<ClauseId> {
        self.entries.keys().copied().collect()
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn signature(&self) -> Signature {
        Signature::from_clauses(self.clauses())
    }

    pub fn classify(&self) -> Classification {
        classify(self.clauses())
    }

    /// Clauses as a plain sorted list, ignoring ids.
    pub fn sorted_clauses(&self) -> Vec<Clause> {
        let mut v: Vec<Clause> = self.clauses().cloned().collect();
        v.sort();
        v
    }
}

impl fmt::Display for ClauseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, c) in self.iter() {
            writeln!(f, "[{id}] {c}.")?;
        }
        Ok(())
    }
}
