use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::kb::value::{EntityId, Value};

/// A ground (subject, predicate, object) triple with a canonical predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: EntityId,
    pub predicate: Arc<str>,
    pub object: Value,
}

#[derive(Debug, Default, Clone)]
pub(crate) struct PredicateIndex {
    pub pairs: Vec<(EntityId, Value)>,
    pub by_subject: HashMap<EntityId, Vec<Value>>,
    pub by_object: HashMap<Value, Vec<EntityId>>,
    members: HashSet<(EntityId, Value)>,
}

impl PredicateIndex {
    pub fn contains(&self, s: &EntityId, o: &Value) -> bool {
        self.members.contains(&(s.clone(), o.clone()))
    }
}

/// Per-predicate access paths over a set of triples. Used for both the full
/// store and the per-round deltas of saturation.
#[derive(Debug, Default, Clone)]
pub(crate) struct FactIndex {
    preds: HashMap<Arc<str>, PredicateIndex>,
    len: usize,
}

impl FactIndex {
    pub fn insert(&mut self, t: &Triple) -> bool {
        let idx = self.preds.entry(t.predicate.clone()).or_default();
        if !idx.members.insert((t.subject.clone(), t.object.clone())) {
            return false;
        }
        idx.pairs.push((t.subject.clone(), t.object.clone()));
        idx.by_subject
            .entry(t.subject.clone())
            .or_default()
            .push(t.object.clone());
        idx.by_object
            .entry(t.object.clone())
            .or_default()
            .push(t.subject.clone());
        self.len += 1;
        true
    }

    pub fn predicate(&self, p: &str) -> Option<&PredicateIndex> {
        self.preds.get(p)
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&Arc<str>, &PredicateIndex)> {
        self.preds.iter()
    }

    pub fn len(&self) -> usize {
        self.len
    }
}
