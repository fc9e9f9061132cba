use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kb::index::{FactIndex, Triple};
use crate::kb::schema::{Range, Schema, IS_A};
use crate::kb::skolem::{skolem_id, SkolemKey};
use crate::kb::value::{EntityId, Value};

/// Where a fact came from. `Asserted` sorts before any inference, so when
/// the same triple arrives twice the asserted provenance wins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    Asserted,
    Inferred(String),
}

impl Provenance {
    pub fn inferred(rule_id: impl Into<String>) -> Self {
        Provenance::Inferred(rule_id.into())
    }

    pub fn rule_id(&self) -> Option<&str> {
        match self {
            Provenance::Asserted => None,
            Provenance::Inferred(r) => Some(r),
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Asserted => f.write_str("asserted"),
            Provenance::Inferred(rule) => write!(f, "inferred:{rule}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub subject: EntityId,
    pub predicate: String,
    pub object: Value,
    pub provenance: Provenance,
}

impl Fact {
    pub fn new(
        subject: EntityId,
        predicate: impl Into<String>,
        object: Value,
        provenance: Provenance,
    ) -> Self {
        Fact {
            subject,
            predicate: predicate.into(),
            object,
            provenance,
        }
    }

    pub fn asserted(subject: EntityId, predicate: impl Into<String>, object: Value) -> Self {
        Fact::new(subject, predicate, object, Provenance::Asserted)
    }

    /// Class-membership fact `(subject, isA, class)`.
    pub fn is_a(subject: EntityId, class: &str) -> Result<Self> {
        Ok(Fact::asserted(subject, IS_A, Value::entity(class)?))
    }
}

/// A term of a programmatic pattern query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternTerm {
    Var(String),
    Const(Value),
}

impl PatternTerm {
    pub fn var(name: &str) -> Self {
        PatternTerm::Var(name.trim_start_matches('?').to_string())
    }

    pub fn entity(name: &str) -> Result<Self> {
        Value::entity(name).map(PatternTerm::Const)
    }
}

/// One triple template. The predicate is a name or a variable; a bound
/// predicate variable takes the predicate name as an entity value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(subject: PatternTerm, predicate: PatternTerm, object: PatternTerm) -> Self {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }

    /// Shorthand: `?x` terms become variables, `"..."` strings, everything
    /// else entity constants (predicates are names unless prefixed by `?`).
    pub fn parse(s: &str, p: &str, o: &str) -> Result<Self> {
        let term = |t: &str| -> Result<PatternTerm> {
            if t.starts_with('?') {
                Ok(PatternTerm::var(t))
            } else {
                Value::parse_literal(t)
                    .map(PatternTerm::Const)
                    .ok_or_else(|| Error::InvalidEntityId(t.to_string()))
            }
        };
        Ok(TriplePattern::new(term(s)?, term(p)?, term(o)?))
    }
}

pub type Bindings = BTreeMap<String, Value>;

/// Schema-validated fact store with provenance and skolem registry.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    schema: Arc<Schema>,
    facts: BTreeMap<Triple, Provenance>,
    index: FactIndex,
    skolems: BTreeMap<SkolemKey, EntityId>,
}

impl KnowledgeBase {
    pub fn new(schema: impl Into<Arc<Schema>>) -> Self {
        KnowledgeBase {
            schema: schema.into(),
            facts: BTreeMap::new(),
            index: FactIndex::default(),
            skolems: BTreeMap::new(),
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_arc(&self) -> Arc<Schema> {
        self.schema.clone()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Checks a fact against the schema and returns its canonical triple.
    pub fn validate(&self, fact: &Fact) -> Result<Triple> {
        if fact.predicate == IS_A {
            let class = fact
                .object
                .as_entity()
                .ok_or_else(|| Error::RangeViolation {
                    property: IS_A.to_string(),
                    expected: "class name".to_string(),
                    found: fact.object.kind_name().to_string(),
                })?;
            let canon = self
                .schema
                .resolve_class(class.as_str())
                .ok_or_else(|| Error::UnknownClass(class.to_string()))?;
            return Ok(Triple {
                subject: fact.subject.clone(),
                predicate: Arc::from(IS_A),
                object: Value::entity(canon)?,
            });
        }
        let sig = self
            .schema
            .resolve_property(&fact.predicate)
            .ok_or_else(|| Error::UnknownPredicate(fact.predicate.clone()))?;
        match (&sig.range, fact.object.datatype()) {
            (Range::Class(_), None) => {}
            (Range::Class(c), Some(_)) => {
                return Err(Error::RangeViolation {
                    property: sig.name.clone(),
                    expected: format!("an individual of {c}"),
                    found: fact.object.kind_name().to_string(),
                })
            }
            (Range::Datatype(dt), Some(found)) if *dt == found => {}
            (Range::Datatype(dt), _) => {
                return Err(Error::DatatypeMismatch {
                    property: sig.name.clone(),
                    expected: dt.to_string(),
                    found: fact.object.kind_name().to_string(),
                })
            }
        }
        Ok(Triple {
            subject: fact.subject.clone(),
            predicate: Arc::from(sig.name.as_str()),
            object: fact.object.clone(),
        })
    }

    /// Adds a fact. Returns `Ok(false)` when the triple was already present.
    pub fn assert_fact(&mut self, fact: Fact) -> Result<bool> {
        let triple = self.validate(&fact)?;
        Ok(self.insert_triple(triple, fact.provenance))
    }

    /// Asserted-provenance shorthand for [`KnowledgeBase::assert_fact`].
    pub fn assert(&mut self, subject: &EntityId, predicate: &str, object: Value) -> Result<bool> {
        self.assert_fact(Fact::asserted(subject.clone(), predicate, object))
    }

    pub fn assert_type(&mut self, subject: &EntityId, class: &str) -> Result<bool> {
        self.assert_fact(Fact::is_a(subject.clone(), class)?)
    }

    pub(crate) fn insert_triple(&mut self, triple: Triple, provenance: Provenance) -> bool {
        match self.facts.get_mut(&triple) {
            Some(existing) => {
                if provenance < *existing {
                    *existing = provenance;
                }
                false
            }
            None => {
                self.index.insert(&triple);
                self.facts.insert(triple, provenance);
                true
            }
        }
    }

    pub(crate) fn index(&self) -> &FactIndex {
        &self.index
    }

    pub(crate) fn contains_triple(&self, t: &Triple) -> bool {
        self.facts.contains_key(t)
    }

    pub fn contains(&self, subject: &EntityId, predicate: &str, object: &Value) -> bool {
        let pred = self.canonical_predicate(predicate);
        let object = match (pred, object) {
            (Some(IS_A), Value::Entity(c)) => match self.schema.resolve_class(c.as_str()) {
                Some(canon) => Value::entity(canon).expect("class names are valid ids"),
                None => return false,
            },
            _ => object.clone(),
        };
        pred.and_then(|p| self.index.predicate(p))
            .is_some_and(|idx| idx.contains(subject, &object))
    }

    pub fn provenance(
        &self,
        subject: &EntityId,
        predicate: &str,
        object: &Value,
    ) -> Option<&Provenance> {
        let pred = self.canonical_predicate(predicate)?;
        self.facts.get(&Triple {
            subject: subject.clone(),
            predicate: Arc::from(pred),
            object: object.clone(),
        })
    }

    fn canonical_predicate<'a>(&'a self, predicate: &'a str) -> Option<&'a str> {
        if predicate == IS_A {
            Some(IS_A)
        } else {
            self.schema
                .resolve_property(predicate)
                .map(|sig| sig.name.as_str())
        }
    }

    /// All facts in canonical order.
    pub fn facts(&self) -> impl Iterator<Item = Fact> + '_ {
        self.facts.iter().map(|(t, prov)| Fact {
            subject: t.subject.clone(),
            predicate: t.predicate.to_string(),
            object: t.object.clone(),
            provenance: prov.clone(),
        })
    }

    pub fn triples(&self) -> impl Iterator<Item = (&Triple, &Provenance)> {
        self.facts.iter()
    }

    /// The set of (subject, predicate, object) triples, ignoring provenance.
    pub fn triple_set(&self) -> BTreeSet<Triple> {
        self.facts.keys().cloned().collect()
    }

    /// Objects of `(subject, predicate, ?)`, sorted.
    pub fn objects(&self, subject: &EntityId, predicate: &str) -> Vec<Value> {
        let mut out: Vec<Value> = self
            .canonical_predicate(predicate)
            .and_then(|p| self.index.predicate(p))
            .and_then(|idx| idx.by_subject.get(subject))
            .cloned()
            .unwrap_or_default();
        out.sort();
        out
    }

    /// Entity objects of `(subject, predicate, ?)`, sorted.
    pub fn object_entities(&self, subject: &EntityId, predicate: &str) -> Vec<EntityId> {
        self.objects(subject, predicate)
            .into_iter()
            .filter_map(|v| v.as_entity().cloned())
            .collect()
    }

    /// Subjects of `(?, predicate, object)`, sorted.
    pub fn subjects(&self, predicate: &str, object: &Value) -> Vec<EntityId> {
        let mut out: Vec<EntityId> = self
            .canonical_predicate(predicate)
            .and_then(|p| self.index.predicate(p))
            .and_then(|idx| idx.by_object.get(object))
            .cloned()
            .unwrap_or_default();
        out.sort();
        out
    }

    /// Instances of `class` and of every subclass.
    pub fn class_instances(&self, class: &str) -> Result<BTreeSet<EntityId>> {
        let closure = self
            .schema
            .subclass_closure(class)
            .ok_or_else(|| Error::UnknownClass(class.to_string()))?;
        let Some(idx) = self.index.predicate(IS_A) else {
            return Ok(BTreeSet::new());
        };
        let mut out = BTreeSet::new();
        for c in closure {
            let key = Value::entity(c)?;
            if let Some(subjects) = idx.by_object.get(&key) {
                out.extend(subjects.iter().cloned());
            }
        }
        Ok(out)
    }

    /// True when `entity` is an instance of `class` or one of its subclasses.
    pub fn has_type(&self, entity: &EntityId, class: &str) -> bool {
        let (Some(closure), Some(idx)) = (
            self.schema.subclass_closure(class),
            self.index.predicate(IS_A),
        ) else {
            return false;
        };
        idx.by_subject.get(entity).is_some_and(|classes| {
            classes
                .iter()
                .any(|c| c.as_entity().is_some_and(|c| closure.contains(c.as_str())))
        })
    }

    /// Evaluates a conjunction of triple patterns. Every binding that
    /// satisfies all patterns at once is returned exactly once, sorted.
    /// Unknown constants simply match nothing.
    pub fn query_pattern(&self, patterns: &[TriplePattern]) -> Vec<Bindings> {
        let mut resolved = Vec::with_capacity(patterns.len());
        for pat in patterns {
            let predicate = match &pat.predicate {
                PatternTerm::Var(v) => PatternTerm::Var(v.clone()),
                PatternTerm::Const(Value::Entity(name)) => {
                    match self.canonical_predicate(name.as_str()) {
                        Some(p) => PatternTerm::Const(Value::entity(p).expect("valid")),
                        None => return Vec::new(),
                    }
                }
                PatternTerm::Const(_) => return Vec::new(),
            };
            let object = match (&predicate, &pat.object) {
                (PatternTerm::Const(Value::Entity(p)), PatternTerm::Const(Value::Entity(c)))
                    if p.as_str() == IS_A =>
                {
                    match self.schema.resolve_class(c.as_str()) {
                        Some(canon) => PatternTerm::Const(Value::entity(canon).expect("valid")),
                        None => return Vec::new(),
                    }
                }
                _ => pat.object.clone(),
            };
            resolved.push(TriplePattern::new(pat.subject.clone(), predicate, object));
        }
        let mut results = BTreeSet::new();
        let mut used = vec![false; resolved.len()];
        let mut bindings = Bindings::new();
        self.join(&resolved, &mut used, &mut bindings, &mut results);
        results.into_iter().collect()
    }

    fn join(
        &self,
        patterns: &[TriplePattern],
        used: &mut [bool],
        bindings: &mut Bindings,
        out: &mut BTreeSet<Bindings>,
    ) {
        // Most-bound pattern next; ties go to the earliest written.
        let bound = |t: &PatternTerm, b: &Bindings| match t {
            PatternTerm::Const(_) => true,
            PatternTerm::Var(v) => b.contains_key(v),
        };
        let next = (0..patterns.len()).filter(|&i| !used[i]).max_by_key(|&i| {
            let p = &patterns[i];
            let score = [&p.subject, &p.predicate, &p.object]
                .into_iter()
                .filter(|t| bound(t, bindings))
                .count();
            (score, std::cmp::Reverse(i))
        });
        let Some(i) = next else {
            out.insert(bindings.clone());
            return;
        };
        used[i] = true;
        let pat = &patterns[i];
        let resolve = |t: &PatternTerm, b: &Bindings| -> Option<Value> {
            match t {
                PatternTerm::Const(v) => Some(v.clone()),
                PatternTerm::Var(v) => b.get(v).cloned(),
            }
        };
        let pred_value = resolve(&pat.predicate, bindings);
        let subj_value = resolve(&pat.subject, bindings);
        let obj_value = resolve(&pat.object, bindings);

        let predicates: Vec<Arc<str>> = match &pred_value {
            Some(Value::Entity(p)) => vec![Arc::from(p.as_str())],
            Some(_) => Vec::new(),
            None => {
                let mut all: Vec<Arc<str>> =
                    self.index.predicates().map(|(p, _)| p.clone()).collect();
                all.sort();
                all
            }
        };
        for p in predicates {
            let Some(idx) = self.index.predicate(&p) else {
                continue;
            };
            let candidates: Vec<(EntityId, Value)> = match (&subj_value, &obj_value) {
                (Some(Value::Entity(s)), Some(o)) => {
                    if idx.contains(s, o) {
                        vec![(s.clone(), o.clone())]
                    } else {
                        Vec::new()
                    }
                }
                (Some(Value::Entity(s)), None) => idx
                    .by_subject
                    .get(s)
                    .map(|os| os.iter().map(|o| (s.clone(), o.clone())).collect())
                    .unwrap_or_default(),
                (Some(_), _) => Vec::new(),
                (None, Some(o)) => idx
                    .by_object
                    .get(o)
                    .map(|ss| ss.iter().map(|s| (s.clone(), o.clone())).collect())
                    .unwrap_or_default(),
                (None, None) => idx.pairs.clone(),
            };
            for (s, o) in candidates {
                let mut added = Vec::new();
                let ok = bind(
                    &pat.predicate,
                    Value::entity(&*p).expect("valid"),
                    bindings,
                    &mut added,
                ) && bind(&pat.subject, Value::Entity(s), bindings, &mut added)
                    && bind(&pat.object, o, bindings, &mut added);
                if ok {
                    self.join(patterns, used, bindings, out);
                }
                for v in added {
                    bindings.remove(&v);
                }
            }
        }
        used[i] = false;
    }

    /// Deterministic individual for `(rule_id, var_name, args)`; the same key
    /// always yields the same id and distinct keys yield distinct ids.
    ///
    /// Panics when `args` is empty.
    pub fn skolem(&mut self, rule_id: &str, var_name: &str, args: &[Value]) -> EntityId {
        assert!(!args.is_empty(), "skolem requires at least one argument");
        let key = SkolemKey::new(rule_id, var_name, args);
        self.skolems
            .entry(key)
            .or_insert_with_key(|k| skolem_id(&k.rule_id, &k.var_name, &k.args))
            .clone()
    }

    pub(crate) fn register_skolem(&mut self, key: SkolemKey, id: EntityId) {
        self.skolems.entry(key).or_insert(id);
    }

    pub fn skolem_registry(&self) -> &BTreeMap<SkolemKey, EntityId> {
        &self.skolems
    }

    /// A copy holding only asserted facts (and no rule-minted skolems).
    pub fn asserted_only(&self) -> KnowledgeBase {
        let mut kb = KnowledgeBase::new(self.schema.clone());
        for (t, prov) in &self.facts {
            if *prov == Provenance::Asserted {
                kb.insert_triple(t.clone(), prov.clone());
            }
        }
        kb
    }
}

fn bind(
    term: &PatternTerm,
    value: Value,
    bindings: &mut Bindings,
    added: &mut Vec<String>,
) -> bool {
    match term {
        PatternTerm::Const(c) => *c == value,
        PatternTerm::Var(v) => match bindings.get(v) {
            Some(existing) => *existing == value,
            None => {
                bindings.insert(v.clone(), value);
                added.push(v.clone());
                true
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> EntityId {
        EntityId::new(s).unwrap()
    }

    fn kb() -> KnowledgeBase {
        KnowledgeBase::new(Schema::bundled())
    }

    #[test]
    fn asserting_twice_keeps_one_fact() {
        let mut kb = kb();
        assert!(kb.assert_type(&e("Abott"), "Person").unwrap());
        assert!(!kb.assert_type(&e("Abott"), "Person").unwrap());
        assert_eq!(kb.len(), 1);
    }

    #[test]
    fn int_property_rejects_string() {
        let mut kb = kb();
        let err = kb
            .assert(&e("QPE01"), "has_Event_Id", Value::Str("x".into()))
            .unwrap_err();
        assert!(matches!(err, Error::DatatypeMismatch { .. }), "{err}");
        assert!(kb.is_empty());
    }

    #[test]
    fn network_name_string_is_accepted() {
        let mut kb = kb();
        kb.assert(
            &e("Net1"),
            "has_Network_Name",
            Value::Str("Friendship relation".into()),
        )
        .unwrap();
        assert!(kb.contains(
            &e("Net1"),
            "has_Network_Name",
            &Value::Str("Friendship relation".into())
        ));
    }

    #[test]
    fn unknown_predicate_and_range_violations() {
        let mut kb = kb();
        assert!(matches!(
            kb.assert(&e("a"), "likes", Value::Int(1)),
            Err(Error::UnknownPredicate(_))
        ));
        assert!(matches!(
            kb.assert(&e("n"), "hasMember", Value::Str("Abott".into())),
            Err(Error::RangeViolation { .. })
        ));
        assert!(matches!(
            kb.assert(&e("n"), "has_Network_Name", Value::entity("x").unwrap()),
            Err(Error::DatatypeMismatch { .. })
        ));
        assert!(matches!(
            kb.assert_type(&e("a"), "Unicorn"),
            Err(Error::UnknownClass(_))
        ));
    }

    #[test]
    fn aliases_are_stored_canonically() {
        let mut kb = kb();
        kb.assert(
            &e("a1"),
            "isAnAnsweringRelatingTo",
            Value::entity("Juan").unwrap(),
        )
        .unwrap();
        let f = kb.facts().next().unwrap();
        assert_eq!(f.predicate, "isAnAnswerRelatingTo");
        kb.assert_type(&e("c"), "SNACaracteristic").unwrap();
        assert!(kb.contains(&e("c"), IS_A, &Value::entity("SNACharacteristic").unwrap()));
    }

    #[test]
    fn asserted_provenance_wins_regardless_of_order() {
        let mut a = kb();
        let mut b = kb();
        let fact = |prov| Fact::new(e("n"), "hasMember", Value::entity("p").unwrap(), prov);
        a.assert_fact(fact(Provenance::inferred("Rule-1"))).unwrap();
        a.assert_fact(fact(Provenance::Asserted)).unwrap();
        b.assert_fact(fact(Provenance::Asserted)).unwrap();
        b.assert_fact(fact(Provenance::inferred("Rule-1"))).unwrap();
        assert_eq!(a.facts().collect::<Vec<_>>(), b.facts().collect::<Vec<_>>());
        assert_eq!(a.facts().next().unwrap().provenance, Provenance::Asserted);
    }

    #[test]
    fn query_persons_in_name_order() {
        let mut kb = kb();
        kb.assert_type(&e("Clarck"), "Person").unwrap();
        kb.assert_type(&e("Abott"), "Person").unwrap();
        let rows = kb.query_pattern(&[TriplePattern::parse("?p", "isA", "Person").unwrap()]);
        let names: Vec<_> = rows.iter().map(|b| b["p"].to_string()).collect();
        assert_eq!(names, ["Abott", "Clarck"]);
    }

    #[test]
    fn unknown_constants_yield_nothing() {
        let mut kb = kb();
        kb.assert_type(&e("Abott"), "Person").unwrap();
        assert!(kb
            .query_pattern(&[TriplePattern::parse("?p", "nope", "?o").unwrap()])
            .is_empty());
        assert!(kb
            .query_pattern(&[TriplePattern::parse("Nobody", "isA", "?c").unwrap()])
            .is_empty());
    }

    #[test]
    fn predicate_variables_bind_predicate_names() {
        let mut kb = kb();
        kb.assert_type(&e("Abott"), "Person").unwrap();
        kb.assert(&e("Net1"), "hasMember", Value::entity("Abott").unwrap())
            .unwrap();
        let rows = kb.query_pattern(&[TriplePattern::parse("?s", "?p", "Abott").unwrap()]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0]["p"].to_string(), "hasMember");
    }

    #[test]
    fn class_instances_include_subclasses() {
        let mut kb = kb();
        assert!(kb.class_instances("Person").unwrap().is_empty());
        kb.assert_type(&e("q1"), "Question").unwrap();
        kb.assert_type(&e("q2"), "QuestionSNA").unwrap();
        let all = kb.class_instances("Question").unwrap();
        assert_eq!(all.into_iter().collect::<Vec<_>>(), [e("q1"), e("q2")]);
        assert_eq!(kb.class_instances("QuestionSNA").unwrap().len(), 1);
        assert!(kb.has_type(&e("q2"), "Question"));
        assert!(!kb.has_type(&e("q1"), "QuestionSNA"));
        assert!(matches!(
            kb.class_instances("Nope"),
            Err(Error::UnknownClass(_))
        ));
    }

    #[test]
    fn skolem_is_deterministic_and_order_sensitive() {
        let mut kb = kb();
        let laura = Value::entity("Laura").unwrap();
        let juan = Value::entity("Juan").unwrap();
        let a = kb.skolem("Rule-2", "rel", &[laura.clone(), juan.clone()]);
        let b = kb.skolem("Rule-2", "rel", &[laura.clone(), juan.clone()]);
        let c = kb.skolem("Rule-2", "rel", &[juan.clone(), laura.clone()]);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.as_str(), "Rule-2/rel/Laura/Juan");
        assert_eq!(kb.skolem_registry().len(), 2);
        // Same key in a fresh store mints the same id.
        let mut other = KnowledgeBase::new(Schema::bundled());
        assert_eq!(other.skolem("Rule-2", "rel", &[laura, juan]), a);
    }

    #[test]
    fn skolem_distinguishes_relation_types() {
        let mut kb = kb();
        let laura = Value::entity("Laura").unwrap();
        let juan = Value::entity("Juan").unwrap();
        let ids: BTreeSet<EntityId> = ["Friendship", "Workmate", "Acquaintance"]
            .iter()
            .map(|t| {
                kb.skolem(
                    "Rule-2",
                    "rel",
                    &[laura.clone(), juan.clone(), Value::entity(t).unwrap()],
                )
            })
            .collect();
        assert_eq!(ids.len(), 3);
    }
}
