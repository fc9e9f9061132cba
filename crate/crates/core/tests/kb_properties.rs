use std::collections::BTreeSet;

use proptest::prelude::*;
use sociokb::kb::{
    Bindings, EntityId, KnowledgeBase, PatternTerm, Schema, Triple, TriplePattern, Value, IS_A,
};

const ENTITIES: [&str; 4] = ["a", "b", "c", "d"];
const PREDICATES: [&str; 3] = ["hasMember", "isRelationWith", IS_A];
const CLASSES: [&str; 2] = ["Person", "SNANetwork"];

fn object_for(pred: &str, k: usize) -> Value {
    if pred == IS_A {
        Value::entity(CLASSES[k % 2]).unwrap()
    } else {
        Value::entity(ENTITIES[k % 4]).unwrap()
    }
}

fn arb_facts() -> impl Strategy<Value = Vec<(usize, usize, usize)>> {
    prop::collection::vec((0..4usize, 0..3usize, 0..4usize), 0..50)
}

fn build(facts: &[(usize, usize, usize)]) -> KnowledgeBase {
    let mut kb = KnowledgeBase::new(Schema::bundled());
    for &(s, p, o) in facts {
        let subject = EntityId::new(ENTITIES[s]).unwrap();
        kb.assert(&subject, PREDICATES[p], object_for(PREDICATES[p], o))
            .unwrap();
    }
    kb
}

#[derive(Debug, Clone)]
enum T {
    Var(usize),
    Entity(usize),
    Class(usize),
}

fn arb_term() -> impl Strategy<Value = T> {
    prop_oneof![
        (0..3usize).prop_map(T::Var),
        (0..4usize).prop_map(T::Entity),
        (0..2usize).prop_map(T::Class)
    ]
}

fn arb_pred() -> impl Strategy<Value = Option<usize>> {
    prop_oneof![Just(None), (0..3usize).prop_map(Some)]
}

const VARS: [&str; 4] = ["x", "y", "z", "p"];

fn to_pattern_term(t: &T) -> PatternTerm {
    match t {
        T::Var(i) => PatternTerm::var(VARS[*i]),
        T::Entity(i) => PatternTerm::entity(ENTITIES[*i]).unwrap(),
        T::Class(i) => PatternTerm::entity(CLASSES[*i]).unwrap(),
    }
}

/// Nested-loop join straight over the triple list.
fn brute_force(triples: &[Triple], patterns: &[TriplePattern]) -> Vec<Bindings> {
    fn unify(b: &mut Bindings, term: &PatternTerm, value: &Value) -> bool {
        match term {
            PatternTerm::Const(c) => c == value,
            PatternTerm::Var(v) => match b.get(v) {
                Some(bound) => bound == value,
                None => {
                    b.insert(v.clone(), value.clone());
                    true
                }
            },
        }
    }
    let mut results = vec![Bindings::new()];
    for pat in patterns {
        let mut next = Vec::new();
        for b in &results {
            for t in triples {
                let mut b2 = b.clone();
                let pred = Value::entity(&*t.predicate).unwrap();
                if unify(&mut b2, &pat.subject, &Value::Entity(t.subject.clone()))
                    && unify(&mut b2, &pat.predicate, &pred)
                    && unify(&mut b2, &pat.object, &t.object)
                {
                    next.push(b2);
                }
            }
        }
        results = next;
    }
    let unique: BTreeSet<Bindings> = results.into_iter().collect();
    unique.into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn assertion_order_does_not_matter(facts in arb_facts(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled = facts.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(build(&facts).triple_set(), build(&shuffled).triple_set());
    }

    #[test]
    fn query_matches_nested_loops(
        facts in arb_facts(),
        raw in prop::collection::vec((arb_term(), arb_pred(), arb_term()), 1..4),
    ) {
        let kb = build(&facts);
        let triples: Vec<Triple> = kb.triple_set().into_iter().collect();
        let patterns: Vec<TriplePattern> = raw
            .iter()
            .map(|(s, p, o)| {
                let pred = match p {
                    None => PatternTerm::var(VARS[3]),
                    Some(i) => PatternTerm::entity(PREDICATES[*i]).unwrap(),
                };
                TriplePattern::new(to_pattern_term(s), pred, to_pattern_term(o))
            })
            .collect();
        prop_assert_eq!(kb.query_pattern(&patterns), brute_force(&triples, &patterns));
    }
}
