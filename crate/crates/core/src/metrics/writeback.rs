use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::kb::{EntityId, KnowledgeBase, Value};
use crate::metrics::{ActorIndex, MetricsReport};

/// Member-level index classes; each has `is<X>OfPerson` and
/// `is<X>OfNetwork` links.
const MEMBER_INDICES: [(&str, ActorIndex); 6] = [
    ("IndividualBetweenness", |a| a.betweenness),
    ("IndividualCloseness", |a| a.closeness),
    ("IndividualDegree", |a| a.degree as f64),
    ("IndividualInDegree", |a| a.indegree as f64),
    ("IndividualOutDegree", |a| a.outdegree as f64),
    ("IndividualEigenvector", |a| a.eigenvector),
];

fn network_values(r: &MetricsReport) -> [(&'static str, f64); 12] {
    let m = &r.network;
    [
        ("hasNetworkBetweenness", m.network_betweenness),
        ("hasNetworkCloseness", m.network_closeness),
        ("hasNetworkDegree", m.network_degree),
        ("hasNetworkInDegree", m.network_indegree),
        ("hasNetworkOutDegree", m.network_outdegree),
        ("hasNetworkEigenvector", m.network_eigenvector),
        ("hasNumberOfActors", m.number_of_actors as f64),
        (
            "hasNumberOfActorsInvolvedInARelation",
            m.number_of_actors_involved as f64,
        ),
        ("hasNumberOfObjectActors", m.number_of_object_actors as f64),
        (
            "hasNumberOfSubjectActors",
            m.number_of_subject_actors as f64,
        ),
        ("hasNumberOfRelations", m.number_of_relations as f64),
        ("hasDensityOfNetwork", m.density),
    ]
}

fn set_value(kb: &mut KnowledgeBase, target: &EntityId, x: f64) -> Result<()> {
    let v = Value::float(x);
    if let Some(existing) = kb
        .objects(target, "has_SNA_Value")
        .into_iter()
        .find(|e| *e != v)
    {
        return Err(Error::ConflictingValue(format!(
            "{target} has_SNA_Value is {} not {}",
            existing.to_literal(),
            v.to_literal()
        )));
    }
    kb.assert(target, "has_SNA_Value", v)?;
    Ok(())
}

fn missing(what: &str, owner: &EntityId, net: &EntityId) -> Error {
    Error::MissingIndexIndividual(format!(
        "no {what} for {owner} in {net}; was the knowledge base saturated?"
    ))
}

/// Stores a report's values as `has_SNA_Value` on the index individuals the
/// rules created for the network, and records an SNAIsolate for every
/// member without ties. Running it again with the same report changes
/// nothing.
pub fn write_back(kb: &mut KnowledgeBase, report: &MetricsReport) -> Result<()> {
    let net = &report.network_id;
    let net_value = Value::Entity(net.clone());
    for actor in &report.actors {
        let person = Value::Entity(actor.id.clone());
        for (class, value) in MEMBER_INDICES {
            let of_person: BTreeSet<EntityId> = kb
                .subjects(&format!("is{}OfPerson", class), &person)
                .into_iter()
                .collect();
            let targets: Vec<EntityId> = kb
                .subjects(&format!("is{}OfNetwork", class), &net_value)
                .into_iter()
                .filter(|i| of_person.contains(i))
                .collect();
            if targets.is_empty() {
                return Err(missing(class, &actor.id, net));
            }
            for t in targets {
                set_value(kb, &t, value(actor))?;
            }
        }
    }
    for (prop, value) in network_values(report) {
        let targets = kb.object_entities(net, prop);
        if targets.is_empty() {
            return Err(missing(prop, net, net));
        }
        for t in targets {
            set_value(kb, &t, value)?;
        }
    }
    for p in &report.isolate_ids {
        let person = Value::Entity(p.clone());
        let iso = kb.skolem("write_back", "iso", &[person.clone(), net_value.clone()]);
        kb.assert_type(&iso, "SNAIsolate")?;
        kb.assert(&iso, "isIsolateInstanceOfNetwork", net_value.clone())?;
        kb.assert(&iso, "isIsolateInstanceOfPerson", person)?;
        kb.assert(
            net,
            "hasIsolateInstanceOfNetwork",
            Value::Entity(iso.clone()),
        )?;
        kb.assert(p, "hasIsolateInstanceOfPerson", Value::Entity(iso))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::Schema;
    use crate::metrics::MetricOptions;
    use crate::network::build_networks;
    use crate::rules::{bundled_rules, saturate};
    use crate::survey::{ingest_responses, QuestionnaireDef, ResponseRecord};

    const FIXTURE: &str = include_str!("../../../../fixtures/class_survey.json");

    fn saturated(records: &[ResponseRecord]) -> KnowledgeBase {
        let def = QuestionnaireDef::from_json(FIXTURE).unwrap();
        let mut kb = KnowledgeBase::new(Schema::bundled());
        ingest_responses(&mut kb, &def, &def.qpe("QPE01"), records).unwrap();
        saturate(&mut kb, &bundled_rules()).unwrap();
        kb
    }

    fn friendship_report(kb: &KnowledgeBase) -> MetricsReport {
        let nets = build_networks(kb, "QPE01", false).unwrap();
        let net = nets
            .iter()
            .find(|n| n.relation_type == "Friendship")
            .unwrap();
        MetricsReport::compute(net, &MetricOptions::default())
    }

    fn sna_values(kb: &KnowledgeBase) -> usize {
        kb.facts()
            .filter(|f| f.predicate == "has_SNA_Value")
            .count()
    }

    #[test]
    fn two_members_one_edge() {
        let mut kb = saturated(&[ResponseRecord::new(
            "QPE01",
            "A",
            "TIME_WITH",
            Some("B"),
            "Always",
        )]);
        let report = friendship_report(&kb);
        write_back(&mut kb, &report).unwrap();
        assert_eq!(sna_values(&kb), 24);
        let before = kb.triple_set();
        write_back(&mut kb, &report).unwrap();
        assert_eq!(kb.triple_set(), before);
    }

    #[test]
    fn degree_zero_member_gets_an_isolate() {
        let mut kb = saturated(&[
            ResponseRecord::new("QPE01", "A", "TIME_WITH", Some("B"), "Always"),
            ResponseRecord::new("QPE01", "C", "GENDER", None, "Other"),
        ]);
        let report = friendship_report(&kb);
        write_back(&mut kb, &report).unwrap();
        let isolates = kb.class_instances("SNAIsolate").unwrap();
        assert_eq!(isolates.len(), 1);
        let iso = isolates.into_iter().next().unwrap();
        assert_eq!(
            kb.object_entities(&iso, "isIsolateInstanceOfPerson"),
            vec![EntityId::new("C").unwrap()]
        );
        assert_eq!(
            kb.object_entities(&iso, "isIsolateInstanceOfNetwork"),
            vec![report.network_id.clone()]
        );
    }

    #[test]
    fn unsaturated_kb_is_rejected() {
        let kb = saturated(&[ResponseRecord::new(
            "QPE01",
            "A",
            "TIME_WITH",
            Some("B"),
            "Always",
        )]);
        let report = friendship_report(&kb);
        let mut bare = kb.asserted_only();
        assert!(matches!(
            write_back(&mut bare, &report),
            Err(Error::MissingIndexIndividual(_))
        ));
    }

    #[test]
    fn changed_values_conflict() {
        let mut kb = saturated(&[ResponseRecord::new(
            "QPE01",
            "A",
            "TIME_WITH",
            Some("B"),
            "Always",
        )]);
        let mut report = friendship_report(&kb);
        write_back(&mut kb, &report).unwrap();
        report.network.density = 0.25;
        assert!(matches!(
            write_back(&mut kb, &report),
            Err(Error::ConflictingValue(_))
        ));
    }
}
