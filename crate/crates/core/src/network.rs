//! Directed graphs derived from a saturated knowledge base.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kb::{EntityId, KnowledgeBase, Value};
use crate::survey::{ids, QuestionKind, QuestionnaireDef, ResponseRecord};

/// Relation types whose thresholds are nested, narrowest first.
pub const NESTED_RELATION_TYPES: [&str; 3] = ["Friendship", "Workmate", "Acquaintance"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DerivedNetwork {
    pub network_id: EntityId,
    pub qpe_id: EntityId,
    pub relation_type: String,
    /// Sorted by id; fixes node indices in exports.
    pub members: Vec<EntityId>,
    pub edges: BTreeSet<(EntityId, EntityId)>,
}

impl DerivedNetwork {
    pub fn isolates(&self) -> Vec<EntityId> {
        let touched: BTreeSet<&EntityId> = self.edges.iter().flat_map(|(s, t)| [s, t]).collect();
        self.members
            .iter()
            .filter(|m| !touched.contains(m))
            .cloned()
            .collect()
    }
}

fn relation_name(kb: &KnowledgeBase, net: &EntityId) -> String {
    if let Some(name) = kb
        .objects(net, "has_Network_Name")
        .first()
        .and_then(Value::as_str)
    {
        return name.to_string();
    }
    kb.object_entities(net, "isNetworkOfTypeOfRelation")
        .iter()
        .find_map(|t| {
            kb.objects(t, "has_Relation_Name")
                .first()
                .and_then(Value::as_str)
                .map(str::to_string)
        })
        .unwrap_or_else(|| net.to_string())
}

/// One network per SNANetwork of the event, ordered by network id. Edges
/// come from the SNARelation individuals of each network; `symmetrize`
/// adds the reverse of every edge.
pub fn build_networks(
    kb: &KnowledgeBase,
    qpe_id: &str,
    symmetrize: bool,
) -> Result<Vec<DerivedNetwork>> {
    let ev = ids::qpe(qpe_id);
    if !kb.has_type(&ev, "QuestionnairePastEvent") {
        return Err(Error::UnknownQpe(qpe_id.to_string()));
    }
    let mut nets: BTreeSet<EntityId> = kb.object_entities(&ev, "hasNetwork").into_iter().collect();
    nets.extend(kb.subjects("isNetworkOfQPE", &Value::Entity(ev.clone())));

    let mut out = Vec::new();
    for net in nets {
        let members = kb.object_entities(&net, "hasMember");
        let mut edges = BTreeSet::new();
        for rel in kb.subjects("isRelationOfNetwork", &Value::Entity(net.clone())) {
            for p in kb.object_entities(&rel, "isRelationOfPerson") {
                for q in kb.object_entities(&rel, "isRelationWith") {
                    if p != q {
                        if symmetrize {
                            edges.insert((q.clone(), p.clone()));
                        }
                        edges.insert((p.clone(), q));
                    }
                }
            }
        }
        out.push(DerivedNetwork {
            relation_type: relation_name(kb, &net),
            network_id: net,
            qpe_id: EntityId::new(qpe_id)?,
            members,
            edges,
        });
    }
    Ok(out)
}

/// True when each listed network's edges are contained in the next one's.
pub fn edges_nested(chain: &[&DerivedNetwork]) -> bool {
    chain.windows(2).all(|w| w[0].edges.is_subset(&w[1].edges))
}

/// Friendship ⊆ Workmate ⊆ Acquaintance, over whichever of the three are
/// present.
pub fn network_nesting_check(nets: &[DerivedNetwork]) -> bool {
    let chain: Vec<&DerivedNetwork> = NESTED_RELATION_TYPES
        .iter()
        .filter_map(|name| nets.iter().find(|n| n.relation_type == *name))
        .collect();
    edges_nested(&chain)
}

/// Edge sets per relation type computed straight from response records,
/// without the knowledge base: the last answer per (respondent, target)
/// wins, self-nominations are ignored.
pub fn threshold_scan(
    def: &QuestionnaireDef,
    qpe_id: &str,
    records: &[ResponseRecord],
) -> BTreeMap<String, BTreeSet<(String, String)>> {
    let mut out: BTreeMap<String, BTreeSet<(String, String)>> = def
        .relation_types
        .iter()
        .map(|r| (r.name.clone(), BTreeSet::new()))
        .collect();
    let Some(roster) = def.roster_question() else {
        return out;
    };
    debug_assert_eq!(roster.kind, QuestionKind::Roster);
    let mut last: BTreeMap<(&str, &str), i64> = BTreeMap::new();
    for r in records {
        if r.qpe_id != qpe_id || r.question_id != roster.id {
            continue;
        }
        let Some(t) = r.target.as_deref() else {
            continue;
        };
        if t == r.respondent {
            continue;
        }
        if let Some(v) = roster.label_value(&r.label) {
            last.insert((r.respondent.as_str(), t), v);
        }
    }
    for rt in &def.relation_types {
        let set = out.get_mut(&rt.name).expect("seeded above");
        for ((p, q), v) in &last {
            if rt.accepted_values.contains(v) {
                set.insert((p.to_string(), q.to_string()));
            }
        }
    }
    out
}
