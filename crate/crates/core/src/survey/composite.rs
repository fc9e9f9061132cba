use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kb::{EntityId, KnowledgeBase, Value};
use crate::survey::def::{QpeDef, QuestionnaireDef};
use crate::survey::ids;
use crate::survey::ingest::PartialScore;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CompositeScores {
    /// group -> respondent -> summed label values
    pub scores: BTreeMap<String, BTreeMap<EntityId, i64>>,
    pub partial: Vec<PartialScore>,
}

/// Everyone with at least one answer in the event.
pub fn respondents(kb: &KnowledgeBase, qpe: &QpeDef) -> BTreeSet<EntityId> {
    let ev = Value::Entity(ids::qpe(&qpe.id));
    kb.subjects("isAnswerOfQuestionnairePastEvent", &ev)
        .iter()
        .flat_map(|a| kb.object_entities(a, "isAnswerOfPersonToQuestionOf"))
        .collect()
}

/// Label value of `respondent`'s answer to a generic question.
fn answer_value(
    kb: &KnowledgeBase,
    qpe: &QpeDef,
    respondent: &EntityId,
    question: &str,
) -> Option<i64> {
    let a = ids::answer(&qpe.id, respondent.as_str(), question, None);
    let label = kb.object_entities(&a, "hasAnswered").into_iter().next()?;
    kb.objects(&label, "has_Number_Of_Answer_Label")
        .first()
        .and_then(Value::as_int)
}

/// Sums each respondent's label values per composite group and stores the
/// total as `has_Characteristic_Value` on their group characteristics.
/// Respondents missing items get the sum of what they answered and are
/// listed in `partial`.
pub fn compute_composite_scores(
    kb: &mut KnowledgeBase,
    def: &QuestionnaireDef,
    qpe: &QpeDef,
) -> Result<CompositeScores> {
    let mut out = CompositeScores::default();
    let people = respondents(kb, qpe);
    let ev = Value::Entity(ids::qpe(&qpe.id));
    for (group, questions) in def.composite_groups() {
        let ct = Value::Entity(ids::characteristic_type(&def.id, group));
        let scores = out.scores.entry(group.to_string()).or_default();
        for p in &people {
            let values: Vec<i64> = questions
                .iter()
                .filter_map(|q| answer_value(kb, qpe, p, &q.id))
                .collect();
            let score: i64 = values.iter().sum();
            if values.len() < questions.len() {
                out.partial.push(PartialScore {
                    respondent: p.to_string(),
                    group: group.to_string(),
                    answered: values.len(),
                    expected: questions.len(),
                    score,
                });
            }
            scores.insert(p.clone(), score);

            let carriers: Vec<EntityId> = kb
                .subjects("isCharacteristicOfPerson", &Value::Entity(p.clone()))
                .into_iter()
                .filter(|c| {
                    kb.contains(c, "isCharacteristicOfType", &ct)
                        && kb.contains(c, "isCharacteristicOfQPE", &ev)
                })
                .collect();
            if carriers.is_empty() {
                return Err(Error::MissingIndexIndividual(format!(
                    "no {group} characteristic for {p} in {}; was the knowledge base saturated?",
                    qpe.id
                )));
            }
            let text = Value::Str(score.to_string());
            for c in carriers {
                if let Some(existing) = kb.objects(&c, "has_Characteristic_Value").first() {
                    if *existing != text {
                        return Err(Error::ConflictingValue(format!(
                            "{c} has_Characteristic_Value is {} not {}",
                            existing.to_literal(),
                            text.to_literal()
                        )));
                    }
                }
                kb.assert(&c, "has_Characteristic_Name", Value::Str(group.to_string()))?;
                kb.assert(&c, "has_Characteristic_Value", text.clone())?;
            }
        }
    }
    out.partial.sort();
    Ok(out)
}

/// Categorical characteristic values per respondent, read from their
/// answers: name -> respondent -> value.
pub fn characteristic_values(
    kb: &KnowledgeBase,
    def: &QuestionnaireDef,
    qpe: &QpeDef,
) -> BTreeMap<String, BTreeMap<EntityId, String>> {
    let mut out: BTreeMap<String, BTreeMap<EntityId, String>> = BTreeMap::new();
    let people = respondents(kb, qpe);
    for q in &def.questions {
        let Some(c) = &q.characteristic else {
            continue;
        };
        let by_person = out.entry(c.name.clone()).or_default();
        for p in &people {
            let a = ids::answer(&qpe.id, p.as_str(), &q.id, None);
            for label in kb.object_entities(&a, "hasAnswered") {
                let text = kb.objects(&label, "has_Value");
                if let Some(v) = text
                    .first()
                    .and_then(Value::as_str)
                    .and_then(|l| c.values.get(l))
                {
                    by_person.insert(p.clone(), v.clone());
                }
            }
        }
    }
    out
}
