use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kb::{EntityId, KnowledgeBase, Value};
use crate::survey::def::{QpeDef, QuestionKind, QuestionnaireDef};
use crate::survey::ids;
use crate::survey::responses::ResponseRecord;

/// Counts from [`ingest_responses`]; `partial_scores` is filled in later
/// by [`crate::survey::compute_composite_scores`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestionReport {
    pub ingested: usize,
    pub dropped_self: usize,
    pub duplicates: usize,
    /// Records of other questionnaire events, left out of this ingestion.
    pub skipped_other_qpe: usize,
    pub partial_scores: Vec<PartialScore>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PartialScore {
    pub respondent: String,
    pub group: String,
    pub answered: usize,
    pub expected: usize,
    pub score: i64,
}

fn entity(name: &str) -> Result<EntityId> {
    EntityId::new(name)
}

/// Person ids are taken verbatim; `:` is reserved for generated ids.
fn person(name: &str, row: usize) -> Result<EntityId> {
    if name.contains(':') {
        return Err(Error::Response {
            row,
            message: format!("person id {name:?} must not contain ':'"),
        });
    }
    EntityId::new(name).map_err(|e| Error::Response {
        row,
        message: e.to_string(),
    })
}

/// Questionnaire, event, label and network individuals for one event.
/// Safe to repeat.
pub fn ingest_scaffolding(
    kb: &mut KnowledgeBase,
    def: &QuestionnaireDef,
    qpe: &QpeDef,
) -> Result<()> {
    let qn = ids::questionnaire(&def.id);
    let ev = ids::qpe(&qpe.id);
    kb.assert_type(&qn, "Questionnaire")?;
    kb.assert_type(&ev, "QuestionnairePastEvent")?;
    kb.assert(&ev, "hasQuestionnaire", Value::Entity(qn.clone()))?;
    kb.assert(&qn, "isQuestionnaireOf", Value::Entity(ev.clone()))?;
    if let Some(d) = qpe.date_start {
        kb.assert(&ev, "has_Date_Start", Value::DateTime(d))?;
    }
    if let Some(d) = qpe.date_end {
        kb.assert(&ev, "has_Date_End", Value::DateTime(d))?;
    }

    for q in &def.questions {
        let qe = ids::question(&def.id, &q.id);
        let class = match q.kind {
            QuestionKind::Roster => "QuestionSNA",
            QuestionKind::Generic => "Question",
        };
        kb.assert_type(&qe, class)?;
        kb.assert(&qe, "has_Question_Text", Value::Str(q.text.clone()))?;
        kb.assert(&qe, "isQuestionOf", Value::Entity(qn.clone()))?;
        kb.assert(&qn, "hasQuestion", Value::Entity(qe.clone()))?;
        for a in &q.answers {
            let le = ids::label(&def.id, &q.id, &a.label);
            kb.assert_type(&le, "Answer_Label")?;
            kb.assert(&le, "has_Value", Value::Str(a.label.clone()))?;
            kb.assert(&le, "has_Number_Of_Answer_Label", Value::Int(a.value))?;
        }
        if let Some(c) = &q.characteristic {
            let ct = ids::characteristic_type(&def.id, &c.name);
            kb.assert_type(&ct, "SNATypeOfCharacteristic")?;
            kb.assert(&ct, "isCharacteristicOfQuestion", Value::Entity(qe.clone()))?;
            kb.assert(
                &qe,
                "isQuestionOfTypeOfCharacteristic",
                Value::Entity(ct.clone()),
            )?;
            for (label, value) in &c.values {
                let cv = ids::characteristic_value(&def.id, &c.name, value);
                kb.assert_type(&cv, "SNACharacteristicValue")?;
                kb.assert(
                    &cv,
                    "isPossibleCharacteristicValueOf",
                    Value::Entity(ct.clone()),
                )?;
                kb.assert(
                    &ct,
                    "hasPossibleCharacteristicValue",
                    Value::Entity(cv.clone()),
                )?;
                let le = ids::label(&def.id, &q.id, label);
                kb.assert(
                    &le,
                    "isAnswerOfCharacteristicValue",
                    Value::Entity(cv.clone()),
                )?;
                kb.assert(&cv, "isCharacteristicValueOfAnswer", Value::Entity(le))?;
            }
        }
    }

    for (group, questions) in def.composite_groups() {
        let ct = ids::characteristic_type(&def.id, group);
        let cv = ids::characteristic_value(&def.id, group, "sum");
        kb.assert_type(&ct, "SNATypeOfCharacteristic")?;
        kb.assert_type(&cv, "SNACaracteristicValueInteger")?;
        kb.assert(
            &cv,
            "isPossibleCharacteristicValueOf",
            Value::Entity(ct.clone()),
        )?;
        kb.assert(&ct, "hasPossibleCharacteristicValue", Value::Entity(cv))?;
        for q in questions {
            let qe = ids::question(&def.id, &q.id);
            kb.assert(&ct, "isCharacteristicOfQuestion", Value::Entity(qe.clone()))?;
            kb.assert(
                &qe,
                "isQuestionOfTypeOfCharacteristic",
                Value::Entity(ct.clone()),
            )?;
        }
    }

    let roster = def.roster_question();
    for rt in &def.relation_types {
        let te = ids::relation_type(&def.id, &rt.name);
        let net = ids::network(&qpe.id, &rt.name);
        kb.assert_type(&te, "SNATypeOfRelation")?;
        kb.assert(&te, "has_Relation_Name", Value::Str(rt.name.clone()))?;
        kb.assert_type(&net, "SNANetwork")?;
        kb.assert(&net, "has_Network_Name", Value::Str(rt.name.clone()))?;
        if let Some(d) = qpe.date_start {
            kb.assert(&net, "has_Date", Value::DateTime(d))?;
        }
        kb.assert(&net, "isNetworkOfQPE", Value::Entity(ev.clone()))?;
        kb.assert(&ev, "hasNetwork", Value::Entity(net.clone()))?;
        kb.assert(&net, "isNetworkOfTypeOfRelation", Value::Entity(te.clone()))?;
        kb.assert(&te, "isTypeOfRelationOfNetwork", Value::Entity(net))?;
        if let Some(roster) = roster {
            let qe = ids::question(&def.id, &roster.id);
            kb.assert(
                &te,
                "hasQuestionOfTypeOfRelation",
                Value::Entity(qe.clone()),
            )?;
            kb.assert(&qe, "isQuestionOfTypeOfRelation", Value::Entity(te.clone()))?;
            for a in roster
                .answers
                .iter()
                .filter(|a| rt.accepted_values.contains(&a.value))
            {
                let le = ids::label(&def.id, &roster.id, &a.label);
                kb.assert(&le, "isAnswerOfTypeOfRelation", Value::Entity(te.clone()))?;
                kb.assert(&te, "hasAnswerOfTypeOfRelation", Value::Entity(le))?;
            }
        }
    }
    Ok(())
}

type RecordKey<'a> = (&'a str, &'a str, Option<&'a str>);

/// Checks every record, drops self-nominations and keeps the last of each
/// (respondent, question, target) duplicate. Returned records are in
/// first-seen order.
pub fn select_records<'a>(
    def: &QuestionnaireDef,
    qpe: &QpeDef,
    records: &'a [ResponseRecord],
    report: &mut IngestionReport,
) -> Result<Vec<&'a ResponseRecord>> {
    let mut order: Vec<RecordKey<'a>> = Vec::new();
    let mut latest: BTreeMap<RecordKey<'a>, &'a ResponseRecord> = BTreeMap::new();
    for rec in records {
        let err = |message: String| Error::Response {
            row: rec.row,
            message,
        };
        if rec.qpe_id != qpe.id {
            report.skipped_other_qpe += 1;
            continue;
        }
        person(&rec.respondent, rec.row)?;
        let question = def
            .question(&rec.question_id)
            .ok_or_else(|| err(format!("unknown question id {:?}", rec.question_id)))?;
        if question.label_value(&rec.label).is_none() {
            return Err(err(format!(
                "label {:?} is not an answer of question {:?}",
                rec.label, rec.question_id
            )));
        }
        match (question.kind, &rec.target) {
            (QuestionKind::Roster, None) => {
                return Err(err(format!(
                    "roster question {:?} needs a target",
                    question.id
                )))
            }
            (QuestionKind::Generic, Some(_)) => {
                return Err(err(format!(
                    "generic question {:?} takes no target",
                    question.id
                )))
            }
            (QuestionKind::Roster, Some(t)) => {
                person(t, rec.row)?;
                if *t == rec.respondent {
                    log::warn!("row {}: {} nominated themselves; dropped", rec.row, t);
                    report.dropped_self += 1;
                    continue;
                }
            }
            (QuestionKind::Generic, None) => {}
        }
        let key = (
            rec.respondent.as_str(),
            rec.question_id.as_str(),
            rec.target.as_deref(),
        );
        if latest.insert(key, rec).is_some() {
            log::warn!(
                "row {}: repeated answer of {} to {}; keeping the later one",
                rec.row,
                rec.respondent,
                rec.question_id
            );
            report.duplicates += 1;
        } else {
            order.push(key);
        }
    }
    Ok(order.into_iter().map(|k| latest[&k]).collect())
}

/// Materializes the answers of one questionnaire event. Records of other
/// events are skipped; see [`IngestionReport`].
pub fn ingest_responses(
    kb: &mut KnowledgeBase,
    def: &QuestionnaireDef,
    qpe: &QpeDef,
    records: &[ResponseRecord],
) -> Result<IngestionReport> {
    let mut report = IngestionReport::default();
    let selected = select_records(def, qpe, records, &mut report)?;
    ingest_scaffolding(kb, def, qpe)?;
    let ev = ids::qpe(&qpe.id);
    for rec in selected {
        let p = person(&rec.respondent, rec.row)?;
        let qe = ids::question(&def.id, &rec.question_id);
        let le = ids::label(&def.id, &rec.question_id, &rec.label);
        let a = ids::answer(
            &qpe.id,
            &rec.respondent,
            &rec.question_id,
            rec.target.as_deref(),
        );

        if let Some(previous) = kb.object_entities(&a, "hasAnswered").first() {
            if *previous != le {
                return Err(Error::ConflictingValue(format!(
                    "{a} already answered with {previous}, row {} says {le}",
                    rec.row
                )));
            }
        }
        kb.assert_type(&p, "Person")?;
        kb.assert_type(&a, "AnswerOfPersonToQuestion")?;
        kb.assert(&a, "isAnswerOfPersonToQuestionOf", Value::Entity(p.clone()))?;
        kb.assert(&a, "hasAnsweredTo", Value::Entity(qe))?;
        kb.assert(&a, "hasAnswered", Value::Entity(le))?;
        kb.assert(
            &a,
            "isAnswerOfQuestionnairePastEvent",
            Value::Entity(ev.clone()),
        )?;
        kb.assert(&ev, "hasAnswerOfPersonToQuestion", Value::Entity(a.clone()))?;
        if let Some(t) = &rec.target {
            let q = entity(t)?;
            kb.assert_type(&q, "Person")?;
            kb.assert(&a, "isAnAnswerRelatingTo", Value::Entity(q))?;
        }
        report.ingested += 1;
    }
    Ok(report)
}
