//! Entity naming for ingested survey data. Components are percent-escaped
//! (including `:`), so every id is unambiguous.

use crate::kb::{escape_component, EntityId};

fn part(s: &str) -> String {
    escape_component(s).replace(':', "%3A")
}

fn id(kind: &str, parts: &[&str]) -> EntityId {
    let mut out = kind.to_string();
    for p in parts {
        out.push(':');
        out.push_str(&part(p));
    }
    EntityId::new(out).expect("escaped ids contain no whitespace")
}

pub fn questionnaire(questionnaire_id: &str) -> EntityId {
    id("questionnaire", &[questionnaire_id])
}

pub fn qpe(qpe_id: &str) -> EntityId {
    id("qpe", &[qpe_id])
}

pub fn question(questionnaire_id: &str, question_id: &str) -> EntityId {
    id("question", &[questionnaire_id, question_id])
}

pub fn label(questionnaire_id: &str, question_id: &str, label: &str) -> EntityId {
    id("label", &[questionnaire_id, question_id, label])
}

pub fn relation_type(questionnaire_id: &str, name: &str) -> EntityId {
    id("reltype", &[questionnaire_id, name])
}

pub fn network(qpe_id: &str, relation_type: &str) -> EntityId {
    id("net", &[qpe_id, relation_type])
}

pub fn characteristic_type(questionnaire_id: &str, name: &str) -> EntityId {
    id("chartype", &[questionnaire_id, name])
}

pub fn characteristic_value(questionnaire_id: &str, name: &str, value: &str) -> EntityId {
    id("charvalue", &[questionnaire_id, name, value])
}

pub fn answer(qpe_id: &str, respondent: &str, question_id: &str, target: Option<&str>) -> EntityId {
    match target {
        Some(t) => id("answer", &[qpe_id, respondent, question_id, t]),
        None => id("answer", &[qpe_id, respondent, question_id]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_cannot_run_together() {
        assert_ne!(label("q", "a:b", "c"), label("q", "a", "b:c"));
        assert_eq!(
            label("q", "Q1", "Almost never").as_str(),
            "label:q:Q1:Almost%20never"
        );
        assert_ne!(answer("e", "a", "q", None), answer("e", "a", "q", Some("")));
    }
}
