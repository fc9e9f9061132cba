use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDateTime;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kb::{parse_datetime, DATETIME_FORMAT};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerLabelDef {
    pub label: String,
    pub value: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionKind {
    Generic,
    Roster,
}

/// Categorical characteristic carried by a question: answer label to
/// characteristic value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacteristicDef {
    pub name: String,
    pub values: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionDef {
    pub id: String,
    #[serde(default)]
    pub text: String,
    pub kind: QuestionKind,
    pub answers: Vec<AnswerLabelDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub characteristic: Option<CharacteristicDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composite_group: Option<String>,
}

impl QuestionDef {
    pub fn label_value(&self, label: &str) -> Option<i64> {
        self.answers
            .iter()
            .find(|a| a.label == label)
            .map(|a| a.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationTypeDef {
    pub name: String,
    pub accepted_values: BTreeSet<i64>,
}

/// One dated administration of a questionnaire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QpeDef {
    pub id: String,
    #[serde(default)]
    pub questionnaire_id: String,
    #[serde(
        default,
        with = "opt_datetime",
        skip_serializing_if = "Option::is_none"
    )]
    pub date_start: Option<NaiveDateTime>,
    #[serde(
        default,
        with = "opt_datetime",
        skip_serializing_if = "Option::is_none"
    )]
    pub date_end: Option<NaiveDateTime>,
}

impl QpeDef {
    pub fn new(id: impl Into<String>, questionnaire_id: impl Into<String>) -> Self {
        QpeDef {
            id: id.into(),
            questionnaire_id: questionnaire_id.into(),
            date_start: None,
            date_end: None,
        }
    }
}

mod opt_datetime {
    use super::*;

    pub fn serialize<S: Serializer>(
        value: &Option<NaiveDateTime>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match value {
            Some(dt) => s.serialize_str(&dt.format(DATETIME_FORMAT).to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<NaiveDateTime>, D::Error> {
        match Option::<String>::deserialize(d)? {
            None => Ok(None),
            Some(s) => parse_datetime(&s)
                .map(Some)
                .ok_or_else(|| serde::de::Error::custom(format!("bad datetime {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionnaireDef {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub questions: Vec<QuestionDef>,
    #[serde(default)]
    pub relation_types: Vec<RelationTypeDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roster_question_id: Option<String>,
    /// Known administrations, with their dates.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<QpeDef>,
}

impl QuestionnaireDef {
    /// Parses and validates a questionnaire document.
    pub fn from_json(text: &str) -> Result<Self> {
        let def: QuestionnaireDef = serde_json::from_str(text)
            .map_err(|e| Error::Questionnaire(format!("line {}: {e}", e.line())))?;
        def.validate()?;
        Ok(def)
    }

    pub fn question(&self, id: &str) -> Option<&QuestionDef> {
        self.questions.iter().find(|q| q.id == id)
    }

    pub fn roster_question(&self) -> Option<&QuestionDef> {
        self.roster_question_id
            .as_deref()
            .and_then(|id| self.question(id))
    }

    pub fn relation_type(&self, name: &str) -> Option<&RelationTypeDef> {
        self.relation_types.iter().find(|r| r.name == name)
    }

    /// The administration `qpe_id`: the declared event when there is one,
    /// otherwise an undated event of this questionnaire.
    pub fn qpe(&self, qpe_id: &str) -> QpeDef {
        self.events
            .iter()
            .find(|e| e.id == qpe_id)
            .cloned()
            .map(|mut e| {
                e.questionnaire_id = self.id.clone();
                e
            })
            .unwrap_or_else(|| QpeDef::new(qpe_id, &self.id))
    }

    /// Composite groups and their member questions, in question order.
    pub fn composite_groups(&self) -> BTreeMap<&str, Vec<&QuestionDef>> {
        let mut groups: BTreeMap<&str, Vec<&QuestionDef>> = BTreeMap::new();
        for q in &self.questions {
            if let Some(g) = &q.composite_group {
                groups.entry(g).or_default().push(q);
            }
        }
        groups
    }

    pub fn generic_count(&self) -> usize {
        self.questions
            .iter()
            .filter(|q| q.kind == QuestionKind::Generic)
            .count()
    }

    pub fn roster_count(&self) -> usize {
        self.questions
            .iter()
            .filter(|q| q.kind == QuestionKind::Roster)
            .count()
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Questionnaire(m));
        if self.id.is_empty() || self.id.chars().any(char::is_whitespace) {
            return err(format!("bad questionnaire id {:?}", self.id));
        }
        let mut ids = BTreeSet::new();
        for q in &self.questions {
            if q.id.is_empty() {
                return err("empty question id".into());
            }
            if !ids.insert(q.id.as_str()) {
                return err(format!("duplicate question id {:?}", q.id));
            }
            let mut labels = BTreeSet::new();
            for a in &q.answers {
                if !labels.insert(a.label.as_str()) {
                    return err(format!(
                        "question {:?}: duplicate label {:?}",
                        q.id, a.label
                    ));
                }
            }
            let roles = [
                q.kind == QuestionKind::Roster,
                q.characteristic.is_some(),
                q.composite_group.is_some(),
            ];
            if roles.iter().filter(|r| **r).count() > 1 {
                return err(format!(
                    "question {:?} combines roster, characteristic and composite roles",
                    q.id
                ));
            }
            if let Some(c) = &q.characteristic {
                if let Some(l) = c.values.keys().find(|l| !labels.contains(l.as_str())) {
                    return err(format!(
                        "question {:?}: characteristic maps unknown label {l:?}",
                        q.id
                    ));
                }
            }
        }
        let chars: BTreeSet<&str> = self
            .questions
            .iter()
            .filter_map(|q| q.characteristic.as_ref().map(|c| c.name.as_str()))
            .collect();
        if let Some(g) = self.composite_groups().keys().find(|g| chars.contains(*g)) {
            return err(format!(
                "{g:?} is both a characteristic and a composite group"
            ));
        }

        let roster = match &self.roster_question_id {
            Some(id) => match self.question(id) {
                Some(q) if q.kind == QuestionKind::Roster => Some(q),
                Some(_) => return err(format!("roster question {id:?} is not of kind roster")),
                None => return err(format!("roster question {id:?} is not defined")),
            },
            None => None,
        };
        let mut names = BTreeSet::new();
        for rt in &self.relation_types {
            if rt.name.is_empty() || !names.insert(rt.name.as_str()) {
                return err(format!("duplicate or empty relation type {:?}", rt.name));
            }
            let Some(roster) = roster else {
                return err("relation types need a roster_question_id".into());
            };
            let values: BTreeSet<i64> = roster.answers.iter().map(|a| a.value).collect();
            if let Some(v) = rt.accepted_values.iter().find(|v| !values.contains(v)) {
                return err(format!(
                    "relation type {:?} accepts value {v} which no label of {:?} carries",
                    rt.name, roster.id
                ));
            }
        }
        for e in &self.events {
            if let (Some(s), Some(t)) = (e.date_start, e.date_end) {
                if s > t {
                    return err(format!("event {:?} ends before it starts", e.id));
                }
            }
        }
        Ok(())
    }
}

pub fn load_questionnaire(path: &Path) -> Result<QuestionnaireDef> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    QuestionnaireDef::from_json(&text).map_err(|e| match e {
        Error::Questionnaire(m) => Error::Questionnaire(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Items a respondent faces: each generic question once, each roster
/// question once per member of the roster.
pub fn question_count(def: &QuestionnaireDef, n_respondents: usize) -> usize {
    def.generic_count() + def.roster_count() * n_respondents
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = include_str!("../../../../fixtures/class_survey.json");

    fn minimal(extra: &str) -> String {
        format!(
            r#"{{"id":"q","title":"t","questions":[
                {{"id":"R","kind":"roster","answers":[{{"label":"No","value":1}},{{"label":"Yes","value":5}}]}}
            ],"roster_question_id":"R"{extra}}}"#
        )
    }

    #[test]
    fn fixture_has_table_thresholds() {
        let def = QuestionnaireDef::from_json(FIXTURE).unwrap();
        assert_eq!(
            def.relation_type("Friendship").unwrap().accepted_values,
            BTreeSet::from([4, 5])
        );
        assert_eq!(
            def.relation_type("Workmate").unwrap().accepted_values,
            BTreeSet::from([3, 4, 5])
        );
        assert_eq!(
            def.relation_type("Acquaintance").unwrap().accepted_values,
            BTreeSet::from([2, 3, 4, 5])
        );
        let roster = def.roster_question().unwrap();
        assert_eq!(roster.label_value("Never"), Some(1));
        assert_eq!(roster.label_value("Always"), Some(5));
    }

    #[test]
    fn empty_questionnaire_is_valid() {
        let def = QuestionnaireDef::from_json(r#"{"id":"q","title":"t","questions":[]}"#).unwrap();
        assert!(def.questions.is_empty());
        assert_eq!(question_count(&def, 17), 0);
    }

    #[test]
    fn accepted_value_outside_the_answer_set() {
        let doc = minimal(r#","relation_types":[{"name":"F","accepted_values":[5,7]}]"#);
        let err = QuestionnaireDef::from_json(&doc).unwrap_err();
        assert!(err.to_string().contains("value 7"), "{err}");
        let ok = minimal(r#","relation_types":[{"name":"F","accepted_values":[5]}]"#);
        QuestionnaireDef::from_json(&ok).unwrap();
    }

    #[test]
    fn structural_errors() {
        let dup = r#"{"id":"q","questions":[
            {"id":"A","kind":"generic","answers":[]},{"id":"A","kind":"generic","answers":[]}]}"#;
        assert!(QuestionnaireDef::from_json(dup).is_err());
        let no_roster =
            r#"{"id":"q","questions":[],"relation_types":[{"name":"F","accepted_values":[1]}]}"#;
        assert!(QuestionnaireDef::from_json(no_roster).is_err());
        let wrong_kind = r#"{"id":"q","questions":[{"id":"A","kind":"generic","answers":[]}],"roster_question_id":"A"}"#;
        assert!(QuestionnaireDef::from_json(wrong_kind).is_err());
        let two_roles = r#"{"id":"q","questions":[{"id":"A","kind":"generic","answers":[{"label":"x","value":1}],
            "characteristic":{"name":"C","values":{"x":"x"}},"composite_group":"G"}]}"#;
        assert!(QuestionnaireDef::from_json(two_roles).is_err());
        let backwards =
            minimal(r#","events":[{"id":"E","date_start":"2017-05-30","date_end":"2017-05-01"}]"#);
        assert!(QuestionnaireDef::from_json(&backwards).is_err());
        assert!(matches!(
            QuestionnaireDef::from_json("{"),
            Err(Error::Questionnaire(_))
        ));
    }

    #[test]
    fn counts_follow_the_roster_formula() {
        let mut questions: Vec<QuestionDef> = (0..252)
            .map(|i| QuestionDef {
                id: format!("G{i}"),
                text: String::new(),
                kind: QuestionKind::Generic,
                answers: Vec::new(),
                characteristic: None,
                composite_group: None,
            })
            .collect();
        for id in ["R1", "R2"] {
            questions.push(QuestionDef {
                id: id.into(),
                text: String::new(),
                kind: QuestionKind::Roster,
                answers: Vec::new(),
                characteristic: None,
                composite_group: None,
            });
        }
        let def = QuestionnaireDef {
            id: "q".into(),
            title: String::new(),
            questions,
            relation_types: Vec::new(),
            roster_question_id: None,
            events: Vec::new(),
        };
        assert_eq!(question_count(&def, 40), 332);
        assert_eq!(question_count(&def, 80), 412);
    }

    #[test]
    fn declared_events_carry_dates() {
        let def = QuestionnaireDef::from_json(FIXTURE).unwrap();
        let qpe = def.qpe("QPE01");
        assert_eq!(qpe.questionnaire_id, def.id);
        assert_eq!(
            qpe.date_start.unwrap().format("%Y-%m-%d").to_string(),
            "2017-05-30"
        );
        assert_eq!(def.qpe("other").date_start, None);
    }
}
