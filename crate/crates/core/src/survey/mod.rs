//! Questionnaire definitions, response ingestion and composite scores.

mod composite;
mod def;
pub mod ids;
mod ingest;
mod responses;

pub use composite::{
    characteristic_values, compute_composite_scores, respondents, CompositeScores,
};
pub use def::{
    load_questionnaire, question_count, AnswerLabelDef, CharacteristicDef, QpeDef, QuestionDef,
    QuestionKind, QuestionnaireDef, RelationTypeDef,
};
pub use ingest::{
    ingest_responses, ingest_scaffolding, select_records, IngestionReport, PartialScore,
};
pub use responses::{
    load_responses, parse_responses_csv, parse_responses_json, write_responses_csv, ResponseRecord,
    CSV_HEADER,
};
