use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One answer: a respondent's label for a question, about `target` when
/// the question is a roster question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub qpe_id: String,
    pub respondent: String,
    pub question_id: String,
    #[serde(default, deserialize_with = "empty_as_none")]
    pub target: Option<String>,
    pub label: String,
    /// Source position (CSV line, or 1-based array index for JSON).
    #[serde(skip)]
    pub row: usize,
}

impl ResponseRecord {
    pub fn new(
        qpe_id: &str,
        respondent: &str,
        question_id: &str,
        target: Option<&str>,
        label: &str,
    ) -> Self {
        ResponseRecord {
            qpe_id: qpe_id.to_string(),
            respondent: respondent.to_string(),
            question_id: question_id.to_string(),
            target: target.map(str::to_string),
            label: label.to_string(),
            row: 0,
        }
    }
}

fn empty_as_none<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Option<String>, D::Error> {
    Ok(Option::<String>::deserialize(d)?.filter(|s| !s.is_empty()))
}

pub const CSV_HEADER: [&str; 5] = ["qpe_id", "respondent", "question_id", "target", "label"];

/// Parses the CSV form (`qpe_id,respondent,question_id,target,label`).
pub fn parse_responses_csv(text: &str) -> Result<Vec<ResponseRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Response {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.iter().map(str::trim).ne(CSV_HEADER) {
        return Err(Error::Response {
            row: 1,
            message: format!("expected header {}", CSV_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| Error::Response {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let mut rec: ResponseRecord =
            record
                .deserialize(Some(&headers))
                .map_err(|e| Error::Response {
                    row,
                    message: e.to_string(),
                })?;
        rec.row = row;
        out.push(rec);
    }
    Ok(out)
}

/// Parses the JSON array form with the same field names.
pub fn parse_responses_json(text: &str) -> Result<Vec<ResponseRecord>> {
    let mut out: Vec<ResponseRecord> = serde_json::from_str(text).map_err(|e| Error::Response {
        row: e.line(),
        message: e.to_string(),
    })?;
    for (i, rec) in out.iter_mut().enumerate() {
        rec.row = i + 1;
    }
    Ok(out)
}

/// Reads a response file; `.json` files use the JSON form, anything else
/// is CSV.
pub fn load_responses(path: &Path) -> Result<Vec<ResponseRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        parse_responses_json(&text)
    } else {
        parse_responses_csv(&text)
    }
}

/// Renders records as CSV with the standard header.
pub fn write_responses_csv(records: &[ResponseRecord]) -> String {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    writer.write_record(CSV_HEADER).expect("write to memory");
    for r in records {
        writer
            .write_record([
                r.qpe_id.as_str(),
                r.respondent.as_str(),
                r.question_id.as_str(),
                r.target.as_deref().unwrap_or(""),
                r.label.as_str(),
            ])
            .expect("write to memory");
    }
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("utf-8 input")
}
