use std::fmt;
use std::sync::Arc;

use chrono::NaiveDateTime;
use ordered_float::OrderedFloat;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Name of an individual. Two ids denote the same individual iff their
/// strings are equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId(Arc<str>);

impl EntityId {
    pub fn new(name: impl AsRef<str>) -> Result<Self> {
        let name = name.as_ref();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidEntityId(name.to_string()));
        }
        Ok(EntityId(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for EntityId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Serialize for EntityId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for EntityId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        EntityId::new(s).map_err(serde::de::Error::custom)
    }
}

/// Literal datatypes a property range may name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Datatype {
    String,
    Int,
    Float,
    DateTime,
}

impl Datatype {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "string" => Some(Datatype::String),
            "int" => Some(Datatype::Int),
            "float" => Some(Datatype::Float),
            "datetime" => Some(Datatype::DateTime),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Datatype::String => "string",
            Datatype::Int => "int",
            Datatype::Float => "float",
            Datatype::DateTime => "datetime",
        }
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Entity(EntityId),
    Str(String),
    Int(i64),
    Float(OrderedFloat<f64>),
    DateTime(NaiveDateTime),
}

pub const DATETIME_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

impl Value {
    pub fn entity(name: impl AsRef<str>) -> Result<Self> {
        EntityId::new(name).map(Value::Entity)
    }

    pub fn float(x: f64) -> Self {
        Value::Float(OrderedFloat(x))
    }

    pub fn as_entity(&self) -> Option<&EntityId> {
        match self {
            Value::Entity(e) => Some(e),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_float(&self) -> Option<f64> {
        match self {
            Value::Float(x) => Some(x.0),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    /// `None` for entities.
    pub fn datatype(&self) -> Option<Datatype> {
        match self {
            Value::Entity(_) => None,
            Value::Str(_) => Some(Datatype::String),
            Value::Int(_) => Some(Datatype::Int),
            Value::Float(_) => Some(Datatype::Float),
            Value::DateTime(_) => Some(Datatype::DateTime),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.datatype() {
            None => "entity",
            Some(dt) => dt.name(),
        }
    }

    /// Rendering used in fact dumps and skolem keys. Strings are quoted,
    /// floats always carry a `.` or an exponent, datetimes are prefixed by `@`.
    pub fn to_literal(&self) -> String {
        match self {
            Value::Entity(e) if entity_needs_brackets(e.as_str()) => format!("<{e}>"),
            Value::Entity(e) => e.to_string(),
            Value::Str(s) => serde_json::to_string(s).expect("string serializes"),
            Value::Int(i) => i.to_string(),
            Value::Float(x) => format!("{:?}", x.0),
            Value::DateTime(dt) => format!("@{}", dt.format(DATETIME_FORMAT)),
        }
    }

    /// Inverse of [`Value::to_literal`].
    pub fn parse_literal(text: &str) -> Option<Value> {
        if text.starts_with('"') {
            return serde_json::from_str::<String>(text).ok().map(Value::Str);
        }
        if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
            return EntityId::new(inner).ok().map(Value::Entity);
        }
        if let Some(rest) = text.strip_prefix('@') {
            return NaiveDateTime::parse_from_str(rest, DATETIME_FORMAT)
                .ok()
                .map(Value::DateTime);
        }
        let first = text.chars().next()?;
        if first.is_ascii_digit() || first == '-' || first == '+' {
            if let Ok(i) = text.parse::<i64>() {
                return Some(Value::Int(i));
            }
            if let Ok(x) = text.parse::<f64>() {
                return Some(Value::float(x));
            }
            return None;
        }
        if matches!(text, "inf" | "NaN") {
            return text.parse::<f64>().ok().map(Value::float);
        }
        EntityId::new(text).ok().map(Value::Entity)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

impl From<EntityId> for Value {
    fn from(e: EntityId) -> Self {
        Value::Entity(e)
    }
}

fn entity_needs_brackets(id: &str) -> bool {
    matches!(id, "inf" | "NaN")
        || id.starts_with(|c: char| c.is_ascii_digit() || matches!(c, '-' | '+' | '"' | '@' | '<'))
}

/// Parses `YYYY-MM-DDTHH:MM:SS` or a bare `YYYY-MM-DD` (midnight).
pub fn parse_datetime(s: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s, DATETIME_FORMAT)
        .ok()
        .or_else(|| {
            chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .ok()
                .and_then(|d| d.and_hms_opt(0, 0, 0))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entity_ids_reject_whitespace_and_empty() {
        assert!(EntityId::new("Abott").is_ok());
        assert!(EntityId::new("").is_err());
        assert!(EntityId::new("a b").is_err());
        assert!(EntityId::new("a\tb").is_err());
    }

    #[test]
    fn literals_round_trip() {
        let values = [
            Value::entity("QPE01").unwrap(),
            Value::Str("Friendship relation".into()),
            Value::Str("quote \" and \\ slash".into()),
            Value::Int(-42),
            Value::float(1.0),
            Value::float(0.1 + 0.2),
            Value::float(1e-12),
            Value::entity("007").unwrap(),
            Value::entity("-x").unwrap(),
            Value::entity("<odd>").unwrap(),
            Value::DateTime(parse_datetime("2017-05-30").unwrap()),
        ];
        for v in values {
            let text = v.to_literal();
            assert_eq!(Value::parse_literal(&text), Some(v.clone()), "{text}");
        }
    }

    #[test]
    fn float_literal_is_distinct_from_int() {
        assert_eq!(Value::float(3.0).to_literal(), "3.0");
        assert_eq!(Value::parse_literal("3"), Some(Value::Int(3)));
    }
}
