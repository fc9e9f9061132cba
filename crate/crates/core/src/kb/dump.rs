//! Line-oriented fact dump:
//! `<subject> <predicate> <object> # <asserted|inferred:rule_id>`.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::kb::store::{Fact, KnowledgeBase, Provenance};
use crate::kb::value::{EntityId, Value};

pub fn write_fact_dump(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    for fact in kb.facts() {
        let subject = Value::Entity(fact.subject).to_literal();
        writeln!(
            out,
            "{subject} {} {} # {}",
            fact.predicate,
            fact.object.to_literal(),
            fact.provenance
        )
        .expect("write to string");
    }
    out
}

pub fn parse_fact_dump(text: &str) -> Result<Vec<Fact>> {
    let mut facts = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let err = |message: &str| Error::FactDump {
            line: idx + 1,
            message: message.to_string(),
        };
        if line.trim().is_empty() {
            continue;
        }
        let (body, prov) = line
            .rsplit_once(" # ")
            .ok_or_else(|| err("missing provenance"))?;
        let provenance = match prov.trim() {
            "asserted" => Provenance::Asserted,
            other => match other.strip_prefix("inferred:") {
                Some(rule) if !rule.is_empty() => Provenance::inferred(rule),
                _ => return Err(err("bad provenance")),
            },
        };
        let mut parts = body.splitn(3, ' ');
        let (Some(s), Some(p), Some(o)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err("expected subject, predicate and object"));
        };
        let subject = match Value::parse_literal(s) {
            Some(Value::Entity(e)) => e,
            _ => EntityId::new(s).map_err(|_| err("bad subject"))?,
        };
        let object = Value::parse_literal(o).ok_or_else(|| err("bad object"))?;
        facts.push(Fact::new(subject, p, object, provenance));
    }
    Ok(facts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::schema::Schema;

    #[test]
    fn dump_round_trips() {
        let mut kb = KnowledgeBase::new(Schema::bundled());
        let net = EntityId::new("Net1").unwrap();
        kb.assert(
            &net,
            "has_Network_Name",
            Value::Str("Friendship # relation".into()),
        )
        .unwrap();
        kb.assert_type(&net, "SNANetwork").unwrap();
        kb.assert_fact(Fact::new(
            net.clone(),
            "hasMember",
            Value::entity("007").unwrap(),
            Provenance::inferred("Rule-1"),
        ))
        .unwrap();
        let text = write_fact_dump(&kb);
        assert!(
            text.contains("Net1 hasMember <007> # inferred:Rule-1\n"),
            "{text}"
        );
        let parsed = parse_fact_dump(&text).unwrap();
        assert_eq!(parsed, kb.facts().collect::<Vec<_>>());
    }

    #[test]
    fn malformed_lines_are_reported() {
        assert!(matches!(
            parse_fact_dump("a isA Person\n"),
            Err(Error::FactDump { line: 1, .. })
        ));
    }
}
