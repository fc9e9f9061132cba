use std::fmt::Write;

use crate::kb::value::{EntityId, Value};

/// Registry key of a minted individual.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SkolemKey {
    pub rule_id: String,
    pub var_name: String,
    pub args: Vec<Value>,
}

impl SkolemKey {
    pub fn new(rule_id: &str, var_name: &str, args: &[Value]) -> Self {
        SkolemKey {
            rule_id: rule_id.to_string(),
            var_name: var_name.to_string(),
            args: args.to_vec(),
        }
    }
}

/// `rule_id/var_name/arg1/arg2/...` with every component percent-escaped,
/// so distinct keys can never render to the same id.
pub fn skolem_id(rule_id: &str, var_name: &str, args: &[Value]) -> EntityId {
    let mut out = String::new();
    escape_into(&mut out, rule_id);
    out.push('/');
    escape_into(&mut out, var_name);
    for arg in args {
        out.push('/');
        escape_into(&mut out, &arg.to_literal());
    }
    EntityId::new(out).expect("escaped skolem ids contain no whitespace")
}

/// Percent-escapes `%`, `/`, whitespace and control characters.
pub fn escape_component(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    escape_into(&mut out, s);
    out
}

fn escape_into(out: &mut String, s: &str) {
    if s.is_empty() {
        // keeps `a//b` and `a/%/b` apart from an empty component
        out.push_str("%00");
        return;
    }
    for c in s.chars() {
        if c == '%' || c == '/' || c.is_whitespace() || c.is_control() {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                write!(out, "%{b:02X}").expect("write to string");
            }
        } else {
            out.push(c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn escapes_separators_and_spaces() {
        assert_eq!(escape_component("Almost never"), "Almost%20never");
        assert_eq!(escape_component("a/b%c"), "a%2Fb%25c");
        let id = skolem_id("r", "x", &[Value::Str("a b".into())]);
        assert_eq!(id.as_str(), "r/x/\"a%20b\"");
    }

    fn arb_value() -> impl Strategy<Value = Value> {
        prop_oneof![
            "[a-zA-Z0-9_/% -]{1,6}".prop_map(Value::Str),
            "[a-zA-Z0-9_/%-]{1,6}".prop_map(|s| Value::entity(s).unwrap()),
            any::<i64>().prop_map(Value::Int),
        ]
    }

    proptest! {
        #[test]
        fn distinct_keys_give_distinct_ids(
            r1 in "[a-z/%-]{1,4}", v1 in "[a-z/% ]{1,4}", a1 in prop::collection::vec(arb_value(), 1..4),
            r2 in "[a-z/%-]{1,4}", v2 in "[a-z/% ]{1,4}", a2 in prop::collection::vec(arb_value(), 1..4),
        ) {
            let k1 = (r1.clone(), v1.clone(), a1.clone());
            let k2 = (r2.clone(), v2.clone(), a2.clone());
            let same_id = skolem_id(&r1, &v1, &a1) == skolem_id(&r2, &v2, &a2);
            prop_assert_eq!(same_id, k1 == k2);
        }
    }
}
