//! Rule text format.
//!
//! ```text
//! rule  := name ":" atoms "->" atoms
//! atoms := atom ("^" atom)*
//! atom  := [prefix ":"] Ident "(" term ("," term)* ")"
//! term  := "?"Ident | Ident | string | number
//! ```
//!
//! Whitespace is insignificant and `#` comments run to end of line. Names
//! starting with an upper-case letter are class atoms (arity 1), other
//! names are property atoms (arity 2); `makeOWLThing` and `differentFrom`
//! are builtins and may carry the `swrlx:` prefix.

use crate::error::{Error, Result};
use crate::kb::{EntityId, Value};
use crate::rules::ast::{Builtin, Rule, RuleAtom, RuleSet, Term};

const BUILTIN_PREFIX: &str = "swrlx";

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Str(String),
    Num(Value),
    Colon,
    LParen,
    RParen,
    Comma,
    Caret,
    Arrow,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::RuleSyntax {
        line,
        column: col,
        message: message.into(),
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn step(chars: &[char], i: &mut usize, line: &mut usize, col: &mut usize) {
    if chars[*i] == '\n' {
        *line += 1;
        *col = 1;
    } else {
        *col += 1;
    }
    *i += 1;
}

fn lex(src: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                step(&chars, i, &mut line, &mut col);
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
            continue;
        }
        let push = |tok, toks: &mut Vec<Spanned>| {
            toks.push(Spanned {
                tok,
                line: start_line,
                col: start_col,
            })
        };
        match c {
            ':' => {
                push(Tok::Colon, &mut toks);
                advance(1, &mut i);
            }
            '(' => {
                push(Tok::LParen, &mut toks);
                advance(1, &mut i);
            }
            ')' => {
                push(Tok::RParen, &mut toks);
                advance(1, &mut i);
            }
            ',' => {
                push(Tok::Comma, &mut toks);
                advance(1, &mut i);
            }
            '^' => {
                push(Tok::Caret, &mut toks);
                advance(1, &mut i);
            }
            '→' => {
                push(Tok::Arrow, &mut toks);
                advance(1, &mut i);
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                push(Tok::Arrow, &mut toks);
                advance(2, &mut i);
            }
            '?' => {
                let mut j = i + 1;
                if j >= chars.len() || !chars[j].is_ascii_alphabetic() {
                    return Err(syntax(
                        start_line,
                        start_col,
                        "variable name must start with a letter",
                    ));
                }
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                let name: String = chars[i + 1..j].iter().collect();
                push(Tok::Var(name), &mut toks);
                advance(j - i, &mut i);
            }
            '"' => {
                let mut j = i + 1;
                let mut escaped = false;
                loop {
                    match chars.get(j) {
                        None | Some('\n') => {
                            return Err(syntax(
                                start_line,
                                start_col,
                                "unterminated string literal",
                            ))
                        }
                        Some('\\') if !escaped => escaped = true,
                        Some('"') if !escaped => break,
                        Some(_) => escaped = false,
                    }
                    j += 1;
                }
                let raw: String = chars[i..=j].iter().collect();
                let s: String = serde_json::from_str(&raw).map_err(|e| {
                    syntax(start_line, start_col, format!("bad string literal: {e}"))
                })?;
                push(Tok::Str(s), &mut toks);
                advance(j + 1 - i, &mut i);
            }
            c if c.is_ascii_digit()
                || ((c == '-' || c == '+')
                    && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) =>
            {
                let mut j = i + 1;
                while j < chars.len()
                    && (chars[j].is_ascii_alphanumeric()
                        || chars[j] == '.'
                        || ((chars[j] == '-' || chars[j] == '+')
                            && matches!(chars[j - 1], 'e' | 'E')))
                {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let value = text
                    .parse::<i64>()
                    .map(Value::Int)
                    .or_else(|_| text.parse::<f64>().map(Value::float))
                    .map_err(|_| syntax(start_line, start_col, format!("bad number {text:?}")))?;
                push(Tok::Num(value), &mut toks);
                advance(j - i, &mut i);
            }
            c if is_ident_start(c) => {
                let mut j = i + 1;
                while j < chars.len()
                    && (is_ident_char(chars[j])
                        || (chars[j] == '-'
                            && chars.get(j + 1).is_some_and(|d| d.is_ascii_alphanumeric())))
                {
                    j += 1;
                }
                let name: String = chars[i..j].iter().collect();
                push(Tok::Ident(name), &mut toks);
                advance(j - i, &mut i);
            }
            other => {
                return Err(syntax(
                    start_line,
                    start_col,
                    format!("unexpected character {other:?}"),
                ))
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let (line, col) = self.here();
        syntax(line, col, message)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn rule(&mut self) -> Result<Rule> {
        let (line, _) = self.here();
        let id = self.ident("rule name")?;
        self.expect(Tok::Colon, "`:` after rule name")?;
        let antecedent = self.atoms(&id)?;
        self.expect(Tok::Arrow, "`->`")?;
        let consequent = self.atoms(&id)?;
        Ok(Rule {
            id,
            antecedent,
            consequent,
            line,
        })
    }

    fn atoms(&mut self, rule: &str) -> Result<Vec<RuleAtom>> {
        let mut atoms = vec![self.atom(rule)?];
        while self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            atoms.push(self.atom(rule)?);
        }
        Ok(atoms)
    }

    fn atom(&mut self, rule: &str) -> Result<RuleAtom> {
        let (line, _) = self.here();
        let mut name = self.ident("atom name")?;
        if self.peek() == Some(&Tok::Colon) && matches!(self.peek_at(1), Some(Tok::Ident(_))) {
            if name != BUILTIN_PREFIX {
                return Err(self.error(format!("unknown prefix {name:?}")));
            }
            self.pos += 1;
            name = self.ident("builtin name")?;
            if Builtin::from_name(&name).is_none() {
                return Err(self.error(format!("unknown builtin {BUILTIN_PREFIX}:{name}")));
            }
        }
        self.expect(Tok::LParen, "`(`")?;
        let mut args = vec![self.term()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            args.push(self.term()?);
        }
        self.expect(Tok::RParen, "`)`")?;

        let arity = |expected: &str| Error::Arity {
            rule: rule.to_string(),
            atom: name.clone(),
            expected: expected.to_string(),
            found: args.len(),
            line,
        };
        match Builtin::from_name(&name) {
            Some(Builtin::DifferentFrom) if args.len() != 2 => Err(arity("2")),
            Some(Builtin::MakeOwlThing) if args.len() < 2 => Err(arity("at least 2")),
            Some(builtin) => Ok(RuleAtom::Builtin { builtin, args }),
            None if name.starts_with(|c: char| c.is_ascii_uppercase()) => {
                if args.len() != 1 {
                    return Err(arity("1"));
                }
                Ok(RuleAtom::Class {
                    class: name,
                    term: args.pop().expect("one argument"),
                })
            }
            None => {
                if args.len() != 2 {
                    return Err(arity("2"));
                }
                let object = args.pop().expect("two arguments");
                let subject = args.pop().expect("two arguments");
                Ok(RuleAtom::Property {
                    property: name,
                    subject,
                    object,
                })
            }
        }
    }

    fn term(&mut self) -> Result<Term> {
        let term = match self.peek() {
            Some(Tok::Var(v)) => Term::Var(v.clone()),
            Some(Tok::Ident(name)) => {
                Term::Const(EntityId::new(name).map_err(|_| self.error("bad constant"))?)
            }
            Some(Tok::Str(s)) => Term::Literal(Value::Str(s.clone())),
            Some(Tok::Num(v)) => Term::Literal(v.clone()),
            _ => return Err(self.error("expected a term")),
        };
        self.pos += 1;
        Ok(term)
    }
}

/// Parses a rule file. Structural problems are errors; name resolution and
/// safety are left to [`crate::rules::validate_rules`].
pub fn parse_ruleset(text: &str) -> Result<RuleSet> {
    let toks = lex(text)?;
    let end = text
        .lines()
        .enumerate()
        .last()
        .map(|(i, l)| (i + 1, l.chars().count() + 1))
        .unwrap_or((1, 1));
    let mut parser = Parser { toks, pos: 0, end };
    let mut rules = Vec::new();
    while parser.peek().is_some() {
        rules.push(parser.rule()?);
    }
    Ok(RuleSet { rules })
}

/// Parses a single rule.
pub fn parse_rule(text: &str) -> Result<Rule> {
    let mut set = parse_ruleset(text)?;
    match set.rules.len() {
        1 => Ok(set.rules.pop().expect("one rule")),
        n => Err(syntax(
            1,
            1,
            format!("expected exactly one rule, found {n}"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const RULE_1: &str =
        "Rule-1: Person(?p) ^ SNANetwork(?net) ^ AnswerOfPersonToQuestion(?aoptq) ^ \
        isAnswerOfQuestionnairePastEvent(?aoptq, ?qpe) ^ hasNetwork(?qpe, ?net) \
        -> hasMember(?net, ?p) ^ hasAnsweredToQuestionnairePastEvent(?p, ?qpe)";

    #[test]
    fn first_rule_has_five_premises_and_two_conclusions() {
        let rule = parse_rule(RULE_1).unwrap();
        assert_eq!(rule.id, "Rule-1");
        assert_eq!(rule.antecedent.len(), 5);
        assert_eq!(rule.consequent.len(), 2);
        assert_eq!(
            rule.consequent[0],
            RuleAtom::Property {
                property: "hasMember".into(),
                subject: Term::Var("net".into()),
                object: Term::Var("p".into()),
            }
        );
    }

    #[test]
    fn identity_rule_parses() {
        let rule = parse_rule("r: Person(?p) -> Person(?p)").unwrap();
        assert_eq!(rule.antecedent, rule.consequent);
    }

    #[test]
    fn property_atom_with_one_argument_is_an_arity_error() {
        let err = parse_rule("r: hasMember(?n) -> Person(?n)").unwrap_err();
        assert!(
            matches!(&err, Error::Arity { atom, found: 1, .. } if atom == "hasMember"),
            "{err}"
        );
        assert!(matches!(
            parse_rule("r: Person(?a, ?b) -> Person(?a)"),
            Err(Error::Arity { .. })
        ));
        assert!(matches!(
            parse_rule("r: Person(?a) ^ differentFrom(?a) -> Person(?a)"),
            Err(Error::Arity { .. })
        ));
        assert!(matches!(
            parse_rule("r: Person(?a) ^ swrlx:makeOWLThing(?x) -> Person(?x)"),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn builtin_prefix_is_stripped() {
        let rule = parse_rule("r: Person(?p) ^ swrlx:makeOWLThing(?x, ?p) -> Person(?x)").unwrap();
        assert_eq!(
            rule.antecedent[1],
            RuleAtom::Builtin {
                builtin: Builtin::MakeOwlThing,
                args: vec![Term::Var("x".into()), Term::Var("p".into())],
            }
        );
        let plain = parse_rule("r: Person(?p) ^ makeOWLThing(?x, ?p) -> Person(?x)").unwrap();
        assert_eq!(rule, plain);
        assert!(parse_rule("r: Person(?p) ^ foo:makeOWLThing(?x, ?p) -> Person(?x)").is_err());
    }

    #[test]
    fn comments_literals_and_multiple_rules() {
        let text = "# header\n\
            a: Person(?p) # trailing\n -> has_Network_Name(?p, \"x y\")\n\
            b: Person(?p) → has_Event_Id(?p, -3) ^ has_SNA_Value(?p, 2.5e-1)\n";
        let set = parse_ruleset(text).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.rules[0].line, 2);
        assert_eq!(set.rules[1].line, 4);
        assert_eq!(
            set.rules[1].consequent[1].terms()[1],
            &Term::Literal(Value::float(0.25))
        );
        assert_eq!(
            set.rules[1].consequent[0].terms()[1],
            &Term::Literal(Value::Int(-3))
        );
    }

    #[test]
    fn syntax_errors_report_line_and_column() {
        let err = parse_ruleset("r: Person(?p)\n  -> Person(p ?)").unwrap_err();
        match err {
            Error::RuleSyntax { line, column, .. } => assert_eq!((line, column), (2, 15)),
            other => panic!("unexpected {other}"),
        }
        assert!(matches!(
            parse_ruleset("r: Person(?p) ->"),
            Err(Error::RuleSyntax { .. })
        ));
        assert!(matches!(
            parse_ruleset("r Person(?p) -> Person(?p)"),
            Err(Error::RuleSyntax {
                line: 1,
                column: 3,
                ..
            })
        ));
        assert!(matches!(
            parse_ruleset("r: Person(?1) -> Person(?p)"),
            Err(Error::RuleSyntax { .. })
        ));
    }

    #[test]
    fn empty_text_is_an_empty_ruleset() {
        assert!(parse_ruleset("").unwrap().is_empty());
        assert!(parse_ruleset("# nothing\n").unwrap().is_empty());
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        prop_oneof![
            "[a-z][a-zA-Z0-9_]{0,4}".prop_map(Term::Var),
            "[a-z][a-zA-Z0-9_]{0,4}".prop_map(|s| Term::Const(EntityId::new(s).unwrap())),
            "[ -~]{0,5}".prop_map(|s| Term::Literal(Value::Str(s))),
            any::<i32>().prop_map(|i| Term::Literal(Value::Int(i as i64))),
        ]
    }

    fn arb_atom() -> impl Strategy<Value = RuleAtom> {
        prop_oneof![
            ("[A-Z][a-zA-Z_]{0,5}", arb_term())
                .prop_map(|(class, term)| RuleAtom::Class { class, term }),
            ("[a-z][a-zA-Z_]{0,5}", arb_term(), arb_term()).prop_filter_map(
                "builtin names",
                |(property, subject, object)| {
                    Builtin::from_name(&property)
                        .is_none()
                        .then_some(RuleAtom::Property {
                            property,
                            subject,
                            object,
                        })
                }
            ),
            (arb_term(), arb_term()).prop_map(|(a, b)| RuleAtom::Builtin {
                builtin: Builtin::DifferentFrom,
                args: vec![a, b],
            }),
            prop::collection::vec(arb_term(), 2..4).prop_map(|args| RuleAtom::Builtin {
                builtin: Builtin::MakeOwlThing,
                args,
            }),
        ]
    }

    proptest! {
        #[test]
        fn printed_rules_parse_back(
            id in "[A-Za-z][A-Za-z0-9_]{0,3}(-[0-9]{1,2})?",
            antecedent in prop::collection::vec(arb_atom(), 1..5),
            consequent in prop::collection::vec(arb_atom(), 1..4),
        ) {
            let rule = Rule { id, antecedent, consequent, line: 1 };
            let reparsed = parse_rule(&rule.to_string()).unwrap();
            prop_assert_eq!(reparsed, rule);
        }
    }
}
