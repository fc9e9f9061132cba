//! Class hierarchy and property signatures the fact store validates against.
//!
//! Schema documents are line oriented:
//!
//! ```text
//! class <Name> [< <Parent>]
//! prop  <name> <asserted|inferred> <DomainClass> <RangeClassOrDatatype>
//! alias <AlternateSpelling> <CanonicalName>
//! ```
//!
//! `#` starts a comment. Aliases let historical misspellings resolve to one
//! canonical class or property; facts are always stored under the canonical
//! name.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::kb::value::Datatype;

/// Reserved class-membership predicate.
pub const IS_A: &str = "isA";

const BUNDLED_SCHEMA: &str = include_str!("../../../../schema/ontosnaqa.schema");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropertyKind {
    Asserted,
    Inferred,
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PropertyKind::Asserted => "asserted",
            PropertyKind::Inferred => "inferred",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Range {
    Class(String),
    Datatype(Datatype),
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Range::Class(c) => f.write_str(c),
            Range::Datatype(d) => write!(f, "({d})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertySig {
    pub name: String,
    pub kind: PropertyKind,
    pub domain_class: String,
    pub range: Range,
}

#[derive(Debug, Clone, Default)]
pub struct Schema {
    /// class -> optional parent
    classes: BTreeMap<String, Option<String>>,
    properties: BTreeMap<String, PropertySig>,
    class_aliases: BTreeMap<String, String>,
    property_aliases: BTreeMap<String, String>,
    /// class -> itself plus every transitive subclass
    descendants: BTreeMap<String, BTreeSet<String>>,
}

impl Schema {
    /// Parses a schema document.
    pub fn parse(doc: &str) -> Result<Schema> {
        let mut classes: BTreeMap<String, Option<String>> = BTreeMap::new();
        let mut properties: BTreeMap<String, PropertySig> = BTreeMap::new();
        let mut aliases: Vec<(String, String)> = Vec::new();

        for (idx, raw) in doc.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: &str| Error::SchemaSyntax {
                line: line_no,
                message: message.to_string(),
            };
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                ["class", name] => insert_class(&mut classes, name, None)?,
                ["class", name, "<", parent] => insert_class(&mut classes, name, Some(parent))?,
                ["class", ..] => return Err(syntax("expected `class <Name> [< <Parent>]`")),
                ["prop", name, kind, domain, range] => {
                    let kind = match *kind {
                        "asserted" => PropertyKind::Asserted,
                        "inferred" => PropertyKind::Inferred,
                        other => return Err(syntax(&format!("unknown property kind {other:?}"))),
                    };
                    let range = match Datatype::parse(range) {
                        Some(dt) => Range::Datatype(dt),
                        None => Range::Class(range.to_string()),
                    };
                    let sig = PropertySig {
                        name: name.to_string(),
                        kind,
                        domain_class: domain.to_string(),
                        range,
                    };
                    if properties.insert(name.to_string(), sig).is_some() {
                        return Err(Error::DuplicateProperty(name.to_string()));
                    }
                }
                ["prop", ..] => {
                    return Err(syntax(
                        "expected `prop <name> <asserted|inferred> <Domain> <Range>`",
                    ))
                }
                ["alias", alias, target] => aliases.push((alias.to_string(), target.to_string())),
                ["alias", ..] => return Err(syntax("expected `alias <Alias> <Canonical>`")),
                [other, ..] => return Err(syntax(&format!("unknown directive {other:?}"))),
                [] => unreachable!(),
            }
        }

        let mut schema = Schema {
            classes,
            properties,
            ..Schema::default()
        };
        for (alias, target) in aliases {
            if schema.classes.contains_key(&target) {
                schema.class_aliases.insert(alias, target);
            } else if schema.properties.contains_key(&target) {
                schema.property_aliases.insert(alias, target);
            } else {
                return Err(Error::UnknownAliasTarget { alias, target });
            }
        }
        schema.resolve_references()?;
        schema.build_descendants()?;
        Ok(schema)
    }

    /// The task ontology shipped with the crate.
    pub fn bundled() -> Schema {
        Schema::parse(BUNDLED_SCHEMA).expect("bundled schema is valid")
    }

    pub fn bundled_text() -> &'static str {
        BUNDLED_SCHEMA
    }

    fn resolve_references(&mut self) -> Result<()> {
        for (class, parent) in &self.classes {
            if let Some(parent) = parent {
                if self.resolve_class(parent).is_none() {
                    return Err(Error::UnknownParentClass {
                        class: class.clone(),
                        parent: parent.clone(),
                    });
                }
            }
        }
        let class_aliases = self.class_aliases.clone();
        let canon = |name: &str| class_aliases.get(name).cloned().unwrap_or(name.to_string());
        for p in self.classes.values_mut().flatten() {
            *p = canon(p);
        }
        let known: BTreeSet<String> = self.classes.keys().cloned().collect();
        for sig in self.properties.values_mut() {
            sig.domain_class = canon(&sig.domain_class);
            if !known.contains(&sig.domain_class) {
                return Err(Error::UnknownDomainClass {
                    property: sig.name.clone(),
                    domain: sig.domain_class.clone(),
                });
            }
            if let Range::Class(c) = &sig.range {
                let c = canon(c);
                if !known.contains(&c) {
                    return Err(Error::UnknownRangeClass {
                        property: sig.name.clone(),
                        range: c,
                    });
                }
                sig.range = Range::Class(c);
            }
        }
        Ok(())
    }

    fn build_descendants(&mut self) -> Result<()> {
        // Walk each class up to its root; revisiting a class on the way is a cycle.
        for start in self.classes.keys() {
            let mut seen = BTreeSet::new();
            let mut cur = Some(start.clone());
            while let Some(c) = cur {
                if !seen.insert(c.clone()) {
                    return Err(Error::SubclassCycle(start.clone()));
                }
                cur = self.classes.get(&c).cloned().flatten();
            }
        }
        let mut descendants: BTreeMap<String, BTreeSet<String>> = self
            .classes
            .keys()
            .map(|c| (c.clone(), BTreeSet::from([c.clone()])))
            .collect();
        for start in self.classes.keys() {
            let mut cur = self.classes[start].clone();
            while let Some(ancestor) = cur {
                descendants
                    .get_mut(&ancestor)
                    .expect("ancestor exists")
                    .insert(start.clone());
                cur = self.classes[&ancestor].clone();
            }
        }
        self.descendants = descendants;
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty() && self.properties.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.classes.keys().map(String::as_str)
    }

    pub fn parent(&self, class: &str) -> Option<&str> {
        self.classes.get(class).and_then(|p| p.as_deref())
    }

    pub fn properties(&self) -> impl Iterator<Item = &PropertySig> {
        self.properties.values()
    }

    /// Canonical class name for `name` or one of its aliases.
    pub fn resolve_class<'a>(&'a self, name: &'a str) -> Option<&'a str> {
        if let Some((k, _)) = self.classes.get_key_value(name) {
            return Some(k);
        }
        self.class_aliases.get(name).map(String::as_str)
    }

    pub fn resolve_property(&self, name: &str) -> Option<&PropertySig> {
        self.properties.get(name).or_else(|| {
            self.property_aliases
                .get(name)
                .and_then(|canon| self.properties.get(canon))
        })
    }

    /// The class and all of its transitive subclasses (canonical names).
    pub fn subclass_closure(&self, class: &str) -> Option<&BTreeSet<String>> {
        let canon = self.resolve_class(class)?;
        self.descendants.get(canon)
    }

    pub fn is_subclass_of(&self, sub: &str, sup: &str) -> bool {
        self.subclass_closure(sup)
            .zip(self.resolve_class(sub))
            .is_some_and(|(set, sub)| set.contains(sub))
    }
}

fn insert_class(
    classes: &mut BTreeMap<String, Option<String>>,
    name: &str,
    parent: Option<&str>,
) -> Result<()> {
    if classes
        .insert(name.to_string(), parent.map(str::to_string))
        .is_some()
    {
        return Err(Error::DuplicateClass(name.to_string()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_schema_has_has_member_into_person() {
        let schema = Schema::bundled();
        let sig = schema.resolve_property("hasMember").unwrap();
        assert_eq!(sig.range, Range::Class("Person".into()));
        assert_eq!(sig.kind, PropertyKind::Inferred);
        assert_eq!(sig.domain_class, "SNANetwork");
    }

    #[test]
    fn bundled_schema_covers_task_ontology_classes() {
        let schema = Schema::bundled();
        for class in [
            "Person",
            "ClassOnSchool",
            "QuestionnairePastEvent",
            "Answer",
            "AnswerOfPersonToQuestion",
            "AnswerSet",
            "Question",
            "QuestionSNA",
            "Questionnaire",
            "SNACharacteristic",
            "SNACharacteristicValue",
            "SNAIndice",
            "SNAIsolate",
            "SNANetwork",
            "SNARelation",
            "SNATypeOfCharacteristic",
            "SNATypeOfRelation",
            "AcademicCategory",
            "Course",
            "CourseLevel",
            "GroupOfClass",
            "School",
        ] {
            assert!(schema.resolve_class(class).is_some(), "{class}");
        }
        // SNAIndice plus its 18 subclasses.
        assert_eq!(schema.subclass_closure("SNAIndice").unwrap().len(), 19);
        assert_eq!(schema.parent("School"), Some("ClassSchoolData"));
    }

    #[test]
    fn bundled_property_kinds_follow_the_table() {
        let schema = Schema::bundled();
        let kind = |p: &str| schema.resolve_property(p).unwrap().kind;
        assert_eq!(kind("has_SNA_Value"), PropertyKind::Asserted);
        assert_eq!(kind("has_Event_Id"), PropertyKind::Asserted);
        assert_eq!(kind("has_Network_Name"), PropertyKind::Asserted);
        assert_eq!(kind("isRelationOfPerson"), PropertyKind::Inferred);
        assert_eq!(
            schema.resolve_property("has_Event_Id").unwrap().range,
            Range::Datatype(Datatype::Int)
        );
    }

    #[test]
    fn aliases_resolve_to_canonical_names() {
        let schema = Schema::bundled();
        assert_eq!(
            schema
                .resolve_property("isAnAnsweringRelatingTo")
                .unwrap()
                .name,
            "isAnAnswerRelatingTo"
        );
        assert_eq!(
            schema.resolve_property("isRelationOfQpe").unwrap().name,
            "isRelationOfQPE"
        );
        assert_eq!(
            schema.resolve_class("SNACaracteristic"),
            Some("SNACharacteristic")
        );
        assert!(schema.is_subclass_of("SNACaracteristicValueInteger", "SNACharacteristicValue"));
    }

    #[test]
    fn empty_document_gives_empty_schema() {
        let schema = Schema::parse("").unwrap();
        assert_eq!(schema.class_count(), 0);
        assert!(schema.is_empty());
        assert!(Schema::parse("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn unknown_range_class_is_rejected() {
        let err = Schema::parse("class A\nprop P inferred A Missing\n").unwrap_err();
        assert!(matches!(err, Error::UnknownRangeClass { .. }));
        assert!(err.to_string().contains("unknown range class"));
    }

    #[test]
    fn duplicate_property_is_rejected() {
        let doc = "class A\nprop p asserted A string\nprop p inferred A A\n";
        assert!(matches!(
            Schema::parse(doc),
            Err(Error::DuplicateProperty(p)) if p == "p"
        ));
    }

    #[test]
    fn subclass_cycle_is_rejected() {
        let doc = "class A < C\nclass B < A\nclass C < B\n";
        assert!(matches!(Schema::parse(doc), Err(Error::SubclassCycle(_))));
        assert!(matches!(
            Schema::parse("class A < A\n"),
            Err(Error::SubclassCycle(_))
        ));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = Schema::parse("class A\nprop p maybe A A\n").unwrap_err();
        assert!(matches!(err, Error::SchemaSyntax { line: 2, .. }));
    }

    #[test]
    fn subclass_closure_is_transitive() {
        let schema = Schema::parse("class A\nclass B < A\nclass C < B\nclass D\n").unwrap();
        let closure = schema.subclass_closure("A").unwrap();
        assert_eq!(
            closure.iter().map(String::as_str).collect::<Vec<_>>(),
            ["A", "B", "C"]
        );
        assert!(schema.is_subclass_of("C", "A"));
        assert!(!schema.is_subclass_of("D", "A"));
    }
}
