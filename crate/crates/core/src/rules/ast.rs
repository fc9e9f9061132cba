use std::collections::BTreeSet;
use std::fmt;

use crate::kb::{EntityId, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(EntityId),
    Literal(Value),
}

impl Term {
    pub fn var_name(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(e) => write!(f, "{e}"),
            Term::Literal(v) => write!(f, "{}", v.to_literal()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// Binds its first argument to an individual minted from the others.
    MakeOwlThing,
    /// Holds when both arguments are different individuals.
    DifferentFrom,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "makeOWLThing" => Some(Builtin::MakeOwlThing),
            "differentFrom" => Some(Builtin::DifferentFrom),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::MakeOwlThing => "makeOWLThing",
            Builtin::DifferentFrom => "differentFrom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RuleAtom {
    Class {
        class: String,
        term: Term,
    },
    Property {
        property: String,
        subject: Term,
        object: Term,
    },
    Builtin {
        builtin: Builtin,
        args: Vec<Term>,
    },
}

impl RuleAtom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            RuleAtom::Class { term, .. } => vec![term],
            RuleAtom::Property {
                subject, object, ..
            } => vec![subject, object],
            RuleAtom::Builtin { args, .. } => args.iter().collect(),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.terms().into_iter().filter_map(Term::var_name)
    }

    pub fn is_builtin(&self) -> bool {
        matches!(self, RuleAtom::Builtin { .. })
    }

    /// Output variable of a `makeOWLThing` atom.
    pub fn skolem_output(&self) -> Option<&str> {
        match self {
            RuleAtom::Builtin {
                builtin: Builtin::MakeOwlThing,
                args,
            } => args.first().and_then(Term::var_name),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            RuleAtom::Class { class, .. } => class,
            RuleAtom::Property { property, .. } => property,
            RuleAtom::Builtin { builtin, .. } => builtin.name(),
        }
    }
}

impl fmt::Display for RuleAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleAtom::Class { class, term } => write!(f, "{class}({term})"),
            RuleAtom::Property {
                property,
                subject,
                object,
            } => write!(f, "{property}({subject}, {object})"),
            RuleAtom::Builtin { builtin, args } => {
                write!(f, "{}(", builtin.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub antecedent: Vec<RuleAtom>,
    pub consequent: Vec<RuleAtom>,
    /// 1-based source line of the rule name (0 when built in code).
    pub line: usize,
}

impl Rule {
    /// Variables bound by `makeOWLThing` atoms.
    pub fn skolem_outputs(&self) -> BTreeSet<&str> {
        self.antecedent
            .iter()
            .filter_map(RuleAtom::skolem_output)
            .collect()
    }

    pub fn creates_individuals(&self) -> bool {
        self.antecedent.iter().any(|a| a.skolem_output().is_some())
    }

    /// Variables bound by class and property atoms of the antecedent.
    pub fn bound_vars(&self) -> BTreeSet<&str> {
        self.antecedent
            .iter()
            .filter(|a| !a.is_builtin())
            .flat_map(RuleAtom::vars)
            .collect()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.id)?;
        write_atoms(f, &self.antecedent)?;
        f.write_str(" -> ")?;
        write_atoms(f, &self.consequent)
    }
}

fn write_atoms(f: &mut fmt::Formatter<'_>, atoms: &[RuleAtom]) -> fmt::Result {
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            f.write_str(" ^ ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
}

impl RuleSet {
    pub fn get(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// A rule set holding only the listed rules, in the given order.
    pub fn subset(&self, ids: &[&str]) -> RuleSet {
        RuleSet {
            rules: ids.iter().filter_map(|id| self.get(id).cloned()).collect(),
        }
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
