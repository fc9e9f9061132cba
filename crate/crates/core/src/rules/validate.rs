use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::kb::{Range, Schema};
use crate::rules::ast::{Builtin, Rule, RuleAtom, RuleSet, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    UnknownClass,
    UnknownProperty,
    BuiltinInConsequent,
    SkolemOutputBound,
    UnsafeVariable,
    TermKind,
    DuplicateRuleId,
    Stratification,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Diagnostic {
    pub rule_id: String,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule_id, self.message)
    }
}

/// Checks names, variable safety and creation stratification. An empty
/// result means the rule set can be saturated.
pub fn validate_rules(ruleset: &RuleSet, schema: &Schema) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for rule in &ruleset.rules {
        if !seen.insert(rule.id.as_str()) {
            out.push(diag(
                rule,
                DiagnosticKind::DuplicateRuleId,
                "duplicate rule id",
            ));
        }
        check_rule(rule, schema, &mut out);
    }
    check_stratification(ruleset, schema, &mut out);
    out
}

fn diag(rule: &Rule, kind: DiagnosticKind, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        rule_id: rule.id.clone(),
        kind,
        message: message.into(),
    }
}

fn check_rule(rule: &Rule, schema: &Schema, out: &mut Vec<Diagnostic>) {
    for atom in rule.antecedent.iter().chain(&rule.consequent) {
        check_atom(rule, atom, schema, out);
    }
    for atom in &rule.consequent {
        if atom.is_builtin() {
            out.push(diag(
                rule,
                DiagnosticKind::BuiltinInConsequent,
                format!("builtin {} is only allowed in the antecedent", atom.name()),
            ));
        }
    }

    let bound = rule.bound_vars();
    let mut outputs = BTreeSet::new();
    for atom in &rule.antecedent {
        let RuleAtom::Builtin { builtin, args } = atom else {
            continue;
        };
        let inputs = if *builtin != Builtin::MakeOwlThing {
            &args[..]
        } else {
            match atom.skolem_output() {
                Some(v) => {
                    if bound.contains(v) {
                        out.push(diag(
                            rule,
                            DiagnosticKind::SkolemOutputBound,
                            format!("makeOWLThing output ?{v} is already bound in the antecedent"),
                        ));
                    }
                    if !outputs.insert(v) {
                        out.push(diag(
                            rule,
                            DiagnosticKind::SkolemOutputBound,
                            format!("?{v} is the output of more than one makeOWLThing"),
                        ));
                    }
                    &args[1..]
                }
                None => {
                    out.push(diag(
                        rule,
                        DiagnosticKind::TermKind,
                        "makeOWLThing output must be a variable",
                    ));
                    &args[1..]
                }
            }
        };
        for v in inputs.iter().filter_map(Term::var_name) {
            if !bound.contains(v) {
                out.push(diag(
                    rule,
                    DiagnosticKind::UnsafeVariable,
                    format!(
                        "?{v} in {} is not bound by a class or property atom",
                        builtin.name()
                    ),
                ));
            }
        }
    }

    let consequent_vars: BTreeSet<&str> = rule.consequent.iter().flat_map(RuleAtom::vars).collect();
    for v in consequent_vars {
        if !bound.contains(v) && !outputs.contains(v) {
            out.push(diag(
                rule,
                DiagnosticKind::UnsafeVariable,
                format!("consequent variable ?{v} is not bound in the antecedent"),
            ));
        }
    }
}

fn check_atom(rule: &Rule, atom: &RuleAtom, schema: &Schema, out: &mut Vec<Diagnostic>) {
    match atom {
        RuleAtom::Class { class, term } => {
            if schema.resolve_class(class).is_none() {
                out.push(diag(
                    rule,
                    DiagnosticKind::UnknownClass,
                    format!("unknown class {class}"),
                ));
            }
            if matches!(term, Term::Literal(_)) {
                out.push(diag(
                    rule,
                    DiagnosticKind::TermKind,
                    format!("class atom {class} applied to a literal"),
                ));
            }
        }
        RuleAtom::Property {
            property,
            subject,
            object,
        } => {
            let Some(sig) = schema.resolve_property(property) else {
                out.push(diag(
                    rule,
                    DiagnosticKind::UnknownProperty,
                    format!("unknown property {property}"),
                ));
                return;
            };
            if matches!(subject, Term::Literal(_)) {
                out.push(diag(
                    rule,
                    DiagnosticKind::TermKind,
                    format!("subject of {property} is a literal"),
                ));
            }
            let mismatch = match (&sig.range, object) {
                (Range::Class(_), Term::Literal(_)) => true,
                (Range::Datatype(_), Term::Const(_)) => true,
                (Range::Datatype(d), Term::Literal(v)) => v.datatype() != Some(*d),
                _ => false,
            };
            if mismatch {
                out.push(diag(
                    rule,
                    DiagnosticKind::TermKind,
                    format!(
                        "object {object} does not fit the range {} of {property}",
                        sig.range
                    ),
                ));
            }
        }
        RuleAtom::Builtin { .. } => {}
    }
}

/// What a creating rule can put fresh individuals into.
#[derive(Default)]
struct FreshFlow {
    classes: BTreeSet<String>,
    properties: BTreeSet<String>,
}

fn fresh_flow(rule: &Rule, schema: &Schema) -> FreshFlow {
    let fresh = rule.skolem_outputs();
    let is_fresh = |t: &Term| t.var_name().is_some_and(|v| fresh.contains(v));
    let mut flow = FreshFlow::default();
    let add_class = |flow: &mut FreshFlow, class: &str| {
        let Some(mut c) = schema.resolve_class(class).map(str::to_string) else {
            return;
        };
        // a fresh C also answers class atoms of every superclass of C
        loop {
            let parent = schema.parent(&c).map(str::to_string);
            flow.classes.insert(c);
            match parent {
                Some(p) => c = p,
                None => break,
            }
        }
    };
    for atom in &rule.consequent {
        match atom {
            RuleAtom::Class { class, term } if is_fresh(term) => add_class(&mut flow, class),
            RuleAtom::Property {
                property,
                subject,
                object,
            } if is_fresh(subject) || is_fresh(object) => {
                let Some(sig) = schema.resolve_property(property) else {
                    continue;
                };
                flow.properties.insert(sig.name.clone());
                if is_fresh(subject) {
                    add_class(&mut flow, &sig.domain_class);
                }
                if let (true, Range::Class(c)) = (is_fresh(object), &sig.range) {
                    add_class(&mut flow, c);
                }
            }
            _ => {}
        }
    }
    flow
}

fn reads(rule: &Rule, flow: &FreshFlow, schema: &Schema) -> Option<String> {
    rule.antecedent.iter().find_map(|atom| match atom {
        RuleAtom::Class { class, .. } => schema
            .resolve_class(class)
            .filter(|c| flow.classes.contains(*c))
            .map(|c| format!("class {c}")),
        RuleAtom::Property { property, .. } => schema
            .resolve_property(property)
            .filter(|sig| flow.properties.contains(&sig.name))
            .map(|sig| format!("property {}", sig.name)),
        RuleAtom::Builtin { .. } => None,
    })
}

/// Fresh individuals of one creating rule may feed another creating rule;
/// only a cycle of such feeds can mint individuals forever.
fn check_stratification(ruleset: &RuleSet, schema: &Schema, out: &mut Vec<Diagnostic>) {
    let creating: Vec<&Rule> = ruleset
        .rules
        .iter()
        .filter(|r| r.creates_individuals())
        .collect();
    let flows: Vec<FreshFlow> = creating.iter().map(|r| fresh_flow(r, schema)).collect();
    let mut edges: BTreeMap<usize, Vec<(usize, String)>> = BTreeMap::new();
    for (i, flow) in flows.iter().enumerate() {
        for (j, target) in creating.iter().enumerate() {
            if let Some(via) = reads(target, flow, schema) {
                edges.entry(i).or_default().push((j, via));
            }
        }
    }

    let mut reported = BTreeSet::new();
    for start in 0..creating.len() {
        if let Some(cycle) = find_cycle(start, &edges) {
            let mut members: Vec<usize> = cycle.iter().map(|(i, _)| *i).collect();
            members.sort_unstable();
            if !reported.insert(members) {
                continue;
            }
            let path: Vec<String> = cycle
                .iter()
                .map(|(i, via)| format!("{} -[{via}]->", creating[*i].id))
                .collect();
            out.push(diag(
                creating[start],
                DiagnosticKind::Stratification,
                format!(
                    "created individuals flow back into a creating rule: {} {}",
                    path.join(" "),
                    creating[start].id
                ),
            ));
        }
    }
}

/// A path start -> ... -> start, as (node, label of its outgoing edge).
fn find_cycle(
    start: usize,
    edges: &BTreeMap<usize, Vec<(usize, String)>>,
) -> Option<Vec<(usize, String)>> {
    fn dfs(
        node: usize,
        start: usize,
        edges: &BTreeMap<usize, Vec<(usize, String)>>,
        visited: &mut BTreeSet<usize>,
        path: &mut Vec<(usize, String)>,
    ) -> bool {
        for (next, via) in edges.get(&node).into_iter().flatten() {
            path.push((node, via.clone()));
            if *next == start {
                return true;
            }
            if visited.insert(*next) && dfs(*next, start, edges, visited, path) {
                return true;
            }
            path.pop();
        }
        false
    }
    let mut path = Vec::new();
    let mut visited = BTreeSet::from([start]);
    dfs(start, start, edges, &mut visited, &mut path).then_some(path)
}
