//! Forward chaining over a [`KnowledgeBase`].
//!
//! Rules are compiled into slot-based join plans, one per possible seed
//! atom. Saturation runs in rounds: the first round evaluates every rule
//! against the whole store, later rounds only evaluate plans seeded by an
//! atom that has new facts from the previous round. Facts derived within a
//! round are inserted together at its end, so the result does not depend on
//! rule order or on the order facts were asserted.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kb::{
    skolem_id, EntityId, Fact, FactIndex, KnowledgeBase, Provenance, Range, Schema, SkolemKey,
    Triple, Value, IS_A,
};
use crate::rules::ast::{Builtin, Rule, RuleAtom, RuleSet, Term};
use crate::rules::validate::validate_rules;

pub const DEFAULT_MAX_ROUNDS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaturateOptions {
    pub max_rounds: usize,
}

impl Default for SaturateOptions {
    fn default() -> Self {
        SaturateOptions {
            max_rounds: DEFAULT_MAX_ROUNDS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SaturationStats {
    /// Evaluation rounds, including the final one that found nothing new.
    pub rounds: usize,
    pub derived: usize,
    pub per_rule: BTreeMap<String, usize>,
}

#[derive(Debug, Clone)]
enum Slot {
    Var(usize),
    Const(Value),
}

#[derive(Debug, Clone)]
enum Atom {
    /// Matches `isA` facts whose object is any of `classes`.
    Class { classes: Vec<Value>, term: Slot },
    Property {
        predicate: Arc<str>,
        subject: Slot,
        object: Slot,
    },
}

#[derive(Debug, Clone)]
struct SkolemSpec {
    output: usize,
    var_name: String,
    key: Vec<Slot>,
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Match(usize),
    Different(usize),
}

#[derive(Debug, Clone)]
struct Plan {
    steps: Vec<Step>,
    /// From this step on only existential variables get bound, so one
    /// witness is enough.
    exists_from: usize,
}

#[derive(Debug, Clone)]
struct CompiledRule {
    id: String,
    var_count: usize,
    atoms: Vec<Atom>,
    different: Vec<(Slot, Slot)>,
    skolems: Vec<SkolemSpec>,
    head: Vec<(Slot, Arc<str>, Slot)>,
    needed: Vec<bool>,
    /// `plans[i]` is seeded by atom `i`; the last plan has no seed.
    plans: Vec<Plan>,
}

#[derive(Default)]
struct Derivation {
    facts: BTreeMap<Triple, Provenance>,
    skolems: BTreeMap<SkolemKey, EntityId>,
}

fn class_value(name: &str) -> Value {
    Value::entity(name).expect("class names are valid ids")
}

impl CompiledRule {
    fn compile(rule: &Rule, schema: &Schema) -> Result<Self> {
        let mut vars: Vec<String> = Vec::new();
        let mut slot = |t: &Term| -> Slot {
            match t {
                Term::Var(v) => match vars.iter().position(|x| x == v) {
                    Some(i) => Slot::Var(i),
                    None => {
                        vars.push(v.clone());
                        Slot::Var(vars.len() - 1)
                    }
                },
                Term::Const(e) => Slot::Const(Value::Entity(e.clone())),
                Term::Literal(v) => Slot::Const(v.clone()),
            }
        };
        let invalid = |msg: String| Error::InvalidRules(vec![format!("{}: {msg}", rule.id)]);
        let resolve_class = |c: &str| {
            schema
                .resolve_class(c)
                .map(str::to_string)
                .ok_or_else(|| invalid(format!("unknown class {c}")))
        };
        let resolve_property = |p: &str| {
            schema
                .resolve_property(p)
                .ok_or_else(|| invalid(format!("unknown property {p}")))
        };

        let mut atoms = Vec::new();
        let mut different = Vec::new();
        let mut skolem_atoms = Vec::new();
        for atom in &rule.antecedent {
            match atom {
                RuleAtom::Class { class, term } => {
                    let canon = resolve_class(class)?;
                    let classes = schema
                        .subclass_closure(&canon)
                        .into_iter()
                        .flatten()
                        .map(|c| class_value(c))
                        .collect();
                    atoms.push(Atom::Class {
                        classes,
                        term: slot(term),
                    });
                }
                RuleAtom::Property {
                    property,
                    subject,
                    object,
                } => {
                    let sig = resolve_property(property)?;
                    atoms.push(Atom::Property {
                        predicate: Arc::from(sig.name.as_str()),
                        subject: slot(subject),
                        object: slot(object),
                    });
                }
                RuleAtom::Builtin {
                    builtin: Builtin::DifferentFrom,
                    args,
                } => different.push((slot(&args[0]), slot(&args[1]))),
                RuleAtom::Builtin {
                    builtin: Builtin::MakeOwlThing,
                    args,
                } => {
                    let output = match slot(&args[0]) {
                        Slot::Var(i) => i,
                        Slot::Const(_) => {
                            return Err(invalid("makeOWLThing output must be a variable".into()))
                        }
                    };
                    let inputs: Vec<Slot> = args[1..].iter().map(&mut slot).collect();
                    skolem_atoms.push((output, inputs));
                }
            }
        }

        let mut head = Vec::new();
        for atom in &rule.consequent {
            match atom {
                RuleAtom::Class { class, term } => head.push((
                    slot(term),
                    Arc::from(IS_A),
                    Slot::Const(class_value(&resolve_class(class)?)),
                )),
                RuleAtom::Property {
                    property,
                    subject,
                    object,
                } => {
                    let sig = resolve_property(property)?;
                    head.push((slot(subject), Arc::from(sig.name.as_str()), slot(object)));
                }
                RuleAtom::Builtin { builtin, .. } => {
                    return Err(invalid(format!("builtin {} in consequent", builtin.name())))
                }
            }
        }

        // Fresh individuals without a class atom are typed from the
        // signature of the first consequent property that mentions them.
        let outputs: BTreeSet<usize> = skolem_atoms.iter().map(|(o, _)| *o).collect();
        for &out in &outputs {
            let typed = head
                .iter()
                .any(|(s, p, _)| &**p == IS_A && matches!(s, Slot::Var(i) if *i == out));
            if typed {
                continue;
            }
            let class = rule.consequent.iter().find_map(|atom| match atom {
                RuleAtom::Property {
                    property,
                    subject,
                    object,
                } => {
                    let sig = schema.resolve_property(property)?;
                    if subject.var_name() == Some(vars[out].as_str()) {
                        Some(sig.domain_class.clone())
                    } else if object.var_name() == Some(vars[out].as_str()) {
                        match &sig.range {
                            Range::Class(c) => Some(c.clone()),
                            Range::Datatype(_) => None,
                        }
                    } else {
                        None
                    }
                }
                _ => None,
            });
            if let Some(class) = class {
                head.push((
                    Slot::Var(out),
                    Arc::from(IS_A),
                    Slot::Const(class_value(&class)),
                ));
            }
        }

        // Skolem keys: the explicit arguments, then every other antecedent
        // variable in name order, so each distinct match mints its own
        // individual.
        let mut by_name: Vec<usize> = (0..vars.len()).filter(|i| !outputs.contains(i)).collect();
        by_name.sort_by(|a, b| vars[*a].cmp(&vars[*b]));
        let skolems = skolem_atoms
            .into_iter()
            .map(|(output, inputs)| {
                let mut key = inputs.clone();
                for &v in &by_name {
                    if !inputs.iter().any(|s| matches!(s, Slot::Var(i) if *i == v)) {
                        key.push(Slot::Var(v));
                    }
                }
                SkolemSpec {
                    output,
                    var_name: vars[output].clone(),
                    key,
                }
            })
            .collect::<Vec<_>>();

        let mut needed = vec![false; vars.len()];
        if skolems.is_empty() {
            for (s, _, o) in &head {
                for slot in [s, o] {
                    if let Slot::Var(i) = slot {
                        needed[*i] = true;
                    }
                }
            }
        } else {
            needed.iter_mut().for_each(|n| *n = true);
        }

        let mut compiled = CompiledRule {
            id: rule.id.clone(),
            var_count: vars.len(),
            atoms,
            different,
            skolems,
            head,
            needed,
            plans: Vec::new(),
        };
        compiled.plans = (0..compiled.atoms.len())
            .map(Some)
            .chain([None])
            .map(|seed| compiled.plan(seed))
            .collect();
        Ok(compiled)
    }

    fn atom_slots(&self, i: usize) -> Vec<&Slot> {
        match &self.atoms[i] {
            Atom::Class { term, .. } => vec![term],
            Atom::Property {
                subject, object, ..
            } => vec![subject, object],
        }
    }

    /// Greedy join order: filters first, then atoms reachable from bound
    /// variables, preferring those that bind variables the head needs.
    fn plan(&self, seed: Option<usize>) -> Plan {
        let mut bound = vec![false; self.var_count];
        let mut used = vec![false; self.atoms.len()];
        let mut diff_used = vec![false; self.different.len()];
        let mut steps = Vec::new();
        let mut binds_needed = Vec::new();

        let is_bound = |s: &Slot, bound: &[bool]| match s {
            Slot::Const(_) => true,
            Slot::Var(i) => bound[*i],
        };
        let take = |i: usize,
                    bound: &mut Vec<bool>,
                    steps: &mut Vec<Step>,
                    binds_needed: &mut Vec<bool>,
                    diff_used: &mut Vec<bool>| {
            let mut needs = false;
            for s in self.atom_slots(i) {
                if let Slot::Var(v) = s {
                    if !bound[*v] {
                        needs |= self.needed[*v];
                        bound[*v] = true;
                    }
                }
            }
            steps.push(Step::Match(i));
            binds_needed.push(needs);
            for (d, (a, b)) in self.different.iter().enumerate() {
                if !diff_used[d] && is_bound(a, bound) && is_bound(b, bound) {
                    diff_used[d] = true;
                    steps.push(Step::Different(d));
                    binds_needed.push(false);
                }
            }
        };

        if let Some(s) = seed {
            used[s] = true;
            take(s, &mut bound, &mut steps, &mut binds_needed, &mut diff_used);
        }
        while let Some(next) = (0..self.atoms.len())
            .filter(|i| !used[*i])
            .min_by_key(|&i| {
                let slots = self.atom_slots(i);
                let unbound: Vec<usize> = slots
                    .iter()
                    .filter_map(|s| match s {
                        Slot::Var(v) if !bound[*v] => Some(*v),
                        _ => None,
                    })
                    .collect();
                let has_bound = unbound.len() < slots.len();
                let all_needed = unbound.iter().all(|v| self.needed[*v]);
                let class = match (unbound.is_empty(), has_bound, all_needed) {
                    (true, _, _) => 0,
                    (false, true, true) => 1,
                    (false, true, false) => 2,
                    (false, false, true) => 3,
                    (false, false, false) => 4,
                };
                (class, i)
            })
        {
            used[next] = true;
            take(
                next,
                &mut bound,
                &mut steps,
                &mut binds_needed,
                &mut diff_used,
            );
        }
        for (d, used) in diff_used.iter().enumerate() {
            if !used {
                steps.push(Step::Different(d));
                binds_needed.push(false);
            }
        }
        let exists_from = binds_needed.iter().rposition(|b| *b).map_or(0, |i| i + 1);
        Plan { steps, exists_from }
    }

    fn relevant_to(&self, atom: usize, delta: &FactIndex) -> bool {
        match &self.atoms[atom] {
            Atom::Class { classes, .. } => delta
                .predicate(IS_A)
                .is_some_and(|idx| classes.iter().any(|c| idx.by_object.contains_key(c))),
            Atom::Property { predicate, .. } => delta.predicate(predicate).is_some(),
        }
    }

    /// Runs one plan and collects the distinct projections onto the needed
    /// variables.
    fn matches(
        &self,
        plan: &Plan,
        seed: Option<(usize, &FactIndex)>,
        full: &FactIndex,
    ) -> BTreeSet<Vec<Option<Value>>> {
        let mut out = BTreeSet::new();
        let mut slots = vec![None; self.var_count];
        self.step(plan, 0, seed, full, &mut slots, &mut out);
        out
    }

    fn step(
        &self,
        plan: &Plan,
        k: usize,
        seed: Option<(usize, &FactIndex)>,
        full: &FactIndex,
        slots: &mut Vec<Option<Value>>,
        out: &mut BTreeSet<Vec<Option<Value>>>,
    ) -> bool {
        let Some(step) = plan.steps.get(k) else {
            let projected = slots
                .iter()
                .zip(&self.needed)
                .map(|(v, n)| if *n { v.clone() } else { None })
                .collect();
            out.insert(projected);
            return true;
        };
        let stop_early = k >= plan.exists_from;
        match *step {
            Step::Different(d) => {
                let (a, b) = &self.different[d];
                match (value_of(a, slots), value_of(b, slots)) {
                    (Some(x), Some(y)) if x != y => self.step(plan, k + 1, seed, full, slots, out),
                    _ => false,
                }
            }
            Step::Match(i) => {
                let index = match seed {
                    Some((s, delta)) if s == i => delta,
                    _ => full,
                };
                let mut found = false;
                for (s_val, o_val, s_slot, o_slot) in self.candidates(i, index, slots) {
                    let mut newly = Vec::new();
                    let ok = bind(s_slot, s_val, slots, &mut newly)
                        && o_slot.is_none_or(|o| bind(o, o_val.clone(), slots, &mut newly));
                    if ok {
                        found |= self.step(plan, k + 1, seed, full, slots, out);
                    }
                    for v in newly {
                        slots[v] = None;
                    }
                    if found && stop_early {
                        break;
                    }
                }
                found
            }
        }
    }

    /// Candidate (subject, object) values for atom `i`, given the current
    /// bindings. Class atoms report no object slot.
    fn candidates<'a>(
        &'a self,
        i: usize,
        index: &FactIndex,
        slots: &[Option<Value>],
    ) -> Vec<(Value, Value, &'a Slot, Option<&'a Slot>)> {
        let mut out = Vec::new();
        match &self.atoms[i] {
            Atom::Class { classes, term } => {
                let Some(idx) = index.predicate(IS_A) else {
                    return out;
                };
                match value_of(term, slots) {
                    Some(Value::Entity(e)) => {
                        if classes.iter().any(|c| idx.contains(&e, c)) {
                            out.push((Value::Entity(e), Value::Int(0), term, None));
                        }
                    }
                    Some(_) => {}
                    None => {
                        let mut seen = BTreeSet::new();
                        for c in classes {
                            for s in idx.by_object.get(c).into_iter().flatten() {
                                if seen.insert(s.clone()) {
                                    out.push((Value::Entity(s.clone()), Value::Int(0), term, None));
                                }
                            }
                        }
                    }
                }
            }
            Atom::Property {
                predicate,
                subject,
                object,
            } => {
                let Some(idx) = index.predicate(predicate) else {
                    return out;
                };
                let push = |out: &mut Vec<_>, s: &EntityId, o: &Value| {
                    out.push((Value::Entity(s.clone()), o.clone(), subject, Some(object)))
                };
                match (value_of(subject, slots), value_of(object, slots)) {
                    (Some(Value::Entity(s)), Some(o)) => {
                        if idx.contains(&s, &o) {
                            push(&mut out, &s, &o);
                        }
                    }
                    (Some(Value::Entity(s)), None) => {
                        for o in idx.by_subject.get(&s).into_iter().flatten() {
                            push(&mut out, &s, o);
                        }
                    }
                    (Some(_), _) => {}
                    (None, Some(o)) => {
                        for s in idx.by_object.get(&o).into_iter().flatten() {
                            push(&mut out, s, &o);
                        }
                    }
                    (None, None) => {
                        for (s, o) in &idx.pairs {
                            push(&mut out, s, o);
                        }
                    }
                }
            }
        }
        out
    }

    /// Turns matches into head facts not yet in `kb`.
    fn instantiate(
        &self,
        kb: &KnowledgeBase,
        matches: BTreeSet<Vec<Option<Value>>>,
        into: &mut Derivation,
    ) -> Result<()> {
        let provenance = Provenance::inferred(&self.id);
        for mut slots in matches {
            for spec in &self.skolems {
                let args: Vec<Value> = spec
                    .key
                    .iter()
                    .map(|s| value_of(s, &slots).expect("skolem inputs are bound"))
                    .collect();
                let key = SkolemKey::new(&self.id, &spec.var_name, &args);
                let id = skolem_id(&self.id, &spec.var_name, &args);
                slots[spec.output] = Some(Value::Entity(id.clone()));
                into.skolems.entry(key).or_insert(id);
            }
            for (s, p, o) in &self.head {
                let subject = match value_of(s, &slots) {
                    Some(Value::Entity(e)) => e,
                    other => {
                        return Err(Error::RangeViolation {
                            property: p.to_string(),
                            expected: "an individual as subject".to_string(),
                            found: other.map_or("nothing", |v| v.kind_name()).to_string(),
                        })
                    }
                };
                let object = value_of(o, &slots).expect("head variables are bound");
                let fact = Fact::new(subject, &**p, object, provenance.clone());
                let triple = kb.validate(&fact)?;
                if kb.contains_triple(&triple) {
                    continue;
                }
                into.facts
                    .entry(triple)
                    .and_modify(|prov| {
                        if provenance < *prov {
                            *prov = provenance.clone();
                        }
                    })
                    .or_insert_with(|| provenance.clone());
            }
        }
        Ok(())
    }

    fn evaluate(
        &self,
        kb: &KnowledgeBase,
        delta: Option<&FactIndex>,
        into: &mut Derivation,
    ) -> Result<()> {
        let full = kb.index();
        match delta {
            None => {
                let plan = self.plans.last().expect("unseeded plan");
                let matches = self.matches(plan, None, full);
                self.instantiate(kb, matches, into)
            }
            Some(delta) => {
                let mut all = BTreeSet::new();
                for seed in 0..self.atoms.len() {
                    if self.relevant_to(seed, delta) {
                        all.extend(self.matches(&self.plans[seed], Some((seed, delta)), full));
                    }
                }
                self.instantiate(kb, all, into)
            }
        }
    }
}

fn value_of(slot: &Slot, slots: &[Option<Value>]) -> Option<Value> {
    match slot {
        Slot::Const(v) => Some(v.clone()),
        Slot::Var(i) => slots[*i].clone(),
    }
}

fn bind(slot: &Slot, value: Value, slots: &mut [Option<Value>], newly: &mut Vec<usize>) -> bool {
    match slot {
        Slot::Const(c) => *c == value,
        Slot::Var(i) => match &slots[*i] {
            Some(v) => *v == value,
            None => {
                slots[*i] = Some(value);
                newly.push(*i);
                true
            }
        },
    }
}

fn compile_checked(ruleset: &RuleSet, schema: &Schema) -> Result<Vec<CompiledRule>> {
    let diagnostics = validate_rules(ruleset, schema);
    if !diagnostics.is_empty() {
        return Err(Error::InvalidRules(
            diagnostics.iter().map(ToString::to_string).collect(),
        ));
    }
    ruleset
        .rules
        .iter()
        .map(|r| CompiledRule::compile(r, schema))
        .collect()
}

/// Facts the rule derives from `kb` as it stands, excluding ones already
/// present. Sorted; provenance is `inferred(rule.id)`.
pub fn apply_rule(kb: &KnowledgeBase, rule: &Rule) -> Result<Vec<Fact>> {
    let set = RuleSet {
        rules: vec![rule.clone()],
    };
    let compiled = compile_checked(&set, kb.schema())?;
    let mut derivation = Derivation::default();
    compiled[0].evaluate(kb, None, &mut derivation)?;
    Ok(derivation
        .facts
        .into_iter()
        .map(|(t, p)| Fact::new(t.subject, &*t.predicate, t.object, p))
        .collect())
}

/// Saturates `kb` to fixpoint with semi-naive evaluation.
pub fn saturate(kb: &mut KnowledgeBase, ruleset: &RuleSet) -> Result<SaturationStats> {
    saturate_with(kb, ruleset, SaturateOptions::default())
}

pub fn saturate_with(
    kb: &mut KnowledgeBase,
    ruleset: &RuleSet,
    options: SaturateOptions,
) -> Result<SaturationStats> {
    let compiled = compile_checked(ruleset, kb.schema())?;
    run(kb, &compiled, options, true)
}

/// Reference fixpoint: every round re-evaluates every rule on the whole
/// store. Same result as [`saturate`], only slower.
pub fn saturate_naive(kb: &mut KnowledgeBase, ruleset: &RuleSet) -> Result<SaturationStats> {
    let compiled = compile_checked(ruleset, kb.schema())?;
    run(kb, &compiled, SaturateOptions::default(), false)
}

fn run(
    kb: &mut KnowledgeBase,
    rules: &[CompiledRule],
    options: SaturateOptions,
    semi_naive: bool,
) -> Result<SaturationStats> {
    let mut stats = SaturationStats::default();
    let mut delta: Option<FactIndex> = None;
    loop {
        if stats.rounds >= options.max_rounds {
            return Err(Error::IterationLimit(options.max_rounds));
        }
        stats.rounds += 1;
        let mut derivation = Derivation::default();
        for rule in rules {
            let seed = if semi_naive { delta.as_ref() } else { None };
            rule.evaluate(kb, seed, &mut derivation)?;
        }
        for (key, id) in derivation.skolems {
            kb.register_skolem(key, id);
        }
        if derivation.facts.is_empty() {
            break;
        }
        let mut next = FactIndex::default();
        for (triple, provenance) in derivation.facts {
            if let Some(rule) = provenance.rule_id() {
                *stats.per_rule.entry(rule.to_string()).or_default() += 1;
            }
            next.insert(&triple);
            if kb.insert_triple(triple, provenance) {
                stats.derived += 1;
            }
        }
        log::debug!("round {}: {} new facts", stats.rounds, next.len());
        delta = Some(next);
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{bundled_rules, parse_rule};

    fn e(s: &str) -> EntityId {
        EntityId::new(s).unwrap()
    }

    fn ev(s: &str) -> Value {
        Value::entity(s).unwrap()
    }

    fn kb() -> KnowledgeBase {
        KnowledgeBase::new(Schema::bundled())
    }

    fn rule(id: &str) -> Rule {
        bundled_rules().get(id).unwrap().clone()
    }

    fn triples(facts: &[Fact]) -> BTreeSet<(String, String, String)> {
        facts
            .iter()
            .map(|f| {
                (
                    f.subject.to_string(),
                    f.predicate.clone(),
                    f.object.to_literal(),
                )
            })
            .collect()
    }

    #[test]
    fn first_rule_links_member_and_event() {
        let mut kb = kb();
        kb.assert_type(&e("Abott"), "Person").unwrap();
        kb.assert_type(&e("Net1"), "SNANetwork").unwrap();
        kb.assert_type(&e("A1"), "AnswerOfPersonToQuestion")
            .unwrap();
        kb.assert(&e("A1"), "isAnswerOfQuestionnairePastEvent", ev("QPE01"))
            .unwrap();
        kb.assert(&e("QPE01"), "hasNetwork", ev("Net1")).unwrap();
        let facts = apply_rule(&kb, &rule("Rule-1")).unwrap();
        let expected: BTreeSet<_> = [
            ("Net1", "hasMember", "Abott"),
            ("Abott", "hasAnsweredToQuestionnairePastEvent", "QPE01"),
        ]
        .iter()
        .map(|(s, p, o)| (s.to_string(), p.to_string(), o.to_string()))
        .collect();
        assert_eq!(triples(&facts), expected);
        assert!(facts
            .iter()
            .all(|f| f.provenance == Provenance::inferred("Rule-1")));
    }

    fn relation_kb(target: &str) -> KnowledgeBase {
        let mut kb = kb();
        for p in ["Laura", "Juan"] {
            kb.assert_type(&e(p), "Person").unwrap();
        }
        kb.assert_type(&e("Net1"), "SNANetwork").unwrap();
        kb.assert(&e("Net1"), "isNetworkOfQPE", ev("QPE01"))
            .unwrap();
        kb.assert(&e("L4"), "isAnswerOfTypeOfRelation", ev("Friendship"))
            .unwrap();
        kb.assert(&e("Friendship"), "isTypeOfRelationOfNetwork", ev("Net1"))
            .unwrap();
        kb.assert(&e("A1"), "isAnswerOfPersonToQuestionOf", ev("Laura"))
            .unwrap();
        kb.assert(&e("A1"), "isAnswerOfQuestionnairePastEvent", ev("QPE01"))
            .unwrap();
        kb.assert(&e("A1"), "hasAnswered", ev("L4")).unwrap();
        kb.assert(&e("A1"), "isAnAnswerRelatingTo", ev(target))
            .unwrap();
        kb
    }

    #[test]
    fn second_rule_mints_one_relation() {
        let facts = apply_rule(&relation_kb("Juan"), &rule("Rule-2")).unwrap();
        let rels: BTreeSet<_> = facts
            .iter()
            .filter(|f| f.predicate == IS_A && f.object == ev("SNARelation"))
            .map(|f| f.subject.clone())
            .collect();
        assert_eq!(rels.len(), 1);
        let rel = rels.into_iter().next().unwrap();
        assert!(rel.as_str().starts_with("Rule-2/rel/Laura/Juan/"), "{rel}");
        assert_eq!(facts.len(), 6);
    }

    #[test]
    fn self_nomination_is_blocked() {
        let kb = relation_kb("Laura");
        assert!(apply_rule(&kb, &rule("Rule-2")).unwrap().is_empty());
    }

    #[test]
    fn seventh_rule_mints_twelve_individuals() {
        let mut kb = kb();
        kb.assert_type(&e("Net1"), "SNANetwork").unwrap();
        kb.assert(&e("Net1"), "isNetworkOfQPE", ev("QPE01"))
            .unwrap();
        let facts = apply_rule(&kb, &rule("Rule-7")).unwrap();
        let minted: BTreeSet<_> = facts
            .iter()
            .map(|f| f.subject.clone())
            .filter(|s| s.as_str() != "Net1")
            .collect();
        assert_eq!(minted.len(), 12);
        let linked: BTreeSet<_> = facts
            .iter()
            .filter(|f| f.subject.as_str() == "Net1")
            .map(|f| f.object.clone())
            .collect();
        assert_eq!(linked.len(), 12);
        // every minted individual carries exactly one type
        for m in &minted {
            let types = facts
                .iter()
                .filter(|f| &f.subject == m && f.predicate == IS_A)
                .count();
            assert_eq!(types, 1, "{m}");
        }
        assert_eq!(facts.len(), 24);
    }

    #[test]
    fn empty_kb_stays_empty() {
        let mut kb = kb();
        let stats = saturate(&mut kb, &bundled_rules()).unwrap();
        assert!(kb.is_empty());
        assert_eq!(stats.derived, 0);
        assert_eq!(stats.rounds, 1);
    }

    #[test]
    fn iteration_guard_trips() {
        let rules = RuleSet {
            rules: vec![parse_rule(
                "chain: Person(?p) ^ isRelationOfPerson(?r, ?p) ^ makeOWLThing(?x, ?r) -> \
                 isRelationOfPerson(?x, ?p)",
            )
            .unwrap()],
        };
        // The validator rejects it outright.
        let mut kb = kb();
        assert!(matches!(
            saturate(&mut kb, &rules),
            Err(Error::InvalidRules(_))
        ));
        // Bypassing validation, the round guard stops the runaway chain.
        let compiled = vec![CompiledRule::compile(&rules.rules[0], kb.schema()).unwrap()];
        kb.assert_type(&e("Ana"), "Person").unwrap();
        kb.assert(&e("R0"), "isRelationOfPerson", ev("Ana"))
            .unwrap();
        let err = run(&mut kb, &compiled, SaturateOptions { max_rounds: 25 }, true).unwrap_err();
        assert!(matches!(err, Error::IterationLimit(25)));
    }

    #[test]
    fn skolems_are_registered() {
        let mut kb = relation_kb("Juan");
        saturate(&mut kb, &bundled_rules().subset(&["Rule-2"])).unwrap();
        assert_eq!(kb.skolem_registry().len(), 1);
        let (key, id) = kb.skolem_registry().iter().next().unwrap();
        assert_eq!(key.rule_id, "Rule-2");
        assert_eq!(key.var_name, "rel");
        assert_eq!(&skolem_id(&key.rule_id, &key.var_name, &key.args), id);
    }

    #[test]
    fn existential_atoms_need_only_one_witness() {
        let mut kb = kb();
        kb.assert_type(&e("Ana"), "Person").unwrap();
        kb.assert_type(&e("Net1"), "SNANetwork").unwrap();
        kb.assert(&e("QPE01"), "hasNetwork", ev("Net1")).unwrap();
        for i in 0..50 {
            let a = e(&format!("A{i}"));
            kb.assert_type(&a, "AnswerOfPersonToQuestion").unwrap();
            kb.assert(&a, "isAnswerOfQuestionnairePastEvent", ev("QPE01"))
                .unwrap();
        }
        let compiled = CompiledRule::compile(&rule("Rule-1"), kb.schema()).unwrap();
        let plan = compiled.plans.last().unwrap();
        assert!(plan.exists_from < plan.steps.len());
        assert_eq!(compiled.matches(plan, None, kb.index()).len(), 1);
    }
}
