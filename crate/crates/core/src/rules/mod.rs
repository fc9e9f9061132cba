//! Rule language, validation and forward chaining.

mod ast;
mod engine;
mod parser;
mod validate;

pub use ast::{Builtin, Rule, RuleAtom, RuleSet, Term};
pub use engine::{
    apply_rule, saturate, saturate_naive, saturate_with, SaturateOptions, SaturationStats,
    DEFAULT_MAX_ROUNDS,
};
pub use parser::{parse_rule, parse_ruleset};
pub use validate::{validate_rules, Diagnostic, DiagnosticKind};

const BUNDLED_RULES: &str = include_str!("../../../../rules/ontosnaqa.rules");

/// Source text of the bundled Rules 1-7.
pub fn bundled_rules_text() -> &'static str {
    BUNDLED_RULES
}

/// The bundled Rules 1-7.
pub fn bundled_rules() -> RuleSet {
    parse_ruleset(BUNDLED_RULES).expect("bundled rules parse")
}
