use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid entity id {0:?}: must be non-empty and contain no whitespace")]
    InvalidEntityId(String),

    #[error("schema line {line}: {message}")]
    SchemaSyntax { line: usize, message: String },
    #[error("duplicate property name {0:?}")]
    DuplicateProperty(String),
    #[error("duplicate class name {0:?}")]
    DuplicateClass(String),
    #[error("unknown range class {range:?} for property {property:?}")]
    UnknownRangeClass { property: String, range: String },
    #[error("unknown domain class {domain:?} for property {property:?}")]
    UnknownDomainClass { property: String, domain: String },
    #[error("unknown parent class {parent:?} for class {class:?}")]
    UnknownParentClass { class: String, parent: String },
    #[error("subclass cycle through class {0:?}")]
    SubclassCycle(String),
    #[error("alias {alias:?} points at unknown name {target:?}")]
    UnknownAliasTarget { alias: String, target: String },

    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("unknown predicate {0:?}")]
    UnknownPredicate(String),
    #[error("property {property:?} expects {expected}, got {found}")]
    RangeViolation {
        property: String,
        expected: String,
        found: String,
    },
    #[error("datatype mismatch for {property:?}: expected {expected}, got {found}")]
    DatatypeMismatch {
        property: String,
        expected: String,
        found: String,
    },

    #[error("rule syntax error at {line}:{column}: {message}")]
    RuleSyntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("rule {rule}: atom {atom} expects {expected} argument(s), got {found} (line {line})")]
    Arity {
        rule: String,
        atom: String,
        expected: String,
        found: usize,
        line: usize,
    },
    #[error("rule validation failed: {}", .0.join("; "))]
    InvalidRules(Vec<String>),
    #[error("saturation did not converge within {0} rounds")]
    IterationLimit(usize),

    #[error("questionnaire: {0}")]
    Questionnaire(String),
    #[error("responses row {row}: {message}")]
    Response { row: usize, message: String },
    #[error("unknown questionnaire event {0:?}")]
    UnknownQpe(String),
    #[error("missing index individual: {0}")]
    MissingIndexIndividual(String),
    #[error("conflicting value for {0}")]
    ConflictingValue(String),

    #[error("fact dump line {line}: {message}")]
    FactDump { line: usize, message: String },
    #[error("pajek line {line}: {message}")]
    Pajek { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Input problems (bad files, diagnostics) as opposed to runtime failures.
    pub fn is_validation(&self) -> bool {
        if let Error::File { source, .. } = self {
            return source.is_validation();
        }
        !matches!(
            self,
            Error::Io { .. }
                | Error::IterationLimit(_)
                | Error::MissingIndexIndividual(_)
                | Error::ConflictingValue(_)
        )
    }

    /// Attaches the file an error came from.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            e @ (Error::Io { .. } | Error::File { .. }) => e,
            e => Error::File {
                path: path.into(),
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
