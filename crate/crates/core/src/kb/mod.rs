//! Typed fact store over the task-ontology schema.

mod dump;
mod index;
mod schema;
mod skolem;
mod store;
mod value;

pub use dump::{parse_fact_dump, write_fact_dump};
pub(crate) use index::FactIndex;
pub use index::Triple;
pub use schema::{PropertyKind, PropertySig, Range, Schema, IS_A};
pub use skolem::{escape_component, skolem_id, SkolemKey};
pub use store::{Bindings, Fact, KnowledgeBase, PatternTerm, Provenance, TriplePattern};
pub use value::{parse_datetime, Datatype, EntityId, Value, DATETIME_FORMAT};
