//! Survey-to-network analysis over a rule-saturated knowledge base.

pub mod error;
pub mod export;
pub mod kb;
pub mod metrics;
pub mod network;
pub mod pipeline;
pub mod rules;
pub mod survey;
pub mod synth;

pub use error::{Error, Result};
