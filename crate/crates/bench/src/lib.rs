//! Inputs shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sociokb::kb::{KnowledgeBase, Schema};
use sociokb::metrics::Graph;
use sociokb::network::{build_networks, DerivedNetwork};
use sociokb::rules::{bundled_rules, saturate};
use sociokb::survey::{ingest_responses, ResponseRecord};
use sociokb::synth::{class_survey, generate, SynthConfig, CLASS38_QPE};

/// A class-style survey with `respondents` people.
pub fn responses(respondents: usize, seed: u64) -> Vec<ResponseRecord> {
    let cfg = SynthConfig {
        respondents,
        ..SynthConfig::class38()
    };
    generate(
        &class_survey(),
        CLASS38_QPE,
        &cfg,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
}

pub fn ingested(records: &[ResponseRecord]) -> KnowledgeBase {
    let def = class_survey();
    let mut kb = KnowledgeBase::new(Schema::bundled());
    ingest_responses(&mut kb, &def, &def.qpe(CLASS38_QPE), records)
        .expect("synthetic responses ingest");
    kb
}

pub fn saturated(records: &[ResponseRecord]) -> KnowledgeBase {
    let mut kb = ingested(records);
    saturate(&mut kb, &bundled_rules()).expect("bundled rules saturate");
    kb
}

/// The widest network (Acquaintance) of a synthetic survey.
pub fn widest_network(respondents: usize, seed: u64) -> DerivedNetwork {
    let kb = saturated(&responses(respondents, seed));
    build_networks(&kb, CLASS38_QPE, false)
        .expect("networks build")
        .into_iter()
        .max_by_key(|n| n.edges.len())
        .expect("three networks")
}

pub fn widest_graph(respondents: usize, seed: u64) -> Graph {
    Graph::from_network(&widest_network(respondents, seed))
}
