//! Social network indices over derived networks.

mod centrality;
mod graph;
pub mod oracle;
mod writeback;

use serde::Serialize;

use crate::kb::EntityId;
use crate::network::DerivedNetwork;

pub use centrality::{
    betweenness, bfs_distances, closeness, degrees, eigenvector, ClosenessMode, Degrees,
    Eigenvector, EigenvectorMode, ParseModeError, EIGEN_MAX_ITERATIONS, EIGEN_TOLERANCE,
};
pub use graph::Graph;
pub use writeback::write_back;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MetricOptions {
    pub closeness: ClosenessMode,
    pub eigenvector: EigenvectorMode,
    pub normalize_betweenness: bool,
}

/// Reads one index off an actor's row.
pub type ActorIndex = fn(&ActorMetrics) -> f64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActorMetrics {
    pub id: EntityId,
    pub degree: usize,
    pub indegree: usize,
    pub outdegree: usize,
    pub betweenness: f64,
    pub closeness: f64,
    pub eigenvector: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkMetrics {
    pub number_of_relations: usize,
    pub number_of_actors: usize,
    pub number_of_subject_actors: usize,
    pub number_of_object_actors: usize,
    pub number_of_actors_involved: usize,
    pub isolates: usize,
    pub density: f64,
    pub average_degree: f64,
    pub network_betweenness: f64,
    pub network_closeness: f64,
    pub network_degree: f64,
    pub network_indegree: f64,
    pub network_outdegree: f64,
    pub network_eigenvector: f64,
}

/// Per-actor indices in node order.
pub fn actor_metrics(g: &Graph, opts: &MetricOptions) -> (Vec<ActorMetrics>, bool) {
    let deg = degrees(g);
    let bw = betweenness(g, opts.normalize_betweenness);
    let cl = closeness(g, opts.closeness);
    let ev = eigenvector(g, opts.eigenvector);
    let actors = (0..g.n())
        .map(|v| ActorMetrics {
            id: g.nodes[v].clone(),
            degree: deg[v].degree,
            indegree: deg[v].indegree,
            outdegree: deg[v].outdegree,
            betweenness: bw[v],
            closeness: cl[v],
            eigenvector: ev.values[v],
        })
        .collect();
    (actors, ev.degenerate)
}

/// How actor-level values are lifted to the network. Currently the
/// arithmetic mean; 0 for an empty network.
pub fn network_aggregate(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, count) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

pub fn network_summary(g: &Graph, actors: &[ActorMetrics]) -> NetworkMetrics {
    let n = g.n();
    let e = g.edge_count();
    let count = |f: fn(&ActorMetrics) -> bool| actors.iter().filter(|a| f(a)).count();
    let involved = count(|a| a.degree > 0);
    NetworkMetrics {
        number_of_relations: e,
        number_of_actors: n,
        number_of_subject_actors: count(|a| a.outdegree > 0),
        number_of_object_actors: count(|a| a.indegree > 0),
        number_of_actors_involved: involved,
        isolates: n - involved,
        density: if n < 2 {
            0.0
        } else {
            e as f64 / (n * (n - 1)) as f64
        },
        average_degree: if n == 0 { 0.0 } else { e as f64 / n as f64 },
        network_betweenness: network_aggregate(actors.iter().map(|a| a.betweenness)),
        network_closeness: network_aggregate(actors.iter().map(|a| a.closeness)),
        network_degree: network_aggregate(actors.iter().map(|a| a.degree as f64)),
        network_indegree: network_aggregate(actors.iter().map(|a| a.indegree as f64)),
        network_outdegree: network_aggregate(actors.iter().map(|a| a.outdegree as f64)),
        network_eigenvector: network_aggregate(actors.iter().map(|a| a.eigenvector)),
    }
}

/// Rounds to 9 significant digits, the precision used in every report.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub network_id: EntityId,
    pub relation_type: String,
    pub qpe_id: EntityId,
    pub options: MetricOptions,
    /// True when the network has no edges and eigenvector scores are the
    /// uniform vector by convention.
    pub eigenvector_degenerate: bool,
    pub network: NetworkMetrics,
    /// Sorted by id.
    pub actors: Vec<ActorMetrics>,
    pub isolate_ids: Vec<EntityId>,
}

impl MetricsReport {
    pub fn compute(net: &DerivedNetwork, opts: &MetricOptions) -> Self {
        let g = Graph::from_network(net);
        let (mut actors, degenerate) = actor_metrics(&g, opts);
        let mut network = network_summary(&g, &actors);
        for a in &mut actors {
            a.betweenness = round_sig(a.betweenness);
            a.closeness = round_sig(a.closeness);
            a.eigenvector = round_sig(a.eigenvector);
        }
        for x in [
            &mut network.density,
            &mut network.average_degree,
            &mut network.network_betweenness,
            &mut network.network_closeness,
            &mut network.network_degree,
            &mut network.network_indegree,
            &mut network.network_outdegree,
            &mut network.network_eigenvector,
        ] {
            *x = round_sig(*x);
        }
        let isolate_ids = actors
            .iter()
            .filter(|a| a.degree == 0)
            .map(|a| a.id.clone())
            .collect();
        MetricsReport {
            network_id: net.network_id.clone(),
            relation_type: net.relation_type.clone(),
            qpe_id: net.qpe_id.clone(),
            options: *opts,
            eigenvector_degenerate: degenerate,
            network,
            actors,
            isolate_ids,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn summary(g: &Graph) -> NetworkMetrics {
        let (actors, _) = actor_metrics(g, &MetricOptions::default());
        network_summary(g, &actors)
    }

    #[test]
    fn triangle_summary() {
        let s = summary(&Graph::anonymous(3, [(0, 1), (1, 2), (2, 0)]));
        assert_eq!(s.number_of_relations, 3);
        assert_eq!(s.density, 0.5);
        assert_eq!(s.isolates, 0);
        assert_eq!(s.average_degree, 1.0);
        assert_eq!(s.network_degree, 2.0);
    }

    #[test]
    fn edgeless_summary() {
        let s = summary(&Graph::anonymous(5, []));
        assert_eq!(s.density, 0.0);
        assert_eq!(s.isolates, 5);
        assert_eq!(s.number_of_actors_involved, 0);
        let empty = summary(&Graph::anonymous(0, []));
        assert_eq!(empty.average_degree, 0.0);
        assert_eq!(empty.network_closeness, 0.0);
    }

    #[test]
    fn rounding_keeps_nine_digits() {
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333);
        assert_eq!(round_sig(2.0f64.sqrt() * 1000.0), 1414.21356);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(5.0), 5.0);
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (0usize..9).prop_flat_map(|n| {
            prop::collection::vec((0..n.max(1), 0..n.max(1)), 0..(n * n + 1))
                .prop_map(move |edges| Graph::anonymous(n, if n == 0 { Vec::new() } else { edges }))
        })
    }

    proptest! {
        #[test]
        fn summary_invariants(g in arb_graph()) {
            let s = summary(&g);
            let n = g.n();
            prop_assert_eq!(s.number_of_actors, s.number_of_actors_involved + s.isolates);
            prop_assert_eq!(s.number_of_relations, g.edge_count());
            prop_assert!((0.0..=1.0).contains(&s.density));
            prop_assert_eq!(s.density == 1.0, n >= 2 && g.edge_count() == n * (n - 1));
        }
    }
}
