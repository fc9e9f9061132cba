use crate::kb::EntityId;
use crate::network::DerivedNetwork;

/// Simple digraph over node indices `0..n`. Adjacency lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub nodes: Vec<EntityId>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from index pairs; self-loops and repeats are dropped.
    ///
    /// Panics when an index is out of range.
    pub fn from_edges(
        nodes: Vec<EntityId>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let n = nodes.len();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for (s, t) in edges {
            assert!(s < n && t < n, "edge ({s}, {t}) out of range for {n} nodes");
            if s != t {
                out[s].push(t);
                inc[t].push(s);
            }
        }
        let mut edge_count = 0;
        for list in out.iter_mut().chain(inc.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        for list in &out {
            edge_count += list.len();
        }
        Graph {
            nodes,
            out,
            inc,
            edge_count,
        }
    }

    /// Nodes named `0..n` with the given edges; handy for tests and oracles.
    pub fn anonymous(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let nodes = (0..n)
            .map(|i| EntityId::new(format!("v{i}")).expect("valid id"))
            .collect();
        Graph::from_edges(nodes, edges)
    }

    /// The network's members in order; edges touching non-members are
    /// ignored.
    pub fn from_network(net: &DerivedNetwork) -> Self {
        let index = |e: &EntityId| net.members.binary_search(e).ok();
        let edges: Vec<(usize, usize)> = net
            .edges
            .iter()
            .filter_map(|(s, t)| Some((index(s)?, index(t)?)))
            .collect();
        Graph::from_edges(net.members.clone(), edges)
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    pub fn has_edge(&self, s: usize, t: usize) -> bool {
        self.out[s].binary_search(&t).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(s, ts)| ts.iter().map(move |&t| (s, t)))
    }

    /// Union of both edge directions.
    pub fn symmetrized(&self) -> Graph {
        Graph::from_edges(
            self.nodes.clone(),
            self.edges().flat_map(|(s, t)| [(s, t), (t, s)]),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loops_and_repeats_are_dropped() {
        let g = Graph::anonymous(3, [(0, 1), (0, 1), (1, 1), (2, 0)]);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.successors(0), &[1]);
        assert_eq!(g.predecessors(0), &[2]);
        assert_eq!(g.symmetrized().edge_count(), 4);
    }
}
