use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::metrics::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosenessMode {
    /// Reachable-set closeness scaled by the share of nodes reached.
    #[default]
    Wf,
    /// Reachable nodes over their total distance, no scaling.
    Classic,
    /// Mean inverse distance over the other n-1 nodes.
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenvectorMode {
    /// Principal eigenvector of A or its transpose combined.
    #[default]
    Symmetrized,
    /// Right eigenvector of the transpose: a node scores by its in-neighbours.
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseModeError(String);

impl fmt::Display for ParseModeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseModeError {}

impl FromStr for ClosenessMode {
    type Err = ParseModeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wf" => Ok(ClosenessMode::Wf),
            "classic" => Ok(ClosenessMode::Classic),
            "harmonic" => Ok(ClosenessMode::Harmonic),
            other => Err(ParseModeError(format!(
                "unknown closeness mode {other:?} (expected classic, wf or harmonic)"
            ))),
        }
    }
}

impl FromStr for EigenvectorMode {
    type Err = ParseModeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symmetrized" => Ok(EigenvectorMode::Symmetrized),
            "right" => Ok(EigenvectorMode::Right),
            other => Err(ParseModeError(format!(
                "unknown eigenvector mode {other:?} (expected symmetrized or right)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Degrees {
    pub indegree: usize,
    pub outdegree: usize,
    pub degree: usize,
}

pub fn degrees(g: &Graph) -> Vec<Degrees> {
    (0..g.n())
        .map(|v| {
            let indegree = g.predecessors(v).len();
            let outdegree = g.successors(v).len();
            Degrees {
                indegree,
                outdegree,
                degree: indegree + outdegree,
            }
        })
        .collect()
}

/// Breadth-first distances from `s`; `None` for unreachable nodes.
pub fn bfs_distances(g: &Graph, s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n()];
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].expect("queued nodes have a distance");
        for &w in g.successors(v) {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Shortest-path betweenness over ordered pairs (Brandes). With
/// `normalize`, scores are divided by (n-1)(n-2).
pub fn betweenness(g: &Graph, normalize: bool) -> Vec<f64> {
    let n = g.n();
    let mut score = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist: Vec<Option<usize>> = vec![None; n];
    let mut delta = vec![0.0f64; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);
    for s in 0..n {
        sigma.iter_mut().for_each(|x| *x = 0.0);
        dist.iter_mut().for_each(|x| *x = None);
        delta.iter_mut().for_each(|x| *x = 0.0);
        order.clear();
        sigma[s] = 1.0;
        dist[s] = Some(0);
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let dv = dist[v].expect("queued nodes have a distance");
            for &w in g.successors(v) {
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
                if dist[w] == Some(dv + 1) {
                    sigma[w] += sigma[v];
                }
            }
        }
        for &w in order.iter().rev() {
            let dw = dist[w].expect("visited");
            for &v in g.predecessors(w) {
                if dist[v].is_some_and(|dv| dv + 1 == dw) {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
            }
            if w != s {
                score[w] += delta[w];
            }
        }
    }
    if normalize && n > 2 {
        let scale = ((n - 1) * (n - 2)) as f64;
        score.iter_mut().for_each(|x| *x /= scale);
    }
    score
}

pub fn closeness(g: &Graph, mode: ClosenessMode) -> Vec<f64> {
    let n = g.n();
    (0..n)
        .map(|v| {
            if n < 2 {
                return 0.0;
            }
            let dist = bfs_distances(g, v);
            let reached: Vec<usize> = dist
                .iter()
                .enumerate()
                .filter(|(u, _)| *u != v)
                .filter_map(|(_, d)| *d)
                .collect();
            let r = reached.len() as f64;
            let total: usize = reached.iter().sum();
            match mode {
                _ if reached.is_empty() => 0.0,
                ClosenessMode::Wf => (r / (n - 1) as f64) * (r / total as f64),
                ClosenessMode::Classic => r / total as f64,
                ClosenessMode::Harmonic => {
                    reached.iter().map(|&d| 1.0 / d as f64).sum::<f64>() / (n - 1) as f64
                }
            }
        })
        .collect()
}

pub const EIGEN_TOLERANCE: f64 = 1e-10;
pub const EIGEN_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenvector {
    pub values: Vec<f64>,
    /// No edges at all: the uniform vector is returned by convention.
    pub degenerate: bool,
    pub iterations: usize,
}

/// Power iteration on `M + I` from the uniform vector, L2-normalized,
/// where `M` is `A ∨ Aᵀ` (symmetrized) or `Aᵀ` (right). The identity
/// shift keeps bipartite graphs from oscillating without moving the
/// eigenvectors.
pub fn eigenvector(g: &Graph, mode: EigenvectorMode) -> Eigenvector {
    let n = g.n();
    if n == 0 {
        return Eigenvector {
            values: Vec::new(),
            degenerate: true,
            iterations: 0,
        };
    }
    let m = match mode {
        EigenvectorMode::Symmetrized => g.symmetrized(),
        EigenvectorMode::Right => g.clone(),
    };
    let uniform = vec![1.0 / (n as f64).sqrt(); n];
    if m.edge_count() == 0 {
        return Eigenvector {
            values: uniform,
            degenerate: true,
            iterations: 0,
        };
    }
    let mut x = uniform;
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    while iterations < EIGEN_MAX_ITERATIONS {
        iterations += 1;
        for v in 0..n {
            // in-neighbours of v under M
            next[v] = x[v] + m.predecessors(v).iter().map(|&u| x[u]).sum::<f64>();
        }
        let norm = next.iter().map(|y| y * y).sum::<f64>().sqrt();
        next.iter_mut().for_each(|y| *y /= norm);
        let diff = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if diff < EIGEN_TOLERANCE {
            break;
        }
    }
    Eigenvector {
        values: x,
        degenerate: false,
        iterations,
    }
}
