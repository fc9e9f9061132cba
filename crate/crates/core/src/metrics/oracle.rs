//! Slow, definition-level reimplementations of the metrics, used to check
//! the fast ones.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::metrics::{
    betweenness, closeness, degrees, eigenvector, ClosenessMode, EigenvectorMode, Graph,
};

pub const BETWEENNESS_TOLERANCE: f64 = 1e-9;
pub const CLOSENESS_TOLERANCE: f64 = 1e-12;
pub const EIGENVECTOR_MIN_COSINE: f64 = 1.0 - 1e-8;

/// Dense 0/1 adjacency matrix.
pub fn adjacency(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    DMatrix::from_fn(n, n, |i, j| if g.has_edge(i, j) { 1.0 } else { 0.0 })
}

/// (indegree, outdegree) from column and row sums.
pub fn matrix_degrees(g: &Graph) -> Vec<(usize, usize)> {
    let a = adjacency(g);
    (0..g.n())
        .map(|v| (a.column(v).sum() as usize, a.row(v).sum() as usize))
        .collect()
}

/// All-pairs hop distances; `None` when unreachable.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<usize>>> {
    let n = g.n();
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
        for &j in g.successors(i) {
            row[j] = Some(1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if !matches!(d[i][j], Some(c) if c <= a + b) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

pub fn closeness_oracle(g: &Graph, mode: ClosenessMode) -> Vec<f64> {
    let n = g.n();
    let d = floyd_warshall(g);
    (0..n)
        .map(|v| {
            let reach: Vec<usize> = (0..n).filter(|&u| u != v).filter_map(|u| d[v][u]).collect();
            if reach.is_empty() {
                return 0.0;
            }
            let r = reach.len() as f64;
            let sum = reach.iter().sum::<usize>() as f64;
            match mode {
                ClosenessMode::Wf => r * r / ((n - 1) as f64 * sum),
                ClosenessMode::Classic => r / sum,
                ClosenessMode::Harmonic => {
                    reach.iter().map(|&x| 1.0 / x as f64).sum::<f64>() / (n - 1) as f64
                }
            }
        })
        .collect()
}

/// Lists every shortest path from `s` to `t` explicitly.
fn geodesics(g: &Graph, d: &[Vec<Option<usize>>], s: usize, t: usize) -> Vec<Vec<usize>> {
    fn walk(
        g: &Graph,
        d: &[Vec<Option<usize>>],
        path: &mut Vec<usize>,
        t: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        let v = *path.last().expect("non-empty path");
        if v == t {
            out.push(path.clone());
            return;
        }
        for &w in g.successors(v) {
            // w must be one hop closer to t
            if d[w][t].is_some() && d[w][t].map(|x| x + 1) == d[v][t] {
                path.push(w);
                walk(g, d, path, t, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    if d[s][t].is_some() {
        walk(g, d, &mut vec![s], t, &mut out);
    }
    out
}

/// Betweenness by counting, for every ordered pair, the share of geodesics
/// through each interior node.
pub fn betweenness_oracle(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let d = floyd_warshall(g);
    let mut b = vec![0.0; n];
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let paths = geodesics(g, &d, s, t);
            if paths.is_empty() {
                continue;
            }
            let total = paths.len() as f64;
            for (v, bv) in b.iter_mut().enumerate() {
                if v == s || v == t {
                    continue;
                }
                let through = paths.iter().filter(|p| p.contains(&v)).count();
                *bv += through as f64 / total;
            }
        }
    }
    b
}

/// Expected power-iteration limit for the symmetrized adjacency: the
/// uniform vector projected onto the dominant eigenspace, normalized.
pub fn eigenvector_oracle(g: &Graph) -> Vec<f64> {
    let n = g.n();
    if n == 0 {
        return Vec::new();
    }
    let a = adjacency(g);
    let m: DMatrix<f64> = (&a + a.transpose()).map(|x| if x > 0.0 { 1.0 } else { 0.0 });
    let eig = SymmetricEigen::new(m);
    let top: f64 = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let uniform = DVector::from_element(n, 1.0);
    let mut x: DVector<f64> = DVector::zeros(n);
    for (i, lambda) in eig.eigenvalues.iter().copied().enumerate() {
        if (lambda - top).abs() < 1e-9 {
            let u = eig.eigenvectors.column(i);
            x += u * u.dot(&uniform);
        }
    }
    let norm = x.norm();
    x.iter().map(|v| (v / norm).abs()).collect()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 && nb == 0.0 {
        1.0
    } else {
        dot / (na * nb)
    }
}

/// One representative of every isomorphism class of simple digraphs on
/// `n` nodes. Exhaustive, so only practical for small `n`.
pub fn nonisomorphic_digraphs(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let canon = perms
            .iter()
            .map(|p| {
                pairs.iter().enumerate().fold(0u64, |acc, (bit, &(a, b))| {
                    if mask >> bit & 1 == 1 {
                        let idx = pairs
                            .iter()
                            .position(|&e| e == (p[a], p[b]))
                            .expect("permuted pair exists");
                        acc | 1 << idx
                    } else {
                        acc
                    }
                })
            })
            .min()
            .expect("at least the identity permutation");
        if seen.insert(canon) {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(bit, _)| canon >> bit & 1 == 1)
                .map(|(_, &e)| e);
            out.push(Graph::anonymous(n, edges));
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn random_digraph(rng: &mut impl Rng) -> Graph {
    let n = rng.gen_range(2..=8);
    let p = rng.gen_range(0.1..=0.9);
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|(a, b)| a != b)
        .filter(|_| rng.gen_bool(p))
        .collect();
    Graph::anonymous(n, edges)
}

pub type BetweennessFn = fn(&Graph, bool) -> Vec<f64>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub seed: u64,
    pub graphs: usize,
    pub exhaustive_graphs: usize,
    pub random_graphs: usize,
    pub degree_mismatches: usize,
    pub max_betweenness_deviation: f64,
    pub max_closeness_deviation: f64,
    pub min_eigenvector_cosine: f64,
    /// Names of the metrics that exceeded their tolerance.
    pub failures: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Compares every metric with its oracle on all non-isomorphic digraphs
/// with at most four nodes plus `trials` seeded random digraphs.
pub fn run_oracle_check(seed: u64, trials: usize) -> OracleReport {
    run_oracle_check_with(seed, trials, betweenness)
}

/// Same as [`run_oracle_check`] but with the betweenness implementation
/// under test swapped out.
pub fn run_oracle_check_with(
    seed: u64,
    trials: usize,
    betweenness_impl: BetweennessFn,
) -> OracleReport {
    let mut graphs: Vec<Graph> = (1..=4).flat_map(nonisomorphic_digraphs).collect();
    let exhaustive = graphs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    graphs.extend((0..trials).map(|_| random_digraph(&mut rng)));

    let mut report = OracleReport {
        seed,
        graphs: graphs.len(),
        exhaustive_graphs: exhaustive,
        random_graphs: trials,
        degree_mismatches: 0,
        max_betweenness_deviation: 0.0,
        max_closeness_deviation: 0.0,
        min_eigenvector_cosine: 1.0,
        failures: Vec::new(),
    };
    for g in &graphs {
        let fast: Vec<(usize, usize)> = degrees(g)
            .iter()
            .map(|d| (d.indegree, d.outdegree))
            .collect();
        if fast != matrix_degrees(g) {
            report.degree_mismatches += 1;
        }
        report.max_betweenness_deviation = report.max_betweenness_deviation.max(max_abs_diff(
            &betweenness_impl(g, false),
            &betweenness_oracle(g),
        ));
        for mode in [
            ClosenessMode::Wf,
            ClosenessMode::Classic,
            ClosenessMode::Harmonic,
        ] {
            report.max_closeness_deviation = report.max_closeness_deviation.max(max_abs_diff(
                &closeness(g, mode),
                &closeness_oracle(g, mode),
            ));
        }
        let ev = eigenvector(g, EigenvectorMode::Symmetrized);
        report.min_eigenvector_cosine = report
            .min_eigenvector_cosine
            .min(cosine(&ev.values, &eigenvector_oracle(g)));
    }
    if report.degree_mismatches > 0 {
        report.failures.push("degree".into());
    }
    if report.max_betweenness_deviation >= BETWEENNESS_TOLERANCE {
        report.failures.push("betweenness".into());
    }
    if report.max_closeness_deviation >= CLOSENESS_TOLERANCE {
        report.failures.push("closeness".into());
    }
    if report.min_eigenvector_cosine < EIGENVECTOR_MIN_COSINE {
        report.failures.push("eigenvector".into());
    }
    report
}
