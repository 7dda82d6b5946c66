//! Batch evaluation over many graphs.
//!
//! With the `parallel` feature (on by default) the batch entry points fan out
//! over rayon's global pool; without it they run sequentially. The sequential
//! versions are always available so the two can be compared.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::criteria::{analyze, NullifierReport, SqueezingLevel};
use crate::error::Result;
use crate::graph::{validate_adjacency, ClusterGraph};
use crate::matfun::{random_orthogonal, OrthogonalMatrix};
use crate::oracle::{verify_theorem, TheoremCheck};

#[derive(Debug, Clone)]
pub struct VerifyCase {
    pub graph: ClusterGraph,
    pub squeezing: SqueezingLevel,
    pub q: OrthogonalMatrix,
}

impl VerifyCase {
    pub fn run(&self) -> Result<TheoremCheck> {
        verify_theorem(&self.graph, self.squeezing, &self.q)
    }
}

#[cfg(feature = "parallel")]
fn map_all<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_all<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Runs the covariance oracle on every case, in parallel when enabled.
pub fn verify_batch(cases: &[VerifyCase]) -> Vec<Result<TheoremCheck>> {
    map_all(cases, VerifyCase::run)
}

pub fn verify_batch_sequential(cases: &[VerifyCase]) -> Vec<Result<TheoremCheck>> {
    cases.iter().map(VerifyCase::run).collect()
}

pub fn analyze_batch(graphs: &[ClusterGraph], s: SqueezingLevel) -> Vec<NullifierReport> {
    map_all(graphs, |g| analyze(g, s))
}

pub fn analyze_batch_sequential(graphs: &[ClusterGraph], s: SqueezingLevel) -> Vec<NullifierReport> {
    graphs.iter().map(|g| analyze(g, s)).collect()
}

const DYADIC_WEIGHTS: [f64; 4] = [-1.0, -0.5, 0.5, 1.0];

/// Random cluster graph on `n` nodes.
///
/// Each pair is joined with probability ½; half of the edges take a weight
/// from `{±1, ±½}` and the rest a uniform weight in `[−1, 1]`. Graphs with
/// `n ≥ 2` always get at least one edge.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize) -> ClusterGraph {
    let mut m = nalgebra::DMatrix::zeros(n, n);
    let mut any = false;
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.5) {
                let w = if rng.random_bool(0.5) {
                    DYADIC_WEIGHTS[rng.random_range(0..DYADIC_WEIGHTS.len())]
                } else {
                    rng.random_range(-1.0..=1.0)
                };
                if w != 0.0 {
                    m[(i, j)] = w;
                    m[(j, i)] = w;
                    any = true;
                }
            }
        }
    }
    if !any && n >= 2 {
        let w = DYADIC_WEIGHTS[rng.random_range(0..DYADIC_WEIGHTS.len())];
        m[(0, 1)] = w;
        m[(1, 0)] = w;
    }
    validate_adjacency(m).expect("sampled weights are valid")
}

/// Parameters of a randomized oracle sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub seed: u64,
    pub graphs: usize,
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub levels_per_graph: usize,
    pub min_variance: f64,
    pub max_variance: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            seed: 0,
            graphs: 200,
            min_nodes: 2,
            max_nodes: 8,
            levels_per_graph: 5,
            min_variance: 0.01,
            max_variance: 0.24,
        }
    }
}

impl SweepSpec {
    /// Sampled graphs, each with its squeezing levels.
    pub fn sample(&self) -> Vec<(ClusterGraph, Vec<SqueezingLevel>)> {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        (0..self.graphs)
            .map(|_| {
                let n = rng.random_range(self.min_nodes..=self.max_nodes);
                let g = random_graph(&mut rng, n);
                let levels = (0..self.levels_per_graph)
                    .map(|_| {
                        let v = rng.random_range(self.min_variance..=self.max_variance);
                        SqueezingLevel::new(v).expect("positive variance range")
                    })
                    .collect();
                (g, levels)
            })
            .collect()
    }

    /// Every (graph, level) pair twice: once with `Q = I`, once with a random `Q`.
    pub fn cases(&self) -> Vec<VerifyCase> {
        let mut out = Vec::new();
        for (k, (g, levels)) in self.sample().into_iter().enumerate() {
            let n = g.n();
            for (l, s) in levels.into_iter().enumerate() {
                let seed = self.seed ^ ((k as u64) << 32 | l as u64);
                for q in [OrthogonalMatrix::identity(n), random_orthogonal(n, seed)] {
                    out.push(VerifyCase { graph: g.clone(), squeezing: s, q });
                }
            }
        }
        out
    }
}
