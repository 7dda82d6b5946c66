//! Closed-form nullifier variances and the squeezing criteria derived from them.
//!
//! Every input oscillator carries the same ŷ-quadrature variance `v`. Node
//! `j`'s nullifier then has variance `c_j · v` with `c_j = 1 + Σ_i a_ij²`, and
//! an edge `(i, j)` is certified inseparable when `(c_i + c_j)·v < |a_ij|`.
//! All inequalities are strict; boundary cases count as separable.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ClusterGraph, NodeId};

/// Quadrature variance of the vacuum under `[x̂, ŷ] = i/2`.
pub const VACUUM_VARIANCE: f64 = 0.25;

/// Variance of the squeezed ŷ quadrature of every input oscillator.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SqueezingLevel {
    variance: f64,
}

impl SqueezingLevel {
    pub fn new(variance: f64) -> Result<Self> {
        if variance.is_finite() && variance > 0.0 {
            Ok(SqueezingLevel { variance })
        } else {
            Err(Error::InvalidSqueezing(variance))
        }
    }

    pub fn vacuum() -> Self {
        SqueezingLevel { variance: VACUUM_VARIANCE }
    }

    /// From a level in dB relative to vacuum; negative values are squeezed.
    pub fn from_db(db: f64) -> Result<Self> {
        db_to_variance(db)
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn db(&self) -> f64 {
        variance_to_db(*self)
    }

    pub fn is_squeezed(&self) -> bool {
        self.variance < VACUUM_VARIANCE
    }

    /// Variance of the conjugate x̂ quadrature for a minimum-uncertainty state.
    pub fn antisqueezed_variance(&self) -> f64 {
        1.0 / (16.0 * self.variance)
    }
}

/// `10 log₁₀(v / ¼)`.
pub fn variance_to_db(s: SqueezingLevel) -> f64 {
    10.0 * (s.variance / VACUUM_VARIANCE).log10()
}

pub fn db_to_variance(db: f64) -> Result<SqueezingLevel> {
    SqueezingLevel::new(VACUUM_VARIANCE * 10f64.powf(db / 10.0))
}

/// `c_j = 1 + Σ_i a_ij²` for every node.
pub fn nullifier_variance_coefficients(g: &ClusterGraph) -> Vec<f64> {
    g.weights()
        .column_iter()
        .map(|col| 1.0 + col.iter().map(|a| a * a).sum::<f64>())
        .collect()
}

/// `c_j = 1 + deg(j)`, valid only when every nonzero weight equals one.
pub fn unweighted_coefficients(g: &ClusterGraph) -> Result<Vec<f64>> {
    if let Some((i, j, value)) = g.edges().find(|&(_, _, w)| w != 1.0) {
        return Err(Error::NotUnweighted { i, j, value });
    }
    (0..g.n())
        .map(|j| g.degree(NodeId(j)).map(|d| 1.0 + d as f64))
        .collect()
}

/// Squeezing bound contributed by one edge: `|a_ij| / (c_i + c_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeBound {
    pub i: usize,
    pub j: usize,
    pub weight_abs: f64,
    pub bound: f64,
}

pub fn edge_bounds(g: &ClusterGraph) -> Vec<EdgeBound> {
    let c = nullifier_variance_coefficients(g);
    g.edges()
        .map(|(i, j, w)| EdgeBound { i, j, weight_abs: w.abs(), bound: w.abs() / (c[i] + c[j]) })
        .collect()
}

/// The largest input variance that still certifies every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub value: f64,
    /// Lexicographically first edge attaining the minimum.
    pub argmin_edge: (usize, usize),
    /// Every edge attaining the minimum, in lexicographic order.
    pub tied_edges: Vec<(usize, usize)>,
}

impl Threshold {
    pub fn db(&self) -> f64 {
        10.0 * (self.value / VACUUM_VARIANCE).log10()
    }
}

/// Minimum over edges of `|a_ij| / (c_i + c_j)`. A cluster is generable iff
/// the input variance lies strictly below this value.
pub fn min_squeezing_threshold(g: &ClusterGraph) -> Result<Threshold> {
    let bounds = edge_bounds(g);
    let value = bounds
        .iter()
        .map(|b| b.bound)
        .reduce(f64::min)
        .ok_or(Error::NoEdges)?;
    let tied_edges: Vec<_> = bounds
        .iter()
        .filter(|b| b.bound == value)
        .map(|b| (b.i, b.j))
        .collect();
    Ok(Threshold { value, argmin_edge: tied_edges[0], tied_edges })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeVerdict {
    pub i: usize,
    pub j: usize,
    /// `⟨δN_i²⟩ + ⟨δN_j²⟩ = (c_i + c_j)·v`
    pub lhs: f64,
    pub weight_abs: f64,
    pub inseparable: bool,
}

/// Pairwise inseparability test for every edge.
///
/// The strict inequality `(c_i + c_j)·v < |a_ij|` is evaluated in the
/// divided form `v < |a_ij| / (c_i + c_j)`, which agrees bit-for-bit with
/// the threshold reported by [`min_squeezing_threshold`]; a variance equal
/// to the threshold is therefore never certified.
pub fn pairwise_vlf_check(g: &ClusterGraph, s: SqueezingLevel) -> Vec<EdgeVerdict> {
    let c = nullifier_variance_coefficients(g);
    edge_bounds(g)
        .into_iter()
        .map(|b| EdgeVerdict {
            i: b.i,
            j: b.j,
            lhs: (c[b.i] + c[b.j]) * s.variance,
            weight_abs: b.weight_abs,
            inseparable: s.variance < b.bound,
        })
        .collect()
}

/// Coefficients of two auxiliary operators `b̂ = Σ h_k X̂_k + g_k Ŷ_k` and
/// `ĉ = Σ h̃_k X̂_k + g̃_k Ŷ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct VlfOperators {
    pub h: Vec<f64>,
    pub g: Vec<f64>,
    pub h_tilde: Vec<f64>,
    pub g_tilde: Vec<f64>,
}

impl VlfOperators {
    /// `b̂ = N̂_i`, `ĉ = N̂_j`.
    pub fn nullifier_pair(graph: &ClusterGraph, i: NodeId, j: NodeId) -> Result<Self> {
        let (i, j) = (graph.node(i.0)?.0, graph.node(j.0)?.0);
        let n = graph.n();
        let unit = |k: usize| (0..n).map(|m| if m == k { 1.0 } else { 0.0 }).collect();
        Ok(VlfOperators {
            h: (0..n).map(|k| -graph.weight(i, k)).collect(),
            g: unit(i),
            h_tilde: (0..n).map(|k| -graph.weight(j, k)).collect(),
            g_tilde: unit(j),
        })
    }

    pub fn bound(&self, partition: &[Vec<usize>]) -> Result<f64> {
        vlf_bound(&self.h, &self.g, &self.h_tilde, &self.g_tilde, partition)
    }
}

/// Right-hand side of the van Loock–Furusawa inequality,
/// `½ Σ_r |Σ_{k∈S_r} (h_k g̃_k − h̃_k g_k)|`. Any state separable with respect
/// to `partition` has `⟨δb̂²⟩ + ⟨δĉ²⟩` at least this large.
pub fn vlf_bound(
    h: &[f64],
    g: &[f64],
    h_tilde: &[f64],
    g_tilde: &[f64],
    partition: &[Vec<usize>],
) -> Result<f64> {
    let n = h.len();
    for v in [g, h_tilde, g_tilde] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
    }
    let mut covered = vec![false; n];
    for (r, subset) in partition.iter().enumerate() {
        for &k in subset {
            match covered.get_mut(k) {
                None => return Err(Error::BadPartition(format!("index {k} in subset {r} is out of range for n = {n}"))),
                Some(true) => return Err(Error::BadPartition(format!("index {k} appears more than once"))),
                Some(slot) => *slot = true,
            }
        }
    }
    if let Some(k) = covered.iter().position(|&c| !c) {
        return Err(Error::BadPartition(format!("index {k} is not covered")));
    }
    Ok(0.5
        * partition
            .iter()
            .map(|subset| {
                subset
                    .iter()
                    .map(|&k| h[k] * g_tilde[k] - h_tilde[k] * g[k])
                    .sum::<f64>()
                    .abs()
            })
            .sum::<f64>())
}

/// Largest degree sum two adjacent nodes of an unweighted cluster may have.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeighborBudget {
    /// `1/v − 2`; the degree sum must lie strictly below it.
    pub bound: f64,
    pub max_degree_sum: u64,
    /// False when even a single edge (degree sum 2) is out of reach.
    pub generable: bool,
}

/// Tolerance for treating `1/v − 2` as an exact integer.
const INTEGER_GUARD: f64 = 1e-12;

pub fn neighbor_budget(s: SqueezingLevel) -> NeighborBudget {
    let bound = 1.0 / s.variance - 2.0;
    let max_degree_sum = if bound <= 1.0 {
        0
    } else {
        let nearest = bound.round();
        let below = if (bound - nearest).abs() <= INTEGER_GUARD { nearest - 1.0 } else { bound.floor() };
        below as u64
    };
    NeighborBudget { bound, max_degree_sum, generable: max_degree_sum >= 2 }
}

/// Everything the closed-form analysis says about one graph at one squeezing level.
#[derive(Debug, Clone, PartialEq)]
pub struct NullifierReport {
    pub coefficients: Vec<f64>,
    pub variances: Vec<f64>,
    /// Present iff the graph has an edge.
    pub threshold: Option<Threshold>,
    pub edge_verdicts: Vec<EdgeVerdict>,
    pub squeezing_used: SqueezingLevel,
    /// Nodes with the largest coefficient; they set the squeezing demand.
    pub max_demand_nodes: Vec<usize>,
}

impl NullifierReport {
    pub fn all_inseparable(&self) -> bool {
        !self.edge_verdicts.is_empty() && self.edge_verdicts.iter().all(|v| v.inseparable)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Squeezing {
            variance: f64,
            db: f64,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            coefficients: &'a [f64],
            variances: &'a [f64],
            threshold: Option<f64>,
            threshold_db: Option<f64>,
            argmin_edge: Option<[usize; 2]>,
            tied_edges: Vec<[usize; 2]>,
            max_demand_nodes: &'a [usize],
            edges: &'a [EdgeVerdict],
            squeezing: Squeezing,
        }
        let t = self.threshold.as_ref();
        let doc = Doc {
            coefficients: &self.coefficients,
            variances: &self.variances,
            threshold: t.map(|t| t.value),
            threshold_db: t.map(Threshold::db),
            argmin_edge: t.map(|t| [t.argmin_edge.0, t.argmin_edge.1]),
            tied_edges: t.map_or_else(Vec::new, |t| t.tied_edges.iter().map(|&(i, j)| [i, j]).collect()),
            max_demand_nodes: &self.max_demand_nodes,
            edges: &self.edge_verdicts,
            squeezing: Squeezing { variance: self.squeezing_used.variance, db: self.squeezing_used.db() },
        };
        serde_json::to_value(doc).expect("report serializes")
    }
}

pub fn analyze(g: &ClusterGraph, s: SqueezingLevel) -> NullifierReport {
    let coefficients = nullifier_variance_coefficients(g);
    let variances = coefficients.iter().map(|c| c * s.variance).collect();
    let threshold = min_squeezing_threshold(g).ok();
    let peak = coefficients.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_demand_nodes = (0..g.n()).filter(|&j| coefficients[j] == peak).collect();
    NullifierReport {
        variances,
        threshold,
        edge_verdicts: pairwise_vlf_check(g, s),
        squeezing_used: s,
        max_demand_nodes,
        coefficients,
    }
}
