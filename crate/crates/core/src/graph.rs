//! Whole-graph assembly.
//!
//! Every builder runs one fit per node over that node's K nearest
//! neighbors, then merges the directed proposals into an undirected
//! graph. Kernel-regression builders resolve two-sided conflicts by
//! keeping the weight from the endpoint with the smaller local
//! objective (ties go to the lower index); a one-sided proposal is
//! kept as is, since discarding it would disconnect sparse regions.
//! The KNN baseline symmetrizes by union instead.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::PointSet;
use crate::kernel::{kernel_submatrix, KernelError, KernelSpec};
use crate::linalg::{self, SquareMat};
use crate::map_indexed;
use crate::neighbors::{knn_search, NeighborList, NeighborsError};
use crate::nnqp::{self, NnqpError, QPProblem, DEFAULT_ZERO_TOL};

#[derive(Debug, Clone, PartialEq)]
pub enum BuildError {
    Neighbors(NeighborsError),
    Kernel { node: usize, source: KernelError },
    Solver { node: usize, source: NnqpError },
    InvalidInput(String),
}

impl core::fmt::Display for BuildError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BuildError::Neighbors(e) => write!(f, "{e}"),
            BuildError::Kernel { node, source } => {
                write!(f, "kernel error at node {node}: {source}")
            }
            BuildError::Solver { node, source } => {
                write!(f, "solver error at node {node}: {source}")
            }
            BuildError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

impl core::error::Error for BuildError {}

impl From<NeighborsError> for BuildError {
    fn from(e: NeighborsError) -> Self {
        BuildError::Neighbors(e)
    }
}

/// Which construction produced a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BuilderTag {
    Nnk,
    NnkMp,
    NnkOmp,
    Knn,
    LlePos,
}

impl BuilderTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            BuilderTag::Nnk => "nnk",
            BuilderTag::NnkMp => "nnk_mp",
            BuilderTag::NnkOmp => "nnk_omp",
            BuilderTag::Knn => "knn",
            BuilderTag::LlePos => "lle_pos",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyMode {
    /// Append the raw kernel value of each selected atom.
    Mp,
    /// Re-solve the constrained regression after each selection.
    Omp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LleConstraint {
    Nonneg,
    NonnegSum1,
}

/// One node's fitted neighborhood.
#[derive(Debug, Clone)]
pub struct LocalFit {
    pub node: usize,
    /// The KNN candidate set, ascending by distance.
    pub candidates: Vec<usize>,
    /// Retained neighbors (positive weight), a subset of `candidates`.
    pub support: Vec<usize>,
    /// Weights aligned with `support`; all strictly positive.
    pub weights: Vec<f64>,
    /// Local objective: residual energy J_i for kernel builders,
    /// squared reconstruction residual for the observation-space one.
    pub objective: f64,
}

impl LocalFit {
    pub fn weight_of(&self, j: usize) -> Option<f64> {
        self.support.iter().position(|&s| s == j).map(|p| self.weights[p])
    }
}

/// Support lists are index-sorted so they read as canonical sets.
fn sort_support(support: &mut Vec<usize>, weights: &mut Vec<f64>) {
    let mut order: Vec<usize> = (0..support.len()).collect();
    order.sort_unstable_by_key(|&slot| support[slot]);
    *support = order.iter().map(|&slot| support[slot]).collect();
    *weights = order.iter().map(|&slot| weights[slot]).collect();
}

/// Undirected edge with per-edge provenance.
#[derive(Debug, Clone)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
    /// The endpoint whose local fit supplied the weight.
    pub source: usize,
}

#[derive(Debug, Clone)]
pub struct SparseGraph {
    pub n: usize,
    pub k: usize,
    pub builder: BuilderTag,
    /// Kernel used by kernel-space builders; `None` for the
    /// observation-space regression.
    pub kernel: Option<KernelSpec>,
    pub zero_tol: f64,
    /// Upper-triangular edge list (i < j), sorted, weights > 0.
    pub edges: Vec<Edge>,
    pub fits: Vec<LocalFit>,
    /// Neighbors dropped for coinciding exactly with their center
    /// (observation-space builder only).
    pub dropped_degenerate: usize,
}

impl SparseGraph {
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|e| e.i == node || e.j == node).count()
    }

    pub fn edge_weight(&self, a: usize, b: usize) -> Option<f64> {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        self.edges.iter().find(|e| e.i == i && e.j == j).map(|e| e.weight)
    }

    /// Adjacency lists with symmetric weights.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = alloc::vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.i].push((e.j, e.weight));
            adj[e.j].push((e.i, e.weight));
        }
        adj
    }

    pub fn local_fit(&self, node: usize) -> &LocalFit {
        &self.fits[node]
    }
}

/// Ratio of edges heavier than `threshold` to the number of nodes.
pub fn edge_density(g: &SparseGraph, threshold: f64) -> f64 {
    g.edges.iter().filter(|e| e.weight > threshold).count() as f64 / g.n as f64
}

/// Full construction: per-node non-negative kernel regression over the
/// K nearest neighbors, then min-error symmetrization.
pub fn build_nnk(ps: &PointSet, k: usize, spec: &KernelSpec) -> Result<SparseGraph, BuildError> {
    let nl = knn_search(ps, k)?;
    build_nnk_from_neighbors(ps, &nl, spec)
}

/// The regression stage alone, reusing an existing neighbor list.
/// This is the part of the build whose cost is linear in N.
pub fn build_nnk_from_neighbors(
    ps: &PointSet,
    nl: &NeighborList,
    spec: &KernelSpec,
) -> Result<SparseGraph, BuildError> {
    let n = ps.n();
    let fits = collect_fits(map_indexed(n, |i| nnk_fit(ps, i, nl.indices(i), spec)))?;
    let edges = symmetrize_min_error(&fits);
    Ok(SparseGraph {
        n,
        k: nl.k(),
        builder: BuilderTag::Nnk,
        kernel: Some(*spec),
        zero_tol: DEFAULT_ZERO_TOL,
        edges,
        fits,
        dropped_degenerate: 0,
    })
}

fn nnk_fit(
    ps: &PointSet,
    node: usize,
    candidates: Vec<usize>,
    spec: &KernelSpec,
) -> Result<LocalFit, BuildError> {
    let (km, k_si) = kernel_submatrix(ps, node, &candidates, spec)
        .map_err(|source| BuildError::Kernel { node, source })?;
    let problem =
        QPProblem::from_kernel(km, k_si).map_err(|source| BuildError::Solver { node, source })?;
    let sol = nnqp::solve(&problem).map_err(|source| BuildError::Solver { node, source })?;
    let mut support = Vec::new();
    let mut weights = Vec::new();
    for (slot, &cand) in candidates.iter().enumerate() {
        if sol.theta[slot] > 0.0 {
            support.push(cand);
            weights.push(sol.theta[slot]);
        }
    }
    sort_support(&mut support, &mut weights);
    Ok(LocalFit { node, candidates, support, weights, objective: sol.objective })
}

/// Greedy variants: atoms enter one at a time by largest residual
/// correlation, stopping as soon as the best marginal goes negative.
/// The candidate pool is the node's KNN set, matching the full solve.
pub fn build_nnk_greedy(
    ps: &PointSet,
    k: usize,
    spec: &KernelSpec,
    mode: GreedyMode,
) -> Result<SparseGraph, BuildError> {
    let nl = knn_search(ps, k)?;
    let n = ps.n();
    let fits = collect_fits(map_indexed(n, |i| greedy_fit(ps, i, nl.indices(i), spec, mode)))?;
    let edges = symmetrize_min_error(&fits);
    Ok(SparseGraph {
        n,
        k,
        builder: match mode {
            GreedyMode::Mp => BuilderTag::NnkMp,
            GreedyMode::Omp => BuilderTag::NnkOmp,
        },
        kernel: Some(*spec),
        zero_tol: DEFAULT_ZERO_TOL,
        edges,
        fits,
        dropped_degenerate: 0,
    })
}

fn greedy_fit(
    ps: &PointSet,
    node: usize,
    candidates: Vec<usize>,
    spec: &KernelSpec,
    mode: GreedyMode,
) -> Result<LocalFit, BuildError> {
    let (km, k_si) = kernel_submatrix(ps, node, &candidates, spec)
        .map_err(|source| BuildError::Kernel { node, source })?;
    let k_cc = km.values();
    let m = candidates.len();

    // first atom: largest similarity to the node, ties to lower index
    let first = (0..m).max_by(|&a, &b| k_si[a].total_cmp(&k_si[b]).then(b.cmp(&a))).unwrap();
    let mut selected = alloc::vec![first];
    let mut theta = alloc::vec![k_si[first]];

    for _step in 1..m {
        // marginal correlation of each remaining atom with the residual
        let mut best: Option<(usize, f64)> = None;
        for j in 0..m {
            if selected.contains(&j) {
                continue;
            }
            let corr: f64 = k_si[j]
                - selected.iter().zip(&theta).map(|(&s, &t)| k_cc.get(s, j) * t).sum::<f64>();
            if best.map_or(true, |(_, b)| corr > b) {
                best = Some((j, corr));
            }
        }
        let Some((j, corr)) = best else { break };
        if corr < 0.0 {
            break;
        }
        selected.push(j);
        match mode {
            GreedyMode::Mp => theta.push(k_si[j]),
            GreedyMode::Omp => {
                let sub = k_cc.principal_submatrix(&selected);
                let rhs: Vec<f64> = selected.iter().map(|&s| k_si[s]).collect();
                let problem =
                    QPProblem::new(sub, rhs).map_err(|source| BuildError::Solver { node, source })?;
                let sol =
                    nnqp::solve(&problem).map_err(|source| BuildError::Solver { node, source })?;
                theta = sol.theta;
            }
        }
    }

    let sub = k_cc.principal_submatrix(&selected);
    let rhs: Vec<f64> = selected.iter().map(|&s| k_si[s]).collect();
    let objective = nnqp::kernel_objective(&sub, &rhs, &theta);

    let mut support = Vec::new();
    let mut weights = Vec::new();
    for (slot, &sel) in selected.iter().enumerate() {
        if theta[slot] > DEFAULT_ZERO_TOL {
            support.push(candidates[sel]);
            weights.push(theta[slot]);
        }
    }
    sort_support(&mut support, &mut weights);
    Ok(LocalFit { node, candidates, support, weights, objective })
}

/// KNN baseline: every selected neighbor is kept with its kernel value
/// as the weight; symmetrization is by union.
pub fn build_knn(ps: &PointSet, k: usize, spec: &KernelSpec) -> Result<SparseGraph, BuildError> {
    let nl = knn_search(ps, k)?;
    let n = ps.n();
    let fits = collect_fits(map_indexed(n, |i| {
        let candidates = nl.indices(i);
        let (km, k_si) = kernel_submatrix(ps, i, &candidates, spec)
            .map_err(|source| BuildError::Kernel { node: i, source })?;
        // thresholding keeps everything; its objective is J at θ = K_Si
        let objective = nnqp::kernel_objective(km.values(), &k_si, &k_si);
        let mut support = candidates.clone();
        let mut weights = k_si;
        sort_support(&mut support, &mut weights);
        Ok(LocalFit { node: i, candidates, support, weights, objective })
    }))?;

    let mut merged: BTreeMap<(usize, usize), Edge> = BTreeMap::new();
    for fit in &fits {
        for (&j, &w) in fit.support.iter().zip(&fit.weights) {
            if w <= 0.0 {
                continue;
            }
            let key = (fit.node.min(j), fit.node.max(j));
            merged
                .entry(key)
                .or_insert(Edge { i: key.0, j: key.1, weight: w, source: fit.node });
        }
    }
    Ok(SparseGraph {
        n,
        k,
        builder: BuilderTag::Knn,
        kernel: Some(*spec),
        zero_tol: DEFAULT_ZERO_TOL,
        edges: merged.into_values().collect(),
        fits,
        dropped_degenerate: 0,
    })
}

/// Positive-weight locally-linear reconstruction in observation space,
/// optionally constrained to sum to one. Conflicts are resolved with
/// the squared reconstruction residual in place of J.
pub fn build_lle_positive(
    ps: &PointSet,
    k: usize,
    constraint: LleConstraint,
) -> Result<SparseGraph, BuildError> {
    let nl = knn_search(ps, k)?;
    let n = ps.n();
    let results = collect_fits(map_indexed(n, |i| lle_fit(ps, i, nl.indices(i), constraint)))?;
    let mut fits = Vec::with_capacity(n);
    let mut dropped_degenerate = 0;
    for (fit, dropped) in results {
        fits.push(fit);
        dropped_degenerate += dropped;
    }
    let edges = symmetrize_min_error(&fits);
    Ok(SparseGraph {
        n,
        k,
        builder: BuilderTag::LlePos,
        kernel: None,
        zero_tol: DEFAULT_ZERO_TOL,
        edges,
        fits,
        dropped_degenerate,
    })
}

fn lle_fit(
    ps: &PointSet,
    node: usize,
    candidates: Vec<usize>,
    constraint: LleConstraint,
) -> Result<(LocalFit, usize), BuildError> {
    // a neighbor sitting exactly on the center carries no direction
    // information; drop it rather than failing the whole build
    let usable: Vec<usize> =
        candidates.iter().copied().filter(|&j| ps.squared_distance(node, j) > 0.0).collect();
    let dropped = candidates.len() - usable.len();
    if usable.is_empty() {
        return Err(BuildError::InvalidInput(format!(
            "node {node}: every neighbor coincides with the point"
        )));
    }
    let m = usable.len();
    let d = ps.d();
    let xi = ps.point(node);

    let raw = match constraint {
        LleConstraint::Nonneg => {
            // min ‖x_i − X_S θ‖² over θ ≥ 0, via its normal equations
            let gram = SquareMat::from_fn(m, |a, b| {
                linalg::dot(ps.point(usable[a]), ps.point(usable[b]))
            });
            let rhs: Vec<f64> = usable.iter().map(|&j| linalg::dot(ps.point(j), xi)).collect();
            nnqp::solve_raw(&gram, &rhs, DEFAULT_ZERO_TOL, 0.0)
                .map_err(|source| BuildError::Solver { node, source })?
        }
        LleConstraint::NonnegSum1 => {
            // with weights on the simplex the residual is ‖Zθ‖² for
            // Z = X_S − x_i, so minimize θᵀ(ZᵀZ)θ on the simplex
            let z = |a: usize, coord: usize| ps.point(usable[a])[coord] - xi[coord];
            let m_mat = SquareMat::from_fn(m, |a, b| (0..d).map(|c| z(a, c) * z(b, c)).sum());
            nnqp::solve_simplex_qp(&m_mat, DEFAULT_ZERO_TOL)
                .map_err(|source| BuildError::Solver { node, source })?
        }
    };

    // squared reconstruction residual at the returned weights
    let mut residual = 0.0;
    for c in 0..d {
        let rec: f64 = usable.iter().zip(&raw.theta).map(|(&j, &t)| ps.point(j)[c] * t).sum();
        let diff = xi[c] - rec;
        residual += diff * diff;
    }

    let mut support = Vec::new();
    let mut weights = Vec::new();
    for (slot, &j) in usable.iter().enumerate() {
        if raw.theta[slot] > 0.0 {
            support.push(j);
            weights.push(raw.theta[slot]);
        }
    }
    sort_support(&mut support, &mut weights);
    Ok((LocalFit { node, candidates, support, weights, objective: residual }, dropped))
}

fn collect_fits<T>(results: Vec<Result<T, BuildError>>) -> Result<Vec<T>, BuildError> {
    results.into_iter().collect()
}

/// Resolves directed proposals into undirected edges: when both
/// endpoints propose, the one with the smaller objective wins (ties to
/// the lower index); a lone proposal is kept unchanged.
fn symmetrize_min_error(fits: &[LocalFit]) -> Vec<Edge> {
    #[derive(Default)]
    struct Pair {
        from_low: Option<f64>,
        from_high: Option<f64>,
    }
    let mut pairs: BTreeMap<(usize, usize), Pair> = BTreeMap::new();
    for fit in fits {
        for (&j, &w) in fit.support.iter().zip(&fit.weights) {
            debug_assert_ne!(fit.node, j);
            let key = (fit.node.min(j), fit.node.max(j));
            let entry = pairs.entry(key).or_default();
            if fit.node == key.0 {
                entry.from_low = Some(w);
            } else {
                entry.from_high = Some(w);
            }
        }
    }
    let mut edges = Vec::with_capacity(pairs.len());
    for ((i, j), pair) in pairs {
        let (weight, source) = match (pair.from_low, pair.from_high) {
            (Some(wl), Some(wh)) => {
                if fits[j].objective < fits[i].objective {
                    (wh, j)
                } else {
                    (wl, i)
                }
            }
            (Some(wl), None) => (wl, i),
            (None, Some(wh)) => (wh, j),
            (None, None) => unreachable!("pair recorded without a proposal"),
        };
        if weight > 0.0 {
            edges.push(Edge { i, j, weight, source });
        }
    }
    edges
}
