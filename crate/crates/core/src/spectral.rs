//! Graph Laplacians and harmonic label propagation.
//!
//! Propagation solves the Dirichlet problem per class: scores on the
//! labeled nodes are clamped to one-hot indicators and the unlabeled
//! block satisfies the homogeneous Laplacian equation. Unlabeled nodes
//! with no path to any labeled node are flagged and get zero scores
//! instead of entering a singular system.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::graph::SparseGraph;
use crate::linalg::{self, SquareMat};
use crate::math;

/// Systems up to this size are solved densely (one factorization,
/// one back-solve per class); larger ones go through conjugate
/// gradient at tolerance 1e-8.
const DENSE_LIMIT: usize = 2000;
const CG_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralError {
    /// No node carries a label.
    NoLabels,
    InvalidInput(String),
    /// The reduced system could not be solved to tolerance.
    SolveFailed(String),
}

impl core::fmt::Display for SpectralError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SpectralError::NoLabels => write!(f, "no labeled nodes"),
            SpectralError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            SpectralError::SolveFailed(msg) => write!(f, "solve failed: {msg}"),
        }
    }
}

impl core::error::Error for SpectralError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LaplacianKind {
    /// L = D − W
    Combinatorial,
    /// I − D^{-1/2} W D^{-1/2}, with zero rows for isolated nodes.
    SymNormalized,
}

impl LaplacianKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LaplacianKind::Combinatorial => "combinatorial",
            LaplacianKind::SymNormalized => "sym_normalized",
        }
    }
}

/// Symmetric sparse matrix stored as adjacency-style rows.
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseSymMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        self.rows.iter().map(|row| row.iter().map(|&(j, v)| v * x[j]).sum()).collect()
    }

    pub fn to_dense(&self) -> SquareMat {
        let mut m = SquareMat::zeros(self.n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m.set(i, j, v);
            }
        }
        m
    }
}

fn degrees(g: &SparseGraph) -> Vec<f64> {
    let mut d = vec![0.0; g.n];
    for e in &g.edges {
        d[e.i] += e.weight;
        d[e.j] += e.weight;
    }
    d
}

/// Laplacian of the graph in the requested normalization.
pub fn laplacian(g: &SparseGraph, kind: LaplacianKind) -> SparseSymMatrix {
    let deg = degrees(g);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); g.n];
    match kind {
        LaplacianKind::Combinatorial => {
            for (i, row) in rows.iter_mut().enumerate() {
                row.push((i, deg[i]));
            }
            for e in &g.edges {
                rows[e.i].push((e.j, -e.weight));
                rows[e.j].push((e.i, -e.weight));
            }
        }
        LaplacianKind::SymNormalized => {
            for (i, row) in rows.iter_mut().enumerate() {
                if deg[i] > 0.0 {
                    row.push((i, 1.0));
                }
            }
            for e in &g.edges {
                let v = -e.weight / math::sqrt(deg[e.i] * deg[e.j]);
                rows[e.i].push((e.j, v));
                rows[e.j].push((e.i, v));
            }
        }
    }
    SparseSymMatrix { n: g.n, rows }
}

/// Class scores after propagation.
#[derive(Debug, Clone)]
pub struct LabelField {
    pub n: usize,
    pub n_classes: usize,
    /// Row-major n x n_classes score matrix.
    pub scores: Vec<f64>,
    /// Per node: its given label, the argmax class, or -1 when flagged.
    pub decided: Vec<i32>,
    /// Unlabeled nodes unreachable from every labeled node.
    pub flagged: Vec<bool>,
}

impl LabelField {
    pub fn score(&self, node: usize, class: usize) -> f64 {
        self.scores[node * self.n_classes + class]
    }
}

/// Harmonic propagation of partial labels (-1 = unlabeled) over the
/// graph, per class, under the chosen Laplacian.
pub fn propagate_labels(
    g: &SparseGraph,
    labels: &[i32],
    kind: LaplacianKind,
) -> Result<LabelField, SpectralError> {
    let n = g.n;
    if labels.len() != n {
        return Err(SpectralError::InvalidInput(format!(
            "{} labels for {} nodes",
            labels.len(),
            n
        )));
    }
    let labeled: Vec<usize> = (0..n).filter(|&i| labels[i] >= 0).collect();
    if labeled.is_empty() {
        return Err(SpectralError::NoLabels);
    }
    let n_classes = (labels.iter().copied().max().unwrap() + 1) as usize;
    let adj = g.adjacency();
    let deg = degrees(g);

    // nodes with a path to some labeled node
    let mut reached = vec![false; n];
    let mut queue: VecDeque<usize> = labeled.iter().copied().collect();
    for &l in &labeled {
        reached[l] = true;
    }
    while let Some(i) = queue.pop_front() {
        for &(j, _) in &adj[i] {
            if !reached[j] {
                reached[j] = true;
                queue.push_back(j);
            }
        }
    }

    let unknown: Vec<usize> = (0..n).filter(|&i| labels[i] < 0 && reached[i]).collect();
    let flagged: Vec<bool> = (0..n).map(|i| labels[i] < 0 && !reached[i]).collect();
    let n_u = unknown.len();
    let mut slot_of = vec![usize::MAX; n];
    for (slot, &u) in unknown.iter().enumerate() {
        slot_of[u] = slot;
    }

    // edge coupling entering both the reduced matrix and the boundary
    // right-hand side
    let coupling = |a: usize, b: usize, w: f64| -> f64 {
        match kind {
            LaplacianKind::Combinatorial => w,
            LaplacianKind::SymNormalized => w / math::sqrt(deg[a] * deg[b]),
        }
    };
    let mut rhs = vec![vec![0.0f64; n_u]; n_classes];
    for (slot, &u) in unknown.iter().enumerate() {
        for &(j, w) in &adj[u] {
            if labels[j] >= 0 {
                rhs[labels[j] as usize][slot] += coupling(u, j, w);
            }
        }
    }

    let solutions = if n_u == 0 {
        vec![Vec::new(); n_classes]
    } else if n_u <= DENSE_LIMIT {
        let mut a = SquareMat::zeros(n_u);
        for (slot, &u) in unknown.iter().enumerate() {
            let diag = match kind {
                LaplacianKind::Combinatorial => deg[u],
                LaplacianKind::SymNormalized => 1.0,
            };
            a.set(slot, slot, diag);
            for &(j, w) in &adj[u] {
                if slot_of[j] != usize::MAX {
                    a.set(slot, slot_of[j], -coupling(u, j, w));
                }
            }
        }
        let factor = linalg::factor_spd_ridge(&a, &[0.0, 1e-12, 1e-10])
            .ok_or_else(|| SpectralError::SolveFailed("reduced system not SPD".into()))?;
        rhs.iter().map(|b| factor.solve(b)).collect()
    } else {
        let matvec = |x: &[f64]| -> Vec<f64> {
            unknown
                .iter()
                .enumerate()
                .map(|(slot, &u)| {
                    let diag = match kind {
                        LaplacianKind::Combinatorial => deg[u],
                        LaplacianKind::SymNormalized => 1.0,
                    };
                    let mut acc = diag * x[slot];
                    for &(j, w) in &adj[u] {
                        if slot_of[j] != usize::MAX {
                            acc -= coupling(u, j, w) * x[slot_of[j]];
                        }
                    }
                    acc
                })
                .collect()
        };
        let mut out = Vec::with_capacity(n_classes);
        for b in &rhs {
            let (x, ok) = linalg::conjugate_gradient(&matvec, b, CG_TOL, 20 * n_u);
            if !ok {
                return Err(SpectralError::SolveFailed(
                    "conjugate gradient did not converge".into(),
                ));
            }
            out.push(x);
        }
        out
    };

    let mut scores = vec![0.0f64; n * n_classes];
    for &l in &labeled {
        scores[l * n_classes + labels[l] as usize] = 1.0;
    }
    for (slot, &u) in unknown.iter().enumerate() {
        for (c, sol) in solutions.iter().enumerate() {
            scores[u * n_classes + c] = sol[slot];
        }
    }

    let decided: Vec<i32> = (0..n)
        .map(|i| {
            if labels[i] >= 0 {
                labels[i]
            } else if flagged[i] {
                -1
            } else {
                let row = &scores[i * n_classes..(i + 1) * n_classes];
                let mut best = 0usize;
                for (c, v) in row.iter().enumerate().skip(1) {
                    if *v > row[best] {
                        best = c;
                    }
                }
                best as i32
            }
        })
        .collect();

    Ok(LabelField { n, n_classes, scores, decided, flagged })
}

/// Reveals a stratified fraction of the labels: every class
/// contributes at least one and otherwise round(fraction * size)
/// members, chosen uniformly. Unrevealed entries are -1.
pub fn stratified_reveal<R: Rng>(labels: &[i32], fraction: f64, rng: &mut R) -> Vec<i32> {
    let mut out = vec![-1i32; labels.len()];
    let mut classes: Vec<i32> = labels.iter().copied().filter(|&l| l >= 0).collect();
    classes.sort_unstable();
    classes.dedup();
    for cls in classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == cls).collect();
        let want =
            (math::round(fraction * members.len() as f64) as usize).clamp(1, members.len());
        for slot in 0..want {
            let pick = rng.gen_range(slot..members.len());
            members.swap(slot, pick);
            out[members[slot]] = cls;
        }
    }
    out
}

/// Fraction of evaluable nodes (unrevealed, labeled in truth, not
/// flagged) whose decided class differs from the truth.
pub fn misclassification(field: &LabelField, truth: &[i32], revealed: &[i32]) -> f64 {
    let mut wrong = 0usize;
    let mut total = 0usize;
    for i in 0..truth.len() {
        if revealed[i] >= 0 || truth[i] < 0 || field.flagged[i] {
            continue;
        }
        total += 1;
        if field.decided[i] != truth[i] {
            wrong += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        wrong as f64 / total as f64
    }
}
