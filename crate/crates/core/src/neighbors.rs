//! Exact K-nearest-neighbor search over a point set.
//!
//! Brute force on purpose: desk-scale inputs make the O(N²d) cost
//! irrelevant and exactness keeps every downstream property test
//! deterministic. Ties are broken by lower index.

use alloc::vec::Vec;

use crate::dataset::PointSet;
use crate::map_indexed;
use crate::math;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NeighborsError {
    /// K must satisfy 1 <= K < N.
    InvalidK { k: usize, n: usize },
}

impl core::fmt::Display for NeighborsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            NeighborsError::InvalidK { k, n } => {
                write!(f, "invalid neighbor count k={k} for {n} points (need 1 <= k < n)")
            }
        }
    }
}

impl core::error::Error for NeighborsError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist: f64,
}

/// Per-node lists of the K nearest other nodes, ascending by
/// (distance, index).
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    k: usize,
    lists: Vec<Vec<Neighbor>>,
}

impl NeighborList {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn neighbors(&self, node: usize) -> &[Neighbor] {
        &self.lists[node]
    }

    pub fn indices(&self, node: usize) -> Vec<usize> {
        self.lists[node].iter().map(|nb| nb.index).collect()
    }

    /// Distance to the K-th (farthest listed) neighbor.
    pub fn kth_distance(&self, node: usize) -> f64 {
        self.lists[node][self.k - 1].dist
    }
}

/// For each node, the K nearest other nodes by Euclidean distance.
pub fn knn_search(ps: &PointSet, k: usize) -> Result<NeighborList, NeighborsError> {
    let n = ps.n();
    if k == 0 || k >= n {
        return Err(NeighborsError::InvalidK { k, n });
    }
    let lists = map_indexed(n, |i| {
        let mut cand: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (ps.squared_distance(i, j), j))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        cand.select_nth_unstable_by(k - 1, cmp);
        cand.truncate(k);
        cand.sort_unstable_by(cmp);
        cand.into_iter()
            .map(|(d2, j)| Neighbor { index: j, dist: math::sqrt(d2) })
            .collect()
    });
    Ok(NeighborList { k, lists })
}
