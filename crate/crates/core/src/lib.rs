//! Sparse similarity-graph construction from point-cloud data.
//!
//! The central construction is non-negative kernel regression (NNK): each
//! node solves a small non-negative quadratic program over its nearest
//! neighbors in kernel space, and the surviving coefficients become edge
//! weights. Compared to plain KNN thresholding, the per-node optimization
//! prunes neighbors that are redundant given closer ones, so the graph
//! adapts its sparsity to the local geometry of the data.
//!
//! Module map:
//!
//! - [`dataset`]: point-set container, CSV/IDX parsing, synthetic data
//! - [`kernel`]: Gaussian and node-anchored cosine kernels
//! - [`neighbors`]: exact brute-force K-nearest-neighbor search
//! - [`nnqp`]: the non-negative QP solver and its enumeration oracle
//! - [`graph`]: whole-graph builders (NNK, NNK-MP/OMP, KNN, positive LLE)
//! - [`geometry`]: checkable geometric properties of NNK solutions
//! - [`spectral`]: graph Laplacians and harmonic label propagation
//!
//! The crate is `no_std`-compatible (with `alloc`) when built with
//! `--no-default-features --features libm`. File IO, the CLI, and the
//! experiment harness live in the companion `nnk-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("nnk-core requires either the `std` feature or the `libm` feature");

pub mod dataset;
pub mod geometry;
pub mod graph;
pub mod kernel;
pub mod linalg;
mod math;
pub mod neighbors;
pub mod nnqp;
pub mod spectral;

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
/// Output order is by index either way, so builds stay deterministic.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> alloc::vec::Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
    T: Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
