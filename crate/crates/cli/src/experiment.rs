//! Timed graph builds, density sweeps, and the semi-supervised
//! label-propagation experiment.
//!
//! Label reveals are derived only from (seed, fraction, trial), so
//! every builder and Laplacian variant is scored against identical
//! revealed label sets.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use nnk_core::dataset::PointSet;
use nnk_core::graph::{
    build_knn, build_lle_positive, build_nnk, build_nnk_greedy, edge_density, BuilderTag,
    GreedyMode, LleConstraint, SparseGraph,
};
use nnk_core::kernel::{bandwidth_from_neighbors, KernelSpec};
use nnk_core::spectral::{misclassification, propagate_labels, stratified_reveal, LaplacianKind};

use crate::error::CliError;

/// Edge-count threshold used in density reporting.
pub const DENSITY_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaChoice {
    /// Bandwidth from the K-th-neighbor rule at the build's K.
    Auto,
    Fixed(f64),
}

pub fn resolve_sigma(ps: &PointSet, k: usize, sigma: SigmaChoice) -> Result<f64, CliError> {
    match sigma {
        SigmaChoice::Fixed(v) => {
            if !v.is_finite() || v <= 0.0 {
                return Err(CliError::config(format!("sigma_sq must be positive, got {v}")));
            }
            Ok(v)
        }
        SigmaChoice::Auto => Ok(bandwidth_from_neighbors(ps, k)?),
    }
}

/// Dispatches to the right builder for a tag.
pub fn build_graph(
    ps: &PointSet,
    tag: BuilderTag,
    k: usize,
    sigma: SigmaChoice,
    lle_constraint: LleConstraint,
) -> Result<SparseGraph, CliError> {
    let graph = match tag {
        BuilderTag::LlePos => build_lle_positive(ps, k, lle_constraint)?,
        _ => {
            let spec = KernelSpec::gaussian(resolve_sigma(ps, k, sigma)?)
                .map_err(|e| CliError::config(e.to_string()))?;
            match tag {
                BuilderTag::Nnk => build_nnk(ps, k, &spec)?,
                BuilderTag::NnkMp => build_nnk_greedy(ps, k, &spec, GreedyMode::Mp)?,
                BuilderTag::NnkOmp => build_nnk_greedy(ps, k, &spec, GreedyMode::Omp)?,
                BuilderTag::Knn => build_knn(ps, k, &spec)?,
                BuilderTag::LlePos => unreachable!(),
            }
        }
    };
    Ok(graph)
}

#[derive(Debug, Clone)]
pub struct DensityRow {
    pub builder: BuilderTag,
    pub k: usize,
    pub density: f64,
    pub seconds: f64,
}

/// Builds every (builder, K) combination and reports edge density and
/// wall-clock build time.
pub fn density_sweep(
    ps: &PointSet,
    builders: &[BuilderTag],
    ks: &[usize],
    sigma: SigmaChoice,
    threshold: f64,
    lle_constraint: LleConstraint,
) -> Result<Vec<DensityRow>, CliError> {
    let mut rows = Vec::with_capacity(builders.len() * ks.len());
    for &k in ks {
        for &builder in builders {
            let start = Instant::now();
            let g = build_graph(ps, builder, k, sigma, lle_constraint)?;
            let seconds = start.elapsed().as_secs_f64();
            rows.push(DensityRow { builder, k, density: edge_density(&g, threshold), seconds });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialId {
    Trial(usize),
    Mean,
    Std,
}

impl std::fmt::Display for TrialId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrialId::Trial(t) => write!(f, "{t}"),
            TrialId::Mean => write!(f, "mean"),
            TrialId::Std => write!(f, "std"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SslRow {
    pub builder: BuilderTag,
    pub laplacian: LaplacianKind,
    pub k: usize,
    pub fraction: f64,
    pub trial: TrialId,
    pub misclassification: f64,
    pub build_seconds: f64,
    pub edge_density: f64,
}

#[derive(Debug, Clone)]
pub struct SslConfig {
    pub builders: Vec<BuilderTag>,
    pub k: usize,
    pub fractions: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub kinds: Vec<LaplacianKind>,
    pub sigma: SigmaChoice,
    pub lle_constraint: LleConstraint,
}

/// Runs the label-propagation experiment: each builder's graph is
/// built once (timed), then every (Laplacian, fraction, trial) cell is
/// scored on shared stratified reveals. Returns one row per trial plus
/// mean and std aggregate rows per cell.
pub fn ssl_experiment(ps: &PointSet, cfg: &SslConfig) -> Result<Vec<SslRow>, CliError> {
    let truth = ps
        .labels()
        .ok_or_else(|| CliError::data("the SSL experiment needs a labeled dataset"))?;
    if cfg.trials == 0 || cfg.fractions.is_empty() || cfg.builders.is_empty() {
        return Err(CliError::config("need at least one builder, fraction, and trial"));
    }
    for &f in &cfg.fractions {
        if !(0.0..=1.0).contains(&f) {
            return Err(CliError::config(format!("label fraction {f} outside [0, 1]")));
        }
    }

    // reveal seeds depend only on (fraction index, trial)
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let reveal_seeds: Vec<Vec<u64>> = cfg
        .fractions
        .iter()
        .map(|_| (0..cfg.trials).map(|_| master.gen()).collect())
        .collect();
    let reveals: Vec<Vec<Vec<i32>>> = cfg
        .fractions
        .iter()
        .enumerate()
        .map(|(fi, &fraction)| {
            (0..cfg.trials)
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(reveal_seeds[fi][t]);
                    stratified_reveal(truth, fraction, &mut rng)
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::new();
    for &builder in &cfg.builders {
        let start = Instant::now();
        let g = build_graph(ps, builder, cfg.k, cfg.sigma, cfg.lle_constraint)?;
        let build_seconds = start.elapsed().as_secs_f64();
        let density = edge_density(&g, DENSITY_THRESHOLD);

        for &kind in &cfg.kinds {
            for (fi, &fraction) in cfg.fractions.iter().enumerate() {
                let rates: Result<Vec<f64>, CliError> = (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| {
                        let revealed = &reveals[fi][t];
                        let field = propagate_labels(&g, revealed, kind)?;
                        Ok(misclassification(&field, truth, revealed))
                    })
                    .collect();
                let rates = rates?;
                let mean = rates.iter().sum::<f64>() / rates.len() as f64;
                let var =
                    rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / rates.len() as f64;
                for (t, &rate) in rates.iter().enumerate() {
                    rows.push(SslRow {
                        builder,
                        laplacian: kind,
                        k: cfg.k,
                        fraction,
                        trial: TrialId::Trial(t),
                        misclassification: rate,
                        build_seconds,
                        edge_density: density,
                    });
                }
                for (trial, value) in [(TrialId::Mean, mean), (TrialId::Std, var.sqrt())] {
                    rows.push(SslRow {
                        builder,
                        laplacian: kind,
                        k: cfg.k,
                        fraction,
                        trial,
                        misclassification: value,
                        build_seconds,
                        edge_density: density,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Mean misclassification pulled back out of a result table.
pub fn mean_rate(rows: &[SslRow], builder: BuilderTag, kind: LaplacianKind, fraction: f64) -> f64 {
    rows.iter()
        .find(|r| {
            r.builder == builder
                && r.laplacian == kind
                && r.trial == TrialId::Mean
                && (r.fraction - fraction).abs() < 1e-12
        })
        .map(|r| r.misclassification)
        .expect("aggregate row present")
}
