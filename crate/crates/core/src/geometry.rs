//! Geometric characterizations of the per-node solutions, as checkable
//! predicates over built graphs.
//!
//! For a node i and two candidates j, k, connectivity is governed by
//! the kernel ratio interval: both stay connected exactly when
//! K_jk < K_ij/K_ik < 1/K_jk. Applied along every retained edge of a
//! Gaussian-kernel fit this yields the plane test (a candidate whose
//! projection extends beyond a retained neighbor gets weight zero) and,
//! in aggregate, the polytope conditions on the full active set.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::PointSet;
use crate::graph::{build_lle_positive, BuildError, LleConstraint, LocalFit, SparseGraph};
use crate::kernel::{kernel_submatrix, KernelError, KernelSpec};
use crate::linalg::{self, SquareMat};
use crate::neighbors::knn_search;
use crate::nnqp::{self, NnqpError, QPProblem};

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    InvalidKernelValue(String),
    UnsupportedGraph(String),
    Kernel(KernelError),
    Solver(NnqpError),
    Build(BuildError),
}

impl core::fmt::Display for GeometryError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GeometryError::InvalidKernelValue(msg) => write!(f, "invalid kernel value: {msg}"),
            GeometryError::UnsupportedGraph(msg) => write!(f, "unsupported graph: {msg}"),
            GeometryError::Kernel(e) => write!(f, "{e}"),
            GeometryError::Solver(e) => write!(f, "{e}"),
            GeometryError::Build(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for GeometryError {}

impl From<KernelError> for GeometryError {
    fn from(e: KernelError) -> Self {
        GeometryError::Kernel(e)
    }
}

impl From<NnqpError> for GeometryError {
    fn from(e: NnqpError) -> Self {
        GeometryError::Solver(e)
    }
}

impl From<BuildError> for GeometryError {
    fn from(e: BuildError) -> Self {
        GeometryError::Build(e)
    }
}

/// Predicted connectivity of a two-candidate neighborhood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KriVerdict {
    /// K_ij / K_ik
    pub ratio: f64,
    /// K_jk, the lower interval end.
    pub lower: f64,
    /// 1 / K_jk, the upper interval end.
    pub upper: f64,
    /// θ_ij > 0 ⟺ K_jk < K_ij/K_ik
    pub connect_j: bool,
    /// θ_ik > 0 ⟺ K_ij/K_ik < 1/K_jk
    pub connect_k: bool,
}

/// Connectivity prediction from the three pairwise kernel values alone.
pub fn kri_predict(k_ij: f64, k_ik: f64, k_jk: f64) -> Result<KriVerdict, GeometryError> {
    for (name, v) in [("K_ij", k_ij), ("K_ik", k_ik), ("K_jk", k_jk)] {
        if !v.is_finite() || v <= 0.0 || v > 1.0 {
            return Err(GeometryError::InvalidKernelValue(format!("{name} = {v} outside (0, 1]")));
        }
    }
    if k_jk >= 1.0 {
        return Err(GeometryError::InvalidKernelValue(
            "K_jk = 1 means the two candidates coincide".into(),
        ));
    }
    let ratio = k_ij / k_ik;
    Ok(KriVerdict {
        ratio,
        lower: k_jk,
        upper: 1.0 / k_jk,
        connect_j: k_jk < ratio,
        connect_k: ratio < 1.0 / k_jk,
    })
}

/// One offending triple found by the plane check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneViolation {
    pub node: usize,
    /// Retained neighbor whose plane is crossed.
    pub edge_to: usize,
    /// Candidate beyond that plane which nevertheless kept weight.
    pub beyond: usize,
    pub weight: f64,
}

/// Verifies, for every node's fit in a Gaussian-kernel graph: once a
/// neighbor j is retained, any candidate k whose projection onto
/// x_j − x_i extends strictly beyond x_j carries zero weight in that
/// same fit. Returns the violations (expected empty).
///
/// The check runs on the directed per-node fits stored in the graph;
/// the symmetrized edge list may legitimately contain an edge (i, k)
/// contributed by k's own fit.
pub fn check_plane_property(
    g: &SparseGraph,
    ps: &PointSet,
    _sigma_sq: f64,
) -> Result<Vec<PlaneViolation>, GeometryError> {
    if !matches!(g.kernel, Some(KernelSpec::Gaussian { .. })) {
        return Err(GeometryError::UnsupportedGraph(
            "the plane property applies to Gaussian-kernel graphs".into(),
        ));
    }
    let mut violations = Vec::new();
    for fit in &g.fits {
        let i = fit.node;
        let xi = ps.point(i);
        for &j in &fit.support {
            let xj = ps.point(j);
            let a2: f64 = xj.iter().zip(xi).map(|(a, b)| (a - b) * (a - b)).sum();
            for &k in &fit.candidates {
                if k == j {
                    continue;
                }
                let xk = ps.point(k);
                let mut proj = 0.0;
                for c in 0..ps.d() {
                    proj += (xk[c] - xi[c]) * (xj[c] - xi[c]);
                }
                // strictly beyond the plane, with slack so boundary
                // configurations are never flagged
                if proj > a2 + 1e-8 * a2.max(1.0) {
                    if let Some(weight) = fit.weight_of(k) {
                        violations.push(PlaneViolation { node: i, edge_to: j, beyond: k, weight });
                    }
                }
            }
        }
    }
    Ok(violations)
}

/// Per-node optimality report for the retained/pruned split.
#[derive(Debug, Clone)]
pub struct PolytopeReport {
    pub node: usize,
    /// max over retained coordinates of |(K_ββ θ_β − K_βi)_p|
    pub stationarity_residual: f64,
    /// min over pruned candidates of K_βkᵀ θ_β − K_ik (≥ 0 at optimum)
    pub worst_pruned_margin: f64,
    pub pass: bool,
}

const POLYTOPE_TOL: f64 = 1e-8;

/// Checks the two optimality conditions of a fit against kernel values
/// over its full candidate set: retained coordinates satisfy the
/// stationarity system, pruned candidates satisfy the non-negative
/// margin.
pub fn check_polytope_conditions(
    fit: &LocalFit,
    k_cc: &SquareMat,
    k_ci: &[f64],
) -> PolytopeReport {
    let m = fit.candidates.len();
    assert_eq!(k_cc.n(), m);
    assert_eq!(k_ci.len(), m);
    let slot_of = |node: usize| fit.candidates.iter().position(|&c| c == node).unwrap();
    let support_slots: Vec<usize> = fit.support.iter().map(|&s| slot_of(s)).collect();

    let mut stationarity_residual = 0.0f64;
    let mut worst_pruned_margin = f64::INFINITY;
    for slot in 0..m {
        let combo: f64 = support_slots
            .iter()
            .zip(&fit.weights)
            .map(|(&s, &w)| k_cc.get(s, slot) * w)
            .sum();
        let margin = combo - k_ci[slot];
        if support_slots.contains(&slot) {
            stationarity_residual = stationarity_residual.max(crate::math::abs(margin));
        } else {
            worst_pruned_margin = worst_pruned_margin.min(margin);
        }
    }
    if worst_pruned_margin == f64::INFINITY {
        worst_pruned_margin = 0.0;
    }
    let pass = stationarity_residual <= POLYTOPE_TOL && worst_pruned_margin >= -POLYTOPE_TOL;
    PolytopeReport { node: fit.node, stationarity_residual, worst_pruned_margin, pass }
}

/// Runs the polytope check for every node of a kernel-built graph.
pub fn check_polytope_on_graph(
    g: &SparseGraph,
    ps: &PointSet,
) -> Result<Vec<PolytopeReport>, GeometryError> {
    let Some(spec) = g.kernel else {
        return Err(GeometryError::UnsupportedGraph(
            "polytope conditions need a kernel-built graph".into(),
        ));
    };
    let mut reports = Vec::with_capacity(g.fits.len());
    for fit in &g.fits {
        let (km, k_ci) = kernel_submatrix(ps, fit.node, &fit.candidates, &spec)?;
        reports.push(check_polytope_conditions(fit, km.values(), &k_ci));
    }
    Ok(reports)
}

/// Comparison of the cosine-kernel regression against the sum-to-one
/// observation-space regression, per node over shared KNN candidates.
#[derive(Debug, Clone, Copy)]
pub struct LleEquivalenceReport {
    pub nodes_checked: usize,
    /// Largest per-node symmetric difference between the two supports.
    pub max_support_diff: usize,
    /// Largest weight deviation on the common support.
    pub max_weight_dev: f64,
    /// Largest cross-certification residual (see
    /// [`check_lle_equivalence`]).
    pub max_cross_kkt: f64,
}

/// Solves both regressions at every node and reports how they relate.
///
/// The literal fields compare raw outputs. The cross-certification
/// field checks the exact reduction between the two problems: a
/// cosine-kernel solution normalized to unit mass must be optimal for
/// the direction-only simplex reconstruction, and a simplex solution
/// rescaled by 2/(1+residual²) must be optimal for the cosine-kernel
/// system. Raw weights agree only up to that rescaling plus the radial
/// normalization of the neighborhood, so `max_weight_dev` is a report,
/// not an invariant.
pub fn check_lle_equivalence(
    ps: &PointSet,
    k: usize,
) -> Result<LleEquivalenceReport, GeometryError> {
    let nl = knn_search(ps, k).map_err(BuildError::from)?;
    let lle = build_lle_positive(ps, k, LleConstraint::NonnegSum1)?;

    let mut report = LleEquivalenceReport {
        nodes_checked: ps.n(),
        max_support_diff: 0,
        max_weight_dev: 0.0,
        max_cross_kkt: 0.0,
    };

    for node in 0..ps.n() {
        let candidates = nl.indices(node);
        let m = candidates.len();

        // cosine-kernel fit
        let (km, k_si) = kernel_submatrix(ps, node, &candidates, &KernelSpec::CosineAtNode)?;
        let problem = QPProblem::from_kernel(km.clone(), k_si)?;
        let sol = nnqp::solve(&problem)?;
        let theta = &sol.theta;

        // direction-only Gram matrix of the same neighborhood
        let xi = ps.point(node);
        let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(m);
        for &c in &candidates {
            let mut z: Vec<f64> = ps.point(c).iter().zip(xi).map(|(a, b)| a - b).collect();
            let norm = linalg::norm2(&z);
            for v in &mut z {
                *v /= norm;
            }
            dirs.push(z);
        }
        let m_hat = SquareMat::from_fn(m, |a, b| linalg::dot(&dirs[a], &dirs[b]));

        // literal comparison against the observation-space fit
        let fit = &lle.fits[node];
        let lle_weight = |cand: usize| fit.weight_of(cand).unwrap_or(0.0);
        let mut diff = 0usize;
        let mut dev = 0.0f64;
        for (slot, &cand) in candidates.iter().enumerate() {
            let in_nnk = theta[slot] > 0.0;
            let in_lle = lle_weight(cand) > 0.0;
            if in_nnk != in_lle {
                diff += 1;
            } else if in_nnk {
                dev = dev.max(crate::math::abs(theta[slot] - lle_weight(cand)));
            }
        }
        report.max_support_diff = report.max_support_diff.max(diff);
        report.max_weight_dev = report.max_weight_dev.max(dev);

        // cross-certification, both directions
        let mass: f64 = theta.iter().sum();
        if mass > 0.0 {
            let w_from_theta: Vec<f64> = theta.iter().map(|t| t / mass).collect();
            report.max_cross_kkt =
                report.max_cross_kkt.max(simplex_kkt_residual(&m_hat, &w_from_theta));
        }

        let w_simplex = nnqp::solve_simplex_qp(&m_hat, problem.zero_tol)?.theta;
        let r = m_hat.quad_form(&w_simplex);
        let scale = 2.0 / (1.0 + r);
        let theta_from_w: Vec<f64> = w_simplex.iter().map(|w| scale * w).collect();
        report.max_cross_kkt =
            report.max_cross_kkt.max(cosine_kkt_residual(km.values(), &theta_from_w));
    }
    Ok(report)
}

/// KKT residual of `w` for  min wᵀMw  on the probability simplex:
/// stationarity on the support (against the multiplier wᵀMw) and
/// non-negative margins elsewhere.
fn simplex_kkt_residual(m: &SquareMat, w: &[f64]) -> f64 {
    let mw = m.mat_vec(w);
    let r = linalg::dot(&mw, w);
    let mut worst = 0.0f64;
    for (slot, &wi) in w.iter().enumerate() {
        if wi > 0.0 {
            worst = worst.max(crate::math::abs(mw[slot] - r));
        } else {
            worst = worst.max((r - mw[slot]).max(0.0));
        }
    }
    worst
}

/// KKT residual of θ for the cosine-kernel system K θ = 1 over θ ≥ 0.
fn cosine_kkt_residual(k: &SquareMat, theta: &[f64]) -> f64 {
    let kt = k.mat_vec(theta);
    let mut worst = 0.0f64;
    for (slot, &t) in theta.iter().enumerate() {
        if t > 0.0 {
            worst = worst.max(crate::math::abs(kt[slot] - 1.0));
        } else {
            worst = worst.max((1.0 - kt[slot]).max(0.0));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_nnk;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian(sigma_sq: f64) -> KernelSpec {
        KernelSpec::gaussian(sigma_sq).unwrap()
    }

    fn random_cloud(n: usize, d: usize, seed: u64) -> PointSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointSet::from_rows(
            &(0..n)
                .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn kri_examples() {
        // right-angle configuration: ratio 1 strictly inside (e^-1, e)
        let v = kri_predict((-0.5f64).exp(), (-0.5f64).exp(), (-1.0f64).exp()).unwrap();
        assert!(v.connect_j && v.connect_k);
        assert_relative_eq!(v.ratio, 1.0);

        // collinear 0, 1, 2 with sigma² = 1: ratio e^1.5 above upper e^0.5
        let v = kri_predict((-0.5f64).exp(), (-2.0f64).exp(), (-0.5f64).exp()).unwrap();
        assert_relative_eq!(v.ratio, (1.5f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(v.upper, (0.5f64).exp(), max_relative = 1e-12);
        assert!(v.connect_j);
        assert!(!v.connect_k);

        // nearly coincident candidates: only the closer one survives
        let v = kri_predict(0.9, 0.8, 0.9999999).unwrap();
        assert!(v.connect_j);
        assert!(!v.connect_k);
    }

    #[test]
    fn kri_rejects_bad_values() {
        assert!(kri_predict(0.0, 0.5, 0.5).is_err());
        assert!(kri_predict(0.5, 1.1, 0.5).is_err());
        assert!(kri_predict(0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn kri_interval_widens_as_candidates_separate() {
        let mut last_width = 0.0;
        for &kjk in &[0.9, 0.7, 0.5, 0.3, 0.1] {
            let v = kri_predict(0.6, 0.6, kjk).unwrap();
            let width = v.upper - v.lower;
            assert!(width > last_width, "interval must widen as K_jk falls");
            last_width = width;
        }
    }

    #[test]
    fn kri_matches_solver_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 300 {
            let p: Vec<Vec<f64>> =
                (0..3).map(|_| (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let sigma_sq = rng.gen_range(0.25..2.0);
            let kv = |a: &[f64], b: &[f64]| crate::kernel::eval_gaussian(a, b, sigma_sq).unwrap();
            let (kij, kik, kjk) = (kv(&p[0], &p[1]), kv(&p[0], &p[2]), kv(&p[1], &p[2]));
            if kjk >= 1.0 {
                continue;
            }
            let verdict = kri_predict(kij, kik, kjk).unwrap();
            // skip boundary configurations
            if (verdict.ratio - verdict.lower).abs() < 1e-9
                || (verdict.upper - verdict.ratio).abs() < 1e-9
            {
                continue;
            }
            let k_ss = SquareMat::from_fn(2, |a, b| if a == b { 1.0 } else { kjk });
            let problem = QPProblem::new(k_ss, vec![kij, kik]).unwrap();
            let sol = nnqp::solve(&problem).unwrap();
            assert_eq!(sol.theta[0] > 0.0, verdict.connect_j, "j prediction");
            assert_eq!(sol.theta[1] > 0.0, verdict.connect_k, "k prediction");
            checked += 1;
        }
    }

    #[test]
    fn plane_property_on_chain_and_boundary() {
        let ps = PointSet::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let g = build_nnk(&ps, 3, &gaussian(1.0)).unwrap();
        assert!(check_plane_property(&g, &ps, 1.0).unwrap().is_empty());

        // k exactly on the plane through j: never flagged
        let ps = PointSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let g = build_nnk(&ps, 2, &gaussian(1.0)).unwrap();
        assert!(check_plane_property(&g, &ps, 1.0).unwrap().is_empty());
    }

    #[test]
    fn plane_property_exact_for_two_candidate_fits() {
        // with two candidates the fit is governed by the pairwise
        // interval analysis, where the plane condition is exact
        for seed in 0..10 {
            let ps = random_cloud(60, 2, seed);
            for sigma_sq in [0.05, 0.4, 1.0] {
                let g = build_nnk(&ps, 2, &gaussian(sigma_sq)).unwrap();
                let v = check_plane_property(&g, &ps, sigma_sq).unwrap();
                assert!(v.is_empty(), "seed {seed}: {} violations, first {:?}", v.len(), v[0]);
            }
        }
    }

    #[test]
    fn plane_property_fails_for_larger_supports() {
        // known counterexample: with several atoms the stationarity
        // system couples candidates, and the optimum (certified by the
        // enumeration oracle) can keep a point slightly beyond a
        // retained neighbor's plane. The checker must surface these.
        let ps = random_cloud(60, 2, 0);
        let g = build_nnk(&ps, 8, &gaussian(0.4)).unwrap();
        let v = check_plane_property(&g, &ps, 0.4).unwrap();
        assert!(!v.is_empty(), "expected the known violations at this seed");
        assert!(v.iter().any(|viol| viol.node == 0 && viol.edge_to == 7 && viol.beyond == 14));
        // every flagged fit is still a true optimum
        for viol in &v {
            let fit = &g.fits[viol.node];
            let (km, k_si) =
                kernel_submatrix(&ps, viol.node, &fit.candidates, &gaussian(0.4)).unwrap();
            let problem = QPProblem::from_kernel(km, k_si).unwrap();
            let reference = nnqp::solve_by_enumeration(&problem).unwrap();
            let mut enum_support: Vec<usize> =
                reference.support().iter().map(|&s| fit.candidates[s]).collect();
            enum_support.sort_unstable();
            assert_eq!(enum_support, fit.support, "node {}", viol.node);
        }
    }

    #[test]
    fn plane_check_rejects_non_gaussian_graphs() {
        let ps = random_cloud(20, 2, 3);
        let g = build_lle_positive(&ps, 3, LleConstraint::NonnegSum1).unwrap();
        assert!(check_plane_property(&g, &ps, 1.0).is_err());
    }

    #[test]
    fn polytope_singleton_scalar_condition() {
        // support {j}: every pruned k must satisfy K_jk θ_j ≥ K_ik
        let ps = PointSet::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let g = build_nnk(&ps, 2, &gaussian(1.0)).unwrap();
        let fit = &g.fits[0];
        assert_eq!(fit.support, vec![1]);
        let (km, k_ci) = kernel_submatrix(&ps, 0, &fit.candidates, &gaussian(1.0)).unwrap();
        let report = check_polytope_conditions(fit, km.values(), &k_ci);
        assert!(report.pass);
        assert!(report.worst_pruned_margin >= 0.0);
    }

    #[test]
    fn polytope_square_with_center() {
        // the four corners survive; a fifth point behind one corner is
        // pruned
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
            vec![2.0, 2.0],
        ];
        let ps = PointSet::from_rows(&rows).unwrap();
        let g = build_nnk(&ps, 5, &gaussian(1.0)).unwrap();
        assert_eq!(g.fits[0].support, vec![1, 2, 3, 4]);

        // enumeration agrees on the center's partition
        let (km, k_si) = kernel_submatrix(&ps, 0, &g.fits[0].candidates, &gaussian(1.0)).unwrap();
        let problem = QPProblem::from_kernel(km, k_si).unwrap();
        let by_enum = nnqp::solve_by_enumeration(&problem).unwrap();
        let mut enum_support: Vec<usize> =
            by_enum.support().iter().map(|&s| g.fits[0].candidates[s]).collect();
        enum_support.sort_unstable();
        assert_eq!(enum_support, vec![1, 2, 3, 4]);

        for report in check_polytope_on_graph(&g, &ps).unwrap() {
            assert!(report.pass, "node {} fails: {report:?}", report.node);
        }
    }

    #[test]
    fn polytope_passes_on_random_clouds() {
        for seed in 20..25 {
            let ps = random_cloud(80, 3, seed);
            let g = build_nnk(&ps, 8, &gaussian(0.5)).unwrap();
            for report in check_polytope_on_graph(&g, &ps).unwrap() {
                assert!(report.pass, "seed {seed} node {} fails: {report:?}", report.node);
            }
        }
    }

    #[test]
    fn lle_equivalence_extreme_point_collapses_to_nearest() {
        // center 0 with neighbors all on one side: both regressions
        // put everything on the nearest neighbor
        let ps = PointSet::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let report = check_lle_equivalence(&ps, 3).unwrap();
        assert!(report.max_cross_kkt < 1e-8, "cross kkt {}", report.max_cross_kkt);

        let lle = build_lle_positive(&ps, 3, LleConstraint::NonnegSum1).unwrap();
        assert_eq!(lle.fits[0].support, vec![1]);
        assert_relative_eq!(lle.fits[0].weights[0], 1.0, epsilon = 1e-9);

        let nl = knn_search(&ps, 3).unwrap();
        let (km, k_si) =
            kernel_submatrix(&ps, 0, &nl.indices(0), &KernelSpec::CosineAtNode).unwrap();
        let sol = nnqp::solve(&QPProblem::from_kernel(km, k_si).unwrap()).unwrap();
        // at an extreme point the rescaling factor is exactly 1, so
        // the weights agree without normalization
        assert_eq!(sol.support(), vec![0]);
        assert_relative_eq!(sol.theta[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn lle_equivalence_midpoint_shows_the_scale_gap() {
        // center at the midpoint: the simplex solution is (1/2, 1/2)
        // while the cosine-kernel weights are (1, 1) (the residual of
        // the direction-only reconstruction is 0, so the rescaling is
        // 2). The supports still match and both cross-certify.
        let ps = PointSet::from_rows(&[vec![0.0], vec![-1.0], vec![1.0]]).unwrap();
        let nl = knn_search(&ps, 2).unwrap();
        let (km, k_si) =
            kernel_submatrix(&ps, 0, &nl.indices(0), &KernelSpec::CosineAtNode).unwrap();
        let sol = nnqp::solve(&QPProblem::from_kernel(km, k_si).unwrap()).unwrap();
        assert_eq!(sol.support().len(), 2);
        assert_relative_eq!(sol.theta[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.theta[1], 1.0, epsilon = 1e-9);

        let report = check_lle_equivalence(&ps, 2).unwrap();
        assert_eq!(report.max_support_diff, 0);
        assert_relative_eq!(report.max_weight_dev, 0.5, epsilon = 1e-6);
        assert!(report.max_cross_kkt < 1e-8);
    }

    #[test]
    fn lle_equivalence_cross_certifies_on_random_sets() {
        for seed in 40..45 {
            let ps = random_cloud(40, 3, seed);
            let report = check_lle_equivalence(&ps, 5).unwrap();
            assert!(
                report.max_cross_kkt < 1e-5,
                "seed {seed}: cross kkt {}",
                report.max_cross_kkt
            );
        }
    }
}
