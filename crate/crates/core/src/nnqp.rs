//! Per-node non-negative quadratic program
//!
//!   minimize  ½ θᵀ K_SS θ − K_Siᵀ θ   subject to  θ ≥ 0,
//!
//! solved with a Lawson-Hanson style active-set method applied to the
//! quadratic form directly. Termination satisfies the KKT system
//! exactly: stationarity on the passive set, non-negative duals on the
//! active set, complementary slackness by construction.
//!
//! [`solve_by_enumeration`] brute-forces every active/passive partition
//! through an unrelated elimination routine; it exists so the solver
//! can be checked against something that cannot share its bugs.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::kernel::KernelMatrix;
use crate::linalg::{self, SquareMat, RIDGE_SCHEDULE};
use crate::math;

/// Weights below this threshold are truncated to exactly zero, which
/// pins down what "support" means for connectivity tests and edge
/// counts.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// Largest problem the enumeration oracle accepts (2^n partitions).
pub const ENUMERATION_MAX: usize = 12;

/// Duals may not enter the passive set below this threshold; it also
/// bounds how negative an active-set dual may be at termination.
const DUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum NnqpError {
    /// The passive block stayed numerically singular through the whole
    /// ridge schedule.
    SingularSystem(String),
    /// Enumeration was asked for a problem larger than [`ENUMERATION_MAX`].
    SizeLimit { size: usize, max: usize },
    InvalidProblem(String),
}

impl core::fmt::Display for NnqpError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            NnqpError::SingularSystem(msg) => write!(f, "singular system: {msg}"),
            NnqpError::SizeLimit { size, max } => {
                write!(f, "problem size {size} exceeds enumeration limit {max}")
            }
            NnqpError::InvalidProblem(msg) => write!(f, "invalid problem: {msg}"),
        }
    }
}

impl core::error::Error for NnqpError {}

/// One node's regression problem in kernel space.
#[derive(Debug, Clone)]
pub struct QPProblem {
    pub k_ss: SquareMat,
    pub k_si: Vec<f64>,
    pub zero_tol: f64,
    pub ridge: f64,
}

impl QPProblem {
    /// Validates the kernel-problem invariants: symmetric K_SS with
    /// unit diagonal and K_Si entries in [0, 1].
    pub fn new(k_ss: SquareMat, k_si: Vec<f64>) -> Result<Self, NnqpError> {
        if k_ss.n() != k_si.len() {
            return Err(NnqpError::InvalidProblem(format!(
                "K_SS is {0}x{0} but K_Si has {1} entries",
                k_ss.n(),
                k_si.len()
            )));
        }
        if k_ss.max_asymmetry() > 1e-12 {
            return Err(NnqpError::InvalidProblem("K_SS not symmetric".into()));
        }
        for i in 0..k_ss.n() {
            if k_ss.get(i, i) != 1.0 {
                return Err(NnqpError::InvalidProblem(format!(
                    "K_SS diagonal entry {i} is {}, expected 1",
                    k_ss.get(i, i)
                )));
            }
        }
        if !k_si.iter().all(|v| (0.0..=1.0).contains(v)) {
            return Err(NnqpError::InvalidProblem("K_Si entries must lie in [0, 1]".into()));
        }
        Ok(QPProblem { k_ss, k_si, zero_tol: DEFAULT_ZERO_TOL, ridge: 0.0 })
    }

    pub fn from_kernel(k: KernelMatrix, k_si: Vec<f64>) -> Result<Self, NnqpError> {
        let (values, _) = (k.values().clone(), k.spec());
        QPProblem::new(values, k_si)
    }

    pub fn size(&self) -> usize {
        self.k_si.len()
    }
}

/// A solved problem together with its optimality certificates.
#[derive(Debug, Clone)]
pub struct QPSolution {
    /// Non-negative weights; entries below `zero_tol` are exactly 0.
    pub theta: Vec<f64>,
    /// ½ θᵀ K_SS θ − K_Siᵀ θ + ½ (the residual energy, since K_ii = 1).
    pub objective: f64,
    /// λ = K_SS θ − K_Si.
    pub dual: Vec<f64>,
    /// Indices where θ = 0.
    pub active_set: Vec<usize>,
    /// Diagonal regularization the block solves ended up needing.
    pub ridge_used: f64,
    /// False when the swap cap was hit; θ is then the best iterate.
    pub converged: bool,
    pub iterations: usize,
}

impl QPSolution {
    pub fn support(&self) -> Vec<usize> {
        (0..self.theta.len()).filter(|&i| self.theta[i] > 0.0).collect()
    }
}

/// KKT residuals of a candidate solution, all of which should be ~0.
#[derive(Debug, Clone, Copy)]
pub struct KktResiduals {
    /// ‖K_SS θ − K_Si − λ‖_∞
    pub stationarity: f64,
    /// |λᵀ θ|
    pub complementarity: f64,
    /// max(0, −min λ)
    pub dual_negativity: f64,
}

impl KktResiduals {
    pub fn of(p: &QPProblem, s: &QPSolution) -> Self {
        let kt = p.k_ss.mat_vec(&s.theta);
        let mut stationarity = 0.0f64;
        for i in 0..p.size() {
            stationarity = stationarity.max(math::abs(kt[i] - p.k_si[i] - s.dual[i]));
        }
        let complementarity = math::abs(linalg::dot(&s.dual, &s.theta));
        let dual_negativity = s.dual.iter().fold(0.0f64, |m, &l| m.max(-l));
        KktResiduals { stationarity, complementarity, dual_negativity }
    }

    pub fn max(&self) -> f64 {
        self.stationarity.max(self.complementarity).max(self.dual_negativity)
    }
}

/// Objective value ½ θᵀ K_SS θ − K_Siᵀ θ + ½ at an arbitrary feasible θ.
pub fn kernel_objective(k_ss: &SquareMat, k_si: &[f64], theta: &[f64]) -> f64 {
    0.5 * k_ss.quad_form(theta) - linalg::dot(k_si, theta) + 0.5
}

/// Solves the non-negative QP.
pub fn solve(p: &QPProblem) -> Result<QPSolution, NnqpError> {
    let raw = solve_raw(&p.k_ss, &p.k_si, p.zero_tol, p.ridge)?;
    Ok(finish(p, raw))
}

fn finish(p: &QPProblem, raw: RawSolution) -> QPSolution {
    let theta = raw.theta;
    let dual: Vec<f64> = {
        let kt = p.k_ss.mat_vec(&theta);
        (0..p.size()).map(|i| kt[i] - p.k_si[i]).collect()
    };
    let active_set = (0..theta.len()).filter(|&i| theta[i] == 0.0).collect();
    QPSolution {
        objective: kernel_objective(&p.k_ss, &p.k_si, &theta),
        theta,
        dual,
        active_set,
        ridge_used: raw.ridge_used,
        converged: raw.converged,
        iterations: raw.iterations,
    }
}

pub(crate) struct RawSolution {
    pub theta: Vec<f64>,
    pub ridge_used: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Active-set engine for min ½θᵀAθ − bᵀθ, θ ≥ 0, with A symmetric
/// positive (semi-)definite. Shared by the kernel solve and the
/// observation-space regression.
pub(crate) fn solve_raw(
    a: &SquareMat,
    b: &[f64],
    zero_tol: f64,
    ridge_start: f64,
) -> Result<RawSolution, NnqpError> {
    let n = b.len();
    assert_eq!(a.n(), n);
    let mut ridges: Vec<f64> = RIDGE_SCHEDULE.iter().copied().filter(|r| *r >= ridge_start).collect();
    if ridges.is_empty() {
        ridges.push(ridge_start);
    }

    let swap_cap = 10 * n.max(1);
    let mut swaps = 0usize;
    let mut converged = true;

    let mut theta = vec![0.0f64; n];
    let mut passive: Vec<usize> = Vec::new();
    let mut in_passive = vec![false; n];
    let mut banned = vec![false; n];
    let mut ridge_used = 0.0f64;

    'outer: loop {
        // negative gradient w = b − Aθ
        let at = a.mat_vec(&theta);
        let w: Vec<f64> = (0..n).map(|i| b[i] - at[i]).collect();

        // most promising coordinate outside the passive set
        let entering = loop {
            let mut best: Option<usize> = None;
            for j in 0..n {
                if in_passive[j] || banned[j] || w[j] <= DUAL_TOL {
                    continue;
                }
                if best.map_or(true, |cur| w[j] > w[cur]) {
                    best = Some(j);
                }
            }
            break best;
        };
        let Some(j) = entering else { break 'outer };

        if swaps >= swap_cap {
            converged = false;
            break 'outer;
        }
        swaps += 1;
        passive.push(j);
        in_passive[j] = true;

        // re-solve the passive block, backing off along the segment to
        // the previous iterate whenever feasibility is lost
        loop {
            let sub = a.principal_submatrix(&passive);
            let rhs: Vec<f64> = passive.iter().map(|&i| b[i]).collect();
            let schedule: Vec<f64> = ridges.iter().copied().filter(|r| *r >= ridge_used).collect();
            let Some(rs) = linalg::solve_spd_ridge(&sub, &rhs, &schedule) else {
                return Err(NnqpError::SingularSystem(format!(
                    "passive block of size {} unsolvable at every ridge level",
                    passive.len()
                )));
            };
            ridge_used = ridge_used.max(rs.ridge);
            let z = rs.x;

            // a freshly added coordinate that solves non-positive would
            // make no progress; ban it until the gradient changes
            if let Some(pos) = passive.iter().position(|&i| i == j) {
                if passive.len() > 0 && z[pos] <= DUAL_TOL && theta[j] == 0.0 {
                    passive.swap_remove(pos);
                    in_passive[j] = false;
                    banned[j] = true;
                    continue 'outer;
                }
            }

            if z.iter().all(|&v| v > 0.0) {
                for (slot, &i) in passive.iter().enumerate() {
                    theta[i] = z[slot];
                }
                banned.fill(false);
                break;
            }

            // line search toward z, stopping at the first bound
            let mut alpha = 1.0f64;
            let mut blocker = None;
            for (slot, &i) in passive.iter().enumerate() {
                if z[slot] <= 0.0 {
                    let t = theta[i] / (theta[i] - z[slot]);
                    if t < alpha {
                        alpha = t;
                        blocker = Some(i);
                    }
                }
            }
            for (slot, &i) in passive.iter().enumerate() {
                theta[i] += alpha * (z[slot] - theta[i]);
            }
            let mut removed = false;
            let mut slot = 0;
            while slot < passive.len() {
                let i = passive[slot];
                if Some(i) == blocker || theta[i] <= 1e-13 {
                    theta[i] = 0.0;
                    in_passive[i] = false;
                    passive.swap_remove(slot);
                    removed = true;
                    swaps += 1;
                } else {
                    slot += 1;
                }
            }
            banned.fill(false);
            if !removed {
                // numerically stuck; treat as non-convergence
                converged = false;
                break;
            }
            if swaps >= swap_cap {
                converged = false;
                break;
            }
            if passive.is_empty() {
                break;
            }
        }
        if !converged {
            break;
        }
    }

    let mut iterations = swaps;
    if iterations == 0 {
        iterations = 1;
    }
    for v in &mut theta {
        if *v < zero_tol {
            *v = 0.0;
        }
    }
    Ok(RawSolution { theta, ridge_used, converged, iterations })
}

/// Primal active-set solve of  min θᵀMθ  s.t. 1ᵀθ = 1, θ ≥ 0,
/// for M symmetric PSD. Starts from the best single atom and keeps the
/// iterate on the simplex throughout. Used by the sum-to-one
/// observation-space regression.
pub(crate) fn solve_simplex_qp(m: &SquareMat, zero_tol: f64) -> Result<RawSolution, NnqpError> {
    let n = m.n();
    if n == 0 {
        return Err(NnqpError::InvalidProblem("empty simplex problem".into()));
    }
    let swap_cap = 10 * n;
    let mut swaps = 0usize;
    let mut converged = true;
    let mut ridge_used = 0.0f64;

    // best single atom: smallest diagonal (closest reconstruction)
    let start = (0..n)
        .min_by(|&a, &b| m.get(a, a).total_cmp(&m.get(b, b)).then(a.cmp(&b)))
        .unwrap();
    let mut theta = vec![0.0f64; n];
    theta[start] = 1.0;
    let mut passive = vec![start];
    let mut in_passive = vec![false; n];
    in_passive[start] = true;

    loop {
        // stationarity on the passive block: 2 M_PP z = nu 1, 1ᵀz = 1,
        // solved via v = M_PP⁻¹ 1 and z = v / (1ᵀv)
        let sub = m.principal_submatrix(&passive);
        let ones = vec![1.0f64; passive.len()];
        let schedule: Vec<f64> =
            RIDGE_SCHEDULE.iter().copied().filter(|r| *r >= ridge_used).collect();
        let Some(rs) = linalg::solve_spd_ridge(&sub, &ones, &schedule) else {
            return Err(NnqpError::SingularSystem(format!(
                "simplex passive block of size {} unsolvable at every ridge level",
                passive.len()
            )));
        };
        ridge_used = ridge_used.max(rs.ridge);
        let vsum: f64 = rs.x.iter().sum();
        if !(vsum > 0.0) {
            return Err(NnqpError::SingularSystem("non-positive simplex multiplier".into()));
        }
        let z: Vec<f64> = rs.x.iter().map(|v| v / vsum).collect();

        if z.iter().all(|&v| v > 0.0) {
            for (slot, &i) in passive.iter().enumerate() {
                theta[i] = z[slot];
            }
            // duals on the active coordinates: lambda = 2(Mθ)_γ − nu
            let nu = 2.0 / vsum;
            let mt = m.mat_vec(&theta);
            let mut worst: Option<usize> = None;
            for j in 0..n {
                if in_passive[j] {
                    continue;
                }
                let lambda = 2.0 * mt[j] - nu;
                if lambda < -1e-12 && worst.map_or(true, |w| 2.0 * mt[j] < 2.0 * mt[w]) {
                    worst = Some(j);
                }
            }
            let Some(j) = worst else { break };
            if swaps >= swap_cap {
                converged = false;
                break;
            }
            swaps += 1;
            passive.push(j);
            in_passive[j] = true;
        } else {
            // back off toward the previous simplex point
            let mut alpha = 1.0f64;
            let mut blocker = None;
            for (slot, &i) in passive.iter().enumerate() {
                if z[slot] <= 0.0 {
                    let t = theta[i] / (theta[i] - z[slot]);
                    if t < alpha {
                        alpha = t;
                        blocker = Some(i);
                    }
                }
            }
            for (slot, &i) in passive.iter().enumerate() {
                theta[i] += alpha * (z[slot] - theta[i]);
            }
            let mut removed = false;
            let mut slot = 0;
            while slot < passive.len() {
                let i = passive[slot];
                if (Some(i) == blocker || theta[i] <= 1e-13) && passive.len() > 1 {
                    theta[i] = 0.0;
                    in_passive[i] = false;
                    passive.swap_remove(slot);
                    removed = true;
                    swaps += 1;
                } else {
                    slot += 1;
                }
            }
            if !removed || swaps >= swap_cap {
                converged = false;
                break;
            }
        }
    }

    // truncate stragglers, then renormalize exactly onto the simplex
    for v in &mut theta {
        if *v < zero_tol {
            *v = 0.0;
        }
    }
    let total: f64 = theta.iter().sum();
    if total > 0.0 {
        for v in &mut theta {
            *v /= total;
        }
    }
    Ok(RawSolution { theta, ridge_used, converged, iterations: swaps.max(1) })
}

/// Exhaustive oracle: tries every partition into passive (θ > 0) and
/// active (θ = 0) coordinates, solves the passive block by Gaussian
/// elimination, and keeps the partition whose solution is primal
/// feasible and dual feasible. Exponential in the problem size.
pub fn solve_by_enumeration(p: &QPProblem) -> Result<QPSolution, NnqpError> {
    let n = p.size();
    if n > ENUMERATION_MAX {
        return Err(NnqpError::SizeLimit { size: n, max: ENUMERATION_MAX });
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1u32 << n) {
        let beta: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let mut theta = vec![0.0f64; n];
        if !beta.is_empty() {
            let sub = p.k_ss.principal_submatrix(&beta);
            let rhs: Vec<f64> = beta.iter().map(|&i| p.k_si[i]).collect();
            let Some(z) = linalg::solve_gauss(&sub, &rhs) else { continue };
            if !z.iter().all(|&v| v > 0.0) {
                continue;
            }
            for (slot, &i) in beta.iter().enumerate() {
                theta[i] = z[slot];
            }
        }
        // active coordinates must carry non-negative duals
        let kt = p.k_ss.mat_vec(&theta);
        let dual_ok = (0..n)
            .filter(|i| mask >> i & 1 == 0)
            .all(|i| kt[i] - p.k_si[i] >= -1e-10);
        if !dual_ok {
            continue;
        }
        let obj = kernel_objective(&p.k_ss, &p.k_si, &theta);
        if best.as_ref().map_or(true, |(b, _)| obj < *b) {
            best = Some((obj, theta));
        }
    }
    let Some((_, mut theta)) = best else {
        return Err(NnqpError::SingularSystem(
            "no partition satisfied the optimality conditions".into(),
        ));
    };
    for v in &mut theta {
        if *v < p.zero_tol {
            *v = 0.0;
        }
    }
    Ok(finish(p, RawSolution { theta, ridge_used: 0.0, converged: true, iterations: 1 << n }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn problem(k_ss: &[&[f64]], k_si: &[f64]) -> QPProblem {
        let n = k_si.len();
        let m = SquareMat::from_fn(n, |i, j| k_ss[i][j]);
        QPProblem::new(m, k_si.to_vec()).unwrap()
    }

    #[test]
    fn singleton_solution() {
        let k = 0.3;
        let p = problem(&[&[1.0]], &[k]);
        let s = solve(&p).unwrap();
        assert_relative_eq!(s.theta[0], k, epsilon = 1e-12);
        assert_relative_eq!(s.objective, 0.5 - 0.5 * k * k, epsilon = 1e-12);
        assert!(s.converged);

        let e = solve_by_enumeration(&p).unwrap();
        assert_relative_eq!(e.theta[0], s.theta[0], epsilon = 1e-12);
    }

    #[test]
    fn collinear_points_prune_the_far_one() {
        // 1D points i=0, j=1, k=2 with sigma² = 1
        let kjk = (-0.5f64).exp();
        let p = problem(&[&[1.0, kjk], &[kjk, 1.0]], &[(-0.5f64).exp(), (-2.0f64).exp()]);
        let s = solve(&p).unwrap();
        assert_relative_eq!(s.theta[0], (-0.5f64).exp(), epsilon = 1e-9);
        assert_eq!(s.theta[1], 0.0);
        assert_eq!(s.support(), [0]);
        // the pruned coordinate carries a strictly positive dual
        assert!(s.dual[1] > 0.0);

        let e = solve_by_enumeration(&p).unwrap();
        assert_eq!(e.support(), s.support());
        assert_relative_eq!(e.theta[0], s.theta[0], epsilon = 1e-10);
    }

    #[test]
    fn symmetric_pair_splits_evenly() {
        // i=(0,0), j=(1,0), k=(0,1), sigma² = 1
        let kij = (-0.5f64).exp();
        let kjk = (-1.0f64).exp();
        let p = problem(&[&[1.0, kjk], &[kjk, 1.0]], &[kij, kij]);
        let s = solve(&p).unwrap();
        let expect = kij / (1.0 + kjk);
        assert_relative_eq!(s.theta[0], expect, epsilon = 1e-12);
        assert_relative_eq!(s.theta[1], expect, epsilon = 1e-12);
        assert_relative_eq!(expect, 0.44340, epsilon = 1e-5);
    }

    #[test]
    fn forced_negativity_goes_active() {
        let p = problem(&[&[1.0, 0.95], &[0.95, 1.0]], &[0.9, 0.3]);
        let s = solve(&p).unwrap();
        assert_eq!(s.support(), [0]);
        assert_relative_eq!(s.theta[0], 0.9, epsilon = 1e-12);
        assert!(s.dual[1] >= 0.0);
        let e = solve_by_enumeration(&p).unwrap();
        assert_eq!(e.support(), [0]);
    }

    #[test]
    fn zero_tol_truncates_tiny_weights() {
        let p = problem(&[&[1.0, 0.0], &[0.0, 1.0]], &[5e-9, 0.5]);
        let s = solve(&p).unwrap();
        assert_eq!(s.theta[0], 0.0, "weight below zero_tol is exactly zero");
        assert_relative_eq!(s.theta[1], 0.5, epsilon = 1e-12);
        assert_eq!(s.active_set, [0]);
    }

    #[test]
    fn exact_duplicate_neighbor_gets_zero_weight() {
        // the twin's dual vanishes once the first copy enters, so the
        // singular 2x2 block never forms
        let p = problem(&[&[1.0, 1.0], &[1.0, 1.0]], &[0.8, 0.8]);
        let s = solve(&p).unwrap();
        assert!(s.converged);
        assert_eq!(s.support(), [0]);
        assert_relative_eq!(s.theta[0], 0.8, epsilon = 1e-12);
    }

    #[test]
    fn near_singular_block_escalates_ridge() {
        // Gram matrix of atoms e1, e2, (e1+e2)/2 + 1e-7*e3 against a
        // target with a small e3 component: the third atom enters on a
        // dual of ~1e-9 and its block pivot is ~1e-14, which forces
        // the solve onto the ridge schedule.
        let a = SquareMat::from_fn(3, |i, j| match (i.min(j), i.max(j)) {
            (0, 0) | (1, 1) => 1.0,
            (2, 2) => 0.5 + 1e-14,
            (0, 1) => 0.0,
            _ => 0.5,
        });
        let b = [2.0, 1.0, 1.5 + 1e-9];
        let raw = solve_raw(&a, &b, DEFAULT_ZERO_TOL, 0.0).unwrap();
        assert!(raw.converged);
        assert!(raw.ridge_used > 0.0, "ridge stayed {}", raw.ridge_used);
        assert!(raw.theta.iter().all(|&v| v >= 0.0));
        // no remaining ascent direction
        let at = a.mat_vec(&raw.theta);
        for i in 0..3 {
            assert!(b[i] - at[i] <= 1e-6, "dual {i} still positive");
        }
    }

    #[test]
    fn enumeration_size_limit() {
        let n = ENUMERATION_MAX + 1;
        let m = SquareMat::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 });
        let p = QPProblem::new(m, vec![0.5; n]).unwrap();
        assert!(matches!(
            solve_by_enumeration(&p),
            Err(NnqpError::SizeLimit { size: 13, max: 12 })
        ));
    }

    #[test]
    fn problem_validation() {
        let asym = SquareMat::from_fn(2, |i, j| if (i, j) == (0, 1) { 0.5 } else if (i, j) == (1, 0) { 0.4 } else { 1.0 });
        assert!(QPProblem::new(asym, vec![0.5, 0.5]).is_err());

        let bad_diag = SquareMat::from_fn(2, |i, j| if i == j { 0.9 } else { 0.1 });
        assert!(QPProblem::new(bad_diag, vec![0.5, 0.5]).is_err());

        let eye = SquareMat::from_fn(2, |i, j| if i == j { 1.0 } else { 0.0 });
        assert!(QPProblem::new(eye.clone(), vec![0.5, 1.5]).is_err());
        assert!(QPProblem::new(eye, vec![0.5]).is_err());
    }

    fn random_kernel_problem(rng: &mut ChaCha8Rng, max_size: usize) -> QPProblem {
        // kernel values from an actual random point cloud, so the
        // matrices are genuine Gaussian kernels
        let m = rng.gen_range(1..=max_size);
        let d = rng.gen_range(1..=3);
        let sigma_sq = rng.gen_range(0.25..4.0);
        let pts: Vec<Vec<f64>> =
            (0..=m).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let dist2 = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
        };
        let k_ss = SquareMat::from_fn(m, |i, j| {
            if i == j {
                1.0
            } else {
                (-dist2(&pts[i + 1], &pts[j + 1]) / (2.0 * sigma_sq)).exp()
            }
        });
        let k_si: Vec<f64> =
            (0..m).map(|i| (-dist2(&pts[i + 1], &pts[0]) / (2.0 * sigma_sq)).exp()).collect();
        QPProblem::new(k_ss, k_si).unwrap()
    }

    #[test]
    fn matches_enumeration_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = random_kernel_problem(&mut rng, 8);
            let s = solve(&p).unwrap();
            let e = solve_by_enumeration(&p).unwrap();
            assert!(s.converged);
            assert_eq!(s.support(), e.support());
            for i in 0..p.size() {
                assert!((s.theta[i] - e.theta[i]).abs() < 1e-6);
            }
            let r = KktResiduals::of(&p, &s);
            assert!(r.max() <= 1e-8, "kkt residual {} too large", r.max());
        }
    }

    #[test]
    fn removing_a_coordinate_never_helps() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let p = random_kernel_problem(&mut rng, 6);
            if p.size() < 2 {
                continue;
            }
            let full = solve(&p).unwrap().objective;
            let drop = rng.gen_range(0..p.size());
            let keep: Vec<usize> = (0..p.size()).filter(|&i| i != drop).collect();
            let sub = QPProblem::new(
                p.k_ss.principal_submatrix(&keep),
                keep.iter().map(|&i| p.k_si[i]).collect(),
            )
            .unwrap();
            let restricted = solve(&sub).unwrap().objective;
            assert!(restricted >= full - 1e-12);
        }
    }

    #[test]
    fn beats_thresholding_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let p = random_kernel_problem(&mut rng, 8);
            let s = solve(&p).unwrap();
            let at_threshold = kernel_objective(&p.k_ss, &p.k_si, &p.k_si);
            assert!(s.objective <= at_threshold + 1e-12);
            assert!(s.objective <= 0.5 + 1e-12);
            assert!(s.objective >= -1e-12);
        }
    }
}
