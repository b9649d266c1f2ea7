//! Similarity kernels and kernel matrices.
//!
//! Both kernels have unit diagonal, are symmetric, and take values in
//! [0, 1], which is what the geometric analysis of the solver rests on.
//! The node-anchored cosine kernel compares directions as seen from a
//! center point; it is the kernel under which the per-node regression
//! reproduces locally-linear-embedding style weights.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::PointSet;
use crate::linalg::SquareMat;
use crate::math;
use crate::neighbors::{knn_search, NeighborsError};

#[derive(Debug, Clone, PartialEq)]
pub enum KernelError {
    DimensionMismatch { left: usize, right: usize },
    /// A support point coincides with the anchor of a cosine kernel.
    DegenerateInput(String),
    InvalidBandwidth(f64),
    InvalidSupport(String),
    /// Evaluated values violate the kernel-matrix invariants.
    InvalidMatrix(String),
}

impl core::fmt::Display for KernelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            KernelError::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            KernelError::DegenerateInput(msg) => write!(f, "degenerate input: {msg}"),
            KernelError::InvalidBandwidth(v) => write!(f, "bandwidth must be finite and > 0, got {v}"),
            KernelError::InvalidSupport(msg) => write!(f, "invalid support: {msg}"),
            KernelError::InvalidMatrix(msg) => write!(f, "invalid kernel matrix: {msg}"),
        }
    }
}

impl core::error::Error for KernelError {}

/// Which similarity kernel to evaluate.
///
/// The cosine kernel is anchored at a center point supplied by the
/// evaluation context (the node being fit), so it carries no parameters
/// of its own.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum KernelSpec {
    Gaussian { sigma_sq: f64 },
    CosineAtNode,
}

impl KernelSpec {
    pub fn gaussian(sigma_sq: f64) -> Result<Self, KernelError> {
        if !sigma_sq.is_finite() || sigma_sq <= 0.0 {
            return Err(KernelError::InvalidBandwidth(sigma_sq));
        }
        Ok(KernelSpec::Gaussian { sigma_sq })
    }
}

/// exp(-‖x_i - x_j‖² / (2 sigma_sq)), in (0, 1].
pub fn eval_gaussian(x_i: &[f64], x_j: &[f64], sigma_sq: f64) -> Result<f64, KernelError> {
    if x_i.len() != x_j.len() {
        return Err(KernelError::DimensionMismatch { left: x_i.len(), right: x_j.len() });
    }
    if !sigma_sq.is_finite() || sigma_sq <= 0.0 {
        return Err(KernelError::InvalidBandwidth(sigma_sq));
    }
    let mut d2 = 0.0;
    for (a, b) in x_i.iter().zip(x_j) {
        let diff = a - b;
        d2 += diff * diff;
    }
    Ok(math::exp(-d2 / (2.0 * sigma_sq)))
}

/// Cosine similarity of the directions from `x_i` to `x_p` and `x_q`,
/// shifted into [0, 1]:
///
///   1/2 + (x_p - x_i)ᵀ(x_q - x_i) / (2 ‖x_p - x_i‖ ‖x_q - x_i‖)
///
/// When an argument coincides with the anchor exactly the value is 1,
/// the limit of the expression as that argument approaches the anchor.
pub fn eval_cosine_at_node(x_p: &[f64], x_q: &[f64], x_i: &[f64]) -> Result<f64, KernelError> {
    if x_p.len() != x_q.len() || x_p.len() != x_i.len() {
        return Err(KernelError::DimensionMismatch {
            left: x_p.len(),
            right: x_q.len().max(x_i.len()),
        });
    }
    let mut dot = 0.0;
    let mut np = 0.0;
    let mut nq = 0.0;
    for k in 0..x_p.len() {
        let a = x_p[k] - x_i[k];
        let b = x_q[k] - x_i[k];
        dot += a * b;
        np += a * a;
        nq += b * b;
    }
    if np == 0.0 || nq == 0.0 {
        return Ok(1.0);
    }
    let raw = 0.5 + dot / (2.0 * math::sqrt(np) * math::sqrt(nq));
    Ok(raw.clamp(0.0, 1.0))
}

/// A symmetric kernel matrix with unit diagonal, validated against the
/// range invariants of its kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    values: SquareMat,
    spec: KernelSpec,
}

impl KernelMatrix {
    pub fn new(values: SquareMat, spec: KernelSpec) -> Result<Self, KernelError> {
        if !values.all_finite() {
            return Err(KernelError::InvalidMatrix("non-finite entry".into()));
        }
        if values.max_asymmetry() > 1e-12 {
            return Err(KernelError::InvalidMatrix(format!(
                "asymmetry {} exceeds 1e-12",
                values.max_asymmetry()
            )));
        }
        for i in 0..values.n() {
            if values.get(i, i) != 1.0 {
                return Err(KernelError::InvalidMatrix(format!(
                    "diagonal entry ({i},{i}) = {} is not exactly 1",
                    values.get(i, i)
                )));
            }
            for j in 0..values.n() {
                let v = values.get(i, j);
                if !(0.0..=1.0).contains(&v) {
                    return Err(KernelError::InvalidMatrix(format!(
                        "entry ({i},{j}) = {v} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(KernelMatrix { values, spec })
    }

    pub fn values(&self) -> &SquareMat {
        &self.values
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.values.n()
    }
}

/// Kernel values restricted to a neighborhood: the |S|x|S| matrix over
/// `support` and the length-|S| vector of similarities to `center`.
///
/// For the cosine kernel the anchor is `center`, so the vector entries
/// are all exactly 1 (the anchor-coincidence limit).
pub fn kernel_submatrix(
    ps: &PointSet,
    center: usize,
    support: &[usize],
    spec: &KernelSpec,
) -> Result<(KernelMatrix, Vec<f64>), KernelError> {
    if support.is_empty() {
        return Err(KernelError::InvalidSupport("empty support".into()));
    }
    if support.contains(&center) {
        return Err(KernelError::InvalidSupport(format!(
            "support contains the center node {center}"
        )));
    }
    let m = support.len();
    match *spec {
        KernelSpec::Gaussian { sigma_sq } => {
            if !sigma_sq.is_finite() || sigma_sq <= 0.0 {
                return Err(KernelError::InvalidBandwidth(sigma_sq));
            }
            let mut k_ss = SquareMat::zeros(m);
            for a in 0..m {
                k_ss.set(a, a, 1.0);
                for b in (a + 1)..m {
                    let v = eval_gaussian(ps.point(support[a]), ps.point(support[b]), sigma_sq)?;
                    k_ss.set(a, b, v);
                    k_ss.set(b, a, v);
                }
            }
            let k_si = support
                .iter()
                .map(|&s| eval_gaussian(ps.point(s), ps.point(center), sigma_sq))
                .collect::<Result<Vec<f64>, _>>()?;
            Ok((KernelMatrix::new(k_ss, *spec)?, k_si))
        }
        KernelSpec::CosineAtNode => {
            for &s in support {
                if ps.squared_distance(s, center) == 0.0 {
                    return Err(KernelError::DegenerateInput(format!(
                        "support node {s} coincides with center {center}"
                    )));
                }
            }
            let xc = ps.point(center);
            let mut k_ss = SquareMat::zeros(m);
            for a in 0..m {
                k_ss.set(a, a, 1.0);
                for b in (a + 1)..m {
                    let v = eval_cosine_at_node(ps.point(support[a]), ps.point(support[b]), xc)?;
                    k_ss.set(a, b, v);
                    k_ss.set(b, a, v);
                }
            }
            // k*(x_s, x_center) = 1 for every s, by the anchor limit
            let k_si = alloc::vec![1.0; m];
            Ok((KernelMatrix::new(k_ss, *spec)?, k_si))
        }
    }
}

/// Global Gaussian bandwidth from the data: sigma is one third of the
/// mean distance to the K-th nearest neighbor, returned as sigma².
/// A single global value keeps the kernel matrix symmetric.
pub fn bandwidth_from_neighbors(ps: &PointSet, k: usize) -> Result<f64, NeighborsError> {
    let nl = knn_search(ps, k)?;
    let mean_kth: f64 =
        (0..ps.n()).map(|i| nl.kth_distance(i)).sum::<f64>() / ps.n() as f64;
    let sigma = mean_kth / 3.0;
    Ok(sigma * sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn gaussian_trivial_values() {
        let k = eval_gaussian(&[1.0, 2.0], &[1.0, 2.0], 0.7).unwrap();
        assert_eq!(k, 1.0);

        // ‖x_i - x_j‖² = 2 sigma²  →  e^{-1}
        let k = eval_gaussian(&[0.0], &[2.0f64.sqrt()], 1.0).unwrap();
        assert_relative_eq!(k, (-1.0f64).exp(), epsilon = 1e-15);

        // ‖(0,0)-(3,4)‖² = 25, 2 sigma² = 25
        let k = eval_gaussian(&[0.0, 0.0], &[3.0, 4.0], 12.5).unwrap();
        assert_relative_eq!(k, (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn gaussian_rejects_bad_input() {
        assert!(matches!(
            eval_gaussian(&[0.0], &[0.0, 1.0], 1.0),
            Err(KernelError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            eval_gaussian(&[0.0], &[1.0], 0.0),
            Err(KernelError::InvalidBandwidth(_))
        ));
        assert!(KernelSpec::gaussian(-1.0).is_err());
    }

    #[test]
    fn cosine_angles() {
        let xi = [0.0, 0.0];
        // parallel directions
        let k = eval_cosine_at_node(&[1.0, 0.0], &[2.5, 0.0], &xi).unwrap();
        assert_relative_eq!(k, 1.0, epsilon = 1e-15);
        // perpendicular directions
        let k = eval_cosine_at_node(&[1.0, 0.0], &[0.0, 3.0], &xi).unwrap();
        assert_relative_eq!(k, 0.5, epsilon = 1e-15);
        // opposite directions
        let k = eval_cosine_at_node(&[1.0, 0.0], &[-4.0, 0.0], &xi).unwrap();
        assert_relative_eq!(k, 0.0, epsilon = 1e-15);
        // anchor coincidence resolves to the limit
        let k = eval_cosine_at_node(&[1.0, 0.0], &[0.0, 0.0], &xi).unwrap();
        assert_eq!(k, 1.0);
    }

    #[test]
    fn cosine_value_depends_only_on_direction() {
        // along a fixed direction u with cos∠(x_p - x_i, u) = c the
        // value is (1 + c)/2 for every step size h
        let xi = [1.0f64, -2.0];
        let xp = [3.0f64, 1.0];
        let u = [0.6f64, 0.8]; // unit
        let dp = [xp[0] - xi[0], xp[1] - xi[1]];
        let c = (dp[0] * u[0] + dp[1] * u[1]) / (dp[0] * dp[0] + dp[1] * dp[1]).sqrt();
        for h in [1e-2, 1e-4, 1e-6] {
            let xq = [xi[0] + h * u[0], xi[1] + h * u[1]];
            let k = eval_cosine_at_node(&xp, &xq, &xi).unwrap();
            assert_relative_eq!(k, (1.0 + c) / 2.0, epsilon = 1e-9);
        }
        // along u = x_p - x_i the value is exactly 1 for all h
        let norm = (dp[0] * dp[0] + dp[1] * dp[1]).sqrt();
        for h in [1e-2, 1e-4, 1e-6] {
            let xq = [xi[0] + h * dp[0] / norm, xi[1] + h * dp[1] / norm];
            let k = eval_cosine_at_node(&xp, &xq, &xi).unwrap();
            assert_relative_eq!(k, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn submatrix_singleton_and_collinear() {
        let ps = PointSet::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let spec = KernelSpec::gaussian(1.0).unwrap();

        let (km, k_si) = kernel_submatrix(&ps, 0, &[1], &spec).unwrap();
        assert_eq!(km.values().get(0, 0), 1.0);
        assert_relative_eq!(k_si[0], (-0.5f64).exp(), epsilon = 1e-15);

        let (km, k_si) = kernel_submatrix(&ps, 0, &[1, 2], &spec).unwrap();
        assert_relative_eq!(km.values().get(0, 1), (-0.5f64).exp(), epsilon = 1e-15);
        assert_eq!(km.values().get(0, 1), km.values().get(1, 0));
        assert_relative_eq!(k_si[0], (-0.5f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(k_si[1], (-2.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn cosine_submatrix_matches_angle_parametrization() {
        // independent oracle: plant directions at explicit angles, so
        // the expected entry is (1 + cos(angle difference))/2
        let angles = [0.3f64, 1.1, 2.8, -0.9];
        let radii = [0.5f64, 2.0, 1.3, 0.7];
        let center = [10.0, -4.0];
        let mut rows = vec![center.to_vec()];
        for (a, r) in angles.iter().zip(radii) {
            rows.push(vec![center[0] + r * a.cos(), center[1] + r * a.sin()]);
        }
        let ps = PointSet::from_rows(&rows).unwrap();
        let (km, k_si) =
            kernel_submatrix(&ps, 0, &[1, 2, 3, 4], &KernelSpec::CosineAtNode).unwrap();
        for a in 0..4 {
            assert_eq!(k_si[a], 1.0);
            for b in 0..4 {
                let expect = (1.0 + (angles[a] - angles[b]).cos()) / 2.0;
                assert_relative_eq!(km.values().get(a, b), expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn submatrix_rejects_bad_support() {
        let ps = PointSet::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let spec = KernelSpec::gaussian(1.0).unwrap();
        assert!(matches!(
            kernel_submatrix(&ps, 0, &[], &spec),
            Err(KernelError::InvalidSupport(_))
        ));
        assert!(matches!(
            kernel_submatrix(&ps, 0, &[0, 1], &spec),
            Err(KernelError::InvalidSupport(_))
        ));
    }

    #[test]
    fn cosine_submatrix_rejects_center_duplicate() {
        let ps = PointSet::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            kernel_submatrix(&ps, 0, &[1, 2], &KernelSpec::CosineAtNode),
            Err(KernelError::DegenerateInput(_))
        ));
    }

    #[test]
    fn bandwidth_simple_cases() {
        // two points at distance 3, K = 1: sigma = 1, sigma² = 1
        let ps = PointSet::from_rows(&[vec![0.0], vec![3.0]]).unwrap();
        assert_relative_eq!(bandwidth_from_neighbors(&ps, 1).unwrap(), 1.0, epsilon = 1e-12);

        // equilateral triangle with side D: every K-th distance is D
        let d = 2.0;
        let ps = PointSet::from_rows(&[
            vec![0.0, 0.0],
            vec![d, 0.0],
            vec![d / 2.0, d * 0.75f64.sqrt()],
        ])
        .unwrap();
        for k in 1..=2 {
            assert_relative_eq!(
                bandwidth_from_neighbors(&ps, k).unwrap(),
                d * d / 9.0,
                epsilon = 1e-12
            );
        }
    }

    proptest! {
        #[test]
        fn gaussian_symmetric_and_in_range(
            a in proptest::collection::vec(-5.0f64..5.0, 3),
            b in proptest::collection::vec(-5.0f64..5.0, 3),
            sigma_sq in 0.1f64..4.0,
        ) {
            let kab = eval_gaussian(&a, &b, sigma_sq).unwrap();
            let kba = eval_gaussian(&b, &a, sigma_sq).unwrap();
            prop_assert_eq!(kab, kba);
            prop_assert!(kab > 0.0 && kab <= 1.0);
            prop_assert_eq!(kab == 1.0, a == b);
        }

        #[test]
        fn cosine_symmetric_and_in_range(
            p in proptest::collection::vec(-5.0f64..5.0, 2),
            q in proptest::collection::vec(-5.0f64..5.0, 2),
            c in proptest::collection::vec(-5.0f64..5.0, 2),
        ) {
            let kpq = eval_cosine_at_node(&p, &q, &c).unwrap();
            let kqp = eval_cosine_at_node(&q, &p, &c).unwrap();
            prop_assert!((kpq - kqp).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&kpq));
        }
    }
}
