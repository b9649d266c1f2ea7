//! Small dense and iterative linear-algebra helpers.
//!
//! Neighborhood blocks are at most a few dozen rows, so dense routines
//! operate on flat row-major buffers. Two independent solve paths exist
//! on purpose: Cholesky (used by the production solvers) and Gaussian
//! elimination (used by the enumeration oracle), so oracle checks never
//! share the factorization they are checking.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Diagonal regularization schedule tried in order when a kernel block
/// is numerically singular (e.g. duplicate neighbors).
pub const RIDGE_SCHEDULE: [f64; 4] = [0.0, 1e-10, 1e-8, 1e-6];

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMat {
    n: usize,
    data: Vec<f64>,
}

impl SquareMat {
    pub fn zeros(n: usize) -> Self {
        SquareMat { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SquareMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    /// xᵀ A x
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(&self.mat_vec(x), x)
    }

    /// Largest |A_ij - A_ji|.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max(math::abs(self.get(i, j) - self.get(j, i)));
            }
        }
        worst
    }

    /// Rows and columns of `self` restricted to `idx`, in order.
    pub fn principal_submatrix(&self, idx: &[usize]) -> SquareMat {
        SquareMat::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)))
}

pub fn norm2(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

/// Lower Cholesky factor of `a + ridge*I`, or `None` on a non-positive
/// or negligible pivot. The factor is returned flat, row-major, with
/// the strict upper triangle left as zeros.
fn cholesky(a: &SquareMat, ridge: f64) -> Option<Vec<f64>> {
    let n = a.n;
    let mut scale = 0.0f64;
    for i in 0..n {
        scale = scale.max(math::abs(a.get(i, i)) + ridge);
    }
    let pivot_tol = scale * 1e-13 + f64::MIN_POSITIVE;

    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            if i == j {
                s += ridge;
            }
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > pivot_tol) {
                    return None;
                }
                l[i * n + i] = math::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    // forward: L y = b
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    // backward: Lᵀ x = y
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

/// Result of an SPD solve, recording which ridge level succeeded.
#[derive(Debug, Clone)]
pub struct RidgeSolve {
    pub x: Vec<f64>,
    pub ridge: f64,
}

/// Solves `(a + ridge*I) x = b`, escalating `ridge` through `ridges`
/// until the factorization succeeds and the solve is accurate.
pub fn solve_spd_ridge(a: &SquareMat, b: &[f64], ridges: &[f64]) -> Option<RidgeSolve> {
    let n = a.n;
    assert_eq!(b.len(), n);
    if n == 0 {
        return Some(RidgeSolve { x: Vec::new(), ridge: 0.0 });
    }
    let b_scale = norm_inf(b).max(1.0);
    for &ridge in ridges {
        let Some(l) = cholesky(a, ridge) else { continue };
        let x = cholesky_solve(&l, n, b);
        if !x.iter().all(|v| v.is_finite()) {
            continue;
        }
        // residual against the regularized system
        let mut ax = a.mat_vec(&x);
        for i in 0..n {
            ax[i] += ridge * x[i];
        }
        let res = (0..n).fold(0.0f64, |m, i| m.max(math::abs(ax[i] - b[i])));
        if res <= 1e-7 * b_scale {
            return Some(RidgeSolve { x, ridge });
        }
    }
    None
}

/// A reusable Cholesky factorization for repeated right-hand sides.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    n: usize,
    l: Vec<f64>,
    pub ridge: f64,
}

/// Factors `a + ridge*I` with the first ridge level that yields
/// acceptable pivots.
pub fn factor_spd_ridge(a: &SquareMat, ridges: &[f64]) -> Option<SpdFactor> {
    for &ridge in ridges {
        if let Some(l) = cholesky(a, ridge) {
            return Some(SpdFactor { n: a.n, l, ridge });
        }
    }
    None
}

impl SpdFactor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        cholesky_solve(&self.l, self.n, b)
    }
}

/// Gaussian elimination with partial pivoting. Returns `None` when the
/// matrix is singular to working precision.
pub fn solve_gauss(a: &SquareMat, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.n;
    assert_eq!(b.len(), n);
    let mut m = a.data.clone();
    let mut rhs = b.to_vec();
    let mut scale = 0.0f64;
    for v in &m {
        scale = scale.max(math::abs(*v));
    }
    let tol = scale * 1e-13 + f64::MIN_POSITIVE;

    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if math::abs(m[r * n + col]) > math::abs(m[piv * n + col]) {
                piv = r;
            }
        }
        if math::abs(m[piv * n + col]) <= tol {
            return None;
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            rhs.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in (col + 1)..n {
            let f = m[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                m[r * n + c] -= f * m[col * n + c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for c in (i + 1)..n {
            s -= m[i * n + c] * x[c];
        }
        x[i] = s / m[i * n + i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations,
/// ascending. Intended for property checks on small matrices.
pub fn symmetric_eigenvalues(a: &SquareMat) -> Vec<f64> {
    let n = a.n;
    let mut m = a.clone();
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .fold(0.0f64, |s, (i, j)| s.max(math::abs(m.get(i, j))));
    if scale == 0.0 || n < 2 {
        let mut d: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
        d.sort_by(f64::total_cmp);
        return d;
    }
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m.get(i, j) * m.get(i, j);
            }
        }
        if off <= (scale * 1e-14) * (scale * 1e-14) * n as f64 {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if math::abs(apq) <= scale * 1e-300 {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + math::sqrt(theta * theta + 1.0))
                } else {
                    -1.0 / (-theta + math::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    d.sort_by(f64::total_cmp);
    d
}

/// Conjugate gradient for an SPD operator given as a matvec closure.
/// Converges when ‖r‖₂ ≤ tol·‖b‖₂; the flag reports whether that held
/// within `max_iter` iterations.
pub fn conjugate_gradient<F>(matvec: F, b: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, bool)
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return (x, true);
    }
    let target = tol * b_norm;
    let mut rs = dot(&r, &r);
    for _ in 0..max_iter {
        if math::sqrt(rs) <= target {
            return (x, true);
        }
        let ap = matvec(&p);
        let denom = dot(&p, &ap);
        if !(denom > 0.0) {
            return (x, false);
        }
        let alpha = rs / denom;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new = dot(&r, &r);
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    (x, math::sqrt(rs) <= target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> SquareMat {
        let g = SquareMat::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let mut a = SquareMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let v = dot(g.row(i), g.row(j)) + if i == j { 0.5 } else { 0.0 };
                a.set(i, j, v);
            }
        }
        a
    }

    #[test]
    fn cholesky_solve_matches_gauss() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=10 {
            let a = random_spd(n, &mut rng);
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let rs = solve_spd_ridge(&a, &b, &[0.0]).expect("spd solve");
            assert_eq!(rs.ridge, 0.0);
            let g = solve_gauss(&a, &b).expect("gauss solve");
            for i in 0..n {
                assert_relative_eq!(rs.x[i], g[i], max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ridge_escalates_on_singular_block() {
        // duplicate rows: rank 1
        let a = SquareMat::from_fn(2, |_, _| 1.0);
        let b = vec![1.0, 1.0];
        let rs = solve_spd_ridge(&a, &b, &RIDGE_SCHEDULE).expect("ridge solve");
        assert!(rs.ridge > 0.0);
        // consistent system: solution splits the unit mass evenly
        assert_relative_eq!(rs.x[0], rs.x[1], epsilon = 1e-9);
        assert_relative_eq!(rs.x[0] + rs.x[1], 1.0, epsilon = 1e-4);
    }

    #[test]
    fn singular_inconsistent_returns_none() {
        let a = SquareMat::from_fn(2, |_, _| 1.0);
        assert!(solve_gauss(&a, &[1.0, 0.0]).is_none());
    }

    #[test]
    fn jacobi_eigenvalues_2x2_analytic() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let a = SquareMat::from_fn(2, |i, j| if i == j { 2.0 } else { 1.0 });
        let e = symmetric_eigenvalues(&a);
        assert_relative_eq!(e[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(e[1], 3.0, epsilon = 1e-10);
    }

    #[test]
    fn jacobi_eigenvalues_match_trace_and_detsign() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_spd(8, &mut rng);
        let e = symmetric_eigenvalues(&a);
        let trace: f64 = (0..8).map(|i| a.get(i, i)).sum();
        assert_relative_eq!(e.iter().sum::<f64>(), trace, max_relative = 1e-10);
        assert!(e.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn cg_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_spd(20, &mut rng);
        let b: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (x, ok) = conjugate_gradient(|v| a.mat_vec(v), &b, 1e-12, 1000);
        assert!(ok);
        let dense = solve_spd_ridge(&a, &b, &[0.0]).unwrap().x;
        for i in 0..20 {
            assert_relative_eq!(x[i], dense[i], max_relative = 1e-6, epsilon = 1e-9);
        }
    }
}
