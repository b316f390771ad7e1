//! Truncated singular value decomposition.
//!
//! The Lanczos path is Golub-Kahan bidiagonalization with full
//! reorthogonalization of both Krylov bases. It only touches the operator
//! through matrix-vector products, so it works for dense and sparse kernels
//! alike and costs `O(N'^2)` per step instead of the `O(N'^3)` of a full
//! decomposition.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{dot, norm, Real};

/// Something that can be multiplied with a vector from either side.
pub trait LinearOperator<T: Real> {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `y = A x`
    fn apply(&self, x: &[T], y: &mut [T]);
    /// `y = A^T x`
    fn apply_transpose(&self, x: &[T], y: &mut [T]);
}

impl<T: Real> LinearOperator<T> for DMatrix<T> {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        y.iter_mut().for_each(|v| *v = T::zero());
        for (j, col) in self.column_iter().enumerate() {
            let xj = x[j];
            for (yi, a) in y.iter_mut().zip(col.iter()) {
                *yi += *a * xj;
            }
        }
    }

    fn apply_transpose(&self, x: &[T], y: &mut [T]) {
        for (j, col) in self.column_iter().enumerate() {
            y[j] = dot(col.as_slice(), x);
        }
    }
}

/// Leading singular triples, sorted by decreasing singular value.
#[derive(Debug, Clone)]
pub struct TruncatedSvd<T: Real> {
    pub singular_values: Vec<T>,
    /// Unit-norm left singular vectors, one per column.
    pub left: DMatrix<T>,
    /// Unit-norm right singular vectors, one per column.
    pub right: DMatrix<T>,
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Residual tolerance relative to the largest singular value.
    pub tolerance: f64,
    /// Seed of the start vector.
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            seed: 0x6b65_726e_656c,
        }
    }
}

/// Full SVD via `nalgebra`, truncated to `rank` triples.
pub fn dense_svd<T: Real>(a: &DMatrix<T>, rank: usize) -> TruncatedSvd<T> {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .expect("finite singular values")
    });
    order.truncate(rank);
    TruncatedSvd {
        singular_values: order.iter().map(|&i| svd.singular_values[i]).collect(),
        left: DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]),
        right: DMatrix::from_fn(vt.ncols(), order.len(), |r, c| vt[(order[c], r)]),
    }
}

/// Leading `rank` singular triples of `op` by Golub-Kahan-Lanczos.
pub fn lanczos_svd<T: Real, A: LinearOperator<T> + ?Sized>(
    op: &A,
    rank: usize,
    opts: &LanczosOptions,
) -> TruncatedSvd<T> {
    let (m, n) = (op.nrows(), op.ncols());
    let kmax = m.min(n);
    let rank = rank.min(kmax);
    if rank == 0 {
        return TruncatedSvd {
            singular_values: Vec::new(),
            left: DMatrix::zeros(m, 0),
            right: DMatrix::zeros(n, 0),
        };
    }
    let tol = T::lit(opts.tolerance).max(T::lit(100.0) * T::machine_eps());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut us: Vec<Vec<T>> = Vec::new();
    let mut vs: Vec<Vec<T>> = vec![random_unit(&mut rng, n, &[])];
    let mut alphas: Vec<T> = Vec::new();
    let mut betas: Vec<T> = Vec::new();
    let mut scale = T::zero();

    let step = (rank / 2).max(10);
    let mut next_check = (2 * rank + 10).max(20).min(kmax);

    let mut p = vec![T::zero(); m];
    let mut r = vec![T::zero(); n];
    loop {
        let j = alphas.len();
        op.apply(&vs[j], &mut p);
        if j > 0 {
            let b = betas[j - 1];
            for (pi, ui) in p.iter_mut().zip(&us[j - 1]) {
                *pi -= b * *ui;
            }
        }
        reorthogonalize(&mut p, &us);
        let mut alpha = norm(&p);
        scale = scale.max(alpha);
        let breakdown = breakdown_level(scale, m.max(n));
        let u = if alpha > breakdown {
            p.iter().map(|&x| x / alpha).collect()
        } else {
            alpha = T::zero();
            random_unit(&mut rng, m, &us)
        };
        us.push(u);
        alphas.push(alpha);

        op.apply_transpose(&us[j], &mut r);
        for (ri, vi) in r.iter_mut().zip(&vs[j]) {
            *ri -= alpha * *vi;
        }
        reorthogonalize(&mut r, &vs);
        let mut beta = norm(&r);
        scale = scale.max(beta);
        let k = j + 1;
        if k == kmax {
            betas.push(beta);
            return extract(&us, &vs[..k], &alphas, &betas[..k - 1], rank);
        }
        let breakdown = breakdown_level(scale, m.max(n));
        let v = if beta > breakdown {
            r.iter().map(|&x| x / beta).collect()
        } else {
            beta = T::zero();
            random_unit(&mut rng, n, &vs)
        };
        vs.push(v);
        betas.push(beta);

        if k >= next_check {
            let (sv, p_mat, _) = bidiagonal_svd(&alphas, &betas[..k - 1]);
            let top = sv.first().copied().unwrap_or(T::zero());
            let converged = (0..rank).all(|i| beta * p_mat[(k - 1, i)].abs() <= tol * top);
            if converged {
                return extract(&us, &vs[..k], &alphas, &betas[..k - 1], rank);
            }
            next_check = (k + step).min(kmax);
        }
    }
}

fn breakdown_level<T: Real>(scale: T, n: usize) -> T {
    scale * T::machine_eps() * T::from_usize_lossy(n).sqrt() * T::lit(10.0)
}

fn random_unit<T: Real>(rng: &mut ChaCha8Rng, n: usize, basis: &[Vec<T>]) -> Vec<T> {
    loop {
        let mut v: Vec<T> = (0..n).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect();
        reorthogonalize(&mut v, basis);
        let nv = norm(&v);
        if nv > T::lit(1e-3) {
            v.iter_mut().for_each(|x| *x /= nv);
            return v;
        }
    }
}

/// Two passes of classical Gram-Schmidt against an orthonormal basis.
fn reorthogonalize<T: Real>(x: &mut [T], basis: &[Vec<T>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, x);
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi -= c * *bi;
            }
        }
    }
}

/// SVD of the upper bidiagonal matrix with diagonal `alphas` and
/// superdiagonal `betas`, sorted descending. Returns `(sigma, P, R)` with
/// `B = P diag(sigma) R^T`.
fn bidiagonal_svd<T: Real>(alphas: &[T], betas: &[T]) -> (Vec<T>, DMatrix<T>, DMatrix<T>) {
    let k = alphas.len();
    let b = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if j == i + 1 {
            betas[i]
        } else {
            T::zero()
        }
    });
    let full = dense_svd(&b, k);
    (full.singular_values, full.left, full.right)
}

fn extract<T: Real>(
    us: &[Vec<T>],
    vs: &[Vec<T>],
    alphas: &[T],
    betas: &[T],
    rank: usize,
) -> TruncatedSvd<T> {
    let (sv, p, r) = bidiagonal_svd(alphas, betas);
    let m = us[0].len();
    let n = vs[0].len();
    let mut left = DMatrix::zeros(m, rank);
    let mut right = DMatrix::zeros(n, rank);
    for c in 0..rank {
        for (j, u) in us.iter().enumerate() {
            let w = p[(j, c)];
            for (dst, x) in left.column_mut(c).iter_mut().zip(u) {
                *dst += w * *x;
            }
        }
        for (j, v) in vs.iter().enumerate() {
            let w = r[(j, c)];
            for (dst, x) in right.column_mut(c).iter_mut().zip(v) {
                *dst += w * *x;
            }
        }
    }
    TruncatedSvd {
        singular_values: sv[..rank].to_vec(),
        left,
        right,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize) -> DMatrix<f64> {
        // Symmetric positive kernel with decaying spectrum plus a skew part.
        DMatrix::from_fn(n, n, |i, j| {
            let x = i as f64 / n as f64;
            let y = j as f64 / n as f64;
            (-(x - y).powi(2) * 40.0).exp() * (1.0 + 0.3 * x) + 0.01 * (x - y)
        })
    }

    #[test]
    fn lanczos_matches_dense() {
        let a = test_matrix(120);
        let dense = dense_svd(&a, 12);
        let lz = lanczos_svd(&a, 12, &LanczosOptions::default());
        for (s1, s2) in dense.singular_values.iter().zip(&lz.singular_values) {
            assert!((s1 - s2).abs() < 1e-10 * dense.singular_values[0], "{s1} vs {s2}");
        }
        for c in 0..6 {
            let d = dense.left.column(c).dot(&lz.left.column(c)).abs();
            assert!((d - 1.0).abs() < 1e-8, "column {c}: {d}");
            // A v = sigma u
            let av = &a * lz.right.column(c);
            let res = (av - lz.left.column(c) * lz.singular_values[c]).norm();
            assert!(res < 1e-9, "residual {res}");
        }
    }

    #[test]
    fn orthonormal_factors() {
        let a = test_matrix(80);
        let lz = lanczos_svd(&a, 20, &LanczosOptions::default());
        let gl = lz.left.transpose() * &lz.left;
        let gr = lz.right.transpose() * &lz.right;
        let id = DMatrix::<f64>::identity(20, 20);
        assert!((gl - &id).amax() < 1e-12);
        assert!((gr - &id).amax() < 1e-12);
    }

    #[test]
    fn low_rank_operator_hits_invariant_subspace() {
        // Rank 3 matrix: Lanczos must break down and restart cleanly.
        let n = 40;
        let a = DMatrix::from_fn(n, n, |i, j| {
            let (x, y) = (i as f64, j as f64);
            1.0 + 0.1 * x * y / (n * n) as f64 + ((x + 1.0) * 0.3).sin() * ((y + 2.0) * 0.7).cos()
        });
        let lz = lanczos_svd(&a, 6, &LanczosOptions::default());
        let dense = dense_svd(&a, 6);
        for (s1, s2) in dense.singular_values.iter().zip(&lz.singular_values) {
            assert!((s1 - s2).abs() < 1e-9, "{s1} vs {s2}");
        }
        assert!(lz.singular_values[3] < 1e-9);
    }

    #[test]
    fn full_rank_request_is_exact() {
        let a = test_matrix(15);
        let lz = lanczos_svd(&a, 15, &LanczosOptions::default());
        let dense = dense_svd(&a, 15);
        for (s1, s2) in dense.singular_values.iter().zip(&lz.singular_values) {
            assert!((s1 - s2).abs() < 1e-12);
        }
    }
}
