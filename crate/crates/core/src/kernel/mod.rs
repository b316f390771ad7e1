//! Gaussian kernel on delay states, bistochastic normalization and the
//! truncated singular basis of the normalized operator.
//!
//! All inner products carry the empirical weight `1/N'`. Under that weighting
//! the operator `psi -> (1/N') K~ psi` has top singular value exactly 1, with
//! left vector `1` and right vector `sqrt(q)`.

mod sparse;
pub mod svd;

pub use sparse::CsrMatrix;

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::EmbeddedSeries;
use crate::scalar::{squared_distance, Real};
use svd::{dense_svd, lanczos_svd, LanczosOptions, LinearOperator, TruncatedSvd};

/// Relative floor below which eigenvalues are discarded.
pub const LAMBDA_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Storage {
    #[default]
    Dense,
    Sparse,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelEntries<T: Real> {
    Dense(DMatrix<T>),
    Sparse(CsrMatrix<T>),
}

impl<T: Real> KernelEntries<T> {
    fn n(&self) -> usize {
        match self {
            KernelEntries::Dense(m) => m.nrows(),
            KernelEntries::Sparse(m) => m.nrows(),
        }
    }

    fn get(&self, i: usize, j: usize) -> T {
        match self {
            KernelEntries::Dense(m) => m[(i, j)],
            KernelEntries::Sparse(m) => m.get(i, j),
        }
    }

    fn mul_vec(&self, x: &[T], y: &mut [T]) {
        match self {
            KernelEntries::Dense(m) => m.apply(x, y),
            KernelEntries::Sparse(m) => m.mul_vec(x, y),
        }
    }

    fn tr_mul_vec(&self, x: &[T], y: &mut [T]) {
        match self {
            KernelEntries::Dense(m) => m.apply_transpose(x, y),
            KernelEntries::Sparse(m) => m.tr_mul_vec(x, y),
        }
    }

    fn map_entries(&self, f: impl Fn(usize, usize, T) -> T) -> Self {
        match self {
            KernelEntries::Dense(m) => {
                KernelEntries::Dense(DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| f(i, j, m[(i, j)])))
            }
            KernelEntries::Sparse(m) => KernelEntries::Sparse(m.map_entries(f)),
        }
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        match self {
            KernelEntries::Dense(m) => m.clone(),
            KernelEntries::Sparse(m) => DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m.get(i, j)),
        }
    }
}

/// Gaussian affinities between embedded states.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix<T: Real> {
    entries: KernelEntries<T>,
    epsilon: T,
    prune_threshold: T,
    delays: usize,
}

impl<T: Real> KernelMatrix<T> {
    /// Wraps an explicit square, symmetric, nonnegative matrix.
    pub fn from_dense(entries: DMatrix<T>, epsilon: T) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::Shape(format!(
                "kernel matrix must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidArgument("kernel entries must be finite and nonnegative".into()));
        }
        Ok(Self {
            entries: KernelEntries::Dense(entries),
            epsilon,
            prune_threshold: T::zero(),
            delays: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.entries.n()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries.get(i, j)
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn prune_threshold(&self) -> T {
        self.prune_threshold
    }

    pub fn entries(&self) -> &KernelEntries<T> {
        &self.entries
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.entries, KernelEntries::Sparse(_))
    }

    /// Number of stored entries.
    pub fn stored(&self) -> usize {
        match &self.entries {
            KernelEntries::Dense(m) => m.len(),
            KernelEntries::Sparse(m) => m.nnz(),
        }
    }
}

/// Gaussian kernel value for a squared distance.
pub fn gaussian<T: Real>(squared_distance: T, epsilon: T) -> T {
    (-squared_distance / epsilon).exp()
}

/// `K[i][j] = exp(-|x_i - x_j|^2 / epsilon)` over all pairs of states.
///
/// With sparse storage, entries below `tau` are not stored. The diagonal is
/// always 1 and always stored.
pub fn gaussian_kernel_matrix<T: Real>(
    emb: &EmbeddedSeries<T>,
    epsilon: T,
    tau: T,
    storage: Storage,
) -> Result<KernelMatrix<T>> {
    if !(epsilon > T::zero()) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(tau >= T::zero() && tau < T::one()) {
        return Err(Error::InvalidArgument(format!("prune threshold must lie in [0, 1), got {tau}")));
    }
    let n = emb.len();
    let entries = match storage {
        Storage::Dense => {
            let mut m = DMatrix::from_element(n, n, T::one());
            for j in 0..n {
                let xj = emb.state(j);
                for i in (j + 1)..n {
                    let d2 = squared_distance(emb.state(i), xj);
                    if !d2.is_finite() {
                        return Err(Error::NonFinite(format!("distance between states {i} and {j}")));
                    }
                    let v = gaussian(d2, epsilon);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            KernelEntries::Dense(m)
        }
        Storage::Sparse => {
            let mut rows: Vec<Vec<(usize, T)>> = (0..n).map(|i| vec![(i, T::one())]).collect();
            for j in 0..n {
                let xj = emb.state(j);
                for i in (j + 1)..n {
                    let d2 = squared_distance(emb.state(i), xj);
                    if !d2.is_finite() {
                        return Err(Error::NonFinite(format!("distance between states {i} and {j}")));
                    }
                    let v = gaussian(d2, epsilon);
                    if v >= tau {
                        rows[i].push((j, v));
                        rows[j].push((i, v));
                    }
                }
            }
            KernelEntries::Sparse(CsrMatrix::from_rows(n, rows))
        }
    };
    Ok(KernelMatrix {
        entries,
        epsilon,
        prune_threshold: if storage == Storage::Sparse { tau } else { T::zero() },
        delays: emb.delays(),
    })
}

/// Kernel after division by the right and left degree functions.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedKernel<T: Real> {
    /// Right degrees, `d = (1/N') K 1`.
    pub d: DVector<T>,
    /// Left degrees, `q = (1/N') K^T (1/d)`.
    pub q: DVector<T>,
    /// `K~[i][j] = K[i][j] / (d_i sqrt(q_j))`, same storage as the input.
    pub ktilde: KernelEntries<T>,
    pub epsilon: T,
    pub delays: usize,
}

pub fn bistochastic_normalize<T: Real>(km: &KernelMatrix<T>) -> Result<NormalizedKernel<T>> {
    let n = km.n();
    let nf = T::from_usize_lossy(n);
    let ones = vec![T::one(); n];
    let mut d = vec![T::zero(); n];
    km.entries.mul_vec(&ones, &mut d);
    for (i, di) in d.iter_mut().enumerate() {
        *di /= nf;
        if !(*di > T::zero()) {
            return Err(Error::ZeroDegree { row: i });
        }
    }
    let inv_d: Vec<T> = d.iter().map(|&x| T::one() / x).collect();
    let mut q = vec![T::zero(); n];
    km.entries.tr_mul_vec(&inv_d, &mut q);
    for (j, qj) in q.iter_mut().enumerate() {
        *qj /= nf;
        if !(*qj > T::zero()) {
            return Err(Error::ZeroDegree { row: j });
        }
    }
    let sqrt_q: Vec<T> = q.iter().map(|x| x.sqrt()).collect();
    let ktilde = km.entries.map_entries(|i, j, v| v / (d[i] * sqrt_q[j]));
    Ok(NormalizedKernel {
        d: DVector::from_vec(d),
        q: DVector::from_vec(q),
        ktilde,
        epsilon: km.epsilon,
        delays: km.delays,
    })
}

impl<T: Real> NormalizedKernel<T> {
    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// The matrix of `psi -> (1/N') K~ psi`.
    pub fn scaled_operator_dense(&self) -> DMatrix<T> {
        self.ktilde.to_dense() / T::from_usize_lossy(self.n())
    }
}

/// `(1/N') K~` as a matrix-free operator.
struct ScaledKernel<'a, T: Real> {
    entries: &'a KernelEntries<T>,
    inv_n: T,
}

impl<T: Real> LinearOperator<T> for ScaledKernel<'_, T> {
    fn nrows(&self) -> usize {
        self.entries.n()
    }

    fn ncols(&self) -> usize {
        self.entries.n()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.entries.mul_vec(x, y);
        y.iter_mut().for_each(|v| *v *= self.inv_n);
    }

    fn apply_transpose(&self, x: &[T], y: &mut [T]) {
        self.entries.tr_mul_vec(x, y);
        y.iter_mut().for_each(|v| *v *= self.inv_n);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SvdSolver {
    /// Matrix-free Golub-Kahan-Lanczos.
    #[default]
    Lanczos,
    /// Full decomposition of the materialized operator.
    Dense,
}

/// Leading singular triples of `(1/N') K~` under the empirical inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBasis<T: Real> {
    /// `lambda_l = sigma_l^2`, decreasing, `lambda_1 = 1`.
    pub lambdas: Vec<T>,
    pub sigmas: Vec<T>,
    /// `N' x L`; column `l` is `phi_l` with `(1/N') |phi_l|^2 = 1`.
    pub phis: DMatrix<T>,
    /// `N' x L`; column `l` is `gamma_l` with `(1/N') |gamma_l|^2 = 1`.
    pub gammas: DMatrix<T>,
    pub d: DVector<T>,
    pub q: DVector<T>,
    pub epsilon: T,
    pub delays: usize,
}

impl<T: Real> KernelBasis<T> {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn n_states(&self) -> usize {
        self.phis.nrows()
    }

    /// The first `l` triples.
    pub fn truncated(&self, l: usize) -> Self {
        let l = l.min(self.len());
        Self {
            lambdas: self.lambdas[..l].to_vec(),
            sigmas: self.sigmas[..l].to_vec(),
            phis: self.phis.columns(0, l).into_owned(),
            gammas: self.gammas.columns(0, l).into_owned(),
            ..self.clone()
        }
    }
}

/// Computes the top `l` singular triples of the normalized kernel operator.
///
/// Fewer than `l` triples are returned (with a warning) when the operator's
/// numerical rank is lower or when trailing eigenvalues fall under
/// `LAMBDA_FLOOR * lambda_1`.
pub fn kernel_eigenbasis<T: Real>(
    nk: &NormalizedKernel<T>,
    l: usize,
    solver: SvdSolver,
) -> Result<KernelBasis<T>> {
    kernel_eigenbasis_seeded(nk, l, solver, LanczosOptions::default().seed)
}

/// [`kernel_eigenbasis`] with an explicit seed for the Lanczos start vector.
pub fn kernel_eigenbasis_seeded<T: Real>(
    nk: &NormalizedKernel<T>,
    l: usize,
    solver: SvdSolver,
    seed: u64,
) -> Result<KernelBasis<T>> {
    let n = nk.n();
    if l == 0 {
        return Err(Error::InvalidArgument("need at least one eigenpair".into()));
    }
    let requested = l;
    let l = if l > n {
        warn!("requested {l} eigenpairs but only {n} states; truncating");
        n
    } else {
        l
    };
    let svd: TruncatedSvd<T> = match solver {
        SvdSolver::Dense => dense_svd(&nk.scaled_operator_dense(), l),
        SvdSolver::Lanczos => lanczos_svd(
            &ScaledKernel {
                entries: &nk.ktilde,
                inv_n: T::one() / T::from_usize_lossy(n),
            },
            l,
            &LanczosOptions {
                seed,
                ..LanczosOptions::default()
            },
        ),
    };
    let top = svd.singular_values.first().copied().unwrap_or(T::zero());
    let floor = T::lit(LAMBDA_FLOOR) * top * top;
    let keep = svd
        .singular_values
        .iter()
        .take_while(|&&s| s * s >= floor && s > T::zero())
        .count();
    if keep < requested {
        warn!("kept {keep} of {requested} requested eigenpairs (numerical rank / eigenvalue floor)");
    }
    let root_n = T::from_usize_lossy(n).sqrt();
    let mut phis = svd.left.columns(0, keep) * root_n;
    let mut gammas = svd.right.columns(0, keep) * root_n;
    fix_signs(&mut phis, &mut gammas);
    let sigmas = svd.singular_values[..keep].to_vec();
    Ok(KernelBasis {
        lambdas: sigmas.iter().map(|s| *s * *s).collect(),
        sigmas,
        phis,
        gammas,
        d: nk.d.clone(),
        q: nk.q.clone(),
        epsilon: nk.epsilon,
        delays: nk.delays,
    })
}

/// Makes the first entry of each `phi` column with magnitude above `1e-12`
/// positive, flipping the paired `gamma` column along with it.
fn fix_signs<T: Real>(phis: &mut DMatrix<T>, gammas: &mut DMatrix<T>) {
    let threshold = T::lit(1e-12);
    for c in 0..phis.ncols() {
        let flip = phis
            .column(c)
            .iter()
            .find(|v| v.abs() > threshold)
            .is_some_and(|v| *v < T::zero());
        if flip {
            phis.column_mut(c).neg_mut();
            gammas.column_mut(c).neg_mut();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{delay_embed, TimeSeries};

    /// `n` delay states of a noisy two-channel oscillation.
    fn ring(n: usize, k_noise: f64) -> EmbeddedSeries<f64> {
        let ts = TimeSeries::new(
            DMatrix::from_fn(n + 2, 2, |i, j| {
                let t = i as f64 * 0.37;
                if j == 0 {
                    t.cos() + k_noise * (i as f64 * 1.7).sin()
                } else {
                    (1.3 * t).sin()
                }
            }),
            1.0,
        )
        .unwrap();
        delay_embed(&ts, 2).unwrap()
    }

    #[test]
    fn diagonal_is_one_and_symmetric() {
        let emb = ring(40, 0.1);
        let km = gaussian_kernel_matrix(&emb, 0.5, 0.0, Storage::Dense).unwrap();
        for i in 0..40 {
            assert_eq!(km.get(i, i), 1.0);
            for j in 0..40 {
                assert!((km.get(i, j) - km.get(j, i)).abs() < 1e-14);
                assert!((0.0..=1.0).contains(&km.get(i, j)));
            }
        }
    }

    #[test]
    fn distance_equal_to_epsilon_gives_inverse_e() {
        let ts = TimeSeries::from_rows(&[vec![0.0], vec![0.7]], 1.0).unwrap();
        let emb = delay_embed(&ts, 0).unwrap();
        let km = gaussian_kernel_matrix(&emb, 0.49, 0.0, Storage::Dense).unwrap();
        assert!((km.get(0, 1) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((km.get(0, 1) - 0.3678794).abs() < 1e-7);
    }

    #[test]
    fn pruning_drops_exactly_the_far_pairs() {
        let emb = ring(60, 0.3);
        let eps = 0.4;
        let tau = 1e-8;
        let km = gaussian_kernel_matrix(&emb, eps, tau, Storage::Sparse).unwrap();
        let cutoff = eps * (1e8f64).ln();
        let mut expected = 0;
        for i in 0..60 {
            for j in 0..60 {
                let d2 = squared_distance(emb.state(i), emb.state(j));
                if d2 <= cutoff {
                    expected += 1;
                    assert!(km.get(i, j) >= tau);
                } else {
                    assert_eq!(km.get(i, j), 0.0);
                }
            }
        }
        assert_eq!(km.stored(), expected);
        assert!(expected < 3600, "test data should actually prune something");
    }

    #[test]
    fn invalid_parameters() {
        let emb = ring(5, 0.0);
        assert!(gaussian_kernel_matrix(&emb, 0.0, 0.0, Storage::Dense).is_err());
        assert!(gaussian_kernel_matrix(&emb, 1.0, 1.0, Storage::Sparse).is_err());
    }

    #[test]
    fn all_ones_kernel() {
        let km = KernelMatrix::from_dense(DMatrix::from_element(4, 4, 1.0f64), 1.0).unwrap();
        let nk = bistochastic_normalize(&km).unwrap();
        assert!(nk.d.iter().all(|&v| v == 1.0));
        assert!(nk.q.iter().all(|&v| v == 1.0));
        assert!(nk.ktilde.to_dense().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn two_by_two_by_hand() {
        let a = 0.3f64;
        let km = KernelMatrix::from_dense(DMatrix::from_row_slice(2, 2, &[1.0, a, a, 1.0]), 1.0).unwrap();
        let nk = bistochastic_normalize(&km).unwrap();
        let half = (1.0 + a) / 2.0;
        for i in 0..2 {
            assert!((nk.d[i] - half).abs() < 1e-15);
            assert!((nk.q[i] - 1.0).abs() < 1e-15);
        }
        let kt = nk.ktilde.to_dense();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, a, a, 1.0]) * (2.0 / (1.0 + a));
        assert!((kt - expected).amax() < 1e-15);
    }

    #[test]
    fn zero_row_is_reported() {
        let km = KernelMatrix::from_dense(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]), 1.0).unwrap();
        assert!(matches!(bistochastic_normalize(&km), Err(Error::ZeroDegree { row: 1 })));
    }

    #[test]
    fn left_degrees_average_to_one() {
        let emb = ring(70, 0.2);
        let km = gaussian_kernel_matrix(&emb, 0.8, 0.0, Storage::Dense).unwrap();
        let nk = bistochastic_normalize(&km).unwrap();
        // Oracle: (1/N^2) sum_i sum_j K_ij / d_i, summed directly.
        let n = 70;
        let mut total = 0.0;
        for i in 0..n {
            let di: f64 = (0..n).map(|j| km.get(i, j)).sum::<f64>() / n as f64;
            for j in 0..n {
                total += km.get(i, j) / di;
            }
        }
        assert!((total / (n * n) as f64 - 1.0).abs() < 1e-12);
        assert!((nk.q.mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_q_maps_to_constant() {
        let emb = ring(50, 0.2);
        let km = gaussian_kernel_matrix(&emb, 0.8, 0.0, Storage::Dense).unwrap();
        let nk = bistochastic_normalize(&km).unwrap();
        let m = nk.scaled_operator_dense();
        let sq = nk.q.map(|v| v.sqrt());
        let out = m * sq;
        assert!(out.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn basis_normalizations() {
        let emb = ring(90, 0.2);
        let km = gaussian_kernel_matrix(&emb, 0.8, 0.0, Storage::Dense).unwrap();
        let nk = bistochastic_normalize(&km).unwrap();
        for solver in [SvdSolver::Lanczos, SvdSolver::Dense] {
            let b = kernel_eigenbasis(&nk, 12, solver).unwrap();
            assert!((b.sigmas[0] - 1.0).abs() < 1e-10);
            assert!(b.phis.column(0).iter().all(|v| (v - 1.0).abs() < 1e-8));
            for n in 0..90 {
                assert!((b.gammas[(n, 0)] - b.q[n].sqrt()).abs() < 1e-8);
            }
            let nf = 90.0;
            let gp = b.phis.transpose() * &b.phis / nf;
            let gg = b.gammas.transpose() * &b.gammas / nf;
            let id = DMatrix::identity(b.len(), b.len());
            assert!((gp - &id).amax() < 1e-8);
            assert!((gg - &id).amax() < 1e-8);
            assert!(b.lambdas.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn requesting_more_than_n_truncates() {
        let emb = ring(12, 0.2);
        let km = gaussian_kernel_matrix(&emb, 0.8, 0.0, Storage::Dense).unwrap();
        let nk = bistochastic_normalize(&km).unwrap();
        let b = kernel_eigenbasis(&nk, 40, SvdSolver::Lanczos).unwrap();
        assert!(b.len() <= 12);
        assert!(b.lambdas.iter().all(|&l| l >= LAMBDA_FLOOR));
    }

    #[test]
    fn dense_and_sparse_agree_without_pruning() {
        let emb = ring(60, 0.2);
        let dense = gaussian_kernel_matrix(&emb, 0.8, 0.0, Storage::Dense).unwrap();
        let sparse = gaussian_kernel_matrix(&emb, 0.8, 0.0, Storage::Sparse).unwrap();
        let bd = kernel_eigenbasis(&bistochastic_normalize(&dense).unwrap(), 8, SvdSolver::Lanczos).unwrap();
        let bs = kernel_eigenbasis(&bistochastic_normalize(&sparse).unwrap(), 8, SvdSolver::Lanczos).unwrap();
        for (a, b) in bd.lambdas.iter().zip(&bs.lambdas) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn runs_in_single_precision() {
        let emb = ring(40, 0.2);
        let ts32 = TimeSeries::new(
            DMatrix::from_fn(emb.len(), emb.dim(), |i, j| emb.state(i)[j] as f32),
            1.0f32,
        )
        .unwrap();
        let emb32 = delay_embed(&ts32, 0).unwrap();
        let km = gaussian_kernel_matrix(&emb32, 0.8f32, 0.0, Storage::Dense).unwrap();
        let b = kernel_eigenbasis(&bistochastic_normalize(&km).unwrap(), 5, SvdSolver::Lanczos).unwrap();
        assert!((b.sigmas[0] - 1.0).abs() < 1e-4);
    }
}
