//! Periodic / chaotic split of the training targets.
//!
//! The periodic part is a least-squares fit of `Re(F A) = Y` with
//! `F[n][j] = (2 - delta_{j0}) exp(i omega_j t_n)`; the residual is projected
//! onto the kernel eigenbasis under the empirical inner product.

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelBasis;
use crate::scalar::Real;
use crate::spectral::FrequencySet;

/// Relative size of an `R` diagonal entry below which the design is
/// treated as rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

fn column_weight<T: Real>(j: usize) -> T {
    if j == 0 {
        T::one()
    } else {
        T::lit(2.0)
    }
}

/// `F[n][j] = (2 - delta_{j0}) exp(i omega_j t_n)`.
pub fn build_fourier_matrix<T: Real>(freqs: &FrequencySet<T>, times: &[T]) -> DMatrix<Complex<T>> {
    DMatrix::from_fn(times.len(), freqs.len(), |n, j| {
        let phase = freqs.omegas[j] * times[n];
        let w = column_weight::<T>(j);
        Complex::new(w * phase.cos(), w * phase.sin())
    })
}

/// `Re(F A)` as an `N x k` real matrix.
pub fn real_product<T: Real>(f: &DMatrix<Complex<T>>, a: &DMatrix<Complex<T>>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(f.nrows(), a.ncols());
    for c in 0..a.ncols() {
        for j in 0..f.ncols() {
            let ajc = a[(j, c)];
            for n in 0..f.nrows() {
                let fnj = f[(n, j)];
                out[(n, c)] += fnj.re * ajc.re - fnj.im * ajc.im;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicModel<T: Real> {
    /// `m x k` coefficients in the convention of [`build_fourier_matrix`].
    pub a: DMatrix<Complex<T>>,
    pub freqs: FrequencySet<T>,
    /// Per-channel RMS of the residual `Y - Re(F A)` on the training data.
    pub residual_norm: Vec<T>,
}

impl<T: Real> HarmonicModel<T> {
    pub fn channels(&self) -> usize {
        self.a.ncols()
    }

    /// Periodic forcing at time `t`: `Re sum_j (2 - delta_{j0}) A_j e^{i omega_j t}`.
    ///
    /// The `(2 - delta)` weights are the ones used by the fit, so at a
    /// training time this reproduces the corresponding row of `Re(F A)`.
    pub fn eval_gper(&self, t: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.channels()];
        self.eval_gper_into(t, &mut out);
        out
    }

    pub fn eval_gper_into(&self, t: T, out: &mut [T]) {
        out.iter_mut().for_each(|v| *v = T::zero());
        for (j, &omega) in self.freqs.omegas.iter().enumerate() {
            let phase = omega * t;
            let w = column_weight::<T>(j);
            let (s, c) = (phase.sin(), phase.cos());
            for (ch, o) in out.iter_mut().enumerate() {
                let a = self.a[(j, ch)];
                *o += w * (a.re * c - a.im * s);
            }
        }
    }
}

/// Least-squares solution of `Re(F A) = Y`.
///
/// The complex problem is solved as the equivalent real one: each nonzero
/// frequency contributes the unknowns `Re A_j` and `Im A_j` with design
/// columns `Re F_j` and `-Im F_j`. A sine column that vanishes on the
/// sampling grid (the Nyquist bin) is dropped and `Im A_j` set to zero.
pub fn fit_periodic<T: Real>(
    y: &DMatrix<T>,
    freqs: &FrequencySet<T>,
    f: &DMatrix<Complex<T>>,
) -> Result<HarmonicModel<T>> {
    let (n, k) = (y.nrows(), y.ncols());
    let m = freqs.len();
    if f.nrows() != n || f.ncols() != m {
        return Err(Error::Shape(format!(
            "Fourier matrix is {}x{}, expected {n}x{m}",
            f.nrows(),
            f.ncols()
        )));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("frequency set is empty".into()));
    }
    if n < 2 * m - 1 {
        return Err(Error::InvalidArgument(format!(
            "{m} frequencies need at least {} samples, got {n}",
            2 * m - 1
        )));
    }

    // (frequency index, is imaginary part)
    let mut unknowns: Vec<(usize, bool)> = Vec::with_capacity(2 * m);
    let mut columns: Vec<Vec<T>> = Vec::with_capacity(2 * m);
    for j in 0..m {
        let re: Vec<T> = f.column(j).iter().map(|c| c.re).collect();
        let im: Vec<T> = f.column(j).iter().map(|c| -c.im).collect();
        let re_norm = crate::scalar::norm(&re);
        let im_norm = crate::scalar::norm(&im);
        columns.push(re);
        unknowns.push((j, false));
        if j > 0 && im_norm > T::lit(RANK_TOLERANCE) * re_norm.max(im_norm) {
            columns.push(im);
            unknowns.push((j, true));
        }
    }
    let p = columns.len();
    let design = DMatrix::from_fn(n, p, |r, c| columns[c][r]);

    let qr = design.qr();
    let r = qr.r();
    let max_diag = (0..p).map(|i| r[(i, i)].abs()).fold(T::zero(), |a, b| a.max(b));
    if let Some(bad) = (0..p).find(|&i| !(r[(i, i)].abs() > T::lit(RANK_TOLERANCE) * max_diag)) {
        let j = unknowns[bad].0;
        let omega = freqs.omegas[j];
        let other = (0..m)
            .filter(|&i| i != j)
            .min_by(|&a, &b| {
                (freqs.omegas[a] - omega)
                    .abs()
                    .partial_cmp(&(freqs.omegas[b] - omega).abs())
                    .expect("finite frequencies")
            })
            .unwrap_or(j);
        let (first, second) = if other < j { (other, j) } else { (j, other) };
        return Err(Error::RankDeficient {
            first: freqs.omegas[first].as_f64(),
            second: freqs.omegas[second].as_f64(),
        });
    }
    let rhs = qr.q().tr_mul(y);
    let x = r
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::NonFinite("triangular solve in harmonic fit".into()))?;

    let mut a = DMatrix::from_element(m, k, Complex::new(T::zero(), T::zero()));
    for (row, &(j, imag)) in unknowns.iter().enumerate() {
        for c in 0..k {
            if imag {
                a[(j, c)].im = x[(row, c)];
            } else {
                a[(j, c)].re = x[(row, c)];
            }
        }
    }
    let resid = y - real_product(f, &a);
    let nf = T::from_usize_lossy(n);
    let residual_norm = resid
        .column_iter()
        .map(|col| (col.iter().map(|v| *v * *v).sum::<T>() / nf).sqrt())
        .collect();
    Ok(HarmonicModel {
        a,
        freqs: freqs.clone(),
        residual_norm,
    })
}

/// `Y_non = Y - Re(F A)`.
pub fn periodic_residual<T: Real>(
    y: &DMatrix<T>,
    harmonic: &HarmonicModel<T>,
    f: &DMatrix<Complex<T>>,
) -> Result<DMatrix<T>> {
    if f.nrows() != y.nrows() || f.ncols() != harmonic.a.nrows() || y.ncols() != harmonic.a.ncols() {
        return Err(Error::Shape(format!(
            "Y is {}x{}, F is {}x{}, A is {}x{}",
            y.nrows(),
            y.ncols(),
            f.nrows(),
            f.ncols(),
            harmonic.a.nrows(),
            harmonic.a.ncols()
        )));
    }
    Ok(y - real_product(f, &harmonic.a))
}

/// Eigenbasis coefficients of the non-periodic residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaoticCoefficients<T: Real> {
    /// `L x k`; `Phi E` is the empirical projection of `Y_non` on span(Phi).
    pub e: DMatrix<T>,
}

/// `E = (1/N') Phi^T Y_non`.
pub fn chaotic_coefficients<T: Real>(
    y: &DMatrix<T>,
    harmonic: &HarmonicModel<T>,
    basis: &KernelBasis<T>,
    f: &DMatrix<Complex<T>>,
) -> Result<ChaoticCoefficients<T>> {
    if basis.n_states() != y.nrows() {
        return Err(Error::Shape(format!(
            "basis has {} states, Y has {} rows",
            basis.n_states(),
            y.nrows()
        )));
    }
    let y_non = periodic_residual(y, harmonic, f)?;
    let e = basis.phis.tr_mul(&y_non) / T::from_usize_lossy(y.nrows());
    Ok(ChaoticCoefficients { e })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::PI;

    fn times(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn fourier_matrix_entries() {
        let freqs = FrequencySet::from_omegas(&[0.0, 0.3, PI], 100, 1.0).unwrap();
        let f = build_fourier_matrix(&freqs, &times(8, 1.0));
        for n in 0..8 {
            assert_eq!(f[(n, 0)], Complex::new(1.0, 0.0));
            assert!((f[(n, 1)].norm() - 2.0).abs() < 1e-14);
            let expected = if n % 2 == 0 { 2.0 } else { -2.0 };
            assert!((f[(n, 2)].re - expected).abs() < 1e-12);
            assert!(f[(n, 2)].im.abs() < 1e-12);
        }
    }

    #[test]
    fn mean_only_fit_is_the_column_mean() {
        let y = DMatrix::from_row_slice(4, 2, &[1.0, 10.0, 2.0, 20.0, 3.0, 30.0, 6.0, 0.0]);
        let freqs = FrequencySet::from_bins(&[], 4, 1.0).unwrap();
        let f = build_fourier_matrix(&freqs, &times(4, 1.0));
        let h = fit_periodic(&y, &freqs, &f).unwrap();
        assert!((h.a[(0, 0)].re - 3.0).abs() < 1e-14);
        assert!((h.a[(0, 1)].re - 15.0).abs() < 1e-14);
        assert_eq!(h.a[(0, 0)].im, 0.0);
        assert_eq!(h.eval_gper(123.4), vec![h.a[(0, 0)].re, h.a[(0, 1)].re]);
    }

    #[test]
    fn exact_sinusoid_is_recovered() {
        let n = 200;
        let dt = 0.1;
        let omega = 2.0 * PI * 7.0 / (n as f64 * dt);
        let t = times(n, dt);
        let y = DMatrix::from_fn(n, 1, |i, _| 3.0 * (omega * t[i]).cos() - 4.0 * (omega * t[i]).sin());
        let freqs = FrequencySet::from_bins(&[7], n, dt).unwrap();
        let f = build_fourier_matrix(&freqs, &t);
        let h = fit_periodic(&y, &freqs, &f).unwrap();
        assert!(h.residual_norm[0] < 1e-10);
        // g_per(t) = 2 |A_1| cos(omega t + arg A_1) -> amplitude 5
        let amplitude = 2.0 * h.a[(1, 0)].norm();
        assert!((amplitude - 5.0).abs() < 1e-10);
        assert!(h.a[(0, 0)].re.abs() < 1e-10);
        assert!(h.a[(0, 0)].im.abs() < 1e-10);
    }

    #[test]
    fn off_grid_frequency_fit() {
        let n = 300;
        let omega = 0.4321;
        let t = times(n, 1.0);
        let y = DMatrix::from_fn(n, 2, |i, c| 1.5 + (c as f64 + 1.0) * (omega * t[i] + 0.3).sin());
        let freqs = FrequencySet::from_omegas(&[0.0, omega], n, 1.0).unwrap();
        let f = build_fourier_matrix(&freqs, &t);
        let h = fit_periodic(&y, &freqs, &f).unwrap();
        assert!(h.residual_norm.iter().all(|&r| r < 1e-10));
        let resid = periodic_residual(&y, &h, &f).unwrap();
        for i in 0..n {
            let g = h.eval_gper(t[i]);
            for c in 0..2 {
                // decomposition identity through the evaluator
                assert!((g[c] + resid[(i, c)] - y[(i, c)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn white_noise_mean_fit() {
        let n = 4000;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let normal = Normal::new(2.0, 0.5).unwrap();
        let y = DMatrix::from_fn(n, 1, |_, _| normal.sample(&mut rng));
        let freqs = FrequencySet::from_bins(&[], n, 1.0).unwrap();
        let f = build_fourier_matrix(&freqs, &times(n, 1.0));
        let h = fit_periodic(&y, &freqs, &f).unwrap();
        let mean = y.mean();
        let std = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!((h.a[(0, 0)].re - mean).abs() < 1e-12);
        assert!((h.residual_norm[0] - std).abs() / std < 0.05);
        assert!((h.residual_norm[0] - 0.5).abs() / 0.5 < 0.05);
    }

    #[test]
    fn duplicate_frequencies_are_rejected() {
        let n = 100;
        let t = times(n, 1.0);
        let freqs = FrequencySet::from_omegas(&[0.0, 0.5, 0.5 + 1e-14], n, 1.0).unwrap();
        let f = build_fourier_matrix(&freqs, &t);
        let y = DMatrix::from_fn(n, 1, |i, _| (0.5 * t[i]).cos());
        match fit_periodic(&y, &freqs, &f) {
            Err(Error::RankDeficient { first, second }) => {
                assert!((first - 0.5).abs() < 1e-12 && (second - 0.5).abs() < 1e-12);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn nyquist_bin_is_fitted() {
        let n = 16;
        let t = times(n, 1.0);
        let y = DMatrix::from_fn(n, 1, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
        let freqs = FrequencySet::from_bins(&[8], n, 1.0).unwrap();
        let f = build_fourier_matrix(&freqs, &t);
        let h = fit_periodic(&y, &freqs, &f).unwrap();
        assert!(h.residual_norm[0] < 1e-12);
    }

    #[test]
    fn too_few_samples() {
        let freqs = FrequencySet::from_bins(&[1, 2], 10, 1.0).unwrap();
        let t = times(4, 1.0);
        let f = build_fourier_matrix(&freqs, &t);
        let y = DMatrix::zeros(4, 1);
        assert!(matches!(fit_periodic(&y, &freqs, &f), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn gper_periodicity_and_origin() {
        let freqs = FrequencySet::from_omegas(&[0.0, 0.7], 10, 1.0).unwrap();
        let a = DMatrix::from_row_slice(2, 1, &[Complex::new(0.25, 0.0), Complex::new(0.3, -0.8)]);
        let h = HarmonicModel { a, freqs, residual_norm: vec![0.0] };
        let g0: f64 = h.eval_gper(0.0)[0];
        assert!((g0 - (0.25 + 2.0 * 0.3)).abs() < 1e-15);
        let period = 2.0 * PI / 0.7;
        for t in [0.0, 0.37, 5.1] {
            assert!((h.eval_gper(t)[0] - h.eval_gper(t + period)[0]).abs() < 1e-12);
        }
    }

    fn orthonormal_basis(n: usize, l: usize) -> KernelBasis<f64> {
        // cos/sin columns are orthonormal under the 1/N inner product
        let phis = DMatrix::from_fn(n, l, |i, c| {
            if c == 0 {
                1.0
            } else {
                let j = c.div_ceil(2) as f64;
                let a = 2.0 * PI * j * i as f64 / n as f64;
                2f64.sqrt() * if c % 2 == 1 { a.cos() } else { a.sin() }
            }
        });
        KernelBasis {
            lambdas: vec![1.0; l],
            sigmas: vec![1.0; l],
            gammas: phis.clone(),
            phis,
            d: DVector::from_element(n, 1.0),
            q: DVector::from_element(n, 1.0),
            epsilon: 1.0,
            delays: 0,
        }
    }

    #[test]
    fn periodic_signal_leaves_no_chaotic_part() {
        let n = 64;
        let t = times(n, 1.0);
        let freqs = FrequencySet::from_bins(&[3, 5], n, 1.0).unwrap();
        let y = DMatrix::from_fn(n, 2, |i, c| {
            0.5 + (freqs.omegas[1] * t[i]).cos() + c as f64 * (freqs.omegas[2] * t[i] + 1.0).sin()
        });
        let f = build_fourier_matrix(&freqs, &t);
        let h = fit_periodic(&y, &freqs, &f).unwrap();
        let e = chaotic_coefficients(&y, &h, &orthonormal_basis(n, 9), &f).unwrap();
        assert!(e.e.amax() < 1e-8);
        let resid = periodic_residual(&y, &h, &f).unwrap();
        assert!(resid.column_iter().all(|c| c.mean().abs() < 1e-8));
    }

    #[test]
    fn residual_along_one_eigenvector() {
        let n = 64;
        let t = times(n, 1.0);
        let basis = orthonormal_basis(n, 7);
        let freqs = FrequencySet::from_bins(&[], n, 1.0).unwrap();
        let c = -1.75;
        let y = DMatrix::from_fn(n, 1, |i, _| c * basis.phis[(i, 1)]);
        let f = build_fourier_matrix(&freqs, &t);
        let h = fit_periodic(&y, &freqs, &f).unwrap();
        let e = chaotic_coefficients(&y, &h, &basis, &f).unwrap();
        assert!((e.e[(1, 0)] - c).abs() < 1e-12);
        for l in [0, 2, 3, 4, 5, 6] {
            assert!(e.e[(l, 0)].abs() < 1e-12);
        }
    }

    #[test]
    fn projection_error_shrinks_with_more_eigenvectors() {
        let n = 64;
        let t = times(n, 1.0);
        let full = orthonormal_basis(n, 15);
        let y = DMatrix::from_fn(n, 1, |i, _| ((i * i) as f64 * 0.013).sin() + 0.2 * i as f64);
        let freqs = FrequencySet::from_bins(&[], n, 1.0).unwrap();
        let f = build_fourier_matrix(&freqs, &t);
        let h = fit_periodic(&y, &freqs, &f).unwrap();
        let y_non = periodic_residual(&y, &h, &f).unwrap();
        let mut last = f64::INFINITY;
        for l in 1..=15 {
            let b = full.truncated(l);
            let e = chaotic_coefficients(&y, &h, &b, &f).unwrap();
            let err = (&y_non - &b.phis * &e.e).norm();
            assert!(err <= last + 1e-12);
            last = err;
        }
    }

    #[test]
    fn least_squares_optimality() {
        let n = 120;
        let t = times(n, 1.0);
        let freqs = FrequencySet::from_bins(&[4, 9], n, 1.0).unwrap();
        let y = DMatrix::from_fn(n, 1, |i, _| ((i as f64) * 0.41).sin() + 0.3 * (i as f64 * 0.05).cos());
        let f = build_fourier_matrix(&freqs, &t);
        let h = fit_periodic(&y, &freqs, &f).unwrap();
        let base = (&y - real_product(&f, &h.a)).norm();
        for j in 0..3 {
            for imag in [false, true] {
                if j == 0 && imag {
                    continue;
                }
                for delta in [1e-3, -1e-3] {
                    let mut a = h.a.clone();
                    if imag {
                        a[(j, 0)].im += delta;
                    } else {
                        a[(j, 0)].re += delta;
                    }
                    assert!((&y - real_product(&f, &a)).norm() >= base);
                }
            }
        }
    }
}
