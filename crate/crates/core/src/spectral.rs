//! Koopman eigenfrequency identification from the kernel eigenbasis.
//!
//! Each eigenvector column is Fourier transformed, weighted by
//! `lambda^{-1/2}`, and accumulated over the spectral index into a score
//! matrix `W`. A frequency bin survives when its score over the first `L0`
//! eigenvectors is significant (`>= eps1`) and the score does not keep
//! growing much when the remaining eigenvectors are added
//! (`ln W[L] - ln W[L0] <= eps2`).

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelBasis;
use crate::scalar::{modulus, Real};

/// Normalization of the discrete Fourier transform used for scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DftNorm {
    /// `1/sqrt(N')`, so a column of unit empirical norm has `sum |X_j|^2 = N'`.
    Unitary,
}

#[derive(Debug, Clone)]
pub struct ScoreMatrix<T: Real> {
    /// `N' x L`, cumulative over columns.
    pub w: DMatrix<T>,
    /// `N' x L`, `DFT(phi_l) / sqrt(lambda_l)`.
    pub h: DMatrix<Complex<T>>,
    pub dft_norm: DftNorm,
}

impl<T: Real> ScoreMatrix<T> {
    pub fn n_bins(&self) -> usize {
        self.w.nrows()
    }

    pub fn n_eigs(&self) -> usize {
        self.w.ncols()
    }
}

/// Scores every DFT bin against every spectral truncation level.
pub fn frequency_scores<T: Real>(basis: &KernelBasis<T>) -> Result<ScoreMatrix<T>> {
    let n = basis.n_states();
    let l = basis.len();
    if l < 2 {
        return Err(Error::InvalidArgument(format!(
            "frequency scoring needs at least 2 eigenvectors, basis has {l}"
        )));
    }
    let fft = FftPlanner::<T>::new().plan_fft_forward(n);
    let norm = T::one() / T::from_usize_lossy(n).sqrt();
    let mut h = DMatrix::from_element(n, l, Complex::new(T::zero(), T::zero()));
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
    for c in 0..l {
        for (b, &v) in buf.iter_mut().zip(basis.phis.column(c).iter()) {
            *b = Complex::new(v, T::zero());
        }
        fft.process(&mut buf);
        let w = norm / basis.sigmas[c];
        for (dst, &x) in h.column_mut(c).iter_mut().zip(&buf) {
            *dst = x * w;
        }
    }
    let mut w = DMatrix::zeros(n, l);
    for r in 0..n {
        let mut acc = T::zero();
        for c in 0..l {
            acc += modulus(h[(r, c)]);
            w[(r, c)] = acc;
        }
    }
    Ok(ScoreMatrix {
        w,
        h,
        dft_norm: DftNorm::Unitary,
    })
}

/// Thresholds of the two-stage frequency filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams<T> {
    pub eps1: T,
    pub eps2: T,
    /// One-based truncation level at which significance is tested.
    pub l0: usize,
    /// Drop bin 1 (the `1/(N' dt)` artifact of finite records).
    #[serde(default)]
    pub drop_bin1: bool,
    /// Compare `eps1` against `W[j, L0] / max_j W[j, L0]` instead of the raw score.
    #[serde(default)]
    pub normalize: bool,
}

/// Selected eigenfrequencies `0 = omega_1 < omega_2 < ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet<T: Real> {
    /// Angular frequencies in radians per time unit.
    pub omegas: Vec<T>,
    /// DFT bins; bin 0 is the mean term.
    pub bins: Vec<usize>,
    /// Length of the transformed record.
    pub n_samples: usize,
    pub dt: T,
    pub params: Option<SelectionParams<T>>,
}

/// One row of a frequency report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub bin: usize,
    pub omega: f64,
    /// Period in samples, `N'/bin`; absent for the mean term.
    pub period_samples: Option<f64>,
    /// Period in time units, `2 pi / omega`.
    pub period_time: Option<f64>,
}

impl<T: Real> FrequencySet<T> {
    /// Builds a set directly from DFT bins (`0` is always added).
    pub fn from_bins(bins: &[usize], n_samples: usize, dt: T) -> Result<Self> {
        let mut b: Vec<usize> = bins.to_vec();
        b.push(0);
        b.sort_unstable();
        b.dedup();
        if let Some(&bad) = b.iter().find(|&&j| 2 * j > n_samples) {
            return Err(Error::InvalidArgument(format!(
                "bin {bad} lies above the folding limit {}",
                n_samples / 2
            )));
        }
        Ok(Self {
            omegas: b.iter().map(|&j| bin_to_omega(j, n_samples, dt)).collect(),
            bins: b,
            n_samples,
            dt,
            params: None,
        })
    }

    /// Builds a set from arbitrary angular frequencies (bins are the
    /// nearest grid points and only informative).
    pub fn from_omegas(omegas: &[T], n_samples: usize, dt: T) -> Result<Self> {
        if omegas.first().is_none_or(|w| *w != T::zero()) {
            return Err(Error::InvalidArgument("the first frequency must be 0".into()));
        }
        if omegas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("frequencies must be strictly increasing".into()));
        }
        let per_bin = T::two_pi() / (T::from_usize_lossy(n_samples) * dt);
        Ok(Self {
            omegas: omegas.to_vec(),
            bins: omegas
                .iter()
                .map(|w| (*w / per_bin).round().to_usize().unwrap_or(0))
                .collect(),
            n_samples,
            dt,
            params: None,
        })
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn report(&self) -> Vec<FrequencyRow> {
        let dt = self.dt.as_f64();
        self.bins
            .iter()
            .zip(&self.omegas)
            .map(|(&bin, &omega)| {
                let omega = omega.as_f64();
                let (ps, pt) = if omega > 0.0 {
                    let period_time = std::f64::consts::TAU / omega;
                    (Some(period_time / dt), Some(period_time))
                } else {
                    (None, None)
                };
                FrequencyRow {
                    bin,
                    omega,
                    period_samples: ps,
                    period_time: pt,
                }
            })
            .collect()
    }
}

pub fn bin_to_omega<T: Real>(bin: usize, n_samples: usize, dt: T) -> T {
    T::two_pi() * T::from_usize_lossy(bin) / (T::from_usize_lossy(n_samples) * dt)
}

/// Applies the two thresholds and converts surviving bins to frequencies.
///
/// Only bins `0..=N'/2` are tested; for real data bin `N' - j` scores the
/// same as bin `j`. Bin 0 is always part of the output.
pub fn select_frequencies<T: Real>(
    scores: &ScoreMatrix<T>,
    params: &SelectionParams<T>,
    dt: T,
) -> Result<FrequencySet<T>> {
    let l = scores.n_eigs();
    if !(params.l0 > 1 && params.l0 < l) {
        return Err(Error::InvalidArgument(format!(
            "L0 must satisfy 1 < L0 < L = {l}, got {}",
            params.l0
        )));
    }
    if !(dt > T::zero()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let half = scores.n_bins() / 2;
    let scale = if params.normalize {
        (1..=half)
            .map(|j| scores.w[(j, params.l0 - 1)])
            .fold(T::zero(), |a, b| a.max(b))
    } else {
        T::one()
    };
    let bins: Vec<usize> = (1..=half)
        .filter(|&j| !(params.drop_bin1 && j == 1))
        .filter(|&j| bin_survives(scores, j, params, scale))
        .collect();
    let mut set = FrequencySet::from_bins(&bins, scores.n_bins(), dt)?;
    set.params = Some(*params);
    Ok(set)
}

fn bin_survives<T: Real>(scores: &ScoreMatrix<T>, j: usize, params: &SelectionParams<T>, scale: T) -> bool {
    let at_l0 = scores.w[(j, params.l0 - 1)];
    let at_l = scores.w[(j, scores.n_eigs() - 1)];
    at_l0 > T::zero() && at_l0 / scale >= params.eps1 && at_l.ln() - at_l0.ln() <= params.eps2
}

/// Candidate thresholds read off elbows of the score curves. Each list is
/// sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSuggestions {
    /// Elbows of `ln lambda_l` against `l` (one-based).
    pub l0: Vec<usize>,
    /// Elbows of the sorted significance scores `W[j, L0]`.
    pub eps1: Vec<f64>,
    /// Elbows of the sorted growth `ln W[j, L] - ln W[j, L0]`.
    pub eps2: Vec<f64>,
}

/// Elbow report used to help choose `L0`, `eps1` and `eps2`.
pub fn suggest_thresholds<T: Real>(
    scores: &ScoreMatrix<T>,
    lambdas: &[T],
    l0: usize,
) -> Result<ThresholdSuggestions> {
    let l = scores.n_eigs();
    if !(l0 > 1 && l0 < l) {
        return Err(Error::InvalidArgument(format!("L0 must satisfy 1 < L0 < {l}, got {l0}")));
    }
    let log_lambda: Vec<f64> = lambdas.iter().map(|v| v.as_f64().ln()).collect();
    let mut l0s: Vec<usize> = elbows(&log_lambda, 2)
        .into_iter()
        .map(|i| i + 1)
        .filter(|&c| c > 1 && c < l)
        .collect();
    l0s.sort_unstable();
    l0s.dedup();

    let half = scores.n_bins() / 2;
    let mut sig: Vec<f64> = (1..=half).map(|j| scores.w[(j, l0 - 1)].as_f64()).collect();
    sig.sort_by(|a, b| b.total_cmp(a));
    let sig_log: Vec<f64> = sig.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let mut eps1: Vec<f64> = elbows(&sig_log, 2).into_iter().map(|i| sig[i]).collect();
    eps1.sort_by(f64::total_cmp);
    eps1.dedup();

    let mut growth: Vec<f64> = (1..=half)
        .filter(|&j| scores.w[(j, l0 - 1)] > T::zero())
        .map(|j| (scores.w[(j, l - 1)].ln() - scores.w[(j, l0 - 1)].ln()).as_f64())
        .collect();
    growth.sort_by(f64::total_cmp);
    let mut eps2: Vec<f64> = elbows(&growth, 2).into_iter().map(|i| growth[i]).collect();
    eps2.sort_by(f64::total_cmp);
    eps2.dedup();

    Ok(ThresholdSuggestions { l0: l0s, eps1, eps2 })
}

/// Indices of points farthest from the chord of a curve, found recursively
/// (`depth` levels of bisection at each elbow).
fn elbows(y: &[f64], depth: usize) -> Vec<usize> {
    fn recurse(y: &[f64], lo: usize, hi: usize, depth: usize, out: &mut Vec<usize>) {
        if depth == 0 || hi <= lo + 1 {
            return;
        }
        let span_x = (hi - lo) as f64;
        let span_y = y[hi] - y[lo];
        let scale_y = y[lo..=hi]
            .iter()
            .fold(0.0f64, |m, v| m.max((v - y[lo]).abs()))
            .max(f64::MIN_POSITIVE);
        let mut best = (0.0, None);
        for i in (lo + 1)..hi {
            let t = (i - lo) as f64 / span_x;
            let chord = y[lo] + t * span_y;
            let dist = ((y[i] - chord) / scale_y).abs();
            if dist > best.0 {
                best = (dist, Some(i));
            }
        }
        if let Some(i) = best.1 {
            out.push(i);
            recurse(y, lo, i, depth - 1, out);
            recurse(y, i, hi, depth - 1, out);
        }
    }
    let mut out = Vec::new();
    if y.len() >= 3 && y.iter().all(|v| v.is_finite()) {
        recurse(y, 0, y.len() - 1, depth, &mut out);
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Result of the generator search over the selected bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorReport {
    /// Bins chosen as generators, in discovery order.
    pub generators: Vec<usize>,
    /// Heuristic quasiperiodicity dimension (`generators.len()`).
    pub dimension: usize,
    /// Bins not expressible once `max_generators` was reached.
    pub unexplained: Vec<usize>,
    pub max_coefficient: i64,
}

/// Greedy search for a small set of bins whose integer combinations (with
/// coefficients in `[-max_coefficient, max_coefficient]`) reproduce every
/// selected bin. Heuristic: the result depends on the visiting order and
/// the coefficient bound.
pub fn generator_heuristic<T: Real>(
    freqs: &FrequencySet<T>,
    max_coefficient: i64,
    max_generators: usize,
) -> GeneratorReport {
    let n = freqs.n_samples as i64;
    let mut generators: Vec<usize> = Vec::new();
    let mut unexplained = Vec::new();
    for &bin in freqs.bins.iter().filter(|&&b| b > 0) {
        if representable(bin as i64, &generators, max_coefficient, n) {
            continue;
        }
        if generators.len() < max_generators {
            generators.push(bin);
        } else {
            unexplained.push(bin);
        }
    }
    GeneratorReport {
        dimension: generators.len(),
        generators,
        unexplained,
        max_coefficient,
    }
}

fn representable(bin: i64, generators: &[usize], c: i64, n: i64) -> bool {
    fn go(bin: i64, gens: &[usize], c: i64, n: i64, acc: i64) -> bool {
        match gens.split_first() {
            None => {
                let r = acc.rem_euclid(n);
                r.min(n - r) == bin
            }
            Some((&g, rest)) => (-c..=c).any(|a| go(bin, rest, c, n, acc + a * g as i64)),
        }
    }
    !generators.is_empty() && go(bin, generators, c, n, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use std::f64::consts::PI;

    /// Basis whose columns are given explicitly (only what scoring reads).
    fn basis_from_columns(cols: Vec<Vec<f64>>, lambdas: Vec<f64>) -> KernelBasis<f64> {
        let n = cols[0].len();
        let l = cols.len();
        let phis = DMatrix::from_fn(n, l, |i, j| cols[j][i]);
        KernelBasis {
            sigmas: lambdas.iter().map(|v: &f64| v.sqrt()).collect(),
            lambdas,
            gammas: phis.clone(),
            phis,
            d: DVector::from_element(n, 1.0),
            q: DVector::from_element(n, 1.0),
            epsilon: 1.0,
            delays: 0,
        }
    }

    fn naive_dft_magnitudes(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|j| {
                let (mut re, mut im) = (0.0, 0.0);
                for (t, v) in x.iter().enumerate() {
                    let a = -2.0 * PI * (j * t) as f64 / n as f64;
                    re += v * a.cos();
                    im += v * a.sin();
                }
                (re * re + im * im).sqrt() / (n as f64).sqrt()
            })
            .collect()
    }

    #[test]
    fn constant_column_lives_on_bin_zero() {
        let n = 64;
        let cos: Vec<f64> = (0..n).map(|t| 2f64.sqrt() * (2.0 * PI * 5.0 * t as f64 / n as f64).cos()).collect();
        let b = basis_from_columns(vec![vec![1.0; n], cos], vec![1.0, 0.5]);
        let s = frequency_scores(&b).unwrap();
        assert!((s.h[(0, 0)].norm() - (n as f64).sqrt()).abs() < 1e-10);
        for j in 1..n {
            assert!(s.h[(j, 0)].norm() < 1e-10);
        }
        // cosine column: bins 5 and n-5 only
        let scale = 0.5f64.sqrt();
        for j in 0..n {
            let m = s.h[(j, 1)].norm() * scale;
            if j == 5 || j == n - 5 {
                assert!((m - (n as f64 / 2.0).sqrt()).abs() < 1e-9);
            } else {
                assert!(m < 1e-9);
            }
        }
    }

    #[test]
    fn scores_are_cumulative() {
        let n = 32;
        let cols: Vec<Vec<f64>> = (0..4)
            .map(|c| (0..n).map(|t| ((t * (c + 1)) as f64 * 0.7).sin() + 0.1 * c as f64).collect())
            .collect();
        let s = frequency_scores(&basis_from_columns(cols, vec![1.0, 0.6, 0.3, 0.1])).unwrap();
        for r in 0..n {
            assert!((s.w[(r, 0)] - s.h[(r, 0)].norm()).abs() < 1e-14);
            for c in 1..4 {
                assert!(s.w[(r, c)] >= s.w[(r, c - 1)]);
            }
        }
    }

    #[test]
    fn fft_matches_naive_dft() {
        let n = 50;
        let x: Vec<f64> = (0..n).map(|t| (t as f64 * 0.31).cos() + (t as f64).sqrt()).collect();
        let s = frequency_scores(&basis_from_columns(vec![x.clone(), x.clone()], vec![1.0, 1.0])).unwrap();
        for (j, m) in naive_dft_magnitudes(&x).into_iter().enumerate() {
            assert!((s.h[(j, 0)].norm() - m).abs() < 1e-10);
        }
    }

    #[test]
    fn conjugate_bins_score_equally() {
        let n = 40;
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|c| (0..n).map(|t| ((t * t + c) as f64 * 0.37).sin()).collect())
            .collect();
        let s = frequency_scores(&basis_from_columns(cols, vec![1.0, 0.5, 0.2])).unwrap();
        for j in 1..n {
            for c in 0..3 {
                assert!((s.w[(j, c)] - s.w[(n - j, c)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn huge_eps1_leaves_only_the_mean() {
        let n = 64;
        let cols: Vec<Vec<f64>> = (0..4)
            .map(|c| (0..n).map(|t| (2.0 * PI * (c * 3) as f64 * t as f64 / n as f64).cos()).collect())
            .collect();
        let s = frequency_scores(&basis_from_columns(cols, vec![1.0, 0.8, 0.5, 0.3])).unwrap();
        let params = SelectionParams { eps1: 1e9, eps2: 100.0, l0: 2, drop_bin1: false, normalize: false };
        let f = select_frequencies(&s, &params, 1.0).unwrap();
        assert_eq!(f.bins, vec![0]);
        assert_eq!(f.omegas, vec![0.0]);
    }

    #[test]
    fn selects_the_mode_frequencies() {
        let n = 128;
        let dt = 0.5;
        let mk = |j: usize| -> Vec<f64> {
            (0..n).map(|t| 2f64.sqrt() * (2.0 * PI * (j * t) as f64 / n as f64).cos()).collect()
        };
        let cols = vec![vec![1.0; n], mk(7), mk(12), mk(30)];
        let s = frequency_scores(&basis_from_columns(cols, vec![1.0, 0.9, 0.8, 0.001])).unwrap();
        let params = SelectionParams { eps1: 1.0, eps2: 1.0, l0: 3, drop_bin1: false, normalize: false };
        let f = select_frequencies(&s, &params, dt).unwrap();
        // Bin 30 only shows up beyond L0.
        assert_eq!(f.bins, vec![0, 7, 12]);
        assert!((f.omegas[1] - 2.0 * PI * 7.0 / (n as f64 * dt)).abs() < 1e-12);
        assert!(f.omegas.iter().all(|&w| w <= PI / dt));
    }

    #[test]
    fn rejects_bad_l0() {
        let n = 16;
        let s = frequency_scores(&basis_from_columns(vec![vec![1.0; n]; 3], vec![1.0, 0.5, 0.2])).unwrap();
        for l0 in [0, 1, 3, 4] {
            let params = SelectionParams { eps1: 0.1, eps2: 1.0, l0, drop_bin1: false, normalize: false };
            assert!(select_frequencies(&s, &params, 1.0).is_err());
        }
    }

    #[test]
    fn drop_bin1_flag() {
        let n = 64;
        let mk = |j: usize| -> Vec<f64> {
            (0..n).map(|t| (2.0 * PI * (j * t) as f64 / n as f64).cos()).collect()
        };
        let s = frequency_scores(&basis_from_columns(
            vec![vec![1.0; n], mk(1), mk(4), mk(9)],
            vec![1.0, 0.9, 0.8, 0.7],
        ))
        .unwrap();
        let mut params = SelectionParams { eps1: 0.5, eps2: 5.0, l0: 3, drop_bin1: false, normalize: false };
        assert!(select_frequencies(&s, &params, 1.0).unwrap().bins.contains(&1));
        params.drop_bin1 = true;
        assert!(!select_frequencies(&s, &params, 1.0).unwrap().bins.contains(&1));
    }

    #[test]
    fn normalized_scores_rescale_eps1() {
        let n = 64;
        let mk = |j: usize| -> Vec<f64> {
            (0..n).map(|t| (2.0 * PI * (j * t) as f64 / n as f64).cos()).collect()
        };
        let s = frequency_scores(&basis_from_columns(
            vec![vec![1.0; n], mk(3), mk(5), mk(11)],
            vec![1.0, 0.9, 0.5, 0.1],
        ))
        .unwrap();
        let max = (1..=n / 2).map(|j| s.w[(j, 2)]).fold(0.0, f64::max);
        for eps1 in [0.1, 0.5, 0.9, 1.0] {
            let norm = SelectionParams { eps1, eps2: 5.0, l0: 3, drop_bin1: false, normalize: true };
            let raw = SelectionParams { eps1: eps1 * max, normalize: false, ..norm };
            assert_eq!(
                select_frequencies(&s, &norm, 1.0).unwrap().bins,
                select_frequencies(&s, &raw, 1.0).unwrap().bins
            );
        }
    }

    #[test]
    fn report_periods() {
        let f = FrequencySet::from_bins(&[4, 8], 64, 0.25).unwrap();
        let rows = f.report();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].period_time.is_none());
        for r in &rows[1..] {
            let t = r.period_time.unwrap();
            assert!((t * r.omega - 2.0 * PI).abs() < 1e-12);
            assert!((r.period_samples.unwrap() - 64.0 / r.bin as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn suggestions_are_sorted() {
        let n = 64;
        let cols: Vec<Vec<f64>> = (0..12)
            .map(|c| (0..n).map(|t| ((t * (c + 1)) as f64 * 0.21).cos() + 0.05 * (t as f64 * c as f64).sin()).collect())
            .collect();
        let lambdas: Vec<f64> = (0..12).map(|c| (-(c as f64) * 0.9).exp()).collect();
        let s = frequency_scores(&basis_from_columns(cols, lambdas.clone())).unwrap();
        let sug = suggest_thresholds(&s, &lambdas, 6).unwrap();
        assert!(sug.l0.windows(2).all(|w| w[0] < w[1]));
        assert!(sug.eps1.windows(2).all(|w| w[0] < w[1]));
        assert!(sug.eps2.windows(2).all(|w| w[0] < w[1]));
        assert!(!sug.eps1.is_empty() && !sug.eps2.is_empty());
    }

    #[test]
    fn elbow_of_a_knee() {
        let y: Vec<f64> = (0..20).map(|i| if i < 5 { 10.0 - 2.0 * i as f64 } else { 0.0 }).collect();
        assert!(elbows(&y, 1).contains(&5));
    }

    #[test]
    fn generators_of_a_two_frequency_lattice() {
        let n = 4096;
        let bins = [21, 34, 55, 89, 110, 123, 144, 178];
        let f = FrequencySet::from_bins(&bins, n, 1.0).unwrap();
        let rep = generator_heuristic(&f, 5, 4);
        assert_eq!(rep.dimension, 2);
        assert_eq!(rep.generators, vec![21, 34]);
        assert!(rep.unexplained.is_empty());
    }

    #[test]
    fn from_omegas_validates() {
        assert!(FrequencySet::<f64>::from_omegas(&[0.1, 0.2], 10, 1.0).is_err());
        assert!(FrequencySet::<f64>::from_omegas(&[0.0, 0.2, 0.2], 10, 1.0).is_err());
        let f = FrequencySet::<f64>::from_omegas(&[0.0, 2.0 * PI * 3.0 / 10.0], 10, 1.0).unwrap();
        assert_eq!(f.bins, vec![0, 3]);
    }
}
