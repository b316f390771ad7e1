//! End-to-end analysis: raw series in, [`DecompositionModel`] out.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DecompositionModel, ModelMeta};
use crate::error::{Error, Result, Stage};
use crate::harmonic::{build_fourier_matrix, chaotic_coefficients, fit_periodic, ChaoticCoefficients, HarmonicModel};
use crate::ingest::{delay_embed, standardize, ChannelStats, EmbeddedSeries, ScaleMode, TimeSeries};
use crate::kernel::{
    bistochastic_normalize, gaussian_kernel_matrix, kernel_eigenbasis_seeded, KernelBasis, Storage, SvdSolver,
};
use crate::oos::ExtensionMode;
use crate::scalar::Real;
use crate::spectral::{frequency_scores, select_frequencies, FrequencySet, ScoreMatrix, SelectionParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct AnalyzeConfig<T: Real> {
    /// Number of delays `Q`.
    pub delays: usize,
    /// Kernel bandwidth; `0.01 k` when absent.
    pub epsilon: Option<T>,
    /// Number of eigenpairs `L`.
    pub num_eigs: usize,
    pub selection: SelectionParams<T>,
    /// Sparse-storage prune threshold `tau`.
    pub prune_tau: T,
    pub storage: Storage,
    pub solver: SvdSolver,
    /// `None` disables standardization.
    pub scale: Option<ScaleMode>,
    pub mode: ExtensionMode,
    pub seed: u64,
    /// Use these bins instead of running the frequency filter.
    pub fixed_bins: Option<Vec<usize>>,
}

impl<T: Real> Default for AnalyzeConfig<T> {
    fn default() -> Self {
        Self {
            delays: 8,
            epsilon: None,
            num_eigs: 100,
            selection: SelectionParams {
                eps1: T::lit(0.1),
                eps2: T::lit(3.0),
                l0: 20,
                drop_bin1: false,
                normalize: false,
            },
            prune_tau: T::zero(),
            storage: Storage::Dense,
            solver: SvdSolver::Lanczos,
            scale: Some(ScaleMode::StdDev),
            mode: ExtensionMode::Consistent,
            seed: 0,
            fixed_bins: None,
        }
    }
}

impl<T: Real> AnalyzeConfig<T> {
    pub fn epsilon_for(&self, channels: usize) -> T {
        self.epsilon
            .unwrap_or_else(|| T::lit(0.01) * T::from_usize_lossy(channels))
    }
}

/// Standardized training data laid out for the kernel and the fit.
#[derive(Debug, Clone)]
pub struct Prepared<T: Real> {
    pub stats: ChannelStats<T>,
    /// Standardized series.
    pub series: TimeSeries<T>,
    /// The `N' = N - Q - 1` states that have a successor sample.
    pub emb_train: EmbeddedSeries<T>,
    /// The last embedded state (no successor in the data).
    pub final_state: Vec<T>,
}

impl<T: Real> Prepared<T> {
    /// Time stamps of the training states' newest samples.
    pub fn times(&self) -> Vec<T> {
        (0..self.emb_train.len()).map(|i| self.emb_train.state_time(i)).collect()
    }

    /// `N' x k` one-step targets: row `i` is the sample after state `i`.
    pub fn targets(&self) -> DMatrix<T> {
        let v = self.series.values();
        DMatrix::from_fn(self.emb_train.len(), self.series.channels(), |i, c| {
            v[(self.emb_train.source_index(i) + 1, c)]
        })
    }
}

pub fn prepare<T: Real>(ts: &TimeSeries<T>, cfg: &AnalyzeConfig<T>) -> Result<Prepared<T>> {
    let inner = || -> Result<Prepared<T>> {
        if ts.len() < cfg.delays + 3 {
            return Err(Error::InvalidArgument(format!(
                "{} samples are too few for {} delays (need at least {})",
                ts.len(),
                cfg.delays,
                cfg.delays + 3
            )));
        }
        let (series, stats) = match cfg.scale {
            Some(mode) => standardize(ts, mode),
            None => (ts.clone(), ChannelStats::identity(ts.channels())),
        };
        let full = delay_embed(&series, cfg.delays)?;
        let n_train = full.len() - 1;
        let final_state = full.state(n_train).to_vec();
        let emb_train = full.truncated(n_train)?;
        Ok(Prepared {
            stats,
            series,
            emb_train,
            final_state,
        })
    };
    inner().map_err(|e| e.at(Stage::Ingest))
}

pub fn kernel_stage<T: Real>(prep: &Prepared<T>, cfg: &AnalyzeConfig<T>) -> Result<KernelBasis<T>> {
    let inner = || -> Result<KernelBasis<T>> {
        let eps = cfg.epsilon_for(prep.emb_train.channels());
        let km = gaussian_kernel_matrix(&prep.emb_train, eps, cfg.prune_tau, cfg.storage)?;
        let nk = bistochastic_normalize(&km)?;
        kernel_eigenbasis_seeded(&nk, cfg.num_eigs, cfg.solver, cfg.seed)
    };
    inner().map_err(|e| e.at(Stage::Kernel))
}

pub fn frequency_stage<T: Real>(
    basis: &KernelBasis<T>,
    cfg: &AnalyzeConfig<T>,
    dt: T,
) -> Result<(ScoreMatrix<T>, FrequencySet<T>)> {
    let inner = || -> Result<(ScoreMatrix<T>, FrequencySet<T>)> {
        let scores = frequency_scores(basis)?;
        let freqs = match &cfg.fixed_bins {
            Some(bins) => FrequencySet::from_bins(bins, basis.n_states(), dt)?,
            None => select_frequencies(&scores, &cfg.selection, dt)?,
        };
        Ok((scores, freqs))
    };
    inner().map_err(|e| e.at(Stage::Spectral))
}

pub fn harmonic_stage<T: Real>(
    prep: &Prepared<T>,
    freqs: &FrequencySet<T>,
    basis: &KernelBasis<T>,
) -> Result<(HarmonicModel<T>, ChaoticCoefficients<T>)> {
    let inner = || -> Result<(HarmonicModel<T>, ChaoticCoefficients<T>)> {
        let y = prep.targets();
        let f = build_fourier_matrix(freqs, &prep.times());
        let harmonic = fit_periodic(&y, freqs, &f)?;
        let chaotic = chaotic_coefficients(&y, &harmonic, basis, &f)?;
        Ok((harmonic, chaotic))
    };
    inner().map_err(|e| e.at(Stage::Harmonic))
}

/// Output of [`analyze`].
#[derive(Debug, Clone)]
pub struct Analysis<T: Real> {
    pub model: DecompositionModel<T>,
    pub scores: ScoreMatrix<T>,
}

impl<T: Real> Analysis<T> {
    pub fn frequencies(&self) -> &FrequencySet<T> {
        &self.model.harmonic().freqs
    }
}

/// Runs every stage; errors carry the label of the stage that failed.
pub fn analyze<T: Real>(ts: &TimeSeries<T>, cfg: &AnalyzeConfig<T>) -> Result<Analysis<T>> {
    let prep = prepare(ts, cfg)?;
    let basis = kernel_stage(&prep, cfg)?;
    let (scores, freqs) = frequency_stage(&basis, cfg, ts.dt())?;
    let (harmonic, chaotic) = harmonic_stage(&prep, &freqs, &basis)?;
    let meta = ModelMeta {
        dt: ts.dt(),
        selection: if cfg.fixed_bins.is_some() { None } else { Some(cfg.selection) },
        prune_threshold: cfg.prune_tau,
        seed: cfg.seed,
    };
    let model = DecompositionModel::assemble(
        harmonic,
        chaotic,
        basis,
        prep.emb_train,
        prep.final_state,
        prep.stats,
        meta,
        cfg.mode,
    )
    .map_err(|e| e.at(Stage::Extension))?;
    Ok(Analysis { model, scores })
}
