//! Reconstruction of quasiperiodically driven dynamics from a single time
//! series.
//!
//! The pipeline delay-embeds the data, builds a bistochastically normalized
//! Gaussian kernel, scores the Fourier content of its singular vectors to
//! identify Koopman eigenfrequencies, fits the periodic forcing on those
//! frequencies, and represents the remainder as a kernel-interpolated map
//! of the delay state. The resulting model is iterated forward:
//!
//! ```text
//! y_{n+1} = g_per(t_n) + g_chaos0(y_n, y_{n-1}, ..., y_{n-Q})
//! ```
//!
//! Every numeric type is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`, with `*F32` variants for `f32`.
//!
//! ```no_run
//! use qpdrive::{analyze, reconstruct, AnalyzeConfig, InitialState, SupportPolicy, TimeSeries};
//!
//! let ts: TimeSeries = qpdrive::ingest::load_csv("data.csv", 1.0, true)?;
//! let analysis = analyze(&ts, &AnalyzeConfig::default())?;
//! let run = reconstruct(&analysis.model, &InitialState::Final, 1000, SupportPolicy::Freeze, false)?;
//! println!("{} steps", run.len());
//! # Ok::<(), qpdrive::Error>(())
//! ```

pub mod dynamics;
pub mod error;
pub mod harmonic;
pub mod ingest;
pub mod kernel;
pub mod oos;
pub mod persist;
pub mod pipeline;
pub mod scalar;
pub mod spectral;
pub mod synth;

pub use dynamics::{
    anma_error, anma_error_matrix, error_summary, non_divergent, reconstruct, ErrorMode, InitialState, ModelMeta,
    SupportPolicy,
};
pub use error::{Error, Result, Stage};
pub use oos::ExtensionMode;
pub use persist::{load_model, save_model, SidecarFormat};
pub use pipeline::{analyze, AnalyzeConfig};
pub use scalar::Real;
pub use spectral::SelectionParams;
pub use synth::{generate, GroundTruth, SynthSpec};

pub type TimeSeries<T = f64> = ingest::TimeSeries<T>;
pub type EmbeddedSeries<T = f64> = ingest::EmbeddedSeries<T>;
pub type ChannelStats<T = f64> = ingest::ChannelStats<T>;
pub type KernelBasis<T = f64> = kernel::KernelBasis<T>;
pub type FrequencySet<T = f64> = spectral::FrequencySet<T>;
pub type ScoreMatrix<T = f64> = spectral::ScoreMatrix<T>;
pub type HarmonicModel<T = f64> = harmonic::HarmonicModel<T>;
pub type ChaoticCoefficients<T = f64> = harmonic::ChaoticCoefficients<T>;
pub type NystromExtension<T = f64> = oos::NystromExtension<T>;
pub type DecompositionModel<T = f64> = dynamics::DecompositionModel<T>;
pub type ReconstructionRun<T = f64> = dynamics::ReconstructionRun<T>;
pub type Analysis<T = f64> = pipeline::Analysis<T>;

pub type TimeSeriesF32 = ingest::TimeSeries<f32>;
pub type DecompositionModelF32 = dynamics::DecompositionModel<f32>;
pub type ReconstructionRunF32 = dynamics::ReconstructionRun<f32>;
pub type AnalysisF32 = pipeline::Analysis<f32>;
