//! The assembled data-driven model and its forward iteration.
//!
//! One step maps a delay state `(y_n, ..., y_{n-Q})` with time stamp `t`
//! (the time of `y_n`) to
//!
//! ```text
//! y_{n+1} = g_per(t) + g_chaos0(y_n, ..., y_{n-Q})
//! ```
//!
//! and shifts the older blocks down by one slot. All iteration happens in
//! standardized units; trajectories are returned in original units.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{ChaoticCoefficients, HarmonicModel};
use crate::ingest::{ChannelStats, EmbeddedSeries, TimeSeries};
use crate::kernel::KernelBasis;
use crate::oos::{ExtensionMode, NystromExtension};
use crate::scalar::Real;
use crate::spectral::SelectionParams;

/// Provenance carried alongside the fitted matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta<T: Real> {
    pub dt: T,
    pub selection: Option<SelectionParams<T>>,
    pub prune_threshold: T,
    pub seed: u64,
}

/// Everything needed to evaluate the right-hand side of the learned map.
#[derive(Debug, Clone)]
pub struct DecompositionModel<T: Real> {
    harmonic: HarmonicModel<T>,
    chaotic: ChaoticCoefficients<T>,
    basis: KernelBasis<T>,
    emb_train: EmbeddedSeries<T>,
    final_state: Vec<T>,
    channel_stats: ChannelStats<T>,
    meta: ModelMeta<T>,
    extension: NystromExtension<T>,
}

impl<T: Real> DecompositionModel<T> {
    /// Validates shapes and builds the extension table.
    ///
    /// `emb_train` holds the `N'` training states (standardized units) and
    /// `final_state` the state that follows the last of them.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        harmonic: HarmonicModel<T>,
        chaotic: ChaoticCoefficients<T>,
        basis: KernelBasis<T>,
        emb_train: EmbeddedSeries<T>,
        final_state: Vec<T>,
        channel_stats: ChannelStats<T>,
        meta: ModelMeta<T>,
        mode: ExtensionMode,
    ) -> Result<Self> {
        let k = emb_train.channels();
        let checks = [
            (harmonic.a.ncols() == k, "A columns vs channels"),
            (harmonic.a.nrows() == harmonic.freqs.len(), "A rows vs frequencies"),
            (chaotic.e.ncols() == k, "E columns vs channels"),
            (chaotic.e.nrows() == basis.len(), "E rows vs eigenfunctions"),
            (basis.n_states() == emb_train.len(), "basis vs training states"),
            (basis.delays == emb_train.delays(), "basis vs embedding delays"),
            (final_state.len() == emb_train.dim(), "final state dimension"),
            (channel_stats.channels() == k, "channel statistics"),
        ];
        if let Some((_, what)) = checks.iter().find(|(ok, _)| !ok) {
            return Err(Error::Shape(format!("inconsistent model: {what}")));
        }
        let extension = NystromExtension::new(&emb_train, &basis, &chaotic, mode)?;
        Ok(Self {
            harmonic,
            chaotic,
            basis,
            emb_train,
            final_state,
            channel_stats,
            meta,
            extension,
        })
    }

    pub fn harmonic(&self) -> &HarmonicModel<T> {
        &self.harmonic
    }

    pub fn chaotic(&self) -> &ChaoticCoefficients<T> {
        &self.chaotic
    }

    pub fn basis(&self) -> &KernelBasis<T> {
        &self.basis
    }

    pub fn emb_train(&self) -> &EmbeddedSeries<T> {
        &self.emb_train
    }

    pub fn final_state(&self) -> &[T] {
        &self.final_state
    }

    pub fn channel_stats(&self) -> &ChannelStats<T> {
        &self.channel_stats
    }

    pub fn meta(&self) -> &ModelMeta<T> {
        &self.meta
    }

    pub fn extension(&self) -> &NystromExtension<T> {
        &self.extension
    }

    pub fn mode(&self) -> ExtensionMode {
        self.extension.mode()
    }

    pub fn channels(&self) -> usize {
        self.emb_train.channels()
    }

    pub fn delays(&self) -> usize {
        self.emb_train.delays()
    }

    pub fn epsilon(&self) -> T {
        self.basis.epsilon
    }

    pub fn dt(&self) -> T {
        self.meta.dt
    }

    /// Number of training states `N'`.
    pub fn n_train(&self) -> usize {
        self.emb_train.len()
    }

    /// Source index of the newest sample of training state `i` (`i == N'`
    /// is the final state).
    pub fn source_index(&self, i: usize) -> usize {
        self.emb_train.source_index(i)
    }

    pub fn state_time(&self, i: usize) -> T {
        T::from_usize_lossy(self.source_index(i)) * self.meta.dt
    }

    /// Training state `i` in standardized units, `i == N'` being the final state.
    pub fn training_state(&self, i: usize) -> Result<&[T]> {
        match i.cmp(&self.n_train()) {
            std::cmp::Ordering::Less => Ok(self.emb_train.state(i)),
            std::cmp::Ordering::Equal => Ok(&self.final_state),
            std::cmp::Ordering::Greater => Err(Error::InvalidArgument(format!(
                "initial index {i} exceeds the {} available states",
                self.n_train()
            ))),
        }
    }

    /// `g_per(t)` in standardized units.
    pub fn gper(&self, t: T) -> Vec<T> {
        self.harmonic.eval_gper(t)
    }

    /// `g_chaos0(state)` in standardized units.
    pub fn gchaos0(&self, state: &[T]) -> Result<Vec<T>> {
        self.extension.gchaos0(state)
    }

    fn resolve(&self, init: &InitialState<T>) -> Result<(Vec<T>, T, Option<usize>)> {
        match init {
            InitialState::Final => Ok((
                self.final_state.clone(),
                self.state_time(self.n_train()),
                Some(self.source_index(self.n_train())),
            )),
            InitialState::TrainingIndex(i) => Ok((
                self.training_state(*i)?.to_vec(),
                self.state_time(*i),
                Some(self.source_index(*i)),
            )),
            InitialState::Custom { state, t0 } => {
                if state.len() != self.emb_train.dim() {
                    return Err(Error::Shape(format!(
                        "initial state has {} entries, expected {}",
                        state.len(),
                        self.emb_train.dim()
                    )));
                }
                if state.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("initial state".into()));
                }
                Ok((self.channel_stats.standardize_state(state), *t0, None))
            }
        }
    }
}

/// Where a rollout starts.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialState<T: Real> {
    /// The state following the last training state.
    #[default]
    Final,
    /// Training state `i`; `i == N'` is the same as [`InitialState::Final`].
    TrainingIndex(usize),
    /// A delay state in original units, newest block first, with the time
    /// stamp of its newest block.
    Custom { state: Vec<T>, t0: T },
}

/// What to do when the chaotic extension is undefined at a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportPolicy {
    /// Use zero for the chaotic term of that step and count it.
    #[default]
    Freeze,
    /// Stop with an out-of-support error.
    Abort,
}

impl std::str::FromStr for SupportPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "freeze" => Ok(Self::Freeze),
            "abort" => Ok(Self::Abort),
            other => Err(Error::InvalidArgument(format!("unknown policy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionRun<T: Real> {
    /// `n_steps x k`, original units. Row `n` is the sample at `t0 + (n+1) dt`.
    pub trajectory: DMatrix<T>,
    /// `(n_steps + 1) x k(Q+1)` standardized states, row 0 the initial state.
    pub state_log: Option<DMatrix<T>>,
    pub support_fallbacks: usize,
    /// Time stamp of the initial state's newest block.
    pub t0: T,
    pub dt: T,
    /// Source index of the initial state's newest block, when it came from the data.
    pub start_index: Option<usize>,
}

impl<T: Real> ReconstructionRun<T> {
    pub fn len(&self) -> usize {
        self.trajectory.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectory.nrows() == 0
    }

    pub fn times(&self) -> Vec<T> {
        (1..=self.len())
            .map(|n| self.t0 + T::from_usize_lossy(n) * self.dt)
            .collect()
    }
}

/// Iterates the model for `n_steps` steps.
pub fn reconstruct<T: Real>(
    model: &DecompositionModel<T>,
    init: &InitialState<T>,
    n_steps: usize,
    policy: SupportPolicy,
    keep_states: bool,
) -> Result<ReconstructionRun<T>> {
    let (mut state, t0, start_index) = model.resolve(init)?;
    let k = model.channels();
    let dim = state.len();
    let dt = model.dt();

    let mut trajectory = DMatrix::zeros(n_steps, k);
    let mut log = keep_states.then(|| {
        let mut m = DMatrix::zeros(n_steps + 1, dim);
        m.row_mut(0).copy_from_slice(&state);
        m
    });
    let mut per = vec![T::zero(); k];
    let mut chaos = vec![T::zero(); k];
    let mut fallbacks = 0;

    for n in 0..n_steps {
        model
            .harmonic
            .eval_gper_into(t0 + T::from_usize_lossy(n) * dt, &mut per);
        match model.extension.gchaos0_into(&state, &mut chaos) {
            Ok(()) => {}
            Err(Error::OutOfSupport { .. }) if policy == SupportPolicy::Freeze => {
                chaos.iter_mut().for_each(|v| *v = T::zero());
                fallbacks += 1;
            }
            Err(e) => return Err(e),
        }
        state.copy_within(0..dim - k, k);
        for c in 0..k {
            state[c] = per[c] + chaos[c];
        }
        if state[..k].iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { step: n });
        }
        for c in 0..k {
            trajectory[(n, c)] = model.channel_stats.to_original(c, state[c]);
        }
        if let Some(log) = log.as_mut() {
            log.row_mut(n + 1).copy_from_slice(&state);
        }
    }
    if fallbacks > 0 {
        log::warn!("chaotic term frozen at {fallbacks} of {n_steps} steps (out of kernel support)");
    }
    Ok(ReconstructionRun {
        trajectory,
        state_log: log,
        support_fallbacks: fallbacks,
        t0,
        dt,
        start_index,
    })
}

/// Difference transform inside the moving average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    Signed,
    #[default]
    Absolute,
}

impl std::str::FromStr for ErrorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signed" => Ok(Self::Signed),
            "absolute" => Ok(Self::Absolute),
            other => Err(Error::InvalidArgument(format!("unknown error mode '{other}'"))),
        }
    }
}

/// Amplitude-normalized moving-average error of two equally shaped series.
pub fn anma_error<T: Real>(
    reference: &TimeSeries<T>,
    reconstruction: &TimeSeries<T>,
    window: usize,
    mode: ErrorMode,
) -> Result<DMatrix<T>> {
    anma_error_matrix(reference.values(), reconstruction.values(), window, mode)
}

/// [`anma_error`] on raw `N x k` matrices. Row `n` averages samples `n..n+T`.
pub fn anma_error_matrix<T: Real>(
    reference: &DMatrix<T>,
    reconstruction: &DMatrix<T>,
    window: usize,
    mode: ErrorMode,
) -> Result<DMatrix<T>> {
    if reference.shape() != reconstruction.shape() {
        return Err(Error::Shape(format!(
            "reference is {:?}, reconstruction is {:?}",
            reference.shape(),
            reconstruction.shape()
        )));
    }
    let (n, k) = reference.shape();
    if window == 0 || window > n {
        return Err(Error::InvalidArgument(format!(
            "window {window} must lie in 1..={n}"
        )));
    }
    let mut sup = Vec::with_capacity(k);
    for c in 0..k {
        let s = reference.column(c).amax();
        if !(s > T::zero()) {
            return Err(Error::ZeroAmplitude { channel: c });
        }
        sup.push(s);
    }
    let diff = DMatrix::from_fn(n, k, |i, c| {
        let d = reconstruction[(i, c)] - reference[(i, c)];
        match mode {
            ErrorMode::Signed => d,
            ErrorMode::Absolute => d.abs(),
        }
    });
    let tw = T::from_usize_lossy(window);
    Ok(DMatrix::from_fn(n - window + 1, k, |i, c| {
        let s: T = diff.view((i, c), (window, 1)).iter().copied().sum();
        s / (tw * sup[c])
    }))
}

/// Per-channel `(max, mean)` of an error matrix.
pub fn error_summary<T: Real>(errors: &DMatrix<T>) -> Vec<(T, T)> {
    errors
        .column_iter()
        .map(|col| {
            let max = col.iter().fold(T::zero(), |a, b| a.max(b.abs()));
            let mean = col.iter().map(|v| v.abs()).sum::<T>() / T::from_usize_lossy(col.len().max(1));
            (max, mean)
        })
        .collect()
}

/// `true` per channel when the second half's maximum stays below twice the first half's.
pub fn non_divergent<T: Real>(errors: &DMatrix<T>) -> Vec<bool> {
    let half = errors.nrows() / 2;
    errors
        .column_iter()
        .map(|col| {
            let first = col.rows(0, half).iter().fold(T::zero(), |a, b| a.max(b.abs()));
            let second = col
                .rows(half, col.len() - half)
                .iter()
                .fold(T::zero(), |a, b| a.max(b.abs()));
            second < T::lit(2.0) * first
        })
        .collect()
}
