//! Subcommand arguments and implementations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use qpdrive::dynamics::{anma_error_matrix, error_summary, non_divergent, reconstruct as rollout};
use qpdrive::ingest::ScaleMode;
use qpdrive::kernel::{KernelBasis, Storage, SvdSolver};
use qpdrive::pipeline::{frequency_stage, kernel_stage, prepare, AnalyzeConfig};
use qpdrive::spectral::{
    frequency_scores, generator_heuristic, select_frequencies, suggest_thresholds, FrequencyRow, FrequencySet,
    GeneratorReport, ScoreMatrix, SelectionParams, ThresholdSuggestions,
};
use qpdrive::synth::GroundTruthSummary;
use qpdrive::{
    load_model, save_model, DecompositionModel, EmbeddedSeries, ErrorMode, ExtensionMode, InitialState, Real,
    SidecarFormat, Stage, SupportPolicy, SynthSpec,
};

use crate::config::Settings;
use crate::io::{channel_header, print_json, read_series, write_json, write_table};

/// Coefficient bound of the generator search.
const GENERATOR_COEFFICIENT: i64 = 5;
const MAX_GENERATORS: usize = 6;
const DEFAULT_STEPS: usize = 1000;
const DEFAULT_ERROR_WINDOW: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Lanczos,
    Dense,
}

#[derive(Debug, Clone, Default, Args)]
pub struct KernelOpts {
    /// Kernel entries below this value are dropped (sparse storage).
    #[arg(long)]
    pub prune_tau: Option<f64>,
    /// Store the full kernel matrix.
    #[arg(long, conflicts_with = "sparse")]
    pub dense: bool,
    /// Store only entries above the prune threshold.
    #[arg(long)]
    pub sparse: bool,
    /// Analyze the raw values instead of standardized channels.
    #[arg(long)]
    pub no_standardize: bool,
    #[arg(long, value_enum)]
    pub solver: Option<SolverArg>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SelectionOpts {
    /// Discard bin 1, the lowest resolvable frequency.
    #[arg(long)]
    pub drop_bin1: bool,
    /// Compare eps1 against scores divided by their maximum.
    #[arg(long)]
    pub normalize_scores: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Input CSV, one sample per row.
    pub input: PathBuf,
    /// Model file to write; the sidecar is placed next to it.
    #[arg(short, long, default_value = "model.json")]
    pub out: PathBuf,
    #[command(flatten)]
    pub kernel: KernelOpts,
    #[command(flatten)]
    pub selection: SelectionOpts,
    /// Row weighting of the extension: consistent or paper-exact.
    #[arg(long)]
    pub extension_mode: Option<String>,
    /// Use these frequency bins instead of the threshold filter.
    #[arg(long, value_delimiter = ',')]
    pub bins: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct FrequenciesArgs {
    /// Model file written by `analyze`.
    #[arg(long, required_unless_present = "input", conflicts_with = "input")]
    pub model: Option<PathBuf>,
    /// Raw CSV series to analyze up to frequency selection.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub kernel: KernelOpts,
    #[command(flatten)]
    pub selection: SelectionOpts,
    /// Also report elbow candidates for L0, eps1 and eps2.
    #[arg(long)]
    pub suggest_thresholds: bool,
    /// Write the frequency list as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the leading kernel eigenfunctions as CSV.
    #[arg(long)]
    pub modes_out: Option<PathBuf>,
    /// Number of eigenfunctions in `--modes-out`.
    #[arg(long, default_value_t = 10)]
    pub modes: usize,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Number of steps to iterate.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Start from training state i instead of the state after the training data.
    #[arg(long)]
    pub init_index: Option<usize>,
    /// What to do outside the kernel support.
    #[arg(long, value_parser = ["freeze", "abort"])]
    pub policy: Option<String>,
    /// Averaging window T of the error.
    #[arg(long)]
    pub error_window: Option<usize>,
    /// absolute or signed differences.
    #[arg(long, value_parser = ["absolute", "signed"])]
    pub error_mode: Option<String>,
    /// Series to score the trajectory against.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Reference row matching the first trajectory row; defaults to the sample
    /// following the initial state.
    #[arg(long)]
    pub reference_offset: Option<usize>,
    #[arg(short, long, default_value = "trajectory.csv")]
    pub out: PathBuf,
    #[arg(long, default_value = "errors.csv")]
    pub error_out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Two-channel system forced by a rotation on the 2-torus.
    TwoTorus,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "two-torus")]
    pub preset: Preset,
    /// System description as JSON; replaces the preset.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// The preset's rotation numbers are 55/grid and 89/grid.
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    /// Number of samples; the preset defaults to grid + delays + 1.
    #[arg(short = 'n', long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    #[arg(short, long, default_value = "series.csv")]
    pub out: PathBuf,
    #[arg(long, default_value = "truth.json")]
    pub truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long)]
    pub candidate: PathBuf,
    #[arg(long)]
    pub error_window: Option<usize>,
    #[arg(long, value_parser = ["absolute", "signed"])]
    pub error_mode: Option<String>,
    #[arg(long)]
    pub error_out: Option<PathBuf>,
}

fn selection_cast<T: Real>(p: SelectionParams<f64>) -> SelectionParams<T> {
    SelectionParams { eps1: T::lit(p.eps1), eps2: T::lit(p.eps2), l0: p.l0, drop_bin1: p.drop_bin1, normalize: p.normalize }
}

fn selection_f64<T: Real>(p: SelectionParams<T>) -> SelectionParams<f64> {
    SelectionParams { eps1: p.eps1.as_f64(), eps2: p.eps2.as_f64(), l0: p.l0, drop_bin1: p.drop_bin1, normalize: p.normalize }
}

fn analyze_config<T: Real>(
    s: &Settings,
    kernel: &KernelOpts,
    selection: &SelectionOpts,
    extension_mode: Option<&str>,
    bins: Option<Vec<usize>>,
) -> Result<AnalyzeConfig<T>> {
    let base = AnalyzeConfig::<T>::default();
    let prune_tau = kernel.prune_tau.or(s.file.prune_tau).unwrap_or(0.0);
    let storage = if kernel.sparse {
        Storage::Sparse
    } else if kernel.dense {
        Storage::Dense
    } else {
        match s.file.sparse {
            Some(true) => Storage::Sparse,
            Some(false) => Storage::Dense,
            None if prune_tau > 0.0 => Storage::Sparse,
            None => Storage::Dense,
        }
    };
    let no_standardize = kernel.no_standardize || s.file.no_standardize.unwrap_or(false);
    let mode = match extension_mode.or(s.file.extension_mode.as_deref()) {
        Some(m) => m.parse::<ExtensionMode>()?,
        None => ExtensionMode::default(),
    };
    let solver = match kernel.solver {
        Some(SolverArg::Dense) => SvdSolver::Dense,
        _ => SvdSolver::Lanczos,
    };
    Ok(AnalyzeConfig {
        delays: s.delays.unwrap_or(base.delays),
        epsilon: s.epsilon.map(T::lit),
        num_eigs: s.num_eigs.unwrap_or(base.num_eigs),
        selection: selection_cast(s.selection(
            selection_f64(base.selection),
            selection.drop_bin1,
            selection.normalize_scores,
        )),
        prune_tau: T::lit(prune_tau),
        storage,
        solver,
        scale: if no_standardize { None } else { Some(ScaleMode::StdDev) },
        mode,
        seed: s.seed_or_default(),
        fixed_bins: bins,
    })
}

fn sidecar_format(s: &Settings) -> SidecarFormat {
    if s.portable {
        SidecarFormat::Csv
    } else {
        SidecarFormat::Binary
    }
}

fn print_frequency_table(rows: &[FrequencyRow]) {
    println!("{:>8} {:>14} {:>16} {:>16}", "bin", "omega", "period_samples", "period_time");
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"));
    for r in rows {
        println!(
            "{:>8} {:>14.8} {:>16} {:>16}",
            r.bin,
            r.omega,
            cell(r.period_samples),
            cell(r.period_time)
        );
    }
}

fn print_heuristic(report: &GeneratorReport) {
    println!(
        "quasiperiodicity dimension (heuristic): {} (generator bins {:?}, coefficients within +/-{}{})",
        report.dimension,
        report.generators,
        report.max_coefficient,
        if report.unexplained.is_empty() { String::new() } else { format!(", unexplained {:?}", report.unexplained) }
    );
}

fn format_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(", ")
}

pub fn analyze<T: Real>(s: &Settings, a: &AnalyzeArgs) -> Result<()> {
    let ts = read_series::<T>(&a.input, s.dt_or_default())?;
    let cfg = analyze_config::<T>(s, &a.kernel, &a.selection, a.extension_mode.as_deref(), a.bins.clone())?;
    let analysis = qpdrive::analyze(&ts, &cfg)?;
    let model = &analysis.model;
    let sidecar =
        save_model(model, &a.out, sidecar_format(s)).map_err(|e| e.at(Stage::Persistence))?;
    let rows = analysis.frequencies().report();
    let residual: Vec<f64> = model.harmonic().residual_norm.iter().map(|v| v.as_f64()).collect();
    let heuristic = generator_heuristic(analysis.frequencies(), GENERATOR_COEFFICIENT, MAX_GENERATORS);
    if s.json {
        print_json(&json!({
            "model": a.out,
            "sidecar": sidecar,
            "n_train": model.n_train(),
            "delays": model.delays(),
            "epsilon": model.epsilon().as_f64(),
            "num_eigs": model.basis().len(),
            "frequencies": rows,
            "residual_norm": residual,
            "heuristic": heuristic,
        }))?;
    } else {
        println!(
            "analyzed {} samples x {} channels: N'={} states, Q={}, epsilon={}, L={}",
            ts.len(),
            ts.channels(),
            model.n_train(),
            model.delays(),
            model.epsilon(),
            model.basis().len()
        );
        println!("{} frequencies selected:", rows.len());
        print_frequency_table(&rows);
        print_heuristic(&heuristic);
        println!("residual norm per channel (standardized): {}", format_vec(&residual));
        println!("model written to {} (arrays in {})", a.out.display(), sidecar.display());
    }
    Ok(())
}

fn write_modes(path: &Path, basis: &KernelBasis<f64>, emb: &EmbeddedSeries<f64>, count: usize) -> Result<()> {
    let m = count.min(basis.len());
    let mut header = vec!["index".to_string(), "t".to_string()];
    header.extend((1..=m).map(|l| format!("phi{l}")));
    let rows = (0..basis.n_states()).map(|i| {
        let mut row = vec![emb.source_index(i) as f64, emb.state_time(i)];
        row.extend((0..m).map(|l| basis.phis[(i, l)]));
        row
    });
    write_table(path, &header, rows)
}

#[derive(Serialize)]
struct FrequencyReport<'a> {
    frequencies: &'a [FrequencyRow],
    selection: Option<SelectionParams<f64>>,
    n_samples: usize,
    dt: f64,
    heuristic: &'a GeneratorReport,
    suggestions: Option<&'a ThresholdSuggestions>,
}

pub fn frequencies(s: &Settings, a: &FrequenciesArgs) -> Result<()> {
    let (basis, emb, scores, freqs): (KernelBasis<f64>, EmbeddedSeries<f64>, ScoreMatrix<f64>, FrequencySet<f64>) =
        if let Some(path) = &a.model {
            let model = load_model::<f64>(path).map_err(|e| e.at(Stage::Persistence))?;
            let basis = model.basis().clone();
            let scores = frequency_scores(&basis).map_err(|e| e.at(Stage::Spectral))?;
            let freqs = if s.overrides_selection(a.selection.drop_bin1, a.selection.normalize_scores) {
                let stored = model.meta().selection.unwrap_or(AnalyzeConfig::<f64>::default().selection);
                let params = s.selection(stored, a.selection.drop_bin1, a.selection.normalize_scores);
                select_frequencies(&scores, &params, model.dt()).map_err(|e| e.at(Stage::Spectral))?
            } else {
                model.harmonic().freqs.clone()
            };
            (basis, model.emb_train().clone(), scores, freqs)
        } else {
            let input = a.input.as_ref().context("--model or --input is required")?;
            let ts = read_series::<f64>(input, s.dt_or_default())?;
            let cfg = analyze_config::<f64>(s, &a.kernel, &a.selection, None, None)?;
            let prep = prepare(&ts, &cfg)?;
            let basis = kernel_stage(&prep, &cfg)?;
            let (scores, freqs) = frequency_stage(&basis, &cfg, ts.dt())?;
            (basis, prep.emb_train, scores, freqs)
        };

    let rows = freqs.report();
    let heuristic = generator_heuristic(&freqs, GENERATOR_COEFFICIENT, MAX_GENERATORS);
    let suggestions = if a.suggest_thresholds {
        let l0 = freqs.params.map_or_else(|| s.l0.unwrap_or(AnalyzeConfig::<f64>::default().selection.l0), |p| p.l0);
        Some(suggest_thresholds(&scores, &basis.lambdas, l0).map_err(|e| e.at(Stage::Spectral))?)
    } else {
        None
    };
    if let Some(path) = &a.out {
        write_json(path, &rows)?;
    }
    if let Some(path) = &a.modes_out {
        write_modes(path, &basis, &emb, a.modes)?;
    }
    if s.json {
        print_json(&FrequencyReport {
            frequencies: &rows,
            selection: freqs.params,
            n_samples: freqs.n_samples,
            dt: freqs.dt,
            heuristic: &heuristic,
            suggestions: suggestions.as_ref(),
        })?;
    } else {
        if let Some(p) = freqs.params {
            println!("thresholds: eps1={} eps2={} L0={}", p.eps1, p.eps2, p.l0);
        }
        print_frequency_table(&rows);
        print_heuristic(&heuristic);
        if let Some(sug) = &suggestions {
            println!("candidate L0: {:?}", sug.l0);
            println!("candidate eps1: {}", format_vec(&sug.eps1));
            println!("candidate eps2: {}", format_vec(&sug.eps2));
        }
    }
    Ok(())
}

pub fn decompose(s: &Settings, a: &DecomposeArgs) -> Result<()> {
    let model = load_model::<f64>(&a.model).map_err(|e| e.at(Stage::Persistence))?;
    let harmonic = model.harmonic();
    let rows = harmonic.freqs.report();
    // Cosine amplitude of each harmonic; row 0 is the mean.
    let amplitude: Vec<Vec<f64>> = (0..harmonic.a.nrows())
        .map(|j| {
            let w = if j == 0 { 1.0 } else { 2.0 };
            harmonic.a.row(j).iter().map(|c| w * c.norm()).collect()
        })
        .collect();
    let e = &model.chaotic().e;
    let chaotic_rms: Vec<f64> = e.column_iter().map(|c| c.norm()).collect();
    let residual = &harmonic.residual_norm;
    if s.json {
        print_json(&json!({
            "frequencies": rows,
            "amplitude": amplitude,
            "residual_norm": residual,
            "chaotic_rms": chaotic_rms,
        }))?;
    } else {
        println!("{} frequencies, {} channels (standardized units)", rows.len(), model.channels());
        println!("{:>8} {:>14}  amplitude per channel", "bin", "omega");
        for (r, amp) in rows.iter().zip(&amplitude) {
            println!("{:>8} {:>14.8}  {}", r.bin, r.omega, format_vec(amp));
        }
        println!("residual norm per channel: {}", format_vec(residual));
        println!("chaotic part rms per channel: {}", format_vec(&chaotic_rms));
    }
    Ok(())
}

fn window_for(explicit: Option<usize>, n: usize) -> usize {
    explicit.unwrap_or_else(|| DEFAULT_ERROR_WINDOW.min(n))
}

#[derive(Serialize)]
struct ErrorReport {
    path: PathBuf,
    window: usize,
    mode: ErrorMode,
    reference_offset: usize,
    max: Vec<f64>,
    mean: Vec<f64>,
    non_divergent: Vec<bool>,
}

fn error_mode(arg: Option<&str>, s: &Settings) -> Result<ErrorMode> {
    Ok(match arg.or(s.file.error_mode.as_deref()) {
        Some(m) => m.parse()?,
        None => ErrorMode::default(),
    })
}

fn print_error_summary(max: &[f64], mean: &[f64], steady: &[bool], window: usize) {
    println!("ANMA error (T={window}) per channel:");
    for (c, ((mx, mn), ok)) in max.iter().zip(mean).zip(steady).enumerate() {
        println!(
            "  channel {}: max {:.3}%  mean {:.3}%  {}",
            c + 1,
            100.0 * mx,
            100.0 * mn,
            if *ok { "bounded" } else { "growing" }
        );
    }
}

pub fn reconstruct<T: Real>(s: &Settings, a: &ReconstructArgs) -> Result<()> {
    let model: DecompositionModel<T> = load_model(&a.model).map_err(|e| e.at(Stage::Persistence))?;
    let steps = a.steps.or(s.file.steps).unwrap_or(DEFAULT_STEPS);
    let init = match a.init_index.or(s.file.init_index) {
        Some(i) => InitialState::TrainingIndex(i),
        None => InitialState::Final,
    };
    let policy: SupportPolicy = match a.policy.as_deref().or(s.file.policy.as_deref()) {
        Some(p) => p.parse()?,
        None => SupportPolicy::default(),
    };
    let run = rollout(&model, &init, steps, policy, false)?;
    let k = model.channels();
    let mut header = vec!["step".to_string(), "t".to_string()];
    header.extend(channel_header("y", k));
    let times = run.times();
    write_table(
        &a.out,
        &header,
        (0..run.len()).map(|n| {
            let mut row = vec![(n + 1) as f64, times[n].as_f64()];
            row.extend(run.trajectory.row(n).iter().map(|v| v.as_f64()));
            row
        }),
    )?;

    let errors = match &a.reference {
        Some(path) => {
            let reference = read_series::<T>(path, model.dt().as_f64())?;
            if reference.channels() != k {
                bail!(qpdrive::Error::Shape(format!(
                    "reference has {} channels, model has {k}",
                    reference.channels()
                )));
            }
            let offset = a.reference_offset.unwrap_or_else(|| run.start_index.map_or(0, |i| i + 1));
            if offset + steps > reference.len() {
                bail!(qpdrive::Error::Shape(format!(
                    "reference has {} rows; rows {offset}..{} are needed",
                    reference.len(),
                    offset + steps
                )));
            }
            let mode = error_mode(a.error_mode.as_deref(), s)?;
            let window = window_for(a.error_window.or(s.file.error_window), steps);
            let mut eheader = vec!["window_start".to_string(), "t".to_string()];
            eheader.extend(channel_header("e", k));
            if steps == 0 {
                write_table(&a.error_out, &eheader, std::iter::empty())?;
                None
            } else {
                let ref_rows = reference.values().rows(offset, steps).into_owned();
                let e = anma_error_matrix(&ref_rows, &run.trajectory, window, mode)?;
                write_table(
                    &a.error_out,
                    &eheader,
                    (0..e.nrows()).map(|n| {
                        let mut row = vec![(n + 1) as f64, times[n].as_f64()];
                        row.extend(e.row(n).iter().map(|v| v.as_f64()));
                        row
                    }),
                )?;
                let summary = error_summary(&e);
                Some(ErrorReport {
                    path: a.error_out.clone(),
                    window,
                    mode,
                    reference_offset: offset,
                    max: summary.iter().map(|p| p.0.as_f64()).collect(),
                    mean: summary.iter().map(|p| p.1.as_f64()).collect(),
                    non_divergent: non_divergent(&e),
                })
            }
        }
        None => None,
    };

    if s.json {
        print_json(&json!({
            "steps": run.len(),
            "t0": run.t0.as_f64(),
            "dt": run.dt.as_f64(),
            "start_index": run.start_index,
            "support_fallbacks": run.support_fallbacks,
            "trajectory": a.out,
            "errors": errors,
        }))?;
    } else {
        println!(
            "{} steps from t0={} written to {} ({} out-of-support steps)",
            run.len(),
            run.t0,
            a.out.display(),
            run.support_fallbacks
        );
        if let Some(r) = &errors {
            print_error_summary(&r.max, &r.mean, &r.non_divergent, r.window);
            println!("error series written to {}", r.path.display());
        }
    }
    Ok(())
}

pub fn synth(s: &Settings, a: &SynthArgs) -> Result<()> {
    let mut spec = match &a.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<SynthSpec>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => match a.preset {
            Preset::TwoTorus => {
                let q = s.delays.unwrap_or(AnalyzeConfig::<f64>::default().delays);
                SynthSpec::two_torus(a.grid, a.grid + q + 1, s.seed_or_default())
            }
        },
    };
    if let Some(n) = a.samples {
        spec.n = n;
    }
    if let Some(sd) = a.noise_sd {
        spec.noise_sd = sd;
    }
    if let Some(seed) = s.seed {
        spec.seed = seed;
    }
    if let Some(dt) = s.dt {
        spec.dt = dt;
    }
    let (ts, _) = qpdrive::generate::<f64>(&spec)?;
    let mut header = channel_header("y", ts.channels());
    if let Some(names) = ts.channel_names() {
        header = names.to_vec();
    }
    write_table(&a.out, &header, (0..ts.len()).map(|n| ts.sample(n)))?;
    let truth = GroundTruthSummary::new(&spec);
    write_json(&a.truth, &truth)?;
    if s.json {
        print_json(&json!({ "series": a.out, "truth": a.truth, "samples": ts.len(), "ground_truth": truth }))?;
    } else {
        println!("{} samples x {} channels written to {}", ts.len(), ts.channels(), a.out.display());
        println!("true frequencies: {}", format_vec(&truth.frequencies));
        println!("ground truth written to {}", a.truth.display());
    }
    Ok(())
}

pub fn eval(s: &Settings, a: &EvalArgs) -> Result<()> {
    let dt = s.dt_or_default();
    let reference = read_series::<f64>(&a.reference, dt)?;
    let candidate = read_series::<f64>(&a.candidate, dt)?;
    let mode = error_mode(a.error_mode.as_deref(), s)?;
    let window = window_for(a.error_window.or(s.file.error_window), reference.len());
    let e = qpdrive::anma_error(&reference, &candidate, window, mode)?;
    let summary = error_summary(&e);
    let max: Vec<f64> = summary.iter().map(|p| p.0).collect();
    let mean: Vec<f64> = summary.iter().map(|p| p.1).collect();
    let steady = non_divergent(&e);
    if let Some(path) = &a.error_out {
        let mut header = vec!["window_start".to_string(), "t".to_string()];
        header.extend(channel_header("e", e.ncols()));
        write_table(
            path,
            &header,
            (0..e.nrows()).map(|n| {
                let mut row = vec![n as f64, n as f64 * dt];
                row.extend(e.row(n).iter().copied());
                row
            }),
        )?;
    }
    if s.json {
        print_json(&json!({ "window": window, "mode": mode, "max": max, "mean": mean, "non_divergent": steady }))?;
    } else {
        print_error_summary(&max, &mean, &steady, window);
    }
    Ok(())
}
