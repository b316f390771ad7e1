//! Global flags, the JSON config file, and their merge.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use qpdrive::spectral::SelectionParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Sampling interval.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Number of delays Q (the state holds Q+1 samples).
    #[arg(long, global = true)]
    pub delays: Option<usize>,
    /// Kernel bandwidth; defaults to 0.01 * channels.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Number of kernel eigenpairs L.
    #[arg(long, global = true)]
    pub num_eigs: Option<usize>,
    /// Significance threshold on W[j, L0].
    #[arg(long, global = true)]
    pub eps1: Option<f64>,
    /// Regularity threshold on ln W[j, L] - ln W[j, L0].
    #[arg(long, global = true)]
    pub eps2: Option<f64>,
    /// Truncation level at which significance is tested.
    #[arg(long = "L0", global = true)]
    pub l0: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print machine-readable JSON on standard output instead of a summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Store model matrices as CSV files instead of a binary sidecar.
    #[arg(long, global = true)]
    pub portable: bool,
    /// Scalar type used for computation.
    #[arg(long, global = true, value_enum)]
    pub precision: Option<Precision>,
    /// JSON file supplying any flag; command-line values take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file. Keys are flag names without the dashes.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    /// Free text, ignored.
    #[serde(rename = "description")]
    _description: Option<serde::de::IgnoredAny>,
    pub dt: Option<f64>,
    pub delays: Option<usize>,
    pub epsilon: Option<f64>,
    pub num_eigs: Option<usize>,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    #[serde(rename = "L0")]
    pub l0: Option<usize>,
    pub seed: Option<u64>,
    pub json: Option<bool>,
    pub portable: Option<bool>,
    pub precision: Option<Precision>,
    pub prune_tau: Option<f64>,
    pub sparse: Option<bool>,
    pub no_standardize: Option<bool>,
    pub drop_bin1: Option<bool>,
    pub normalize_scores: Option<bool>,
    pub extension_mode: Option<String>,
    pub steps: Option<usize>,
    pub init_index: Option<usize>,
    pub policy: Option<String>,
    pub error_window: Option<usize>,
    pub error_mode: Option<String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

pub const DEFAULT_DT: f64 = 1.0;
pub const DEFAULT_SEED: u64 = 0;

/// Global settings after merging the command line over the config file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub dt: Option<f64>,
    pub delays: Option<usize>,
    pub epsilon: Option<f64>,
    pub num_eigs: Option<usize>,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub l0: Option<usize>,
    pub seed: Option<u64>,
    pub json: bool,
    pub portable: bool,
    pub precision: Precision,
    pub file: ConfigFile,
}

impl Settings {
    pub fn resolve(args: &GlobalArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Ok(Self {
            dt: args.dt.or(file.dt),
            delays: args.delays.or(file.delays),
            epsilon: args.epsilon.or(file.epsilon),
            num_eigs: args.num_eigs.or(file.num_eigs),
            eps1: args.eps1.or(file.eps1),
            eps2: args.eps2.or(file.eps2),
            l0: args.l0.or(file.l0),
            seed: args.seed.or(file.seed),
            json: args.json || file.json.unwrap_or(false),
            portable: args.portable || file.portable.unwrap_or(false),
            precision: args.precision.or(file.precision).unwrap_or_default(),
            file,
        })
    }

    pub fn dt_or_default(&self) -> f64 {
        self.dt.unwrap_or(DEFAULT_DT)
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// `base` with every threshold given on the command line or in the config applied.
    pub fn selection(&self, base: SelectionParams<f64>, drop_bin1: bool, normalize: bool) -> SelectionParams<f64> {
        SelectionParams {
            eps1: self.eps1.unwrap_or(base.eps1),
            eps2: self.eps2.unwrap_or(base.eps2),
            l0: self.l0.unwrap_or(base.l0),
            drop_bin1: drop_bin1 || self.file.drop_bin1.unwrap_or(false) || base.drop_bin1,
            normalize: normalize || self.file.normalize_scores.unwrap_or(false) || base.normalize,
        }
    }

    /// Whether any threshold was supplied explicitly.
    pub fn overrides_selection(&self, drop_bin1: bool, normalize: bool) -> bool {
        self.eps1.is_some()
            || self.eps2.is_some()
            || self.l0.is_some()
            || drop_bin1
            || normalize
            || self.file.drop_bin1.is_some()
            || self.file.normalize_scores.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_line_overrides_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"dt": 2.0, "delays": 50, "L0": 100, "eps2": 3.1, "json": true}"#).unwrap();
        let args = GlobalArgs { delays: Some(4), config: Some(path), ..GlobalArgs::default() };
        let s = Settings::resolve(&args).unwrap();
        assert_eq!(s.dt, Some(2.0));
        assert_eq!(s.delays, Some(4));
        assert_eq!(s.l0, Some(100));
        assert!(s.json);
        let sel = s.selection(SelectionParams { eps1: 0.1, eps2: 1.0, l0: 20, drop_bin1: false, normalize: false }, false, false);
        assert_eq!((sel.eps1, sel.eps2, sel.l0), (0.1, 3.1, 100));
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"delay": 5}"#).unwrap();
        let args = GlobalArgs { config: Some(path), ..GlobalArgs::default() };
        assert!(Settings::resolve(&args).is_err());
    }

    #[test]
    fn shipped_example_configs_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut seen = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "json") {
                ConfigFile::load(&path).unwrap();
                seen += 1;
            }
        }
        assert!(seen > 0);
    }
}
