//! Model files.
//!
//! A model is a JSON document with the small matrices plus a sidecar with
//! the large ones. Every number is stored as an `f64`, which represents
//! both supported scalar types exactly, so a save/load cycle is bitwise.
//!
//! Binary sidecar layout (all integers little-endian):
//!
//! ```text
//! magic    8 bytes  "QPDSIDE1"
//! count    u32      number of arrays
//! repeated count times:
//!   name_len u32, name (UTF-8), rows u64, cols u64,
//!   rows * cols f64 values, column-major
//! ```
//!
//! The portable sidecar is a directory holding one `<name>.csv` per array
//! (`rows` lines of `cols` comma-separated values).

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DecompositionModel, ModelMeta};
use crate::error::{Error, Result, Stage};
use crate::harmonic::{ChaoticCoefficients, HarmonicModel};
use crate::ingest::{ChannelStats, EmbeddedSeries, ScaleMode};
use crate::kernel::KernelBasis;
use crate::oos::ExtensionMode;
use crate::scalar::Real;
use crate::spectral::{FrequencySet, SelectionParams};

pub const FORMAT_NAME: &str = "qpdrive-model";
pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"QPDSIDE1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SidecarFormat {
    #[default]
    Binary,
    /// Directory of CSV files.
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarRef {
    pub format: SidecarFormat,
    /// Relative to the directory of the JSON document.
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaSection {
    pub version: u32,
    /// Seconds since the Unix epoch.
    pub created: u64,
    pub scalar: String,
    pub seed: u64,
    pub dt: f64,
    pub k: usize,
    #[serde(rename = "Q")]
    pub delays: usize,
    pub epsilon: f64,
    pub n_train: usize,
    pub origin_index: usize,
    pub prune_threshold: f64,
    pub thresholds: Option<SelectionParams<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySection {
    pub bins: Vec<usize>,
    pub omegas: Vec<f64>,
    pub n_samples: usize,
}

/// The JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub meta: MetaSection,
    pub channel_stats: ChannelStats<f64>,
    pub frequencies: FrequencySection,
    /// `m` rows of `k` `[re, im]` pairs.
    #[serde(rename = "A")]
    pub a: Vec<Vec<[f64; 2]>>,
    /// `L` rows of `k` values.
    #[serde(rename = "E")]
    pub e: Vec<Vec<f64>>,
    pub residual_norm: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub q: Vec<f64>,
    pub gamma_tilde_mode: ExtensionMode,
    pub final_state: Vec<f64>,
    pub sidecar: SidecarRef,
}

fn to_f64<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

fn from_f64<T: Real>(v: &[f64]) -> Vec<T> {
    v.iter().map(|x| T::lit(*x)).collect()
}

fn mat_f64<T: Real>(m: &DMatrix<T>) -> DMatrix<f64> {
    m.map(|x| x.as_f64())
}

fn sidecar_path(json: &Path, format: SidecarFormat) -> PathBuf {
    let stem = json.file_stem().map_or_else(|| "model".into(), |s| s.to_string_lossy().into_owned());
    let name = match format {
        SidecarFormat::Binary => format!("{stem}.bin"),
        SidecarFormat::Csv => format!("{stem}.arrays"),
    };
    json.with_file_name(name)
}

fn now_seconds() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Splits a model into its JSON document and sidecar arrays.
pub fn to_document<T: Real>(
    model: &DecompositionModel<T>,
    sidecar: SidecarRef,
) -> (ModelDocument, BTreeMap<String, DMatrix<f64>>) {
    let h = model.harmonic();
    let basis = model.basis();
    let stats = model.channel_stats();
    let meta = model.meta();
    let doc = ModelDocument {
        format: FORMAT_NAME.into(),
        meta: MetaSection {
            version: FORMAT_VERSION,
            created: now_seconds(),
            scalar: T::NAME.into(),
            seed: meta.seed,
            dt: meta.dt.as_f64(),
            k: model.channels(),
            delays: model.delays(),
            epsilon: model.epsilon().as_f64(),
            n_train: model.n_train(),
            origin_index: model.emb_train().origin_index(),
            prune_threshold: meta.prune_threshold.as_f64(),
            thresholds: meta.selection.map(|s| SelectionParams {
                eps1: s.eps1.as_f64(),
                eps2: s.eps2.as_f64(),
                l0: s.l0,
                drop_bin1: s.drop_bin1,
                normalize: s.normalize,
            }),
        },
        channel_stats: ChannelStats {
            mean: to_f64(&stats.mean),
            scale: to_f64(&stats.scale),
            constant: stats.constant.clone(),
            mode: stats.mode,
        },
        frequencies: FrequencySection {
            bins: h.freqs.bins.clone(),
            omegas: to_f64(&h.freqs.omegas),
            n_samples: h.freqs.n_samples,
        },
        a: h
            .a
            .row_iter()
            .map(|r| r.iter().map(|c| [c.re.as_f64(), c.im.as_f64()]).collect())
            .collect(),
        e: model
            .chaotic()
            .e
            .row_iter()
            .map(|r| r.iter().map(|v| v.as_f64()).collect())
            .collect(),
        residual_norm: to_f64(&h.residual_norm),
        lambdas: to_f64(&basis.lambdas),
        sigmas: to_f64(&basis.sigmas),
        q: to_f64(basis.q.as_slice()),
        gamma_tilde_mode: model.mode(),
        final_state: to_f64(model.final_state()),
        sidecar,
    };
    let mut arrays = BTreeMap::new();
    arrays.insert("emb_train".to_string(), mat_f64(model.emb_train().state_columns()));
    arrays.insert("gammas".to_string(), mat_f64(&basis.gammas));
    arrays.insert("phis".to_string(), mat_f64(&basis.phis));
    arrays.insert("d".to_string(), DMatrix::from_column_slice(basis.d.len(), 1, &to_f64(basis.d.as_slice())));
    (doc, arrays)
}

/// Rebuilds a model from its parts.
pub fn from_document<T: Real>(
    doc: &ModelDocument,
    arrays: &BTreeMap<String, DMatrix<f64>>,
) -> Result<DecompositionModel<T>> {
    if doc.format != FORMAT_NAME {
        return Err(Error::Format(format!("not a model file (format '{}')", doc.format)));
    }
    if doc.meta.version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported version {} (expected {FORMAT_VERSION})",
            doc.meta.version
        )));
    }
    let get = |name: &str| -> Result<&DMatrix<f64>> {
        arrays
            .get(name)
            .ok_or_else(|| Error::Format(format!("sidecar is missing array '{name}'")))
    };
    let m = &doc.meta;
    let k = m.k;
    let dt = T::lit(m.dt);
    let l = doc.lambdas.len();

    let a_ok = doc.a.len() == doc.frequencies.bins.len() && doc.a.iter().all(|r| r.len() == k);
    let e_ok = doc.e.len() == l && doc.e.iter().all(|r| r.len() == k);
    if !(a_ok && e_ok) {
        return Err(Error::Format("A or E has the wrong shape".into()));
    }
    if doc.frequencies.omegas.len() != doc.frequencies.bins.len() {
        return Err(Error::Format("frequency bins and omegas differ in length".into()));
    }
    let a = DMatrix::from_fn(doc.a.len(), k, |j, c| {
        Complex::new(T::lit(doc.a[j][c][0]), T::lit(doc.a[j][c][1]))
    });
    let freqs = FrequencySet {
        omegas: from_f64(&doc.frequencies.omegas),
        bins: doc.frequencies.bins.clone(),
        n_samples: doc.frequencies.n_samples,
        dt,
        params: m.thresholds.map(convert_params),
    };
    let harmonic = HarmonicModel {
        a,
        freqs,
        residual_norm: from_f64(&doc.residual_norm),
    };
    let chaotic = ChaoticCoefficients {
        e: DMatrix::from_fn(l, k, |i, c| T::lit(doc.e[i][c])),
    };
    let n = m.n_train;
    let check = |name: &str, mat: &DMatrix<f64>, rows: usize, cols: usize| -> Result<()> {
        if mat.shape() != (rows, cols) {
            return Err(Error::Format(format!(
                "array '{name}' is {:?}, expected ({rows}, {cols})",
                mat.shape()
            )));
        }
        Ok(())
    };
    let dim = k * (m.delays + 1);
    let emb = get("emb_train")?;
    check("emb_train", emb, dim, n)?;
    let gammas = get("gammas")?;
    check("gammas", gammas, n, l)?;
    let phis = get("phis")?;
    check("phis", phis, n, l)?;
    let d = get("d")?;
    check("d", d, n, 1)?;
    if doc.q.len() != n || doc.sigmas.len() != l {
        return Err(Error::Format("q or sigmas has the wrong length".into()));
    }
    let basis = KernelBasis {
        lambdas: from_f64(&doc.lambdas),
        sigmas: from_f64(&doc.sigmas),
        phis: phis.map(T::lit),
        gammas: gammas.map(T::lit),
        d: DVector::from_iterator(n, d.iter().map(|v| T::lit(*v))),
        q: DVector::from_iterator(n, doc.q.iter().map(|v| T::lit(*v))),
        epsilon: T::lit(m.epsilon),
        delays: m.delays,
    };
    let emb_train = EmbeddedSeries::from_state_columns(emb.map(T::lit), m.delays, m.origin_index, dt, k)?;
    let cs = &doc.channel_stats;
    let stats = ChannelStats {
        mean: from_f64(&cs.mean),
        scale: from_f64(&cs.scale),
        constant: cs.constant.clone(),
        mode: cs.mode,
    };
    let meta = ModelMeta {
        dt,
        selection: m.thresholds.map(convert_params),
        prune_threshold: T::lit(m.prune_threshold),
        seed: m.seed,
    };
    DecompositionModel::assemble(
        harmonic,
        chaotic,
        basis,
        emb_train,
        from_f64(&doc.final_state),
        stats,
        meta,
        doc.gamma_tilde_mode,
    )
}

fn convert_params<T: Real>(p: SelectionParams<f64>) -> SelectionParams<T> {
    SelectionParams {
        eps1: T::lit(p.eps1),
        eps2: T::lit(p.eps2),
        l0: p.l0,
        drop_bin1: p.drop_bin1,
        normalize: p.normalize,
    }
}

/// Writes `path` (JSON) and its sidecar next to it. Returns the sidecar path.
pub fn save_model<T: Real>(model: &DecompositionModel<T>, path: impl AsRef<Path>, format: SidecarFormat) -> Result<PathBuf> {
    let inner = || -> Result<PathBuf> {
        let path = path.as_ref();
        let side = sidecar_path(path, format);
        let rel = side
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .ok_or_else(|| Error::InvalidArgument(format!("bad model path {}", path.display())))?;
        let (doc, arrays) = to_document(model, SidecarRef { format, path: rel });
        match format {
            SidecarFormat::Binary => write_binary(&arrays, BufWriter::new(fs::File::create(&side)?))?,
            SidecarFormat::Csv => write_csv_dir(&arrays, &side)?,
        }
        let mut out = BufWriter::new(fs::File::create(path)?);
        serde_json::to_writer_pretty(&mut out, &doc)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(side)
    };
    inner().map_err(|e| e.at(Stage::Persistence))
}

/// Reads only the JSON document (no sidecar).
pub fn load_document(path: impl AsRef<Path>) -> Result<ModelDocument> {
    let file = fs::File::open(path.as_ref())?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

pub fn load_model<T: Real>(path: impl AsRef<Path>) -> Result<DecompositionModel<T>> {
    let inner = || -> Result<DecompositionModel<T>> {
        let path = path.as_ref();
        let doc = load_document(path)?;
        let side = path.with_file_name(&doc.sidecar.path);
        let arrays = match doc.sidecar.format {
            SidecarFormat::Binary => read_binary(BufReader::new(fs::File::open(&side)?))?,
            SidecarFormat::Csv => read_csv_dir(&side)?,
        };
        from_document(&doc, &arrays)
    };
    inner().map_err(|e| e.at(Stage::Persistence))
}

pub fn write_binary<W: Write>(arrays: &BTreeMap<String, DMatrix<f64>>, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(arrays.len() as u32).to_le_bytes())?;
    for (name, m) in arrays {
        out.write_all(&(name.len() as u32).to_le_bytes())?;
        out.write_all(name.as_bytes())?;
        out.write_all(&(m.nrows() as u64).to_le_bytes())?;
        out.write_all(&(m.ncols() as u64).to_le_bytes())?;
        for v in m.iter() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_binary<R: Read>(mut r: R) -> Result<BTreeMap<String, DMatrix<f64>>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("sidecar has a bad magic number".into()));
    }
    let count = read_u32(&mut r)?;
    let mut arrays = BTreeMap::new();
    for _ in 0..count {
        let len = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name).map_err(|_| Error::Format("array name is not UTF-8".into()))?;
        let rows = read_u64(&mut r)? as usize;
        let cols = read_u64(&mut r)? as usize;
        let total = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Format(format!("array '{name}' is too large")))?;
        let mut bytes = vec![0u8; total * 8];
        r.read_exact(&mut bytes)?;
        let data: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        arrays.insert(name, DMatrix::from_vec(rows, cols, data));
    }
    Ok(arrays)
}

fn write_csv_dir(arrays: &BTreeMap<String, DMatrix<f64>>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, m) in arrays {
        let mut out = BufWriter::new(fs::File::create(dir.join(format!("{name}.csv")))?);
        crate::ingest::write_matrix_csv(m, &mut out)?;
        out.flush()?;
    }
    Ok(())
}

fn read_csv_dir(dir: &Path) -> Result<BTreeMap<String, DMatrix<f64>>> {
    let mut arrays = BTreeMap::new();
    for name in ["emb_train", "gammas", "phis", "d"] {
        let path = dir.join(format!("{name}.csv"));
        let text = fs::read_to_string(&path)?;
        let rows: Vec<Vec<f64>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, line)| {
                line.split(',')
                    .map(|f| {
                        f.trim().parse::<f64>().map_err(|e| Error::Parse {
                            source_name: path.display().to_string(),
                            row: i + 1,
                            message: e.to_string(),
                        })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Format(format!("array '{name}' has ragged rows")));
        }
        arrays.insert(name.to_string(), DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]));
    }
    Ok(arrays)
}

/// Scale mode tag for reports.
pub fn scale_mode_name(mode: ScaleMode) -> &'static str {
    match mode {
        ScaleMode::StdDev => "std_dev",
        ScaleMode::SupNorm => "sup_norm",
    }
}
