//! Loading, standardization and delay embedding of raw observations.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `N` samples of a `k`-channel observable taken every `dt` time units.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T: Real> {
    values: DMatrix<T>,
    dt: T,
    channel_names: Option<Vec<String>>,
}

impl<T: Real> TimeSeries<T> {
    /// Wraps an `N x k` matrix (one sample per row).
    pub fn new(values: DMatrix<T>, dt: T) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a time series needs at least 2 samples, got {}",
                values.nrows()
            )));
        }
        if values.ncols() == 0 {
            return Err(Error::InvalidArgument("a time series needs at least one channel".into()));
        }
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let n = values.nrows();
            return Err(Error::NonFinite(format!(
                "sample {} channel {}",
                pos % n,
                pos / n
            )));
        }
        Ok(Self {
            values,
            dt,
            channel_names: None,
        })
    }

    /// Builds a series from row slices.
    pub fn from_rows(rows: &[Vec<T>], dt: T) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != k) {
            return Err(Error::Shape(format!(
                "row {bad} has {} values, expected {k}",
                rows[bad].len()
            )));
        }
        let values = DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]);
        Self::new(values, dt)
    }

    pub fn with_channel_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.channels() {
            return Err(Error::Shape(format!(
                "{} channel names for {} channels",
                names.len(),
                self.channels()
            )));
        }
        self.channel_names = Some(names);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn channels(&self) -> usize {
        self.values.ncols()
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn values(&self) -> &DMatrix<T> {
        &self.values
    }

    pub fn channel_names(&self) -> Option<&[String]> {
        self.channel_names.as_deref()
    }

    pub fn sample(&self, n: usize) -> Vec<T> {
        self.values.row(n).iter().copied().collect()
    }

    /// Rows `start..end` as a new series (same `dt`, same names).
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::InvalidArgument(format!(
                "slice {start}..{end} out of range for {} samples",
                self.len()
            )));
        }
        let values = self.values.rows(start, end - start).into_owned();
        let mut out = Self::new(values, self.dt)?;
        out.channel_names = self.channel_names.clone();
        Ok(out)
    }
}

/// Reads a comma-separated file with one sample per row.
pub fn load_csv<T: Real>(path: impl AsRef<Path>, dt: T, header: bool) -> Result<TimeSeries<T>> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_csv(file, &path.display().to_string(), dt, header)
}

/// Like [`load_csv`] but from any reader; `source_name` labels parse errors.
pub fn read_csv<T: Real, R: Read>(
    reader: R,
    source_name: &str,
    dt: T,
    header: bool,
) -> Result<TimeSeries<T>> {
    let parse_err = |row: usize, message: String| Error::Parse {
        source_name: source_name.to_string(),
        row,
        message,
    };
    let mut names = None;
    let mut rows: Vec<Vec<T>> = Vec::new();
    let mut width = None;
    let mut header_pending = header;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let row_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if header_pending {
            header_pending = false;
            names = Some(line.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>());
            continue;
        }
        let mut row = Vec::with_capacity(width.unwrap_or(4));
        for (col, field) in line.split(',').enumerate() {
            let field = field.trim();
            let v: f64 = field.parse().map_err(|_| {
                parse_err(row_no, format!("column {}: `{field}` is not a number", col + 1))
            })?;
            if !v.is_finite() {
                return Err(parse_err(row_no, format!("column {}: non-finite value", col + 1)));
            }
            row.push(T::lit(v));
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(parse_err(
                    row_no,
                    format!("expected {w} fields, found {}", row.len()),
                ))
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(0, "file contains no data rows".into()));
    }
    let ts = TimeSeries::from_rows(&rows, dt).map_err(|e| parse_err(rows.len(), e.to_string()))?;
    match names {
        Some(names) if names.len() == ts.channels() => ts.with_channel_names(names),
        Some(names) => Err(parse_err(
            1,
            format!("header has {} names for {} columns", names.len(), ts.channels()),
        )),
        None => Ok(ts),
    }
}

/// Writes one sample per row; a header line is emitted when the series has
/// channel names.
pub fn write_csv<T: Real, W: Write>(ts: &TimeSeries<T>, mut out: W) -> Result<()> {
    if let Some(names) = ts.channel_names() {
        writeln!(out, "{}", names.join(","))?;
    }
    write_matrix_csv(ts.values(), &mut out)
}

pub(crate) fn write_matrix_csv<T: Real, W: Write>(m: &DMatrix<T>, out: &mut W) -> Result<()> {
    let mut line = String::new();
    for i in 0..m.nrows() {
        line.clear();
        for j in 0..m.ncols() {
            if j > 0 {
                line.push(',');
            }
            // Debug formatting of f64 is the shortest round-tripping form.
            line.push_str(&format!("{:?}", m[(i, j)].as_f64()));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// How a channel's spread is measured by [`standardize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// Sample standard deviation (divisor `N - 1`).
    #[default]
    StdDev,
    /// Largest absolute deviation from the mean.
    SupNorm,
}

/// Per-channel affine map between original and standardized units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats<T: Real> {
    pub mean: Vec<T>,
    pub scale: Vec<T>,
    /// Channels whose spread was zero; their scale is pinned to 1.
    pub constant: Vec<bool>,
    pub mode: ScaleMode,
}

impl<T: Real> ChannelStats<T> {
    /// Identity map on `k` channels (used when standardization is off).
    pub fn identity(k: usize) -> Self {
        Self {
            mean: vec![T::zero(); k],
            scale: vec![T::one(); k],
            constant: vec![false; k],
            mode: ScaleMode::StdDev,
        }
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }

    pub fn to_standard(&self, channel: usize, x: T) -> T {
        (x - self.mean[channel]) / self.scale[channel]
    }

    pub fn to_original(&self, channel: usize, z: T) -> T {
        z * self.scale[channel] + self.mean[channel]
    }

    /// Standardizes a stacked delay state (`k` channels repeated).
    pub fn standardize_state(&self, state: &[T]) -> Vec<T> {
        let k = self.channels();
        state
            .iter()
            .enumerate()
            .map(|(i, &x)| self.to_standard(i % k, x))
            .collect()
    }

    pub fn original_state(&self, state: &[T]) -> Vec<T> {
        let k = self.channels();
        state
            .iter()
            .enumerate()
            .map(|(i, &z)| self.to_original(i % k, z))
            .collect()
    }

    /// Maps an `n x k` matrix in standardized units back to original units.
    pub fn unstandardize_matrix(&self, m: &DMatrix<T>) -> DMatrix<T> {
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| self.to_original(j, m[(i, j)]))
    }

    pub fn unstandardize(&self, ts: &TimeSeries<T>) -> Result<TimeSeries<T>> {
        self.check(ts)?;
        let mut out = TimeSeries::new(self.unstandardize_matrix(ts.values()), ts.dt())?;
        out.channel_names = ts.channel_names.clone();
        Ok(out)
    }

    pub fn apply(&self, ts: &TimeSeries<T>) -> Result<TimeSeries<T>> {
        self.check(ts)?;
        let v = ts.values();
        let values = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| self.to_standard(j, v[(i, j)]));
        let mut out = TimeSeries::new(values, ts.dt())?;
        out.channel_names = ts.channel_names.clone();
        Ok(out)
    }

    fn check(&self, ts: &TimeSeries<T>) -> Result<()> {
        if ts.channels() != self.channels() {
            return Err(Error::Shape(format!(
                "series has {} channels, statistics cover {}",
                ts.channels(),
                self.channels()
            )));
        }
        Ok(())
    }
}

/// Centers every channel and divides it by its spread.
pub fn standardize<T: Real>(ts: &TimeSeries<T>, mode: ScaleMode) -> (TimeSeries<T>, ChannelStats<T>) {
    let n = ts.len();
    let nf = T::from_usize_lossy(n);
    let k = ts.channels();
    let mut stats = ChannelStats {
        mean: Vec::with_capacity(k),
        scale: Vec::with_capacity(k),
        constant: Vec::with_capacity(k),
        mode,
    };
    for col in ts.values().column_iter() {
        let mean = col.iter().copied().sum::<T>() / nf;
        let spread = match mode {
            ScaleMode::StdDev => {
                let ss: T = col.iter().map(|&x| (x - mean) * (x - mean)).sum();
                (ss / T::from_usize_lossy(n - 1)).sqrt()
            }
            ScaleMode::SupNorm => col
                .iter()
                .map(|&x| (x - mean).abs())
                .fold(T::zero(), |a, b| a.max(b)),
        };
        let tiny = T::machine_eps() * (T::one() + mean.abs());
        let constant = !(spread > tiny);
        stats.mean.push(mean);
        stats.scale.push(if constant { T::one() } else { spread });
        stats.constant.push(constant);
    }
    let out = stats.apply(ts).expect("statistics built from this series");
    (out, stats)
}

/// Delay-coordinate states built from a [`TimeSeries`].
///
/// State `n` is `(y[n+Q], y[n+Q-1], ..., y[n])`: the newest sample first,
/// then successively older ones. Internally each state is one column of a
/// `k(Q+1) x N'` matrix so that states are contiguous in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedSeries<T: Real> {
    data: DMatrix<T>,
    delays: usize,
    origin_index: usize,
    dt: T,
    channels: usize,
}

impl<T: Real> EmbeddedSeries<T> {
    /// Rebuilds an embedding from its column-per-state storage.
    pub fn from_state_columns(
        data: DMatrix<T>,
        delays: usize,
        origin_index: usize,
        dt: T,
        channels: usize,
    ) -> Result<Self> {
        if channels == 0 || data.nrows() != channels * (delays + 1) {
            return Err(Error::Shape(format!(
                "state dimension {} does not match {channels} channels x {} slots",
                data.nrows(),
                delays + 1
            )));
        }
        if data.ncols() == 0 {
            return Err(Error::InvalidArgument("embedding has no states".into()));
        }
        Ok(Self {
            data,
            delays,
            origin_index,
            dt,
            channels,
        })
    }

    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn delays(&self) -> usize {
        self.delays
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn origin_index(&self) -> usize {
        self.origin_index
    }

    pub fn state(&self, n: usize) -> &[T] {
        let d = self.dim();
        &self.data.as_slice()[n * d..(n + 1) * d]
    }

    /// Slot `q` (0 = newest) of state `n`, i.e. `y[n + Q - q]`.
    pub fn slot(&self, n: usize, q: usize) -> &[T] {
        let k = self.channels;
        &self.state(n)[q * k..(q + 1) * k]
    }

    /// Column-per-state storage (`k(Q+1) x N'`).
    pub fn state_columns(&self) -> &DMatrix<T> {
        &self.data
    }

    /// Row-per-state view (`N' x k(Q+1)`).
    pub fn states(&self) -> DMatrix<T> {
        self.data.transpose()
    }

    /// Source index of the newest sample in state `n`.
    pub fn source_index(&self, n: usize) -> usize {
        self.origin_index + n + self.delays
    }

    /// Timestamp of the newest sample in state `n`.
    pub fn state_time(&self, n: usize) -> T {
        T::from_usize_lossy(self.source_index(n)) * self.dt
    }

    /// The first `count` states.
    pub fn truncated(&self, count: usize) -> Result<Self> {
        if count == 0 || count > self.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot keep {count} of {} states",
                self.len()
            )));
        }
        Ok(Self {
            data: self.data.columns(0, count).into_owned(),
            ..self.clone()
        })
    }
}

/// Stacks `Q + 1` consecutive samples into each state.
pub fn delay_embed<T: Real>(ts: &TimeSeries<T>, delays: usize) -> Result<EmbeddedSeries<T>> {
    let n = ts.len();
    if delays >= n {
        return Err(Error::InvalidArgument(format!(
            "{delays} delays need more than {n} samples"
        )));
    }
    let k = ts.channels();
    let count = n - delays;
    let dim = k * (delays + 1);
    let v = ts.values();
    let data = DMatrix::from_fn(dim, count, |r, state| {
        let slot = r / k;
        let channel = r % k;
        v[(state + delays - slot, channel)]
    });
    EmbeddedSeries::from_state_columns(data, delays, 0, ts.dt(), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(rows: &[&[f64]]) -> TimeSeries<f64> {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        TimeSeries::from_rows(&rows, 1.0).unwrap()
    }

    #[test]
    fn parses_plain_csv() {
        let ts: TimeSeries<f64> = read_csv("1,2\n3,4\n5,6".as_bytes(), "mem", 1.0, false).unwrap();
        assert_eq!(ts.len(), 3);
        assert_eq!(ts.channels(), 2);
        assert_eq!(ts.sample(2), vec![5.0, 6.0]);
    }

    #[test]
    fn header_row_is_not_a_sample() {
        let ts: TimeSeries<f64> =
            read_csv("a,b\n1,2\n3,4\n5,6\n".as_bytes(), "mem", 0.5, true).unwrap();
        assert_eq!(ts.len(), 3);
        assert_eq!(ts.channel_names().unwrap(), ["a", "b"]);
        assert_eq!(ts.dt(), 0.5);
    }

    #[test]
    fn non_numeric_field_names_row() {
        let err = read_csv::<f64, _>("1,abc".as_bytes(), "mem", 1.0, false).unwrap_err();
        match err {
            Error::Parse { row, ref message, .. } => {
                assert_eq!(row, 1);
                assert!(message.contains("abc"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_and_empty_inputs_fail() {
        let err = read_csv::<f64, _>("1,2\n3\n".as_bytes(), "mem", 1.0, false).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }), "{err}");
        let err = read_csv::<f64, _>("".as_bytes(), "mem", 1.0, false).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = read_csv::<f64, _>("1\n".as_bytes(), "mem", 1.0, false).unwrap_err();
        assert!(err.to_string().contains("at least 2"), "{err}");
    }

    #[test]
    fn rejects_bad_dt() {
        assert!(TimeSeries::new(DMatrix::<f64>::zeros(3, 1), 0.0).is_err());
        assert!(TimeSeries::new(DMatrix::<f64>::zeros(3, 1), -1.0).is_err());
    }

    #[test]
    fn standardize_small_channel() {
        let (z, stats) = standardize(&series(&[&[2.0], &[4.0], &[6.0]]), ScaleMode::StdDev);
        assert_eq!(stats.mean[0], 4.0);
        assert_eq!(stats.scale[0], 2.0);
        assert_eq!(z.values().as_slice(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn standardize_is_idempotent() {
        let (z, _) = standardize(&series(&[&[2.0], &[4.0], &[6.0], &[11.0]]), ScaleMode::StdDev);
        let (z2, stats) = standardize(&z, ScaleMode::StdDev);
        for (a, b) in z.values().iter().zip(z2.values().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(stats.mean[0].abs() < 1e-12);
    }

    #[test]
    fn constant_channel_is_flagged() {
        let (z, stats) = standardize(&series(&[&[5.0, 1.0], &[5.0, 2.0], &[5.0, 3.0]]), ScaleMode::StdDev);
        assert_eq!(z.values().column(0).as_slice(), &[0.0, 0.0, 0.0]);
        assert_eq!(stats.scale[0], 1.0);
        assert!(stats.constant[0]);
        assert!(!stats.constant[1]);
    }

    #[test]
    fn sup_norm_mode() {
        let (z, stats) = standardize(&series(&[&[1.0], &[2.0], &[6.0]]), ScaleMode::SupNorm);
        assert_eq!(stats.scale[0], 3.0);
        let max = z.values().iter().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!((max - 1.0).abs() < 1e-15);
    }

    #[test]
    fn embed_scalar_series() {
        let ts = series(&[&[1.0], &[2.0], &[3.0], &[4.0], &[5.0]]);
        let emb = delay_embed(&ts, 2).unwrap();
        assert_eq!(emb.len(), 3);
        assert_eq!(emb.state(0), &[3.0, 2.0, 1.0]);
        assert_eq!(emb.state(1), &[4.0, 3.0, 2.0]);
        assert_eq!(emb.state(2), &[5.0, 4.0, 3.0]);
        assert_eq!(emb.state_time(0), 2.0);
    }

    #[test]
    fn zero_delays_is_identity() {
        let ts = series(&[&[1.0, -1.0], &[2.0, -2.0], &[3.0, -3.0]]);
        let emb = delay_embed(&ts, 0).unwrap();
        assert_eq!(emb.states(), *ts.values());
    }

    #[test]
    fn state_dimension_is_k_times_slots() {
        let ts = TimeSeries::new(DMatrix::<f64>::from_fn(60, 3, |i, j| (i * 3 + j) as f64), 1.0).unwrap();
        let emb = delay_embed(&ts, 50).unwrap();
        assert_eq!(emb.dim(), 153);
        assert_eq!(emb.len(), 10);
    }

    #[test]
    fn too_many_delays() {
        let ts = series(&[&[1.0], &[2.0]]);
        assert!(matches!(delay_embed(&ts, 2), Err(Error::InvalidArgument(_))));
    }

    fn arb_series() -> impl Strategy<Value = (Vec<Vec<f64>>, usize)> {
        (1usize..4, 2usize..30).prop_flat_map(|(k, n)| {
            (
                prop::collection::vec(prop::collection::vec(-1e6f64..1e6, k), n),
                0..n,
            )
        })
    }

    proptest! {
        #[test]
        fn slots_reproduce_source_samples((rows, q) in arb_series()) {
            let ts = TimeSeries::from_rows(&rows, 1.0).unwrap();
            let emb = delay_embed(&ts, q).unwrap();
            prop_assert_eq!(emb.len(), rows.len() - q);
            for n in 0..emb.len() {
                for s in 0..=q {
                    prop_assert_eq!(emb.slot(n, s), rows[n + q - s].as_slice());
                }
            }
        }

        #[test]
        fn standardize_round_trip((rows, _) in arb_series()) {
            let ts = TimeSeries::from_rows(&rows, 1.0).unwrap();
            let (z, stats) = standardize(&ts, ScaleMode::StdDev);
            let back = stats.unstandardize(&z).unwrap();
            for c in 0..ts.channels() {
                let col = ts.values().column(c);
                let magnitude = 1.0 + col.amax();
                for (a, b) in col.iter().zip(back.values().column(c).iter()) {
                    prop_assert!((a - b).abs() <= 1e-12 * magnitude);
                }
            }
        }

        #[test]
        fn csv_round_trip((rows, _) in arb_series()) {
            let ts = TimeSeries::from_rows(&rows, 0.25).unwrap();
            let mut buf = Vec::new();
            write_csv(&ts, &mut buf).unwrap();
            let back: TimeSeries<f64> = read_csv(buf.as_slice(), "mem", 0.25, false).unwrap();
            prop_assert_eq!(back, ts);
        }
    }
}
