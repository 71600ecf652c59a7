//! Request-rate time series: ingestion, binning, windowing, synthesis.
//!
//! All series are uniformly spaced: the point at index `i` covers the
//! interval starting at `start_time + i * lag_seconds`. Ingestion fills
//! gaps with zero so a series never has holes.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Uniformly spaced series of non-negative request counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeSeries {
    start_time: i64,
    lag_seconds: u32,
    values: Vec<u64>,
}

impl TimeSeries {
    pub fn new(start_time: i64, lag_seconds: u32, values: Vec<u64>) -> Result<TimeSeries> {
        if lag_seconds == 0 {
            return Err(Error::Config("series lag must be at least 1 second".into()));
        }
        if values.is_empty() {
            return Err(Error::Config("series must have at least one point".into()));
        }
        Ok(TimeSeries {
            start_time,
            lag_seconds,
            values,
        })
    }

    pub fn start_time(&self) -> i64 {
        self.start_time
    }

    pub fn lag_seconds(&self) -> u32 {
        self.lag_seconds
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Timestamp of the point at `index`.
    pub fn time_at(&self, index: usize) -> i64 {
        self.start_time + index as i64 * i64::from(self.lag_seconds)
    }

    /// The whole series as floats, for the forecasting layer.
    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }

    /// Writes the series in the ingestible `epoch_seconds,count` format.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
        for (i, value) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", self.time_at(i), value).map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }

    /// Reads a series written by [`TimeSeries::write_csv`], inferring the lag
    /// from the first two timestamps and requiring uniform spacing throughout.
    /// A single-row file is read as a lag-1 series.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
        let path = path.as_ref();
        let rows = read_rows(path)?;
        if rows.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                msg: "file contains no data rows".into(),
            });
        }
        let start_time = rows[0].0;
        let lag = if rows.len() >= 2 {
            let step = rows[1].0 - rows[0].0;
            u32::try_from(step).map_err(|_| Error::Unsorted {
                path: path.to_path_buf(),
                line: 2,
            })?
        } else {
            1
        };
        if lag == 0 {
            return Err(Error::Unsorted {
                path: path.to_path_buf(),
                line: 2,
            });
        }
        let mut values = Vec::with_capacity(rows.len());
        for (i, &(ts, count)) in rows.iter().enumerate() {
            let expected = start_time + i as i64 * i64::from(lag);
            if ts != expected {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    msg: format!("timestamp {ts} breaks uniform spacing (expected {expected})"),
                });
            }
            values.push(count);
        }
        TimeSeries::new(start_time, lag, values)
    }
}

/// Sliding-window geometry: lookback, horizon, and slide, all in points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub lookback: usize,
    pub horizon: usize,
    pub slide: usize,
}

impl Window {
    pub fn new(lookback: usize, horizon: usize, slide: usize) -> Result<Window> {
        if lookback == 0 || horizon == 0 || slide == 0 {
            return Err(Error::Config(format!(
                "window fields must be positive: lookback={lookback} horizon={horizon} slide={slide}"
            )));
        }
        Ok(Window {
            lookback,
            horizon,
            slide,
        })
    }
}

fn read_rows(path: &Path) -> Result<Vec<(i64, u64)>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut rows: Vec<(i64, u64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            msg,
        };
        let (ts_str, count_str) = trimmed
            .split_once(',')
            .ok_or_else(|| parse_err(format!("expected `epoch_seconds,count`, got {trimmed:?}")))?;
        let ts: i64 = ts_str
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("invalid timestamp {ts_str:?}")))?;
        let count: u64 = count_str
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("invalid count {count_str:?}")))?;
        if let Some(&(prev, _)) = rows.last() {
            if ts <= prev {
                return Err(Error::Unsorted {
                    path: path.to_path_buf(),
                    line: line_no,
                });
            }
        }
        rows.push((ts, count));
    }
    Ok(rows)
}

/// Ingests a per-second count file into a lag-1 series covering the full
/// span. Seconds absent from the file are filled with zero arrivals.
pub fn ingest_counts(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let rows = read_rows(path)?;
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: "file contains no data rows".into(),
        });
    }
    let start = rows[0].0;
    let end = rows[rows.len() - 1].0;
    let span = usize::try_from(end - start + 1).expect("span fits in usize");
    let mut values = vec![0u64; span];
    for (ts, count) in rows {
        values[(ts - start) as usize] = count;
    }
    TimeSeries::new(start, 1, values)
}

/// Re-bins a series to a coarser lag, taking the maximum of each bin.
/// A trailing partial bin is dropped.
pub fn bin_max(series: &TimeSeries, bin_lag_seconds: u32) -> Result<TimeSeries> {
    let lag = series.lag_seconds();
    if bin_lag_seconds == 0 || bin_lag_seconds % lag != 0 {
        return Err(Error::Config(format!(
            "bin lag {bin_lag_seconds}s is not a positive multiple of the series lag {lag}s"
        )));
    }
    let per_bin = (bin_lag_seconds / lag) as usize;
    let bins = series.len() / per_bin;
    if bins == 0 {
        return Err(Error::InsufficientData {
            required: per_bin,
            actual: series.len(),
        });
    }
    let values = series
        .values()
        .chunks_exact(per_bin)
        .map(|chunk| *chunk.iter().max().expect("chunk is non-empty"))
        .collect();
    TimeSeries::new(series.start_time(), bin_lag_seconds, values)
}

/// Returns the `(history, future)` slices around position `t`:
/// `history` is the `lookback` points ending at `t` inclusive, `future`
/// the `horizon` points after it.
pub fn window_at<'a>(
    series: &'a TimeSeries,
    t: usize,
    win: &Window,
) -> Result<(&'a [u64], &'a [u64])> {
    let len = series.len();
    if t + 1 < win.lookback || t + win.horizon >= len {
        return Err(Error::Range { index: t, len });
    }
    let history = &series.values()[t + 1 - win.lookback..=t];
    let future = &series.values()[t + 1..=t + win.horizon];
    Ok((history, future))
}

/// A rectangular workload spike added on top of the diurnal profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeSpec {
    /// Seconds from the start of the series.
    pub offset_s: u64,
    pub width_s: u64,
    /// Extra requests/second while the spike is active.
    pub height: f64,
}

/// Shape parameters for a synthetic per-second trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticProfile {
    pub base_rate: f64,
    /// Amplitude of the 24-hour sinusoid added to the base rate.
    pub diurnal_amplitude: f64,
    /// Uniform noise is drawn from `[-noise_amplitude, +noise_amplitude]`.
    pub noise_amplitude: f64,
    pub noise_seed: u64,
    pub spikes: Vec<SpikeSpec>,
    pub start_time: i64,
}

impl Default for SyntheticProfile {
    fn default() -> SyntheticProfile {
        SyntheticProfile {
            base_rate: 1000.0,
            diurnal_amplitude: 300.0,
            noise_amplitude: 0.0,
            noise_seed: 0,
            spikes: Vec::new(),
            start_time: 0,
        }
    }
}

const SECONDS_PER_DAY: u64 = 86_400;

/// Generates a deterministic lag-1 series: sinusoidal diurnal pattern,
/// scheduled rectangular spikes, then seeded additive noise, clamped at
/// zero and rounded to whole requests.
pub fn generate_synthetic(profile: &SyntheticProfile, days: u32) -> Result<TimeSeries> {
    if !(profile.base_rate > 0.0) {
        return Err(Error::Config(format!(
            "base_rate must be positive, got {}",
            profile.base_rate
        )));
    }
    if profile.diurnal_amplitude < 0.0 || profile.noise_amplitude < 0.0 {
        return Err(Error::Config(
            "amplitudes must be non-negative".to_string(),
        ));
    }
    if days == 0 {
        return Err(Error::Config("days must be at least 1".into()));
    }
    let len = days as u64 * SECONDS_PER_DAY;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.noise_seed);
    let mut values = Vec::with_capacity(len as usize);
    for t in 0..len {
        let phase = (t % SECONDS_PER_DAY) as f64 / SECONDS_PER_DAY as f64;
        let mut v = profile.base_rate
            + profile.diurnal_amplitude * (2.0 * std::f64::consts::PI * phase).sin();
        for spike in &profile.spikes {
            if t >= spike.offset_s && t < spike.offset_s + spike.width_s {
                v += spike.height;
            }
        }
        // Draw unconditionally so the stream position does not depend on
        // the noise amplitude.
        let noise: f64 = rng.gen_range(-1.0..=1.0) * profile.noise_amplitude;
        values.push((v + noise).round().max(0.0) as u64);
    }
    TimeSeries::new(profile.start_time, 1, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: Vec<u64>) -> TimeSeries {
        TimeSeries::new(0, 1, values).unwrap()
    }

    fn write_rows(rows: &[(i64, u64)]) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let body: String = rows
            .iter()
            .map(|(t, c)| format!("{t},{c}\n"))
            .collect();
        std::fs::write(&path, body).unwrap();
        (dir, path)
    }

    #[test]
    fn ingest_copies_contiguous_rows() {
        let (_dir, path) = write_rows(&[(100, 5), (101, 7)]);
        let ts = ingest_counts(&path).unwrap();
        assert_eq!(ts.start_time(), 100);
        assert_eq!(ts.lag_seconds(), 1);
        assert_eq!(ts.values(), &[5, 7]);
    }

    #[test]
    fn ingest_fills_gaps_with_zero() {
        let (_dir, path) = write_rows(&[(100, 5), (102, 7)]);
        let ts = ingest_counts(&path).unwrap();
        assert_eq!(ts.values(), &[5, 0, 7]);
    }

    #[test]
    fn ingest_rejects_malformed_rows_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "100,5\nnot-a-row\n").unwrap();
        match ingest_counts(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ingest_rejects_unsorted_timestamps() {
        let (_dir, path) = write_rows(&[(100, 5), (99, 7)]);
        assert!(matches!(
            ingest_counts(&path),
            Err(Error::Unsorted { line: 2, .. })
        ));
        let (_dir, path) = write_rows(&[(100, 5), (100, 7)]);
        assert!(matches!(ingest_counts(&path), Err(Error::Unsorted { .. })));
    }

    #[test]
    fn ingest_rejects_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(ingest_counts(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn bin_max_takes_per_bin_maximum() {
        let ts = series(vec![3, 9, 4, 4, 4, 8]);
        let binned = bin_max(&ts, 3).unwrap();
        assert_eq!(binned.lag_seconds(), 3);
        assert_eq!(binned.values(), &[9, 8]);
    }

    #[test]
    fn bin_max_is_idempotent_on_constants() {
        let ts = series(vec![7; 12]);
        let binned = bin_max(&ts, 4).unwrap();
        assert_eq!(binned.values(), &[7, 7, 7]);
    }

    #[test]
    fn bin_max_drops_trailing_partial_bin() {
        let ts = series(vec![1, 2, 3, 4, 5, 6, 7]);
        let binned = bin_max(&ts, 3).unwrap();
        assert_eq!(binned.len(), 2);
        assert_eq!(binned.values(), &[3, 6]);
    }

    #[test]
    fn bin_max_validates_lag_multiple() {
        let ts = TimeSeries::new(0, 2, vec![1, 2, 3]).unwrap();
        assert!(matches!(bin_max(&ts, 3), Err(Error::Config(_))));
        assert!(matches!(bin_max(&ts, 0), Err(Error::Config(_))));
    }

    #[test]
    fn bin_max_needs_one_full_bin() {
        let ts = series(vec![1, 2]);
        assert!(matches!(
            bin_max(&ts, 3),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn ingest_then_bin_matches_bruteforce_minute_maxima() {
        // Ten minutes of pseudo-random counts with some missing seconds.
        let mut rows = Vec::new();
        let mut x: u64 = 7;
        for t in 0..600i64 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            if x % 5 == 0 && t != 0 && t != 599 {
                continue; // leave a gap
            }
            rows.push((t, x % 1000));
        }
        let (_dir, path) = write_rows(&rows);
        let ts = ingest_counts(&path).unwrap();
        let binned = bin_max(&ts, 60).unwrap();
        for minute in 0..10usize {
            let brute = (0..60)
                .map(|s| {
                    let t = (minute * 60 + s) as i64;
                    rows.iter()
                        .find(|&&(rt, _)| rt == t)
                        .map(|&(_, c)| c)
                        .unwrap_or(0)
                })
                .max()
                .unwrap();
            assert_eq!(binned.values()[minute], brute, "minute {minute}");
        }
    }

    #[test]
    fn window_at_splits_history_and_future() {
        let ts = series(vec![1, 2, 3, 4, 5]);
        let win = Window::new(3, 2, 1).unwrap();
        let (hist, fut) = window_at(&ts, 2, &win).unwrap();
        assert_eq!(hist, &[1, 2, 3]);
        assert_eq!(fut, &[4, 5]);
    }

    #[test]
    fn window_at_boundary_and_minimal_cases() {
        let ts = series(vec![1, 2, 3, 4, 5]);
        let win = Window::new(2, 2, 1).unwrap();
        let (hist, fut) = window_at(&ts, 2, &win).unwrap();
        assert_eq!(hist, &[2, 3]);
        assert_eq!(fut, &[4, 5]);

        let ts2 = series(vec![10, 20]);
        let win = Window::new(1, 1, 1).unwrap();
        let (hist, fut) = window_at(&ts2, 0, &win).unwrap();
        assert_eq!(hist, &[10]);
        assert_eq!(fut, &[20]);
    }

    #[test]
    fn window_at_rejects_out_of_range() {
        let ts = series(vec![1, 2, 3, 4, 5]);
        let win = Window::new(3, 2, 1).unwrap();
        assert!(matches!(
            window_at(&ts, 1, &win),
            Err(Error::Range { .. })
        ));
        assert!(matches!(
            window_at(&ts, 3, &win),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn synthetic_degenerate_profile_is_constant() {
        let profile = SyntheticProfile {
            base_rate: 250.0,
            diurnal_amplitude: 0.0,
            noise_amplitude: 0.0,
            ..SyntheticProfile::default()
        };
        let ts = generate_synthetic(&profile, 1).unwrap();
        assert_eq!(ts.len(), 86_400);
        assert!(ts.values().iter().all(|&v| v == 250));
    }

    #[test]
    fn synthetic_is_deterministic_per_seed() {
        let profile = SyntheticProfile {
            base_rate: 500.0,
            diurnal_amplitude: 100.0,
            noise_amplitude: 25.0,
            noise_seed: 42,
            ..SyntheticProfile::default()
        };
        let a = generate_synthetic(&profile, 1).unwrap();
        let b = generate_synthetic(&profile, 1).unwrap();
        assert_eq!(a, b);
        let other_seed = SyntheticProfile {
            noise_seed: 43,
            ..profile
        };
        let c = generate_synthetic(&other_seed, 1).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn synthetic_spike_raises_exactly_its_window() {
        let spike = SpikeSpec {
            offset_s: 3600,
            width_s: 60,
            height: 500.0,
        };
        let base = SyntheticProfile {
            base_rate: 400.0,
            diurnal_amplitude: 50.0,
            noise_amplitude: 0.0,
            ..SyntheticProfile::default()
        };
        let spiked = SyntheticProfile {
            spikes: vec![spike],
            ..base.clone()
        };
        let plain = generate_synthetic(&base, 1).unwrap();
        let with_spike = generate_synthetic(&spiked, 1).unwrap();
        for t in 0..86_400usize {
            let expected = if (3600..3660).contains(&t) {
                plain.values()[t] + 500
            } else {
                plain.values()[t]
            };
            assert_eq!(with_spike.values()[t], expected, "second {t}");
        }
    }

    #[test]
    fn synthetic_rejects_bad_profiles() {
        let bad_base = SyntheticProfile {
            base_rate: 0.0,
            ..SyntheticProfile::default()
        };
        assert!(generate_synthetic(&bad_base, 1).is_err());
        let bad_amp = SyntheticProfile {
            diurnal_amplitude: -1.0,
            ..SyntheticProfile::default()
        };
        assert!(generate_synthetic(&bad_amp, 1).is_err());
    }

    #[test]
    fn csv_roundtrip_preserves_series() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let ts = TimeSeries::new(1000, 60, vec![5, 0, 9, 3]).unwrap();
        ts.write_csv(&path).unwrap();
        let back = TimeSeries::read_csv(&path).unwrap();
        assert_eq!(back, ts);
    }

    #[test]
    fn read_csv_rejects_nonuniform_spacing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "0,1\n60,2\n90,3\n").unwrap();
        assert!(matches!(
            TimeSeries::read_csv(&path),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
