use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDateTime;
use log::{info, warn};
use serde::Serialize;

use super::TimeVaryingSignal;
use crate::error::{Error, Result};
use crate::spectral::GraphSignal;

const TIME_FORMAT: &str = "%Y-%m-%d %H:%M:%S%.f";

/// Readings outside this range (°C) are sensor faults, e.g. the 122 °C values
/// logged by motes with failing batteries.
const PLAUSIBLE_TEMPERATURE: (f64, f64) = (-20.0, 60.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
}

impl TimeWindow {
    /// Parses two `YYYY-MM-DD HH:MM:SS` timestamps.
    pub fn parse(start: &str, end: &str) -> Result<Self> {
        let parse = |s: &str| {
            NaiveDateTime::parse_from_str(s, TIME_FORMAT)
                .map_err(|e| Error::InvalidArgument(format!("bad timestamp {s:?}: {e}")))
        };
        let window = Self {
            start: parse(start)?,
            end: parse(end)?,
        };
        if window.end < window.start {
            return Err(Error::InvalidArgument("window ends before it starts".into()));
        }
        Ok(window)
    }

    fn contains(&self, t: NaiveDateTime) -> bool {
        self.start <= t && t <= self.end
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub rows_read: usize,
    pub malformed_rows: usize,
    pub implausible_rows: usize,
    pub rows_in_range: usize,
    /// Motes with in-window readings but no known location.
    pub unlocated_motes: Vec<u32>,
    /// Located motes with no usable reading in the window.
    pub excluded_motes: Vec<u32>,
    /// Grid values filled from the spatially nearest mote.
    pub spatial_fills: usize,
    /// Grid values clamped to the mote's nearest reading in time.
    pub edge_fills: usize,
}

#[derive(Debug, Clone)]
pub struct IntelLabData {
    /// Mote ids in vertex order.
    pub motes: Vec<u32>,
    pub points: Vec<[f64; 2]>,
    pub times: Vec<NaiveDateTime>,
    pub signal: TimeVaryingSignal,
    pub report: LoadReport,
}

/// Reads `moteid x y` lines.
pub fn read_mote_locations(path: &Path) -> Result<BTreeMap<u32, [f64; 2]>> {
    let text = std::fs::read_to_string(path)?;
    let mut locs = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed = match fields.as_slice() {
            [id, x, y] => id
                .parse::<u32>()
                .ok()
                .zip(x.parse::<f64>().ok())
                .zip(y.parse::<f64>().ok())
                .map(|((id, x), y)| (id, [x, y])),
            _ => None,
        };
        let (id, xy) = parsed.ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            msg: "expected `moteid x y`".into(),
        })?;
        locs.insert(id, xy);
    }
    Ok(locs)
}

struct Reading {
    t: f64,
    value: f64,
}

/// Loads the temperature channel of the Intel lab log as a time-varying
/// graph signal over the located motes.
///
/// Each mote's readings inside `window` are linearly interpolated onto a
/// uniform grid of `resample_seconds`. Grid points a mote cannot bracket are
/// filled from the nearest mote (by location) that can; if none can, the
/// mote's own closest reading in time is used. Motes without any usable
/// reading are dropped and listed in the report.
pub fn load_intel_lab(
    data_path: &Path,
    locations: &BTreeMap<u32, [f64; 2]>,
    window: &TimeWindow,
    resample_seconds: u32,
) -> Result<IntelLabData> {
    if resample_seconds == 0 {
        return Err(Error::InvalidArgument("resample interval must be positive".into()));
    }
    let text = std::fs::read_to_string(data_path)?;
    let mut report = LoadReport::default();
    let mut by_mote: BTreeMap<u32, Vec<Reading>> = BTreeMap::new();

    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        report.rows_read += 1;
        let Some((t, mote, temp)) = parse_row(line) else {
            report.malformed_rows += 1;
            continue;
        };
        if !window.contains(t) {
            continue;
        }
        if !(PLAUSIBLE_TEMPERATURE.0..=PLAUSIBLE_TEMPERATURE.1).contains(&temp) {
            report.implausible_rows += 1;
            continue;
        }
        report.rows_in_range += 1;
        let secs = (t - window.start).num_milliseconds() as f64 / 1000.0;
        by_mote.entry(mote).or_default().push(Reading { t: secs, value: temp });
    }
    if report.malformed_rows > 0 {
        warn!("{}: skipped {} malformed rows", data_path.display(), report.malformed_rows);
    }
    if report.rows_in_range == 0 {
        return Err(Error::NoRowsInRange);
    }

    report.unlocated_motes = by_mote
        .keys()
        .copied()
        .filter(|id| !locations.contains_key(id))
        .collect();
    report.excluded_motes = locations
        .keys()
        .copied()
        .filter(|id| by_mote.get(id).is_none_or(|r| r.is_empty()))
        .collect();
    let motes: Vec<u32> = locations
        .keys()
        .copied()
        .filter(|id| by_mote.contains_key(id))
        .collect();
    if !report.excluded_motes.is_empty() {
        info!("excluded motes without data: {:?}", report.excluded_motes);
    }
    let points: Vec<[f64; 2]> = motes.iter().map(|id| locations[id]).collect();

    let span = (window.end - window.start).num_seconds();
    let grid_len = (span / i64::from(resample_seconds)) as usize + 1;
    let times: Vec<NaiveDateTime> = (0..grid_len)
        .map(|i| window.start + chrono::Duration::seconds(i as i64 * i64::from(resample_seconds)))
        .collect();

    // temporal pass
    let mut grid: Vec<Vec<Option<f64>>> = motes
        .iter()
        .map(|id| {
            let readings = by_mote.get_mut(id).expect("mote has readings");
            readings.sort_by(|a, b| a.t.total_cmp(&b.t));
            (0..grid_len)
                .map(|i| interpolate(readings, (i as u64 * u64::from(resample_seconds)) as f64))
                .collect()
        })
        .collect();

    // spatial pass, reading only temporally interpolated values
    let dist2 = |a: usize, b: usize| {
        let dx = points[a][0] - points[b][0];
        let dy = points[a][1] - points[b][1];
        dx * dx + dy * dy
    };
    let temporal = grid.clone();
    for (v, row) in grid.iter_mut().enumerate() {
        for (i, slot) in row.iter_mut().enumerate() {
            if slot.is_some() {
                continue;
            }
            let donor = (0..motes.len())
                .filter(|&w| w != v && temporal[w][i].is_some())
                .min_by(|&a, &b| dist2(v, a).total_cmp(&dist2(v, b)).then(a.cmp(&b)));
            if let Some(w) = donor {
                *slot = temporal[w][i];
                report.spatial_fills += 1;
            } else {
                let readings = &by_mote[&motes[v]];
                let t = (i as u64 * u64::from(resample_seconds)) as f64;
                *slot = readings
                    .iter()
                    .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
                    .map(|r| r.value);
                report.edge_fills += 1;
            }
        }
    }

    let frames = (0..grid_len)
        .map(|i| {
            GraphSignal::from(
                grid.iter()
                    .map(|row| row[i].expect("every grid value filled"))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();

    Ok(IntelLabData {
        motes,
        points,
        times,
        signal: TimeVaryingSignal::from_frames(frames)?,
        report,
    })
}

fn parse_row(line: &str) -> Option<(NaiveDateTime, u32, f64)> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 8 {
        return None;
    }
    let t = NaiveDateTime::parse_from_str(&format!("{} {}", fields[0], fields[1]), TIME_FORMAT).ok()?;
    let mote = fields[3].parse().ok()?;
    let temp: f64 = fields[4].parse().ok()?;
    temp.is_finite().then_some((t, mote, temp))
}

fn interpolate(readings: &[Reading], t: f64) -> Option<f64> {
    let after = readings.partition_point(|r| r.t < t);
    if let Some(r) = readings.get(after) {
        if r.t == t {
            return Some(r.value);
        }
    }
    let hi = readings.get(after)?;
    let lo = readings.get(after.checked_sub(1)?)?;
    let w = (t - lo.t) / (hi.t - lo.t);
    Some(lo.value + w * (hi.value - lo.value))
}
