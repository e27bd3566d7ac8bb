//! ROI trace CSV files.
//!
//! ```text
//! # fps=30
//! frame,roi,mean_r,mean_g,mean_b
//! 0,forehead,151.2,120.4,99.8
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::domain::{RoiId, RoiTrace};
use crate::error::{Error, Result};

pub const HEADER: &str = "frame,roi,mean_r,mean_g,mean_b";

#[derive(Debug, Deserialize)]
struct Row {
    frame: usize,
    roi: String,
    mean_r: f64,
    mean_g: f64,
    mean_b: f64,
}

fn parse_fps(path: &Path, text: &str) -> Result<f64> {
    let mut fps = None;
    for line in text.lines().filter(|l| l.trim_start().starts_with('#')) {
        let body = line.trim_start().trim_start_matches('#').trim();
        if let Some(value) = body.strip_prefix("fps=") {
            let parsed: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::format(path, format!("bad fps value {value:?}")))?;
            if fps.replace(parsed).is_some() {
                return Err(Error::format(path, "fps given more than once"));
            }
        }
    }
    let fps = fps.ok_or_else(|| Error::format(path, "missing '# fps=<real>' line"))?;
    if !(fps.is_finite() && fps > 0.0) {
        return Err(Error::InvalidFps(fps));
    }
    Ok(fps)
}

/// Parses trace CSV text; `path` only labels errors.
pub fn parse_trace(path: &Path, text: &str) -> Result<BTreeMap<RoiId, RoiTrace>> {
    let fps = parse_fps(path, text)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::format(path, e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != HEADER {
        return Err(Error::format(
            path,
            format!("expected header {HEADER:?}, found {header:?}"),
        ));
    }

    let mut rows: BTreeMap<RoiId, Vec<(usize, [f64; 3])>> = BTreeMap::new();
    for record in reader.deserialize::<Row>() {
        let row = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::MalformedRow {
                path: path.to_path_buf(),
                line,
                msg: e.to_string(),
            }
        })?;
        let roi: RoiId = row.roi.parse()?;
        rows.entry(roi)
            .or_default()
            .push((row.frame, [row.mean_r, row.mean_g, row.mean_b]));
    }
    if rows.is_empty() {
        return Err(Error::format(path, "no data rows"));
    }

    let mut traces = BTreeMap::new();
    for (roi, mut samples) in rows {
        samples.sort_by_key(|&(frame, _)| frame);
        for (expected, &(found, _)) in samples.iter().enumerate() {
            if found != expected {
                return Err(Error::format(
                    path,
                    format!("{roi}: expected frame {expected}, found {found}"),
                ));
            }
        }
        let channel = |c: usize| samples.iter().map(|(_, v)| v[c]).collect::<Vec<f64>>();
        let trace = RoiTrace::new(roi, fps, channel(0), channel(1), channel(2))?;
        traces.insert(roi, trace);
    }
    Ok(traces)
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<BTreeMap<RoiId, RoiTrace>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(path, &text)
}

/// Renders traces in the file format. Values use the shortest representation
/// that parses back to the same `f64`.
pub fn render_trace(traces: &BTreeMap<RoiId, RoiTrace>) -> Result<String> {
    let Some(first) = traces.values().next() else {
        return Err(Error::Invalid("empty trace set".into()));
    };
    let fps = first.fps();
    if let Some(t) = traces.values().find(|t| t.fps() != fps) {
        return Err(Error::Invalid(format!(
            "traces disagree on fps: {} vs {}",
            fps,
            t.fps()
        )));
    }
    let mut out = format!("# fps={fps}\n{HEADER}\n");
    for (roi, trace) in traces {
        let [r, g, b] = trace.channels();
        for i in 0..trace.len() {
            writeln!(out, "{i},{roi},{},{},{}", r[i], g[i], b[i]).expect("writing to a String");
        }
    }
    Ok(out)
}

pub fn write_trace(traces: &BTreeMap<RoiId, RoiTrace>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = render_trace(traces)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
