//! Stage dumps and plot files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rppg_core::vitals::{detect_peaks, Analysis};
use rppg_core::{Error, PipelineConfig, Recording, Result, RoiId};

use crate::svg::{Chart, Series};

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(text, "{}", cells.join(",")).expect("writing to a String");
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// `<dir>/<roi>_stages.csv` for every usable ROI, one row per kept frame.
pub fn dump_stages(dir: &Path, analysis: &Analysis) -> Result<()> {
    create_dir(dir)?;
    let header = [
        "frame",
        "time_s",
        "raw_r",
        "raw_g",
        "raw_b",
        "denoised_r",
        "denoised_g",
        "denoised_b",
        "normalized_r",
        "normalized_g",
        "normalized_b",
        "ica",
        "detrended",
        "bvp",
    ];
    for (roi, s) in &analysis.stages {
        let rows = s.kept().iter().enumerate().map(|(k, &frame)| {
            vec![
                frame as f64,
                frame as f64 / s.fps,
                s.raw[0][k],
                s.raw[1][k],
                s.raw[2][k],
                s.denoised[0][k],
                s.denoised[1][k],
                s.denoised[2][k],
                s.normalized[0][k],
                s.normalized[1][k],
                s.normalized[2][k],
                s.ica[k],
                s.detrended[k],
                s.bvp.samples()[k],
            ]
        });
        write_csv(&dir.join(format!("{roi}_stages.csv")), &header, rows)?;
    }
    Ok(())
}

fn scaled(x: &[f64]) -> Vec<f64> {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    x.iter().map(|v| (v - lo) / span).collect()
}

/// Per ROI: `<roi>_raw.csv`, `<roi>_bvp.csv` (with a 0/1 peak column),
/// `<roi>_psd.csv` and a three-panel `<roi>.svg`. ROIs that produced no
/// pulse signal get the raw CSV only.
pub fn plot(dir: &Path, rec: &Recording, analysis: &Analysis, cfg: &PipelineConfig) -> Result<()> {
    create_dir(dir)?;
    for (&roi, trace) in &rec.traces {
        let t = |i: usize| i as f64 / trace.fps();
        let [r, g, b] = trace.channels();
        write_csv(
            &dir.join(format!("{roi}_raw.csv")),
            &["time_s", "r", "g", "b"],
            (0..trace.len()).map(|i| vec![t(i), r[i], g[i], b[i]]),
        )?;
        let (Some(stages), Some(psd)) = (analysis.stages.get(&roi), analysis.psds.get(&roi)) else {
            continue;
        };
        let bvp = stages.bvp.samples();
        let peaks = detect_peaks(&stages.bvp, cfg.peak_min_distance_s);
        let peak_idx: Vec<usize> = peaks
            .iter()
            .map(|p| (p * stages.fps).round() as usize)
            .collect();
        write_csv(
            &dir.join(format!("{roi}_bvp.csv")),
            &["time_s", "bvp", "peak"],
            (0..bvp.len()).map(|i| vec![t(i), bvp[i], f64::from(u8::from(peak_idx.contains(&i)))]),
        )?;
        write_csv(
            &dir.join(format!("{roi}_psd.csv")),
            &["freq_hz", "power"],
            psd.freqs()
                .iter()
                .zip(psd.power())
                .map(|(&f, &p)| vec![f, p]),
        )?;

        let times: Vec<f64> = (0..trace.len()).map(t).collect();
        let raw = Chart::new("Raw channel means (scaled)", "time (s)")
            .series(Series::line(&times, &scaled(r), "#c0392b"))
            .series(Series::line(&times, &scaled(g), "#27ae60"))
            .series(Series::line(&times, &scaled(b), "#2471a3"));
        let bvp_times: Vec<f64> = (0..bvp.len()).map(t).collect();
        let peak_values: Vec<f64> = peak_idx.iter().map(|&i| bvp[i]).collect();
        let pulse = Chart::new("Pulse signal and peaks", "time (s)")
            .series(Series::line(&bvp_times, bvp, "#333333"))
            .series(Series::points(&peaks, &peak_values, "#c0392b"));
        let band: Vec<usize> = (0..psd.len())
            .filter(|&k| psd.freqs()[k] <= cfg.hr_band[1] * 1.25)
            .collect();
        let f: Vec<f64> = band.iter().map(|&k| psd.freqs()[k]).collect();
        let p: Vec<f64> = band.iter().map(|&k| psd.power()[k]).collect();
        let title = if roi == analysis.report.selected_roi {
            format!("PSD, {:.1} bpm (selected)", analysis.report.hr_bpm)
        } else {
            "PSD".to_string()
        };
        let spectrum = Chart::new(&title, "frequency (Hz)").series(Series::line(&f, &p, "#333333"));
        let svg = crate::svg::render(roi_label(roi), &[raw, pulse, spectrum]);
        let path = dir.join(format!("{roi}.svg"));
        fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn roi_label(roi: RoiId) -> &'static str {
    match roi {
        RoiId::Forehead => "Forehead",
        RoiId::CheekNose => "Cheeks and nose",
        RoiId::FaceNoMouth => "Face without mouth",
    }
}
