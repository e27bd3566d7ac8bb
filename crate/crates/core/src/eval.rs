//! Batch evaluation against ground truth with per-condition MAE tables.
//!
//! Dataset layout: each `recording_id` resolves to either `<id>.csv` (with an
//! optional `<id>.quality.json` sidecar) or a directory `<id>/` holding
//! `frames/`, `landmarks.json` and `recording.json` (`{"fps": <real>}`), plus
//! an optional `roi_defs.json`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::domain::{PipelineConfig, RoiId, VitalsReport};
use crate::error::{Error, Result};
use crate::format::{round_sig, sig6, sig6_opt};
use crate::ingest::{default_roi_defs, load_landmarks, load_roi_defs};
use crate::luminance::LuminanceThresholds;
use crate::recording::Recording;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub recording_id: String,
    pub condition: String,
    pub hr_bpm: Option<f64>,
    pub rmssd_ms: Option<f64>,
    pub spo2_pct: Option<f64>,
}

impl GroundTruth {
    pub fn validate(&self) -> Result<()> {
        if self.recording_id.trim().is_empty() {
            return Err(Error::Invalid("empty recording id".into()));
        }
        let vitals = [self.hr_bpm, self.rmssd_ms, self.spo2_pct];
        if vitals.iter().all(Option::is_none) {
            return Err(Error::MissingVitals(self.recording_id.clone()));
        }
        if let Some(v) = vitals
            .iter()
            .flatten()
            .find(|v| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::Invalid(format!(
                "recording {}: vital value {v} must be positive",
                self.recording_id
            )));
        }
        Ok(())
    }

    pub fn value(&self, vital: Vital) -> Option<f64> {
        match vital {
            Vital::Hr => self.hr_bpm,
            Vital::Hrv => self.rmssd_ms,
            Vital::Spo2 => self.spo2_pct,
        }
    }
}

/// Parses ground-truth CSV text; `path` only labels errors.
pub fn parse_ground_truth(path: &Path, text: &str) -> Result<Vec<GroundTruth>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out: Vec<GroundTruth> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for record in reader.deserialize::<GroundTruth>() {
        let gt = record.map_err(|e| Error::MalformedRow {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        gt.validate()?;
        if !seen.insert(gt.recording_id.clone()) {
            return Err(Error::DuplicateRecording(gt.recording_id));
        }
        out.push(gt);
    }
    if out.is_empty() {
        return Err(Error::format(path, "ground truth lists no recordings"));
    }
    Ok(out)
}

pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<Vec<GroundTruth>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ground_truth(path, &text)
}

/// Mean absolute error of `(predicted, truth)` pairs.
pub fn mae(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Invalid("MAE of no pairs".into()));
    }
    Ok(pairs.iter().map(|(p, t)| (p - t).abs()).sum::<f64>() / pairs.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vital {
    Hr,
    Hrv,
    Spo2,
}

impl Vital {
    pub const ALL: [Vital; 3] = [Vital::Hr, Vital::Hrv, Vital::Spo2];

    pub fn key(self) -> &'static str {
        match self {
            Vital::Hr => "hr_bpm",
            Vital::Hrv => "rmssd_ms",
            Vital::Spo2 => "spo2_pct",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Vital::Hr => "HR (bpm)",
            Vital::Hrv => "HRV (ms)",
            Vital::Spo2 => "SpO2 (%)",
        }
    }

    fn predicted(self, report: &VitalsReport) -> Option<f64> {
        match self {
            Vital::Hr => Some(report.hr_bpm),
            Vital::Hrv => report.rmssd_ms,
            Vital::Spo2 => report.spo2_pct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaeCell {
    #[serde(serialize_with = "sig6")]
    pub mae: f64,
    pub n: usize,
}

/// One MAE cell per vital; `None` where no pair exists.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VitalRow(pub BTreeMap<Vital, MaeCell>);

impl VitalRow {
    pub fn get(&self, vital: Vital) -> Option<MaeCell> {
        self.0.get(&vital).copied()
    }
}

impl Serialize for VitalRow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(Vital::ALL.len()))?;
        for v in Vital::ALL {
            m.serialize_entry(v.key(), &self.get(v))?;
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionRow {
    pub condition: String,
    #[serde(flatten)]
    pub cells: VitalRow,
}

/// Predicted vitals of one analyzed recording.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub recording_id: String,
    pub condition: String,
    #[serde(serialize_with = "sig6")]
    pub hr_bpm: f64,
    #[serde(serialize_with = "sig6_opt")]
    pub rmssd_ms: Option<f64>,
    #[serde(serialize_with = "sig6_opt")]
    pub spo2_pct: Option<f64>,
    pub selected_roi: RoiId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Skipped {
    pub recording_id: String,
    pub reason: String,
}

/// Per-condition, pooled and mean-of-conditions MAE.
///
/// `overall` pools absolute errors across conditions; `mean_of_conditions`
/// averages the per-condition MAEs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaeTable {
    pub conditions: Vec<ConditionRow>,
    pub overall: VitalRow,
    pub mean_of_conditions: VitalRow,
    pub recordings: Vec<Prediction>,
    pub skipped: Vec<Skipped>,
    pub config_hash: String,
}

/// Outcome of analyzing one ground-truth recording.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Analyzed(VitalsReport),
    Skipped(String),
}

/// Absolute errors grouped by condition, conditions in first-appearance order.
fn errors_by_condition(
    truths: &[GroundTruth],
    outcomes: &BTreeMap<String, Outcome>,
) -> Vec<(String, BTreeMap<Vital, Vec<f64>>)> {
    let mut groups: Vec<(String, BTreeMap<Vital, Vec<f64>>)> = Vec::new();
    for gt in truths {
        let idx = match groups.iter().position(|(c, _)| *c == gt.condition) {
            Some(i) => i,
            None => {
                groups.push((gt.condition.clone(), BTreeMap::new()));
                groups.len() - 1
            }
        };
        let Some(Outcome::Analyzed(report)) = outcomes.get(&gt.recording_id) else {
            continue;
        };
        for vital in Vital::ALL {
            if let (Some(p), Some(t)) = (vital.predicted(report), gt.value(vital)) {
                groups[idx].1.entry(vital).or_default().push((p - t).abs());
            }
        }
    }
    groups
}

fn cell(errors: &[f64]) -> MaeCell {
    MaeCell {
        mae: errors.iter().sum::<f64>() / errors.len() as f64,
        n: errors.len(),
    }
}

/// Builds the table from per-recording outcomes. Recordings missing from
/// `outcomes` or skipped contribute to no cell.
pub fn aggregate(
    truths: &[GroundTruth],
    outcomes: &BTreeMap<String, Outcome>,
    config_hash: &str,
) -> Result<MaeTable> {
    let analyzed = outcomes
        .values()
        .filter(|o| matches!(o, Outcome::Analyzed(_)))
        .count();
    let mut skipped: Vec<Skipped> = outcomes
        .iter()
        .filter_map(|(id, o)| match o {
            Outcome::Skipped(reason) => Some(Skipped {
                recording_id: id.clone(),
                reason: reason.clone(),
            }),
            Outcome::Analyzed(_) => None,
        })
        .collect();
    skipped.sort_by(|a, b| a.recording_id.cmp(&b.recording_id));
    if analyzed == 0 {
        return Err(Error::NoAnalyzedRecordings {
            skipped: skipped
                .into_iter()
                .map(|s| (s.recording_id, s.reason))
                .collect(),
        });
    }

    let groups = errors_by_condition(truths, outcomes);
    let mut pooled: BTreeMap<Vital, Vec<f64>> = BTreeMap::new();
    let mut per_condition_mae: BTreeMap<Vital, Vec<f64>> = BTreeMap::new();
    let mut conditions = Vec::new();
    for (condition, errors) in groups {
        let mut row = VitalRow::default();
        for (vital, errs) in errors {
            let c = cell(&errs);
            per_condition_mae.entry(vital).or_default().push(c.mae);
            pooled.entry(vital).or_default().extend(errs);
            row.0.insert(vital, c);
        }
        conditions.push(ConditionRow {
            condition,
            cells: row,
        });
    }
    let overall = VitalRow(pooled.iter().map(|(&v, e)| (v, cell(e))).collect());
    let mean_of_conditions = VitalRow(
        per_condition_mae
            .iter()
            .map(|(&v, m)| {
                (
                    v,
                    MaeCell {
                        mae: m.iter().sum::<f64>() / m.len() as f64,
                        n: overall.get(v).map_or(0, |c| c.n),
                    },
                )
            })
            .collect(),
    );

    let by_id: BTreeMap<&str, &GroundTruth> = truths
        .iter()
        .map(|g| (g.recording_id.as_str(), g))
        .collect();
    let recordings = outcomes
        .iter()
        .filter_map(|(id, o)| match o {
            Outcome::Analyzed(r) => Some(Prediction {
                recording_id: id.clone(),
                condition: by_id
                    .get(id.as_str())
                    .map(|g| g.condition.clone())
                    .unwrap_or_default(),
                hr_bpm: r.hr_bpm,
                rmssd_ms: r.rmssd_ms,
                spo2_pct: r.spo2_pct,
                selected_roi: r.selected_roi,
            }),
            Outcome::Skipped(_) => None,
        })
        .collect();

    Ok(MaeTable {
        conditions,
        overall,
        mean_of_conditions,
        recordings,
        skipped,
        config_hash: config_hash.to_string(),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordingMeta {
    fps: f64,
}

/// Resolves `id` under `dataset` and loads it.
pub fn load_dataset_recording(
    dataset: &Path,
    id: &str,
    thresholds: &LuminanceThresholds,
) -> Result<Recording> {
    let trace = dataset.join(format!("{id}.csv"));
    if trace.is_file() {
        return Recording::from_trace(&trace);
    }
    let dir = dataset.join(id);
    if !dir.is_dir() {
        return Err(Error::format(
            &trace,
            format!("recording {id}: neither {id}.csv nor {id}/ exists"),
        ));
    }
    let meta_path = dir.join("recording.json");
    let meta_text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: RecordingMeta =
        serde_json::from_str(&meta_text).map_err(|e| Error::format(&meta_path, e.to_string()))?;
    let landmarks = load_landmarks(dir.join("landmarks.json"))?;
    let defs_path = dir.join("roi_defs.json");
    let defs = if defs_path.is_file() {
        load_roi_defs(&defs_path)?
    } else {
        default_roi_defs()
    };
    Recording::from_frames(dir.join("frames"), &landmarks, &defs, meta.fps, thresholds)
}

fn run_one(dataset: &Path, gt: &GroundTruth, cfg: &PipelineConfig) -> Result<Outcome> {
    let recording =
        match load_dataset_recording(dataset, &gt.recording_id, &LuminanceThresholds::default()) {
            Ok(r) => r,
            Err(e @ Error::QualityRejected(_)) => return Ok(Outcome::Skipped(e.to_string())),
            Err(e) => return Err(e),
        };
    match recording.analyze(cfg) {
        Ok(a) => Ok(Outcome::Analyzed(a.report)),
        Err(Error::InvalidConfig(msg)) => Err(Error::InvalidConfig(msg)),
        Err(e) => Ok(Outcome::Skipped(e.to_string())),
    }
}

/// Analyzes every ground-truth recording of `dataset` and tabulates MAE.
///
/// `jobs` bounds the worker threads (0 uses the rayon default). Input errors
/// abort; quality rejections and analysis failures become skips.
pub fn evaluate(
    dataset: impl AsRef<Path>,
    truths: &[GroundTruth],
    cfg: &PipelineConfig,
    jobs: usize,
) -> Result<MaeTable> {
    cfg.validate()?;
    let dataset = dataset.as_ref();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let results: Vec<(String, Outcome)> = pool.install(|| {
        truths
            .par_iter()
            .map(|gt| run_one(dataset, gt, cfg).map(|o| (gt.recording_id.clone(), o)))
            .collect::<Result<_>>()
    })?;
    aggregate(truths, &results.into_iter().collect(), &cfg.hash())
}

impl MaeTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes") + "\n"
    }

    /// Vitals as rows, conditions then `Overall` and `Mean` as columns.
    pub fn to_text(&self) -> String {
        let fmt_cell = |c: Option<MaeCell>| {
            c.map_or("-".to_string(), |c| format!("{:.2}", round_sig(c.mae, 6)))
        };
        let mut header = vec!["Vital".to_string()];
        header.extend(self.conditions.iter().map(|c| c.condition.clone()));
        header.push("Overall".into());
        header.push("Mean".into());
        let mut rows = vec![header];
        for vital in Vital::ALL {
            let mut row = vec![vital.label().to_string()];
            row.extend(self.conditions.iter().map(|c| fmt_cell(c.cells.get(vital))));
            row.push(fmt_cell(self.overall.get(vital)));
            row.push(fmt_cell(self.mean_of_conditions.get(vital)));
            rows.push(row);
        }
        let mut count_row = vec!["n (HR)".to_string()];
        count_row.extend(
            self.conditions
                .iter()
                .map(|c| c.cells.get(Vital::Hr).map_or(0, |c| c.n).to_string()),
        );
        count_row.push(self.overall.get(Vital::Hr).map_or(0, |c| c.n).to_string());
        count_row.push(String::new());
        rows.push(count_row);

        let widths: Vec<usize> = (0..rows[0].len())
            .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    if j == 0 {
                        format!("{v:<w$}", w = widths[j])
                    } else {
                        format!("{v:>w$}", w = widths[j])
                    }
                })
                .collect();
            writeln!(out, "{}", line.join("  ").trim_end()).expect("writing to a String");
        }
        for s in &self.skipped {
            writeln!(out, "skipped {}: {}", s.recording_id, s.reason).expect("writing to a String");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::QualityVerdict;
    use proptest::prelude::*;

    fn gt(
        id: &str,
        cond: &str,
        hr: Option<f64>,
        rmssd: Option<f64>,
        spo2: Option<f64>,
    ) -> GroundTruth {
        GroundTruth {
            recording_id: id.into(),
            condition: cond.into(),
            hr_bpm: hr,
            rmssd_ms: rmssd,
            spo2_pct: spo2,
        }
    }

    fn report(hr: f64, rmssd: Option<f64>, spo2: Option<f64>) -> VitalsReport {
        VitalsReport {
            hr_bpm: hr,
            rmssd_ms: rmssd,
            spo2_pct: spo2,
            selected_roi: RoiId::CheekNose,
            peak_power: 1.0,
            per_roi_peak_power: BTreeMap::new(),
            quality: QualityVerdict::Good,
            snr_db: 1.0,
            flags: Vec::new(),
            config_hash: "x".into(),
        }
    }

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[(72.6, 72.6)]).unwrap(), 0.0);
        assert_eq!(mae(&[(70.0, 72.0), (80.0, 77.0)]).unwrap(), 2.5);
        assert!((mae(&[(5.0, 5.0 + 3.25)]).unwrap() - 3.25).abs() < 1e-12);
        assert!(mae(&[]).is_err());
    }

    #[test]
    fn ground_truth_parsing() {
        let p = Path::new("gt.csv");
        let two =
            "recording_id,condition,hr_bpm,rmssd_ms,spo2_pct\na,steady,70,,98\nb,talking,,40,\n";
        let rows = parse_ground_truth(p, two).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].rmssd_ms, None);
        assert_eq!(rows[1].rmssd_ms, Some(40.0));
        let dup = "recording_id,condition,hr_bpm,rmssd_ms,spo2_pct\na,s,70,,\na,s,71,,\n";
        assert!(matches!(
            parse_ground_truth(p, dup),
            Err(Error::DuplicateRecording(_))
        ));
        let none = "recording_id,condition,hr_bpm,rmssd_ms,spo2_pct\na,s,,,\n";
        assert!(matches!(
            parse_ground_truth(p, none),
            Err(Error::MissingVitals(_))
        ));
        let empty = "recording_id,condition,hr_bpm,rmssd_ms,spo2_pct\n";
        assert!(parse_ground_truth(p, empty).is_err());
        let negative = "recording_id,condition,hr_bpm,rmssd_ms,spo2_pct\na,s,-3,,\n";
        assert!(parse_ground_truth(p, negative).is_err());
    }

    #[test]
    fn aggregate_by_hand() {
        let truths = vec![
            gt("a", "steady", Some(70.0), Some(30.0), None),
            gt("b", "steady", Some(80.0), None, Some(97.0)),
            gt("c", "talking", Some(60.0), Some(50.0), Some(99.0)),
            gt("d", "talking", Some(90.0), None, None),
        ];
        let outcomes: BTreeMap<String, Outcome> = [
            (
                "a".to_string(),
                Outcome::Analyzed(report(72.0, Some(35.0), Some(95.0))),
            ),
            (
                "b".to_string(),
                Outcome::Analyzed(report(77.0, None, Some(96.0))),
            ),
            (
                "c".to_string(),
                Outcome::Analyzed(report(66.0, Some(40.0), Some(95.0))),
            ),
            ("d".to_string(), Outcome::Skipped("too dark".into())),
        ]
        .into();
        let t = aggregate(&truths, &outcomes, "h").unwrap();
        assert_eq!(t.conditions.len(), 2);
        let steady = &t.conditions[0].cells;
        assert_eq!(steady.get(Vital::Hr), Some(MaeCell { mae: 2.5, n: 2 }));
        assert_eq!(steady.get(Vital::Hrv), Some(MaeCell { mae: 5.0, n: 1 }));
        assert_eq!(steady.get(Vital::Spo2), Some(MaeCell { mae: 1.0, n: 1 }));
        let talking = &t.conditions[1].cells;
        assert_eq!(talking.get(Vital::Hr), Some(MaeCell { mae: 6.0, n: 1 }));
        assert_eq!(
            t.overall.get(Vital::Hr),
            Some(MaeCell {
                mae: 11.0 / 3.0,
                n: 3
            })
        );
        assert_eq!(t.overall.get(Vital::Hrv), Some(MaeCell { mae: 7.5, n: 2 }));
        assert_eq!(t.overall.get(Vital::Spo2), Some(MaeCell { mae: 2.5, n: 2 }));
        assert_eq!(t.mean_of_conditions.get(Vital::Hr).unwrap().mae, 4.25);
        assert_eq!(
            t.skipped,
            vec![Skipped {
                recording_id: "d".into(),
                reason: "too dark".into()
            }]
        );
        assert_eq!(t.recordings.len(), 3);
        let text = t.to_text();
        assert!(text.starts_with("Vital"));
        assert!(
            text.contains("HR (bpm)")
                && text.contains("3.67")
                && text.contains("skipped d: too dark")
        );
    }

    #[test]
    fn single_condition_rows_match_overall() {
        let truths = vec![
            gt("a", "steady", Some(70.0), None, None),
            gt("b", "steady", Some(75.0), None, None),
        ];
        let outcomes: BTreeMap<String, Outcome> = [
            ("a".to_string(), Outcome::Analyzed(report(72.0, None, None))),
            ("b".to_string(), Outcome::Analyzed(report(71.0, None, None))),
        ]
        .into();
        let t = aggregate(&truths, &outcomes, "h").unwrap();
        assert_eq!(t.conditions[0].cells, t.overall);
        assert_eq!(t.mean_of_conditions, t.overall);
    }

    #[test]
    fn all_skipped_is_an_error() {
        let truths = vec![gt("a", "dark", Some(70.0), None, None)];
        let outcomes: BTreeMap<String, Outcome> =
            [("a".to_string(), Outcome::Skipped("too_dark".into()))].into();
        match aggregate(&truths, &outcomes, "h") {
            Err(Error::NoAnalyzedRecordings { skipped }) => {
                assert_eq!(skipped, vec![("a".into(), "too_dark".into())])
            }
            other => panic!("{other:?}"),
        }
    }

    fn scenario() -> impl Strategy<Value = Vec<(f64, f64, u8, bool)>> {
        prop::collection::vec(
            (40.0f64..180.0, -20.0f64..20.0, 0u8..3, any::<bool>()),
            1..20,
        )
    }

    fn build(rows: &[(f64, f64, u8, bool)]) -> (Vec<GroundTruth>, BTreeMap<String, Outcome>) {
        let mut truths = Vec::new();
        let mut outcomes = BTreeMap::new();
        for (i, &(truth, err, cond, skip)) in rows.iter().enumerate() {
            let id = format!("r{i:03}");
            truths.push(gt(&id, &format!("c{cond}"), Some(truth), None, None));
            let o = if skip && i > 0 {
                Outcome::Skipped("rejected".into())
            } else {
                Outcome::Analyzed(report(truth + err, None, None))
            };
            outcomes.insert(id, o);
        }
        (truths, outcomes)
    }

    proptest! {
        #[test]
        fn permutation_invariant(rows in scenario(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let (truths, outcomes) = build(&rows);
            let t1 = aggregate(&truths, &outcomes, "h").unwrap();
            let mut shuffled = truths.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let t2 = aggregate(&shuffled, &outcomes, "h").unwrap();
            let a = t1.overall.get(Vital::Hr).unwrap();
            let b = t2.overall.get(Vital::Hr).unwrap();
            prop_assert_eq!(a.n, b.n);
            prop_assert!((a.mae - b.mae).abs() < 1e-9);
            for row in &t1.conditions {
                let other = t2.conditions.iter().find(|r| r.condition == row.condition).unwrap();
                let (x, y) = (row.cells.get(Vital::Hr), other.cells.get(Vital::Hr));
                prop_assert_eq!(x.map(|c| c.n), y.map(|c| c.n));
                if let (Some(x), Some(y)) = (x, y) {
                    prop_assert!((x.mae - y.mae).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn zero_error_recording_never_increases_mae(rows in scenario(), cond in 0u8..3) {
            let (truths, outcomes) = build(&rows);
            let before = aggregate(&truths, &outcomes, "h").unwrap();
            let mut rows2 = rows.clone();
            rows2.push((75.0, 0.0, cond, false));
            let (truths2, outcomes2) = build(&rows2);
            let after = aggregate(&truths2, &outcomes2, "h").unwrap();
            let o1 = before.overall.get(Vital::Hr).unwrap().mae;
            let o2 = after.overall.get(Vital::Hr).unwrap().mae;
            prop_assert!(o2 <= o1 + 1e-12);
            for row in &after.conditions {
                let Some(new) = row.cells.get(Vital::Hr) else { continue };
                if let Some(old) = before.conditions.iter().find(|r| r.condition == row.condition).and_then(|r| r.cells.get(Vital::Hr)) {
                    prop_assert!(new.mae <= old.mae + 1e-12);
                }
            }
        }

        #[test]
        fn skipped_never_counted(rows in scenario()) {
            let (truths, outcomes) = build(&rows);
            let t = aggregate(&truths, &outcomes, "h").unwrap();
            let analyzed = outcomes.values().filter(|o| matches!(o, Outcome::Analyzed(_))).count();
            prop_assert_eq!(t.overall.get(Vital::Hr).unwrap().n, analyzed);
            prop_assert_eq!(t.skipped.len(), rows.len() - analyzed);
            let total: usize = t.conditions.iter().filter_map(|r| r.cells.get(Vital::Hr)).map(|c| c.n).sum();
            prop_assert_eq!(total, analyzed);
        }
    }
}
