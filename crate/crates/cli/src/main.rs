//! `rppg`: extract ROI traces from frames, analyze them, evaluate against
//! ground truth, and plot the intermediate signals.
//!
//! Exit codes: 0 success, 2 quality-gate rejection, 3 input or format
//! error, 4 analysis failure.

mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rppg_core::eval::{evaluate, load_ground_truth};
use rppg_core::ingest::{default_roi_defs, load_landmarks, load_roi_defs};
use rppg_core::luminance::LuminanceThresholds;
use rppg_core::{Error, ErrorClass, PipelineConfig, Recording, Result};

#[derive(Parser)]
#[command(
    name = "rppg",
    version,
    about = "Heart rate, HRV and SpO2 from face-region color traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Pipeline configuration (JSON); unset keys take their defaults.
    #[arg(long, env = "RPPG_CONFIG")]
    config: Option<PathBuf>,
    /// Overrides the ICA seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.ica_seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Reduce frames plus landmarks to a trace file and a quality sidecar.
    Extract {
        /// Directory of frame_NNNNNN.png or .ppm files.
        frames_dir: PathBuf,
        /// Landmark JSON, one entry of 478 normalized points per frame.
        landmarks: PathBuf,
        /// Output trace CSV.
        out: PathBuf,
        /// ROI polygon definitions; the built-in set is used when omitted.
        #[arg(long)]
        roi_defs: Option<PathBuf>,
        #[arg(long)]
        fps: f64,
    },
    /// Analyze one trace file and print the vitals report.
    Analyze {
        trace: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Also write the report here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write every intermediate signal, one CSV per ROI.
        #[arg(long)]
        dump_stages: Option<PathBuf>,
    },
    /// Analyze every recording of a dataset and print the MAE table.
    Evaluate {
        dataset: PathBuf,
        ground_truth: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Worker threads; 0 picks one per core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Also write the table as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Write per-ROI CSVs and SVG charts of raw, pulse and spectrum signals.
    Plot {
        trace: PathBuf,
        out_dir: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract {
            frames_dir,
            landmarks,
            out,
            roi_defs,
            fps,
        } => {
            let landmarks = load_landmarks(&landmarks)?;
            let defs = match roi_defs {
                Some(p) => load_roi_defs(p)?,
                None => default_roi_defs(),
            };
            let rec = Recording::extract(
                &frames_dir,
                &landmarks,
                &defs,
                fps,
                &LuminanceThresholds::default(),
            )?;
            rec.save(&out)?;
            if let Some(q) = &rec.quality {
                eprintln!("quality: {}", q.verdict.as_str());
            }
            Ok(())
        }
        Command::Analyze {
            trace,
            config,
            json,
            dump_stages,
        } => {
            let cfg = config.resolve()?;
            let rec = Recording::from_trace(&trace)?;
            let analysis = rec.analyze(&cfg)?;
            let report = analysis.report.to_json() + "\n";
            print!("{report}");
            if let Some(p) = json {
                write_file(&p, &report)?;
            }
            if let Some(dir) = dump_stages {
                output::dump_stages(&dir, &analysis)?;
            }
            Ok(())
        }
        Command::Evaluate {
            dataset,
            ground_truth,
            config,
            jobs,
            json,
        } => {
            let cfg = config.resolve()?;
            let truths = load_ground_truth(&ground_truth)?;
            let table = evaluate(&dataset, &truths, &cfg, jobs)?;
            print!("{}", table.to_text());
            if let Some(p) = json {
                write_file(&p, &table.to_json())?;
            }
            Ok(())
        }
        Command::Plot {
            trace,
            out_dir,
            config,
        } => {
            let cfg = config.resolve()?;
            let rec = Recording::from_trace(&trace)?;
            let analysis = rec.analyze(&cfg)?;
            output::plot(&out_dir, &rec, &analysis, &cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Quality => 2,
                ErrorClass::Input => 3,
                ErrorClass::Analysis => 4,
            })
        }
    }
}
