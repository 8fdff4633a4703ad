//! Command-line front end.
//!
//! Exit status: 0 on success, 1 for usage and configuration errors, 2 for
//! runtime failures (including any failed run).

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{
    efficiency_cdf, partial_dependence, summarize, write_cdf_csv, write_summary_csv,
    BootstrapOptions, Dataset, Var, SUMMARY_PERIODS,
};
use crate::config::GridConfig;
use crate::dataset::{load_dataset, sha256_file, DatasetWriter, Manifest, MANIFEST_FILE};
use crate::engine::{run_grid_streaming, GridOptions};
use crate::error::{Error, Result};

pub const OUT_ENV: &str = "ORGSEARCH_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "orgsearch",
    version,
    about = "Simulate organizations searching NK landscapes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a grid configuration and report its cells.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Execute a grid and write records, transfers and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        exec: ExecArgs,
        /// Also dump final beliefs of every run.
        #[arg(long)]
        beliefs: bool,
    },
    /// Compute analysis tables from a dataset directory.
    Analyze {
        #[command(flatten)]
        out: OutArg,
        #[arg(long)]
        figure: Option<Figure>,
        /// Comma-separated partial-dependence scope, e.g. `t,alpha`.
        #[arg(long)]
        scope: Option<String>,
        #[arg(long, default_value_t = 1000)]
        bootstrap: usize,
    },
    /// Run a grid and compute the tables behind one figure.
    ReproduceFigure {
        #[arg(long)]
        figure: Figure,
        /// Grid configuration; the full parameter grid when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        exec: ExecArgs,
        #[arg(long, default_value_t = 1000)]
        bootstrap: usize,
    },
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output directory.
    #[arg(long, env = OUT_ENV, default_value = "orgsearch-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExecArgs {
    #[command(flatten)]
    pub out: OutArg,
    /// Worker threads.
    #[arg(long, default_value_t = default_jobs())]
    pub jobs: usize,
    /// Replaces the configured master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replaces the configured number of replications.
    #[arg(long = "s-override")]
    pub s_override: Option<u32>,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Replications used by `reproduce-figure` without a config file.
pub const FIGURE_REPLICATIONS: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Performance against complexity, by alpha and mode.
    Fig2,
    /// Performance against time and against pair probability.
    Fig3,
    /// Efficiency distributions.
    Fig4,
}

impl FromStr for Figure {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            _ => Err(format!(
                "unknown figure `{s}` (expected fig2, fig3 or fig4)"
            )),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
        })
    }
}

impl Figure {
    pub fn pd_scopes(self) -> Vec<Vec<Var>> {
        match self {
            Figure::Fig2 => vec![vec![Var::Kind, Var::Alpha, Var::TauMode]],
            Figure::Fig3 => vec![
                vec![Var::Time, Var::Alpha, Var::TauMode, Var::Kind],
                vec![Var::PairProb, Var::Alpha, Var::TauMode, Var::Kind],
            ],
            Figure::Fig4 => Vec::new(),
        }
    }

    pub fn cdf_grouping(self) -> Option<Vec<Var>> {
        (self == Figure::Fig4).then(|| vec![Var::TauMode, Var::Alpha, Var::Kind])
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 1,
        _ => 2,
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn execute(command: Command) -> Result<u8> {
    match command {
        Command::Validate { config } => {
            let cfg = GridConfig::load(&config)?;
            let cells = cfg.cells()?;
            println!(
                "{}: valid, {} grid cells, {} replications each, config hash {}",
                config.display(),
                cells.len(),
                cfg.replications,
                cfg.hash()?
            );
            Ok(0)
        }
        Command::Run {
            config,
            exec,
            beliefs,
        } => {
            let cfg = apply_overrides(GridConfig::load(&config)?, &exec)?;
            let manifest = run_to_dir(&cfg, &exec, beliefs)?;
            Ok(if manifest.complete { 0 } else { 2 })
        }
        Command::Analyze {
            out,
            figure,
            scope,
            bootstrap,
        } => {
            let scopes = match &scope {
                Some(s) => vec![Var::parse_scope(s).map_err(|e| Error::Config(e.to_string()))?],
                None => Vec::new(),
            };
            analyze_dir(&out.out, figure, &scopes, bootstrap)?;
            Ok(0)
        }
        Command::ReproduceFigure {
            figure,
            config,
            exec,
            bootstrap,
        } => {
            let cfg = match &config {
                Some(path) => GridConfig::load(path)?,
                None => {
                    let seed = exec.seed.ok_or_else(|| {
                        Error::Config("--seed is required when no --config is given".into())
                    })?;
                    GridConfig::standard_grid(seed, FIGURE_REPLICATIONS)
                }
            };
            let cfg = apply_overrides(cfg, &exec)?;
            let manifest = run_to_dir(&cfg, &exec, false)?;
            analyze_dir(&exec.out.out, Some(figure), &[], bootstrap)?;
            Ok(if manifest.complete { 0 } else { 2 })
        }
    }
}

fn apply_overrides(mut cfg: GridConfig, exec: &ExecArgs) -> Result<GridConfig> {
    if let Some(seed) = exec.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(s) = exec.s_override {
        if s == 0 {
            return Err(Error::Config("--s-override must be at least 1".into()));
        }
        cfg = cfg.with_replications(s);
    }
    cfg.seed()?;
    Ok(cfg)
}

/// Executes `cfg` and writes the dataset into the output directory.
pub fn run_to_dir(cfg: &GridConfig, exec: &ExecArgs, beliefs: bool) -> Result<Manifest> {
    let cells = cfg.cells()?;
    for c in &cells {
        c.validate()?;
    }
    let dir = &exec.out.out;
    let mut writer = DatasetWriter::create(dir, &cells, beliefs)?;
    let total = cells.len();
    let mut failed = 0usize;
    run_grid_streaming(
        &cells,
        GridOptions {
            parallelism: exec.jobs,
            keep_beliefs: beliefs,
        },
        |outcome| match outcome {
            Ok(record) => writer.write_run(&record),
            Err(failure) => {
                eprintln!(
                    "run {} of cell {} failed: {}",
                    failure.run, failure.config_id, failure.message
                );
                writer.write_failure(failure);
                Ok(())
            }
        },
        |config_id, outcomes| {
            failed += outcomes.iter().filter(|o| o.is_err()).count();
            eprintln!(
                "cell {}/{} done: {} runs, {} failed so far",
                config_id + 1,
                total,
                outcomes.len(),
                failed
            );
        },
    )?;
    let manifest = writer.finish(cfg)?;
    println!(
        "wrote {} runs of {} cells to {}{}",
        manifest.runs_total - manifest.runs_failed,
        manifest.cells,
        dir.display(),
        if manifest.complete {
            ""
        } else {
            " (incomplete: see manifest failures)"
        }
    );
    Ok(manifest)
}

#[derive(Debug, Serialize)]
struct AnalysisRecord {
    dataset_manifest_sha256: String,
    config_hash: String,
    outputs: std::collections::BTreeMap<String, String>,
}

/// Reads the dataset in `dir` and writes the requested tables next to it.
pub fn analyze_dir(
    dir: &Path,
    figure: Option<Figure>,
    scopes: &[Vec<Var>],
    resamples: usize,
) -> Result<()> {
    let (manifest, data) = load_dataset(dir)?;
    let boot = BootstrapOptions {
        resamples,
        seed: manifest.master_seed,
        ..BootstrapOptions::default()
    };
    let mut outputs = Vec::new();

    let mut all_scopes: Vec<Vec<Var>> = figure.map(Figure::pd_scopes).unwrap_or_default();
    all_scopes.extend(scopes.iter().cloned());
    for scope in &all_scopes {
        let table = partial_dependence(&data, scope, boot)?;
        let name = table.file_name();
        table.write_csv(&dir.join(&name))?;
        outputs.push(name);
    }
    if let Some(grouping) = figure.and_then(Figure::cdf_grouping) {
        write_cdf(&data, &grouping, dir)?;
        outputs.push("eff_cdf.csv".into());
    }
    let rows = summarize(&data, &summary_periods(&manifest), boot);
    write_summary_csv(&data, &rows, &dir.join("summary.csv"))?;
    outputs.push("summary.csv".into());

    let mut hashes = std::collections::BTreeMap::new();
    for name in &outputs {
        hashes.insert(name.clone(), sha256_file(&dir.join(name))?);
    }
    let record = AnalysisRecord {
        dataset_manifest_sha256: sha256_file(&dir.join(MANIFEST_FILE))?,
        config_hash: manifest.config_hash.clone(),
        outputs: hashes,
    };
    let path = dir.join("analysis.json");
    std::fs::write(&path, serde_json::to_string_pretty(&record)? + "\n")
        .map_err(|e| Error::io(&path, e))?;
    println!("wrote {} to {}", outputs.join(", "), dir.display());
    Ok(())
}

fn write_cdf(data: &Dataset, grouping: &[Var], dir: &Path) -> Result<()> {
    let groups = efficiency_cdf(data, grouping)?;
    write_cdf_csv(grouping, &groups, &dir.join("eff_cdf.csv"))
}

fn summary_periods(manifest: &Manifest) -> Vec<u32> {
    let mut periods = SUMMARY_PERIODS.to_vec();
    periods.push(manifest.config.horizon);
    periods
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_ids() {
        assert_eq!("fig3".parse::<Figure>().unwrap(), Figure::Fig3);
        assert!("fig5".parse::<Figure>().is_err());
        assert_eq!(Figure::Fig4.to_string(), "fig4");
        assert!(Figure::Fig4.pd_scopes().is_empty());
        assert_eq!(Figure::Fig3.pd_scopes().len(), 2);
    }

    #[test]
    fn unknown_figure_is_a_usage_error() {
        let code = main_with_args(["orgsearch", "analyze", "--figure", "fig9"]);
        assert_eq!(code, ExitCode::from(1));
    }

    #[test]
    fn parses_run_flags() {
        let cli = Cli::try_parse_from([
            "orgsearch",
            "run",
            "--config",
            "g.toml",
            "--out",
            "o",
            "--jobs",
            "3",
            "--seed",
            "9",
            "--s-override",
            "4",
        ])
        .unwrap();
        match cli.command {
            Command::Run { exec, .. } => {
                assert_eq!(exec.jobs, 3);
                assert_eq!(exec.seed, Some(9));
                assert_eq!(exec.s_override, Some(4));
                assert_eq!(exec.out.out, PathBuf::from("o"));
            }
            other => panic!("{other:?}"),
        }
    }
}
