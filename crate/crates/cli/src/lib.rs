//! `sarpipe`: runs scenario files through the sar-core chain.
//!
//! ```text
//! sarpipe run --config scenarios/stripmap-cr-grid.toml
//! sarpipe analyze --config scenarios/stripmap-cr-grid.toml
//! SARSIM_THREADS=1 sarpipe run --config my.toml --seed 7
//! ```
//!
//! Exit codes: 0 success, 2 configuration, 3 simulation, 4 focusing,
//! 5 product formation, 6 quality/calibration, 7 file I/O.

pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod plots;
pub mod report;

use clap::{Args, Parser, Subcommand};
use config::{ScenarioConfig, Stage};
use error::PipelineError;
use manifest::RunManifest;
use pipeline::Workspace;
use std::ffi::OsString;
use std::path::PathBuf;

pub const THREADS_ENV: &str = "SARSIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "sarpipe", version, about = "Point-target SAR simulation and product pipeline")]
pub struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario TOML file.
    #[arg(long, short)]
    pub config: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the scenario output directory.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured stages in order.
    Run(ScenarioArgs),
    /// Simulate the raw echo matrix.
    Simulate(ScenarioArgs),
    /// Focus the raw matrix.
    Focus(ScenarioArgs),
    /// Compensate and annotate the focused image as an SLC.
    Slc(ScenarioArgs),
    /// Multilook, project and quantize the SLC to GRD.
    Grd(ScenarioArgs),
    /// Measure every target's impulse response.
    Analyze(ScenarioArgs),
    /// Estimate the calibration constant from the reflectors.
    Calibrate(ScenarioArgs),
    /// Noise-equivalent sigma nought of a noise-only region.
    Nesz(ScenarioArgs),
    /// Azimuth and range ambiguity ratios of the configuration.
    Ambiguity(ScenarioArgs),
    /// Summarize stage outputs as markdown.
    Report(ScenarioArgs),
    /// Check every manifest entry against the files on disk.
    Verify(ScenarioArgs),
    /// Print the scenario file JSON schema.
    Schema,
}

fn stage_of(cmd: &Command) -> Option<Stage> {
    Some(match cmd {
        Command::Simulate(_) => Stage::Simulate,
        Command::Focus(_) => Stage::Focus,
        Command::Slc(_) => Stage::Slc,
        Command::Grd(_) => Stage::Grd,
        Command::Analyze(_) => Stage::Analyze,
        Command::Calibrate(_) => Stage::Calibrate,
        Command::Nesz(_) => Stage::Nesz,
        Command::Ambiguity(_) => Stage::Ambiguity,
        Command::Report(_) => Stage::Report,
        _ => return None,
    })
}

/// Run `f` on a pool of `threads` workers, or the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(PipelineError::Config(format!("{THREADS_ENV} must be at least 1"))),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| PipelineError::Config(e.to_string())),
    }
}

fn open(a: &ScenarioArgs) -> Result<Workspace, PipelineError> {
    Workspace::open(&a.config, a.seed, a.output_dir.clone())
}

/// Execute a parsed command; the manifest is returned for stage commands.
pub fn execute(cli: Cli) -> Result<Option<RunManifest>, PipelineError> {
    let threads = cli.threads;
    match cli.command {
        Command::Schema => {
            print!("{}", ScenarioConfig::schema());
            Ok(None)
        }
        Command::Verify(a) => {
            let ws = open(&a)?;
            let m = RunManifest::load(ws.dir())?
                .ok_or_else(|| PipelineError::Io(format!("no manifest in {}", ws.dir().display())))?;
            let bad = m.verify(ws.dir());
            if !bad.is_empty() {
                return Err(PipelineError::Io(format!("hash mismatch: {}", bad.join(", "))));
            }
            println!("{} artifacts verified", m.artifacts.len());
            Ok(Some(m))
        }
        Command::Run(a) => {
            let ws = open(&a)?;
            let m = with_threads(threads, || ws.run_all())??;
            println!("{}", ws.dir().join(manifest::MANIFEST_FILE).display());
            Ok(Some(m))
        }
        cmd => {
            let stage = stage_of(&cmd).expect("stage command");
            let a = match cmd {
                Command::Simulate(a)
                | Command::Focus(a)
                | Command::Slc(a)
                | Command::Grd(a)
                | Command::Analyze(a)
                | Command::Calibrate(a)
                | Command::Nesz(a)
                | Command::Ambiguity(a)
                | Command::Report(a) => a,
                _ => unreachable!(),
            };
            let ws = open(&a)?;
            let m = with_threads(threads, || ws.run_single(stage))??;
            if stage == Stage::Report {
                print!("{}", std::fs::read_to_string(ws.dir().join(pipeline::REPORT))?);
            }
            Ok(Some(m))
        }
    }
}

/// Parse `args`, run, and return the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("sarpipe: {e}");
            e.exit_code()
        }
    }
}
