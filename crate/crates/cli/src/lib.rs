//! Experiment harness behind the `limabean` binary.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod spec;

use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;

pub use error::CliError;
pub use manifest::RunManifest;
pub use spec::{Command, ExperimentSpec};

#[derive(Debug, Parser)]
#[command(name = "limabean", version, about = "Random-walk spectra and Brown-measure experiments")]
pub struct Cli {
    pub command: Command,
    /// Experiment spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Output directory; defaults to the spec's `output_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for trial- and cell-level parallelism.
    #[arg(long, env = "LIMABEAN_THREADS")]
    pub threads: Option<usize>,
}

/// Runs one command and writes its manifest.
pub fn run(cli: &Cli) -> Result<RunManifest, CliError> {
    let mut spec = ExperimentSpec::load(&cli.spec)?;
    if spec.command != cli.command {
        return Err(CliError::Invalid(format!(
            "spec is for `{}`, not `{}`",
            spec.command.as_str(),
            cli.command.as_str()
        )));
    }
    if let Some(seed) = cli.seed {
        spec.walk.seed = seed;
    }
    let spec_dir = cli.spec.parent().map(PathBuf::from).unwrap_or_default();
    let out_dir = match (&cli.out, &spec.output_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => spec_dir.join(o),
        (None, None) => return Err(CliError::Invalid("no output directory: pass --out".into())),
    };
    if cli.threads == Some(0) {
        return Err(CliError::Invalid("--threads must be at least 1".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;

    let mut out = manifest::OutputDir::create(&out_dir)?;
    let start = Instant::now();
    let passed = pool.install(|| commands::execute(&spec, &spec_dir, &mut out))?;
    out.finish(&spec, pool.current_num_threads(), start.elapsed().as_secs_f64(), passed)
}
