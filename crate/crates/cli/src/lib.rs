//! Scenario-driven front end for `mmcert`: parses scenario files, runs
//! classifications, scans and checks, and writes CSV/JSON outputs with a
//! hashed manifest.

pub mod commands;
pub mod error;
pub mod output;
pub mod scenario;

use std::path::{Path, PathBuf};

pub use commands::{Command, Status};
pub use error::{CliError, Result};
pub use output::{ManifestEntry, Outputs};
pub use scenario::Scenario;

/// Environment variable that sets the output directory when `--out` is absent.
pub const OUT_DIR_ENV: &str = "MMCERT_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FATAL: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

/// Options shared by every subcommand.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub scenario: PathBuf,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

/// `--out`, then the environment override, then `./out`.
pub fn output_dir(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
    }
}

/// Loads the scenario, applies the command-line overrides and runs `cmd`
/// on a dedicated thread pool. Returns the manifest and the run status.
pub fn execute(cmd: Command, opts: &RunOptions) -> Result<(Vec<ManifestEntry>, Status)> {
    let mut scenario = Scenario::load(&opts.scenario)?;
    if let (Some(seed), Scenario::SyntheticPfm(s)) = (opts.seed, &mut scenario) {
        s.seed = seed;
    }
    let base = opts.scenario.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut out = Outputs::create(&output_dir(opts.out.as_deref()))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let result = pool.install(|| commands::run(cmd, &scenario, &base, &mut out));
    // The manifest is written even when some rows or the check failed.
    let manifest = out.finish()?;
    Ok((manifest, result?))
}

pub fn exit_code(result: &Result<(Vec<ManifestEntry>, Status)>) -> i32 {
    match result {
        Ok((_, Status::Complete)) => EXIT_OK,
        Ok((_, Status::Partial(_))) => EXIT_PARTIAL,
        Err(_) => EXIT_FATAL,
    }
}
