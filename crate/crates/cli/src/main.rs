use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use percolab_core::harness::{
    blob_report, content_hash, in_pool, parse_points, run_bounds, run_crossing, run_lower, run_pi, run_tail, run_verify,
    write_tables, ExperimentSpec, Format, Table,
};
use percolab_core::Error;

#[derive(Parser)]
#[command(name = "percolab", version, about = "Critical percolation cluster statistics and bound checks")]
struct Cli {
    /// Experiment spec (TOML).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Overrides the spec's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory (overrides the spec's output_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Both)]
    format: FormatArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Both => Format::Both,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Arm-probability table.
    Pi,
    /// Largest-cluster and long-arm-set tails, binomial moments.
    Tail,
    /// Growth tree, blobs and counting bounds for a point set.
    Blob {
        /// JSON list of coordinate pairs, e.g. '[[0,0],[3,1]]'.
        #[arg(long)]
        points: String,
        /// Box radius.
        #[arg(long)]
        n: i64,
    },
    /// Series bounds, constant fits and combinatorial sweeps.
    Bounds,
    /// Gluing construction and lower-tail estimates.
    Lower,
    /// Acceptance suite.
    Verify,
    /// Self-dual crossing probabilities.
    Crossing,
}

enum Failure {
    Core(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn report(&self) -> (u8, String) {
        let (kind, message, code) = match self {
            Failure::Usage(m) => ("usage".to_string(), m.clone(), 2),
            Failure::Core(e) => {
                let code = match e {
                    Error::Io(_) | Error::Csv(_) => 3,
                    _ => 2,
                };
                (e.kind().to_string(), e.to_string(), code)
            }
        };
        (code, json!({ "error": { "kind": kind, "message": message } }).to_string())
    }
}

fn load_spec(cli: &Cli) -> Result<ExperimentSpec, Failure> {
    let path = cli.spec.as_ref().ok_or_else(|| Failure::Usage("--spec is required for this subcommand".into()))?;
    let mut spec = ExperimentSpec::load(path)?;
    if let Some(s) = cli.seed {
        spec.master_seed = s;
    }
    if let Some(w) = cli.workers {
        spec.workers = w;
    }
    if let Some(o) = &cli.out {
        spec.output_dir = o.clone();
    }
    spec.validate()?;
    Ok(spec)
}

/// Stdout line; a closed pipe is not an error.
fn say(s: &str) {
    let _ = writeln!(std::io::stdout(), "{s}");
}

fn emit(dir: &std::path::Path, hash: &str, tables: &[Table], format: Format) -> Result<(), Failure> {
    let paths = write_tables(dir, hash, tables, format)?;
    let names: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
    say(&json!({ "spec_hash": hash, "outputs": names }).to_string());
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let format = Format::from(cli.format);
    if let Command::Blob { points, n } = &cli.command {
        let pts = parse_points(points)?;
        let spec = cli.spec.as_ref().map(|_| load_spec(&cli)).transpose()?;
        let params = match &spec {
            Some(s) => s.bound_params()?,
            None => percolab_core::bounds::BoundParams::new(2, 5.0 / 48.0)?,
        };
        let (table, report) = blob_report(&pts, *n, &params)?;
        let hash = content_hash(format!("{points}|{n}|{}", serde_json::to_string(&params).map_err(Error::from)?).as_bytes());
        let dir = cli.out.clone().or_else(|| spec.map(|s| s.output_dir));
        match dir {
            Some(d) => emit(&d, &hash, &[table], format)?,
            None => say(&serde_json::to_string_pretty(&report).map_err(Error::from)?),
        }
        return Ok(true);
    }
    let spec = load_spec(&cli)?;
    let hash = spec.hash();
    let workers = spec.workers;
    let (tables, ok) = in_pool(workers, || -> Result<(Vec<Table>, bool), Error> {
        Ok(match cli.command {
            Command::Pi => (run_pi(&spec)?, true),
            Command::Tail => (run_tail(&spec)?, true),
            Command::Bounds => (run_bounds(&spec)?, true),
            Command::Lower => (run_lower(&spec)?, true),
            Command::Crossing => (run_crossing(&spec)?, true),
            Command::Verify => run_verify(&spec, |r| {
                eprintln!("[{}] criterion {:>2} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.name, r.summary)
            })?,
            Command::Blob { .. } => unreachable!("handled above"),
        })
    })??;
    emit(&spec.output_dir, &hash, &tables, format)?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            let (code, msg) = f.report();
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}
