use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mixrad::complexity::GapVariant;
use mixrad::{Error, FamilyKind};

mod manifest;
mod run;

use manifest::{RunManifest, MANIFEST, TOOL_VERSION};
use run::{
    BregmanRun, CenterSpec, DataSource, Fig1Run, Fig2Run, GapAlphaRun, GapRun, LinearRun, NnRun, Outcome, Run,
};

#[derive(Parser)]
#[command(
    name = "mixrad",
    version,
    about = "Mixup and Rademacher-complexity bound calculators, sweeps and checks"
)]
struct Cli {
    /// Worker threads; changes wall time only, never the output bytes.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Complexity and generalization bounds for one dataset.
    Radbound {
        #[command(subcommand)]
        which: Radbound,
    },
    /// Parameter sweeps driven by a JSON config.
    Sweep {
        #[command(subcommand)]
        which: Sweep,
    },
    /// Exponential-family curvature check under mean-mixing.
    Bregman(BregmanArgs),
    /// Re-run a command from its manifest.json.
    Replay(ReplayArgs),
}

#[derive(Subcommand)]
enum Radbound {
    /// Norm-bounded linear class.
    Linear(LinearArgs),
    /// Frobenius-bounded ReLU network class.
    Nn(NnArgs),
    /// Generalization gap from a complexity value.
    Gap(GapArgs),
}

#[derive(Subcommand)]
enum Sweep {
    Fig1(SweepArgs),
    Fig2(SweepArgs),
    GapAlpha(SweepArgs),
}

#[derive(Args)]
struct OutArgs {
    /// Directory for results.csv and manifest.json. Without it, results go
    /// to stdout and the manifest to stderr.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Dataset CSV with header f0,f1,...[,label].
    #[arg(long)]
    data: Option<PathBuf>,
    /// Generate this many rows from N(1, sigma2 I) instead.
    #[arg(long)]
    gen_n: Option<usize>,
}

#[derive(Args)]
struct DataArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 1)]
    gen_d: usize,
    #[arg(long, default_value_t = 1.0)]
    gen_sigma2: f64,
}

impl DataArgs {
    fn resolve(&self) -> Result<DataSource, Failure> {
        match (&self.source.data, self.source.gen_n) {
            (Some(path), _) => {
                let path = fs::canonicalize(path).map_err(|e| Failure::io(path, e))?;
                Ok(DataSource::File { path })
            }
            (None, Some(n)) => Ok(DataSource::Gaussian { n, d: self.gen_d, sigma2: self.gen_sigma2 }),
            (None, None) => unreachable!("clap requires one source"),
        }
    }
}

#[derive(Args)]
struct LinearArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Weight norm cap of the linear class.
    #[arg(long, default_value_t = 1.0)]
    cap_lambda: f64,
    /// Mixing weight; adds the mixup and reduction bounds.
    #[arg(long)]
    lam: Option<f64>,
    /// Sign draws for a Monte Carlo complexity estimate.
    #[arg(long)]
    draws: Option<usize>,
    /// Exact complexity by enumeration (n <= 20).
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct NnArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    depth: u32,
    /// Frobenius norm budget of the last layer.
    #[arg(long)]
    frob: f64,
    #[arg(long)]
    lam: Option<f64>,
    /// `mean` for the sample mean, or comma-separated coordinates.
    #[arg(long, default_value = "mean")]
    center: String,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Expected,
    Empirical,
}

#[derive(Args)]
struct GapArgs {
    #[arg(long)]
    rad: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long, value_enum, default_value = "expected")]
    variant: VariantArg,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct BregmanArgs {
    /// gaussian_unit_var, poisson or bernoulli.
    #[arg(long)]
    family: FamilyKind,
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
    #[arg(long)]
    lam: f64,
    #[arg(long)]
    draws: usize,
    #[arg(long)]
    seed: u64,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Numerical(String),
}

impl Failure {
    fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Io(format!("{}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Io(_) => 3,
            Self::Numerical(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) | Self::Io(m) | Self::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidInput(_) | Error::BudgetExceeded { .. } => Self::Usage(msg),
            Error::Numerical(_) => Self::Numerical(msg),
            Error::Io(_) => Self::Io(msg),
            Error::Csv(c) if c.is_io_error() => Self::Io(msg),
            Error::Csv(_) => Self::Usage(msg),
        }
    }
}

fn parse_center(s: &str) -> Result<CenterSpec, Failure> {
    if s == "mean" {
        return Ok(CenterSpec::SampleMean);
    }
    s.split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map(CenterSpec::Given)
        .map_err(|e| Failure::Usage(format!("--center: expected `mean` or numbers, {e}")))
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))
}

/// Turns parsed arguments into a run record plus the output directory.
fn resolve(command: Command) -> Result<(Run, Option<PathBuf>), Failure> {
    Ok(match command {
        Command::Radbound { which: Radbound::Linear(a) } => (
            Run::Linear(LinearRun {
                data: a.data.resolve()?,
                cap_lambda: a.cap_lambda,
                lam: a.lam,
                draws: a.draws,
                exact: a.exact,
                seed: a.seed,
            }),
            a.out.out,
        ),
        Command::Radbound { which: Radbound::Nn(a) } => (
            Run::Nn(NnRun {
                data: a.data.resolve()?,
                depth: a.depth,
                frob: a.frob,
                lam: a.lam,
                center: parse_center(&a.center)?,
                seed: a.seed,
            }),
            a.out.out,
        ),
        Command::Radbound { which: Radbound::Gap(a) } => (
            Run::Gap(GapRun {
                rad: a.rad,
                n: a.n,
                delta: a.delta,
                variant: match a.variant {
                    VariantArg::Expected => GapVariant::Expected,
                    VariantArg::Empirical => GapVariant::Empirical,
                },
            }),
            a.out.out,
        ),
        Command::Sweep { which } => match which {
            Sweep::Fig1(a) => (Run::Fig1(read_config::<Fig1Run>(&a.config)?), a.out.out),
            Sweep::Fig2(a) => (Run::Fig2(read_config::<Fig2Run>(&a.config)?), a.out.out),
            Sweep::GapAlpha(a) => (Run::GapAlpha(read_config::<GapAlphaRun>(&a.config)?), a.out.out),
        },
        Command::Bregman(a) => (
            Run::Bregman(BregmanRun {
                family: a.family,
                theta: a.theta,
                lam: a.lam,
                draws: a.draws,
                seed: a.seed,
                h: a.h,
            }),
            a.out.out,
        ),
        Command::Replay(a) => {
            let m: RunManifest = read_config(&a.manifest)?;
            if m.tool_version != TOOL_VERSION {
                eprintln!("warning: manifest written by {}, replaying with {TOOL_VERSION}", m.tool_version);
            }
            (m.run, a.out.out)
        }
    })
}

fn write_outputs(run: Run, outcome: Outcome, out: Option<&Path>) -> Result<(), Failure> {
    let paths = outcome.artifacts.iter().map(|a| a.name.to_string()).collect();
    let manifest = RunManifest::new(run, paths).to_json();
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
            for a in &outcome.artifacts {
                let path = dir.join(a.name);
                fs::write(&path, &a.bytes).map_err(|e| Failure::io(&path, e))?;
            }
            let path = dir.join(MANIFEST);
            fs::write(&path, manifest).map_err(|e| Failure::io(&path, e))?;
        }
        None => {
            let stdout = Path::new("<stdout>");
            std::io::stdout().write_all(&outcome.artifacts[0].bytes).map_err(|e| Failure::io(stdout, e))?;
            eprint!("{manifest}");
        }
    }
    Ok(())
}

fn main_inner(cli: Cli) -> Result<(), Failure> {
    let (run, out) = resolve(cli.command)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| run.execute())?;
    let failures = outcome.failures;
    write_outputs(run, outcome, out.as_deref())?;
    if failures > 0 {
        return Err(Failure::Numerical(format!("{failures} training runs diverged; see results")));
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
