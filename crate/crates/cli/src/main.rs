use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rpv_cli::commands::{
    self, equal_edges, AggregateArgs, AggregateMode, CiArgs, CiInput, CiMethod, ProjectionArg,
    SchemeArg, SimulateArgs,
};
use rpv_cli::io::{read_estimates, read_resamples, read_samples, EstimatesFile};
use rpv_cli::table::{Format, Table};
use rpv_cli::{CliError, Result};

/// Environment variable fixing the number of worker threads.
const WORKERS_ENV: &str = "RPV_WORKERS";

/// Relative Policy Value toolkit: point measures, welfare aggregation,
/// confidence intervals and coverage simulations.
#[derive(Parser)]
#[command(name = "rpv", version, about)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-policy RPV, MVPF, MSS+1 and interpretation band.
    Measure {
        /// Estimates CSV: policy_id,c_hat,p_hat[,se_c,se_p,rho,n].
        #[arg(long)]
        input: PathBuf,
    },
    /// Joint (JPV) or total (TPV) policy value of a collection.
    Aggregate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: AggregateMode,
        #[arg(long, value_enum, default_value_t = SchemeArg::Equal)]
        scheme: SchemeArg,
        /// Comma-separated weights in file order.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        weights: Option<Vec<f64>>,
        /// Exponent for --scheme lq-adjust.
        #[arg(long)]
        q: Option<f64>,
    },
    /// Confidence intervals for the RPV (and the MVPF for efron).
    Ci(CiCmd),
    /// Monte Carlo coverage and width study of the six interval families.
    Simulate(SimCmd),
}

#[derive(Args)]
struct CiCmd {
    /// Raw draws: policy_id,c,p.
    #[arg(long, conflicts_with_all = ["estimates", "resamples"], required_unless_present = "estimates")]
    samples: Option<PathBuf>,
    /// Estimates with standard errors.
    #[arg(long)]
    estimates: Option<PathBuf>,
    /// Bootstrap draws matching --estimates: policy_id,draw,c_star,p_star.
    #[arg(long, requires = "estimates")]
    resamples: Option<PathBuf>,
    /// Methods to report; repeat or separate with commas. Defaults to all
    /// methods the input supports.
    #[arg(long = "method", value_enum, value_delimiter = ',')]
    methods: Vec<CiMethod>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap draws B.
    #[arg(long, default_value_t = 1000)]
    boot: usize,
    /// Boundary draws K for the Monte Carlo projection.
    #[arg(long, default_value_t = 100_000)]
    proj_draws: usize,
    #[arg(long, value_enum, default_value_t = ProjectionArg::MonteCarlo)]
    projection: ProjectionArg,
    /// Calibrate one critical value jointly over all policies in the file.
    #[arg(long)]
    joint: bool,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct SimCmd {
    /// Replications (default 2000, or 250000 with --full-scale).
    #[arg(long)]
    reps: Option<usize>,
    /// Sample sizes, comma-separated (default 100, or 100,1000 with
    /// --full-scale).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    boot: usize,
    /// Boundary draws K (default 10000, or 100000 with --full-scale).
    #[arg(long)]
    proj_draws: Option<usize>,
    #[arg(long, value_enum, default_value_t = ProjectionArg::MonteCarlo)]
    projection: ProjectionArg,
    /// Number of equal-width bins on each axis.
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Explicit max-norm bin edges, overriding --bins.
    #[arg(long, value_delimiter = ',')]
    bins_maxnorm: Option<Vec<f64>>,
    /// Explicit |rpv| bin edges, overriding --bins.
    #[arg(long, value_delimiter = ',')]
    bins_absrpv: Option<Vec<f64>>,
    /// Per-observation covariance as var_c,cov,var_p.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "20,-10,20"
    )]
    cov: Vec<f64>,
    /// Full scale: 250000 replications, n = 100 and 1000, K = 100000.
    #[arg(long)]
    full_scale: bool,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn estimates(path: &Path) -> Result<EstimatesFile> {
    let f = in_file(path, read_estimates(open(path)?))?;
    for w in &f.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(f)
}

fn run(cli: &Cli) -> Result<Table> {
    match &cli.command {
        Command::Measure { input } => commands::measure(&estimates(input)?),
        Command::Aggregate {
            input,
            mode,
            scheme,
            weights,
            q,
        } => commands::aggregate(
            &estimates(input)?,
            &AggregateArgs {
                mode: *mode,
                scheme: *scheme,
                weights: weights.clone(),
                q: *q,
            },
        ),
        Command::Ci(c) => {
            let input = match (&c.samples, &c.estimates) {
                (Some(s), _) => CiInput::Samples(in_file(s, read_samples(open(s)?))?),
                (None, Some(e)) => CiInput::Estimates {
                    estimates: in_file(e, estimates(e)?.estimates())?,
                    resamples: match &c.resamples {
                        Some(r) => Some(in_file(r, read_resamples(open(r)?))?),
                        None => None,
                    },
                },
                (None, None) => return Err(CliError::input("pass --samples or --estimates")),
            };
            commands::ci(
                &input,
                &CiArgs {
                    methods: c.methods.clone(),
                    alpha: c.alpha,
                    boot: c.boot,
                    proj_draws: c.proj_draws,
                    seed: c.seed,
                    projection: c.projection,
                    joint: c.joint,
                },
            )
        }
        Command::Simulate(s) => {
            let [a, b, d] = s.cov[..] else {
                return Err(CliError::input(
                    "--cov needs exactly three values: var_c,cov,var_p",
                ));
            };
            if s.bins == 0 {
                return Err(CliError::input("--bins must be positive"));
            }
            commands::simulate(&SimulateArgs {
                reps: s.reps.unwrap_or(if s.full_scale { 250_000 } else { 2000 }),
                n: s.n.clone().unwrap_or(if s.full_scale {
                    vec![100, 1000]
                } else {
                    vec![100]
                }),
                alpha: s.alpha,
                seed: s.seed,
                boot: s.boot,
                proj_draws: s
                    .proj_draws
                    .unwrap_or(if s.full_scale { 100_000 } else { 10_000 }),
                projection: s.projection,
                bins_maxnorm: s
                    .bins_maxnorm
                    .clone()
                    .unwrap_or_else(|| equal_edges(1.0, s.bins)),
                bins_absrpv: s
                    .bins_absrpv
                    .clone()
                    .unwrap_or_else(|| equal_edges(2.0, s.bins)),
                true_cov: [a, b, d],
            })
        }
    }
}

fn configure_workers() -> Result<()> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::input(format!(
            "{WORKERS_ENV} must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::input(format!("cannot start {n} workers: {e}")))
}

fn emit(cli: &Cli, table: &Table) -> Result<()> {
    let mut buf = Vec::new();
    table.write(cli.format, &mut buf)?;
    match &cli.output {
        Some(path) => std::fs::write(path, &buf)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display()))),
        None => {
            std::io::stdout().lock().write_all(&buf)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_workers()
        .and_then(|_| run(&cli))
        .and_then(|t| emit(&cli, &t));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
