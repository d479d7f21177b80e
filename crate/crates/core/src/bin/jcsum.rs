use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jcsum::acceptance::{self, Tolerances};
use jcsum::asymptotics::RevivalMode;
use jcsum::exact::TimeUnit;
use jcsum::run::{cmd_inversion, cmd_times, cmd_trajectory, Method, OutputFormat, RunConfig, StaticPartMode};
use jcsum::saddle::Policy;

/// Jaynes-Cummings atomic inversion: exact sum, contour quadrature and
/// saddle-point asymptotics.
#[derive(Debug, Parser)]
#[command(name = "jcsum", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inversion time series, one column per method.
    Inversion(RunArgs),
    /// Saddle trajectories (tau, Re F, Im F, Re phi, Im phi) per branch.
    Trajectory(RunArgs),
    /// Revival centres, trajectory crossing times and the collapse width.
    Times(RunArgs),
    /// Runs the acceptance criteria and prints one line per criterion.
    Selftest(SelftestArgs),
}

/// Flags override values from `--config`.
#[derive(Debug, Args)]
struct RunArgs {
    /// TOML file with any of the fields below (kebab-case keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Coherent-state amplitude |alpha| (default 5).
    #[arg(long)]
    alpha: Option<f64>,
    /// Relative detuning mu/|alpha|^2.
    #[arg(long)]
    nu: Option<f64>,
    /// Comma-separated methods (default exact).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Saddle trajectory labels; revival uses the labels >= 1.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    branches: Option<Vec<i32>>,
    /// First grid time, in `--unit` (default 0).
    #[arg(long)]
    t_start: Option<f64>,
    /// Last grid time, in `--unit` (default 40).
    #[arg(long)]
    t_stop: Option<f64>,
    /// Number of grid points, at least 2 (default 401).
    #[arg(long)]
    t_count: Option<usize>,
    /// Time unit of the grid and the first column.
    #[arg(long, value_enum)]
    unit: Option<TimeUnit>,
    /// Output format (default csv).
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    policy: Option<Policy>,
    /// Offset added to the non-exact curves when nu > 0.
    #[arg(long, value_enum)]
    static_part: Option<StaticPartMode>,
    /// Resonant revival formula; `simplified` drops the (t - t_n)^2 phase term.
    #[arg(long, value_enum)]
    revival_mode: Option<RevivalMode>,
    /// Adds one column per saddle trajectory.
    #[arg(long)]
    per_branch: bool,
    /// Number of revivals listed by `times`.
    #[arg(long)]
    n_max: Option<u32>,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    /// Criteria to run, e.g. `1,3,12`; all when absent.
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<u32>>,
    /// Multiplies every pass limit; 0 forces failures.
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
}

impl RunArgs {
    fn into_config(self) -> jcsum::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => {$(if let Some(v) = self.$field { cfg.$field = v; })*};
        }
        apply!(
            alpha,
            nu,
            methods,
            branches,
            t_start,
            t_stop,
            t_count,
            unit,
            format,
            policy,
            static_part,
            revival_mode,
            n_max
        );
        if self.out.is_some() {
            cfg.out = self.out;
        }
        if self.per_branch {
            cfg.per_branch = true;
        }
        Ok(cfg)
    }
}

fn run_table(args: RunArgs, cmd: fn(&RunConfig) -> jcsum::Result<String>) -> jcsum::Result<()> {
    let cfg = args.into_config()?;
    let text = cmd(&cfg)?;
    if cfg.out.is_none() {
        std::io::stdout().write_all(text.as_bytes())?;
    }
    Ok(())
}

fn selftest(args: SelftestArgs) -> ExitCode {
    let ids = args.only.unwrap_or_else(|| acceptance::ALL.to_vec());
    let tol = Tolerances::default().scaled(args.tolerance_scale);
    let mut failed = 0;
    for &id in &ids {
        let report = acceptance::run_criterion(id, &tol);
        println!("{report}");
        if !report.passed() {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", ids.len() - failed, ids.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Inversion(a) => run_table(a, cmd_inversion),
        Command::Trajectory(a) => run_table(a, cmd_trajectory),
        Command::Times(a) => run_table(a, cmd_times),
        Command::Selftest(a) => return selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
