use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qudit_color_cli::config::WORKERS_ENV;
use qudit_color_cli::{exit, gradcheck, info, load_config, solve, sweep, CliError, GradcheckOptions};
use qudit_coloring::{FixStrategy, GraphFormat};

#[derive(Parser)]
#[command(name = "qudit-color", version, about = "Graph coloring with qudit product states")]
struct Cli {
    /// Repeat for more log output.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch at a fixed number of colors.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_name = "N")]
        colors: Option<String>,
    },
    /// Run batches over an ascending range of color counts.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Inclusive range, e.g. `11:14`.
        #[arg(long, value_name = "FROM:TO")]
        range: String,
        /// Keep going after the first proper coloring.
        #[arg(long)]
        force_full: bool,
    },
    /// Compare the analytic gradient with central differences.
    Gradcheck {
        graph: PathBuf,
        #[arg(long)]
        format: Option<GraphFormat>,
        #[arg(long)]
        colors: usize,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 3.0)]
        h: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = FixStrategy::MaxDegree)]
        fix: FixStrategy,
        /// Write the full report as JSON.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print node and edge counts, density and maximum degree.
    Info {
        graph: PathBuf,
        #[arg(long)]
        format: Option<GraphFormat>,
    },
}

/// Flags shared by `solve` and `sweep`. Values are checked together with
/// the config file so both report errors the same way.
#[derive(Args)]
struct RunArgs {
    /// Graph file; `.col` is read as DIMACS, anything else as an edge list.
    graph: Option<PathBuf>,
    /// `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
    /// `qdlqa` or `qdgd`.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    /// Inner steps per time step: an integer or `exp:<rate>:<cap>`.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    /// Angle perturbation of the annealing start.
    #[arg(long = "f")]
    f: Option<String>,
    /// Amplitude scale of the random start.
    #[arg(long)]
    f_tilde: Option<String>,
    /// Coupling noise width.
    #[arg(long = "h")]
    h: Option<String>,
    #[arg(long)]
    runs: Option<String>,
    #[arg(long)]
    patience: Option<String>,
    /// `max-degree`, `degree-one`, `none` or a node index.
    #[arg(long)]
    fix: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Also run the final time step at t = 1.
    #[arg(long)]
    inclusive_endpoint: bool,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<String>,
    /// Statistics JSON; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    trajectory: Option<PathBuf>,
    #[arg(long)]
    histogram: Option<PathBuf>,
    #[arg(long)]
    coloring: Option<PathBuf>,
    /// Report zero wall time so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

impl RunArgs {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        let strings = [
            ("format", &self.format),
            ("method", &self.method),
            ("steps", &self.steps),
            ("gamma", &self.gamma),
            ("alpha", &self.alpha),
            ("eta", &self.eta),
            ("f", &self.f),
            ("f_tilde", &self.f_tilde),
            ("h", &self.h),
            ("runs", &self.runs),
            ("patience", &self.patience),
            ("fix", &self.fix),
            ("seed", &self.seed),
            ("workers", &self.workers),
        ];
        for (key, value) in strings {
            if let Some(v) = value {
                map.insert(key.to_string(), v.clone());
            }
        }
        let paths = [
            ("graph", &self.graph),
            ("output", &self.output),
            ("trajectory", &self.trajectory),
            ("histogram", &self.histogram),
            ("coloring", &self.coloring),
        ];
        for (key, value) in paths {
            if let Some(v) = value {
                map.insert(key.to_string(), v.display().to_string());
            }
        }
        if self.inclusive_endpoint {
            map.insert("inclusive_endpoint".into(), "true".into());
        }
        if self.no_timing {
            map.insert("no_timing".into(), "true".into());
        }
        map
    }
}

fn parse_range(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Invalid(format!("range must look like `FROM:TO` with FROM <= TO, got `{text}`"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let from: usize = a.trim().parse().map_err(|_| bad())?;
    let to: usize = b.trim().parse().map_err(|_| bad())?;
    if from > to {
        return Err(bad());
    }
    Ok((from..=to).collect())
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
}

fn load(run: &RunArgs, colors: Option<String>) -> Result<qudit_color_cli::RunConfig, CliError> {
    let mut overrides = run.overrides();
    if let Some(c) = colors {
        overrides.insert("colors".into(), c);
    }
    let cfg = load_config(run.config.as_deref(), &overrides)?;
    for w in &cfg.warnings {
        log::warn!("{w}");
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Solve { run, colors } => {
            let cfg = load(&run, colors)?;
            solve(&cfg)?;
        }
        Command::Sweep { run, range, force_full } => {
            let colors = parse_range(&range)?;
            let cfg = load(&run, Some(colors[0].to_string()))?;
            sweep(&cfg, &colors, force_full)?;
        }
        Command::Gradcheck {
            graph,
            format,
            colors,
            points,
            step,
            tol,
            gamma,
            h,
            seed,
            fix,
            output,
        } => {
            let opts = GradcheckOptions {
                num_colors: colors,
                points,
                step,
                tolerance: tol,
                gamma,
                h,
                seed,
                fix_strategy: fix,
            };
            if !gradcheck(&graph, format, &opts, output.as_deref())? {
                return Ok(exit::INVALID_CONFIG);
            }
        }
        Command::Info { graph, format } => print!("{}", info(&graph, format)?),
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
