use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairobd::adversary::{cr_game, regret_game, GameConfig};
use fairobd::bench::{run_experiment, run_sweep, synth_trace, write_traces, ExperimentConfig, Report, SweepGrid};
use fairobd::{Error, PolicyKind};

#[derive(Parser)]
#[command(name = "fairobd", version, about = "Fairness-regularized online provisioning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sliding-window experiment described by a config file.
    Run(RunArgs),
    /// Play an adaptive lower-bound game against one policy.
    Adversary(AdversaryArgs),
    /// Run the experiment over a grid of learning rates, fairness weights and proximal weights.
    Sweep(SweepArgs),
    /// Write synthetic traces in the on-disk trace format.
    Synth(SynthArgs),
    /// Re-render a saved JSON report as a table.
    Report(ReportArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated policy names.
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<String>>,
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Constant learning rate for FairOBD and DMD.
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Game {
    Regret,
    Cr,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(value_enum)]
    game: Game,
    #[arg(long, default_value = "FairOBD")]
    policy: String,
    /// Horizon; must be even.
    #[arg(long = "T", default_value_t = 1000)]
    horizon: usize,
    #[arg(long, default_value_t = 2.0)]
    m0: f64,
    /// Constant learning rate instead of T^(-1/3).
    #[arg(long)]
    eta: Option<f64>,
    /// Also write the result to `adversary.json` in this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Comma-separated learning rates.
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// Comma-separated fairness weights.
    #[arg(long, value_delimiter = ',')]
    u3: Option<Vec<f64>>,
    /// Comma-separated proximal weights.
    #[arg(long, value_delimiter = ',')]
    lambda2: Option<Vec<f64>>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 7)]
    days: usize,
    #[arg(long, default_value_t = 7)]
    datacenters: usize,
}

#[derive(Args)]
struct ReportArgs {
    /// A `report.json` written by `run`.
    path: PathBuf,
}

/// 1 for configuration errors, 2 for data errors, 3 for solver failures.
fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Parse { .. } | Error::Alignment(_) | Error::Io(_) | Error::Infeasible(_) => 2,
        Error::Convergence { .. } | Error::Numeric { .. } | Error::NonFinite { .. } | Error::GameViolation { .. } => 3,
        _ => 1,
    }
}

fn load_config(args: &ExperimentArgs) -> Result<ExperimentConfig, Error> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_toml(&fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(window) = args.window {
        config.window = window;
    }
    if let Some(names) = &args.policies {
        config.policies = names.iter().map(|n| n.trim().parse()).collect::<Result<_, _>>()?;
    }
    config.validate()?;
    Ok(config)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Error> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Exit status of a report: failures inside windows still count.
fn report_status(report: &Report) -> u8 {
    let kinds = || report.rows.iter().flat_map(|r| &r.failures).map(|f| f.kind.as_str());
    if kinds().any(|k| k == "convergence") {
        3
    } else if kinds().any(|k| k == "infeasible") {
        2
    } else if kinds().next().is_some() {
        3
    } else {
        0
    }
}

fn run(args: RunArgs) -> Result<u8, Error> {
    let mut config = load_config(&args.experiment)?;
    if let Some(eta) = args.eta {
        config = config.with_eta(eta);
        config.validate()?;
    }
    let traces = config.load_traces()?;
    let report = run_experiment(&config, &traces)?;
    let table = report.render_table();
    write(&args.experiment.out, "report.json", &report.to_json()?)?;
    write(&args.experiment.out, "report.txt", &table)?;
    print!("{table}");
    Ok(report_status(&report))
}

fn adversary(args: AdversaryArgs) -> Result<u8, Error> {
    let policy: PolicyKind = args.policy.parse()?;
    let mut config = GameConfig::new(policy, args.horizon, args.m0)?;
    if let Some(eta) = args.eta {
        config.hyper = config.hyper.with_eta(eta);
    }
    let result = match args.game {
        Game::Regret => regret_game(&config)?,
        Game::Cr => cr_game(&config)?,
    };
    let json = serde_json::to_string_pretty(&result).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(dir) = &args.out {
        write(dir, "adversary.json", &json)?;
    }
    println!("{json}");
    Ok(0)
}

fn sweep(args: SweepArgs) -> Result<u8, Error> {
    let config = load_config(&args.experiment)?;
    let defaults = SweepGrid::default();
    let grid = SweepGrid {
        eta: args.eta.unwrap_or(defaults.eta),
        u3: args.u3.unwrap_or(defaults.u3),
        lambda2: args.lambda2.unwrap_or(defaults.lambda2),
    };
    let traces = config.load_traces()?;
    let points = run_sweep(&config, &traces, &grid)?;
    let json = serde_json::to_string_pretty(&points).map_err(|e| Error::Config(e.to_string()))?;
    write(&args.experiment.out, "sweep.json", &json)?;
    println!("{:>10} {:>8} {:>9} {:>14} {:>14}", "eta", "u3", "lambda2", "FairOBD total", "FairOBD fair");
    let mut status = 0;
    for point in &points {
        let mean = point.report.row(PolicyKind::FairObd.name()).and_then(|r| r.mean);
        let (total, fairness) = mean.map_or((f64::NAN, f64::NAN), |c| (c.total, c.fairness));
        println!(
            "{:>10.1e} {:>8.3} {:>9.3} {:>14.3} {:>14.3}",
            point.eta, point.u3, point.lambda2, total, fairness
        );
        status = status.max(report_status(&point.report));
    }
    Ok(status)
}

fn synth(args: SynthArgs) -> Result<u8, Error> {
    if args.days == 0 || args.datacenters == 0 {
        return Err(Error::Config("synthetic traces need at least one day and one data center".into()));
    }
    let traces = synth_trace(args.seed, args.days, args.datacenters);
    let (workload, config) = write_traces(&traces, &args.out)?;
    println!("{}", workload.display());
    println!("{}", config.display());
    Ok(0)
}

fn report(args: ReportArgs) -> Result<u8, Error> {
    let report = Report::from_json(&fs::read_to_string(&args.path)?)?;
    print!("{}", report.render_table());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Adversary(args) => adversary(args),
        Command::Sweep(args) => sweep(args),
        Command::Synth(args) => synth(args),
        Command::Report(args) => report(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code(&error))
        }
    }
}
