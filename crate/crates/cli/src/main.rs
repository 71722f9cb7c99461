//! `m2wu` command-line runner.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use m2wu::dynamics::solve_stationary;
use m2wu::harness::config::{layer_file, parse_seeds};
use m2wu::harness::verify::verify_suite_with;
use m2wu::harness::{emit_plotdata, preset, run_experiment, ExperimentConfig, GameKind, Level, Overrides, Scale};
use m2wu::StrategyProfile;

#[derive(Parser)]
#[command(name = "m2wu", version, about = "Last-iterate learning in zero-sum matrix games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seed sweep and write CSV traces.
    Run(RunArgs),
    /// Run the self-check suite.
    Verify {
        #[arg(long, default_value = "fast", value_parser = ["fast", "full"])]
        level: String,
    },
    /// Merge aggregate CSVs into one wide CSV.
    Plotdata {
        /// Glob of `*_aggregate.csv` files, merged in sorted path order.
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve for the stationary point of the mutation dynamics.
    Stationary(StationaryArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; with --preset its keys override the preset.
    #[arg(long, required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Preset at desk scale (10 seeds, 1/5 horizon). The default.
    #[arg(long, conflicts_with = "paper")]
    desk: bool,
    /// Preset at full scale (100 seeds).
    #[arg(long)]
    paper: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `7`, `1,2,3` or `0..10`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    iterations: Option<u64>,
}

#[derive(Args)]
struct StationaryArgs {
    /// brps, brps_fig1, mne or random
    #[arg(long)]
    game: String,
    #[arg(long)]
    mu: f64,
    #[arg(long = "ref", default_value = "uniform", value_parser = ["uniform"])]
    reference: String,
    /// Action count of a random game.
    #[arg(long)]
    size: Option<usize>,
    /// Seed of a random game.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

fn resolve(args: &RunArgs) -> m2wu::Result<ExperimentConfig> {
    let scale = if args.paper { Scale::Paper } else { Scale::Desk };
    let mut cfg = match (&args.preset, &args.config) {
        (Some(name), None) => preset(name, scale)?,
        (Some(name), Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| m2wu::Error::Io {
                path: path.clone(),
                source: e,
            })?;
            layer_file(&preset(name, scale)?, &text)?
        }
        (None, Some(path)) => ExperimentConfig::load(path)?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    Overrides::from_env()?.apply(&mut cfg);
    let cli = Overrides {
        seeds: args.seeds.as_deref().map(parse_seeds).transpose()?,
        iterations: args.iterations,
        record_every: None,
        output_path: args.out.clone(),
    };
    cli.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: &RunArgs) -> m2wu::Result<ExitCode> {
    let cfg = resolve(args)?;
    eprintln!(
        "{}: {} learners x {} seeds, {} iterations -> {}",
        cfg.name,
        cfg.learners.len(),
        cfg.seeds.len(),
        cfg.iterations,
        cfg.output_path.display()
    );
    let report = run_experiment(&cfg)?;
    println!("label,seeds_ok,final_mean,final_stderr");
    for l in &report.learners {
        let (m, s) = l.final_exploitability();
        println!("{},{},{m:e},{s:e}", l.label, l.seeds.len() - l.failures());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(level: &str) -> ExitCode {
    let level = Level::parse(level).expect("validated by clap");
    let report = verify_suite_with(level, |c| println!("{c}"));
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", report.checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn cmd_plotdata(pattern: &str, out: &PathBuf) -> m2wu::Result<ExitCode> {
    let bad = |m: String| m2wu::Error::InvalidArgument(m);
    let mut inputs = glob::glob(pattern)
        .map_err(|e| bad(format!("bad glob {pattern:?}: {e}")))?
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| bad(e.to_string()))?;
    inputs.retain(|p| p != out);
    inputs.sort();
    if inputs.is_empty() {
        return Err(bad(format!("no files match {pattern:?}")));
    }
    let r = emit_plotdata(&inputs, out)?;
    eprintln!(
        "{}: {} rows, {} columns, {} values floored",
        r.output.display(),
        r.rows,
        r.columns.len(),
        r.floored
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_stationary(a: &StationaryArgs) -> m2wu::Result<ExitCode> {
    let kind = GameKind::parse(&a.game)?;
    let game = kind.build(a.size, a.seed)?;
    let reference = StrategyProfile::uniform(&game);
    let sp = solve_stationary(&game, a.mu, &reference, a.tol, 50_000_000)?;
    let join = |p: &[f64]| p.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
    println!("game,{}", a.game);
    println!("mu,{:?}", a.mu);
    println!("reference,{}", a.reference);
    println!("residual,{:e}", sp.residual);
    println!("iterations,{}", sp.iterations);
    println!("exploitability,{:?}", game.exploitability(&sp.profile)?);
    println!("p1,{}", join(sp.profile.p1.probs()));
    println!("p2,{}", join(sp.profile.p2.probs()));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify { level } => Ok(cmd_verify(level)),
        Command::Plotdata { input, out } => cmd_plotdata(input, out),
        Command::Stationary(args) => cmd_stationary(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
