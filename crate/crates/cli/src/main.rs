//! `edca` — run a scenario or compare disciplines across seeds.
//!
//! Exit codes: 0 on success, 1 on I/O failure, 2 on configuration errors,
//! 3 when a run exhausts its step budget.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use edca_core::engine::RunOptions;
use edca_core::metrics::{admission_csv, events_csv, Summary};
use edca_core::sweep::{compare, compare_csv, parse_variants};
use edca_core::{engine, load_scenario_with, AccessCategory, Error, Overrides, Scenario};

#[derive(Parser)]
#[command(name = "edca", version, about = "Slotted 802.11e EDCA simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write summary.json (plus traces with --trace).
    Run(RunArgs),
    /// Run several disciplines over seeds 1..=N and write compare.csv.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Basic,
    Modified,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: ScenarioArgs,
    /// Override the scenario's discipline.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Decision factor (both thresholds unless --k-low is given).
    #[arg(long, allow_negative_numbers = true)]
    k: Option<i64>,
    /// Threshold for best-effort/background traffic.
    #[arg(long, allow_negative_numbers = true)]
    k_low: Option<i64>,
    /// Number of user-weight classes (1..=6).
    #[arg(long, allow_negative_numbers = true)]
    n: Option<i64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write events.csv and admission_<ac>.csv.
    #[arg(long)]
    trace: bool,
    /// Abort (exit 3) after this many engine steps.
    #[arg(long)]
    max_steps: Option<u64>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: ScenarioArgs,
    /// Number of seeds; runs use seeds 1..=N.
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    /// Comma-separated list such as `basic,mod:k=10:n=6`.
    #[arg(long, default_value = "basic,mod:k=10:n=6")]
    variants: String,
}

enum Failure {
    Io(PathBuf, std::io::Error),
    Sim(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Sim(e)
    }
}

fn load(path: &Path, overrides: &Overrides) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(path.to_owned(), e))?;
    Ok(load_scenario_with(&text, overrides)?)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Io(path, e))
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Io(dir.to_owned(), e))
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let overrides = Overrides {
        mode: args.mode.map(|m| match m {
            Mode::Basic => "basic".to_string(),
            Mode::Modified => "modified".to_string(),
        }),
        k: args.k,
        k_low: args.k_low,
        n: args.n,
        seed: args.seed,
    };
    let scenario = load(&args.common.scenario, &overrides)?;
    let mut opts = RunOptions::default();
    if let Some(max_steps) = args.max_steps {
        opts.max_steps = max_steps;
    }
    let report = engine::run_with(&scenario, opts)?;
    let summary = Summary::from_report(&report);

    let out = &args.common.out;
    prepare_out(out)?;
    write(out, "summary.json", &summary.to_json())?;
    if args.trace {
        write(out, "events.csv", &events_csv(&report))?;
        for ac in AccessCategory::ALL {
            let name = format!("admission_{}.csv", ac.short_name());
            write(out, &name, &admission_csv(&report, ac))?;
        }
    }

    println!(
        "{} [{}] seed {}: total {} us",
        summary.scenario, scenario.discipline, summary.seed, summary.total_time_us
    );
    for ac in AccessCategory::ALL {
        let i = ac.index();
        println!(
            "  {:<3} delivered {:>5}  dropped {:>3}  collisions {:>5}  utilization {:>6.2}%",
            ac.short_name(),
            summary.delivered[i],
            summary.dropped[i],
            summary.collisions[i],
            summary.utilization[i] * 100.0
        );
    }
    Ok(())
}

fn compare_cmd(args: CompareArgs) -> Result<(), Failure> {
    let variants = parse_variants(&args.variants)?;
    if args.seeds == 0 {
        return Err(Failure::Sim(Error::Config {
            key: "seeds".into(),
            reason: "must be at least 1".into(),
        }));
    }
    let base = load(&args.common.scenario, &Overrides::default())?;
    let stats = compare(&base, &variants, args.seeds)?;

    let out = &args.common.out;
    prepare_out(out)?;
    write(out, "compare.csv", &compare_csv(&stats))?;

    println!("{} over {} seeds", base.name, args.seeds);
    for s in &stats {
        println!(
            "  {:<24} collisions {:>8.1}  total {:>11.0} us",
            s.label,
            s.total_collisions_mean(),
            s.total_time_mean
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Compare(args) => compare_cmd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(path, e)) => {
            eprintln!("error: {}: {e}", path.display());
            ExitCode::from(1)
        }
        Err(Failure::Sim(e @ Error::BudgetExceeded { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Sim(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
