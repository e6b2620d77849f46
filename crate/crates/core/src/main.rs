use anyhow::{Context, Result};
use asmoduli::config::{parse_levels, Config};
use asmoduli::report::{self, Report, RunOptions};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "asmoduli", version, about = "Artin-Schreier class spaces over Kummer covers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Level range `a..b` (inclusive), overriding the configuration.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving `<command>.json` and `<command>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel and filtration-piece dimensions per level.
    Dims(Common),
    /// All classes per level with canonical representatives.
    Enumerate(Common),
    /// Canonical class of one element, by both reduction routes.
    Reduce {
        #[command(flatten)]
        common: Common,
        /// JSON file with `level` and `element`.
        #[arg(long)]
        input: PathBuf,
    },
    /// Injectivity of the map into the space without the eigen condition.
    Iota(Common),
    /// Local piece dimensions at each place of the support.
    LocalDims(Common),
    /// Compare the standalone local theory with the one-puncture global model.
    LocalGlobalCheck(Common),
    /// Restriction to punctures: rank, kernel and surjectivity per level.
    Restrict(Common),
    /// Ramification profiles on the base with their restriction verdicts.
    ScanProfiles(Common),
    /// Group-theoretic utilities.
    Groups {
        #[command(subcommand)]
        command: GroupsCommand,
    },
    /// Run the acceptance matrix on the bundled configurations.
    Verify {
        /// Accepted for uniformity; the bundled matrix is always used.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Subcommand)]
enum GroupsCommand {
    /// Actions on P whose split extension has lifts of P' conjugating as rho', up to isomorphism.
    GpRho {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Solutions h of h^n = (v, e) in the semidirect product of F_q by Z/n.
    SolveLift {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn options(run: &RunArgs) -> Result<RunOptions> {
    Ok(RunOptions {
        levels: run.levels.as_deref().map(parse_levels).transpose()?,
        seed: run.seed,
    })
}

fn with_setup(
    common: &Common,
    f: impl FnOnce(&asmoduli::config::Setup) -> asmoduli::Result<Report>,
) -> Result<(Report, Option<PathBuf>)> {
    let config = Config::load(&common.config)?;
    let setup = report::load_setup(&config, &options(&common.run)?)?;
    Ok((f(&setup)?, common.run.out.clone()))
}

fn run(cli: Cli) -> Result<(Report, Option<PathBuf>)> {
    match cli.command {
        Command::Dims(c) => with_setup(&c, report::dims),
        Command::Enumerate(c) => with_setup(&c, report::enumerate),
        Command::Reduce { common, input } => {
            let input: report::ReduceInput = read_json(&input)?;
            with_setup(&common, |s| report::reduce(s, &input))
        }
        Command::Iota(c) => with_setup(&c, report::iota),
        Command::LocalDims(c) => with_setup(&c, report::local_dims),
        Command::LocalGlobalCheck(c) => with_setup(&c, report::local_global_check),
        Command::Restrict(c) => with_setup(&c, report::restrict),
        Command::ScanProfiles(c) => with_setup(&c, report::scan_profiles),
        Command::Groups { command } => match command {
            GroupsCommand::GpRho { input, run } => {
                let input: report::GpInput = read_json(&input)?;
                let budget = asmoduli::config::budget_from_env(None)?;
                Ok((report::gp_rho(&input, budget)?, run.out))
            }
            GroupsCommand::SolveLift { input, run } => {
                let input: report::LiftInput = read_json(&input)?;
                Ok((report::solve_lift_report(&input)?, run.out))
            }
        },
        Command::Verify { run, .. } => {
            let rep = report::verify_report(run.seed)?;
            if let Some(list) = rep.json.get("criteria").and_then(|c| c.as_array()) {
                for c in list {
                    let pass = c["pass"].as_bool().unwrap_or(false);
                    eprintln!(
                        "[{}] criterion {}: {}",
                        if pass { "PASS" } else { "FAIL" },
                        c["id"],
                        c["name"].as_str().unwrap_or("")
                    );
                }
            }
            Ok((rep, run.out))
        }
    }
}

fn write_outputs(rep: &Report, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let stem = rep.command.replace(' ', "-");
    std::fs::write(dir.join(format!("{stem}.json")), rep.json_text())?;
    std::fs::write(dir.join(format!("{stem}.csv")), &rep.csv)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((rep, out)) => {
            print!("{}", rep.json_text());
            if let Some(dir) = out {
                if let Err(e) = write_outputs(&rep, &dir) {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            }
            if rep.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
