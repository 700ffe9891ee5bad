use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use polyshard_cli::acceptance;
use polyshard_cli::config::{parse_config, run_id, Parsed, Preset};
use polyshard_cli::sweep::{run_one, run_sweep, scaling_table};

#[derive(Parser)]
#[command(
    name = "polyshard",
    version,
    about = "Coded-sharding simulator and experiment runner"
)]
struct Cli {
    /// Directory for CSV output.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the workload seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Record wall-clock milliseconds per epoch (output is then no longer
    /// byte-identical across runs).
    #[arg(long, global = true)]
    wall_clock: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configuration.
    Run { config: PathBuf },
    /// Run a parameter sweep from a config with a `[sweep]` table or a preset.
    Sweep {
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
    },
    /// Run the acceptance suite and print one line per criterion.
    Accept,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Paper,
    Desk,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let Parsed::Run(mut c) = parse_config(&config, cli.seed)? else {
                bail!(
                    "{} describes a sweep; use `polyshard sweep`",
                    config.display()
                );
            };
            c.wall_clock = cli.wall_clock;
            let id = run_id(c.scheme, c.nodes, c.shards, c.mu(), c.seed);
            let rows = run_one(&id, &c, &cli.out_dir)?
                .map_err(anyhow::Error::msg)
                .with_context(|| format!("run {id}"))?;
            match rows.last() {
                Some(last) => println!(
                    "{id}: t={} lambda={:.4} gamma={} beta={} violations={}",
                    last.t,
                    last.lambda,
                    last.gamma,
                    last.beta,
                    rows.iter().map(|r| r.violations).sum::<usize>()
                ),
                None => println!("{id}: no epochs"),
            }
            println!(
                "wrote {}",
                cli.out_dir.join("runs").join(format!("{id}.csv")).display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, preset } => {
            let mut spec = match (config, preset) {
                (Some(path), None) => match parse_config(&path, cli.seed)? {
                    Parsed::Sweep(spec) => spec,
                    Parsed::Run(_) => bail!(
                        "{} has no [sweep] table; use `polyshard run`",
                        path.display()
                    ),
                },
                (None, Some(p)) => {
                    let mut spec = match p {
                        PresetArg::Paper => Preset::Paper.spec(),
                        PresetArg::Desk => Preset::Desk.spec(),
                    };
                    if let Some(seed) = cli.seed {
                        spec.template.seed = seed;
                    }
                    spec
                }
                (Some(_), Some(_)) => bail!("give either a config or --preset, not both"),
                (None, None) => bail!("sweep needs a config or --preset paper|desk"),
            };
            spec.template.wall_clock = cli.wall_clock;
            let report = run_sweep(&spec, &cli.out_dir, cli.wall_clock)?;
            for s in &report.skipped {
                eprintln!("skipped {}: {}", s.run_id, s.reason);
            }
            print!("{}", scaling_table(&report.completed));
            println!(
                "{} runs, {} skipped; output in {}",
                report.completed.len(),
                report.skipped.len(),
                cli.out_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Accept => {
            let reports = acceptance::run_all();
            for r in &reports {
                println!("{r}");
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            println!(
                "{} of {} criteria passed",
                reports.len() - failed,
                reports.len()
            );
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
