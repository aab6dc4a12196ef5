//! `vpe-lab`: run, validate and inspect verified phase estimation experiments.

mod config;
mod error;
mod oracle;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vpe_core::experiments::{run_plan, ExperimentOutput, Statistic, PRESETS};

use config::{Overrides, RunConfig};
use error::CliError;

const CONFIG_HELP: &str = "\
config: a JSON object with ExperimentPlan fields, optionally over a preset.
  {\"preset\": \"givens-depol\", \"replicates\": 10, \"noise\": {\"rates\": [1e-3, 1e-2]},
   \"output\": {\"dir\": \"out\", \"svg\": true}}
  plan keys: name, kind, system, ansatz, decomposition, protocol, flags, post,
  compilation, noise, replicates, seed, mode, estimators, time_grid,
  prony_order, summands, normalize_summands, optimizer, sampling.
  Unknown keys are rejected. Full schema: docs/config.schema.json.
  A preset name may be given in place of a config file.";

#[derive(Parser)]
#[command(
    name = "vpe-lab",
    version,
    about = "Verified phase estimation experiments on a density-matrix simulator"
)]
struct Cli {
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "VPE_LAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a plan and write CSV (and optionally SVG) outputs.
    Run {
        /// Config file or preset name.
        config: String,
        #[command(flatten)]
        overrides: OverrideArgs,
        /// Output directory (default: the config's output.dir, else `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a log-log SVG plot.
        #[arg(long)]
        svg: bool,
    },
    /// Print the built-in plans.
    ListExperiments,
    /// Check a config without running it.
    Validate {
        /// Config file or preset name.
        config: String,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Print the dense spectrum of a Hamiltonian file.
    Oracle {
        /// Text Hamiltonian file, or a `.json` low-rank factor file.
        file: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Args)]
struct OverrideArgs {
    /// Root seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Shots per time point and quadrature; implies sampled mode.
    #[arg(long)]
    shots: Option<usize>,
}

impl OverrideArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            sampled: self.mode.map(|m| matches!(m, ModeArg::Sampled)),
            shots: self.shots,
        }
    }
}

fn prepare(source: &str, args: &OverrideArgs) -> Result<RunConfig, CliError> {
    let mut cfg = config::load(source)?;
    cfg.apply(&args.overrides())?;
    cfg.check()?;
    Ok(cfg)
}

fn print_summary(out: &ExperimentOutput) {
    let sweep = out.sweep();
    let axis = if sweep.axis.is_empty() {
        "rate"
    } else {
        sweep.axis.as_str()
    };
    for e in sweep.estimators() {
        let slope = |s: Statistic| {
            sweep
                .slope(&e, s)
                .map_or("-".to_string(), |v| format!("{v:.3}"))
        };
        println!(
            "{e}: median slope {} rms slope {}",
            slope(Statistic::Median),
            slope(Statistic::Rms)
        );
        for a in sweep.aggregates().iter().filter(|a| a.estimator == e) {
            println!(
                "  {axis} {:>10.3e}  median {:>10.3e}  rms {:>10.3e}  n={}",
                a.rate, a.median, a.rms, a.count
            );
        }
    }
    if let ExperimentOutput::Vqe(v) = out {
        println!("ground energy {}", oracle::number(v.ground_energy));
    }
    if !sweep.failures.is_empty() {
        eprintln!(
            "warning: {} work items failed; see the failures table",
            sweep.failures.len()
        );
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    match cli.command {
        Command::ListExperiments => {
            for (name, description) in PRESETS {
                println!("{name:<22} {description}");
            }
        }
        Command::Validate { config, overrides } => {
            let cfg = prepare(&config, &overrides)?;
            let p = &cfg.plan;
            println!(
                "ok: {} ({:?}, {} rates, {} replicates, seed {})",
                p.name,
                p.kind,
                p.noise.rates.len(),
                p.replicates,
                p.seed
            );
        }
        Command::Oracle { file } => print!("{}", oracle::oracle_report(&file)?),
        Command::Run {
            config,
            overrides,
            out,
            svg,
        } => {
            let cfg = prepare(&config, &overrides)?;
            let result = run_plan(&cfg.plan)?;
            let dir = out
                .or(cfg.output.dir.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            let mut written = output::write_all(&dir, &result)?;
            if svg || cfg.output.svg {
                let path = dir.join(format!("{}.svg", result.sweep().name));
                std::fs::write(&path, svg::render(result.sweep())).map_err(|e| {
                    CliError::Runtime(format!("cannot write {}: {e}", path.display()))
                })?;
                written.push(path);
            }
            print_summary(&result);
            for p in written {
                println!("wrote {}", p.display());
            }
            if result.sweep().records.is_empty() && !result.sweep().failures.is_empty() {
                return Err(CliError::Runtime("every work item failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            eprintln!("\n{CONFIG_HELP}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
