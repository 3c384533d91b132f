use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sortenv::agents::{train_q, QAgent, QHyper, QTable, RandomAgent, RuleBasedAgent, TrainSpec, DEFAULT_BINS};
use sortenv::bench::{self, AgentKind, BenchmarkPlan, Setup};
use sortenv::rng::derive_seed;
use sortenv::server::Server;
use sortenv::{EnvConfig, EnvVariant, InputType};

#[derive(Parser)]
#[command(name = "sortenv", version, about = "Sorting-line simulator, baseline agents and benchmark harness")]
struct Cli {
    #[command(flatten)]
    env: EnvFlags,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct EnvFlags {
    /// Environment variant.
    #[arg(long, global = true, value_enum)]
    env: Option<VariantArg>,
    /// Input generator.
    #[arg(long, global = true, value_enum)]
    input: Option<InputArg>,
    /// Observation noise level.
    #[arg(long, global = true)]
    noise: Option<f64>,
    /// Action penalty per speed change.
    #[arg(long, global = true)]
    penalty: Option<f64>,
    /// Root seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Episode length.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Agent to run.
    #[arg(long, global = true, value_enum, default_value = "rba")]
    agent: AgentArg,
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Basic,
    Advanced,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputArg {
    Random,
    Seasonal,
}

#[derive(Clone, Copy, ValueEnum)]
enum AgentArg {
    Rba,
    Qtable,
    Random,
}

impl From<AgentArg> for AgentKind {
    fn from(a: AgentArg) -> Self {
        match a {
            AgentArg::Rba => AgentKind::Rba,
            AgentArg::Qtable => AgentKind::QTable,
            AgentArg::Random => AgentKind::Random,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and export its trace.
    Simulate {
        #[arg(long, default_value = "trace.csv")]
        out: PathBuf,
        /// Trained table for `--agent qtable`; trains from scratch if absent.
        #[arg(long)]
        qtable: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        train_steps: usize,
    },
    /// Train a Q-table and save it.
    Train {
        #[arg(long, default_value = "qtable.txt")]
        out: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        train_steps: usize,
        #[arg(long, default_value_t = 250)]
        episode_length: usize,
    },
    /// Run the multi-seed benchmark over setups A-D.
    Benchmark {
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        #[arg(long, default_value_t = 100_000)]
        train_steps: usize,
        /// Subset of setups, e.g. "AB".
        #[arg(long, default_value = "ABCD")]
        setups: String,
        /// Where to write the CSV report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the environment over newline-delimited JSON.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        bind: String,
    },
    /// Emit the noise-free accuracy and reward surface as CSV.
    Surface {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve_config(flags: &EnvFlags) -> anyhow::Result<EnvConfig> {
    let mut config = match &flags.config {
        Some(path) => EnvConfig::from_toml_file(path)
            .with_context(|| format!("reading {}", path.display()))?,
        None => EnvConfig::default(),
    };
    if let Some(v) = flags.env {
        config.variant = match v {
            VariantArg::Basic => EnvVariant::Basic,
            VariantArg::Advanced => EnvVariant::Advanced,
        };
    }
    if let Some(i) = flags.input {
        config.input_type = match i {
            InputArg::Random => InputType::Random,
            InputArg::Seasonal => InputType::Seasonal,
        };
    }
    if let Some(n) = flags.noise {
        config.obs_noise_level = n;
    }
    if let Some(p) = flags.penalty {
        config.action_penalty = p;
    }
    if let Some(s) = flags.seed {
        config.seed = s;
    }
    if let Some(s) = flags.steps {
        config.episode_length = s;
    }
    config.validate()?;
    Ok(config)
}

fn write_or_print(out: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = resolve_config(&cli.env)?;
    match cli.command {
        Command::Simulate { out, qtable, train_steps } => {
            let mut agent: Box<dyn sortenv::agents::Agent> = match cli.env.agent {
                AgentArg::Rba => Box::new(RuleBasedAgent::from_config(&config, DEFAULT_BINS)?),
                AgentArg::Random => Box::new(RandomAgent::new(config.variant, config.seed)),
                AgentArg::Qtable => {
                    let table = match qtable {
                        Some(path) => QTable::load(&path)?,
                        None => train_q(
                            &config,
                            QHyper::default(),
                            TrainSpec {
                                total_steps: train_steps,
                                episode_length: 250,
                                seed: derive_seed(config.seed, "train"),
                            },
                        )?,
                    };
                    if table.variant() != config.variant {
                        bail!("q-table is for the {} variant", table.variant());
                    }
                    Box::new(QAgent::greedy(table))
                }
            };
            let (trace, summary) =
                bench::run_episode(&config, agent.as_mut(), config.episode_length, config.seed)?;
            bench::export_trace(&trace, &out)?;
            println!(
                "{} steps -> {}: mean speed {:.1}, purity {:.1}, reward {:.2}, speed changes {}",
                trace.rows.len(),
                out.display(),
                summary.mean_speed,
                summary.mean_purity,
                summary.cumulative_reward,
                summary.speed_changes
            );
        }
        Command::Train { out, train_steps, episode_length } => {
            let spec = TrainSpec { total_steps: train_steps, episode_length, seed: config.seed };
            let table = train_q(&config, QHyper::default(), spec)?;
            table.save(&out)?;
            println!("trained {train_steps} steps -> {}", out.display());
        }
        Command::Benchmark { seeds, train_steps, setups, out } => {
            if seeds == 0 {
                bail!("--seeds must be positive");
            }
            let setups: Vec<Setup> = setups
                .chars()
                .map(|c| Setup::by_name(c).with_context(|| format!("unknown setup '{c}'")))
                .collect::<anyhow::Result<_>>()?;
            let seed_list: Vec<u64> = (0..seeds as u64).map(|i| config.seed + i).collect();
            let plan = BenchmarkPlan {
                eval_steps: cli.env.steps.unwrap_or(50),
                train_steps,
                ..BenchmarkPlan::default()
            };
            let report = bench::run_benchmark(
                &config,
                &setups,
                &[EnvVariant::Basic, EnvVariant::Advanced],
                &[AgentKind::Rba, AgentKind::QTable, AgentKind::Random],
                &seed_list,
                &plan,
            )?;
            match out {
                Some(path) => {
                    std::fs::write(&path, report.to_csv())?;
                    print!("{}", report.to_table());
                }
                None => {
                    print!("{}", report.to_csv());
                    println!();
                    print!("{}", report.to_table());
                }
            }
        }
        Command::Serve { bind } => {
            let server = Server::bind(&bind, config)?;
            let shutdown = Arc::new(AtomicBool::new(false));
            let flag = Arc::clone(&shutdown);
            ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst))?;
            eprintln!("listening on {}", server.local_addr()?);
            server.run(&shutdown)?;
            eprintln!("shutting down");
        }
        Command::Surface { out } => {
            write_or_print(out.as_ref(), &bench::surface_csv(&config))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
