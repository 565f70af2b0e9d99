use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use mcbs_core::envs::{make_env, Env, ResetMode};
use mcbs_core::harness::{ablate, evaluate, train, RunConfig};
use mcbs_core::td3::Td3Agent;

/// Monte Carlo beam search on top of TD3.
#[derive(Parser, Debug)]
#[command(name = "mcbs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train one agent. Any config key can be overridden with `--key value`.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
        overrides: Vec<String>,
    },
    /// Evaluate a saved checkpoint with the deterministic policy.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        env: String,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train the TD3 row plus every (beam width, rollout depth) cell.
    Ablate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,6,18")]
        beams: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,3,6")]
        depths: Vec<usize>,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
        overrides: Vec<String>,
    },
    /// Print an environment's dimensions and bounds as key=value lines.
    Describe {
        #[arg(long)]
        env: String,
    },
}

/// Turns `--key value`, `--key=value` and bare `--flag` into pairs.
fn parse_overrides(args: &[String]) -> anyhow::Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let Some(key) = args[i].strip_prefix("--") else {
            bail!("expected --key, got `{}`", args[i]);
        };
        if let Some((k, v)) = key.split_once('=') {
            pairs.push((k.to_string(), v.to_string()));
            i += 1;
        } else if i + 1 < args.len() && !args[i + 1].starts_with("--") {
            pairs.push((key.to_string(), args[i + 1].clone()));
            i += 2;
        } else {
            pairs.push((key.to_string(), "true".to_string()));
            i += 1;
        }
    }
    Ok(pairs)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train { config, overrides } => {
            let cfg = RunConfig::load(&config, &parse_overrides(&overrides)?)?;
            let outcome = train(&cfg)?;
            println!("metrics={}", outcome.metrics_path.display());
            println!("checkpoint={}", outcome.checkpoint_dir.display());
            println!("random_baseline={}", outcome.random_baseline);
            if let Some(row) = outcome.final_row() {
                println!("final_step={}", row.real_step);
                println!("final_eval_mean={}", row.eval_return_mean);
                println!("final_eval_std={}", row.eval_return_std);
            }
            println!("rollout_env_steps={}", outcome.ledger.rollout_env_steps);
        }
        Command::Eval {
            checkpoint,
            env,
            episodes,
            seed,
        } => {
            let (agent, _) = Td3Agent::load(&checkpoint)
                .with_context(|| format!("loading checkpoint {}", checkpoint.display()))?;
            let env = make_env(&env, ResetMode::Random)?;
            let (mean, std) = evaluate(&agent, &env, episodes, seed)?;
            println!("env={}", env.spec().name);
            println!("episodes={episodes}");
            println!("eval_return_mean={mean}");
            println!("eval_return_std={std}");
        }
        Command::Ablate {
            config,
            beams,
            depths,
            overrides,
        } => {
            let cfg = RunConfig::load(&config, &parse_overrides(&overrides)?)?;
            let grid = ablate(&cfg, &beams, &depths)?;
            print!("{}", grid.to_csv());
            let failed = grid.cells.iter().filter(|c| c.error.is_some()).count();
            if failed > 0 {
                bail!("{failed} ablation cell(s) failed, see ablation_errors.txt");
            }
        }
        Command::Describe { env } => {
            print!("{}", make_env(&env, ResetMode::Random)?.spec().describe());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e
                .chain()
                .find_map(|c| c.downcast_ref::<mcbs_core::Error>())
                .map_or("cli", |c| c.kind());
            let message = format!("{e:#}").replace('\n', " ");
            eprintln!("error kind={kind} message={message:?}");
            ExitCode::FAILURE
        }
    }
}
