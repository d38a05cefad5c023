//! secchain command line: scenario generation, dependency-matrix
//! inspection, policy training, strategy experiments and one-shot chain
//! ranking.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use secchain_core::chain::{resolve_constraints, AdaptationHistory};
use secchain_core::cost::score_chains;
use secchain_core::harness::{
    export_metrics, export_traces, parse_weights, run_experiment, ExperimentConfig, StrategyName,
};
use secchain_core::rl::{train, write_training_log, QTable, RLConfig, StateAbstraction};
use secchain_core::scenario::generate;
use secchain_core::sim::{BindingPolicy, SimEnv, SimOptions};
use secchain_core::{
    compute_sdm, parse_workflow, AttackType, Catalog, ChainLimits, Error, Result, Scenario,
    Severity, TaskId,
};

#[derive(Parser)]
#[command(name = "secchain", version, about = "Security-driven adaptation chains for cloud workflows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random scenario document.
    Gen(GenArgs),
    /// Print a workflow's security dependency matrix as CSV.
    Sdm(SdmArgs),
    /// Train a Q-table against the simulator and save it.
    Train(TrainArgs),
    /// Run a strategy experiment and export metrics.
    Run(RunArgs),
    /// Rank the candidate chains for one hypothetical violation.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of workflow tasks (at least 2).
    #[arg(long)]
    tasks: usize,
    #[arg(long, default_value_t = 5)]
    providers: usize,
    /// Services per provider.
    #[arg(long, default_value_t = 3)]
    services: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output scenario JSON path.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct SdmArgs {
    /// Workflow JSON document.
    #[arg(long)]
    workflow: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Scenario JSON document.
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the episode count from the learner config.
    #[arg(long)]
    episodes: Option<usize>,
    /// Learner config JSON; defaults apply when omitted.
    #[arg(long)]
    rl: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.3)]
    attack_rate: f64,
    /// Cost weights as `price,time,value,mitigation`; tenant's when omitted.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, default_value = "cheapest")]
    binding: BindingPolicy,
    /// Optional per-episode training log CSV.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Output Q-table JSON path.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON document.
    #[arg(long)]
    scenario: PathBuf,
    /// Strategy to run; repeat (or comma-separate) to compare several on
    /// paired schedules.
    #[arg(long = "strategy", value_delimiter = ',', required = true)]
    strategies: Vec<StrategyName>,
    /// Q-table JSON for the chain strategy.
    #[arg(long)]
    qtable: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    executions: usize,
    #[arg(long, default_value_t = 0.3)]
    attack_rate: f64,
    /// Cost weights as `price,time,value,mitigation`; tenant's when omitted.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "cheapest")]
    binding: BindingPolicy,
    /// Tasks completed between a violation and its detection.
    #[arg(long, default_value_t = 0)]
    detection_delay: usize,
    /// Min-max scale cost attributes over each candidate set.
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value = "compact")]
    abstraction: StateAbstraction,
    /// Also export per-instance traces to `<path>.<strategy>.jsonl`.
    #[arg(long)]
    traces: Option<PathBuf>,
    /// Output metrics CSV path.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    /// Scenario JSON document.
    #[arg(long)]
    scenario: PathBuf,
    /// The violated task.
    #[arg(long)]
    vt: String,
    /// Attack type as named in the catalog.
    #[arg(long)]
    attack: String,
    #[arg(long, default_value = "High")]
    severity: Severity,
    /// Number of chains to print.
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Cost weights as `price,time,value,mitigation`; tenant's when omitted.
    #[arg(long)]
    weights: Option<String>,
    #[arg(long, default_value = "cheapest")]
    binding: BindingPolicy,
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() {
                2
            } else if e.is_validation() {
                3
            } else {
                1
            })
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Gen(args) => cmd_gen(args),
        Command::Sdm(args) => cmd_sdm(args),
        Command::Train(args) => cmd_train(args),
        Command::Run(args) => cmd_run(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let scenario = generate(args.tasks, args.providers, args.services, args.seed)?;
    scenario.save(&args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_sdm(args: SdmArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.workflow)?;
    let workflow = parse_workflow(&text)?;
    print!("{}", compute_sdm(&workflow).to_csv());
    Ok(())
}

fn opt_weights(raw: &Option<String>) -> Result<Option<secchain_core::Weights>> {
    raw.as_deref().map(parse_weights).transpose()
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let scenario = Scenario::load(&args.scenario)?;
    let catalog = Catalog::builtin();
    let mut config = match &args.rl {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<RLConfig>(&text).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                message: e.to_string(),
            })?
        }
        None => RLConfig::default(),
    };
    if let Some(episodes) = args.episodes {
        config.episodes = episodes;
    }
    let options = SimOptions {
        policy: args.binding,
        weights: opt_weights(&args.weights)?,
        attack_rate: args.attack_rate,
        seed: args.seed,
        ..SimOptions::default()
    };
    let env = SimEnv::new(&scenario, &catalog, options)?;
    let (qtable, log) = train(&env, &config, args.seed)?;
    qtable.save(&args.out)?;
    if let Some(path) = &args.log {
        write_training_log(path, &log)?;
    }
    println!(
        "trained {} states over {} episodes; wrote {}",
        qtable.len(),
        config.episodes,
        args.out.display()
    );
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let scenario = Scenario::load(&args.scenario)?;
    let catalog = Catalog::builtin();
    let qtable = match &args.qtable {
        Some(path) => Some(QTable::load(path)?),
        None => None,
    };
    let config = ExperimentConfig {
        strategies: args.strategies,
        executions: args.executions,
        attack_rate: args.attack_rate,
        weights: opt_weights(&args.weights)?,
        master_seed: args.seed,
        policy: args.binding,
        detection_delay: args.detection_delay,
        limits: ChainLimits::default(),
        normalize: args.normalize,
        abstraction: args.abstraction,
    };
    let run = run_experiment(&scenario, &catalog, &config, qtable.as_ref())?;
    export_metrics(&run.report, &args.out)?;
    if let Some(base) = &args.traces {
        for (strategy, traces) in &run.traces {
            export_traces(traces, &base.with_extension(format!("{strategy}.jsonl")))?;
        }
    }
    for m in &run.report.strategies {
        println!(
            "{}: mean_total={:.4} std_total={:.4} violations={} chains_applied={}",
            m.strategy, m.mean_total, m.std_total, m.violations, m.chains_applied
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let scenario = Scenario::load(&args.scenario)?;
    let catalog = Catalog::builtin();
    let vt = TaskId::from(args.vt.as_str());
    scenario.workflow.task(&vt)?;
    let attack = AttackType::new(&args.attack);
    catalog.attack(&attack)?;
    let options = SimOptions {
        policy: args.binding,
        weights: opt_weights(&args.weights)?,
        normalize: args.normalize,
        seed: args.seed,
        ..SimOptions::default()
    };
    let env = SimEnv::new(&scenario, &catalog, options)?;
    let set = env.candidate_chains(&vt, &attack, args.severity)?;
    let filtered = resolve_constraints(&set, &scenario.constraints, &AdaptationHistory::new());
    if filtered.truncated {
        eprintln!(
            "note: chain set truncated to {} of {} chains; ranking covers the enumerated part",
            filtered.chains.len(),
            filtered.full_count
        );
    }
    let ctx = env.chain_ctx();
    let (breakdowns, totals) = score_chains(
        &ctx,
        &env.weights,
        &scenario.constraints,
        &AdaptationHistory::new(),
        &vt,
        &filtered.chains,
        args.normalize,
    )?;
    let mut order: Vec<usize> = (0..filtered.chains.len()).collect();
    order.sort_by(|&a, &b| {
        totals[a]
            .total_cmp(&totals[b])
            .then_with(|| filtered.chains[a].canonical_cmp(&filtered.chains[b]))
    });
    println!("rank,chain,price,time,value,mitigation,total");
    for (rank, &idx) in order.iter().take(args.top).enumerate() {
        let b = &breakdowns[idx];
        println!(
            "{},{},{},{},{},{},{}",
            rank + 1,
            filtered.chains[idx].key(),
            b.price,
            b.time,
            b.value,
            b.mitigation,
            b.total
        );
    }
    Ok(())
}
