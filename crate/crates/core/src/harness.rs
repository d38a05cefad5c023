//! Experiment orchestration: runs strategy comparisons over paired
//! violation schedules, aggregates metrics, and exports them.
//!
//! Every strategy replays the same per-instance RNG streams, so instance
//! `i` faces the same violations under every strategy. Instances run in
//! parallel; traces are collected and folded in instance order, which
//! keeps all exported numbers independent of the thread schedule.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::chain::ChainLimits;
use crate::cost::Weights;
use crate::error::{Error, Result};
use crate::rl::{GreedyPolicy, QTable, StateAbstraction};
use crate::scenario::Scenario;
use crate::sim::{
    execute_instance, instance_rng, BindingPolicy, ExecutionTrace, NoResponse, OracleBest,
    Respond, SimEnv, SimOptions, SingleBest,
};

pub const METRICS_HEADER: &str =
    "strategy,executions,mean_time,mean_price,mean_value,mean_ms,mean_total,std_total,violations,chains_applied";

/// Rolling means are computed over execution chunks of this size.
pub const ROLLING_CHUNK: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyName {
    None,
    Single,
    Chain,
    Oracle,
}

impl StrategyName {
    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyName::None => "none",
            StrategyName::Single => "single",
            StrategyName::Chain => "chain",
            StrategyName::Oracle => "oracle",
        }
    }
}

impl std::fmt::Display for StrategyName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for StrategyName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(StrategyName::None),
            "single" => Ok(StrategyName::Single),
            "chain" => Ok(StrategyName::Chain),
            "oracle" => Ok(StrategyName::Oracle),
            other => Err(format!("unknown strategy {other}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub strategies: Vec<StrategyName>,
    pub executions: usize,
    pub attack_rate: f64,
    /// Overrides the tenant's weights when set.
    pub weights: Option<Weights>,
    pub master_seed: u64,
    pub policy: BindingPolicy,
    pub detection_delay: usize,
    pub limits: ChainLimits,
    pub normalize: bool,
    pub abstraction: StateAbstraction,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            strategies: vec![StrategyName::None],
            executions: 1000,
            attack_rate: 0.3,
            weights: None,
            master_seed: 0,
            policy: BindingPolicy::Cheapest,
            detection_delay: 0,
            limits: ChainLimits::default(),
            normalize: false,
            abstraction: StateAbstraction::Compact,
        }
    }
}

impl ExperimentConfig {
    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            policy: self.policy,
            weights: self.weights,
            attack_rate: self.attack_rate,
            detection_delay: self.detection_delay,
            limits: self.limits,
            normalize: self.normalize,
            seed: self.master_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RollingRow {
    pub chunk: usize,
    pub executions: usize,
    pub mean_total: f64,
    pub mean_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyMetrics {
    pub strategy: StrategyName,
    pub executions: usize,
    pub mean_time: f64,
    pub mean_price: f64,
    pub mean_value: f64,
    pub mean_ms: f64,
    pub mean_total: f64,
    pub std_total: f64,
    pub violations: u64,
    pub chains_applied: u64,
    pub rolling: Vec<RollingRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct MetricsReport {
    pub strategies: Vec<StrategyMetrics>,
}

#[derive(Debug)]
pub struct ExperimentRun {
    pub report: MetricsReport,
    pub traces: Vec<(StrategyName, Vec<ExecutionTrace>)>,
}

fn responder_for<'q>(
    strategy: StrategyName,
    qtable: Option<&'q QTable>,
    abstraction: StateAbstraction,
) -> Box<dyn Respond + 'q> {
    match strategy {
        StrategyName::None => Box::new(NoResponse),
        StrategyName::Single => Box::new(SingleBest),
        StrategyName::Chain => Box::new(GreedyPolicy {
            qtable: qtable.expect("checked before dispatch"),
            abstraction,
        }),
        StrategyName::Oracle => Box::new(OracleBest),
    }
}

fn aggregate(strategy: StrategyName, traces: &[ExecutionTrace]) -> StrategyMetrics {
    let n = traces.len() as f64;
    let mut sum = [0.0f64; 5];
    for t in traces {
        sum[0] += t.totals.time;
        sum[1] += t.totals.price;
        sum[2] += t.totals.value;
        sum[3] += t.totals.mitigation;
        sum[4] += t.totals.total;
    }
    let mean_total = sum[4] / n;
    let var = traces
        .iter()
        .map(|t| (t.totals.total - mean_total).powi(2))
        .sum::<f64>()
        / n;
    let rolling = traces
        .chunks(ROLLING_CHUNK)
        .enumerate()
        .map(|(chunk, slice)| {
            let m = slice.len() as f64;
            RollingRow {
                chunk,
                executions: slice.len(),
                mean_total: slice.iter().map(|t| t.totals.total).sum::<f64>() / m,
                mean_ms: slice.iter().map(|t| t.totals.mitigation).sum::<f64>() / m,
            }
        })
        .collect();
    StrategyMetrics {
        strategy,
        executions: traces.len(),
        mean_time: sum[0] / n,
        mean_price: sum[1] / n,
        mean_value: sum[2] / n,
        mean_ms: sum[3] / n,
        mean_total,
        std_total: var.sqrt(),
        violations: traces.iter().map(|t| t.violations.len() as u64).sum(),
        chains_applied: traces.iter().map(|t| t.chains.len() as u64).sum(),
        rolling,
    }
}

/// Runs every configured strategy over the same paired violation
/// schedules and aggregates per-strategy metrics.
pub fn run_experiment(
    scenario: &Scenario,
    catalog: &Catalog,
    config: &ExperimentConfig,
    qtable: Option<&QTable>,
) -> Result<ExperimentRun> {
    if config.executions == 0 {
        return Err(Error::Config("executions must be at least 1".into()));
    }
    if config.strategies.is_empty() {
        return Err(Error::Config("no strategies selected".into()));
    }
    if config.strategies.contains(&StrategyName::Chain) && qtable.is_none() {
        return Err(Error::Config(
            "chain strategy requires a trained value table (see the train subcommand)".into(),
        ));
    }
    let env = SimEnv::new(scenario, catalog, config.sim_options())?;
    let mut runs = Vec::with_capacity(config.strategies.len());
    for &strategy in &config.strategies {
        let traces: Vec<ExecutionTrace> = (0..config.executions)
            .into_par_iter()
            .map(|i| {
                let mut rng = instance_rng(config.master_seed, i as u64);
                let mut responder = responder_for(strategy, qtable, config.abstraction);
                execute_instance(&env, i as u64, responder.as_mut(), &mut rng)
            })
            .collect::<Result<_>>()?;
        runs.push((strategy, traces));
    }
    let report = MetricsReport {
        strategies: runs.iter().map(|(s, t)| aggregate(*s, t)).collect(),
    };
    Ok(ExperimentRun { report, traces: runs })
}

/// Writes the per-strategy summary CSV plus a companion
/// `<stem>.rolling.json` with the per-chunk means for plotting.
pub fn export_metrics(report: &MetricsReport, path: &Path) -> Result<()> {
    let mut csv = String::from(METRICS_HEADER);
    csv.push('\n');
    for s in &report.strategies {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            s.strategy,
            s.executions,
            s.mean_time,
            s.mean_price,
            s.mean_value,
            s.mean_ms,
            s.mean_total,
            s.std_total,
            s.violations,
            s.chains_applied
        )
        .expect("writing to a String cannot fail");
    }
    std::fs::write(path, csv)?;

    #[derive(Serialize)]
    struct RollingExport<'a> {
        strategy: StrategyName,
        #[serde(flatten)]
        row: &'a RollingRow,
    }
    let rolling: Vec<RollingExport> = report
        .strategies
        .iter()
        .flat_map(|s| s.rolling.iter().map(move |row| RollingExport { strategy: s.strategy, row }))
        .collect();
    std::fs::write(
        path.with_extension("rolling.json"),
        serde_json::to_string_pretty(&rolling)?,
    )?;
    Ok(())
}

/// Writes traces as JSON lines, one instance per line.
pub fn export_traces(traces: &[ExecutionTrace], path: &Path) -> Result<()> {
    let mut out = String::new();
    for t in traces {
        out.push_str(&serde_json::to_string(t)?);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Parses a `p,t,v,ms` weight vector of non-negative magnitudes.
pub fn parse_weights(s: &str) -> Result<Weights> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Error::Config(format!(
            "weights must be four comma-separated numbers (price,time,value,mitigation), got {s:?}"
        )));
    }
    let mut vals = [0.0f64; 4];
    for (n, p) in parts.iter().enumerate() {
        vals[n] = p
            .parse()
            .map_err(|e| Error::Config(format!("weight {p:?} is not a number: {e}")))?;
    }
    Weights::new(vals[0], vals[1], vals[2], vals[3])
}
