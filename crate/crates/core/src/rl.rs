//! Tabular Q-learning over violation states.
//!
//! A state is the violation signature (violated task, attack, severity),
//! optionally extended with the set of tasks already adapted in the
//! instance. Actions are whole adaptation chains, keyed by their canonical
//! serialization so equal chains share one estimate. Estimates are costs:
//! selection minimizes, and the Bellman update uses the minimum over the
//! successor state's candidates.
//!
//! Unseen (state, chain) pairs read as the configured default until any
//! cost has been observed; from then on they read as 1.1× the worst
//! observed cost, so the greedy policy never locks onto a never-tried
//! chain by optimism alone — ε does the exploring.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{AttackType, Severity};
use crate::chain::{AdaptationChain, AdaptationHistory};
use crate::cost::chain_cost;
use crate::error::{Error, Result};
use crate::sim::{execute_instance, instance_rng, Respond, SimEnv, ViolationEvent};
use crate::workflow::TaskId;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum StateAbstraction {
    /// Violation signature only.
    Compact,
    /// Signature plus the set of already-adapted tasks.
    Full,
}

impl std::str::FromStr for StateAbstraction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "compact" => Ok(StateAbstraction::Compact),
            "full" => Ok(StateAbstraction::Full),
            other => Err(format!("unknown state abstraction {other}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RLState {
    pub vt: TaskId,
    pub attack: AttackType,
    pub severity: Severity,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub adapted: Option<BTreeSet<TaskId>>,
}

pub fn encode_state(
    event: &ViolationEvent,
    history: &AdaptationHistory,
    abstraction: StateAbstraction,
) -> RLState {
    let adapted = match abstraction {
        StateAbstraction::Compact => None,
        StateAbstraction::Full => Some(
            history
                .entries()
                .iter()
                .flat_map(|e| e.chain.steps.iter().map(|s| s.task.clone()))
                .collect(),
        ),
    };
    RLState {
        vt: event.task.clone(),
        attack: event.attack.clone(),
        severity: event.severity,
        adapted,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RLConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Per-episode decay factor; derived from the episode count when unset
    /// so ε reaches `epsilon_end` on the final episode.
    pub epsilon_decay: Option<f64>,
    pub episodes: usize,
    /// Estimate read for unseen pairs before any cost is observed.
    pub default_q: f64,
    pub abstraction: StateAbstraction,
}

impl Default for RLConfig {
    fn default() -> Self {
        RLConfig {
            alpha: 0.1,
            gamma: 0.9,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay: None,
            episodes: 1000,
            default_q: 0.0,
            abstraction: StateAbstraction::Compact,
        }
    }
}

impl RLConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha {} outside (0, 1]", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma {} outside [0, 1)", self.gamma)));
        }
        for (name, e) in [("epsilon_start", self.epsilon_start), ("epsilon_end", self.epsilon_end)]
        {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::Config(format!("{name} {e} outside [0, 1]")));
            }
        }
        if self.epsilon_end > self.epsilon_start {
            return Err(Error::Config("epsilon_end exceeds epsilon_start".into()));
        }
        if let Some(d) = self.epsilon_decay {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::Config(format!("epsilon_decay {d} outside (0, 1]")));
            }
        }
        if !self.default_q.is_finite() {
            return Err(Error::Config("default_q must be finite".into()));
        }
        Ok(())
    }

    pub fn epsilon_at(&self, episode: usize) -> f64 {
        let decay = self.epsilon_decay.unwrap_or_else(|| {
            if self.episodes <= 1 || self.epsilon_start <= 0.0 {
                1.0
            } else {
                (self.epsilon_end.max(1e-12) / self.epsilon_start)
                    .powf(1.0 / (self.episodes - 1) as f64)
            }
        });
        (self.epsilon_start * decay.powi(episode as i32)).max(self.epsilon_end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct QEntry {
    q: f64,
    visits: u64,
}

#[derive(Serialize, Deserialize)]
struct QRow {
    state: RLState,
    chain: String,
    q: f64,
    visits: u64,
}

/// The learned value table. Iteration order is fully determined by the
/// state and chain-key orderings, so serialization is deterministic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QTable {
    states: BTreeMap<RLState, BTreeMap<String, QEntry>>,
    max_observed: Option<f64>,
    default_q: f64,
}

impl QTable {
    pub fn new(default_q: f64) -> QTable {
        QTable { states: BTreeMap::new(), max_observed: None, default_q }
    }

    pub fn len(&self) -> usize {
        self.states.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn value(&self, state: &RLState, key: &str) -> Option<f64> {
        self.states.get(state).and_then(|m| m.get(key)).map(|e| e.q)
    }

    pub fn visits(&self, state: &RLState, key: &str) -> u64 {
        self.states
            .get(state)
            .and_then(|m| m.get(key))
            .map_or(0, |e| e.visits)
    }

    /// Estimate read for pairs never updated: pessimistic (for a minimizer)
    /// once any cost has been observed, `default_q` before that.
    pub fn effective_default(&self) -> f64 {
        match self.max_observed {
            None => self.default_q,
            Some(m) if m >= 0.0 => m * 1.1,
            Some(m) => m / 1.1,
        }
    }

    pub fn value_or_default(&self, state: &RLState, key: &str) -> f64 {
        self.value(state, key).unwrap_or_else(|| self.effective_default())
    }

    /// One Bellman step: `Q += α (r + γ·minₐ′ Q(st′, a′) − Q)`. Terminal
    /// transitions pass `next_min = None`, read as 0.
    pub fn update(
        &mut self,
        state: &RLState,
        key: &str,
        reward: f64,
        next_min: Option<f64>,
        config: &RLConfig,
    ) -> f64 {
        let current = self.value_or_default(state, key);
        let q = current + config.alpha * (reward + config.gamma * next_min.unwrap_or(0.0) - current);
        let entry = self
            .states
            .entry(state.clone())
            .or_default()
            .entry(key.to_string())
            .or_insert(QEntry { q: 0.0, visits: 0 });
        entry.q = q;
        entry.visits += 1;
        self.max_observed = Some(self.max_observed.map_or(reward, |m| m.max(reward)));
        q
    }

    /// Minimum estimate over a candidate set, unseen pairs reading as the
    /// default.
    pub fn min_over(&self, state: &RLState, candidates: &[AdaptationChain]) -> f64 {
        if candidates.is_empty() {
            return self.effective_default();
        }
        candidates
            .iter()
            .map(|c| self.value_or_default(state, &c.key()))
            .fold(f64::INFINITY, f64::min)
    }

    /// Greedy pick: lowest estimate, ties to the canonically smaller chain.
    pub fn greedy<'c>(
        &self,
        state: &RLState,
        candidates: &'c [AdaptationChain],
    ) -> Option<&'c AdaptationChain> {
        let mut best: Option<(&AdaptationChain, f64)> = None;
        for c in candidates {
            let v = self.value_or_default(state, &c.key());
            best = match best {
                None => Some((c, v)),
                Some((bc, bv)) => {
                    if v.total_cmp(&bv).then_with(|| c.canonical_cmp(bc)).is_lt() {
                        Some((c, v))
                    } else {
                        Some((bc, bv))
                    }
                }
            };
        }
        best.map(|(c, _)| c)
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<QRow> = self
            .states
            .iter()
            .flat_map(|(state, m)| {
                m.iter().map(move |(chain, e)| QRow {
                    state: state.clone(),
                    chain: chain.clone(),
                    q: e.q,
                    visits: e.visits,
                })
            })
            .collect();
        Ok(serde_json::to_string_pretty(&rows)?)
    }

    /// Rebuilds a table from its serialized rows. The file carries no
    /// observation history, so the pessimistic default is reconstructed
    /// from the stored estimates.
    pub fn from_json(text: &str) -> Result<QTable> {
        let rows: Vec<QRow> = serde_json::from_str(text)?;
        let mut table = QTable::new(0.0);
        for r in &rows {
            table
                .states
                .entry(r.state.clone())
                .or_default()
                .insert(r.chain.clone(), QEntry { q: r.q, visits: r.visits });
        }
        table.max_observed = rows.iter().map(|r| r.q).fold(None, |acc, q| {
            Some(acc.map_or(q, |m: f64| m.max(q)))
        });
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<QTable> {
        QTable::from_json(&std::fs::read_to_string(path)?)
    }
}

/// ε-greedy selection over a candidate set: uniform with probability ε,
/// greedy argmin otherwise.
pub fn select_action<'c>(
    table: &QTable,
    state: &RLState,
    candidates: &'c [AdaptationChain],
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> Result<&'c AdaptationChain> {
    if candidates.is_empty() {
        return Err(Error::NoFeasibleChain { task: state.vt.as_str().to_string() });
    }
    if rng.gen_range(0.0..1.0) < epsilon {
        return Ok(&candidates[rng.gen_range(0..candidates.len())]);
    }
    Ok(table.greedy(state, candidates).expect("candidates nonempty"))
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

/// Learning responder: selects ε-greedily, observes the chain cost as the
/// reward, and applies the Bellman update once the successor state (the
/// next violation, or instance completion) is known.
pub struct Learner {
    pub qtable: QTable,
    config: RLConfig,
    pub epsilon: f64,
    rng: ChaCha8Rng,
    pending: Option<(RLState, String, f64)>,
    pub episode_rewards: Vec<f64>,
}

impl Learner {
    pub fn new(config: RLConfig, seed: u64) -> Learner {
        Learner {
            qtable: QTable::new(config.default_q),
            epsilon: config.epsilon_start,
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pending: None,
            episode_rewards: Vec::new(),
        }
    }
}

impl Respond for Learner {
    fn respond(
        &mut self,
        env: &SimEnv,
        event: &ViolationEvent,
        candidates: &[AdaptationChain],
        history: &AdaptationHistory,
    ) -> Result<Option<AdaptationChain>> {
        if candidates.is_empty() {
            return Ok(None);
        }
        let state = encode_state(event, history, self.config.abstraction);
        if let Some((ps, pk, pr)) = self.pending.take() {
            let next_min = self.qtable.min_over(&state, candidates);
            self.qtable.update(&ps, &pk, pr, Some(next_min), &self.config);
        }
        let chain =
            select_action(&self.qtable, &state, candidates, self.epsilon, &mut self.rng)?.clone();
        let ctx = env.chain_ctx();
        let cost = chain_cost(
            &ctx,
            &env.weights,
            &env.scenario.constraints,
            history,
            &event.task,
            &chain,
        )?;
        self.pending = Some((state, chain.key(), cost.total));
        self.episode_rewards.push(cost.total);
        Ok(Some(chain))
    }

    fn finish(&mut self, _env: &SimEnv, _history: &AdaptationHistory) -> Result<()> {
        if let Some((ps, pk, pr)) = self.pending.take() {
            self.qtable.update(&ps, &pk, pr, None, &self.config);
        }
        Ok(())
    }
}

/// Frozen-table responder: pure greedy over the candidates, used when
/// evaluating a trained policy.
pub struct GreedyPolicy<'q> {
    pub qtable: &'q QTable,
    pub abstraction: StateAbstraction,
}

impl Respond for GreedyPolicy<'_> {
    fn respond(
        &mut self,
        _env: &SimEnv,
        event: &ViolationEvent,
        candidates: &[AdaptationChain],
        history: &AdaptationHistory,
    ) -> Result<Option<AdaptationChain>> {
        if candidates.is_empty() {
            return Ok(None);
        }
        let state = encode_state(event, history, self.abstraction);
        Ok(self.qtable.greedy(&state, candidates).cloned())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainLogRow {
    pub episode: usize,
    pub epsilon: f64,
    /// Mean observed chain cost this episode; 0 when nothing was adapted.
    pub mean_cost: f64,
}

/// Writes the per-episode training log as CSV.
pub fn write_training_log(path: &Path, rows: &[TrainLogRow]) -> Result<()> {
    let mut out = String::from("episode,epsilon,mean_cost\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.episode, r.epsilon, r.mean_cost));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Trains for `config.episodes` workflow instances. Episode `e` draws its
/// violations from stream `e + 1` of the master seed; the policy's own
/// exploration draws come from stream 0, so the environment and the
/// learner never share randomness.
pub fn train(env: &SimEnv, config: &RLConfig, seed: u64) -> Result<(QTable, Vec<TrainLogRow>)> {
    config.validate()?;
    let mut learner = Learner::new(config.clone(), seed);
    let mut log = Vec::with_capacity(config.episodes);
    for e in 0..config.episodes {
        learner.epsilon = config.epsilon_at(e);
        learner.episode_rewards.clear();
        let mut rng = instance_rng(seed, e as u64);
        execute_instance(env, e as u64, &mut learner, &mut rng)?;
        let mean_cost = if learner.episode_rewards.is_empty() {
            0.0
        } else {
            learner.episode_rewards.iter().sum::<f64>() / learner.episode_rewards.len() as f64
        };
        log.push(TrainLogRow { episode: e, epsilon: learner.epsilon, mean_cost });
    }
    Ok((learner.qtable, log))
}
