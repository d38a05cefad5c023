//! Workflow execution in a simulated multi-cloud environment: service
//! binding, stochastic attack injection, violation detection, and on-the-fly
//! application of adaptation chains.
//!
//! One instance executes tasks in topological order on its bound services.
//! Violations are drawn up front from the instance's RNG stream (one draw
//! per task), so two strategies running the same stream face identical
//! schedules. A violation surfaces at the end of the task it hit (plus an
//! optional detection delay); the responder picks a chain, the instance
//! suspends, re-executes from the chain's start point, and continues.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{ActionType, AttackType, Catalog, ServiceCost, Severity};
use crate::chain::{
    expand_chain_loops, feasible_actions, generate_chain_set, resolve_chain, resolve_constraints,
    AdaptationChain, AdaptationHistory, BoundCosts, ChainContext, ChainLimits, HistoryEntry,
};
use crate::cost::{best_candidate, chain_cost, score_chains, CostBreakdown, Weights};
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::sdm::{compute_sdm, SecurityDependencyMatrix};
use crate::workflow::TaskId;

// ---------------------------------------------------------------------------
// Service binding
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingPolicy {
    Cheapest,
    Fastest,
    Random,
}

impl std::str::FromStr for BindingPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "cheapest" => Ok(BindingPolicy::Cheapest),
            "fastest" => Ok(BindingPolicy::Fastest),
            "random" => Ok(BindingPolicy::Random),
            other => Err(format!("unknown binding policy {other}")),
        }
    }
}

/// A task's designated primary and backup service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundService {
    pub primary: String,
    pub backup: String,
    /// True when only one candidate existed and the backup is the primary.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceBinding {
    pub entries: BTreeMap<TaskId, BoundService>,
}

impl ServiceBinding {
    pub fn bound(&self, t: &TaskId) -> Result<&BoundService> {
        self.entries.get(t).ok_or_else(|| Error::Binding {
            task: t.as_str().to_string(),
            reason: "task not bound".into(),
        })
    }

    /// Resolves the binding into the cost pairs the chain engine prices
    /// actions with.
    pub fn bound_costs(&self, scenario: &Scenario) -> Result<BTreeMap<TaskId, BoundCosts>> {
        self.entries
            .iter()
            .map(|(t, b)| {
                let p = scenario.service(&b.primary)?;
                let bk = scenario.service(&b.backup)?;
                Ok((
                    t.clone(),
                    BoundCosts {
                        primary: ServiceCost { time: p.time, price: p.price },
                        backup: ServiceCost { time: bk.time, price: bk.price },
                    },
                ))
            })
            .collect()
    }
}

/// Binds every task to a primary service and a backup (the next-best
/// candidate under the same policy).
pub fn bind_services(
    scenario: &Scenario,
    policy: BindingPolicy,
    seed: u64,
) -> Result<ServiceBinding> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = BTreeMap::new();
    for task in scenario.workflow.tasks() {
        let cands = scenario.candidates.get(&task.id).ok_or_else(|| Error::Binding {
            task: task.id.as_str().to_string(),
            reason: "no candidate services".into(),
        })?;
        let mut ordered: Vec<&str> = cands.iter().map(String::as_str).collect();
        match policy {
            BindingPolicy::Cheapest => {
                ordered.sort_by(|a, b| {
                    let (sa, sb) = (scenario.service(a).unwrap(), scenario.service(b).unwrap());
                    sa.price.total_cmp(&sb.price).then_with(|| a.cmp(b))
                });
            }
            BindingPolicy::Fastest => {
                ordered.sort_by(|a, b| {
                    let (sa, sb) = (scenario.service(a).unwrap(), scenario.service(b).unwrap());
                    sa.time.total_cmp(&sb.time).then_with(|| a.cmp(b))
                });
            }
            BindingPolicy::Random => {
                ordered.sort_unstable();
                ordered.shuffle(&mut rng);
            }
        }
        // Candidate ids were validated against the service list on load.
        for c in &ordered {
            scenario.service(c)?;
        }
        let primary = ordered[0].to_string();
        let (backup, degenerate) = match ordered.get(1) {
            Some(second) => (second.to_string(), false),
            None => (primary.clone(), true),
        };
        entries.insert(task.id.clone(), BoundService { primary, backup, degenerate });
    }
    Ok(ServiceBinding { entries })
}

// ---------------------------------------------------------------------------
// Attack injection
// ---------------------------------------------------------------------------

/// A violation scheduled for one instance, drawn before execution starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingViolation {
    pub task: TaskId,
    /// Topological position of the violated task.
    pub pos: usize,
    pub attack: AttackType,
    pub severity: Severity,
    pub raw_score: f64,
}

/// Draws the violation schedule for one instance: per task, a violation
/// fires with probability `attack_rate` times the bound service's summed
/// attack frequency; the type is sampled proportional to the per-type
/// rates and the raw severity score uniformly in [0,1].
pub fn inject_attacks(
    scenario: &Scenario,
    binding: &ServiceBinding,
    attack_rate: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<PendingViolation>> {
    if !(0.0..=1.0).contains(&attack_rate) {
        return Err(Error::Config(format!("attack rate {attack_rate} outside [0,1]")));
    }
    let mut schedule = Vec::new();
    for (pos, t) in scenario.workflow.topo_order().iter().enumerate() {
        let service = scenario.service(&binding.bound(t)?.primary)?;
        let mix = service.afr_sum();
        if mix <= 0.0 {
            continue;
        }
        let p = (attack_rate * mix).min(1.0);
        if rng.gen_range(0.0..1.0) >= p {
            continue;
        }
        let mut pick = rng.gen_range(0.0..mix);
        let mut attack = None;
        for (a, r) in &service.afr {
            if pick < *r {
                attack = Some(a.clone());
                break;
            }
            pick -= r;
        }
        let attack = attack.unwrap_or_else(|| service.afr.keys().next_back().unwrap().clone());
        let raw_score: f64 = rng.gen_range(0.0..1.0);
        schedule.push(PendingViolation {
            task: t.clone(),
            pos,
            attack,
            severity: Severity::from_score(raw_score),
            raw_score,
        });
    }
    Ok(schedule)
}

// ---------------------------------------------------------------------------
// Execution traces
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationEvent {
    pub task: TaskId,
    pub attack: AttackType,
    pub severity: Severity,
    pub raw_score: f64,
    pub detected_at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Completed,
    Adapted,
    Reworked,
    Skipped,
}

/// One task execution (or re-execution) in a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task: TaskId,
    pub service: String,
    pub action: Option<ActionType>,
    pub status: TaskStatus,
    pub start: f64,
    pub end: f64,
    pub price: f64,
    pub time: f64,
    pub value: f64,
    pub ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExecutionTrace {
    pub instance: u64,
    pub records: Vec<TaskRecord>,
    pub violations: Vec<ViolationEvent>,
    /// Canonical keys of the chains applied, in application order.
    pub chains: Vec<String>,
    pub totals: CostBreakdown,
    pub makespan: f64,
    #[serde(skip)]
    pub history: AdaptationHistory,
}

impl ExecutionTrace {
    /// Re-aggregates the per-record attributes; equals `totals` by
    /// construction and serves as the audit fold.
    pub fn recompute_totals(&self, weights: &Weights) -> CostBreakdown {
        let mut acc = CostBreakdown::ZERO;
        for r in &self.records {
            acc.price += r.price;
            acc.time += r.time;
            acc.value += r.value;
            acc.mitigation += r.ms;
        }
        acc.total = weights.total(acc.price, acc.time, acc.value, acc.mitigation);
        acc
    }
}

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub policy: BindingPolicy,
    /// Overrides the tenant's weights when set.
    pub weights: Option<Weights>,
    pub attack_rate: f64,
    /// Violations surface this many tasks after the one they hit.
    pub detection_delay: usize,
    pub limits: ChainLimits,
    /// Min-max normalize attributes within each candidate set before
    /// weighting.
    pub normalize: bool,
    pub seed: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            policy: BindingPolicy::Cheapest,
            weights: None,
            attack_rate: 0.3,
            detection_delay: 0,
            limits: ChainLimits::default(),
            normalize: false,
            seed: 0,
        }
    }
}

type ChainKey = (TaskId, AttackType, Severity);

/// Everything shared across the instances of one experiment: the scenario,
/// precomputed dependency matrix, service binding, and a cache of expanded
/// chain sets per violation signature.
pub struct SimEnv<'a> {
    pub scenario: &'a Scenario,
    pub catalog: &'a Catalog,
    pub sdm: SecurityDependencyMatrix,
    pub binding: ServiceBinding,
    pub bound_costs: BTreeMap<TaskId, BoundCosts>,
    pub weights: Weights,
    pub options: SimOptions,
    cache: Mutex<BTreeMap<ChainKey, Arc<crate::chain::ChainSet>>>,
}

impl<'a> SimEnv<'a> {
    pub fn new(scenario: &'a Scenario, catalog: &'a Catalog, options: SimOptions) -> Result<Self> {
        scenario.validate()?;
        for s in &scenario.services {
            for attack in s.afr.keys() {
                catalog.attack(attack)?;
            }
        }
        let tenant = scenario.primary_tenant();
        let weights = match options.weights {
            Some(w) => w,
            None => {
                let [p, t, v, m] = tenant.weights;
                Weights::new(p, t, v, m)?
            }
        };
        let binding = bind_services(scenario, options.policy, options.seed)?;
        let bound_costs = binding.bound_costs(scenario)?;
        Ok(SimEnv {
            scenario,
            catalog,
            sdm: compute_sdm(&scenario.workflow),
            binding,
            bound_costs,
            weights,
            options,
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn chain_ctx(&self) -> ChainContext<'_> {
        ChainContext {
            workflow: &self.scenario.workflow,
            sdm: &self.sdm,
            catalog: self.catalog,
            params: &self.scenario.params,
            bindings: &self.bound_costs,
        }
    }

    /// Expanded chain set for a violation signature, generated once and
    /// shared. Constraint filtering stays per-event since it depends on the
    /// instance's history.
    pub fn candidate_chains(
        &self,
        vt: &TaskId,
        attack: &AttackType,
        severity: Severity,
    ) -> Result<Arc<crate::chain::ChainSet>> {
        let key = (vt.clone(), attack.clone(), severity);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(Arc::clone(hit));
        }
        let ctx = self.chain_ctx();
        let generated = generate_chain_set(&ctx, vt, attack, severity, self.options.limits)?;
        let expanded = Arc::new(expand_chain_loops(&ctx, vt, &generated)?);
        let mut cache = self.cache.lock().unwrap();
        Ok(Arc::clone(cache.entry(key).or_insert(expanded)))
    }
}

// ---------------------------------------------------------------------------
// Responders
// ---------------------------------------------------------------------------

/// Chooses how one instance answers a detected violation. Candidates arrive
/// expanded and constraint-filtered, in canonical order.
pub trait Respond {
    fn respond(
        &mut self,
        env: &SimEnv,
        event: &ViolationEvent,
        candidates: &[AdaptationChain],
        history: &AdaptationHistory,
    ) -> Result<Option<AdaptationChain>>;

    /// Called once when the instance completes.
    fn finish(&mut self, env: &SimEnv, history: &AdaptationHistory) -> Result<()> {
        let _ = (env, history);
        Ok(())
    }
}

/// Never adapts; violations are logged only.
pub struct NoResponse;

impl Respond for NoResponse {
    fn respond(
        &mut self,
        _env: &SimEnv,
        _event: &ViolationEvent,
        _candidates: &[AdaptationChain],
        _history: &AdaptationHistory,
    ) -> Result<Option<AdaptationChain>> {
        Ok(None)
    }
}

/// The single-action baseline: the cheapest single-step chain on the
/// violated task itself, ignoring multi-task coordination.
pub struct SingleBest;

impl Respond for SingleBest {
    fn respond(
        &mut self,
        env: &SimEnv,
        event: &ViolationEvent,
        _candidates: &[AdaptationChain],
        history: &AdaptationHistory,
    ) -> Result<Option<AdaptationChain>> {
        let ctx = env.chain_ctx();
        let task = env.scenario.workflow.task(&event.task)?;
        let history_pairs = history.step_pairs();
        let mut singles = Vec::new();
        for action in feasible_actions(task, env.catalog, &event.attack, event.severity)? {
            let chain = resolve_chain(
                &ctx,
                &event.task,
                &event.attack,
                event.severity,
                &[(event.task.clone(), action)],
            )?;
            if !env.scenario.constraints.iter().any(|c| c.matches(&chain, &history_pairs)) {
                singles.push(chain);
            }
        }
        if singles.is_empty() {
            return Ok(None);
        }
        let (_, totals) = score_chains(
            &ctx,
            &env.weights,
            &env.scenario.constraints,
            history,
            &event.task,
            &singles,
            env.options.normalize,
        )?;
        Ok(best_candidate(&singles, &totals).map(|n| singles[n].clone()))
    }
}

/// Exhaustive argmin of the chain cost over the candidate set. On a
/// truncated set this is the best enumerated chain, not a proven optimum.
pub struct OracleBest;

impl Respond for OracleBest {
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
        let ctx = env.chain_ctx();
        let (_, totals) = score_chains(
            &ctx,
            &env.weights,
            &env.scenario.constraints,
            history,
            &event.task,
            candidates,
            env.options.normalize,
        )?;
        Ok(best_candidate(candidates, &totals).map(|n| candidates[n].clone()))
    }
}

// ---------------------------------------------------------------------------
// Instance execution
// ---------------------------------------------------------------------------

struct Clock {
    /// Latest end time per task.
    ends: BTreeMap<TaskId, f64>,
    now: f64,
}

impl Clock {
    fn start_for(&self, w: &crate::workflow::Workflow, t: &TaskId, floor: f64) -> f64 {
        let mut start: f64 = floor;
        for e in w.control_edges().iter().filter(|e| &e.dst == t) {
            if let Some(end) = self.ends.get(&e.src) {
                start = start.max(*end);
            }
        }
        start
    }

    fn record(&mut self, t: &TaskId, start: f64, dur: f64) -> (f64, f64) {
        let end = start + dur;
        self.ends.insert(t.clone(), end);
        self.now = self.now.max(end);
        (start, end)
    }
}

fn status_of(action: ActionType, unintentional: bool) -> TaskStatus {
    if unintentional {
        return TaskStatus::Reworked;
    }
    match action {
        ActionType::Skip => TaskStatus::Skipped,
        ActionType::Rework => TaskStatus::Reworked,
        _ => TaskStatus::Adapted,
    }
}

/// Runs one workflow instance under the given responder and RNG stream.
///
/// The violation schedule is drawn from `rng` before execution, so equal
/// streams give equal schedules across strategies. Detection happens at the
/// end of the violated task plus the configured delay; severities below the
/// tenant's trigger threshold are logged without consulting the responder.
pub fn execute_instance(
    env: &SimEnv,
    instance: u64,
    responder: &mut dyn Respond,
    rng: &mut ChaCha8Rng,
) -> Result<ExecutionTrace> {
    let w = &env.scenario.workflow;
    let topo = w.topo_order();
    let threshold = env.scenario.primary_tenant().adapt_trigger_threshold;
    let schedule = inject_attacks(env.scenario, &env.binding, env.options.attack_rate, rng)?;
    let last = topo.len() - 1;
    let mut by_detect_pos: BTreeMap<usize, Vec<&PendingViolation>> = BTreeMap::new();
    for v in &schedule {
        let at = (v.pos + env.options.detection_delay).min(last);
        by_detect_pos.entry(at).or_default().push(v);
    }

    let mut records: Vec<TaskRecord> = Vec::with_capacity(topo.len());
    let mut violations = Vec::new();
    let mut history = AdaptationHistory::new();
    let mut clock = Clock { ends: BTreeMap::new(), now: 0.0 };
    let mut deferred: BTreeMap<TaskId, crate::chain::ChainStep> = BTreeMap::new();
    let mut completed: BTreeSet<TaskId> = BTreeSet::new();

    for (pos, t) in topo.iter().enumerate() {
        let bound = env.binding.bound(t)?;
        let record = match deferred.remove(t) {
            Some(step) => {
                let start = clock.start_for(w, t, 0.0);
                let (start, end) = clock.record(t, start, step.resolved.time);
                TaskRecord {
                    task: t.clone(),
                    service: service_for_action(bound, step.action),
                    action: Some(step.action),
                    status: status_of(step.action, step.unintentional),
                    start,
                    end,
                    price: step.resolved.price,
                    time: step.resolved.time,
                    value: step.resolved.value,
                    ms: step.ms,
                }
            }
            None => {
                let service = env.scenario.service(&bound.primary)?;
                let task = w.task(t)?;
                let start = clock.start_for(w, t, 0.0);
                let (start, end) = clock.record(t, start, service.time);
                TaskRecord {
                    task: t.clone(),
                    service: bound.primary.clone(),
                    action: None,
                    status: TaskStatus::Completed,
                    start,
                    end,
                    price: service.price,
                    time: service.time,
                    value: task.value,
                    ms: 0.0,
                }
            }
        };
        records.push(record);
        completed.insert(t.clone());

        let Some(pending) = by_detect_pos.remove(&pos) else { continue };
        for v in pending {
            let event = ViolationEvent {
                task: v.task.clone(),
                attack: v.attack.clone(),
                severity: v.severity,
                raw_score: v.raw_score,
                detected_at: clock.now,
            };
            violations.push(event.clone());
            if event.severity < threshold {
                continue;
            }
            let set = env.candidate_chains(&event.task, &event.attack, event.severity)?;
            let resolved = resolve_constraints(&set, &env.scenario.constraints, &history);
            let Some(chain) =
                responder.respond(env, &event, &resolved.chains, &history)?
            else {
                continue;
            };
            apply_chain(
                env,
                &event,
                &chain,
                pos,
                &mut records,
                &mut clock,
                &mut deferred,
                &completed,
            )?;
            history.commit(HistoryEntry {
                vt: event.task.clone(),
                attack: event.attack.clone(),
                severity: event.severity,
                chain,
            });
        }
    }

    responder.finish(env, &history)?;

    let mut totals = CostBreakdown::ZERO;
    for r in &records {
        totals.price += r.price;
        totals.time += r.time;
        totals.value += r.value;
        totals.mitigation += r.ms;
    }
    totals.total = env.weights.total(totals.price, totals.time, totals.value, totals.mitigation);
    let makespan = clock.now;
    Ok(ExecutionTrace {
        instance,
        records,
        violations,
        chains: history.entries().iter().map(|e| e.chain.key()).collect(),
        totals,
        makespan,
        history,
    })
}

fn service_for_action(bound: &BoundService, action: ActionType) -> String {
    match action {
        ActionType::Rework => bound.backup.clone(),
        _ => bound.primary.clone(),
    }
}

/// Applies a chain at its detection point: re-executes the segment from the
/// chain's start point up to the cursor, repeating completed on-path tasks
/// the chain leaves untouched, and defers steps on tasks not yet reached.
#[allow(clippy::too_many_arguments)]
fn apply_chain(
    env: &SimEnv,
    event: &ViolationEvent,
    chain: &AdaptationChain,
    cursor_pos: usize,
    records: &mut Vec<TaskRecord>,
    clock: &mut Clock,
    deferred: &mut BTreeMap<TaskId, crate::chain::ChainStep>,
    completed: &BTreeSet<TaskId>,
) -> Result<()> {
    let w = &env.scenario.workflow;
    let vt = &event.task;
    let pred_vt = w.predecessors(vt)?;
    let resume_floor = clock.now;

    let start = chain
        .steps
        .iter()
        .map(|s| &s.task)
        .filter(|t| *t == vt || pred_vt.contains(t))
        .min_by_key(|t| w.topo_position(t).expect("chain tasks are workflow tasks"));

    // Tasks to re-run now: chain steps at or before the cursor, plus
    // completed tasks between the start point and vt that the chain skips
    // over (normally none once chains are loop-expanded).
    let mut replays: Vec<(TaskId, Option<&crate::chain::ChainStep>)> = Vec::new();
    if let Some(start) = start {
        let on_path: BTreeSet<TaskId> = {
            let succ = w.successors(start)?;
            let mut s: BTreeSet<TaskId> =
                succ.intersection(&pred_vt).cloned().collect();
            s.insert(start.clone());
            s.insert(vt.clone());
            s
        };
        for t in &on_path {
            if completed.contains(t) && chain.step_for(t).is_none() {
                replays.push((t.clone(), None));
            }
        }
    }
    for step in &chain.steps {
        if w.topo_position(&step.task)? <= cursor_pos {
            replays.push((step.task.clone(), Some(step)));
        } else {
            deferred.insert(step.task.clone(), step.clone());
        }
    }
    replays.sort_by_key(|(t, _)| w.topo_position(t).expect("validated above"));

    for (t, step) in replays {
        let bound = env.binding.bound(&t)?;
        match step {
            Some(step) => {
                let start = clock.start_for(w, &t, resume_floor);
                let (start, end) = clock.record(&t, start, step.resolved.time);
                records.push(TaskRecord {
                    task: t.clone(),
                    service: service_for_action(bound, step.action),
                    action: Some(step.action),
                    status: status_of(step.action, step.unintentional),
                    start,
                    end,
                    price: step.resolved.price,
                    time: step.resolved.time,
                    value: step.resolved.value,
                    ms: step.ms,
                });
            }
            None => {
                let service = env.scenario.service(&bound.primary)?;
                let task = w.task(&t)?;
                let start = clock.start_for(w, &t, resume_floor);
                let (start, end) = clock.record(&t, start, service.time);
                records.push(TaskRecord {
                    task: t.clone(),
                    service: bound.primary.clone(),
                    action: None,
                    status: TaskStatus::Reworked,
                    start,
                    end,
                    price: service.price,
                    time: service.time,
                    value: task.value,
                    ms: 0.0,
                });
            }
        }
    }
    Ok(())
}

/// Per-instance RNG stream: all instances share the master seed and differ
/// only in the stream index, so adding instances never perturbs earlier
/// ones.
pub fn instance_rng(master_seed: u64, instance: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(instance + 1);
    rng
}

/// Convenience wrapper: single-step argmin response used by tests and the
/// `single` strategy; exposed so callers can audit what the baseline chose.
pub fn best_single_action(
    env: &SimEnv,
    event: &ViolationEvent,
    history: &AdaptationHistory,
) -> Result<Option<(AdaptationChain, CostBreakdown)>> {
    let mut single = SingleBest;
    match single.respond(env, event, &[], history)? {
        Some(chain) => {
            let ctx = env.chain_ctx();
            let cost = chain_cost(
                &ctx,
                &env.weights,
                &env.scenario.constraints,
                history,
                &event.task,
                &chain,
            )?;
            Ok(Some((chain, cost)))
        }
        None => Ok(None),
    }
}
