//! Adaptation chains: coordinated multi-task responses to a security
//! violation.
//!
//! A chain assigns at most one adaptation action to each task that is
//! security-dependent on the violated task. Chains are generated as the
//! non-empty combinations of per-task feasible mitigation actions, expanded
//! with the incidental rework forced by re-running earlier parts of the
//! workflow, and filtered against tenant constraints.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::catalog::{
    ActionType, AdaptationActionSpec, AdaptationParams, AttackType, Catalog, ServiceCost, Severity,
};
use crate::cost::mitigation_score;
use crate::error::{Error, Result};
use crate::sdm::{dependent_tasks, SecurityDependencyMatrix};
use crate::workflow::{TaskId, TaskSpec, Workflow};

/// Primary and backup service costs for one task, as designated by the
/// current binding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCosts {
    pub primary: ServiceCost,
    pub backup: ServiceCost,
}

/// Everything the chain engine needs to resolve and price actions.
#[derive(Clone, Copy)]
pub struct ChainContext<'a> {
    pub workflow: &'a Workflow,
    pub sdm: &'a SecurityDependencyMatrix,
    pub catalog: &'a Catalog,
    pub params: &'a AdaptationParams,
    pub bindings: &'a BTreeMap<TaskId, BoundCosts>,
}

/// The violation a chain was built for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainOrigin {
    pub vt: TaskId,
    pub attack: AttackType,
    pub severity: Severity,
}

/// One action applied to one task as part of a chain.
///
/// `unintentional` marks rework steps added by loop expansion rather than
/// chosen deliberately; they bypass the task's feasible-action check.
#[derive(Debug, Clone)]
pub struct ChainStep {
    pub task: TaskId,
    pub action: ActionType,
    pub resolved: AdaptationActionSpec,
    /// Mitigation score of this step with respect to the chain's violation.
    pub ms: f64,
    pub unintentional: bool,
}

impl ChainStep {
    fn identity(&self) -> (&str, ActionType, bool) {
        (self.task.as_str(), self.action, self.unintentional)
    }
}

impl PartialEq for ChainStep {
    fn eq(&self, other: &Self) -> bool {
        self.identity() == other.identity()
    }
}

impl Eq for ChainStep {}

#[derive(Debug, Clone, Default)]
pub struct AdaptationChain {
    /// Steps in topological order of the workflow; at most one per task.
    pub steps: Vec<ChainStep>,
    pub origin: Option<ChainOrigin>,
}

impl AdaptationChain {
    pub fn new(steps: Vec<ChainStep>, origin: Option<ChainOrigin>) -> Self {
        AdaptationChain { steps, origin }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn tasks(&self) -> BTreeSet<&TaskId> {
        self.steps.iter().map(|s| &s.task).collect()
    }

    pub fn step_for(&self, t: &TaskId) -> Option<&ChainStep> {
        self.steps.iter().find(|s| &s.task == t)
    }

    pub fn step_pairs(&self) -> BTreeSet<(TaskId, ActionType)> {
        self.steps.iter().map(|s| (s.task.clone(), s.action)).collect()
    }

    /// Canonical text form, e.g. `t5:Redundancy|t6:Insert`. Also used as the
    /// action key in serialized value tables.
    pub fn key(&self) -> String {
        let parts: Vec<String> = self
            .steps
            .iter()
            .map(|s| format!("{}:{}", s.task, s.action))
            .collect();
        parts.join("|")
    }

    /// Canonical ordering: shorter chains first, then step-wise by task id
    /// and action. Gives every chain set a stable, platform-independent
    /// order regardless of how it was produced.
    pub fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.steps
            .len()
            .cmp(&other.steps.len())
            .then_with(|| {
                let a = self.steps.iter().map(ChainStep::identity);
                let b = other.steps.iter().map(ChainStep::identity);
                a.cmp(b)
            })
    }
}

impl PartialEq for AdaptationChain {
    fn eq(&self, other: &Self) -> bool {
        self.steps == other.steps
    }
}

impl Eq for AdaptationChain {}

/// Enumeration guard: bounds the number of chains materialized for one
/// violation. When the full combination count exceeds `max_chains` the
/// enumeration is cut off by increasing chain length, keeping at most
/// `max_chain_length` deliberate steps per chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainLimits {
    pub max_chains: usize,
    pub max_chain_length: usize,
}

impl Default for ChainLimits {
    fn default() -> Self {
        ChainLimits { max_chains: 200_000, max_chain_length: 4 }
    }
}

/// Result of chain enumeration.
#[derive(Debug, Clone)]
pub struct ChainSet {
    pub chains: Vec<AdaptationChain>,
    /// True when the enumeration was cut short by `ChainLimits`.
    pub truncated: bool,
    /// Number of chains the unbounded enumeration would contain.
    pub full_count: u128,
}

/// Actions a task can contribute against a violation: the task's own
/// feasible actions intersected with the catalog's mitigation set for the
/// attack at the observed severity.
pub fn feasible_actions(
    task: &TaskSpec,
    catalog: &Catalog,
    attack: &AttackType,
    severity: Severity,
) -> Result<BTreeSet<ActionType>> {
    let mitigation = catalog.mitigation_actions_for(attack, severity)?;
    Ok(task.feasible_actions.intersection(mitigation).copied().collect())
}

/// Resolves one step of a chain: feasibility check (skipped for
/// unintentional rework), service-cost resolution and mitigation score.
pub fn resolve_step(
    ctx: &ChainContext,
    vt: &TaskId,
    attack: &AttackType,
    task_id: &TaskId,
    action: ActionType,
    unintentional: bool,
) -> Result<ChainStep> {
    let task = ctx.workflow.task(task_id)?;
    if !unintentional && !task.feasible_actions.contains(&action) {
        return Err(Error::Infeasible {
            task: task_id.as_str().to_string(),
            action: action.to_string(),
        });
    }
    let costs = ctx.bindings.get(task_id).ok_or_else(|| Error::Binding {
        task: task_id.as_str().to_string(),
        reason: "no service bound".into(),
    })?;
    let resolved =
        ctx.catalog
            .adaptation_properties(ctx.params, task, action, costs.primary, costs.backup);
    let impact = ctx.catalog.attack_impact(attack)?;
    let dependency = ctx
        .sdm
        .entry(vt, task_id)
        .ok_or_else(|| Error::UnknownTask(vt.as_str().to_string()))?;
    let ms = mitigation_score(task.requirements, impact, resolved.mi, dependency);
    Ok(ChainStep { task: task_id.clone(), action, resolved, ms, unintentional })
}

/// Builds a chain from explicit (task, action) picks, sorted topologically.
pub fn resolve_chain(
    ctx: &ChainContext,
    vt: &TaskId,
    attack: &AttackType,
    severity: Severity,
    picks: &[(TaskId, ActionType)],
) -> Result<AdaptationChain> {
    let mut seen = BTreeSet::new();
    let mut steps = Vec::with_capacity(picks.len());
    for (task, action) in picks {
        if !seen.insert(task.clone()) {
            return Err(Error::Validation(format!("chain assigns two actions to task {task}")));
        }
        steps.push(resolve_step(ctx, vt, attack, task, *action, false)?);
    }
    sort_steps(ctx.workflow, &mut steps)?;
    Ok(AdaptationChain::new(
        steps,
        Some(ChainOrigin { vt: vt.clone(), attack: attack.clone(), severity }),
    ))
}

fn sort_steps(w: &Workflow, steps: &mut Vec<ChainStep>) -> Result<()> {
    let mut keyed = Vec::with_capacity(steps.len());
    for s in steps.drain(..) {
        keyed.push((w.topo_position(&s.task)?, s));
    }
    keyed.sort_by_key(|(pos, _)| *pos);
    steps.extend(keyed.into_iter().map(|(_, s)| s));
    Ok(())
}

/// Elementary symmetric polynomial values over the option counts:
/// `esp[d]` = number of ways to pick actions for exactly `d` distinct tasks.
fn esp(ks: &[usize]) -> Vec<u128> {
    let mut e = vec![0u128; ks.len() + 1];
    e[0] = 1;
    for &k in ks {
        for d in (1..e.len()).rev() {
            e[d] = e[d].saturating_add(e[d - 1].saturating_mul(k as u128));
        }
    }
    e
}

/// Enumerates the adaptation chain set for a violation of `vt`.
///
/// Candidate tasks are those security-dependent on `vt`; each contributes
/// its feasible mitigation actions. The full set holds every non-empty
/// combination with at most one action per task, so its size is
/// `prod(k_t + 1) - 1`. Chains come back sorted canonically.
pub fn generate_chain_set(
    ctx: &ChainContext,
    vt: &TaskId,
    attack: &AttackType,
    severity: Severity,
    limits: ChainLimits,
) -> Result<ChainSet> {
    let dt = dependent_tasks(ctx.sdm, vt)?;
    let mut by_topo: Vec<(usize, &TaskId)> = dt
        .iter()
        .map(|t| Ok((ctx.workflow.topo_position(t)?, t)))
        .collect::<Result<_>>()?;
    by_topo.sort_unstable();

    let mut options: Vec<(TaskId, Vec<ActionType>)> = Vec::new();
    for (_, t) in by_topo {
        let task = ctx.workflow.task(t)?;
        let acts = feasible_actions(task, ctx.catalog, attack, severity)?;
        if !acts.is_empty() {
            options.push((t.clone(), acts.into_iter().collect()));
        }
    }

    let ks: Vec<usize> = options.iter().map(|(_, a)| a.len()).collect();
    let full_count = ks
        .iter()
        .fold(1u128, |acc, &k| acc.saturating_mul(k as u128 + 1))
        .saturating_sub(1);

    let origin = ChainOrigin { vt: vt.clone(), attack: attack.clone(), severity };
    let mut chains = Vec::new();
    let truncated;
    if full_count <= limits.max_chains as u128 {
        truncated = false;
        enumerate(ctx, vt, attack, &origin, &options, usize::MAX, &mut chains)?;
    } else {
        truncated = true;
        let e = esp(&ks);
        let mut budget = limits.max_chains as u128;
        let mut max_len = 0usize;
        for d in 1..=limits.max_chain_length.min(ks.len()) {
            if e[d] <= budget {
                budget -= e[d];
                max_len = d;
            } else {
                break;
            }
        }
        // Even single-step chains blow the budget: enumerate them anyway and
        // cut the sorted list, so the caller still gets a deterministic set.
        let cut = if max_len == 0 { Some(limits.max_chains) } else { None };
        enumerate(ctx, vt, attack, &origin, &options, max_len.max(1), &mut chains)?;
        if let Some(cap) = cut {
            chains.sort_by(AdaptationChain::canonical_cmp);
            chains.truncate(cap);
        }
    }
    chains.sort_by(AdaptationChain::canonical_cmp);
    Ok(ChainSet { chains, truncated, full_count })
}

fn enumerate(
    ctx: &ChainContext,
    vt: &TaskId,
    attack: &AttackType,
    origin: &ChainOrigin,
    options: &[(TaskId, Vec<ActionType>)],
    max_len: usize,
    out: &mut Vec<AdaptationChain>,
) -> Result<()> {
    // Resolve each candidate step once; combinations then just clone them.
    let mut resolved: Vec<Vec<ChainStep>> = Vec::with_capacity(options.len());
    for (task, acts) in options {
        let steps: Result<Vec<ChainStep>> = acts
            .iter()
            .map(|&a| resolve_step(ctx, vt, attack, task, a, false))
            .collect();
        resolved.push(steps?);
    }

    let mut current: Vec<ChainStep> = Vec::new();
    fn rec(
        resolved: &[Vec<ChainStep>],
        at: usize,
        max_len: usize,
        current: &mut Vec<ChainStep>,
        origin: &ChainOrigin,
        out: &mut Vec<AdaptationChain>,
    ) {
        if at == resolved.len() {
            if !current.is_empty() {
                out.push(AdaptationChain::new(current.clone(), Some(origin.clone())));
            }
            return;
        }
        rec(resolved, at + 1, max_len, current, origin, out);
        if current.len() < max_len {
            for step in &resolved[at] {
                current.push(step.clone());
                rec(resolved, at + 1, max_len, current, origin, out);
                current.pop();
            }
        }
    }
    rec(&resolved, 0, max_len, &mut current, origin, out);
    Ok(())
}

/// Adds the rework forced by resuming execution before `vt`: for every
/// chain starting point (a chain task with no chain-task predecessor),
/// each completed task lying strictly between that starting point and `vt`
/// that the chain does not already touch is re-run, recorded as an
/// unintentional rework step.
pub fn expand_chain(
    ctx: &ChainContext,
    vt: &TaskId,
    chain: &AdaptationChain,
) -> Result<AdaptationChain> {
    let chain_tasks: BTreeSet<TaskId> = chain.steps.iter().map(|s| s.task.clone()).collect();
    let mut starting_points = Vec::new();
    for t in &chain_tasks {
        let preds = ctx.workflow.predecessors(t)?;
        if preds.is_disjoint(&chain_tasks) {
            starting_points.push(t.clone());
        }
    }

    let pred_vt = ctx.workflow.predecessors(vt)?;
    let attack = chain
        .origin
        .as_ref()
        .map(|o| o.attack.clone())
        .unwrap_or_else(AttackType::dos);
    let mut additions = BTreeSet::new();
    for sp in &starting_points {
        let succ_sp = ctx.workflow.successors(sp)?;
        for t in pred_vt.intersection(&succ_sp) {
            if !chain_tasks.contains(t) {
                additions.insert(t.clone());
            }
        }
    }

    if additions.is_empty() {
        return Ok(chain.clone());
    }
    let mut steps = chain.steps.clone();
    for t in additions {
        steps.push(resolve_step(ctx, vt, &attack, &t, ActionType::Rework, true)?);
    }
    sort_steps(ctx.workflow, &mut steps)?;
    Ok(AdaptationChain::new(steps, chain.origin.clone()))
}

/// Expands every chain in a set and restores canonical order. Chains that
/// become identical after expansion are kept distinct only if they differ
/// in deliberate steps.
pub fn expand_chain_loops(
    ctx: &ChainContext,
    vt: &TaskId,
    set: &ChainSet,
) -> Result<ChainSet> {
    let mut chains = Vec::with_capacity(set.chains.len());
    for c in &set.chains {
        chains.push(expand_chain(ctx, vt, c)?);
    }
    chains.sort_by(AdaptationChain::canonical_cmp);
    chains.dedup();
    Ok(ChainSet { chains, truncated: set.truncated, full_count: set.full_count })
}

// ---------------------------------------------------------------------------
// Constraints
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    /// Both endpoints together are forbidden.
    Conflict,
    /// The left endpoint requires the right one.
    Essential,
}

/// A tenant rule over (task, action) pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConstraint {
    pub kind: ConstraintKind,
    pub left: (TaskId, ActionType),
    pub right: (TaskId, ActionType),
}

impl ChainConstraint {
    pub fn conflict(lt: &str, la: ActionType, rt: &str, ra: ActionType) -> Self {
        ChainConstraint {
            kind: ConstraintKind::Conflict,
            left: (lt.into(), la),
            right: (rt.into(), ra),
        }
    }

    pub fn essential(lt: &str, la: ActionType, rt: &str, ra: ActionType) -> Self {
        ChainConstraint {
            kind: ConstraintKind::Essential,
            left: (lt.into(), la),
            right: (rt.into(), ra),
        }
    }

    /// True when the chain, taken together with all previously applied
    /// steps, violates this constraint.
    pub fn matches(
        &self,
        chain: &AdaptationChain,
        history_pairs: &BTreeSet<(TaskId, ActionType)>,
    ) -> bool {
        let mut pairs = chain.step_pairs();
        pairs.extend(history_pairs.iter().cloned());
        match self.kind {
            ConstraintKind::Conflict => pairs.contains(&self.left) && pairs.contains(&self.right),
            ConstraintKind::Essential => pairs.contains(&self.left) && !pairs.contains(&self.right),
        }
    }
}

/// Removes every chain that violates a constraint, taking the adaptation
/// history into account. Constraints never add steps; a chain missing an
/// essential counterpart is dropped, not repaired.
pub fn resolve_constraints(
    set: &ChainSet,
    constraints: &[ChainConstraint],
    history: &AdaptationHistory,
) -> ChainSet {
    let history_pairs = history.step_pairs();
    let chains: Vec<AdaptationChain> = set
        .chains
        .iter()
        .filter(|c| !constraints.iter().any(|r| r.matches(c, &history_pairs)))
        .cloned()
        .collect();
    ChainSet { chains, truncated: set.truncated, full_count: set.full_count }
}

// ---------------------------------------------------------------------------
// History
// ---------------------------------------------------------------------------

/// One applied chain together with the violation that triggered it.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub vt: TaskId,
    pub attack: AttackType,
    pub severity: Severity,
    pub chain: AdaptationChain,
}

/// Ordered record of applied chains within one workflow instance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdaptationHistory {
    entries: Vec<HistoryEntry>,
}

impl AdaptationHistory {
    pub fn new() -> Self {
        AdaptationHistory::default()
    }

    pub fn entries(&self) -> &[HistoryEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The task whose violation was handled most recently.
    pub fn previous_vt(&self) -> Option<&TaskId> {
        self.entries.last().map(|e| &e.vt)
    }

    /// Latest recorded step touching `t`, if any.
    pub fn last_action_for(&self, t: &TaskId) -> Option<&ChainStep> {
        self.entries
            .iter()
            .rev()
            .find_map(|e| e.chain.step_for(t))
    }

    pub fn step_pairs(&self) -> BTreeSet<(TaskId, ActionType)> {
        self.entries
            .iter()
            .flat_map(|e| e.chain.step_pairs())
            .collect()
    }

    /// Appends an applied chain. When the new chain adapts the violated
    /// task itself, superseded actions on that task are dropped from older
    /// entries so they no longer replay or trip constraints.
    pub fn commit(&mut self, entry: HistoryEntry) {
        if entry.chain.step_for(&entry.vt).is_some() {
            for old in &mut self.entries {
                old.chain.steps.retain(|s| s.task != entry.vt);
            }
        }
        self.entries.push(entry);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cia::Cia;
    use crate::sdm::compute_sdm;
    use crate::workflow::{ControlEdge, DataEdge, DataItem};

    fn task(id: &str, actions: &[ActionType]) -> TaskSpec {
        TaskSpec {
            id: id.into(),
            requirements: Cia::new(0.8, 0.9, 0.7),
            value: 10.0,
            feasible_actions: actions.iter().copied().collect(),
        }
    }

    fn line_workflow() -> Workflow {
        use ActionType::*;
        Workflow::new(
            "w".into(),
            vec![
                task("a", &[Insert, Rework]),
                task("b", &[Insert, Rework, Redundancy]),
                task("c", &[Insert]),
            ],
            vec![DataItem { id: "d".into(), label: "d".into() }],
            vec![
                ControlEdge { src: "a".into(), dst: "b".into(), guard: None },
                ControlEdge { src: "b".into(), dst: "c".into(), guard: None },
            ],
            vec![
                DataEdge { src: "a".into(), dst: "b".into(), item: "d".into() },
                DataEdge { src: "b".into(), dst: "c".into(), item: "d".into() },
            ],
        )
        .unwrap()
    }

    fn flat_bindings(w: &Workflow) -> BTreeMap<TaskId, BoundCosts> {
        w.tasks()
            .iter()
            .map(|t| {
                (
                    t.id.clone(),
                    BoundCosts {
                        primary: ServiceCost { time: 5.0, price: 2.0 },
                        backup: ServiceCost { time: 7.0, price: 1.5 },
                    },
                )
            })
            .collect()
    }

    struct Fix {
        w: Workflow,
        sdm: SecurityDependencyMatrix,
        catalog: Catalog,
        params: AdaptationParams,
        bindings: BTreeMap<TaskId, BoundCosts>,
    }

    impl Fix {
        fn new() -> Self {
            let w = line_workflow();
            let sdm = compute_sdm(&w);
            let bindings = flat_bindings(&w);
            Fix { w, sdm, catalog: Catalog::builtin(), params: AdaptationParams::default(), bindings }
        }

        fn ctx(&self) -> ChainContext<'_> {
            ChainContext {
                workflow: &self.w,
                sdm: &self.sdm,
                catalog: &self.catalog,
                params: &self.params,
                bindings: &self.bindings,
            }
        }
    }

    #[test]
    fn feasible_actions_intersect_catalog_sets() {
        use ActionType::*;
        let cat = Catalog::builtin();
        let t = task("x", &[Insert, Skip]);
        let acts = feasible_actions(&t, &cat, &AttackType::dos(), Severity::High).unwrap();
        assert_eq!(acts.into_iter().collect::<Vec<_>>(), vec![Insert]);
    }

    #[test]
    fn chain_count_matches_product_formula() {
        let fix = Fix::new();
        // DoS/High mitigation covers Insert, Rework, Redundancy,
        // Reconfiguration; per-task sets intersect to 2, 3, 1 options.
        let set = generate_chain_set(
            &fix.ctx(),
            &"b".into(),
            &AttackType::dos(),
            Severity::High,
            ChainLimits::default(),
        )
        .unwrap();
        assert_eq!(set.full_count, (3 * 4 * 2 - 1) as u128);
        assert_eq!(set.chains.len() as u128, set.full_count);
        assert!(!set.truncated);
    }

    #[test]
    fn chains_have_unique_tasks_in_topo_order() {
        let fix = Fix::new();
        let set = generate_chain_set(
            &fix.ctx(),
            &"b".into(),
            &AttackType::dos(),
            Severity::High,
            ChainLimits::default(),
        )
        .unwrap();
        for c in &set.chains {
            let tasks: Vec<&str> = c.steps.iter().map(|s| s.task.as_str()).collect();
            let mut sorted = tasks.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), tasks.len(), "duplicate task in {}", c.key());
            let mut pos: Vec<usize> = c
                .steps
                .iter()
                .map(|s| fix.w.topo_position(&s.task).unwrap())
                .collect();
            let unsorted = pos.clone();
            pos.sort_unstable();
            assert_eq!(pos, unsorted, "steps out of topo order in {}", c.key());
        }
    }

    #[test]
    fn truncation_kicks_in_over_budget() {
        let fix = Fix::new();
        let limits = ChainLimits { max_chains: 10, max_chain_length: 4 };
        let set = generate_chain_set(
            &fix.ctx(),
            &"b".into(),
            &AttackType::dos(),
            Severity::High,
            limits,
        )
        .unwrap();
        assert!(set.truncated);
        assert!(set.chains.len() <= 10);
        assert!(set.chains.iter().all(|c| c.len() <= 1));
        assert_eq!(set.full_count, 23);
    }

    #[test]
    fn expansion_reworks_completed_tasks_between_start_and_vt() {
        let fix = Fix::new();
        let ctx = fix.ctx();
        // Chain touching only `a` while the violation sits at `c`: resuming
        // from `a` re-runs `b`, which must appear as unintentional rework.
        let chain = resolve_chain(
            &ctx,
            &"c".into(),
            &AttackType::dos(),
            Severity::High,
            &[("a".into(), ActionType::Insert)],
        )
        .unwrap();
        let expanded = expand_chain(&ctx, &"c".into(), &chain).unwrap();
        let parts: Vec<(&str, ActionType, bool)> = expanded
            .steps
            .iter()
            .map(|s| (s.task.as_str(), s.action, s.unintentional))
            .collect();
        assert_eq!(
            parts,
            vec![
                ("a", ActionType::Insert, false),
                ("b", ActionType::Rework, true),
            ]
        );
    }

    #[test]
    fn expansion_is_a_noop_without_gaps() {
        let fix = Fix::new();
        let ctx = fix.ctx();
        let chain = resolve_chain(
            &ctx,
            &"b".into(),
            &AttackType::dos(),
            Severity::High,
            &[("a".into(), ActionType::Insert), ("b".into(), ActionType::Insert)],
        )
        .unwrap();
        let expanded = expand_chain(&ctx, &"b".into(), &chain).unwrap();
        assert_eq!(expanded, chain);
    }

    #[test]
    fn conflict_constraint_removes_chain() {
        let fix = Fix::new();
        let ctx = fix.ctx();
        let set = generate_chain_set(
            &ctx,
            &"b".into(),
            &AttackType::dos(),
            Severity::High,
            ChainLimits::default(),
        )
        .unwrap();
        let n_before = set.chains.len();
        let rules =
            vec![ChainConstraint::conflict("a", ActionType::Insert, "b", ActionType::Insert)];
        let filtered = resolve_constraints(&set, &rules, &AdaptationHistory::new());
        assert!(filtered.chains.len() < n_before);
        for c in &filtered.chains {
            let pairs = c.step_pairs();
            assert!(
                !(pairs.contains(&("a".into(), ActionType::Insert))
                    && pairs.contains(&("b".into(), ActionType::Insert)))
            );
        }
    }

    #[test]
    fn essential_constraint_requires_counterpart() {
        let fix = Fix::new();
        let ctx = fix.ctx();
        let set = generate_chain_set(
            &ctx,
            &"b".into(),
            &AttackType::dos(),
            Severity::High,
            ChainLimits::default(),
        )
        .unwrap();
        let rules =
            vec![ChainConstraint::essential("a", ActionType::Rework, "b", ActionType::Insert)];
        let filtered = resolve_constraints(&set, &rules, &AdaptationHistory::new());
        for c in &filtered.chains {
            let pairs = c.step_pairs();
            if pairs.contains(&("a".into(), ActionType::Rework)) {
                assert!(pairs.contains(&("b".into(), ActionType::Insert)));
            }
        }
        assert!(filtered.chains.len() < set.chains.len());
    }

    #[test]
    fn history_satisfies_essential_constraint() {
        let fix = Fix::new();
        let ctx = fix.ctx();
        let applied = resolve_chain(
            &ctx,
            &"b".into(),
            &AttackType::dos(),
            Severity::High,
            &[("b".into(), ActionType::Insert)],
        )
        .unwrap();
        let mut history = AdaptationHistory::new();
        history.commit(HistoryEntry {
            vt: "b".into(),
            attack: AttackType::dos(),
            severity: Severity::High,
            chain: applied,
        });
        let candidate = resolve_chain(
            &ctx,
            &"b".into(),
            &AttackType::dos(),
            Severity::High,
            &[("a".into(), ActionType::Rework)],
        )
        .unwrap();
        let set = ChainSet { chains: vec![candidate], truncated: false, full_count: 1 };
        let rules =
            vec![ChainConstraint::essential("a", ActionType::Rework, "b", ActionType::Insert)];
        let filtered = resolve_constraints(&set, &rules, &history);
        assert_eq!(filtered.chains.len(), 1);
    }

    #[test]
    fn commit_drops_superseded_actions_on_vt() {
        let fix = Fix::new();
        let ctx = fix.ctx();
        let first = resolve_chain(
            &ctx,
            &"b".into(),
            &AttackType::dos(),
            Severity::High,
            &[("b".into(), ActionType::Insert)],
        )
        .unwrap();
        let second = resolve_chain(
            &ctx,
            &"b".into(),
            &AttackType::dos(),
            Severity::High,
            &[("b".into(), ActionType::Redundancy)],
        )
        .unwrap();
        let mut history = AdaptationHistory::new();
        history.commit(HistoryEntry {
            vt: "b".into(),
            attack: AttackType::dos(),
            severity: Severity::High,
            chain: first,
        });
        history.commit(HistoryEntry {
            vt: "b".into(),
            attack: AttackType::dos(),
            severity: Severity::High,
            chain: second,
        });
        assert!(history.entries()[0].chain.is_empty());
        assert_eq!(
            history.last_action_for(&"b".into()).unwrap().action,
            ActionType::Redundancy
        );
    }

    #[test]
    fn chain_key_serialization() {
        let fix = Fix::new();
        let ctx = fix.ctx();
        let chain = resolve_chain(
            &ctx,
            &"b".into(),
            &AttackType::dos(),
            Severity::High,
            &[("b".into(), ActionType::Redundancy), ("a".into(), ActionType::Insert)],
        )
        .unwrap();
        assert_eq!(chain.key(), "a:Insert|b:Redundancy");
    }
}
