//! Chain valuation: mitigation scores, the weighted cost function and
//! exhaustive best-chain search.
//!
//! The cost of a chain is a weighted sum over four attributes: price and
//! time count against a chain, produced value and mitigation score count in
//! its favor. Weights are supplied as non-negative magnitudes; the signs
//! are applied here. A chain that violates a constraint keeps an infinite
//! total so it stays comparable but never wins.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::chain::{
    AdaptationChain, AdaptationHistory, ChainConstraint, ChainContext, ChainSet,
};
use crate::cia::Cia;
use crate::error::{Error, Result};
use crate::workflow::TaskId;

/// Non-negative magnitudes for the four cost attributes, in the order
/// price, time, value, mitigation score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub price: f64,
    pub time: f64,
    pub value: f64,
    pub mitigation: f64,
}

impl Weights {
    pub fn new(price: f64, time: f64, value: f64, mitigation: f64) -> Result<Weights> {
        for (name, v) in [
            ("price", price),
            ("time", time),
            ("value", value),
            ("mitigation", mitigation),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!(
                    "weight {name} must be a non-negative finite number, got {v}"
                )));
            }
        }
        Ok(Weights { price, time, value, mitigation })
    }

    pub fn uniform() -> Weights {
        Weights { price: 1.0, time: 1.0, value: 1.0, mitigation: 1.0 }
    }

    /// Weighted total: price and time add, value and mitigation subtract.
    pub fn total(&self, price: f64, time: f64, value: f64, mitigation: f64) -> f64 {
        self.price * price + self.time * time - self.value * value - self.mitigation * mitigation
    }
}

impl Default for Weights {
    fn default() -> Self {
        Weights::uniform()
    }
}

/// Accumulated attributes of a chain or an execution, plus the weighted
/// total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub price: f64,
    pub time: f64,
    pub value: f64,
    pub mitigation: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub const ZERO: CostBreakdown =
        CostBreakdown { price: 0.0, time: 0.0, value: 0.0, mitigation: 0.0, total: 0.0 };

    fn add(&mut self, price: f64, time: f64, value: f64, mitigation: f64) {
        self.price += price;
        self.time += time;
        self.value += value;
        self.mitigation += mitigation;
    }

    fn finish(mut self, weights: &Weights) -> CostBreakdown {
        self.total = weights.total(self.price, self.time, self.value, self.mitigation);
        self
    }

    /// Sentinel breakdown for constraint-violating chains: attributes stay
    /// untouched at zero, the total is infinite.
    pub fn forbidden() -> CostBreakdown {
        CostBreakdown { total: f64::INFINITY, ..CostBreakdown::ZERO }
    }
}

/// How much one action on `task` mitigates a violation, per objective:
/// the unmet fraction of the requirement after the attack, scaled by the
/// action's mitigation impact and the dependency strength between the
/// violated task and `task`. Each component contributes at most 1, so the
/// score lies in `[0, 3]`.
pub fn mitigation_score(
    requirements: Cia,
    attack_impact: Cia,
    mitigation_impact: Cia,
    dependency: Cia,
) -> f64 {
    let mut score = 0.0;
    for ((req, imp), (mi, dep)) in requirements
        .components()
        .into_iter()
        .zip(attack_impact.components())
        .zip(
            mitigation_impact
                .components()
                .into_iter()
                .zip(dependency.components()),
        )
    {
        score += (1.0 - req * imp) * mi * dep;
    }
    score
}

/// Computes the cost of responding to a violation of `vt` with `chain`.
///
/// The accumulation walks the workflow segment re-entered by the response:
/// tasks between the previous violation's successors and `vt`'s
/// predecessors replay their recorded adaptation, or their default
/// execution when none exists. Chain steps on `vt` and its predecessors
/// then add their own attributes; if the chain leaves `vt` untouched, the
/// task falls back to its recorded adaptation or default execution. The
/// first violation of an instance replays from the workflow start.
///
/// Steps on tasks after `vt` are deliberately not accumulated: their costs
/// materialize only when execution reaches them.
pub fn chain_cost(
    ctx: &ChainContext,
    weights: &Weights,
    constraints: &[ChainConstraint],
    history: &AdaptationHistory,
    vt: &TaskId,
    chain: &AdaptationChain,
) -> Result<CostBreakdown> {
    let history_pairs = history.step_pairs();
    if constraints.iter().any(|r| r.matches(chain, &history_pairs)) {
        return Ok(CostBreakdown::forbidden());
    }

    let pred_vt = ctx.workflow.predecessors(vt)?;
    let segment: BTreeSet<TaskId> = match history.previous_vt() {
        Some(prev) => {
            let succ_prev = ctx.workflow.successors(prev)?;
            pred_vt.intersection(&succ_prev).cloned().collect()
        }
        None => pred_vt.clone(),
    };

    let mut acc = CostBreakdown::ZERO;
    let default_of = |t: &TaskId| -> Result<(f64, f64, f64)> {
        let costs = ctx.bindings.get(t).ok_or_else(|| Error::Binding {
            task: t.as_str().to_string(),
            reason: "no service bound".into(),
        })?;
        let value = ctx.workflow.task(t)?.value;
        Ok((costs.primary.price, costs.primary.time, value))
    };

    // Replay of the segment already executed before the violation surfaced.
    for t in &segment {
        if let Some(step) = history.last_action_for(t) {
            acc.add(step.resolved.price, step.resolved.time, step.resolved.value, step.ms);
        } else {
            let (p, time, v) = default_of(t)?;
            acc.add(p, time, v, 0.0);
        }
    }

    // The chain's own contribution over the violated task and everything
    // before it.
    let mut vt_covered = false;
    for step in &chain.steps {
        if &step.task == vt {
            vt_covered = true;
        }
        if &step.task == vt || pred_vt.contains(&step.task) {
            acc.add(step.resolved.price, step.resolved.time, step.resolved.value, step.ms);
        }
    }
    if !vt_covered {
        if let Some(step) = history.last_action_for(vt) {
            acc.add(step.resolved.price, step.resolved.time, step.resolved.value, step.ms);
        } else {
            let (p, time, v) = default_of(vt)?;
            acc.add(p, time, v, 0.0);
        }
    }

    Ok(acc.finish(weights))
}

/// Costs every candidate chain. Returns breakdowns in candidate order plus
/// the effective totals used for ranking; with `normalize` set, each
/// attribute is min-max scaled over the candidate set before weighting
/// (constraint-violating chains keep an infinite total either way).
pub fn score_chains(
    ctx: &ChainContext,
    weights: &Weights,
    constraints: &[ChainConstraint],
    history: &AdaptationHistory,
    vt: &TaskId,
    candidates: &[AdaptationChain],
    normalize: bool,
) -> Result<(Vec<CostBreakdown>, Vec<f64>)> {
    let breakdowns: Vec<CostBreakdown> = candidates
        .iter()
        .map(|c| chain_cost(ctx, weights, constraints, history, vt, c))
        .collect::<Result<_>>()?;
    if !normalize {
        let totals = breakdowns.iter().map(|b| b.total).collect();
        return Ok((breakdowns, totals));
    }

    let finite: Vec<&CostBreakdown> =
        breakdowns.iter().filter(|b| b.total.is_finite()).collect();
    let span = |f: fn(&CostBreakdown) -> f64| -> (f64, f64) {
        let lo = finite.iter().map(|b| f(b)).fold(f64::INFINITY, f64::min);
        let hi = finite.iter().map(|b| f(b)).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let spans = [
        span(|b| b.price),
        span(|b| b.time),
        span(|b| b.value),
        span(|b| b.mitigation),
    ];
    let scale = |v: f64, (lo, hi): (f64, f64)| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
    let totals = breakdowns
        .iter()
        .map(|b| {
            if !b.total.is_finite() {
                b.total
            } else {
                weights.total(
                    scale(b.price, spans[0]),
                    scale(b.time, spans[1]),
                    scale(b.value, spans[2]),
                    scale(b.mitigation, spans[3]),
                )
            }
        })
        .collect();
    Ok((breakdowns, totals))
}

/// Index of the cheapest candidate under the given totals; ties fall to the
/// canonically smaller chain.
pub fn best_candidate(candidates: &[AdaptationChain], totals: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (n, total) in totals.iter().enumerate() {
        match best {
            None => best = Some(n),
            Some(b) => {
                let ord = total.total_cmp(&totals[b]).then_with(|| {
                    candidates[n].canonical_cmp(&candidates[b])
                });
                if ord == std::cmp::Ordering::Less {
                    best = Some(n);
                }
            }
        }
    }
    best
}

/// Exhaustive search over a complete resolved chain set. Refuses truncated
/// sets, since the minimum over a partial enumeration proves nothing.
pub fn optimal_chain_exhaustive(
    ctx: &ChainContext,
    weights: &Weights,
    constraints: &[ChainConstraint],
    history: &AdaptationHistory,
    vt: &TaskId,
    set: &ChainSet,
    normalize: bool,
) -> Result<(AdaptationChain, CostBreakdown)> {
    if set.truncated {
        return Err(Error::TruncatedChainSet);
    }
    if set.chains.is_empty() {
        return Err(Error::NoFeasibleChain { task: vt.as_str().to_string() });
    }
    let (breakdowns, totals) =
        score_chains(ctx, weights, constraints, history, vt, &set.chains, normalize)?;
    let best = best_candidate(&set.chains, &totals).expect("non-empty set has a minimum");
    Ok((set.chains[best].clone(), breakdowns[best]))
}
