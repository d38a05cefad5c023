//! Attack and adaptation catalog.
//!
//! The catalog is data, not code: it maps attack types to impact factors and
//! per-severity mitigation action sets, and adaptation actions to their
//! mitigation-impact factors. A default catalog covering DoS, Probe, U2R and
//! R2L ships with the crate (`data/default_catalog.json`); deployments can
//! load a replacement file to add attack types without rebuilding.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cia::Cia;
use crate::error::{Error, Result};
use crate::workflow::TaskSpec;

/// Attack severity band. Raw detector scores in `[0, 1]` are discretized
/// into thirds: `[0, 1/3)`, `[1/3, 2/3)`, `[2/3, 1]`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Severity {
    Low,
    Medium,
    High,
}

impl Severity {
    pub const ALL: [Severity; 3] = [Severity::Low, Severity::Medium, Severity::High];

    pub fn from_score(score: f64) -> Severity {
        if score < 1.0 / 3.0 {
            Severity::Low
        } else if score < 2.0 / 3.0 {
            Severity::Medium
        } else {
            Severity::High
        }
    }
}

impl std::fmt::Display for Severity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Severity::Low => "Low",
            Severity::Medium => "Medium",
            Severity::High => "High",
        })
    }
}

impl FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Severity::Low),
            "medium" => Ok(Severity::Medium),
            "high" => Ok(Severity::High),
            other => Err(format!("unknown severity: {other}")),
        }
    }
}

/// Attack type. Open-ended so catalog files can introduce new types; the
/// built-in catalog covers `DoS`, `Probe`, `U2R` and `R2L`.
#[derive(
    Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct AttackType(pub String);

impl AttackType {
    pub fn new(name: impl Into<String>) -> Self {
        AttackType(name.into())
    }

    pub fn dos() -> Self {
        AttackType::new("DoS")
    }

    pub fn probe() -> Self {
        AttackType::new("Probe")
    }

    pub fn u2r() -> Self {
        AttackType::new("U2R")
    }

    pub fn r2l() -> Self {
        AttackType::new("R2L")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for AttackType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// The closed set of adaptation action types understood by the cost and
/// execution engines. Declaration order doubles as the canonical action
/// order used for deterministic tie-breaking.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum ActionType {
    Insert,
    Switch,
    Skip,
    Rework,
    Redundancy,
    Reconfiguration,
}

impl ActionType {
    pub const ALL: [ActionType; 6] = [
        ActionType::Insert,
        ActionType::Switch,
        ActionType::Skip,
        ActionType::Rework,
        ActionType::Redundancy,
        ActionType::Reconfiguration,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ActionType::Insert => "Insert",
            ActionType::Switch => "Switch",
            ActionType::Skip => "Skip",
            ActionType::Rework => "Rework",
            ActionType::Redundancy => "Redundancy",
            ActionType::Reconfiguration => "Reconfiguration",
        }
    }
}

impl std::fmt::Display for ActionType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActionType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "Insert" => Ok(ActionType::Insert),
            "Switch" => Ok(ActionType::Switch),
            "Skip" => Ok(ActionType::Skip),
            "Rework" => Ok(ActionType::Rework),
            "Redundancy" => Ok(ActionType::Redundancy),
            // Mixed-case spelling seen in the wild.
            "Reconfiguration" | "ReConfiguration" => Ok(ActionType::Reconfiguration),
            other => Err(format!("unknown action type: {other}")),
        }
    }
}

/// Catalog entry for one attack type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub attack: AttackType,
    /// Fractional degradation an attack of this type causes per objective.
    pub impact: Cia,
    /// Actions considered effective per severity band.
    pub mitigation: BTreeMap<Severity, BTreeSet<ActionType>>,
}

/// An adaptation action resolved against a concrete task and its service
/// binding: the time/price/value it contributes plus its mitigation-impact
/// factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationActionSpec {
    pub action: ActionType,
    pub time: f64,
    pub price: f64,
    pub value: f64,
    pub mi: Cia,
}

/// Time and price of one concrete service binding, the inputs the action
/// formulas draw from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceCost {
    pub time: f64,
    pub price: f64,
}

/// Free parameters of the action formulas. All are multipliers against the
/// bound service's time/price or the task's value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptationParams {
    pub insert_time_factor: f64,
    pub insert_price_factor: f64,
    pub insert_value_factor: f64,
    pub switch_time_factor: f64,
    pub switch_value_factor: f64,
    pub reconfig_time_factor: f64,
    pub reconfig_price_factor: f64,
    pub reconfig_value_factor: f64,
    pub redundancy_value_factor: f64,
}

impl Default for AdaptationParams {
    fn default() -> Self {
        AdaptationParams {
            insert_time_factor: 1.0,
            insert_price_factor: 1.0,
            insert_value_factor: 1.0,
            switch_time_factor: 1.1,
            switch_value_factor: 1.0,
            reconfig_time_factor: 0.3,
            reconfig_price_factor: 0.3,
            reconfig_value_factor: 0.1,
            redundancy_value_factor: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ActionEntry {
    action: ActionType,
    mi: Cia,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CatalogDoc {
    attacks: Vec<AttackSpec>,
    actions: Vec<ActionEntry>,
}

/// Loaded attack/action catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    attacks: BTreeMap<AttackType, AttackSpec>,
    attack_order: Vec<AttackType>,
    mi: BTreeMap<ActionType, Cia>,
}

const DEFAULT_CATALOG: &str = include_str!("../data/default_catalog.json");

impl Catalog {
    /// The catalog shipped with the crate.
    pub fn builtin() -> Catalog {
        Catalog::from_json(DEFAULT_CATALOG).expect("built-in catalog must load")
    }

    pub fn from_json(text: &str) -> Result<Catalog> {
        let doc: CatalogDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: format!("catalog:{}:{}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let mut mi = BTreeMap::new();
        for entry in &doc.actions {
            if !entry.mi.in_unit_range() {
                return Err(Error::Validation(format!(
                    "mitigation impact {} of action {} outside [0, 1]",
                    entry.mi, entry.action
                )));
            }
            if mi.insert(entry.action, entry.mi).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate action entry {}",
                    entry.action
                )));
            }
        }
        for action in ActionType::ALL {
            if !mi.contains_key(&action) {
                return Err(Error::Validation(format!(
                    "catalog is missing mitigation impact for action {action}"
                )));
            }
        }
        let mut attacks = BTreeMap::new();
        let mut attack_order = Vec::new();
        for spec in doc.attacks {
            if !spec.impact.in_unit_range() {
                return Err(Error::Validation(format!(
                    "impact {} of attack {} outside [0, 1]",
                    spec.impact, spec.attack
                )));
            }
            for sev in Severity::ALL {
                if !spec.mitigation.contains_key(&sev) {
                    return Err(Error::Validation(format!(
                        "attack {} has no mitigation set for severity {sev}",
                        spec.attack
                    )));
                }
            }
            attack_order.push(spec.attack.clone());
            if attacks.insert(spec.attack.clone(), spec).is_some() {
                let dup = attack_order.last().unwrap().clone();
                return Err(Error::Validation(format!("duplicate attack entry {dup}")));
            }
        }
        if attacks.is_empty() {
            return Err(Error::Validation("catalog defines no attacks".into()));
        }
        Ok(Catalog { attacks, attack_order, mi })
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = CatalogDoc {
            attacks: self
                .attack_order
                .iter()
                .map(|a| self.attacks[a].clone())
                .collect(),
            actions: self
                .mi
                .iter()
                .map(|(&action, &mi)| ActionEntry { action, mi })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Attack types in catalog file order.
    pub fn attack_types(&self) -> &[AttackType] {
        &self.attack_order
    }

    pub fn attack(&self, attack: &AttackType) -> Result<&AttackSpec> {
        self.attacks
            .get(attack)
            .ok_or_else(|| Error::UnknownAttack(attack.0.clone()))
    }

    /// Per-objective impact factors of an attack type.
    pub fn attack_impact(&self, attack: &AttackType) -> Result<Cia> {
        Ok(self.attack(attack)?.impact)
    }

    /// Mitigation action set for an attack at a severity band.
    pub fn mitigation_actions_for(
        &self,
        attack: &AttackType,
        severity: Severity,
    ) -> Result<&BTreeSet<ActionType>> {
        Ok(&self.attack(attack)?.mitigation[&severity])
    }

    /// Mitigation impact factors of an action type.
    pub fn mitigation_impact(&self, action: ActionType) -> Cia {
        self.mi[&action]
    }

    /// Resolves an action against a task and its service binding, yielding
    /// the concrete time/price/value the action contributes.
    ///
    /// `primary` is the bound service, `backup` the designated fallback
    /// (used by rework and redundancy). The caller is responsible for
    /// checking feasibility against the task's action set when the action
    /// is deliberate; incidental rework of already-completed tasks is
    /// resolved regardless.
    pub fn adaptation_properties(
        &self,
        params: &AdaptationParams,
        task: &TaskSpec,
        action: ActionType,
        primary: ServiceCost,
        backup: ServiceCost,
    ) -> AdaptationActionSpec {
        let v = task.value;
        let (time, price, value) = match action {
            ActionType::Insert => (
                primary.time * params.insert_time_factor,
                primary.price * params.insert_price_factor,
                v * params.insert_value_factor,
            ),
            ActionType::Switch => (
                primary.time * params.switch_time_factor,
                primary.price,
                v * params.switch_value_factor,
            ),
            ActionType::Skip => (0.0, 0.0, 0.0),
            ActionType::Rework => (backup.time, backup.price, v),
            ActionType::Redundancy => (
                primary.time.max(backup.time),
                primary.price + backup.price,
                v + v * params.redundancy_value_factor,
            ),
            ActionType::Reconfiguration => (
                primary.time + primary.time * params.reconfig_time_factor,
                primary.price + primary.price * params.reconfig_price_factor,
                v + v * params.reconfig_value_factor,
            ),
        };
        AdaptationActionSpec { action, time, price, value, mi: self.mi[&action] }
    }
}
