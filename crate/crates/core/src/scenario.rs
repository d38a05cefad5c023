//! Scenario documents: the multi-cloud environment a workflow runs in.
//!
//! A scenario bundles a workflow with the service market it executes on —
//! providers, their services (price, time, security levels, attack
//! frequencies), per-task candidate services, tenants with their weight
//! preferences, and optional adaptation constraints. Scenarios are plain
//! JSON files; [`generate`] produces seeded random ones for experiments.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{ActionType, AdaptationParams, AttackType, Severity};
use crate::chain::ChainConstraint;
use crate::cia::Cia;
use crate::error::{Error, Result};
use crate::workflow::{parse_workflow, ControlEdge, DataEdge, DataItem, TaskId, TaskSpec, Workflow};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provider {
    pub id: String,
}

/// One bookable cloud service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudService {
    pub id: String,
    pub provider: String,
    /// Execution time per task, seconds.
    pub time: f64,
    /// Price per task execution.
    pub price: f64,
    pub c: f64,
    pub i: f64,
    pub a: f64,
    /// Attack frequency rate per attack type, each in [0,1], summing to ≤ 1.
    #[serde(default)]
    pub afr: BTreeMap<AttackType, f64>,
}

impl CloudService {
    pub fn security(&self) -> Cia {
        Cia::new(self.c, self.i, self.a)
    }

    pub fn afr_sum(&self) -> f64 {
        self.afr.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tenant {
    pub id: String,
    /// Workflow ids this tenant owns.
    pub workflows: Vec<String>,
    /// Weight magnitudes in the order price, time, value, mitigation.
    pub weights: [f64; 4],
    /// Violations whose severity band falls below this are logged only.
    pub adapt_trigger_threshold: Severity,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub workflow: Workflow,
    pub providers: Vec<Provider>,
    pub services: Vec<CloudService>,
    /// Candidate service ids per task; every task needs at least one.
    pub candidates: BTreeMap<TaskId, Vec<String>>,
    pub tenants: Vec<Tenant>,
    pub constraints: Vec<ChainConstraint>,
    pub params: AdaptationParams,
}

#[derive(Serialize, Deserialize)]
struct ScenarioDoc {
    id: String,
    /// Inline workflow document, or a string path relative to the scenario
    /// file.
    workflow: serde_json::Value,
    providers: Vec<Provider>,
    services: Vec<CloudService>,
    candidates: BTreeMap<String, Vec<String>>,
    tenants: Vec<Tenant>,
    #[serde(default)]
    constraints: Vec<ChainConstraint>,
    #[serde(default)]
    adaptation_params: AdaptationParams,
}

impl Scenario {
    /// Parses a scenario document. `base` resolves a workflow given as a
    /// relative path.
    pub fn from_json(text: &str, base: Option<&Path>) -> Result<Scenario> {
        let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: format!("scenario:{}:{}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let workflow = match &doc.workflow {
            serde_json::Value::String(p) => {
                let path = match base {
                    Some(dir) => dir.join(p),
                    None => p.into(),
                };
                parse_workflow(&std::fs::read_to_string(&path)?)?
            }
            inline => parse_workflow(&inline.to_string())?,
        };
        let scenario = Scenario {
            id: doc.id,
            workflow,
            providers: doc.providers,
            services: doc.services,
            candidates: doc
                .candidates
                .into_iter()
                .map(|(t, s)| (TaskId(t), s))
                .collect(),
            tenants: doc.tenants,
            constraints: doc.constraints,
            params: doc.adaptation_params,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        Scenario::from_json(&std::fs::read_to_string(path)?, path.parent())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ScenarioDoc {
            id: self.id.clone(),
            workflow: serde_json::from_str(&self.workflow.to_json()?)?,
            providers: self.providers.clone(),
            services: self.services.clone(),
            candidates: self
                .candidates
                .iter()
                .map(|(t, s)| (t.as_str().to_string(), s.clone()))
                .collect(),
            tenants: self.tenants.clone(),
            constraints: self.constraints.clone(),
            adaptation_params: self.params.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn service(&self, id: &str) -> Result<&CloudService> {
        self.services
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::Validation(format!("unknown service {id}")))
    }

    /// The tenant whose preferences drive execution; scenarios must define
    /// at least one.
    pub fn primary_tenant(&self) -> &Tenant {
        &self.tenants[0]
    }

    pub fn validate(&self) -> Result<()> {
        if self.tenants.is_empty() {
            return Err(Error::Validation("scenario defines no tenants".into()));
        }
        let provider_ids: Vec<&str> = self.providers.iter().map(|p| p.id.as_str()).collect();
        let mut service_ids = BTreeMap::new();
        for s in &self.services {
            if service_ids.insert(s.id.as_str(), ()).is_some() {
                return Err(Error::Validation(format!("duplicate service id {}", s.id)));
            }
            if !provider_ids.contains(&s.provider.as_str()) {
                return Err(Error::Validation(format!(
                    "service {} names unknown provider {}",
                    s.id, s.provider
                )));
            }
            if !s.time.is_finite() || s.time < 0.0 || !s.price.is_finite() || s.price < 0.0 {
                return Err(Error::Validation(format!(
                    "service {} has negative or non-finite time/price",
                    s.id
                )));
            }
            if !s.security().in_unit_range() {
                return Err(Error::Validation(format!(
                    "service {} security levels outside [0,1]",
                    s.id
                )));
            }
            let mut sum = 0.0;
            for (k, r) in &s.afr {
                if !r.is_finite() || !(0.0..=1.0).contains(r) {
                    return Err(Error::Validation(format!(
                        "service {} attack rate for {k} outside [0,1]",
                        s.id
                    )));
                }
                sum += r;
            }
            if sum > 1.0 + 1e-9 {
                return Err(Error::Validation(format!(
                    "service {} attack rates sum to {sum} > 1",
                    s.id
                )));
            }
        }
        for t in self.workflow.tasks() {
            let cands = self
                .candidates
                .get(&t.id)
                .filter(|c| !c.is_empty())
                .ok_or_else(|| Error::Binding {
                    task: t.id.as_str().to_string(),
                    reason: "no candidate services".into(),
                })?;
            for c in cands {
                if !service_ids.contains_key(c.as_str()) {
                    return Err(Error::Validation(format!(
                        "task {} lists unknown candidate service {c}",
                        t.id
                    )));
                }
            }
        }
        for (t, _) in &self.candidates {
            if !self.workflow.contains(t) {
                return Err(Error::Validation(format!(
                    "candidates entry for unknown task {t}"
                )));
            }
        }
        for tenant in &self.tenants {
            if tenant.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(Error::Validation(format!(
                    "tenant {} has negative or non-finite weights",
                    tenant.id
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Seeded generation
// ---------------------------------------------------------------------------

const TIME_RANGE: (f64, f64) = (1.0, 50.0);
const PRICE_RANGE: (f64, f64) = (0.1, 10.0);
/// "Roughly three times" faster/more expensive, read as ±0.5.
const TIER_RATIO: (f64, f64) = (2.5, 3.5);
const VALUE_RANGE: (f64, f64) = (5.0, 25.0);
/// Fraction of control edges mirrored by a data edge.
const DATA_MIRROR: f64 = 0.6;

/// Generates a seeded random scenario: a layered DAG of `n_tasks`, a market
/// of `n_providers`×`n_services` tiered services, and one tenant with
/// uniform weights. Each task's candidates are one provider's full tier
/// triple, so the fast/slow spread is visible per task.
pub fn generate(
    n_tasks: usize,
    n_providers: usize,
    n_services: usize,
    seed: u64,
) -> Result<Scenario> {
    if n_tasks < 2 {
        return Err(Error::Config(format!("need at least 2 tasks, got {n_tasks}")));
    }
    if n_providers == 0 || n_services == 0 {
        return Err(Error::Config("need at least one provider and one service tier".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let workflow = generate_workflow(n_tasks, seed, &mut rng)?;
    let (providers, services) = generate_market(n_providers, n_services, &mut rng);

    let candidates = workflow
        .tasks()
        .iter()
        .map(|t| {
            let p = rng.gen_range(0..n_providers);
            let ids = services
                .iter()
                .filter(|s| s.provider == providers[p].id)
                .map(|s| s.id.clone())
                .collect();
            (t.id.clone(), ids)
        })
        .collect();

    let tenant = Tenant {
        id: "tenant-1".into(),
        workflows: vec![workflow.id().to_string()],
        weights: [1.0, 1.0, 1.0, 1.0],
        adapt_trigger_threshold: Severity::Low,
    };

    let scenario = Scenario {
        id: format!("scenario-{seed}-{n_tasks}"),
        workflow,
        providers,
        services,
        candidates,
        tenants: vec![tenant],
        constraints: Vec::new(),
        params: AdaptationParams::default(),
    };
    scenario.validate()?;
    Ok(scenario)
}

fn task_id(n: usize, width: usize) -> TaskId {
    TaskId(format!("t{:0width$}", n + 1))
}

fn generate_workflow(n_tasks: usize, seed: u64, rng: &mut ChaCha8Rng) -> Result<Workflow> {
    let width = if n_tasks >= 10 { n_tasks.to_string().len() } else { 1 };
    let n_layers = (n_tasks as f64).sqrt().ceil() as usize;
    // Nearly equal layer sizes, remainder spread over the first layers.
    let base = n_tasks / n_layers;
    let extra = n_tasks % n_layers;
    let mut layers: Vec<Vec<usize>> = Vec::with_capacity(n_layers);
    let mut next = 0usize;
    for l in 0..n_layers {
        let size = base + usize::from(l < extra);
        layers.push((next..next + size).collect());
        next += size;
    }

    let mut tasks = Vec::with_capacity(n_tasks);
    for n in 0..n_tasks {
        let reqs = Cia::new(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
        let value = rng.gen_range(VALUE_RANGE.0..=VALUE_RANGE.1);
        let k = rng.gen_range(1..=3usize);
        let mut actions = std::collections::BTreeSet::new();
        while actions.len() < k {
            let pick = ActionType::ALL[rng.gen_range(0..ActionType::ALL.len())];
            actions.insert(pick);
        }
        tasks.push(TaskSpec { id: task_id(n, width), requirements: reqs, value, feasible_actions: actions });
    }

    let mut control_edges = Vec::new();
    for l in 1..n_layers {
        for &n in &layers[l] {
            let preds = rng.gen_range(1..=2usize.min(layers[l - 1].len()));
            let mut chosen = std::collections::BTreeSet::new();
            while chosen.len() < preds {
                chosen.insert(layers[l - 1][rng.gen_range(0..layers[l - 1].len())]);
            }
            for p in chosen {
                control_edges.push(ControlEdge {
                    src: task_id(p, width),
                    dst: task_id(n, width),
                    guard: None,
                });
            }
        }
    }

    let mut data_items = Vec::new();
    let mut data_edges = Vec::new();
    for e in &control_edges {
        if rng.gen_bool(DATA_MIRROR) {
            let id = format!("d{}", data_items.len() + 1);
            data_items.push(DataItem { id: id.clone(), label: id.clone() });
            data_edges.push(DataEdge { src: e.src.clone(), dst: e.dst.clone(), item: id });
        }
    }

    Workflow::new(format!("wf-{seed}-{n_tasks}"), tasks, data_items, control_edges, data_edges)
}

fn generate_market(
    n_providers: usize,
    n_services: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<Provider>, Vec<CloudService>) {
    let providers: Vec<Provider> =
        (0..n_providers).map(|p| Provider { id: format!("p{}", p + 1) }).collect();
    let mut services = Vec::with_capacity(n_providers * n_services);
    for p in &providers {
        let ratio_t = rng.gen_range(TIER_RATIO.0..=TIER_RATIO.1);
        let ratio_p = rng.gen_range(TIER_RATIO.0..=TIER_RATIO.1);
        let t_fast = rng.gen_range(TIME_RANGE.0..=TIME_RANGE.1 / ratio_t);
        let p_cheap = rng.gen_range(PRICE_RANGE.0..=PRICE_RANGE.1 / ratio_p);
        for n in 0..n_services {
            // Tiers interpolate geometrically from fastest to slowest; price
            // runs the opposite way so fast = expensive.
            let frac = if n_services == 1 { 0.0 } else { n as f64 / (n_services - 1) as f64 };
            let time = t_fast * ratio_t.powf(frac);
            let price = p_cheap * ratio_p.powf(1.0 - frac);
            let mut afr = BTreeMap::new();
            let mut sum = 0.0;
            let mut draws = Vec::new();
            for attack in [AttackType::dos(), AttackType::probe(), AttackType::u2r(), AttackType::r2l()] {
                let r: f64 = rng.gen_range(0.0..=1.0);
                sum += r;
                draws.push((attack, r));
            }
            let norm = sum.max(1.0);
            for (attack, r) in draws {
                afr.insert(attack, r / norm);
            }
            services.push(CloudService {
                id: format!("{}-s{}", p.id, n + 1),
                provider: p.id.clone(),
                time,
                price,
                c: rng.gen_range(0.0..=1.0),
                i: rng.gen_range(0.0..=1.0),
                a: rng.gen_range(0.0..=1.0),
                afr,
            });
        }
    }
    (providers, services)
}
