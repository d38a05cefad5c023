//! Security-driven adaptation chains for cloud workflows.
//!
//! The crate models a tenant workflow as a task DAG with per-task
//! confidentiality/integrity/availability requirements, derives a security
//! dependency matrix from its data and control flows, and — when a deployed
//! service reports a violation — enumerates, prices and ranks *chains* of
//! adaptation actions across the dependent tasks. A tabular Q-learner can
//! be trained against the bundled cloud simulator to pick chains online;
//! the harness compares response strategies over paired violation
//! schedules and exports the resulting metrics.
//!
//! Modules, in pipeline order:
//!
//! * [`workflow`] — task DAG parsing, validation and flow closures.
//! * [`sdm`] — the security dependency matrix and dependent-task sets.
//! * [`catalog`] — attack impacts and adaptation-action properties.
//! * [`chain`] — chain enumeration, expansion and constraints.
//! * [`cost`] — mitigation scores and the weighted chain cost.
//! * [`scenario`] — providers, services, tenants and scenario generation.
//! * [`sim`] — violation injection and trace-producing execution.
//! * [`rl`] — Q-learning over violation states.
//! * [`harness`] — paired-seed strategy experiments and exports.
//! * [`demo`] — a hand-sized insurance-claim fixture.

pub mod catalog;
pub mod chain;
pub mod cia;
pub mod cost;
pub mod demo;
pub mod error;
pub mod harness;
pub mod rl;
pub mod scenario;
pub mod sdm;
pub mod sim;
pub mod workflow;

pub use catalog::{ActionType, AttackType, Catalog, Severity};
pub use chain::{AdaptationChain, ChainConstraint, ChainLimits, ChainSet};
pub use cia::Cia;
pub use cost::{chain_cost, CostBreakdown, Weights};
pub use error::{Error, Result};
pub use scenario::Scenario;
pub use sdm::{compute_sdm, dependent_tasks, SecurityDependencyMatrix};
pub use workflow::{parse_workflow, TaskId, Workflow};
