//! A ready-made insurance-claim workflow and scenario.
//!
//! The eight-task claim process (receive → assess/appraise in parallel →
//! settle → pay, with a fraud check feeding the notification step) is small
//! enough to reason about by hand and is used throughout the tests and docs.

use std::collections::{BTreeMap, BTreeSet};

use crate::catalog::{ActionType, AdaptationParams, AttackType, Severity};
use crate::cia::Cia;
use crate::scenario::{CloudService, Provider, Scenario, Tenant};
use crate::workflow::{ControlEdge, DataEdge, DataItem, TaskId, TaskSpec, Workflow};

fn actions(list: &[ActionType]) -> BTreeSet<ActionType> {
    list.iter().copied().collect()
}

fn edge(src: &str, dst: &str) -> ControlEdge {
    ControlEdge {
        src: TaskId::from(src),
        dst: TaskId::from(dst),
        guard: None,
    }
}

fn data(src: &str, dst: &str, item: &str) -> DataEdge {
    DataEdge {
        src: TaskId::from(src),
        dst: TaskId::from(dst),
        item: item.to_owned(),
    }
}

/// Eight tasks: t1 receive claim, t2 fraud check, t3 damage assessment,
/// t4 cost appraisal, t5 settlement decision, t6 payment order,
/// t7 customer notification, t8 archive.
pub fn insurance_workflow() -> Workflow {
    use ActionType::*;
    let reqs = [
        (0.9, 1.0, 0.8),
        (0.6, 0.8, 0.7),
        (0.5, 1.0, 1.0),
        (0.7, 1.0, 0.5),
        (0.5, 1.0, 1.0),
        (1.0, 1.0, 1.0),
        (0.3, 0.0, 0.6),
        (0.4, 0.1, 0.5),
    ];
    let values = [10.0, 5.0, 15.0, 15.0, 25.0, 20.0, 5.0, 5.0];
    let feasible: [&[ActionType]; 8] = [
        &[Insert, Rework, Switch],
        &[Switch, Skip, Rework],
        &[Insert, Rework, Reconfiguration, Skip],
        &[Insert, Rework, Reconfiguration],
        &[Insert, Rework, Reconfiguration, Redundancy],
        &[Insert, Rework, Reconfiguration],
        &[Skip, Switch],
        &[Insert, Rework, Reconfiguration],
    ];
    let tasks = (0..8)
        .map(|n| TaskSpec {
            id: TaskId::from(format!("t{}", n + 1).as_str()),
            requirements: Cia::new(reqs[n].0, reqs[n].1, reqs[n].2),
            value: values[n],
            feasible_actions: actions(feasible[n]),
        })
        .collect();
    let data_items = vec![
        DataItem { id: "d2".into(), label: "damage assessment".into() },
        DataItem { id: "d3".into(), label: "cost appraisal".into() },
        DataItem { id: "d4".into(), label: "settlement decision".into() },
    ];
    let control_edges = vec![
        edge("t1", "t2"),
        edge("t1", "t3"),
        edge("t1", "t4"),
        edge("t3", "t5"),
        edge("t4", "t5"),
        edge("t5", "t6"),
        edge("t6", "t7"),
        edge("t6", "t8"),
        edge("t2", "t7"),
    ];
    let data_edges = vec![
        data("t3", "t5", "d2"),
        data("t4", "t5", "d3"),
        data("t5", "t6", "d4"),
    ];
    Workflow::new(
        "insurance-claim".into(),
        tasks,
        data_items,
        control_edges,
        data_edges,
    )
    .expect("the built-in workflow is valid")
}

/// The workflow above embedded in a three-service market with one tenant.
pub fn insurance_scenario() -> Scenario {
    let workflow = insurance_workflow();
    let providers = vec![
        Provider { id: "p-alpha".into() },
        Provider { id: "p-beta".into() },
    ];
    let services = vec![
        CloudService {
            id: "svc-basic".into(),
            provider: "p-alpha".into(),
            time: 8.0,
            price: 1.0,
            c: 0.8,
            i: 0.8,
            a: 0.8,
            afr: BTreeMap::from([(AttackType::dos(), 0.15), (AttackType::probe(), 0.1)]),
        },
        CloudService {
            id: "svc-fast".into(),
            provider: "p-alpha".into(),
            time: 3.0,
            price: 4.0,
            c: 0.85,
            i: 0.9,
            a: 0.9,
            afr: BTreeMap::from([
                (AttackType::dos(), 0.08),
                (AttackType::probe(), 0.06),
                (AttackType::u2r(), 0.04),
                (AttackType::r2l(), 0.05),
            ]),
        },
        CloudService {
            id: "svc-secure".into(),
            provider: "p-beta".into(),
            time: 6.0,
            price: 2.5,
            c: 0.95,
            i: 0.95,
            a: 0.9,
            afr: BTreeMap::from([(AttackType::u2r(), 0.05), (AttackType::r2l(), 0.04)]),
        },
    ];
    let all: Vec<String> = services.iter().map(|s| s.id.clone()).collect();
    let candidates = workflow
        .tasks()
        .iter()
        .map(|t| (t.id.clone(), all.clone()))
        .collect();
    let tenants = vec![Tenant {
        id: "tenant-1".into(),
        workflows: vec![workflow.id().to_owned()],
        weights: [1.0, 1.0, 1.0, 1.0],
        adapt_trigger_threshold: Severity::Low,
    }];
    Scenario {
        id: "insurance-demo".into(),
        workflow,
        providers,
        services,
        candidates,
        tenants,
        constraints: Vec::new(),
        params: AdaptationParams::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdm::{compute_sdm, dependent_tasks};

    #[test]
    fn workflow_validates_and_has_expected_shape() {
        let w = insurance_workflow();
        assert_eq!(w.tasks().len(), 8);
        assert_eq!(w.topo_order()[0].as_str(), "t1");
        let dfcs = w.data_flow_closure(&TaskId::from("t3")).unwrap();
        let names: Vec<&str> = dfcs.iter().map(|t| t.as_str()).collect();
        assert_eq!(names, ["t5", "t6"]);
    }

    #[test]
    fn settlement_dependencies_cover_both_branches() {
        let w = insurance_workflow();
        let sdm = compute_sdm(&w);
        let dt = dependent_tasks(&sdm, &TaskId::from("t5")).unwrap();
        let names: Vec<&str> = dt.iter().map(|t| t.as_str()).collect();
        assert_eq!(names, ["t3", "t4", "t5", "t6", "t8"]);
    }

    #[test]
    fn scenario_passes_validation() {
        let s = insurance_scenario();
        s.validate().unwrap();
        assert_eq!(s.primary_tenant().id, "tenant-1");
    }
}
