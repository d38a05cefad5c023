//! Workflow model: service tasks with security requirements, control-flow
//! and data-flow edges, and the reachability queries the rest of the crate
//! is built on.
//!
//! A workflow is a DAG over its control edges. Gateway constructs from
//! process notations are expected to be flattened into plain task-to-task
//! edges (optionally carrying a guard label) before or during parsing.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::catalog::ActionType;
use crate::cia::Cia;
use crate::error::{Error, Result};

/// Identifier of a task inside one workflow.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub String);

impl TaskId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for TaskId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TaskId {
    fn from(s: &str) -> Self {
        TaskId(s.to_string())
    }
}

/// One service task and its per-task security profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: TaskId,
    /// Confidentiality, integrity and availability requirements, each in [0, 1].
    pub requirements: Cia,
    /// Business value produced by a successful execution of the task.
    pub value: f64,
    /// Adaptation actions this task supports.
    pub feasible_actions: BTreeSet<ActionType>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataItem {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlEdge {
    pub src: TaskId,
    pub dst: TaskId,
    /// Guard label carried over from a flattened gateway, if any.
    pub guard: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataEdge {
    pub src: TaskId,
    pub dst: TaskId,
    pub item: String,
}

/// A validated workflow. Construction enforces referential integrity and
/// acyclicity of the control-flow graph.
#[derive(Debug, Clone)]
pub struct Workflow {
    id: String,
    tasks: Vec<TaskSpec>,
    data_items: Vec<DataItem>,
    control_edges: Vec<ControlEdge>,
    data_edges: Vec<DataEdge>,
    index: BTreeMap<TaskId, usize>,
    control_succ: Vec<Vec<usize>>,
    control_pred: Vec<Vec<usize>>,
    data_succ: Vec<Vec<usize>>,
    topo: Vec<usize>,
    topo_pos: Vec<usize>,
}

// ---------------------------------------------------------------------------
// JSON document shape
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct WorkflowDoc {
    id: String,
    tasks: Vec<TaskDoc>,
    #[serde(default)]
    data_items: Vec<DataItemDoc>,
    #[serde(default)]
    control_edges: Vec<Vec<String>>,
    #[serde(default)]
    data_edges: Vec<Vec<String>>,
}

#[derive(Deserialize)]
struct TaskDoc {
    id: String,
    c: f64,
    i: f64,
    a: f64,
    value: f64,
    #[serde(default)]
    actions: Vec<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DataItemDoc {
    Bare(String),
    Full { id: String, label: String },
}

#[derive(Serialize)]
struct WorkflowOut<'a> {
    id: &'a str,
    tasks: Vec<TaskOut<'a>>,
    data_items: &'a [DataItem],
    control_edges: Vec<Vec<&'a str>>,
    data_edges: Vec<[&'a str; 3]>,
}

#[derive(Serialize)]
struct TaskOut<'a> {
    id: &'a str,
    c: f64,
    i: f64,
    a: f64,
    value: f64,
    actions: Vec<String>,
}

/// Parses and validates a workflow document from JSON text.
pub fn parse_workflow(text: &str) -> Result<Workflow> {
    let doc: WorkflowDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: format!("document:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })?;

    let mut tasks = Vec::with_capacity(doc.tasks.len());
    for (n, t) in doc.tasks.iter().enumerate() {
        let reqs = Cia::new(t.c, t.i, t.a);
        if !reqs.in_unit_range() {
            return Err(Error::Parse {
                path: format!("tasks[{n}]"),
                message: format!("requirements {reqs} outside [0, 1]"),
            });
        }
        if !t.value.is_finite() || t.value < 0.0 {
            return Err(Error::Parse {
                path: format!("tasks[{n}].value"),
                message: format!("value {} must be finite and non-negative", t.value),
            });
        }
        let mut actions = BTreeSet::new();
        for (m, a) in t.actions.iter().enumerate() {
            let action: ActionType = a.parse().map_err(|e| Error::Parse {
                path: format!("tasks[{n}].actions[{m}]"),
                message: e,
            })?;
            actions.insert(action);
        }
        tasks.push(TaskSpec {
            id: TaskId(t.id.clone()),
            requirements: reqs,
            value: t.value,
            feasible_actions: actions,
        });
    }

    let data_items = doc
        .data_items
        .into_iter()
        .map(|d| match d {
            DataItemDoc::Bare(id) => DataItem { label: id.clone(), id },
            DataItemDoc::Full { id, label } => DataItem { id, label },
        })
        .collect();

    let mut control_edges = Vec::with_capacity(doc.control_edges.len());
    for (n, e) in doc.control_edges.iter().enumerate() {
        match e.as_slice() {
            [src, dst] => control_edges.push(ControlEdge {
                src: TaskId(src.clone()),
                dst: TaskId(dst.clone()),
                guard: None,
            }),
            [src, dst, guard] => control_edges.push(ControlEdge {
                src: TaskId(src.clone()),
                dst: TaskId(dst.clone()),
                guard: Some(guard.clone()),
            }),
            other => {
                return Err(Error::Parse {
                    path: format!("control_edges[{n}]"),
                    message: format!("expected [src, dst] or [src, dst, guard], got {} elements", other.len()),
                })
            }
        }
    }

    let mut data_edges = Vec::with_capacity(doc.data_edges.len());
    for (n, e) in doc.data_edges.iter().enumerate() {
        match e.as_slice() {
            [src, dst, item] => data_edges.push(DataEdge {
                src: TaskId(src.clone()),
                dst: TaskId(dst.clone()),
                item: item.clone(),
            }),
            other => {
                return Err(Error::Parse {
                    path: format!("data_edges[{n}]"),
                    message: format!("expected [src, dst, data_id], got {} elements", other.len()),
                })
            }
        }
    }

    Workflow::new(doc.id, tasks, data_items, control_edges, data_edges)
}

impl Workflow {
    /// Builds a validated workflow from already-typed parts.
    pub fn new(
        id: String,
        tasks: Vec<TaskSpec>,
        data_items: Vec<DataItem>,
        control_edges: Vec<ControlEdge>,
        data_edges: Vec<DataEdge>,
    ) -> Result<Workflow> {
        if tasks.is_empty() {
            return Err(Error::Validation("workflow has no tasks".into()));
        }
        let mut index = BTreeMap::new();
        for (n, t) in tasks.iter().enumerate() {
            if t.id.as_str().is_empty() {
                return Err(Error::Validation(format!("tasks[{n}] has an empty id")));
            }
            if index.insert(t.id.clone(), n).is_some() {
                return Err(Error::Validation(format!("duplicate task id {}", t.id)));
            }
        }
        let mut item_ids = BTreeSet::new();
        for d in &data_items {
            if !item_ids.insert(d.id.clone()) {
                return Err(Error::Validation(format!("duplicate data item id {}", d.id)));
            }
        }

        let n = tasks.len();
        let mut control_succ = vec![Vec::new(); n];
        let mut control_pred = vec![Vec::new(); n];
        for e in &control_edges {
            let s = *index.get(&e.src).ok_or_else(|| Error::UnknownTask(e.src.0.clone()))?;
            let d = *index.get(&e.dst).ok_or_else(|| Error::UnknownTask(e.dst.0.clone()))?;
            control_succ[s].push(d);
            control_pred[d].push(s);
        }
        let mut data_succ = vec![Vec::new(); n];
        for e in &data_edges {
            let s = *index.get(&e.src).ok_or_else(|| Error::UnknownTask(e.src.0.clone()))?;
            let d = *index.get(&e.dst).ok_or_else(|| Error::UnknownTask(e.dst.0.clone()))?;
            if !item_ids.contains(&e.item) {
                return Err(Error::Validation(format!(
                    "data edge {} -> {} references unknown data item {}",
                    e.src, e.dst, e.item
                )));
            }
            data_succ[s].push(d);
        }
        for adj in [&mut control_succ, &mut control_pred, &mut data_succ] {
            for row in adj.iter_mut() {
                row.sort_unstable();
                row.dedup();
            }
        }

        let topo = toposort(&tasks, &control_succ, &control_pred)?;
        let mut topo_pos = vec![0usize; n];
        for (pos, &t) in topo.iter().enumerate() {
            topo_pos[t] = pos;
        }

        Ok(Workflow {
            id,
            tasks,
            data_items,
            control_edges,
            data_edges,
            index,
            control_succ,
            control_pred,
            data_succ,
            topo,
            topo_pos,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    pub fn data_items(&self) -> &[DataItem] {
        &self.data_items
    }

    pub fn control_edges(&self) -> &[ControlEdge] {
        &self.control_edges
    }

    pub fn data_edges(&self) -> &[DataEdge] {
        &self.data_edges
    }

    pub fn contains(&self, id: &TaskId) -> bool {
        self.index.contains_key(id)
    }

    pub fn task(&self, id: &TaskId) -> Result<&TaskSpec> {
        self.task_index(id).map(|n| &self.tasks[n])
    }

    pub(crate) fn task_index(&self, id: &TaskId) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownTask(id.0.clone()))
    }

    /// Task ids in topological order of the control-flow graph.
    /// Ties are broken by declaration order, so the order is stable.
    pub fn topo_order(&self) -> Vec<TaskId> {
        self.topo.iter().map(|&n| self.tasks[n].id.clone()).collect()
    }

    /// Position of a task in the canonical topological order.
    pub fn topo_position(&self, id: &TaskId) -> Result<usize> {
        Ok(self.topo_pos[self.task_index(id)?])
    }

    fn reach(&self, start: usize, adj: &[Vec<usize>]) -> BTreeSet<TaskId> {
        let mut seen = vec![false; self.tasks.len()];
        let mut queue = VecDeque::from_iter(adj[start].iter().copied());
        let mut out = BTreeSet::new();
        while let Some(v) = queue.pop_front() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if v != start {
                out.insert(self.tasks[v].id.clone());
            }
            queue.extend(adj[v].iter().copied());
        }
        out
    }

    /// Tasks reachable from `t` over data edges, excluding `t` itself.
    pub fn data_flow_closure(&self, t: &TaskId) -> Result<BTreeSet<TaskId>> {
        Ok(self.reach(self.task_index(t)?, &self.data_succ))
    }

    /// Tasks reachable from `t` over control edges, excluding `t` itself.
    pub fn control_flow_closure(&self, t: &TaskId) -> Result<BTreeSet<TaskId>> {
        Ok(self.reach(self.task_index(t)?, &self.control_succ))
    }

    /// Transitive control-flow predecessors of `t`, excluding `t`.
    pub fn predecessors(&self, t: &TaskId) -> Result<BTreeSet<TaskId>> {
        Ok(self.reach(self.task_index(t)?, &self.control_pred))
    }

    /// Transitive control-flow successors of `t`, excluding `t`.
    pub fn successors(&self, t: &TaskId) -> Result<BTreeSet<TaskId>> {
        self.control_flow_closure(t)
    }

    pub(crate) fn control_succ_idx(&self) -> &[Vec<usize>] {
        &self.control_succ
    }

    pub(crate) fn data_succ_idx(&self) -> &[Vec<usize>] {
        &self.data_succ
    }

    /// Serializes the workflow back to its JSON document form.
    pub fn to_json(&self) -> Result<String> {
        let out = WorkflowOut {
            id: &self.id,
            tasks: self
                .tasks
                .iter()
                .map(|t| TaskOut {
                    id: t.id.as_str(),
                    c: t.requirements.c,
                    i: t.requirements.i,
                    a: t.requirements.a,
                    value: t.value,
                    actions: t.feasible_actions.iter().map(|a| a.to_string()).collect(),
                })
                .collect(),
            data_items: &self.data_items,
            control_edges: self
                .control_edges
                .iter()
                .map(|e| {
                    let mut v = vec![e.src.as_str(), e.dst.as_str()];
                    if let Some(g) = &e.guard {
                        v.push(g.as_str());
                    }
                    v
                })
                .collect(),
            data_edges: self
                .data_edges
                .iter()
                .map(|e| [e.src.as_str(), e.dst.as_str(), e.item.as_str()])
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&out)?)
    }
}

/// Kahn's algorithm with declaration-order tie-breaking. On failure returns
/// one concrete cycle found by DFS over the remaining nodes.
fn toposort(tasks: &[TaskSpec], succ: &[Vec<usize>], pred: &[Vec<usize>]) -> Result<Vec<usize>> {
    let n = tasks.len();
    let mut indeg: Vec<usize> = pred.iter().map(Vec::len).collect();
    let mut order = Vec::with_capacity(n);
    let mut ready: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    while let Some(v) = ready.pop_front() {
        order.push(v);
        for &w in &succ[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push_back(w);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // A cycle exists among nodes with remaining in-degree; walk it out.
    let in_cycle: Vec<usize> = (0..n).filter(|&v| indeg[v] > 0).collect();
    let start = in_cycle[0];
    let mut path = vec![start];
    let mut at = start;
    loop {
        let next = succ[at]
            .iter()
            .copied()
            .find(|w| indeg[*w] > 0)
            .expect("cyclic node must have a cyclic successor");
        if let Some(pos) = path.iter().position(|&p| p == next) {
            let mut cycle: Vec<String> =
                path[pos..].iter().map(|&v| tasks[v].id.0.clone()).collect();
            cycle.push(tasks[next].id.0.clone());
            return Err(Error::Cycle { cycle });
        }
        path.push(next);
        at = next;
    }
}
