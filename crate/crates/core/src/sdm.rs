//! Security dependency matrix: quantifies how strongly a security measure
//! applied at one task affects every other task, per confidentiality,
//! integrity and availability.
//!
//! Confidentiality couples tasks connected by data flow in either direction,
//! integrity follows forward data or control flow, availability follows
//! forward data flow only. Each non-zero entry is the product of the
//! corresponding per-task requirement over the union of all tasks lying on
//! any directed path between the two endpoints (endpoints included).

use std::collections::BTreeMap;

use crate::cia::Cia;
use crate::error::Result;
use crate::workflow::{TaskId, Workflow};

#[derive(Debug, Clone, PartialEq)]
pub struct SecurityDependencyMatrix {
    order: Vec<TaskId>,
    index: BTreeMap<TaskId, usize>,
    entries: Vec<Vec<Cia>>,
}

impl SecurityDependencyMatrix {
    /// Task ids in matrix order (workflow declaration order).
    pub fn order(&self) -> &[TaskId] {
        &self.order
    }

    pub fn entry(&self, row: &TaskId, col: &TaskId) -> Option<Cia> {
        let r = *self.index.get(row)?;
        let c = *self.index.get(col)?;
        Some(self.entries[r][c])
    }

    pub fn row(&self, row: &TaskId) -> Option<&[Cia]> {
        self.index.get(row).map(|&r| self.entries[r].as_slice())
    }

    /// CSV rendering: header row/column carry task ids, cells are `c|i|a`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("task");
        for id in &self.order {
            out.push(',');
            out.push_str(id.as_str());
        }
        out.push('\n');
        for (r, id) in self.order.iter().enumerate() {
            out.push_str(id.as_str());
            for cell in &self.entries[r] {
                out.push(',');
                out.push_str(&format!("{}|{}|{}", cell.c, cell.i, cell.a));
            }
            out.push('\n');
        }
        out
    }
}

fn close(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for s in 0..n {
        let mut stack: Vec<usize> = adj[s].to_vec();
        while let Some(v) = stack.pop() {
            if !reach[s][v] {
                reach[s][v] = true;
                stack.extend(adj[v].iter().copied());
            }
        }
    }
    reach
}

/// Product of one requirement component over every task lying on any
/// directed `src -> dst` path, endpoints included. A task `k` is on such a
/// path exactly when `src` reaches `k` and `k` reaches `dst`.
fn path_product(
    vals: &[f64],
    reach: &[Vec<bool>],
    src: usize,
    dst: usize,
) -> f64 {
    let mut p = vals[src] * vals[dst];
    for k in 0..vals.len() {
        if k != src && k != dst && reach[src][k] && reach[k][dst] {
            p *= vals[k];
        }
    }
    p
}

/// Computes the full task-by-task dependency matrix for a workflow.
pub fn compute_sdm(w: &Workflow) -> SecurityDependencyMatrix {
    let n = w.tasks().len();
    let data = close(n, w.data_succ_idx());
    let control = close(n, w.control_succ_idx());
    // Integrity propagates along both relations, so its path products run
    // over the union graph.
    let mut union_adj = vec![Vec::new(); n];
    for v in 0..n {
        union_adj[v].extend(w.data_succ_idx()[v].iter().copied());
        union_adj[v].extend(w.control_succ_idx()[v].iter().copied());
        union_adj[v].sort_unstable();
        union_adj[v].dedup();
    }
    let combined = close(n, &union_adj);

    let c_vals: Vec<f64> = w.tasks().iter().map(|t| t.requirements.c).collect();
    let i_vals: Vec<f64> = w.tasks().iter().map(|t| t.requirements.i).collect();
    let a_vals: Vec<f64> = w.tasks().iter().map(|t| t.requirements.a).collect();

    let mut entries = vec![vec![Cia::ZERO; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                entries[i][j] = Cia::ONE;
                continue;
            }
            let c = if data[i][j] {
                path_product(&c_vals, &data, i, j)
            } else if data[j][i] {
                path_product(&c_vals, &data, j, i)
            } else {
                0.0
            };
            let ii = if data[i][j] || control[i][j] {
                path_product(&i_vals, &combined, i, j)
            } else {
                0.0
            };
            let a = if data[i][j] {
                path_product(&a_vals, &data, i, j)
            } else {
                0.0
            };
            entries[i][j] = Cia::new(c, ii, a);
        }
    }

    let order: Vec<TaskId> = w.tasks().iter().map(|t| t.id.clone()).collect();
    let index = order.iter().cloned().zip(0..).collect();
    SecurityDependencyMatrix { order, index, entries }
}

/// Tasks whose dependency entry from the viewpoint of `vt` is non-zero,
/// i.e. the tasks where an adaptation can still influence the violation at
/// `vt`. Always contains `vt` itself (diagonal entries are `(1,1,1)`).
pub fn dependent_tasks(
    sdm: &SecurityDependencyMatrix,
    vt: &TaskId,
) -> Result<Vec<TaskId>> {
    let r = *sdm
        .index
        .get(vt)
        .ok_or_else(|| crate::error::Error::UnknownTask(vt.as_str().to_string()))?;
    Ok(sdm
        .order
        .iter()
        .enumerate()
        .filter(|(c, _)| !sdm.entries[r][*c].is_zero())
        .map(|(_, id)| id.clone())
        .collect())
}
