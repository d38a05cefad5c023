//! Shared helpers for the integration suites: a seeded random-DAG
//! generator and brute-force reference implementations. The oracles here
//! deliberately avoid the engine's algorithms — reachability is a plain
//! BFS and dependency products come from literal enumeration of every
//! simple path.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use secchain_core::catalog::ActionType;
use secchain_core::cia::Cia;
use secchain_core::workflow::{ControlEdge, DataEdge, DataItem, TaskId, TaskSpec, Workflow};

/// Builds a random forward-edged DAG of 2..=`max_tasks` tasks. CIA
/// requirements occasionally snap to exactly 0 or 1 to exercise the
/// annihilation and identity cases.
pub fn seeded_dag(seed: u64, max_tasks: usize) -> Workflow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_tasks.max(2));
    let mut tasks = Vec::with_capacity(n);
    for i in 0..n {
        let mut comp = [0.0f64; 3];
        for c in &mut comp {
            *c = if rng.gen_bool(0.12) {
                if rng.gen_bool(0.5) {
                    0.0
                } else {
                    1.0
                }
            } else {
                rng.gen_range(0.0..1.0)
            };
        }
        let mut pool = ActionType::ALL.to_vec();
        pool.shuffle(&mut rng);
        let k = rng.gen_range(1..=pool.len());
        tasks.push(TaskSpec {
            id: TaskId::from(format!("t{i:02}").as_str()),
            requirements: Cia::new(comp[0], comp[1], comp[2]),
            value: rng.gen_range(1.0..25.0),
            feasible_actions: pool.into_iter().take(k).collect(),
        });
    }
    let mut control = Vec::new();
    let mut data = Vec::new();
    let mut items = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(0.35) {
                control.push(ControlEdge {
                    src: tasks[i].id.clone(),
                    dst: tasks[j].id.clone(),
                    guard: None,
                });
            }
            if rng.gen_bool(0.22) {
                let item = format!("d{}", items.len());
                items.push(DataItem { id: item.clone(), label: item.clone() });
                data.push(DataEdge {
                    src: tasks[i].id.clone(),
                    dst: tasks[j].id.clone(),
                    item,
                });
            }
        }
    }
    Workflow::new(format!("w{seed}"), tasks, items, control, data)
        .expect("forward edges cannot form a cycle")
}

/// Adjacency lists rebuilt from the workflow's public edge lists.
pub struct Graphs {
    pub ids: Vec<TaskId>,
    pub control: Vec<Vec<usize>>,
    pub data: Vec<Vec<usize>>,
    pub both: Vec<Vec<usize>>,
}

pub fn graphs_of(w: &Workflow) -> Graphs {
    let ids: Vec<TaskId> = w.tasks().iter().map(|t| t.id.clone()).collect();
    let index: BTreeMap<&TaskId, usize> = ids.iter().zip(0..).collect();
    let n = ids.len();
    let mut control = vec![Vec::new(); n];
    let mut data = vec![Vec::new(); n];
    for e in w.control_edges() {
        control[index[&e.src]].push(index[&e.dst]);
    }
    for e in w.data_edges() {
        data[index[&e.src]].push(index[&e.dst]);
    }
    let mut both = vec![Vec::new(); n];
    for v in 0..n {
        both[v].extend(control[v].iter().copied());
        both[v].extend(data[v].iter().copied());
        both[v].sort_unstable();
        both[v].dedup();
    }
    Graphs { ids, control, data, both }
}

/// Brute-force reachability from `start`, excluding `start` itself.
pub fn reach_from(adj: &[Vec<usize>], start: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<usize> = adj[start].iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        if seen.insert(v) {
            queue.extend(adj[v].iter().copied());
        }
    }
    seen
}

pub fn reverse(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut rev = vec![Vec::new(); adj.len()];
    for (v, outs) in adj.iter().enumerate() {
        for &w in outs {
            rev[w].push(v);
        }
    }
    rev
}

/// Union of the vertices lying on any simple `src -> dst` path, endpoints
/// included, found by enumerating every path. `None` when no path exists.
pub fn path_union(adj: &[Vec<usize>], src: usize, dst: usize) -> Option<BTreeSet<usize>> {
    fn dfs(
        adj: &[Vec<usize>],
        v: usize,
        dst: usize,
        stack: &mut Vec<usize>,
        out: &mut BTreeSet<usize>,
        hit: &mut bool,
    ) {
        if v == dst {
            *hit = true;
            out.extend(stack.iter().copied());
            return;
        }
        for &w in &adj[v] {
            stack.push(w);
            dfs(adj, w, dst, stack, out, hit);
            stack.pop();
        }
    }
    let mut stack = vec![src];
    let mut out = BTreeSet::new();
    let mut hit = false;
    dfs(adj, src, dst, &mut stack, &mut out, &mut hit);
    hit.then_some(out)
}

/// Reference dependency matrix computed from path enumeration alone.
pub fn sdm_oracle(w: &Workflow) -> Vec<Vec<Cia>> {
    let g = graphs_of(w);
    let n = g.ids.len();
    let c_vals: Vec<f64> = w.tasks().iter().map(|t| t.requirements.c).collect();
    let i_vals: Vec<f64> = w.tasks().iter().map(|t| t.requirements.i).collect();
    let a_vals: Vec<f64> = w.tasks().iter().map(|t| t.requirements.a).collect();
    let prod =
        |vals: &[f64], set: &BTreeSet<usize>| set.iter().map(|&k| vals[k]).product::<f64>();

    let mut out = vec![vec![Cia::ZERO; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                out[i][j] = Cia::ONE;
                continue;
            }
            let c = match path_union(&g.data, i, j) {
                Some(u) => prod(&c_vals, &u),
                None => match path_union(&g.data, j, i) {
                    Some(u) => prod(&c_vals, &u),
                    None => 0.0,
                },
            };
            let forward_data = path_union(&g.data, i, j);
            let forward_control = path_union(&g.control, i, j);
            let ii = if forward_data.is_some() || forward_control.is_some() {
                let u = path_union(&g.both, i, j)
                    .expect("a pure-relation path is also a union-graph path");
                prod(&i_vals, &u)
            } else {
                0.0
            };
            let a = match path_union(&g.data, i, j) {
                Some(u) => prod(&a_vals, &u),
                None => 0.0,
            };
            out[i][j] = Cia::new(c, ii, a);
        }
    }
    out
}
