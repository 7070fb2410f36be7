//! Product of a transition system with path-mode monitors, and lasso search
//! over it.

use std::collections::{HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::RevisionError;
use crate::model::{Path, TransitionSystem};
use crate::norms::{monitor_step, Lifecycle, MonitorMode, MonitorState, Norm, Semantics};

/// A system state paired with the lifecycle of every monitored norm.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductNode {
    pub state: usize,
    pub monitors: Vec<Lifecycle>,
}

impl ProductNode {
    fn violated(&self, range: &std::ops::Range<usize>) -> bool {
        self.monitors[range.clone()].contains(&Lifecycle::Violated)
    }
}

/// Reachable part of the product; successor lists follow the system's
/// lexicographic successor order.
pub struct Product<'m> {
    model: &'m TransitionSystem,
    pub nodes: Vec<ProductNode>,
    pub succ: Vec<Vec<usize>>,
}

fn advance(
    norms: &[&Norm],
    monitors: &[Lifecycle],
    labels: &crate::formula::Labels,
    semantics: Semantics,
) -> Vec<Lifecycle> {
    norms
        .iter()
        .zip(monitors)
        .map(|(n, &lifecycle)| {
            let state = MonitorState { lifecycle, mode: MonitorMode::Path };
            monitor_step(state, n, labels, semantics).0.lifecycle
        })
        .collect()
}

impl<'m> Product<'m> {
    pub fn build(
        model: &'m TransitionSystem,
        norms: &[&Norm],
        semantics: Semantics,
        node_budget: usize,
    ) -> Result<Self, RevisionError> {
        let idle = vec![Lifecycle::Idle; norms.len()];
        let init = ProductNode {
            state: model.init(),
            monitors: advance(norms, &idle, model.labels_at(model.init()), semantics),
        };
        let mut index: HashMap<ProductNode, usize> = HashMap::from([(init.clone(), 0)]);
        let mut nodes = vec![init];
        let mut succ: Vec<Vec<usize>> = Vec::new();
        let mut i = 0;
        while i < nodes.len() {
            let node = nodes[i].clone();
            let mut out = Vec::with_capacity(model.successors(node.state).len());
            for &t in model.successors(node.state) {
                let next =
                    ProductNode { state: t, monitors: advance(norms, &node.monitors, model.labels_at(t), semantics) };
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        if nodes.len() >= node_budget {
                            return Err(RevisionError::ProductTooLarge { budget: node_budget });
                        }
                        index.insert(next.clone(), nodes.len());
                        nodes.push(next);
                        nodes.len() - 1
                    }
                };
                out.push(j);
            }
            succ.push(out);
            i += 1;
        }
        Ok(Product { model, nodes, succ })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Shortest lasso whose run violates some norm in `violate` and never any
    /// norm in `avoid` (index ranges into the monitor vector). Among equally
    /// short stems, the shortest cycle wins; remaining ties go to the
    /// lexicographically smallest state-id sequence.
    pub fn find_lasso(&self, violate: std::ops::Range<usize>, avoid: std::ops::Range<usize>) -> Option<Path> {
        let alive: Vec<bool> = self.nodes.iter().map(|n| !n.violated(&avoid)).collect();
        if !alive[0] {
            return None;
        }
        // BFS over surviving nodes; successors are visited in id order so the
        // recorded parent chain is the lexicographically least shortest path.
        let mut dist = vec![usize::MAX; self.len()];
        let mut parent = vec![usize::MAX; self.len()];
        let mut order = Vec::new();
        dist[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &self.succ[u] {
                if alive[v] && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }

        let mut graph: DiGraph<usize, ()> = DiGraph::new();
        let mut gidx: HashMap<usize, NodeIndex> = HashMap::new();
        for &u in &order {
            gidx.insert(u, graph.add_node(u));
        }
        for &u in &order {
            for &v in &self.succ[u] {
                if let Some(&gv) = gidx.get(&v) {
                    graph.add_edge(gidx[&u], gv, ());
                }
            }
        }
        let mut component = vec![usize::MAX; self.len()];
        let mut cyclic_component = Vec::new();
        for (c, scc) in tarjan_scc(&graph).into_iter().enumerate() {
            let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
            cyclic_component.push(cyclic);
            for g in scc {
                component[graph[g]] = c;
            }
        }

        let mut best: Option<(usize, usize, Vec<usize>, Vec<usize>)> = None;
        for &g in &order {
            let c = component[g];
            if !cyclic_component[c] || !self.nodes[g].violated(&violate) {
                continue;
            }
            if let Some((d, _, _, _)) = &best {
                if dist[g] > *d {
                    break;
                }
            }
            let cycle = self.shortest_cycle(g, &component);
            let stem = self.stem_to(g, &parent);
            let key = (dist[g], cycle.len());
            let better = match &best {
                None => true,
                Some((d, l, s, cy)) => key < (*d, *l) || (key == (*d, *l) && self.ids(&stem, &cycle) < self.ids(s, cy)),
            };
            if better {
                best = Some((key.0, key.1, stem, cycle));
            }
        }
        best.map(|(_, _, stem, cycle)| {
            let name = |v: &[usize]| v.iter().map(|&n| self.model.state_id(self.nodes[n].state).to_string()).collect();
            Path::lasso(name(&stem), name(&cycle))
        })
    }

    fn ids(&self, stem: &[usize], cycle: &[usize]) -> Vec<&str> {
        stem.iter().chain(cycle).map(|&n| self.model.state_id(self.nodes[n].state)).collect()
    }

    fn stem_to(&self, g: usize, parent: &[usize]) -> Vec<usize> {
        let mut stem = Vec::new();
        let mut u = g;
        while u != 0 {
            u = parent[u];
            stem.push(u);
        }
        stem.reverse();
        stem
    }

    /// Nodes of the shortest cycle through `g`, starting at `g`.
    fn shortest_cycle(&self, g: usize, component: &[usize]) -> Vec<usize> {
        let c = component[g];
        let mut parent: HashMap<usize, usize> = HashMap::new();
        let mut queue = VecDeque::from([g]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.succ[u] {
                if component[v] != c {
                    continue;
                }
                if v == g {
                    let mut cycle = vec![u];
                    let mut w = u;
                    while w != g {
                        w = parent[&w];
                        cycle.push(w);
                    }
                    cycle.reverse();
                    return cycle;
                }
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(v) {
                    e.insert(u);
                    queue.push_back(v);
                }
            }
        }
        unreachable!("node lies on a cycle of its component")
    }
}
