use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::{Circuit, ElementKind};
use crate::util::DisjointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FaultCode {
    Empty,
    Disconnected,
    /// A loop of voltage sources whose values do not sum to zero.
    InconsistentVoltageLoop,
    /// A loop of voltage sources summing to zero; the loop current is
    /// undetermined.
    RedundantVoltageLoop,
    /// A node group attached to the rest only through current sources, with
    /// nonzero net injection.
    UnbalancedCurrentCut,
    /// Same cut shape with zero net injection; the group's potential floats.
    FloatingCurrentCut,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fault {
    pub code: FaultCode,
    pub elements: Vec<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub well_posed: bool,
    pub faults: Vec<Fault>,
}

impl ValidationReport {
    pub fn has(&self, code: FaultCode) -> bool {
        self.faults.iter().any(|f| f.code == code)
    }
}

/// Checks the structural conditions under which the circuit has a unique
/// steady state.
pub fn validate(c: &Circuit) -> ValidationReport {
    let mut faults = Vec::new();
    if c.elements().is_empty() {
        faults.push(Fault {
            code: FaultCode::Empty,
            elements: vec![],
            message: "circuit has no elements".into(),
        });
    } else {
        check_connectivity(c, &mut faults);
        check_voltage_loops(c, &mut faults);
        check_current_cuts(c, &mut faults);
    }
    ValidationReport {
        well_posed: faults.is_empty(),
        faults,
    }
}

fn check_connectivity(c: &Circuit, faults: &mut Vec<Fault>) {
    let mut all = DisjointSet::new(c.node_count());
    for k in 0..c.elements().len() {
        let (a, b) = c.terminals(k);
        all.union_min(a, b);
    }
    let parts = all.component_count();
    if parts > 1 {
        let stray = (0..c.elements().len())
            .filter(|&k| all.find(c.terminals(k).0) != all.find(0))
            .map(|k| c.elements()[k].id.clone())
            .collect();
        faults.push(Fault {
            code: FaultCode::Disconnected,
            elements: stray,
            message: format!("circuit graph has {parts} connected components"),
        });
    }
}

fn check_voltage_loops(c: &Circuit, faults: &mut Vec<Fault>) {
    let n = c.node_count();
    let mut forest = DisjointSet::new(n);
    // adjacency of accepted voltage-source edges: (neighbour, element, drop when walking to neighbour)
    let mut adj: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n];
    for k in c.indices_of(ElementKind::VoltageSource) {
        let e = &c.elements()[k];
        let (a, b) = c.terminals(k);
        if forest.union_min(a, b) {
            adj[a].push((b, k, e.value));
            adj[b].push((a, k, -e.value));
            continue;
        }
        // walk the forest from b back to a
        let (path, drop) = forest_path(&adj, b, a);
        let residual = e.value + drop;
        let scale = path
            .iter()
            .map(|&j| c.elements()[j].value.abs())
            .fold(e.value.abs(), f64::max);
        let mut ids: Vec<String> = path.iter().map(|&j| c.elements()[j].id.clone()).collect();
        ids.insert(0, e.id.clone());
        if residual.abs() > 1e-12 * scale {
            faults.push(Fault {
                code: FaultCode::InconsistentVoltageLoop,
                elements: ids,
                message: format!("voltage-source loop sums to {residual}"),
            });
        } else {
            faults.push(Fault {
                code: FaultCode::RedundantVoltageLoop,
                elements: ids,
                message: "voltage-source loop leaves its current undetermined".into(),
            });
        }
    }
}

/// Path of forest edges from `start` to `goal` and the summed potential drop
/// along it.
fn forest_path(adj: &[Vec<(usize, usize, f64)>], start: usize, goal: usize) -> (Vec<usize>, f64) {
    let mut prev: Vec<Option<(usize, usize, f64)>> = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        if u == goal {
            break;
        }
        for &(w, k, d) in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                prev[w] = Some((u, k, d));
                queue.push_back(w);
            }
        }
    }
    let mut path = Vec::new();
    let mut drop = 0.0;
    let mut at = goal;
    while at != start {
        let (u, k, d) = prev[at].expect("endpoints share a forest component");
        path.push(k);
        drop += d;
        at = u;
    }
    path.reverse();
    (path, drop)
}

fn check_current_cuts(c: &Circuit, faults: &mut Vec<Fault>) {
    let n = c.node_count();
    let mut all = DisjointSet::new(n);
    let mut conductive = DisjointSet::new(n);
    for (k, e) in c.elements().iter().enumerate() {
        let (a, b) = c.terminals(k);
        all.union_min(a, b);
        if e.kind != ElementKind::CurrentSource {
            conductive.union_min(a, b);
        }
    }
    // groups keyed by conductive root; roots are smallest member indices
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        groups.entry(conductive.find(v)).or_default().push(v);
    }
    for (&root, members) in &groups {
        // the group holding the smallest node of its connected component anchors it
        if all.find(root) == root {
            continue;
        }
        let mut inside = vec![false; n];
        for &v in members {
            inside[v] = true;
        }
        let mut net = 0.0;
        let mut scale: f64 = 0.0;
        let mut ids = Vec::new();
        for k in c.indices_of(ElementKind::CurrentSource) {
            let (a, b) = c.terminals(k);
            let value = c.elements()[k].value;
            match (inside[a], inside[b]) {
                (false, true) => net += value,
                (true, false) => net -= value,
                _ => continue,
            }
            scale = scale.max(value.abs());
            ids.push(c.elements()[k].id.clone());
        }
        let names: Vec<&str> = members.iter().map(|&v| c.nodes()[v].as_str()).collect();
        if net.abs() > 1e-12 * scale {
            faults.push(Fault {
                code: FaultCode::UnbalancedCurrentCut,
                elements: ids,
                message: format!(
                    "nodes {names:?} are reached only through current sources with net injection {net}"
                ),
            });
        } else {
            faults.push(Fault {
                code: FaultCode::FloatingCurrentCut,
                elements: ids,
                message: format!("nodes {names:?} are reached only through current sources"),
            });
        }
    }
}
