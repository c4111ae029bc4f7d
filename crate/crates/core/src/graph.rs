//! Topology of the resistor network: supernodes formed by voltage sources,
//! the resistance graph, a depth-first spanning tree with its fundamental
//! cycles, the fundamental node basis, and the resistor classifications
//! both loss potentials are built from.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::netlist::{Circuit, ElementKind};
use crate::util::DisjointSet;

/// Partition of circuit nodes into classes joined by voltage-source paths.
/// Classes are numbered by their smallest node index, so class 0 holds the
/// reference node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Supernodes {
    pub of_node: Vec<usize>,
    pub members: Vec<Vec<usize>>,
}

impl Supernodes {
    pub fn of(c: &Circuit) -> Self {
        let n = c.node_count();
        let mut ds = DisjointSet::new(n);
        for k in c.indices_of(ElementKind::VoltageSource) {
            let (a, b) = c.terminals(k);
            ds.union_min(a, b);
        }
        let mut class_of_root = vec![usize::MAX; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut of_node = vec![0; n];
        for (v, class) in of_node.iter_mut().enumerate() {
            let r = ds.find(v);
            if class_of_root[r] == usize::MAX {
                class_of_root[r] = members.len();
                members.push(Vec::new());
            }
            *class = class_of_root[r];
            members[*class].push(v);
        }
        Supernodes { of_node, members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// True when the voltage sources cannot drive any resistor current: each one
/// is a bridge of the resistor and voltage-source graph, so it only joins
/// parts that are otherwise separate.
pub fn voltage_sources_idle(c: &Circuit) -> bool {
    let mut ds = DisjointSet::new(c.node_count());
    for k in c.indices_of(ElementKind::Resistor) {
        let (a, b) = c.terminals(k);
        ds.union_min(a, b);
    }
    c.indices_of(ElementKind::VoltageSource).all(|k| {
        let (a, b) = c.terminals(k);
        ds.union_min(a, b)
    })
}

/// True when every current source has both terminals in one supernode, so
/// its current circulates through voltage sources alone.
pub fn current_sources_idle(c: &Circuit) -> bool {
    let sn = Supernodes::of(c);
    c.indices_of(ElementKind::CurrentSource).all(|k| {
        let (a, b) = c.terminals(k);
        sn.of_node[a] == sn.of_node[b]
    })
}

/// True when no resistor can carry current: the voltage sources are all
/// zero or idle, and so are the current sources. Voltage sources still
/// carry the current of current sources inside their supernodes.
pub fn resistors_idle(c: &Circuit) -> bool {
    let zero_volts = c
        .indices_of(ElementKind::VoltageSource)
        .all(|k| c.elements()[k].value == 0.0);
    (zero_volts || voltage_sources_idle(c)) && current_sources_idle(c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResistorEdge {
    pub id: String,
    /// Index of the resistor in the circuit's element list.
    pub element: usize,
    pub from: usize,
    pub to: usize,
    pub resistance: f64,
}

impl ResistorEdge {
    pub fn is_self_loop(&self) -> bool {
        self.from == self.to
    }
}

/// The circuit with current sources opened and voltage sources shorted.
/// Edges are the resistors in file order, between supernodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResistanceGraph {
    pub supernodes: Supernodes,
    pub edges: Vec<ResistorEdge>,
    pub removed_current_sources: Vec<String>,
}

impl ResistanceGraph {
    pub fn vertex_count(&self) -> usize {
        self.supernodes.len()
    }

    /// Supernode member ids, for display.
    pub fn supernode_ids(&self, c: &Circuit) -> Vec<Vec<String>> {
        self.supernodes
            .members
            .iter()
            .map(|m| m.iter().map(|&v| c.nodes()[v].clone()).collect())
            .collect()
    }
}

pub fn resistance_graph(c: &Circuit) -> ResistanceGraph {
    let supernodes = Supernodes::of(c);
    let edges = c
        .indices_of(ElementKind::Resistor)
        .map(|k| {
            let (a, b) = c.terminals(k);
            let e = &c.elements()[k];
            ResistorEdge {
                id: e.id.clone(),
                element: k,
                from: supernodes.of_node[a],
                to: supernodes.of_node[b],
                resistance: e.value,
            }
        })
        .collect();
    let removed_current_sources = c
        .indices_of(ElementKind::CurrentSource)
        .map(|k| c.elements()[k].id.clone())
        .collect();
    ResistanceGraph {
        supernodes,
        edges,
        removed_current_sources,
    }
}

/// Overrides for the spanning-tree search, used to check that derived
/// quantities do not depend on the tree.
#[derive(Debug, Clone, Default)]
pub struct TreeOptions {
    /// Supernode to start from; defaults to supernode 0.
    pub root: Option<usize>,
    /// Edge visiting priority (a permutation of edge indices); defaults to
    /// file order.
    pub edge_order: Option<Vec<usize>>,
}

/// Spanning forest of the resistance graph and the fundamental cycles of its
/// chords. Edge references are indices into `ResistanceGraph::edges`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleBasis {
    /// `(parent supernode, tree edge)` for every non-root vertex.
    pub parent: Vec<Option<(usize, usize)>>,
    pub depth: Vec<usize>,
    /// Vertices in depth-first discovery order.
    pub preorder: Vec<usize>,
    pub tree_edges: Vec<usize>,
    /// Chords in file order; chord `i` defines cycle `i`.
    pub chords: Vec<usize>,
    /// Oriented edge sequence of each fundamental cycle, starting with its
    /// chord traversed `from -> to`. Signs are +1 where an edge is traversed
    /// along its own orientation.
    pub cycles: Vec<Vec<(usize, f64)>>,
    pub components: usize,
}

impl CycleBasis {
    pub fn len(&self) -> usize {
        self.chords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chords.is_empty()
    }

    pub fn chord_ids<'a>(&self, rg: &'a ResistanceGraph) -> Vec<&'a str> {
        self.chords
            .iter()
            .map(|&e| rg.edges[e].id.as_str())
            .collect()
    }

    pub fn tree_edge_ids<'a>(&self, rg: &'a ResistanceGraph) -> Vec<&'a str> {
        self.tree_edges
            .iter()
            .map(|&e| rg.edges[e].id.as_str())
            .collect()
    }

    /// For every edge, the cycles containing it with the edge's sign.
    pub fn memberships(&self, edge_count: usize) -> Vec<Vec<(usize, f64)>> {
        let mut out = vec![Vec::new(); edge_count];
        for (i, cycle) in self.cycles.iter().enumerate() {
            for &(e, s) in cycle {
                out[e].push((i, s));
            }
        }
        out
    }
}

pub fn spanning_tree_and_cycles(rg: &ResistanceGraph) -> CycleBasis {
    spanning_tree_with(rg, &TreeOptions::default())
}

pub fn spanning_tree_with(rg: &ResistanceGraph, opts: &TreeOptions) -> CycleBasis {
    let nv = rg.vertex_count();
    let ne = rg.edges.len();
    let priority: Vec<usize> = match &opts.edge_order {
        Some(order) => order.clone(),
        None => (0..ne).collect(),
    };
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for &e in &priority {
        let edge = &rg.edges[e];
        adj[edge.from].push((e, edge.to));
        if !edge.is_self_loop() {
            adj[edge.to].push((e, edge.from));
        }
    }

    let mut parent = vec![None; nv];
    let mut depth = vec![0; nv];
    let mut visited = vec![false; nv];
    let mut in_tree = vec![false; ne];
    let mut preorder = Vec::with_capacity(nv);
    let mut tree_edges = Vec::new();
    let mut components = 0;

    let roots = opts.root.into_iter().chain(0..nv);
    for root in roots {
        if visited[root] {
            continue;
        }
        components += 1;
        visited[root] = true;
        preorder.push(root);
        let mut stack = vec![(root, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (u, cursor) = *top;
            if cursor == adj[u].len() {
                stack.pop();
                continue;
            }
            top.1 += 1;
            let (e, w) = adj[u][cursor];
            if !visited[w] {
                visited[w] = true;
                in_tree[e] = true;
                parent[w] = Some((u, e));
                depth[w] = depth[u] + 1;
                preorder.push(w);
                tree_edges.push(e);
                stack.push((w, 0));
            }
        }
    }

    let chords: Vec<usize> = (0..ne).filter(|&e| !in_tree[e]).collect();
    let cycles = chords
        .iter()
        .map(|&e| fundamental_cycle(rg, &parent, &depth, e))
        .collect();
    CycleBasis {
        parent,
        depth,
        preorder,
        tree_edges,
        chords,
        cycles,
        components,
    }
}

fn fundamental_cycle(
    rg: &ResistanceGraph,
    parent: &[Option<(usize, usize)>],
    depth: &[usize],
    chord: usize,
) -> Vec<(usize, f64)> {
    let edge = &rg.edges[chord];
    let mut cycle = vec![(chord, 1.0)];
    // climb from the chord's head (walking toward the root) and from its tail
    let (mut v, mut u) = (edge.to, edge.from);
    let mut up_from_head = Vec::new();
    let mut down_to_tail = Vec::new();
    while v != u {
        if depth[v] >= depth[u] {
            let (p, e) = parent[v].expect("non-root vertex has a parent");
            let sign = if rg.edges[e].from == v { 1.0 } else { -1.0 };
            up_from_head.push((e, sign));
            v = p;
        } else {
            let (p, e) = parent[u].expect("non-root vertex has a parent");
            // traversed parent -> child on the way back to the tail
            let sign = if rg.edges[e].from == p { 1.0 } else { -1.0 };
            down_to_tail.push((e, sign));
            u = p;
        }
    }
    cycle.extend(up_from_head);
    cycle.extend(down_to_tail.into_iter().rev());
    cycle
}

/// One representative node per supernode, and every node's potential
/// relative to its representative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeBasis {
    pub representatives: Vec<String>,
    pub representative_nodes: Vec<usize>,
    pub supernode_of: Vec<usize>,
    /// potential(node) - potential(representative), by node index.
    pub offsets: Vec<f64>,
}

impl NodeBasis {
    pub fn dimension(&self) -> usize {
        self.representatives.len()
    }
}

/// Basis with the smallest node id of each supernode as representative.
pub fn fundamental_node_basis(c: &Circuit) -> NodeBasis {
    let sn = Supernodes::of(c);
    let reps: Vec<usize> = sn.members.iter().map(|m| m[0]).collect();
    node_basis_with(c, &sn, &reps)
}

/// Basis with caller-chosen representatives, one node per supernode in
/// supernode order.
pub fn node_basis_with_representatives(c: &Circuit, reps: &[usize]) -> Result<NodeBasis> {
    let sn = Supernodes::of(c);
    if reps.len() != sn.len() || reps.iter().enumerate().any(|(s, &v)| sn.of_node[v] != s) {
        return Err(Error::InvalidEdit(
            "representatives must pick one node from each supernode".into(),
        ));
    }
    Ok(node_basis_with(c, &sn, reps))
}

fn node_basis_with(c: &Circuit, sn: &Supernodes, reps: &[usize]) -> NodeBasis {
    let n = c.node_count();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for k in c.indices_of(ElementKind::VoltageSource) {
        let (a, b) = c.terminals(k);
        let v = c.elements()[k].value;
        // potential(a) - potential(b) = v
        adj[a].push((b, -v));
        adj[b].push((a, v));
    }
    let mut offsets = vec![f64::NAN; n];
    for &r in reps {
        offsets[r] = 0.0;
        let mut stack = vec![r];
        while let Some(u) = stack.pop() {
            for &(w, d) in &adj[u] {
                if offsets[w].is_nan() {
                    offsets[w] = offsets[u] + d;
                    stack.push(w);
                }
            }
        }
    }
    NodeBasis {
        representatives: reps.iter().map(|&v| c.nodes()[v].clone()).collect(),
        representative_nodes: reps.to_vec(),
        supernode_of: sn.of_node.clone(),
        offsets,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VoltageClass {
    /// Both endpoints in one supernode: fixed voltage drop.
    V1,
    V2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CurrentClass {
    /// In no fundamental cycle: fixed current.
    I1,
    /// In exactly one fundamental cycle.
    I2 { cycle: usize },
    /// Shared by several fundamental cycles.
    I3 { cycles: Vec<usize> },
}

/// Voltage-view and current-view class of every resistor, in file order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResistorClasses {
    pub resistors: Vec<String>,
    pub voltage_view: Vec<VoltageClass>,
    pub current_view: Vec<CurrentClass>,
}

impl ResistorClasses {
    pub fn position(&self, id: &str) -> Option<usize> {
        self.resistors.iter().position(|r| r == id)
    }
}

pub fn classify_resistors(c: &Circuit, nb: &NodeBasis, cb: &CycleBasis) -> ResistorClasses {
    let resistors: Vec<usize> = c.indices_of(ElementKind::Resistor).collect();
    let memberships = cb.memberships(resistors.len());
    let mut voltage_view = Vec::with_capacity(resistors.len());
    let mut current_view = Vec::with_capacity(resistors.len());
    for (e, &k) in resistors.iter().enumerate() {
        let (a, b) = c.terminals(k);
        voltage_view.push(if nb.supernode_of[a] == nb.supernode_of[b] {
            VoltageClass::V1
        } else {
            VoltageClass::V2
        });
        current_view.push(match memberships[e].as_slice() {
            [] => CurrentClass::I1,
            [(i, _)] => CurrentClass::I2 { cycle: *i },
            many => CurrentClass::I3 {
                cycles: many.iter().map(|(i, _)| *i).collect(),
            },
        });
    }
    ResistorClasses {
        resistors: resistors
            .iter()
            .map(|&k| c.elements()[k].id.clone())
            .collect(),
        voltage_view,
        current_view,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EditClass {
    /// Node set fixed, cycle count changes by one.
    Parallel,
    /// Cycle space fixed, node count changes by one.
    Serial,
}

/// How removing element `id` acts on the resistance graph. Resistors that
/// lie on no cycle (bridges) are removed by contraction; current sources are
/// opened; voltage sources are shorted.
pub fn classify_removal(c: &Circuit, id: &str) -> Result<EditClass> {
    let e = c.require_element(id)?;
    Ok(match e.kind {
        ElementKind::CurrentSource => EditClass::Parallel,
        ElementKind::VoltageSource => EditClass::Serial,
        ElementKind::Resistor => {
            let rg = resistance_graph(c);
            let cb = spanning_tree_and_cycles(&rg);
            let pos = rg
                .edges
                .iter()
                .position(|r| r.id == id)
                .expect("resistor present in its resistance graph");
            if cb.cycles.iter().any(|cy| cy.iter().any(|&(e, _)| e == pos)) {
                EditClass::Parallel
            } else {
                EditClass::Serial
            }
        }
    })
}

/// Attaching an element between two existing nodes is a parallel attachment.
pub fn classify_attachment(c: &Circuit, from: &str, to: &str) -> Result<EditClass> {
    c.require_node(from)?;
    c.require_node(to)?;
    Ok(EditClass::Parallel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::netlist::parse_netlist;

    fn circuit(text: &str) -> Circuit {
        parse_netlist(text).unwrap()
    }

    #[test]
    fn resistor_across_voltage_source_is_self_loop() {
        let rg = resistance_graph(&circuit("V v 1 2 1\nR r 1 2 1"));
        assert_eq!(rg.vertex_count(), 1);
        assert!(rg.edges[0].is_self_loop());
        let cb = spanning_tree_and_cycles(&rg);
        assert_eq!(cb.chords, vec![0]);
        assert_eq!(cb.cycles[0], vec![(0, 1.0)]);
    }

    #[test]
    fn current_source_is_opened() {
        let rg = resistance_graph(&circuit("I i 1 2 1\nR r 1 2 1"));
        assert_eq!(rg.vertex_count(), 2);
        assert_eq!(rg.edges.len(), 1);
        assert_eq!(rg.removed_current_sources, vec!["i".to_string()]);
    }

    #[test]
    fn triangle_has_one_cycle_of_three() {
        let rg = resistance_graph(&circuit("R a 1 2 1\nR b 2 3 1\nR c 3 1 1"));
        let cb = spanning_tree_and_cycles(&rg);
        assert_eq!(cb.len(), 1);
        assert_eq!(cb.cycles[0].len(), 3);
        assert_eq!(cb.chord_ids(&rg), vec!["c"]);
        // c: 3 -> 1, then 1 -> 2 (a forward), 2 -> 3 (b forward)
        assert_eq!(cb.cycles[0], vec![(2, 1.0), (0, 1.0), (1, 1.0)]);
    }

    #[test]
    fn tree_has_no_chords() {
        let rg = resistance_graph(&circuit("R a 1 2 1\nR b 2 3 1\nR c 2 4 1"));
        assert!(spanning_tree_and_cycles(&rg).is_empty());
    }

    #[test]
    fn cycle_orientation_follows_chord() {
        // chord d runs 4 -> 1, tree path back is 1 -> 2 -> 3 -> 4 with c reversed
        let rg = resistance_graph(&circuit("R a 1 2 1\nR b 2 3 1\nR c 4 3 1\nR d 4 1 1"));
        let cb = spanning_tree_and_cycles(&rg);
        assert_eq!(cb.chord_ids(&rg), vec!["d"]);
        assert_eq!(cb.cycles[0], vec![(3, 1.0), (0, 1.0), (1, 1.0), (2, -1.0)]);
    }

    #[test]
    fn four_source_bank_shape() {
        let c = fixtures::four_source_bank();
        let rg = resistance_graph(&c);
        assert_eq!(rg.vertex_count(), 2);
        let cb = spanning_tree_and_cycles(&rg);
        // |E| - |V| + 1 = 3 - 2 + 1
        assert_eq!(cb.len(), 2);
        let nb = fundamental_node_basis(&c);
        assert_eq!(nb.representatives, vec!["1".to_string(), "2".to_string()]);
        let left_of_r2 = c.node_index("5").unwrap();
        // offset is -E1 - E2 with E1 = 1, E2 = 2
        assert_eq!(nb.offsets[left_of_r2], -3.0);
        let classes = classify_resistors(&c, &nb, &cb);
        assert!(classes.voltage_view.iter().all(|v| *v == VoltageClass::V2));
    }

    #[test]
    fn node_basis_without_voltage_sources() {
        let c = circuit("R a 1 2 1\nR b 2 3 1\nI i 3 1 1");
        let nb = fundamental_node_basis(&c);
        assert_eq!(nb.dimension(), 3);
        assert!(nb.offsets.iter().all(|&o| o == 0.0));
    }

    #[test]
    fn node_basis_all_joined() {
        let c = circuit("V a 1 2 1\nV b 2 3 1\nR r 1 3 1");
        assert_eq!(fundamental_node_basis(&c).dimension(), 1);
    }

    #[test]
    fn alternative_representatives() {
        let c = fixtures::four_source_bank();
        let n3 = c.node_index("3").unwrap();
        let n2 = c.node_index("2").unwrap();
        let sn = Supernodes::of(&c);
        let reps: Vec<usize> = (0..sn.len())
            .map(|s| if sn.of_node[n3] == s { n3 } else { n2 })
            .collect();
        let nb = node_basis_with_representatives(&c, &reps).unwrap();
        assert_eq!(nb.dimension(), 2);
        assert_eq!(nb.offsets[n3], 0.0);
        // node 1 sits E1 above node 3
        assert_eq!(nb.offsets[c.node_index("1").unwrap()], 1.0);
    }

    #[test]
    fn classification_views() {
        // v parallels r0; r1 hangs off node 3 as a leaf; r2,r3,r4 form cycles
        let c = circuit(
            "V v 1 2 1\nR r0 1 2 1\nR r1 3 9 1\nR r2 2 3 1\nR r3 3 4 1\nR r4 4 2 1\nR r5 2 4 1",
        );
        let rg = resistance_graph(&c);
        let cb = spanning_tree_and_cycles(&rg);
        let nb = fundamental_node_basis(&c);
        let cl = classify_resistors(&c, &nb, &cb);
        assert_eq!(cl.voltage_view[0], VoltageClass::V1);
        assert!(cl.voltage_view[1..].iter().all(|v| *v == VoltageClass::V2));
        assert_eq!(cl.current_view[1], CurrentClass::I1);
        // r0 is a self-loop chord owning its own cycle
        assert_eq!(cl.current_view[0], CurrentClass::I2 { cycle: 0 });
        assert!(matches!(cl.current_view[5], CurrentClass::I2 { .. }));
        assert!(cl
            .current_view
            .iter()
            .any(|k| matches!(k, CurrentClass::I3 { .. })));
    }

    #[test]
    fn removal_classes() {
        let c = circuit("V v 1 0 1\nR r1 1 0 1\nR r2 1 0 1");
        assert_eq!(classify_removal(&c, "r2").unwrap(), EditClass::Parallel);
        // closed through the source, the chain is one cycle of the resistance graph
        let c = circuit("V v 1 0 1\nR r1 1 2 1\nR r2 2 3 1\nR r3 3 0 1");
        assert_eq!(classify_removal(&c, "r2").unwrap(), EditClass::Parallel);
        let c = circuit("V v 1 0 1\nR r1 1 2 1\nR r2 2 3 1\nR r3 3 4 1");
        assert_eq!(classify_removal(&c, "r2").unwrap(), EditClass::Serial);
        assert_eq!(classify_removal(&c, "v").unwrap(), EditClass::Serial);
        let c = circuit("I i 0 1 1\nR r1 1 0 1");
        assert_eq!(classify_removal(&c, "i").unwrap(), EditClass::Parallel);
        assert!(classify_removal(&c, "nope").is_err());
    }

    #[test]
    fn attachment_classes() {
        let c = circuit("V v 1 0 1\nR r1 1 0 1");
        assert_eq!(
            classify_attachment(&c, "1", "0").unwrap(),
            EditClass::Parallel
        );
        assert!(classify_attachment(&c, "1", "7").is_err());
    }
}
