//! The two quadratic loss potentials and the four ways of computing total
//! loss from them.
//!
//! The voltage potential is a function of one potential per supernode; the
//! current potential is a function of one circulating current per chord of
//! the resistance graph. Resistors whose value is fixed regardless of the
//! variables (V1 in the voltage view, I1 in the current view) only feed the
//! constant term.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::decomposition::decompose;
use crate::error::{Error, Result};
use crate::graph::{
    classify_resistors, fundamental_node_basis, resistance_graph, spanning_tree_and_cycles,
    CurrentClass, CycleBasis, NodeBasis, ResistanceGraph, ResistorClasses, VoltageClass,
};
use crate::netlist::{Circuit, ElementKind};
use crate::qp::{equality_qp, Quadratic};
use crate::solver::solve;
use crate::util::relative_difference;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoltageTerm {
    pub resistor: String,
    pub from_supernode: usize,
    pub to_supernode: usize,
    pub resistance: f64,
    /// Offsets of the resistor's terminals from their representatives.
    pub from_offset: f64,
    pub to_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoltagePotential {
    pub representatives: Vec<String>,
    /// Loss of the V1 resistors.
    pub constant_loss: f64,
    /// One term per V2 resistor.
    pub terms: Vec<VoltageTerm>,
    pub quadratic: Quadratic,
}

impl VoltagePotential {
    pub fn dimension(&self) -> usize {
        self.representatives.len()
    }

    pub fn evaluate(&self, e: &[f64]) -> f64 {
        self.constant_loss
            + self
                .terms
                .iter()
                .map(|t| {
                    let v = e[t.from_supernode] + t.from_offset - e[t.to_supernode] - t.to_offset;
                    v * v / t.resistance
                })
                .sum::<f64>()
    }

    /// Minimiser with the first representative held at 0 V.
    pub fn minimize(&self) -> Result<(Vec<f64>, f64)> {
        let pinned: Vec<usize> = (0..self.dimension().min(1)).collect();
        let e = self.quadratic.minimize_pinned(&pinned)?;
        let value = self.evaluate(&e);
        Ok((e, value))
    }
}

pub fn build_voltage_potential(
    c: &Circuit,
    nb: &NodeBasis,
    classes: &ResistorClasses,
) -> VoltagePotential {
    let mut quadratic = Quadratic::zeros(nb.dimension());
    let mut constant_loss = 0.0;
    let mut terms = Vec::new();
    for (pos, k) in c.indices_of(ElementKind::Resistor).enumerate() {
        let e = &c.elements()[k];
        let (a, b) = c.terminals(k);
        let drop = nb.offsets[a] - nb.offsets[b];
        match classes.voltage_view[pos] {
            VoltageClass::V1 => constant_loss += drop * drop / e.value,
            VoltageClass::V2 => {
                let (sa, sb) = (nb.supernode_of[a], nb.supernode_of[b]);
                quadratic.add_square(&[(sa, 1.0), (sb, -1.0)], drop, 1.0 / e.value);
                terms.push(VoltageTerm {
                    resistor: e.id.clone(),
                    from_supernode: sa,
                    to_supernode: sb,
                    resistance: e.value,
                    from_offset: nb.offsets[a],
                    to_offset: nb.offsets[b],
                });
            }
        }
    }
    quadratic.c += constant_loss;
    VoltagePotential {
        representatives: nb.representatives.clone(),
        constant_loss,
        terms,
        quadratic,
    }
}

/// A resistor's contribution `R (s·x + injection)²`, with `s` the sign of the
/// resistor in the cycle it is listed under (or +1 outside any cycle).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeTerm {
    pub resistor: String,
    pub resistance: f64,
    pub injection: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleTerm {
    pub cycle: usize,
    pub chord: String,
    pub chord_resistance: f64,
    /// Resistors owned by this cycle alone, oriented along the cycle.
    pub exclusive: Vec<EdgeTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharedTerm {
    pub edge: EdgeTerm,
    /// Owning cycles with the resistor's sign in each.
    pub cycles: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurrentPotential {
    pub chords: Vec<String>,
    /// Loss of the I1 resistors, whose current is fixed by the injections.
    pub constant_loss: f64,
    pub i1_terms: Vec<EdgeTerm>,
    pub i2_terms: Vec<CycleTerm>,
    pub i3_terms: Vec<SharedTerm>,
    pub quadratic: Quadratic,
    #[serde(skip)]
    currents: CurrentMap,
}

/// Resistor currents as an affine function of chord currents:
/// `i = A x + b`, rows in resistor file order.
#[derive(Debug, Clone, PartialEq, Default)]
struct CurrentMap {
    rows: Vec<Vec<(usize, f64)>>,
    offset: Vec<f64>,
}

impl CurrentMap {
    fn currents(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| b + row.iter().map(|&(c, s)| s * x[c]).sum::<f64>())
            .collect()
    }
}

impl CurrentPotential {
    pub fn dimension(&self) -> usize {
        self.chords.len()
    }

    /// Resistor currents, in file order, for chord currents `x`.
    pub fn resistor_currents(&self, x: &[f64]) -> Vec<f64> {
        self.currents.currents(x)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let (p1, p2, p3) = self.parts(x);
        p1 + p2 + p3
    }

    /// Loss of the I1, I2 and I3 resistors separately.
    pub fn parts(&self, x: &[f64]) -> (f64, f64, f64) {
        let p2 = self
            .i2_terms
            .iter()
            .map(|t| {
                let xi = x[t.cycle];
                xi * xi * t.chord_resistance
                    + t.exclusive
                        .iter()
                        .map(|e| (xi + e.injection).powi(2) * e.resistance)
                        .sum::<f64>()
            })
            .sum();
        let p3 = self
            .i3_terms
            .iter()
            .map(|t| {
                let i: f64 =
                    t.edge.injection + t.cycles.iter().map(|&(c, s)| s * x[c]).sum::<f64>();
                i * i * t.edge.resistance
            })
            .sum();
        (self.constant_loss, p2, p3)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.quadratic.gradient(x)
    }

    pub fn minimize(&self) -> Result<(Vec<f64>, f64)> {
        let x = self.quadratic.minimize_pinned(&[])?;
        let value = self.evaluate(&x);
        Ok((x, value))
    }
}

/// Tree-routed current of every resistance-graph edge: each supernode's net
/// injection is carried to the root along the spanning tree. Chords carry
/// nothing.
fn tree_injections(c: &Circuit, rg: &ResistanceGraph, cb: &CycleBasis) -> Vec<f64> {
    let mut net = vec![0.0; rg.vertex_count()];
    for k in c.indices_of(ElementKind::CurrentSource) {
        let (a, b) = c.terminals(k);
        let v = c.elements()[k].value;
        net[rg.supernodes.of_node[a]] -= v;
        net[rg.supernodes.of_node[b]] += v;
    }
    let mut flow = vec![0.0; rg.edges.len()];
    for &v in cb.preorder.iter().rev() {
        if let Some((p, e)) = cb.parent[v] {
            // everything injected below v leaves through edge e toward p
            flow[e] = if rg.edges[e].from == v {
                net[v]
            } else {
                -net[v]
            };
            net[p] += net[v];
        }
    }
    flow
}

pub fn build_current_potential(
    c: &Circuit,
    cb: &CycleBasis,
    classes: &ResistorClasses,
) -> CurrentPotential {
    let rg = resistance_graph(c);
    let b = tree_injections(c, &rg, cb);
    let memberships = cb.memberships(rg.edges.len());
    let n = cb.len();

    let mut quadratic = Quadratic::zeros(n);
    let mut map = CurrentMap::default();
    let mut constant_loss = 0.0;
    let mut i1_terms = Vec::new();
    let mut i2_terms: Vec<CycleTerm> = cb
        .chords
        .iter()
        .enumerate()
        .map(|(i, &e)| CycleTerm {
            cycle: i,
            chord: rg.edges[e].id.clone(),
            chord_resistance: rg.edges[e].resistance,
            exclusive: Vec::new(),
        })
        .collect();
    let mut i3_terms = Vec::new();
    let chord_of: Vec<Option<usize>> = {
        let mut v = vec![None; rg.edges.len()];
        for (i, &e) in cb.chords.iter().enumerate() {
            v[e] = Some(i);
        }
        v
    };

    for (e, edge) in rg.edges.iter().enumerate() {
        let r = edge.resistance;
        let row = memberships[e].clone();
        quadratic.add_square(&row, b[e], r);
        map.rows.push(row.clone());
        map.offset.push(b[e]);
        let term = |injection| EdgeTerm {
            resistor: edge.id.clone(),
            resistance: r,
            injection,
        };
        match &classes.current_view[e] {
            CurrentClass::I1 => {
                constant_loss += b[e] * b[e] * r;
                i1_terms.push(term(b[e]));
            }
            CurrentClass::I2 { cycle } => {
                if chord_of[e] != Some(*cycle) {
                    let s = row[0].1;
                    i2_terms[*cycle].exclusive.push(term(s * b[e]));
                }
            }
            CurrentClass::I3 { .. } => i3_terms.push(SharedTerm {
                edge: term(b[e]),
                cycles: row,
            }),
        }
    }
    CurrentPotential {
        chords: cb.chord_ids(&rg).into_iter().map(String::from).collect(),
        constant_loss,
        i1_terms,
        i2_terms,
        i3_terms,
        quadratic,
        currents: map,
    }
}

/// Voltage potential over the default node basis.
pub fn voltage_potential(c: &Circuit) -> VoltagePotential {
    let nb = fundamental_node_basis(c);
    let rg = resistance_graph(c);
    let cb = spanning_tree_and_cycles(&rg);
    build_voltage_potential(c, &nb, &classify_resistors(c, &nb, &cb))
}

/// Current potential over the default spanning tree.
pub fn current_potential(c: &Circuit) -> CurrentPotential {
    let nb = fundamental_node_basis(c);
    let rg = resistance_graph(c);
    let cb = spanning_tree_and_cycles(&rg);
    build_current_potential(c, &cb, &classify_resistors(c, &nb, &cb))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Method {
    /// Full nodal solve.
    A,
    /// Current potential with voltage sources as constraints.
    B,
    /// Voltage potential with current sources as constraints.
    C,
    /// Sum of the unconstrained minima on the two sub-circuits.
    D,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::A, Method::B, Method::C, Method::D];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Method::A),
            "B" => Ok(Method::B),
            "C" => Ok(Method::C),
            "D" => Ok(Method::D),
            _ => Err(Error::InvalidEdit(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossResult {
    pub method: Method,
    pub loss: f64,
    /// Minimising assignment: chord currents then voltage-source currents
    /// (B), supernode potentials then current-source voltages (C), or the
    /// two sub-circuit minimisers back to back (D). Empty for A.
    pub witness: Vec<f64>,
}

pub fn compute_loss(c: &Circuit, method: Method) -> Result<LossResult> {
    let (loss, witness) = match method {
        Method::A => (solve(c)?.total_loss, Vec::new()),
        Method::B => method_b(c)?,
        Method::C => method_c(c)?,
        Method::D => method_d(c)?,
    };
    Ok(LossResult {
        method,
        loss,
        witness,
    })
}

/// All four methods, computed in parallel.
pub fn compute_all(c: &Circuit) -> Result<Vec<LossResult>> {
    Method::ALL
        .par_iter()
        .map(|&m| compute_loss(c, m))
        .collect()
}

/// Largest pairwise relative difference among the results' losses.
pub fn max_pairwise_difference(results: &[LossResult]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in results.iter().enumerate() {
        for b in &results[i + 1..] {
            worst = worst.max(relative_difference(a.loss, b.loss, 0.0));
        }
    }
    worst
}

/// Node sets on either side of each voltage source: removing source `j` from
/// the voltage-source forest leaves its `from` terminal on the returned side.
fn voltage_source_cuts(c: &Circuit) -> Vec<(usize, Vec<bool>)> {
    let n = c.node_count();
    let vs: Vec<usize> = c.indices_of(ElementKind::VoltageSource).collect();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &k in &vs {
        let (a, b) = c.terminals(k);
        adj[a].push((k, b));
        adj[b].push((k, a));
    }
    vs.iter()
        .map(|&j| {
            let (a, _) = c.terminals(j);
            let mut side = vec![false; n];
            side[a] = true;
            let mut stack = vec![a];
            while let Some(u) = stack.pop() {
                for &(k, w) in &adj[u] {
                    if k != j && !side[w] {
                        side[w] = true;
                        stack.push(w);
                    }
                }
            }
            (j, side)
        })
        .collect()
}

fn method_b(c: &Circuit) -> Result<(f64, Vec<f64>)> {
    let pi = current_potential(c);
    let n = pi.dimension();
    let cuts = voltage_source_cuts(c);
    let l = cuts.len();

    // z_j = W x + w0: KCL on the `from` side of source j
    let mut w = DMatrix::zeros(l, n);
    let mut w0 = DVector::zeros(l);
    let resistors: Vec<usize> = c.indices_of(ElementKind::Resistor).collect();
    for (j, (_, side)) in cuts.iter().enumerate() {
        for (k, e) in c.elements().iter().enumerate() {
            let (a, b) = c.terminals(k);
            let sign = match (side[a], side[b]) {
                (true, false) => -1.0,
                (false, true) => 1.0,
                _ => continue,
            };
            match e.kind {
                ElementKind::CurrentSource => w0[j] += sign * e.value,
                ElementKind::Resistor => {
                    let pos = resistors.iter().position(|&r| r == k).expect("resistor");
                    w0[j] += sign * pi.currents.offset[pos];
                    for &(cy, s) in &pi.currents.rows[pos] {
                        w[(j, cy)] += sign * s;
                    }
                }
                ElementKind::VoltageSource => {}
            }
        }
    }

    let dim = n + l;
    let mut q_mat = DMatrix::zeros(dim, dim);
    q_mat
        .view_mut((0, 0), (n, n))
        .copy_from(&(2.0 * &pi.quadratic.h));
    let mut q = DVector::zeros(dim);
    q.rows_mut(0, n).copy_from(&pi.quadratic.g);
    for (j, &(k, _)) in cuts.iter().enumerate() {
        q[n + j] = 2.0 * c.elements()[k].value;
    }
    let mut m = DMatrix::zeros(l, dim);
    m.view_mut((0, 0), (l, n)).copy_from(&(-&w));
    m.view_mut((0, n), (l, l)).fill_with_identity();
    let y = equality_qp(&q_mat, &q, &m, &w0)?;
    let x: Vec<f64> = y.as_slice()[..n].to_vec();
    Ok((pi.evaluate(&x), y.as_slice().to_vec()))
}

fn method_c(c: &Circuit) -> Result<(f64, Vec<f64>)> {
    let nb = fundamental_node_basis(c);
    let pv = voltage_potential(c);
    let d = pv.dimension();
    let free = d.saturating_sub(1);
    let sources: Vec<usize> = c.indices_of(ElementKind::CurrentSource).collect();
    let k = sources.len();

    // u_k = e(from) + offset(from) - e(to) - offset(to), supernode 0 at 0 V
    let mut g = DMatrix::zeros(k, free);
    let mut g0 = DVector::zeros(k);
    for (row, &s) in sources.iter().enumerate() {
        let (a, b) = c.terminals(s);
        g0[row] = nb.offsets[a] - nb.offsets[b];
        for (node, sign) in [(a, 1.0), (b, -1.0)] {
            let sn = nb.supernode_of[node];
            if sn > 0 {
                g[(row, sn - 1)] += sign;
            }
        }
    }

    let dim = free + k;
    let mut q_mat = DMatrix::zeros(dim, dim);
    if free > 0 {
        q_mat
            .view_mut((0, 0), (free, free))
            .copy_from(&(2.0 * pv.quadratic.h.view((1, 1), (free, free))));
    }
    let mut q = DVector::zeros(dim);
    q.rows_mut(0, free).copy_from(&pv.quadratic.g.rows(1, free));
    for (row, &s) in sources.iter().enumerate() {
        q[free + row] = 2.0 * c.elements()[s].value;
    }
    let mut m = DMatrix::zeros(k, dim);
    m.view_mut((0, 0), (k, free)).copy_from(&(-&g));
    m.view_mut((0, free), (k, k)).fill_with_identity();
    let y = equality_qp(&q_mat, &q, &m, &g0)?;

    let mut witness = Vec::with_capacity(d + k);
    if d > 0 {
        witness.push(0.0);
    }
    witness.extend_from_slice(y.as_slice());
    let loss = pv.evaluate(&witness[..d]);
    Ok((loss, witness))
}

fn method_d(c: &Circuit) -> Result<(f64, Vec<f64>)> {
    let dec = decompose(c)?;
    let (ev, pv) = if dec.cv.elements().is_empty() {
        (Vec::new(), 0.0)
    } else {
        voltage_potential(&dec.cv).minimize()?
    };
    let (xi, pi) = current_potential(&dec.ci).minimize()?;
    let mut witness = ev;
    witness.extend(xi);
    Ok((pv + pi, witness))
}
