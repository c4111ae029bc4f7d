//! Reference steady-state solver: modified nodal analysis with one unknown
//! per non-reference node potential and one per voltage-source current,
//! factored densely with partial pivoting.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, LU};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::netlist::{Circuit, ElementKind};
use crate::util::{max_abs, norm1};

/// Below this reciprocal condition estimate the system counts as singular.
pub const RCOND_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    pub nodes: Vec<String>,
    /// Node potentials in `nodes` order; the first node is held at 0 V.
    pub potentials: Vec<f64>,
    pub elements: Vec<String>,
    pub currents: Vec<f64>,
    pub voltages: Vec<f64>,
    /// `voltage * current` per element; negative for power-delivering sources.
    pub consumed: Vec<f64>,
    pub total_loss: f64,
    #[serde(skip)]
    node_index: HashMap<String, usize>,
    #[serde(skip)]
    element_index: HashMap<String, usize>,
}

impl Solution {
    pub fn potential(&self, node: &str) -> Option<f64> {
        self.node_index.get(node).map(|&k| self.potentials[k])
    }

    pub fn current(&self, element: &str) -> Option<f64> {
        self.element_index.get(element).map(|&k| self.currents[k])
    }

    pub fn voltage(&self, element: &str) -> Option<f64> {
        self.element_index.get(element).map(|&k| self.voltages[k])
    }

    /// potential(m) - potential(n)
    pub fn voltage_between(&self, m: &str, n: &str) -> Option<f64> {
        Some(self.potential(m)? - self.potential(n)?)
    }

    /// Largest nodal current imbalance, absolute.
    pub fn kcl_residual(&self, c: &Circuit) -> f64 {
        let mut net = vec![0.0; c.node_count()];
        for k in 0..c.elements().len() {
            let (a, b) = c.terminals(k);
            net[a] += self.currents[k];
            net[b] -= self.currents[k];
        }
        max_abs(&net)
    }

    /// Largest |v - iR| over resistors.
    pub fn ohm_residual(&self, c: &Circuit) -> f64 {
        c.indices_of(ElementKind::Resistor)
            .map(|k| (self.voltages[k] - self.currents[k] * c.elements()[k].value).abs())
            .fold(0.0, f64::max)
    }

    /// Sum of consumed power over every element, which should vanish.
    pub fn energy_residual(&self) -> f64 {
        self.consumed.iter().sum()
    }

    pub fn current_scale(&self) -> f64 {
        max_abs(&self.currents)
    }

    pub fn voltage_scale(&self) -> f64 {
        max_abs(&self.voltages).max(max_abs(&self.potentials))
    }
}

/// Factored nodal system for one circuit topology. Source values can be
/// swapped without refactoring.
pub struct Oracle<'a> {
    circuit: &'a Circuit,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    vsource_rows: Vec<(usize, usize)>,
    rcond: f64,
}

impl<'a> Oracle<'a> {
    pub fn new(circuit: &'a Circuit) -> Result<Self> {
        let n = circuit.node_count();
        let vsources: Vec<usize> = circuit.indices_of(ElementKind::VoltageSource).collect();
        let dim = n.saturating_sub(1) + vsources.len();
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        // node k > 0 lives at row k - 1
        let row = |node: usize| node.checked_sub(1);
        for k in circuit.indices_of(ElementKind::Resistor) {
            let g = 1.0 / circuit.elements()[k].value;
            let (a, b) = circuit.terminals(k);
            if let Some(ra) = row(a) {
                m[(ra, ra)] += g;
            }
            if let Some(rb) = row(b) {
                m[(rb, rb)] += g;
            }
            if let (Some(ra), Some(rb)) = (row(a), row(b)) {
                m[(ra, rb)] -= g;
                m[(rb, ra)] -= g;
            }
        }
        let mut vsource_rows = Vec::with_capacity(vsources.len());
        for (j, &k) in vsources.iter().enumerate() {
            let r = n - 1 + j;
            let (a, b) = circuit.terminals(k);
            if let Some(ra) = row(a) {
                m[(ra, r)] += 1.0;
                m[(r, ra)] += 1.0;
            }
            if let Some(rb) = row(b) {
                m[(rb, r)] -= 1.0;
                m[(r, rb)] -= 1.0;
            }
            vsource_rows.push((k, r));
        }
        let norm = norm1(&m);
        let lu = m.lu();
        let rcond = if dim == 0 {
            1.0
        } else {
            match lu.try_inverse() {
                Some(inv) if norm > 0.0 => 1.0 / (norm * norm1(&inv)),
                _ => 0.0,
            }
        };
        if rcond.is_nan() || rcond < RCOND_THRESHOLD {
            return Err(Error::SingularSystem { rcond });
        }
        Ok(Oracle {
            circuit,
            lu,
            vsource_rows,
            rcond,
        })
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    /// Solves with the circuit's own source values.
    pub fn solution(&self) -> Solution {
        let values: Vec<f64> = self.circuit.elements().iter().map(|e| e.value).collect();
        self.solve_with(&values)
    }

    /// Solves with per-element source values (`values[k]` for element `k`;
    /// entries for resistors are ignored).
    pub fn solve_with(&self, values: &[f64]) -> Solution {
        let c = self.circuit;
        let n = c.node_count();
        let dim = self.lu.l().nrows();
        let mut rhs = DVector::<f64>::zeros(dim);
        for k in c.indices_of(ElementKind::CurrentSource) {
            let (a, b) = c.terminals(k);
            if a > 0 {
                rhs[a - 1] -= values[k];
            }
            if b > 0 {
                rhs[b - 1] += values[k];
            }
        }
        for &(k, r) in &self.vsource_rows {
            rhs[r] = values[k];
        }
        let x = if dim == 0 {
            rhs
        } else {
            self.lu
                .solve(&rhs)
                .expect("factorization checked at construction")
        };

        let mut potentials = vec![0.0; n];
        potentials[1..n].copy_from_slice(&x.as_slice()[..n.saturating_sub(1)]);
        let mut currents = vec![0.0; c.elements().len()];
        let mut voltages = vec![0.0; c.elements().len()];
        for (k, e) in c.elements().iter().enumerate() {
            let (a, b) = c.terminals(k);
            voltages[k] = potentials[a] - potentials[b];
            currents[k] = match e.kind {
                ElementKind::Resistor => voltages[k] / e.value,
                ElementKind::CurrentSource => values[k],
                ElementKind::VoltageSource => 0.0,
            };
        }
        for &(k, r) in &self.vsource_rows {
            currents[k] = x[r];
        }
        let consumed: Vec<f64> = voltages.iter().zip(&currents).map(|(v, i)| v * i).collect();
        let total_loss = c
            .indices_of(ElementKind::Resistor)
            .map(|k| currents[k] * currents[k] * c.elements()[k].value)
            .sum();
        Solution {
            nodes: c.nodes().to_vec(),
            potentials,
            elements: c.elements().iter().map(|e| e.id.clone()).collect(),
            currents,
            voltages,
            consumed,
            total_loss,
            node_index: c
                .nodes()
                .iter()
                .enumerate()
                .map(|(k, id)| (id.clone(), k))
                .collect(),
            element_index: c
                .elements()
                .iter()
                .enumerate()
                .map(|(k, e)| (e.id.clone(), k))
                .collect(),
        }
    }
}

/// Solves the circuit; the lexicographically smallest node is the reference.
pub fn solve(c: &Circuit) -> Result<Solution> {
    Ok(Oracle::new(c)?.solution())
}

/// Sum of i²R over resistors.
pub fn total_loss(s: &Solution) -> f64 {
    s.total_loss
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;
    use approx::assert_relative_eq;

    fn solved(text: &str) -> (Circuit, Solution) {
        let c = parse_netlist(text).unwrap();
        let s = solve(&c).unwrap();
        (c, s)
    }

    #[test]
    fn voltage_source_across_resistor() {
        let (c, s) = solved("V s 1 0 1\nR r 1 0 1");
        assert_relative_eq!(s.current("r").unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(total_loss(&s), 1.0, epsilon = 1e-15);
        // the source delivers: current runs from its `to` terminal through it
        assert_relative_eq!(s.current("s").unwrap(), -1.0, epsilon = 1e-15);
        assert!(s.kcl_residual(&c) < 1e-14);
        assert!(s.energy_residual().abs() < 1e-14);
    }

    #[test]
    fn current_source_into_parallel_pair() {
        let (_, s) = solved("I s 0 1 1\nR r1 1 0 1\nR r2 1 0 1");
        assert_relative_eq!(s.current("r1").unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(s.current("r2").unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(s.total_loss, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn three_node_mixed() {
        // hand solution: p1 = -1, p2 = 0, so r1 carries -1 A and r2 nothing
        let (c, s) = solved("V v 0 1 1\nR r1 1 2 1\nR r2 2 0 1\nI i 0 2 1");
        assert_relative_eq!(s.potential("1").unwrap(), -1.0, epsilon = 1e-15);
        assert_relative_eq!(s.potential("2").unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(s.total_loss, 1.0, epsilon = 1e-14);
        assert!(s.ohm_residual(&c) < 1e-14);
        assert!(s.energy_residual().abs() < 1e-14);
    }

    #[test]
    fn zero_sources_give_zero_loss() {
        let (_, s) = solved("V s 1 0 0\nR r 1 2 3\nR q 2 0 1\nI i 0 2 0");
        assert_eq!(s.total_loss, 0.0);
    }

    #[test]
    fn voltage_loop_is_singular() {
        let c = parse_netlist("V a 1 0 1\nV b 1 0 1\nR r 1 0 1").unwrap();
        assert!(matches!(solve(&c), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn floating_node_is_singular() {
        let c = parse_netlist("I s 0 1 1\nI t 1 0 1\nR r 0 2 1\nR q 2 0 1").unwrap();
        assert!(matches!(solve(&c), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn scaling_sources_scales_loss_quadratically() {
        let c = parse_netlist("V v 0 1 1.5\nR r1 1 2 2\nR r2 2 0 0.3\nI i 0 2 0.7\nR r3 1 0 4")
            .unwrap();
        let base = solve(&c).unwrap().total_loss;
        let scaled = solve(&c.map_sources(|_, e| 3.0 * e.value))
            .unwrap()
            .total_loss;
        assert_relative_eq!(scaled, 9.0 * base, max_relative = 1e-13);
    }
}
