//! Source factors and two-terminal equivalents.
//!
//! Every source has a dual quantity: the current through a voltage source,
//! the voltage across a current source. The source factor blocks hold the
//! derivative of each dual quantity with respect to each source value. They
//! are indexed `[cause][effect]`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::decomposition::decompose;
use crate::error::{Error, Result};
use crate::graph::Supernodes;
use crate::netlist::{Circuit, Element, ElementKind};
use crate::solver::{solve, Oracle, Solution};
use crate::util::max_abs;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceFactorMatrix {
    pub voltage_sources: Vec<String>,
    pub current_sources: Vec<String>,
    /// Current through voltage source `j` per volt of voltage source `i`.
    pub svv: DMatrix<f64>,
    /// Current through voltage source `j` per amp of current source `i`.
    pub siv: DMatrix<f64>,
    /// Voltage across current source `j` per volt of voltage source `i`.
    pub svi: DMatrix<f64>,
    /// Voltage across current source `j` per amp of current source `i`.
    pub sii: DMatrix<f64>,
    /// Geometric mean of the smallest and largest resistance, used to put
    /// the four blocks on a common scale.
    pub resistance_scale: f64,
}

pub fn source_factors(c: &Circuit) -> Result<SourceFactorMatrix> {
    let oracle = Oracle::new(c)?;
    let vs: Vec<usize> = c.indices_of(ElementKind::VoltageSource).collect();
    let is: Vec<usize> = c.indices_of(ElementKind::CurrentSource).collect();
    let (l, k) = (vs.len(), is.len());

    let unit = |src: usize| {
        let mut values = vec![0.0; c.elements().len()];
        values[src] = 1.0;
        oracle.solve_with(&values)
    };
    let causes: Vec<usize> = vs.iter().chain(&is).copied().collect();
    let columns: Vec<Solution> = causes.par_iter().map(|&s| unit(s)).collect();

    let mut m = SourceFactorMatrix {
        voltage_sources: vs.iter().map(|&x| c.elements()[x].id.clone()).collect(),
        current_sources: is.iter().map(|&x| c.elements()[x].id.clone()).collect(),
        svv: DMatrix::zeros(l, l),
        siv: DMatrix::zeros(k, l),
        svi: DMatrix::zeros(l, k),
        sii: DMatrix::zeros(k, k),
        resistance_scale: resistance_scale(c),
    };
    for (cause, s) in columns.iter().enumerate() {
        for (j, &e) in vs.iter().enumerate() {
            if cause < l {
                m.svv[(cause, j)] = s.currents[e];
            } else {
                m.siv[(cause - l, j)] = s.currents[e];
            }
        }
        for (j, &e) in is.iter().enumerate() {
            if cause < l {
                m.svi[(cause, j)] = s.voltages[e];
            } else {
                m.sii[(cause - l, j)] = s.voltages[e];
            }
        }
    }
    Ok(m)
}

fn max_norm(m: &DMatrix<f64>) -> f64 {
    max_abs(m.iter())
}

fn resistance_scale(c: &Circuit) -> f64 {
    let (lo, hi) = c
        .indices_of(ElementKind::Resistor)
        .map(|k| c.elements()[k].value)
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), r| {
            (lo.min(r), hi.max(r))
        });
    if hi > 0.0 {
        (lo * hi).sqrt()
    } else {
        1.0
    }
}

/// Worst of the three reciprocity defects. The blocks are made
/// dimensionless with `resistance_scale` and every defect is measured
/// against the largest entry of the whole matrix, so a block that is zero
/// by structure is not judged by its own rounding noise.
pub fn reciprocity_residual(m: &SourceFactorMatrix) -> f64 {
    let r0 = m.resistance_scale;
    let vv = max_norm(&(&m.svv - m.svv.transpose())) * r0;
    let ii = max_norm(&(&m.sii - m.sii.transpose())) / r0;
    let iv = max_norm(&(&m.siv + m.svi.transpose()));
    let scale = (max_norm(&m.svv) * r0)
        .max(max_norm(&m.sii) / r0)
        .max(max_norm(&m.siv))
        .max(max_norm(&m.svi));
    let worst = vv.max(ii).max(iv);
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquivalentKind {
    Thevenin,
    Norton,
    Mixed,
}

impl std::str::FromStr for EquivalentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "thevenin" => Ok(EquivalentKind::Thevenin),
            "norton" => Ok(EquivalentKind::Norton),
            "mixed" => Ok(EquivalentKind::Mixed),
            _ => Err(Error::InvalidEdit(format!("unknown equivalent kind {s:?}"))),
        }
    }
}

/// Two-terminal equivalent seen from `(m, n)`: a resistance `r_eq` from `m`
/// to an internal node, a voltage source `v_eq` from there to `n`, and a
/// current source `i_eq` from `n` into `m`. Thevenin has `i_eq = 0`; Norton
/// has `v_eq = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equivalent {
    pub kind: EquivalentKind,
    pub v_eq: f64,
    pub i_eq: f64,
    pub r_eq: f64,
    pub terminals: (String, String),
}

impl Equivalent {
    /// Open-circuit voltage `v(m) - v(n)`.
    pub fn open_circuit_voltage(&self) -> f64 {
        self.v_eq + self.i_eq * self.r_eq
    }

    /// The equivalent as a three-element circuit on the original terminal
    /// names. A zero `r_eq` becomes a zero-volt source.
    pub fn to_circuit(&self) -> Circuit {
        let (m, n) = (&self.terminals.0, &self.terminals.1);
        let mut x = String::from("x");
        while &x == m || &x == n {
            x.push('_');
        }
        let series = if self.r_eq > 0.0 {
            Element::resistor("r_eq", m, &x, self.r_eq)
        } else {
            Element::voltage("r_eq", m, &x, 0.0)
        };
        Circuit::new(vec![
            series,
            Element::voltage("v_eq", &x, n, self.v_eq),
            Element::current("i_eq", n, m, self.i_eq),
        ])
        .expect("equivalent elements are valid")
    }
}

/// Resistance between `m` and `n` with every source zeroed, measured by
/// driving one amp into `m` and out of `n`.
pub fn driving_point_resistance(c: &Circuit, m: &str, n: &str) -> Result<f64> {
    let zeroed = c.map_sources(|_, _| 0.0);
    let probe = Element::current(&c.fresh_element_id("probe"), n, m, 1.0);
    let s = solve(&zeroed.with_element(probe)?).map_err(|_| Error::NoEquivalent {
        m: m.to_string(),
        n: n.to_string(),
        reason: "terminals are not joined by resistors or voltage sources".into(),
    })?;
    Ok(s.voltage_between(m, n).expect("terminals present").max(0.0))
}

/// Current from `m` to `n` through an ideal short across the terminals.
pub fn short_circuit_current(c: &Circuit, m: &str, n: &str) -> Result<f64> {
    let id = c.fresh_element_id("short");
    let shorted = c.with_element(Element::voltage(&id, m, n, 0.0))?;
    Ok(solve(&shorted)?.current(&id).expect("short present"))
}

fn open_circuit_voltage(c: &Circuit, m: &str, n: &str) -> Result<f64> {
    match (c.node_index(m), c.node_index(n)) {
        (Some(_), Some(_)) => Ok(solve(c)?.voltage_between(m, n).expect("terminals present")),
        _ => Ok(0.0),
    }
}

pub fn equivalent(c: &Circuit, m: &str, n: &str, kind: EquivalentKind) -> Result<Equivalent> {
    c.require_node(m)?;
    c.require_node(n)?;
    if m == n {
        return Err(Error::NoEquivalent {
            m: m.into(),
            n: n.into(),
            reason: "terminals coincide".into(),
        });
    }
    let sn = Supernodes::of(c);
    let joined = sn.of_node[c.require_node(m)?] == sn.of_node[c.require_node(n)?];
    let r_eq = if joined {
        0.0
    } else {
        driving_point_resistance(c, m, n)?
    };
    let no_norton = || Error::NoEquivalent {
        m: m.into(),
        n: n.into(),
        reason: "terminals are joined by voltage sources alone".into(),
    };
    let (v_eq, i_eq) = match kind {
        EquivalentKind::Thevenin => (open_circuit_voltage(c, m, n)?, 0.0),
        EquivalentKind::Norton => {
            if r_eq == 0.0 {
                return Err(no_norton());
            }
            (0.0, short_circuit_current(c, m, n)?)
        }
        EquivalentKind::Mixed => {
            let d = decompose(c)?;
            let v = open_circuit_voltage(&d.cv, m, n)?;
            let i = if r_eq == 0.0 {
                0.0
            } else {
                short_circuit_current(&d.ci, m, n)?
            };
            (v, i)
        }
    };
    Ok(Equivalent {
        kind,
        v_eq,
        i_eq,
        r_eq,
        terminals: (m.to_string(), n.to_string()),
    })
}
