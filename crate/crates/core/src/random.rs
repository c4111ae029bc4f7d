//! Seeded random circuits for property tests and the acceptance suite.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::netlist::{Circuit, Element, ElementKind};
use crate::util::DisjointSet;

/// Shape of the generated circuits.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub nodes: (usize, usize),
    pub elements: (usize, usize),
    pub min_voltage_sources: usize,
    pub min_current_sources: usize,
    pub allow_voltage_sources: bool,
    pub allow_current_sources: bool,
    /// Element values are drawn log-uniformly from this range.
    pub values: (f64, f64),
}

impl CircuitSpec {
    pub fn mixed() -> Self {
        CircuitSpec {
            nodes: (4, 12),
            elements: (6, 20),
            min_voltage_sources: 1,
            min_current_sources: 1,
            allow_voltage_sources: true,
            allow_current_sources: true,
            values: (0.1, 10.0),
        }
    }

    pub fn voltage_controlled() -> Self {
        CircuitSpec {
            min_current_sources: 0,
            allow_current_sources: false,
            ..Self::mixed()
        }
    }

    pub fn current_controlled() -> Self {
        CircuitSpec {
            min_voltage_sources: 0,
            allow_voltage_sources: false,
            ..Self::mixed()
        }
    }

    /// At least `k` sources of each kind.
    pub fn many_sources(k: usize) -> Self {
        CircuitSpec {
            nodes: (k + 2, 12),
            elements: (3 * k + 2, 24),
            min_voltage_sources: k,
            min_current_sources: k,
            ..Self::mixed()
        }
    }
}

fn log_uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn signed(rng: &mut impl Rng, range: (f64, f64)) -> f64 {
    let v = log_uniform(rng, range);
    if rng.random_bool(0.5) {
        v
    } else {
        -v
    }
}

fn node(i: usize) -> String {
    format!("n{i}")
}

/// A well-posed circuit: a random spanning tree of resistors and voltage
/// sources, then extra elements. Voltage sources never close a loop of
/// voltage sources.
pub fn random_circuit(rng: &mut impl Rng, spec: &CircuitSpec) -> Circuit {
    let n = rng.random_range(spec.nodes.0..=spec.nodes.1);
    let required = n - 1 + spec.min_current_sources;
    let m = rng
        .random_range(spec.elements.0..=spec.elements.1)
        .max(required);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut vcomp = DisjointSet::new(n);
    let mut elements = Vec::with_capacity(m);
    let mut counts = [0usize; 3];
    let mut push = |elements: &mut Vec<Element>, kind: ElementKind, a: usize, b: usize, v: f64| {
        let idx = match kind {
            ElementKind::Resistor => 0,
            ElementKind::VoltageSource => 1,
            ElementKind::CurrentSource => 2,
        };
        counts[idx] += 1;
        let id = format!("{}{}", kind.letter().to_ascii_lowercase(), elements.len());
        elements.push(Element::new(kind, id, node(a), node(b), v));
    };

    let tree_v = if spec.allow_voltage_sources {
        spec.min_voltage_sources.min(n - 1)
    } else {
        0
    };
    let mut tree_kinds: Vec<bool> = (0..n - 1).map(|i| i < tree_v).collect();
    tree_kinds.shuffle(rng);
    for (i, &is_v) in tree_kinds.iter().enumerate() {
        let child = order[i + 1];
        let parent = order[rng.random_range(0..=i)];
        let (a, b) = if rng.random_bool(0.5) {
            (parent, child)
        } else {
            (child, parent)
        };
        if is_v {
            vcomp.union_min(a, b);
            push(
                &mut elements,
                ElementKind::VoltageSource,
                a,
                b,
                signed(rng, spec.values),
            );
        } else {
            push(
                &mut elements,
                ElementKind::Resistor,
                a,
                b,
                log_uniform(rng, spec.values),
            );
        }
    }

    let mut need_i = if spec.allow_current_sources {
        spec.min_current_sources
    } else {
        0
    };
    while elements.len() < m {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let roll: f64 = rng.random();
        if need_i > 0 || (spec.allow_current_sources && roll < 0.2) {
            need_i = need_i.saturating_sub(1);
            push(
                &mut elements,
                ElementKind::CurrentSource,
                a,
                b,
                signed(rng, spec.values),
            );
        } else if spec.allow_voltage_sources && roll < 0.4 && vcomp.find(a) != vcomp.find(b) {
            vcomp.union_min(a, b);
            push(
                &mut elements,
                ElementKind::VoltageSource,
                a,
                b,
                signed(rng, spec.values),
            );
        } else {
            push(
                &mut elements,
                ElementKind::Resistor,
                a,
                b,
                log_uniform(rng, spec.values),
            );
        }
    }
    Circuit::new(elements).expect("generated values are valid")
}

/// Small circuits with no structural guarantees: voltage loops (some with
/// zero sum), floating current cuts and disconnected parts all occur.
pub fn random_degenerate(rng: &mut impl Rng) -> Circuit {
    let n = rng.random_range(2..=6);
    let m = rng.random_range(2..=8);
    let values = [1.0, -1.0, 2.0, 0.5];
    let elements = (0..m)
        .map(|k| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let kind = match rng.random_range(0..3) {
                0 => ElementKind::Resistor,
                1 => ElementKind::VoltageSource,
                _ => ElementKind::CurrentSource,
            };
            let value = match kind {
                ElementKind::Resistor => log_uniform(rng, (0.1, 10.0)),
                _ => values[rng.random_range(0..values.len())],
            };
            Element::new(kind, format!("e{k}"), node(a), node(b), value)
        })
        .collect();
    Circuit::new(elements).expect("generated values are valid")
}

/// `count` circuits from a fixed seed.
pub fn corpus(seed: u64, count: usize, spec: &CircuitSpec) -> Vec<Circuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_circuit(&mut rng, spec)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
