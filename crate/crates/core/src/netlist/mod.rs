//! Circuit descriptions: elements, the text netlist format, validation and
//! import of DC power-flow grid cases.
//!
//! Netlist lines have the form `<K> <id> <n+> <n-> <value>` with `K` one of
//! `R`, `V`, `I`. Everything after `#` is a comment. Node ids are arbitrary
//! whitespace-free tokens; no node is reserved as ground.
//!
//! Orientation is global: an element's current is measured from `from`
//! through the element to `to`, and its voltage is
//! `potential(from) - potential(to)`. Consumed power is `v * i` for every
//! element kind, so sources delivering power show a negative value.

mod grid;
mod validate;

pub use grid::{import_grid, parse_grid, Branch, Bus, GridCase};
pub use validate::{validate, Fault, FaultCode, ValidationReport};

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ElementKind {
    Resistor,
    VoltageSource,
    CurrentSource,
}

impl ElementKind {
    pub fn letter(self) -> char {
        match self {
            ElementKind::Resistor => 'R',
            ElementKind::VoltageSource => 'V',
            ElementKind::CurrentSource => 'I',
        }
    }

    pub fn from_letter(s: &str) -> Option<Self> {
        match s {
            "R" => Some(ElementKind::Resistor),
            "V" => Some(ElementKind::VoltageSource),
            "I" => Some(ElementKind::CurrentSource),
            _ => None,
        }
    }

    pub fn is_source(self) -> bool {
        !matches!(self, ElementKind::Resistor)
    }
}

/// A two-terminal element. `value` is ohms, volts or amps depending on kind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Element {
    pub id: String,
    pub kind: ElementKind,
    pub from: String,
    pub to: String,
    pub value: f64,
}

impl Element {
    pub fn new(
        kind: ElementKind,
        id: impl Into<String>,
        from: impl Into<String>,
        to: impl Into<String>,
        value: f64,
    ) -> Self {
        Element {
            id: id.into(),
            kind,
            from: from.into(),
            to: to.into(),
            value,
        }
    }

    pub fn resistor(id: &str, from: &str, to: &str, ohms: f64) -> Self {
        Self::new(ElementKind::Resistor, id, from, to, ohms)
    }

    pub fn voltage(id: &str, from: &str, to: &str, volts: f64) -> Self {
        Self::new(ElementKind::VoltageSource, id, from, to, volts)
    }

    pub fn current(id: &str, from: &str, to: &str, amps: f64) -> Self {
        Self::new(ElementKind::CurrentSource, id, from, to, amps)
    }

    /// Checks the value invariants: positive finite resistance, finite source.
    pub fn check_value(&self) -> Result<()> {
        match self.kind {
            ElementKind::Resistor if !(self.value > 0.0 && self.value.is_finite()) => {
                Err(Error::NonPositiveResistance {
                    id: self.id.clone(),
                    value: self.value,
                })
            }
            _ if !self.value.is_finite() => Err(Error::NonFiniteValue {
                id: self.id.clone(),
                value: self.value,
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {:?}",
            self.kind.letter(),
            self.id,
            self.from,
            self.to,
            self.value
        )
    }
}

/// Which kinds of source a circuit contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CircuitClass {
    VoltageControlled,
    CurrentControlled,
    Mixed,
    Passive,
}

/// See [`Circuit::natural_scales`]. With `V = Σ|source volts|`,
/// `I = Σ|source amps|`: current `I + V/R_min`, voltage `V + I·R_max`,
/// power `V²/R_min + I²·R_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NaturalScales {
    pub current: f64,
    pub voltage: f64,
    pub power: f64,
}

/// An immutable circuit. Nodes are the element endpoints, kept in
/// lexicographic order; node 0 is the solver's reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    nodes: Vec<String>,
    elements: Vec<Element>,
    node_index: HashMap<String, usize>,
    element_index: HashMap<String, usize>,
}

impl Circuit {
    /// Builds a circuit, checking element ids and values. Self-loops are
    /// accepted here; only the netlist parser rejects them.
    pub fn new(elements: Vec<Element>) -> Result<Self> {
        let mut element_index = HashMap::with_capacity(elements.len());
        for (k, e) in elements.iter().enumerate() {
            e.check_value()?;
            if element_index.insert(e.id.clone(), k).is_some() {
                return Err(Error::DuplicateId(e.id.clone()));
            }
        }
        let nodes: Vec<String> = elements
            .iter()
            .flat_map(|e| [e.from.clone(), e.to.clone()])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let node_index = nodes
            .iter()
            .enumerate()
            .map(|(k, n)| (n.clone(), k))
            .collect();
        Ok(Circuit {
            nodes,
            elements,
            node_index,
            element_index,
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn require_node(&self, id: &str) -> Result<usize> {
        self.node_index(id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn element_index(&self, id: &str) -> Option<usize> {
        self.element_index.get(id).copied()
    }

    pub fn element(&self, id: &str) -> Option<&Element> {
        self.element_index(id).map(|k| &self.elements[k])
    }

    pub fn require_element(&self, id: &str) -> Result<&Element> {
        self.element(id)
            .ok_or_else(|| Error::UnknownElement(id.to_string()))
    }

    /// Endpoint node indices of element `k`.
    pub fn terminals(&self, k: usize) -> (usize, usize) {
        let e = &self.elements[k];
        (self.node_index[&e.from], self.node_index[&e.to])
    }

    /// Lexicographically smallest node id.
    pub fn reference_node(&self) -> Option<&str> {
        self.nodes.first().map(String::as_str)
    }

    pub fn indices_of(&self, kind: ElementKind) -> impl Iterator<Item = usize> + '_ {
        self.elements
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.kind == kind)
            .map(|(k, _)| k)
    }

    pub fn count(&self, kind: ElementKind) -> usize {
        self.indices_of(kind).count()
    }

    pub fn class(&self) -> CircuitClass {
        let v = self.count(ElementKind::VoltageSource) > 0;
        let i = self.count(ElementKind::CurrentSource) > 0;
        match (v, i) {
            (true, true) => CircuitClass::Mixed,
            (true, false) => CircuitClass::VoltageControlled,
            (false, true) => CircuitClass::CurrentControlled,
            (false, false) => CircuitClass::Passive,
        }
    }

    /// Current, voltage and loss magnitudes implied by the element values
    /// alone. They bound rounding noise in circuits whose sources drive
    /// little or no current.
    pub fn natural_scales(&self) -> NaturalScales {
        let sum = |kind| {
            self.indices_of(kind)
                .map(|k| self.elements[k].value.abs())
                .sum::<f64>()
        };
        let (v, i) = (
            sum(ElementKind::VoltageSource),
            sum(ElementKind::CurrentSource),
        );
        let (r_min, r_max) = self
            .indices_of(ElementKind::Resistor)
            .map(|k| self.elements[k].value)
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), r| {
                (lo.min(r), hi.max(r))
            });
        NaturalScales {
            current: i + v / r_min,
            voltage: v + i * r_max,
            power: v * v / r_min + i * i * r_max,
        }
    }

    pub fn into_elements(self) -> Vec<Element> {
        self.elements
    }

    /// Copy with one element appended.
    pub fn with_element(&self, e: Element) -> Result<Circuit> {
        let mut elements = self.elements.clone();
        elements.push(e);
        Circuit::new(elements)
    }

    /// Copy without element `id`.
    pub fn without_element(&self, id: &str) -> Result<Circuit> {
        self.require_element(id)?;
        Circuit::new(
            self.elements
                .iter()
                .filter(|e| e.id != id)
                .cloned()
                .collect(),
        )
    }

    /// Copy with element `id` replaced in place.
    pub fn replacing(&self, id: &str, replacement: Element) -> Result<Circuit> {
        let k = self
            .element_index(id)
            .ok_or_else(|| Error::UnknownElement(id.to_string()))?;
        let mut elements = self.elements.clone();
        elements[k] = replacement;
        Circuit::new(elements)
    }

    /// Copy with every source value rewritten by `f(kind, value)`.
    pub fn map_sources(&self, mut f: impl FnMut(usize, &Element) -> f64) -> Circuit {
        let elements = self
            .elements
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let mut e = e.clone();
                if e.kind.is_source() {
                    e.value = f(k, &e);
                }
                e
            })
            .collect();
        Circuit::new(elements).expect("source rewrite keeps ids and resistances")
    }

    /// A node id not present in the circuit, derived from `base`.
    pub fn fresh_node_id(&self, base: &str) -> String {
        let mut candidate = base.to_string();
        let mut k = 1;
        while self.node_index.contains_key(&candidate) {
            candidate = format!("{base}_{k}");
            k += 1;
        }
        candidate
    }

    /// An element id not present in the circuit, derived from `base`.
    pub fn fresh_element_id(&self, base: &str) -> String {
        let mut candidate = base.to_string();
        let mut k = 1;
        while self.element_index.contains_key(&candidate) {
            candidate = format!("{base}_{k}");
            k += 1;
        }
        candidate
    }
}

/// Parses netlist text. Elements keep file order.
pub fn parse_netlist(text: &str) -> Result<Circuit> {
    let mut elements = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 5 {
            return Err(Error::Syntax {
                line,
                message: format!("expected 5 fields, found {}", tokens.len()),
            });
        }
        let kind = ElementKind::from_letter(tokens[0]).ok_or_else(|| Error::Syntax {
            line,
            message: format!("unknown element kind {:?}", tokens[0]),
        })?;
        let value: f64 = tokens[4].parse().map_err(|_| Error::Syntax {
            line,
            message: format!("invalid number {:?}", tokens[4]),
        })?;
        if tokens[2] == tokens[3] {
            return Err(Error::SelfLoop(tokens[1].to_string()));
        }
        let e = Element::new(kind, tokens[1], tokens[2], tokens[3], value);
        e.check_value()?;
        elements.push(e);
    }
    if elements.is_empty() {
        return Err(Error::EmptyNetlist);
    }
    Circuit::new(elements)
}

/// Canonical netlist text: one element per line in circuit order.
pub fn serialize_netlist(c: &Circuit) -> String {
    let mut out = String::new();
    for e in c.elements() {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let c = parse_netlist("V s 1 0 1.0\nR r1 1 0 1.0").unwrap();
        assert_eq!(c.node_count(), 2);
        assert_eq!(c.elements().len(), 2);
        assert_eq!(c.reference_node(), Some("0"));
        assert_eq!(c.class(), CircuitClass::VoltageControlled);
    }

    #[test]
    fn empty_and_comment_only() {
        assert_eq!(parse_netlist(""), Err(Error::EmptyNetlist));
        assert_eq!(parse_netlist("# nothing\n\n  \n"), Err(Error::EmptyNetlist));
    }

    #[test]
    fn duplicate_id() {
        assert_eq!(
            parse_netlist("R a 1 2 1.0\nR a 2 3 1.0"),
            Err(Error::DuplicateId("a".into()))
        );
    }

    #[test]
    fn rejects_bad_values_and_shapes() {
        assert!(matches!(
            parse_netlist("R a 1 2 0"),
            Err(Error::NonPositiveResistance { .. })
        ));
        assert!(matches!(
            parse_netlist("R a 1 2 -3"),
            Err(Error::NonPositiveResistance { .. })
        ));
        assert!(matches!(
            parse_netlist("V a 1 2 inf"),
            Err(Error::NonFiniteValue { .. })
        ));
        assert_eq!(parse_netlist("R a 1 1 2"), Err(Error::SelfLoop("a".into())));
        assert!(matches!(
            parse_netlist("R a 1 2 1\nX b 1 2 1"),
            Err(Error::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_netlist("R a 1 2"),
            Err(Error::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_netlist("\nR a 1 2 one"),
            Err(Error::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn zero_valued_sources_are_allowed() {
        let c = parse_netlist("V v a b 0\nI i a b 0\nR r a b 1").unwrap();
        assert_eq!(c.class(), CircuitClass::Mixed);
    }

    #[test]
    fn crlf_and_comments() {
        let c = parse_netlist("# header\r\nR r1 a b 2.5 # trailing\r\nI s b a 1\r\n").unwrap();
        assert_eq!(c.elements()[0].value, 2.5);
        assert_eq!(c.elements()[1].kind, ElementKind::CurrentSource);
    }

    #[test]
    fn serialize_is_canonical() {
        let c = parse_netlist("R   r1 a b 2.50\nV v a   b 1e-3").unwrap();
        assert_eq!(serialize_netlist(&c), "R r1 a b 2.5\nV v a b 0.001\n");
    }
}
