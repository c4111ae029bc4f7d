//! DC power-flow cases mapped onto current-driven circuits: bus angle is node
//! potential, branch flow is current, reactance is resistance.

use serde::Serialize;

use super::{Circuit, Element};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bus {
    pub id: String,
    pub injection: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub id: String,
    pub from: String,
    pub to: String,
    pub reactance: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct GridCase {
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
}

/// Parses `BUS <id> <injection>` and `BRANCH <id> <from> <to> <reactance>`
/// lines, with the netlist's comment and whitespace rules.
pub fn parse_grid(text: &str) -> Result<GridCase> {
    let mut g = GridCase::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let number = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Syntax {
                line,
                message: format!("invalid number {s:?}"),
            })
        };
        match tokens.as_slice() {
            ["BUS", id, inj] => g.buses.push(Bus {
                id: id.to_string(),
                injection: number(inj)?,
            }),
            ["BRANCH", id, from, to, x] => g.branches.push(Branch {
                id: id.to_string(),
                from: from.to_string(),
                to: to.to_string(),
                reactance: number(x)?,
            }),
            _ => {
                return Err(Error::Syntax {
                    line,
                    message: format!("unrecognised grid line {content:?}"),
                })
            }
        }
    }
    if g.buses.is_empty() {
        return Err(Error::EmptyNetlist);
    }
    Ok(g)
}

/// Maps a grid case onto a current-controlled circuit. The first bus in file
/// order is the angle reference: every other bus `k` gets a current source
/// `inj_<k>` from the reference bus into `k` carrying its injection, and each
/// branch becomes a resistor equal to its reactance.
pub fn import_grid(g: &GridCase) -> Result<Circuit> {
    let Some(reference) = g.buses.first() else {
        return Err(Error::EmptyNetlist);
    };
    let sum: f64 = g.buses.iter().map(|b| b.injection).sum();
    let magnitude: f64 = g.buses.iter().map(|b| b.injection.abs()).sum();
    if sum.abs() > 1e-12 * magnitude {
        return Err(Error::UnbalancedInjections { sum });
    }
    let mut seen = std::collections::HashSet::new();
    for b in &g.buses {
        if !seen.insert(b.id.as_str()) {
            return Err(Error::DuplicateId(b.id.clone()));
        }
    }
    let mut elements = Vec::with_capacity(g.buses.len() + g.branches.len());
    for br in &g.branches {
        for end in [&br.from, &br.to] {
            if !seen.contains(end.as_str()) {
                return Err(Error::UnknownNode(end.clone()));
            }
        }
        if br.from == br.to {
            return Err(Error::SelfLoop(br.id.clone()));
        }
        elements.push(Element::resistor(&br.id, &br.from, &br.to, br.reactance));
    }
    for b in g.buses.iter().skip(1) {
        elements.push(Element::current(
            &format!("inj_{}", b.id),
            &reference.id,
            &b.id,
            b.injection,
        ));
    }
    Circuit::new(elements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::CircuitClass;

    #[test]
    fn parses_grid_file() {
        let g = parse_grid("# case\nBUS a 1\nBUS b -1\nBRANCH l1 a b 0.5\n").unwrap();
        assert_eq!(g.buses.len(), 2);
        assert_eq!(g.branches[0].reactance, 0.5);
        assert!(matches!(
            parse_grid("BUS a 1\nGEN g a 1"),
            Err(Error::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn unbalanced_injections_rejected() {
        let g = parse_grid("BUS a 1\nBUS b -0.5\nBRANCH l a b 1").unwrap();
        assert!(matches!(
            import_grid(&g),
            Err(Error::UnbalancedInjections { .. })
        ));
    }

    #[test]
    fn imported_grid_is_current_controlled() {
        let g = parse_grid("BUS a 1\nBUS b -1\nBUS c 0\nBRANCH x a b 1\nBRANCH y b c 1").unwrap();
        let c = import_grid(&g).unwrap();
        assert_eq!(c.class(), CircuitClass::CurrentControlled);
        assert_eq!(c.element("inj_b").unwrap().from, "a");
    }

    #[test]
    fn unknown_branch_endpoint() {
        let g = parse_grid("BUS a 0\nBRANCH x a z 1").unwrap();
        assert_eq!(import_grid(&g), Err(Error::UnknownNode("z".into())));
    }
}
