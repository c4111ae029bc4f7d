//! Small named circuits used throughout the tests, the acceptance suite and
//! the documentation.

use crate::netlist::{Circuit, Element};

fn build(elements: Vec<Element>) -> Circuit {
    Circuit::new(elements).expect("fixture elements are valid")
}

/// 1 V across 1 Ω.
pub fn voltage_across_resistor() -> Circuit {
    build(vec![
        Element::voltage("s", "1", "0", 1.0),
        Element::resistor("r", "1", "0", 1.0),
    ])
}

/// 1 V across two parallel 1 Ω resistors.
pub fn voltage_parallel_pair() -> Circuit {
    build(vec![
        Element::voltage("v", "1", "0", 1.0),
        Element::resistor("r1", "1", "0", 1.0),
        Element::resistor("r2", "1", "0", 1.0),
    ])
}

/// 1 A into two parallel 1 Ω resistors.
pub fn current_parallel_pair() -> Circuit {
    build(vec![
        Element::current("i", "0", "1", 1.0),
        Element::resistor("r1", "1", "0", 1.0),
        Element::resistor("r2", "1", "0", 1.0),
    ])
}

/// 1 V driving two 1 Ω resistors in series.
pub fn voltage_series_pair() -> Circuit {
    build(vec![
        Element::voltage("v", "1", "0", 1.0),
        Element::resistor("r1", "1", "2", 1.0),
        Element::resistor("r2", "2", "0", 1.0),
    ])
}

/// 1 A driven around a loop of two 1 Ω resistors in series.
pub fn current_series_pair() -> Circuit {
    build(vec![
        Element::current("i", "0", "1", 1.0),
        Element::resistor("r1", "1", "2", 1.0),
        Element::resistor("r2", "2", "0", 1.0),
    ])
}

/// Three nodes, one voltage source, one current source, two resistors.
/// Total loss 1 W, split 0.5 W / 0.5 W between the sub-circuits.
pub fn three_node_mixed() -> Circuit {
    build(vec![
        Element::voltage("v", "0", "1", 1.0),
        Element::resistor("r1", "1", "2", 1.0),
        Element::resistor("r2", "2", "0", 1.0),
        Element::current("i", "0", "2", 1.0),
    ])
}

/// A bank of four voltage sources hanging three resistors between two
/// supernodes: {1, 3, 4, 5, 6} and {2}. Node 5 sits `-e1 - e2` below node 1.
pub fn four_source_bank() -> Circuit {
    build(vec![
        Element::voltage("e1", "1", "3", 1.0),
        Element::voltage("e2", "3", "5", 2.0),
        Element::voltage("e3", "1", "4", 0.5),
        Element::voltage("e4", "4", "6", 1.5),
        Element::resistor("r1", "1", "2", 1.0),
        Element::resistor("r2", "5", "2", 2.0),
        Element::resistor("r3", "6", "2", 4.0),
    ])
}

/// Complete graph of unit resistors on four terminals with two voltage
/// sources and two current sources attached across terminal pairs.
pub fn complete_four_terminal() -> Circuit {
    let t = ["t1", "t2", "t3", "t4"];
    let mut elements = Vec::new();
    for a in 0..4 {
        for b in (a + 1)..4 {
            elements.push(Element::resistor(
                &format!("r{}{}", a + 1, b + 1),
                t[a],
                t[b],
                1.0,
            ));
        }
    }
    elements.push(Element::voltage("va", "t1", "t2", 1.0));
    elements.push(Element::voltage("vb", "t3", "t4", 2.0));
    elements.push(Element::current("ia", "t1", "t3", 0.5));
    elements.push(Element::current("ib", "t2", "t4", 0.25));
    build(elements)
}

/// Two current sources and one voltage source where removing the
/// power-delivering 0.25 A source `k` raises total loss from 0.5 W to
/// 0.53125 W. In the current-controlled sub-circuit the voltage across `k`
/// is 0 V before the removal and 0.125 V after it.
pub fn paradox() -> Circuit {
    build(vec![
        Element::voltage("v", "2", "0", 1.0),
        Element::resistor("r1", "0", "1", 1.0),
        Element::resistor("r2", "1", "2", 1.0),
        Element::current("k", "0", "1", 0.25),
        Element::current("j", "1", "2", 0.25),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::validate;

    #[test]
    fn all_fixtures_are_well_posed() {
        for c in [
            voltage_across_resistor(),
            voltage_parallel_pair(),
            current_parallel_pair(),
            voltage_series_pair(),
            current_series_pair(),
            three_node_mixed(),
            four_source_bank(),
            complete_four_terminal(),
            paradox(),
        ] {
            assert!(validate(&c).well_posed, "{c:?}");
        }
    }
}
