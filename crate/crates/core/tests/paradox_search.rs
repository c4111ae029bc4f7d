//! Exhaustive search over three-node circuits with one voltage source, two
//! unit resistors and two current sources, for an active current source
//! whose removal raises the loss.

use dcloss::decomposition::decompose;
use dcloss::fixtures;
use dcloss::reconfig::{delta_oracle, predict_delta, TopologyEdit};
use dcloss::{solve, validate, Circuit, Element};

const PAIRS: [(&str, &str); 6] = [
    ("0", "1"),
    ("1", "0"),
    ("1", "2"),
    ("2", "1"),
    ("0", "2"),
    ("2", "0"),
];

fn candidates() -> Vec<Circuit> {
    let amps = [0.25, -0.25, 0.5];
    let mut out = Vec::new();
    for (ka, kb) in PAIRS {
        for (ja, jb) in PAIRS {
            for k in amps {
                for j in amps {
                    out.extend(
                        Circuit::new(vec![
                            Element::voltage("v", "2", "0", 1.0),
                            Element::resistor("r1", "0", "1", 1.0),
                            Element::resistor("r2", "1", "2", 1.0),
                            Element::current("k", ka, kb, k),
                            Element::current("j", ja, jb, j),
                        ])
                        .ok(),
                    );
                }
            }
        }
    }
    out
}

fn is_paradox(c: &Circuit) -> bool {
    let Ok(s) = solve(c) else { return false };
    let k = c.element_index("k").unwrap();
    s.consumed[k] < -1e-12 && delta_oracle(c, &TopologyEdit::remove("k")).is_ok_and(|dp| dp > 1e-12)
}

#[test]
fn search_finds_the_shipped_fixture() {
    let found: Vec<Circuit> = candidates()
        .into_iter()
        .filter(|c| validate(c).well_posed && is_paradox(c))
        .collect();
    assert!(!found.is_empty());
    assert!(found.contains(&fixtures::paradox()));
}

#[test]
fn shipped_fixture_numbers() {
    let c = fixtures::paradox();
    assert!(is_paradox(&c));
    let r = predict_delta(&c, &TopologyEdit::remove("k")).unwrap();
    assert!((r.loss_before - 0.5).abs() < 1e-12);
    assert!((r.loss_after - 0.53125).abs() < 1e-12);
    assert!(r.current_side.v_before.abs() < 1e-12);
    assert!((r.current_side.v_after - 0.125).abs() < 1e-12);
    assert!((r.dp_i - 0.25 * (0.0 + 0.125)).abs() < 1e-12);
    assert!(r.dp_v.abs() < 1e-12);

    let d = decompose(&c).unwrap();
    let p_i = solve(&d.ci).unwrap().total_loss;
    let after = solve(&decompose(&c.without_element("k").unwrap()).unwrap().ci)
        .unwrap()
        .total_loss;
    assert!((after - p_i - 0.03125).abs() < 1e-12);
}
