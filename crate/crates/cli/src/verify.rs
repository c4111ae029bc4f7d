//! Invariant suite run by `dcloss verify` on a single circuit.

use serde::Serialize;

use dcloss::decomposition::{decompose, superposition_check};
use dcloss::potentials::{compute_all, current_potential, LossResult};
use dcloss::reconfig::{polarity_check, predict_delta, TopologyEdit};
use dcloss::sensitivity::{reciprocity_residual, source_factors};
use dcloss::{solve, validate, Circuit, ElementKind, Error};

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn check(name: &'static str, value: f64, tolerance: f64, detail: impl Into<String>) -> Check {
    Check {
        name,
        passed: value <= tolerance,
        value,
        tolerance,
        detail: detail.into(),
    }
}

fn failed(name: &'static str, err: &Error) -> Check {
    Check {
        name,
        passed: false,
        value: 0.0,
        tolerance: 0.0,
        detail: err.to_string(),
    }
}

/// Runs every check. Tolerances are relative to the observed magnitude plus
/// 1e-12 of the circuit's natural scale, so idle circuits are not judged by
/// rounding noise.
pub fn run(c: &Circuit) -> Summary {
    let report = validate(c);
    let mut checks = vec![check(
        "validation",
        report.faults.len() as f64,
        0.0,
        report
            .faults
            .iter()
            .map(|f| f.message.clone())
            .collect::<Vec<_>>()
            .join("; "),
    )];
    if report.well_posed {
        checks.extend(analyses(c));
    }
    Summary {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn analyses(c: &Circuit) -> Vec<Check> {
    let nat = c.natural_scales();
    let mut out = Vec::new();

    let s = match solve(c) {
        Ok(s) => s,
        Err(e) => return vec![failed("solve", &e)],
    };
    out.push(check(
        "kirchhoff current law",
        s.kcl_residual(c),
        1e-12 * (s.current_scale() + nat.current),
        "max net current at a node",
    ));
    out.push(check(
        "ohm's law",
        s.ohm_residual(c),
        1e-12 * (s.voltage_scale() + nat.voltage),
        "max |v - iR| over resistors",
    ));
    out.push(check(
        "energy balance",
        s.energy_residual().abs(),
        1e-12 * (s.total_loss + nat.power),
        "sum of consumed power over all elements",
    ));

    match compute_all(c) {
        Ok(results) => out.push(check(
            "four loss methods agree",
            spread(&results),
            1e-9 * results.iter().fold(0.0_f64, |m, r| m.max(r.loss.abs())) + 1e-12 * nat.power,
            results
                .iter()
                .map(|r| format!("{}: {:.12e}", r.method, r.loss))
                .collect::<Vec<_>>()
                .join(", "),
        )),
        Err(e) => out.push(failed("four loss methods agree", &e)),
    }

    match superposition_check(c) {
        Ok(r) => {
            out.push(check(
                "superposition of loss",
                r.residual,
                1e-9 * r.p_total + 1e-12 * nat.power,
                format!(
                    "P {:.12e} = P_V {:.12e} + P_I {:.12e}",
                    r.p_total, r.p_v, r.p_i
                ),
            ));
            out.push(check(
                "superposition of currents",
                r.current_mismatch,
                1e-12 * (r.current_scale + nat.current),
                "max |i - i_V - i_I| over resistors",
            ));
            out.push(check(
                "orthogonality",
                r.cross_term.abs(),
                1e-12 * r.cross_scale,
                "sum of R i_V i_I over resistors",
            ));
        }
        Err(e) => out.push(failed("superposition of loss", &e)),
    }

    if c.count(ElementKind::VoltageSource) + c.count(ElementKind::CurrentSource) > 0 {
        match source_factors(c) {
            Ok(m) => out.push(check(
                "reciprocity",
                reciprocity_residual(&m),
                1e-9,
                "source factor symmetry",
            )),
            Err(e) => out.push(failed("reciprocity", &e)),
        }
    }

    out.push(removal_predictions(c));

    let mut violations = 0;
    for e in c.elements() {
        match polarity_check(c, &e.from, &e.to, 1.0) {
            Ok(p) if p.holds => {}
            _ => violations += 1,
        }
    }
    out.push(check(
        "polarity of attached resistors",
        violations as f64,
        0.0,
        "1 ohm attached across every element's terminals",
    ));

    if let Some(g) = gradient_check(c) {
        out.push(g);
    }
    out
}

fn spread(results: &[LossResult]) -> f64 {
    let (lo, hi) = results
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.loss), hi.max(r.loss))
        });
    hi - lo
}

fn removal_predictions(c: &Circuit) -> Check {
    let (mut worst, mut tested, mut skipped) = (0.0_f64, 0, 0);
    for e in c.elements() {
        match predict_delta(c, &TopologyEdit::remove(&e.id)) {
            Ok(r) => {
                worst = worst.max(r.relative_error());
                tested += 1;
            }
            Err(Error::EditIllPosed(_) | Error::UnsupportedEdit(_)) => skipped += 1,
            Err(err) => return failed("removal predictions", &err),
        }
    }
    check(
        "removal predictions",
        worst,
        1e-9,
        format!("{tested} removals predicted, {skipped} skipped as ill-posed or unsupported"),
    )
}

/// Gradient of the current potential of the current-controlled part at the
/// nodal solution's chord currents.
fn gradient_check(c: &Circuit) -> Option<Check> {
    let d = decompose(c).ok()?;
    if d.ci.count(ElementKind::CurrentSource) == 0 {
        return None;
    }
    let pi = current_potential(&d.ci);
    if pi.dimension() == 0 {
        return None;
    }
    let s = match solve(&d.ci) {
        Ok(s) => s,
        Err(e) => return Some(failed("current potential gradient", &e)),
    };
    let x: Vec<f64> = pi
        .chords
        .iter()
        .map(|id| s.current(id).unwrap_or(0.0))
        .collect();
    let worst = pi.gradient(&x).iter().fold(0.0_f64, |m, g| m.max(g.abs()));
    let drop =
        d.ci.indices_of(ElementKind::Resistor)
            .map(|k| (s.currents[k] * d.ci.elements()[k].value).abs())
            .fold(0.0_f64, f64::max);
    Some(check(
        "current potential gradient",
        worst,
        1e-8 * drop + 1e-12 * d.ci.natural_scales().voltage,
        format!("{} chord currents", x.len()),
    ))
}
