//! Loss change under topology edits: closed-form predictions from terminal
//! quantities in the two sub-circuits, checked against two full solves.
//!
//! Every prediction reads four numbers per sub-circuit at the edit site:
//! the current through the site and the voltage across its terminals, before
//! and after the edit. Removal and attachment of the same element at the
//! same site have opposite effects, so attachments reuse the removal
//! formulas with the before and after frames exchanged.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::decomposition::decompose;
use crate::error::{Error, Result};
use crate::graph::{classify_attachment, classify_removal, resistors_idle, EditClass};
use crate::netlist::{validate, Circuit, Element, ElementKind};
use crate::sensitivity::{equivalent, EquivalentKind};
use crate::solver::{solve, Solution};
use crate::util::relative_difference;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TopologyEdit {
    /// Remove an element. Without an explicit mode, resistors on a cycle are
    /// deleted, bridge resistors and voltage sources are shorted, and
    /// current sources are opened.
    Remove { id: String, mode: Option<EditClass> },
    /// Attach an element between two existing nodes.
    Add(Element),
    /// Split element `target` (from `a` to `b`) at a new node: the target
    /// then runs from `a` to the new node and the new element from the new
    /// node to `b`.
    Subdivide {
        target: String,
        kind: ElementKind,
        id: String,
        value: f64,
    },
}

impl TopologyEdit {
    pub fn remove(id: &str) -> Self {
        TopologyEdit::Remove {
            id: id.to_string(),
            mode: None,
        }
    }

    /// The element id the edit is about, used to break ranking ties.
    pub fn element_id(&self) -> &str {
        match self {
            TopologyEdit::Remove { id, .. } => id,
            TopologyEdit::Add(e) => &e.id,
            TopologyEdit::Subdivide { id, .. } => id,
        }
    }

    pub fn classify(&self, c: &Circuit) -> Result<EditClass> {
        match self {
            TopologyEdit::Remove { id, mode } => match mode {
                Some(m) => {
                    c.require_element(id)?;
                    Ok(*m)
                }
                None => classify_removal(c, id),
            },
            TopologyEdit::Add(e) => classify_attachment(c, &e.from, &e.to).map_err(|_| {
                Error::InvalidEdit(format!("{} must connect two existing nodes", e.id))
            }),
            TopologyEdit::Subdivide { target, .. } => {
                c.require_element(target)?;
                Ok(EditClass::Serial)
            }
        }
    }
}

impl fmt::Display for TopologyEdit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyEdit::Remove { id, mode: None } => write!(f, "remove {id}"),
            TopologyEdit::Remove { id, mode: Some(m) } => {
                write!(f, "remove {id} {}", mode_name(*m))
            }
            TopologyEdit::Add(e) => write!(
                f,
                "add {} {} {} {} {:?}",
                e.kind.letter(),
                e.id,
                e.from,
                e.to,
                e.value
            ),
            TopologyEdit::Subdivide {
                target,
                kind,
                id,
                value,
            } => write!(
                f,
                "subdivide {target} with {} {id} {value:?}",
                kind.letter()
            ),
        }
    }
}

fn mode_name(m: EditClass) -> &'static str {
    match m {
        EditClass::Parallel => "parallel",
        EditClass::Serial => "serial",
    }
}

impl FromStr for TopologyEdit {
    type Err = Error;

    /// `remove <id> [parallel|serial]`, `add <K> <id> <n+> <n-> <value>`,
    /// `subdivide <target> with <K> <id> <value>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidEdit(format!("cannot parse edit {s:?}"));
        let kind = |k: &str| ElementKind::from_letter(k).ok_or_else(bad);
        let number = |v: &str| v.parse::<f64>().map_err(|_| bad());
        let tokens: Vec<&str> = s.split_whitespace().collect();
        let edit = match tokens.as_slice() {
            ["remove", id] => TopologyEdit::remove(id),
            ["remove", id, mode] => TopologyEdit::Remove {
                id: id.to_string(),
                mode: Some(match *mode {
                    "parallel" => EditClass::Parallel,
                    "serial" => EditClass::Serial,
                    _ => return Err(bad()),
                }),
            },
            ["add", k, id, from, to, value] => {
                let e = Element::new(kind(k)?, *id, *from, *to, number(value)?);
                e.check_value()?;
                TopologyEdit::Add(e)
            }
            ["subdivide", target, "with", k, id, value] => TopologyEdit::Subdivide {
                target: target.to_string(),
                kind: kind(k)?,
                id: id.to_string(),
                value: number(value)?,
            },
            _ => return Err(bad()),
        };
        Ok(edit)
    }
}

/// Node id created when `target` is subdivided.
fn midpoint(c: &Circuit, target: &str) -> String {
    c.fresh_node_id(&format!("{target}_mid"))
}

/// The post-edit circuit. It is not validated here.
pub fn apply(c: &Circuit, edit: &TopologyEdit) -> Result<Circuit> {
    match edit {
        TopologyEdit::Remove { id, .. } => {
            let e = c.require_element(id)?;
            match edit.classify(c)? {
                EditClass::Parallel => c.without_element(id),
                EditClass::Serial => c.replacing(id, Element::voltage(id, &e.from, &e.to, 0.0)),
            }
        }
        TopologyEdit::Add(e) => {
            if c.node_index(&e.from).is_none() || c.node_index(&e.to).is_none() {
                return Err(Error::InvalidEdit(format!(
                    "{} must connect two existing nodes",
                    e.id
                )));
            }
            if e.from == e.to {
                return Err(Error::SelfLoop(e.id.clone()));
            }
            c.with_element(e.clone())
        }
        TopologyEdit::Subdivide {
            target,
            kind,
            id,
            value,
        } => {
            let t = c.require_element(target)?;
            if c.element(id).is_some() {
                return Err(Error::DuplicateId(id.clone()));
            }
            let mid = midpoint(c, target);
            let added = Element::new(*kind, id.as_str(), mid.as_str(), t.to.as_str(), *value);
            added.check_value()?;
            let mut elements = c.elements().to_vec();
            let k = c.element_index(target).expect("target present");
            elements[k].to = mid;
            elements.push(added);
            Circuit::new(elements)
        }
    }
}

fn well_posed(c: &Circuit, stage: &str) -> Result<()> {
    let report = validate(c);
    if report.well_posed {
        Ok(())
    } else {
        Err(Error::EditIllPosed(format!(
            "{stage}: {}",
            report.faults[0].message
        )))
    }
}

/// Total loss after the edit minus total loss before, by two full solves.
pub fn delta_oracle(c: &Circuit, edit: &TopologyEdit) -> Result<f64> {
    let post = apply(c, edit)?;
    well_posed(&post, "post-edit circuit")?;
    Ok(solve(&post)?.total_loss - solve(c)?.total_loss)
}

/// Current through the edit site and voltage across its terminals in one
/// sub-circuit, before and after the edit.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct TerminalQuantities {
    pub i_before: f64,
    pub v_before: f64,
    pub i_after: f64,
    pub v_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaLossReport {
    pub edit: String,
    pub class: EditClass,
    /// Terminals `(m, n)` of the edit site.
    pub terminals: (String, String),
    pub dp_predicted: f64,
    pub dp_v: f64,
    pub dp_i: f64,
    pub dp_oracle: f64,
    /// Quantities in the voltage-controlled sub-circuit.
    pub voltage_side: TerminalQuantities,
    /// Quantities in the current-controlled sub-circuit.
    pub current_side: TerminalQuantities,
    pub agreement: f64,
    pub loss_before: f64,
    pub loss_after: f64,
    /// Larger natural loss scale of the two circuits.
    pub natural_power: f64,
}

impl DeltaLossReport {
    /// `agreement` relative to the size of the losses involved, never less
    /// than 1e-12 of the natural loss scale.
    pub fn relative_error(&self) -> f64 {
        relative_difference(
            self.dp_predicted,
            self.dp_oracle,
            self.loss_before
                .max(self.loss_after)
                .max(1e-12 * self.natural_power),
        )
    }
}

/// Where the edit acts: the element carrying the site current before and
/// after, and the terminal pair.
struct Site {
    before: Option<String>,
    after: Option<String>,
    m: String,
    n: String,
}

fn site_of(c: &Circuit, post: &Circuit, edit: &TopologyEdit) -> Result<Site> {
    Ok(match edit {
        TopologyEdit::Remove { id, .. } => {
            let e = c.require_element(id)?;
            Site {
                before: Some(id.clone()),
                after: post.element(id).map(|_| id.clone()),
                m: e.from.clone(),
                n: e.to.clone(),
            }
        }
        TopologyEdit::Add(e) => Site {
            before: None,
            after: Some(e.id.clone()),
            m: e.from.clone(),
            n: e.to.clone(),
        },
        TopologyEdit::Subdivide { target, id, .. } => {
            let x = post.require_element(id)?;
            Site {
                before: Some(target.clone()),
                after: Some(id.clone()),
                m: x.from.clone(),
                n: x.to.clone(),
            }
        }
    })
}

/// Site current and terminal voltage. In a circuit whose resistors are
/// idle by structure the current is exactly zero wherever it must be, rather
/// than rounding noise.
fn read(c: &Circuit, s: &Solution, element: &Option<String>, m: &str, n: &str) -> (f64, f64) {
    let idle = resistors_idle(c);
    let i = element
        .as_deref()
        .and_then(|id| {
            let k = c.element_index(id)?;
            let zero = idle
                && (c.elements()[k].kind == ElementKind::Resistor
                    || c.count(ElementKind::CurrentSource) == 0);
            Some(if zero { 0.0 } else { s.currents[k] })
        })
        .unwrap_or(0.0);
    let v = s.voltage_between(m, n).unwrap_or(0.0);
    (i, v)
}

fn quantities(
    pre: (&Circuit, &Solution),
    post: (&Circuit, &Solution),
    site: &Site,
) -> TerminalQuantities {
    let (i_before, v_before) = read(pre.0, pre.1, &site.before, &site.m, &site.n);
    let (i_after, v_after) = read(post.0, post.1, &site.after, &site.m, &site.n);
    TerminalQuantities {
        i_before,
        v_before,
        i_after,
        v_after,
    }
}

fn sub_solve(c: &Circuit) -> Result<Option<Solution>> {
    if c.elements().is_empty() {
        Ok(None)
    } else {
        solve(c).map(Some)
    }
}

fn side(pre: &Circuit, post: &Circuit, site: &Site) -> Result<TerminalQuantities> {
    match (sub_solve(pre)?, sub_solve(post)?) {
        (Some(a), Some(b)) => Ok(quantities((pre, &a), (post, &b), site)),
        (Some(a), None) => {
            let (i, v) = read(pre, &a, &site.before, &site.m, &site.n);
            Ok(TerminalQuantities {
                i_before: i,
                v_before: v,
                ..Default::default()
            })
        }
        (None, Some(b)) => {
            let (i, v) = read(post, &b, &site.after, &site.m, &site.n);
            Ok(TerminalQuantities {
                i_after: i,
                v_after: v,
                ..Default::default()
            })
        }
        (None, None) => Ok(TerminalQuantities::default()),
    }
}

fn unsupported(edit: &TopologyEdit, why: &str) -> Error {
    Error::UnsupportedEdit(format!("{edit}: {why}"))
}

pub fn predict_delta(c: &Circuit, edit: &TopologyEdit) -> Result<DeltaLossReport> {
    let class = edit.classify(c)?;
    let post = apply(c, edit)?;
    well_posed(c, "pre-edit circuit")?;
    well_posed(&post, "post-edit circuit")?;
    let site = site_of(c, &post, edit)?;
    let ill = |e: Error| match e {
        Error::DegenerateSubcircuit { reason, .. } => Error::EditIllPosed(reason),
        other => other,
    };
    let pre_d = decompose(c).map_err(ill)?;
    let post_d = decompose(&post).map_err(ill)?;

    let (vs, is) = rayon::join(
        || side(&pre_d.cv, &post_d.cv, &site),
        || side(&pre_d.ci, &post_d.ci, &site),
    );
    let (vs, is) = (vs?, is?);

    let (dp_v, dp_i) = match edit {
        TopologyEdit::Remove { id, .. } => {
            let e = c.require_element(id)?;
            match (e.kind, class) {
                (ElementKind::Resistor, EditClass::Parallel) => {
                    (-vs.i_before * vs.v_after, is.i_before * is.v_after)
                }
                (ElementKind::Resistor, EditClass::Serial) => {
                    (vs.i_after * vs.v_before, -is.i_after * is.v_before)
                }
                (ElementKind::CurrentSource, EditClass::Parallel) => {
                    (0.0, e.value * (is.v_before + is.v_after))
                }
                (ElementKind::VoltageSource, EditClass::Serial) => {
                    (e.value * (vs.i_before + vs.i_after), 0.0)
                }
                (ElementKind::CurrentSource, EditClass::Serial) => {
                    return Err(unsupported(
                        edit,
                        "a current source is only removed by opening it",
                    ))
                }
                (ElementKind::VoltageSource, EditClass::Parallel) => {
                    return Err(unsupported(
                        edit,
                        "a voltage source is only removed by shorting it",
                    ))
                }
            }
        }
        TopologyEdit::Add(e) => match e.kind {
            ElementKind::Resistor => (vs.i_after * vs.v_before, -is.i_after * is.v_before),
            ElementKind::CurrentSource => (0.0, -e.value * (is.v_before + is.v_after)),
            ElementKind::VoltageSource => {
                // attach a short first, then raise it to the source value
                let short = Element::voltage(&e.id, &e.from, &e.to, 0.0);
                let mid = pre_d.cv.with_element(short)?;
                well_posed(&mid, "shorted intermediate circuit")?;
                let i_mid = if resistors_idle(&mid) {
                    0.0
                } else {
                    solve(&mid)?.current(&e.id).expect("short present")
                };
                (
                    i_mid * vs.v_before - e.value * (vs.i_after + i_mid),
                    -is.i_after * is.v_before,
                )
            }
        },
        TopologyEdit::Subdivide { kind, value, .. } => match kind {
            ElementKind::Resistor => (-vs.i_before * vs.v_after, is.i_before * is.v_after),
            ElementKind::VoltageSource => (-value * (vs.i_after + vs.i_before), 0.0),
            ElementKind::CurrentSource => {
                return Err(unsupported(edit, "serial attachment of a current source"))
            }
        },
    };

    let (before, after) = rayon::join(|| solve(c), || solve(&post));
    let (loss_before, loss_after) = (before?.total_loss, after?.total_loss);
    let dp_predicted = dp_v + dp_i;
    let dp_oracle = loss_after - loss_before;
    Ok(DeltaLossReport {
        edit: edit.to_string(),
        class,
        terminals: (site.m, site.n),
        dp_predicted,
        dp_v,
        dp_i,
        dp_oracle,
        voltage_side: vs,
        current_side: is,
        agreement: (dp_predicted - dp_oracle).abs(),
        loss_before,
        loss_after,
        natural_power: c.natural_scales().power.max(post.natural_scales().power),
    })
}

/// Loss change of a resistor edit computed entirely inside the three-element
/// mixed equivalent seen from the edit site.
pub fn predict_delta_via_equivalent(c: &Circuit, edit: &TopologyEdit) -> Result<f64> {
    let attach_short = |circuit: &Circuit, m: &str, n: &str| -> Result<f64> {
        let eq = equivalent(circuit, m, n, EquivalentKind::Mixed)?.to_circuit();
        let short = Element::voltage(&eq.fresh_element_id("short"), m, n, 0.0);
        Ok(predict_delta(&eq, &TopologyEdit::Add(short))?.dp_predicted)
    };
    let attach = |circuit: &Circuit, r: &Element| -> Result<f64> {
        let eq = equivalent(circuit, &r.from, &r.to, EquivalentKind::Mixed)?.to_circuit();
        let mut load = r.clone();
        load.id = eq.fresh_element_id(&r.id);
        Ok(predict_delta(&eq, &TopologyEdit::Add(load))?.dp_predicted)
    };
    match edit {
        TopologyEdit::Add(e) if e.kind == ElementKind::Resistor => attach(c, e),
        TopologyEdit::Remove { id, .. } => {
            let e = c.require_element(id)?;
            if e.kind != ElementKind::Resistor {
                return Err(unsupported(
                    edit,
                    "only resistor edits reduce to an equivalent",
                ));
            }
            match edit.classify(c)? {
                EditClass::Parallel => {
                    let rest = c.without_element(id)?;
                    well_posed(&rest, "post-edit circuit")?;
                    Ok(-attach(&rest, e)?)
                }
                EditClass::Serial => attach_short(c, &e.from, &e.to),
            }
        }
        TopologyEdit::Subdivide {
            kind: ElementKind::Resistor,
            id,
            ..
        } => {
            let post = apply(c, edit)?;
            well_posed(&post, "post-edit circuit")?;
            let x = post.require_element(id)?;
            Ok(-attach_short(&post, &x.from, &x.to)?)
        }
        _ => Err(unsupported(
            edit,
            "only resistor edits reduce to an equivalent",
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedEdit {
    pub edit: String,
    pub report: DeltaLossReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcludedEdit {
    pub edit: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking {
    pub ranked: Vec<RankedEdit>,
    pub excluded: Vec<ExcludedEdit>,
}

/// Candidates in ascending order of predicted loss change. Candidates whose
/// prediction fails are listed separately with the reason.
pub fn rank_switchings(c: &Circuit, candidates: &[TopologyEdit]) -> Ranking {
    let outcomes: Vec<(&TopologyEdit, Result<DeltaLossReport>)> = candidates
        .par_iter()
        .map(|e| (e, predict_delta(c, e)))
        .collect();
    let mut ranked = Vec::new();
    let mut excluded = Vec::new();
    for (edit, outcome) in outcomes {
        match outcome {
            Ok(report) => ranked.push((edit, report)),
            Err(err) => excluded.push(ExcludedEdit {
                edit: edit.to_string(),
                reason: err.to_string(),
            }),
        }
    }
    ranked.sort_by(|(ea, a), (eb, b)| {
        a.dp_predicted
            .total_cmp(&b.dp_predicted)
            .then_with(|| ea.element_id().cmp(eb.element_id()))
            .then_with(|| a.edit.cmp(&b.edit))
    });
    Ranking {
        ranked: ranked
            .into_iter()
            .map(|(e, report)| RankedEdit {
                edit: e.to_string(),
                report,
            })
            .collect(),
        excluded,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarityReport {
    pub v_before: f64,
    pub v_after: f64,
    pub holds: bool,
}

/// Attaches `r` ohms across `(m, n)` and compares the terminal voltage.
pub fn polarity_check(c: &Circuit, m: &str, n: &str, r: f64) -> Result<PolarityReport> {
    let load = Element::resistor(&c.fresh_element_id("load"), m, n, r);
    load.check_value()?;
    let before = solve(c)?;
    let after = solve(&c.with_element(load)?)?;
    let v_before = before
        .voltage_between(m, n)
        .ok_or_else(|| Error::UnknownNode(m.into()))?;
    let v_after = after.voltage_between(m, n).expect("same nodes");
    let scale = before.voltage_scale().max(after.voltage_scale());
    let tol = 1e-12 * scale;
    let holds = v_after.abs() <= v_before.abs() + tol && v_after * v_before >= -tol * scale;
    Ok(PolarityReport {
        v_before,
        v_after,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::netlist::parse_netlist;
    use approx::assert_relative_eq;

    fn edit(s: &str) -> TopologyEdit {
        s.parse().unwrap()
    }

    #[test]
    fn grammar_round_trips() {
        for s in [
            "remove r2",
            "remove r2 serial",
            "add R x 1 2 0.5",
            "add V y 1 0 2.0",
            "subdivide r1 with V s 1.5",
        ] {
            assert_eq!(edit(s).to_string(), s);
        }
        assert!("remove".parse::<TopologyEdit>().is_err());
        assert!("add R x 1 2 -1".parse::<TopologyEdit>().is_err());
    }

    #[test]
    fn oracle_deltas_on_trivial_fixtures() {
        let d = delta_oracle(&fixtures::voltage_parallel_pair(), &edit("remove r2")).unwrap();
        assert_relative_eq!(d, -1.0, epsilon = 1e-14);
        let d = delta_oracle(&fixtures::current_parallel_pair(), &edit("remove r2")).unwrap();
        assert_relative_eq!(d, 0.5, epsilon = 1e-14);
        let d = delta_oracle(&fixtures::voltage_series_pair(), &edit("remove r2 serial")).unwrap();
        assert_relative_eq!(d, 0.5, epsilon = 1e-14);
        // with the source shorted the pair is parallel, so plain removal deletes
        let d = delta_oracle(&fixtures::voltage_series_pair(), &edit("remove r2")).unwrap();
        assert_relative_eq!(d, -0.5, epsilon = 1e-14);
    }

    #[test]
    fn delta_signs_on_small_fixtures() {
        let r = predict_delta(&fixtures::voltage_parallel_pair(), &edit("remove r2")).unwrap();
        assert_eq!(r.class, EditClass::Parallel);
        assert_relative_eq!(r.dp_v, -1.0, epsilon = 1e-14);
        assert_eq!(r.dp_i, 0.0);

        let r = predict_delta(&fixtures::current_parallel_pair(), &edit("remove r2")).unwrap();
        assert_relative_eq!(r.dp_i, 0.5, epsilon = 1e-14);
        assert_eq!(r.dp_v, 0.0);

        let r = predict_delta(&fixtures::voltage_series_pair(), &edit("remove r2 serial")).unwrap();
        assert_eq!(r.class, EditClass::Serial);
        assert_relative_eq!(r.dp_v, 0.5, epsilon = 1e-14);

        let r = predict_delta(&fixtures::current_series_pair(), &edit("remove r2")).unwrap();
        assert_eq!(r.class, EditClass::Serial);
        assert_relative_eq!(r.dp_i, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn source_removals() {
        let c = fixtures::voltage_across_resistor();
        let r = predict_delta(&c, &edit("remove s")).unwrap();
        assert_eq!(r.dp_i, 0.0);
        assert_relative_eq!(r.dp_v, -1.0, epsilon = 1e-14);
        assert_relative_eq!(r.dp_oracle, -1.0, epsilon = 1e-14);

        let c = fixtures::three_node_mixed();
        let r = predict_delta(&c, &edit("remove i")).unwrap();
        assert_eq!(r.dp_v, 0.0);
        assert!(r.agreement < 1e-13);
    }

    #[test]
    fn paradox_removal_raises_loss() {
        let c = fixtures::paradox();
        let before = solve(&c).unwrap();
        assert!(before.consumed[c.element_index("k").unwrap()] < 0.0);
        let r = predict_delta(&c, &edit("remove k")).unwrap();
        assert!(r.current_side.v_before.abs() < 1e-12);
        assert_relative_eq!(r.current_side.v_after, 0.125, epsilon = 1e-12);
        assert_relative_eq!(r.dp_i, 0.03125, epsilon = 1e-12);
        assert_relative_eq!(r.dp_oracle, 0.03125, epsilon = 1e-12);
        assert!(r.loss_after > r.loss_before);
    }

    #[test]
    fn attachments_mirror_removals() {
        let c = fixtures::three_node_mixed();
        for e in [
            "add R x 1 2 0.7",
            "add R x 0 2 3",
            "add I x 1 2 0.4",
            "add V x 2 0 0.3",
            "subdivide r1 with R x 2",
            "subdivide r2 with V x 0.5",
            "remove r1 serial",
        ] {
            let r = predict_delta(&c, &edit(e)).unwrap();
            assert!(r.relative_error() < 1e-12, "{e}: {r:?}");
        }
        let add = predict_delta(&c, &edit("add R x 1 2 0.7")).unwrap();
        let post = apply(&c, &edit("add R x 1 2 0.7")).unwrap();
        let back = predict_delta(&post, &edit("remove x")).unwrap();
        assert_relative_eq!(add.dp_predicted, -back.dp_predicted, max_relative = 1e-12);
    }

    #[test]
    fn unsupported_and_ill_posed_edits() {
        let c = fixtures::three_node_mixed();
        assert!(matches!(
            predict_delta(&c, &edit("subdivide r1 with I x 1")),
            Err(Error::UnsupportedEdit(_))
        ));
        assert!(delta_oracle(&c, &edit("subdivide r1 with I x 1")).is_ok());
        assert!(matches!(
            predict_delta(&c, &edit("add R x 1 9 1")),
            Err(Error::InvalidEdit(_))
        ));
        // a second source across the first one closes a voltage loop
        assert!(matches!(
            predict_delta(&c, &edit("add V x 0 1 1")),
            Err(Error::EditIllPosed(_))
        ));
    }

    #[test]
    fn equivalent_prediction_matches() {
        let c = fixtures::three_node_mixed();
        for e in [
            "add R x 1 2 1",
            "remove r1",
            "remove r2",
            "subdivide r1 with R x 2",
        ] {
            let full = predict_delta(&c, &edit(e)).unwrap().dp_predicted;
            let eq = predict_delta_via_equivalent(&c, &edit(e)).unwrap();
            assert_relative_eq!(full, eq, max_relative = 1e-12);
        }
    }

    #[test]
    fn ranking_orders_by_predicted_change() {
        let c = parse_netlist("V v 1 0 1\nR r1 1 0 4\nR r2 1 0 1\nR r3 1 0 2").unwrap();
        let cands: Vec<TopologyEdit> = ["remove r3", "remove r2", "remove v", "remove r9"]
            .iter()
            .map(|s| edit(s))
            .collect();
        let ranking = rank_switchings(&c, &cands);
        let order: Vec<&str> = ranking.ranked.iter().map(|r| r.edit.as_str()).collect();
        assert_eq!(order, ["remove v", "remove r2", "remove r3"]);
        assert_eq!(ranking.excluded.len(), 1);
        assert!(rank_switchings(&c, &[]).ranked.is_empty());
    }

    #[test]
    fn polarity_examples() {
        let p = polarity_check(&fixtures::voltage_across_resistor(), "1", "0", 1.0).unwrap();
        assert!(p.holds);
        assert_relative_eq!(p.v_after, p.v_before);
        let c = parse_netlist("I i 0 1 1\nR r 1 0 1").unwrap();
        let p = polarity_check(&c, "1", "0", 1.0).unwrap();
        assert!(p.holds);
        assert_relative_eq!(p.v_after, 0.5, epsilon = 1e-15);
    }
}
