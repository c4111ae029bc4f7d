//! Splitting a circuit into its voltage-controlled part (current sources
//! opened) and its current-controlled part (voltage sources shorted).
//!
//! Shorts are kept as zero-volt sources, so both sub-circuits carry the same
//! element ids and terminal pairs as the original.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{current_sources_idle, voltage_sources_idle};
use crate::netlist::{validate, Circuit, ElementKind};
use crate::solver::{solve, Solution};

#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Voltage-controlled sub-circuit.
    pub cv: Circuit,
    /// Current-controlled sub-circuit.
    pub ci: Circuit,
    /// resistor id -> (id in `cv`, id in `ci`)
    pub resistor_correspondence: Vec<(String, String, String)>,
    pub warnings: Vec<String>,
}

pub fn decompose(c: &Circuit) -> Result<Decomposition> {
    let cv = Circuit::new(
        c.elements()
            .iter()
            .filter(|e| e.kind != ElementKind::CurrentSource)
            .cloned()
            .collect(),
    )?;
    let ci = c.map_sources(|_, e| match e.kind {
        ElementKind::VoltageSource => 0.0,
        _ => e.value,
    });

    let mut warnings = Vec::new();
    for node in c.nodes() {
        if cv.node_index(node).is_none() {
            warnings.push(format!(
                "node {node} touches only current sources and is dropped from the voltage-controlled sub-circuit"
            ));
        }
    }
    for (label, sub) in [("voltage-controlled", &cv), ("current-controlled", &ci)] {
        if sub.elements().is_empty() {
            continue;
        }
        let report = validate(sub);
        if !report.well_posed {
            let culprits = report
                .faults
                .iter()
                .flat_map(|f| f.elements.iter().cloned())
                .collect();
            return Err(Error::DegenerateSubcircuit {
                reason: format!("{label} sub-circuit: {}", report.faults[0].message),
                culprits,
            });
        }
    }

    let resistor_correspondence = c
        .indices_of(ElementKind::Resistor)
        .map(|k| {
            let id = &c.elements()[k].id;
            (id.clone(), id.clone(), id.clone())
        })
        .collect();
    Ok(Decomposition {
        cv,
        ci,
        resistor_correspondence,
        warnings,
    })
}

/// Loss of a sub-circuit that may have no elements at all.
fn sub_solution(c: &Circuit) -> Result<Option<Solution>> {
    if c.elements().is_empty() {
        Ok(None)
    } else {
        solve(c).map(Some)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperpositionReport {
    pub p_total: f64,
    pub p_v: f64,
    pub p_i: f64,
    /// |p_total - p_v - p_i|
    pub residual: f64,
    /// Σ R · i_V · i_I over resistors.
    pub cross_term: f64,
    /// ‖i_V‖₂ · ‖i_I‖₂ · max R, the natural size of `cross_term`.
    pub cross_scale: f64,
    /// max over resistors of |i_M - i_V - i_I|
    pub current_mismatch: f64,
    /// max |i_M| over resistors
    pub current_scale: f64,
}

/// A sub-circuit whose sources cannot drive resistor current by structure
/// contributes exact zeros rather than rounding noise.
pub fn superposition_check(c: &Circuit) -> Result<SuperpositionReport> {
    let d = decompose(c)?;
    let (full, (sv, si)) = rayon::join(
        || solve(c),
        || rayon::join(|| sub_solution(&d.cv), || sub_solution(&d.ci)),
    );
    let (full, mut sv, mut si) = (full?, sv?, si?);
    if voltage_sources_idle(c) {
        sv = None;
    }
    if current_sources_idle(c) {
        si = None;
    }

    let mut cross = 0.0;
    let (mut nv, mut ni) = (0.0, 0.0);
    let mut max_r: f64 = 0.0;
    let mut mismatch: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in c.indices_of(ElementKind::Resistor) {
        let e = &c.elements()[k];
        let im = full.currents[k];
        let iv = sv.as_ref().and_then(|s| s.current(&e.id)).unwrap_or(0.0);
        let ii = si.as_ref().and_then(|s| s.current(&e.id)).unwrap_or(0.0);
        cross += e.value * iv * ii;
        nv += iv * iv;
        ni += ii * ii;
        max_r = max_r.max(e.value);
        mismatch = mismatch.max((im - iv - ii).abs());
        scale = scale.max(im.abs());
    }
    let p_v = sv.map_or(0.0, |s| s.total_loss);
    let p_i = si.map_or(0.0, |s| s.total_loss);
    Ok(SuperpositionReport {
        p_total: full.total_loss,
        p_v,
        p_i,
        residual: (full.total_loss - p_v - p_i).abs(),
        cross_term: cross,
        cross_scale: nv.sqrt() * ni.sqrt() * max_r,
        current_mismatch: mismatch,
        current_scale: scale,
    })
}

/// Σ R · i_V · i_I over resistors, which vanishes on well-posed circuits.
pub fn orthogonality_residual(c: &Circuit) -> Result<f64> {
    Ok(superposition_check(c)?.cross_term)
}
