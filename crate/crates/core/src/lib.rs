//! Analysis of steady-state DC circuits built from resistors, voltage
//! sources and current sources.
//!
//! The crate splits a mixed-source circuit into its voltage-controlled and
//! current-controlled sub-circuits, computes the total I²R loss four
//! independent ways, and predicts how the loss changes under topology edits
//! from terminal quantities alone. A dense nodal solver ([`solver`]) serves as
//! the ground truth for every closed form.

pub mod decomposition;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod netlist;
pub mod potentials;
pub mod qp;
pub mod random;
pub mod reconfig;
pub mod sensitivity;
pub mod solver;
mod util;

pub use error::{Error, Result};
pub use netlist::{parse_netlist, serialize_netlist, validate, Circuit, Element, ElementKind};
pub use solver::{solve, Solution};
pub use util::relative_difference;
