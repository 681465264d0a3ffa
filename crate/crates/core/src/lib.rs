//! Propositional inquisitive logic and the dynamic epistemic logic of
//! knowing how.
//!
//! The crate bundles four evaluators for knowing-how (support over states,
//! uniform resolutions, the RL translation and the reduction to plain S5),
//! the rewrite pipeline that removes `Kh` and `[]`, decision procedures
//! built on top of it, and a checker for Hilbert-style derivations.

pub mod decide;
pub mod error;
pub mod formula;
pub mod fuzz;
pub mod model;
pub mod proof;
pub mod resolution;
pub mod schema;
pub mod semantics;
pub mod transform;

pub use error::{Error, ParseError, Result};
pub use formula::{parse_formula, render_formula, Formula};
pub use model::{full_model, Model, ModelDocument, State};
