//! Causal inference as structured low-rank matrix completion.
//!
//! Block-masked panels (`randmat`), exact finite-n recovery certificates
//! (`equivalence`), the limiting spectra that govern them (`freeprob`), the
//! resulting worst-case phase transition (`phase`), a nuclear-norm
//! completion solver (`solver`) and the experiment harness that ties them
//! together (`harness`).

pub mod equivalence;
pub mod error;
pub mod freeprob;
pub mod harness;
pub mod linalg;
pub mod phase;
pub mod quad;
pub mod randmat;
pub mod solver;

pub use error::{Error, Result};
