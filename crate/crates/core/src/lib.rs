//! Steklov and boundary-Laplace spectra of triangulated planar domains, and
//! numerical verification of trace inequalities between them.

pub mod error;
pub mod fem;
pub mod hodge;
pub mod linalg;
pub mod majorize;
pub mod mesh;
pub mod spectra;
pub mod verify;

pub use error::{Error, Result};
