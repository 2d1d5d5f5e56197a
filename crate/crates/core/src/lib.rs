//! Stationary states of translation-invariant rings of driven, dissipative
//! Kerr cavities.
//!
//! The exact route assembles the equations of motion of all normal-ordered
//! correlators up to a truncation, reduces them by the ring's dihedral
//! symmetry and solves `M v = -I`. The approximate route expands the
//! single-cavity correlators to second order in the tunneling rate `J`.
//! A brute-force density-matrix solver serves as an independent check.

pub mod eom;
pub mod error;
pub mod index;
pub mod linalg;
pub mod observables;
pub mod oracle;
pub mod params;
pub mod pattern;
pub mod perturbative;
pub mod scan;
pub mod steady;
pub mod system;

pub use error::{Error, Result};
pub use index::{canonicalize, enumerate_canonical, CorrelatorIndex, PairIndex};
pub use params::{validate_params, RawParams, SystemParams};
