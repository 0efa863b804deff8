//! Exact traces of Hecke operators on spaces of cusp forms of weight at least
//! two, with arbitrary level and Dirichlet character.
//!
//! The direct formula in [`trace`] works on twist-minimal spaces. The
//! [`oracle`] module computes the same quantity independently from the
//! full-space trace formula and two sieves, and [`basis`] turns traces into
//! q-expansion bases of the twist-minimal, newform and full spaces.

pub mod arith;
pub mod basis;
pub mod characters;
pub mod cyclo;
pub mod decomp;
pub mod error;
pub mod oracle;
pub mod quadratic;
pub mod trace;

pub use trace::{SpaceKind, SpaceSpec};

pub use characters::DirichletCharacter;
pub use cyclo::CycloNumber;
pub use error::{Error, Result};

