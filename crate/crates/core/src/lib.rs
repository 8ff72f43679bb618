//! Instrumented wave-front tracking for 1-D strictly hyperbolic systems of
//! conservation laws: Riemann solvers, an event-driven front-tracking
//! engine, Glimm functionals, wave/jump balance measures, shock-front
//! genealogy and the decay diagnostics built on top of them.

pub mod error;
pub mod linalg;
pub mod model;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use model::{
    burgers, burgers_on, linear_ld_system, p_system, p_system_on, polynomial_system, DomainBox,
    EigenStructure, FieldKind, PolyTerm, SystemModel, SystemSpec,
};
