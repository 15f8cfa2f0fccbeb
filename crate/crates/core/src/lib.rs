//! Local consistency for finite-domain constraint satisfaction problems.
//!
//! The crate implements arc consistency (AC), linear arc consistency (LAC),
//! their singleton variants (SAC, SLAC), propagation along path and tree
//! patterns, a compiler from templates to the DATALOG programs behind AC and
//! LAC, and a brute-force oracle used to validate all of them.
//!
//! ```
//! use std::sync::Arc;
//! use slac::{ac_fixpoint, slac_fixpoint, Instance, Template};
//!
//! let t = Arc::new(Template::new(2)?.relation("neq", 2, [[0, 1], [1, 0]])?);
//! let triangle = Instance::builder(&t)
//!     .variables(["x", "y", "z"])
//!     .constraint(["x", "y"], "neq")
//!     .constraint(["y", "z"], "neq")
//!     .constraint(["z", "x"], "neq")
//!     .build()?;
//! assert!(!ac_fixpoint(&triangle).contradiction);
//! assert!(slac_fixpoint(&triangle).contradiction);
//! # Ok::<(), slac::Error>(())
//! ```

pub mod datalog;
pub mod domain;
pub mod error;
pub mod gen;
pub mod model;
pub mod oracle;
pub mod patterns;
pub mod propagate;
pub mod singleton;
pub mod templates;

pub use datalog::{evaluate, generate_ac_program, generate_lac_program, Program, Rule};
pub use domain::{DomainSet, Value, MAX_DOMAIN};
pub use error::{Error, Result};
pub use model::{
    check_solution, validate, Assignment, Constraint, ConstraintId, Instance, RelId, Relation, Template, VarId,
};
pub use oracle::{brute_solve, find_polymorphisms, is_polymorphism, Operation};
pub use patterns::{concat, propagate_path, propagate_tree, reverse, PathPattern, Step, TreePattern, Witness};
pub use propagate::{ac_fixpoint, ac_fixpoint_with, lac_closure, one_consistent_subinstance, step_image};
pub use singleton::{is_slac_stable, sac_fixpoint, slac_fixpoint};
