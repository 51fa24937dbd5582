//! Exact-arithmetic laboratory for measure-preserving dynamical systems.
//!
//! The crate models four concrete classes of automorphisms (finite
//! permutations, odometers, circle rotations, and finite-by-fiber products)
//! acting on a metric Boolean algebra of canonical set classes, and computes
//! wandering rates, ergodicity verdicts, Rokhlin towers, and continuity
//! probes with exactness certificates. Every value is an arbitrary-precision
//! rational or an element of a real quadratic field; no comparison ever goes
//! through floating point.

pub mod checks;
pub mod contfrac;
pub mod error;
pub mod phi;
pub mod probes;
pub mod rng;
pub mod scalar;
pub mod sets;
pub mod space;
pub mod systems;

pub use error::{Error, Result};
pub use scalar::{NumberField, Scalar};
pub use sets::{AtomSet, CylinderSet, Interval, IntervalSet, ProductSet, SetClass};
pub use space::Space;
pub use systems::{
    ErgodicityVerdict, FinitePermutation, PeriodicProfile, SaturationResult, System,
};
