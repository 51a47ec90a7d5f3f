//! Random walks on free groups: first-passage functions, barriers, and
//! hitting measures on the tree boundary.
//!
//! The crate works with finitely supported step measures on the free group
//! `F_m` and computes, with certified lower bounds:
//!
//! * restricted first-passage probabilities `F(x, y; S)` ([`fp`]),
//! * barrier and strong-barrier certificates ([`barrier`]),
//! * cylinder (hitting) measures of boundary shadows ([`cylinder`]),
//! * Perron roots and Collatz–Wielandt brackets of the companion matrices
//!   attached to powers-of-generators walks ([`spectral`]),
//! * the boundary singularity criterion
//!   `Σ_i 1/(1+ρ(a_i)^{-1}) + 1/(1+ρ(a_i^{-1})^{-1}) ≥ 1` ([`criterion`]),
//! * seeded Monte Carlo estimates used as an independent statistical
//!   oracle ([`mc`]).
//!
//! The core is `no_std` (alloc required); IO, configuration files and the
//! command line live in the companion `freewalk-cli` crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod barrier;
pub mod bracket;
pub mod criterion;
pub mod cylinder;
mod error;
pub mod fp;
pub mod linalg;
pub mod mc;
pub mod measure;
pub mod presets;
pub mod spectral;
pub mod word;

pub use bracket::Bracket;
pub use error::Error;
pub use measure::{Admissibility, MeasureClass, StepMeasure};
pub use word::{Letter, Word};

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;
