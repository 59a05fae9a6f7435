//! Bentkus-type tail bounds for sums and martingales with bounded or
//! stochastically dominated increments.
//!
//! The crate is organized bottom-up: [`dist`] holds the one-dimensional laws
//! and their positive-part moments, [`optim`] the scalar minimizers, [`bounds`]
//! the named tail bounds, [`dominance`] the splice and convolution machinery
//! for functions of independent inputs, and [`verify`] exact enumeration and
//! Monte Carlo checks of the bounds.

pub mod bounds;
pub mod dist;
pub mod dominance;
pub mod error;
pub mod optim;
pub mod quad;
pub mod special;
pub mod verify;

pub use bounds::{BoundResult, BoundStatus, Method};
pub use dist::{parse_dist, Dist, Kind, PlusMomentQuery};
pub use dominance::{DominanceVerdict, SpliceLaw};
pub use error::{Error, Result};
