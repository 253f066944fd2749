//! Exact-arithmetic laboratory for the parametric geometry of numbers:
//! successive minima of box flows with respect to approximation lattices,
//! front-facet events with companion scales, Schmidt-Summerer exponent
//! estimation, and randomized structural verification.

pub mod cli;
pub mod enumerate;
pub mod error;
pub mod exponents;
pub mod events;
pub mod lattice;
pub mod lll;
pub mod minima;
pub mod numbers;
pub mod rat;
pub mod scale;
pub mod surd;
pub mod verify;

pub use error::{Error, Result};
pub use rat::Rational;
pub use scale::ScaleValue;
