//! Side-by-side simulation of photon transmission through polarizer
//! cascades under the ideal/generalized Malus description and a local
//! hidden-variable description, together with the Bell/CHSH machinery
//! needed to compare the two.
//!
//! The crate is organized as:
//!
//! * [`model`] — angles, folding conventions, and single-polarizer
//!   response laws;
//! * [`numerics`] — periodic quadrature, bounded scalar minimization,
//!   Malus-form least squares, and a seedable uniform stream;
//! * [`cascade`] — N-polarizer transmission under both theories and the
//!   minimum-transmission sweep;
//! * [`bell`] — the four-term Bell combination, CHSH correlations, and
//!   operator-norm maximization under commutation scenarios;
//! * [`eprmc`] — seeded Monte Carlo of the two-analyzer coincidence
//!   experiment, cross-checked against quadrature.
//!
//! All public types are immutable after construction and all operations
//! are pure functions of their inputs.

pub mod bell;
pub mod cascade;
pub mod eprmc;
pub mod error;
pub mod model;
pub mod numerics;

pub use error::{Error, Result};
pub use model::{Angle, HvResponseParams, ResponseLaw};
