//! Numerical laboratory for independence densities of point configurations.
//!
//! The crate estimates the congruent-copy counting functional on a periodic
//! torus and on spheres, applies local averaging ("blur") and zoom-out
//! operators, builds certified configuration-avoiding sets, and checks the
//! zonal harmonic identities that underpin the spherical side.
//!
//! Monte Carlo estimators split their sample budget into fixed-size chunks,
//! each drawing from its own derived ChaCha stream. Chunks run on rayon when
//! the `parallel` feature is on (the default) and sequentially otherwise;
//! the reduction order is fixed, so results are bit-identical either way.

pub mod config;
pub mod error;
pub mod estimate;
pub mod euclidean;
pub mod harmonics;
pub mod quadrature;
pub mod report;
pub mod sampling;
pub mod spherical;

pub use config::{Configuration, ToleranceProfile};
pub use error::{LabError, Result};
pub use estimate::{Estimate, IntersectionReport};
pub use sampling::{RandomSource, Rotation};
