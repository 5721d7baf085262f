//! Rescaled matrix random walks `U₀·Π(I + √(t/k)·A_j)` with bi-invariant steps,
//! the geometry and density of their Brown measures, and the large-`k` limit.

pub mod compare;
pub mod density;
pub mod ensembles;
pub mod error;
pub mod laws;
pub mod lifetime;
pub mod matrix;
pub mod rng;
pub mod subordination;
pub mod walk;
pub mod wz;

pub use error::{Error, Result};
pub use laws::{InitialLaw, SingularLaw, StepLaw, StepLawSummary};
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
pub use rng::RngStream;
