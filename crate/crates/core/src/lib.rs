//! Unitary t-designs from local random circuits: exact Haar moments,
//! finite-group twirls, the local random walk and its spectral gap, the
//! analytic bounds, and randomized benchmarking.

pub mod bounds;
pub mod channels;
pub mod designs;
pub mod error;
pub mod groups;
pub mod haar;
pub mod linalg;
pub mod rb;
pub mod walk;

pub use error::{Error, Result};
