//! Exact decision procedures for dynamic coherent risk measures on finite
//! filtered probability spaces.

pub mod cone;
pub mod consistency;
pub mod corpus;
pub mod error;
pub mod field;
pub mod lcg;
pub mod market;
pub mod risk;
pub mod scenario;
pub mod space;
pub mod stability;

pub use error::{Error, Result};
pub use field::Scalar;
