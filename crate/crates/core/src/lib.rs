//! Constructive coverings of unit spheres of finite-dimensional quasi-normed
//! spaces, and certified entropy-number bounds built on them.

pub mod covering;
pub mod entropy;
pub mod error;
pub mod geometry;
pub mod norms;
pub mod point;
mod solve;

pub use error::{Error, Result};
pub use point::Point;
