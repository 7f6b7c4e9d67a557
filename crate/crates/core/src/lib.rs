//! Forward scattering by polygonal media with conductive transmission
//! interfaces, and the corner-probe machinery built on complex geometrical
//! optics (CGO) solutions.

pub mod cgo;
pub mod corner_probe;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod medium;
pub mod quadrature;
pub mod richardson;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64;
