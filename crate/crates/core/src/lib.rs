//! Numerical laboratory for the logarithmic derivative of characteristic
//! polynomials of Haar-random unitary matrices.
//!
//! The numerical modules are generic over [`Real`] (`f32` or `f64`); the
//! sampler works in double precision and its spectra can be cast with
//! [`EigenAngles::cast`]. Double-precision aliases are provided at the root.

pub mod clt;
pub mod error;
pub mod harness;
pub mod logderiv;
pub mod parallel;
pub mod ratios;
pub mod sampler;
pub mod scalar;
pub mod selberg;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex;
pub use sampler::{EigenAngles, RngStream, UnitaryMatrix};
pub use scalar::Real;

pub type C64 = Complex<f64>;
pub type Angles = EigenAngles<f64>;
pub type Angles32 = EigenAngles<f32>;
