//! Spherical transforms over the subspheres of `S^{n-1}` cut by hyperplanes
//! tangent to an inscribed prolate spheroid, and the reconstruction of a
//! function from those integrals.
//!
//! The spheroid `x_n^2 + (x_1^2 + ... + x_{n-1}^2) cosh^2(lambda) = 1` touches
//! the unit sphere at the poles `±e_n`. Under stereographic projection from
//! the north pole every tangent subsphere becomes a sphere `c psi + c tanh(lambda) omega`
//! in `R^{n-1}`, so the data splits by spherical harmonic degree into
//! multiplicative convolutions on `R^+`, which a Mellin transform diagonalizes.
//! Letting `lambda -> inf` gives the spherical slice transform, where every
//! subsphere passes through `-e_n`.
//!
//! Module map:
//!
//! * [`geometry`]: projections, the tangent subsphere family and its measure.
//! * [`harmonics`]: Gegenbauer polynomials, real harmonics on `S^1` / `S^2`,
//!   sphere quadrature.
//! * [`grid`]: log-uniform grids on `R^+`.
//! * [`forward`]: the transform itself and sinogram assembly.
//! * [`phantom`]: test functions with closed-form harmonic profiles.
//! * [`mellin`]: Mellin transform, inversion, convolution and regularized division.
//! * [`kernel`]: the radial convolution kernel and its Mellin transform.
//! * [`inversion`]: the reconstruction pipeline.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. The `rayon` feature parallelizes sinogram sweeps and per-mode
//! reconstruction.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
mod math;

pub mod forward;
pub mod geometry;
pub mod grid;
pub mod harmonics;
pub mod inversion;
pub mod kernel;
pub mod mellin;
pub mod phantom;
pub mod quadrature;

pub use error::{Error, Result, Warning};
pub use num_complex::Complex64;
