//! Boundary element operators for time-harmonic elastic waves.
//!
//! Every elastic layer operator is assembled from weakly singular Helmholtz
//! integrals and Günter tangential derivatives of piecewise-linear fields, in
//! three dimensions on flat triangulations and in two dimensions on polygons.
//!
//! The crate is `no_std` (with `alloc`). The default `std` feature enables
//! rayon-parallel assembly.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dense;
pub mod elastic2d;
pub mod elastic3d;
pub mod geometry;
pub mod guenter;
pub mod kernels;
pub mod mesh;
pub mod potentials;
pub mod quadrature;
pub mod space;

mod par;
mod prelude;

pub use num_complex::Complex64 as C64;

/// Version of this crate.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
