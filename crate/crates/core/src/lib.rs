//! Periodic pseudospectral building blocks for the filtered exponential wave
//! integrator applied to Schrödinger equations with rough potentials.
//!
//! The crate is `no_std` (with `alloc`). Transforms go through the
//! [`fft::FftBackend`] trait; [`fft::Portable`] is a self-contained backend.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod fft;
pub mod field;
pub mod filters;
pub mod grid;
pub mod integrator;
pub mod multiplier;
pub mod potentials;

pub use error::{Error, Result};
pub use fft::{Direction, Fft1d, FftBackend, GridFft, Portable};
pub use field::{Field, Space};
pub use filters::CutoffProfile;
pub use grid::SpectralGrid;
pub use num_complex::Complex64;
