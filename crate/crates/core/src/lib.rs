//! Pseudo-spectral machinery for time-periodic solutions of the dissipative
//! quasi-geostrophic equation
//!
//! ```text
//! ∂ₜθ + (−Δ)^{α/2}θ + u·∇θ = F,   u = R^⊥θ,   F(t + T) = F(t)
//! ```
//!
//! on the periodic box `[0, L)²`. Everything in here is a pure function of its
//! inputs and only needs `alloc`; file formats, configuration and the command
//! line live in the `sqg-cli` crate.
//!
//! Layout:
//!
//! * [`grid`], [`field`], [`multiplier`]: the box, real/Fourier fields and the
//!   Fourier multiplier calculus (fractional Laplacian, its semigroup, Riesz
//!   transforms, dealiasing).
//! * [`littlewood_paley`]: dyadic blocks, homogeneous Besov norms, space-time
//!   Besov norms, Bony paraproducts and commutators.
//! * [`periodic`]: the linear periodic problem (Duhamel integral, the inverse of
//!   `1 − e^{−TA}`, the periodic initial datum).
//! * [`dynamics`]: integrating-factor RK4 for the forced transport–diffusion
//!   equation, self-advected or with a frozen velocity.
//! * [`fixpoint`]: the successive-approximation construction of the periodic
//!   solution with its convergence monitors.
//! * [`probes`]: estimate-ratio probes for the harmonic-analysis estimates.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod corpus;
pub mod dynamics;
mod error;
mod fft;
pub mod field;
pub mod fixpoint;
pub mod grid;
pub mod littlewood_paley;
pub mod multiplier;
pub mod periodic;
pub mod probes;
pub mod trajectory;

pub use error::{Error, Result};
pub use field::{Field, SpectralField};
pub use grid::{Grid, Wavevector};
pub use littlewood_paley::{BesovSpec, DyadicDecomposition, Exponent};
pub use multiplier::Multiplier;
pub use trajectory::Trajectory;

/// Complex scalar used for Fourier coefficients.
pub type C64 = num_complex::Complex<f64>;
