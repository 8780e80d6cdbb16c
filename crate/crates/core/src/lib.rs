//! # qkelly-core
//!
//! Kelly-style betting where the wager is carried by a single bosonic mode.
//! At every round the mode is split over the horses, the winning branch is
//! attenuated by its transmissivity and amplified by its odds, and the payoff
//! is the ergotropy of the resulting Gaussian state.
//!
//! Everything here works at the level of first and second moments:
//!
//! - [`gaussian`]: one-mode Gaussian states, energy, ergotropy and the
//!   iso-ergotropic manifold.
//! - [`channels`]: Bosonic Gaussian channels `(λ, X, Y)` and the gain/noise
//!   family `(g, α)` closed under composition.
//! - [`betting`]: game configuration, per-horse channels, trajectory
//!   recursions and payoff figures of merit.
//! - [`engine`]: counter-based seeded Monte Carlo, exact trajectory
//!   enumeration and order-independent aggregation.
//! - [`analysis`]: doubling rates, Kelly optimisation, moments of the
//!   renormalised noise `γ̄_t` and the mean-field ratio.
//!
//! The crate is `no_std` (it needs `alloc`). Transcendental functions come
//! from `libm`, so results are bit-identical across platforms and builds.
//!
//! Energies are expressed in units of `hν` (`hν = 1`); the vacuum has
//! covariance matrix equal to the identity.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod betting;
pub mod channels;
pub mod engine;
mod error;
pub mod gaussian;
pub mod linalg;
pub mod sum;

pub use error::{Error, Result};
