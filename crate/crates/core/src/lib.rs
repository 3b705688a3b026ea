#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` rejects NaN too
//! Gaussian-state simulation of a four-wave-mixing twin-beam amplifier.
//!
//! The crate is organized bottom-up:
//!
//! - [`gaussian`]: multimode Gaussian states, symplectic maps and channels.
//! - [`amplifier`]: the two-mode squeezer, sliced gain/loss cell and
//!   angular gain profile.
//! - [`detection`]: intensity-difference and homodyne detection against the
//!   standard quantum limit.
//! - [`entanglement`]: generalized-quadrature variances and the
//!   inseparability figure `I = V(X₋) + V(P₊)`.
//! - [`imaging`]: pixel-basis multimode images, masks and shaped LOs.
//! - [`scenario`]: configuration-driven experiment runner behind the CLI.

pub mod amplifier;
pub mod detection;
pub mod entanglement;
pub mod error;
pub mod gaussian;
pub mod imaging;
pub mod scenario;

pub use error::{Error, Result};
