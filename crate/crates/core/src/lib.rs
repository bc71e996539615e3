//! Numerical core for studying restrictions of Hölder continuous functions.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! computation. Every random quantity is a deterministic function of a
//! `(seed, stream)` pair, see [`rng`], so batches can be split across threads
//! by a caller without changing results.
//!
//! Modules:
//!
//! - [`fbm`]: exact fractional Gaussian noise / fractional Brownian motion
//!   sampling on dyadic grids and the uniform modulus ratio.
//! - [`selfaffine`]: the self-affine functions `f_{k,m}`, exact rational
//!   evaluation, interval images and exact scaled local time certification.
//! - [`holder`]: piecewise linear functions, Hölder extension, the splice
//!   construction and a grid Hölder checker.
//! - [`localtime`]: scaled and discrete local times of sampled functions and
//!   the membership classes built from them.
//! - [`restriction`]: zero and record sets, box counting, dimension slopes,
//!   β-variation and restricted Hölder constants.
//! - [`renewal`]: heavy-tailed renewal sets, γ-energies, planar walk quadrant
//!   hitting times and greedy monotone subsequences.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
mod fft;
pub mod fbm;
pub mod grid;
pub mod holder;
pub mod localtime;
pub mod renewal;
pub mod restriction;
pub mod rng;
pub mod selfaffine;
pub mod stats;

pub use error::{Error, Result};
pub use grid::GridFunction;
