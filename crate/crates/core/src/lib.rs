//! Path-sum engine for one-dimensional quantum propagators.
//!
//! Points carry a reliable countable coordinate and a randomly realized
//! continuous image ([`intermediate_set`]). Complex amplitudes combine
//! additively while probabilities follow the squared-modulus rule
//! ([`amplitude`]). Paths on a time lattice accumulate a discretized action
//! whose winding `m = S/h` sets the phase of each path ([`lattice`]); summing
//! those phases over all lattice paths yields the propagator `K(b, a)`
//! ([`propagator`]), and shrinking `ħ` concentrates the sum on the
//! stationary-action path ([`classical_limit`]). Closed-form kernels, a
//! shooting solver and an independent enumerator live in [`oracles`].
//!
//! The crate is `no_std` and only needs `alloc`; IO and the experiment
//! runner live in the `cardpath` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod amplitude;
pub mod classical_limit;
pub mod error;
pub mod intermediate_set;
pub mod lattice;
mod math;
pub mod oracles;
pub mod propagator;
mod sum;

pub use amplitude::{born_probability, phase_from_count, shift_winding, superpose, Amplitude, WaveSample};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use sum::pairwise_sum;
