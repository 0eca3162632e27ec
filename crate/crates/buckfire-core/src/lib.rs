//! Exact engines for the game Pass the Buck on connected undirected graphs.
//!
//! The buck starts on a distinguished start vertex. At each step the vertex
//! holding the buck, of degree `d`, either keeps it and wins (probability
//! `1/(d+1)`) or passes it to one of its `d` neighbours (each with
//! probability `1/(d+1)`). This crate computes the exact winning
//! probability of every vertex by three mutually verifying routes, plus a
//! statistical one:
//!
//! - [`abacus`]: a chip-firing machine on an augmented directed graph whose
//!   terminal chip counts encode the probabilities exactly,
//! - [`markov`]: the absorbing-chain fundamental matrix `N = (I - Q)^-1`
//!   and the absorption matrix `N * R`, over exact rationals,
//! - [`closedform`]: second-order integer recurrences and `Z[sqrt(2)]`
//!   closed forms for complete k-ary trees,
//! - [`montecarlo`]: seeded simulation of the actual game.
//!
//! All arithmetic in the first three is exact: arbitrary-precision integers
//! and rationals, never floats. Floats appear only as final renderings.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats, and the CLI live
//! in the companion `buckfire-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod abacus;
pub mod closedform;
pub mod graph;
pub mod markov;
pub mod montecarlo;

pub use graph::{Graph, GraphError, TreeSpec, VertexId};

// Re-exported so downstream crates use the same bigint/rational types
// without tracking version pairs themselves.
pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;
