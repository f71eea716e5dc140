//! Discrete and timed DTA-frequency measures of semi-Markov processes.
//!
//! A semi-Markov process ([`smp::SemiMarkovProcess`]) is observed by a
//! deterministic timed automaton ([`dta::Dta`]). The product of the two is a
//! Markov chain on a continuous state space; its region graph
//! ([`region`]) identifies the bottom components, and [`kernel`]
//! approximates invariant measures on a grid to produce the frequency of
//! every location. [`simulator`] estimates the same quantities by sampling.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod dta;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod kernel;
pub mod product;
pub mod region;
pub mod scalar;
pub mod simulator;
pub mod smp;

pub use dta::{Dta, TimedWord};
pub use error::{Error, Result};
pub use product::{Product, ProductState};
pub use region::{bscc_decompose, build_region_graph, RegionGraph, RegionSignature};
pub use smp::{DelayDensity, SemiMarkovProcess};
