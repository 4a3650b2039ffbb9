//! Stochastic multicriteria acceptability analysis with a 2-additive
//! Choquet integral preference model.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches files,
//! threads or the network lives in the `choquet-smaa` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod capacity;
pub mod error;
pub mod linprog;
pub mod preference;
pub mod rng;
pub mod sampling;
pub mod scaling;
pub mod smaa;

pub use error::{Error, Result};

/// Version of this crate, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
