//! Files, command line and HTTP service around `choquet-smaa-core`.
//!
//! * [`problem`]: the JSON problem format and CSV import.
//! * [`statement`]: the preference statement syntax.
//! * [`compat`]: compatibility reports.
//! * [`runner`]: threaded runs and scale searches.
//! * [`bundle`]: result bundles (JSON plus CSV tables).
//! * [`service`]: the session-based HTTP API.

pub mod bundle;
pub mod cli;
pub mod compat;
pub mod problem;
pub mod runner;
pub mod service;
pub mod statement;

pub use choquet_smaa_core as engine;
