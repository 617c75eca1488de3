//! Cost-benefit accounting for browser Web API standards.
//!
//! Costs are exclusive implementation code (from a static call graph), CVE
//! history and published attacks; the benefit of keeping a standard is the
//! share of sites that break without it. The ledger fuses both sides and
//! drives generation and evaluation of blocking policies.

pub mod benefit;
pub mod callgraph;
pub mod catalog;
pub mod cve;
pub mod error;
pub mod idl;
pub mod io;
pub mod ledger;
pub mod pipeline;
pub mod policy;
pub mod report;
pub mod scatter;
pub mod standard;

pub use error::{Error, Result};
pub use standard::{Abbrev, Standard};

use std::path::PathBuf;

/// Fixture directory: `$SURFACE_LEDGER_FIXTURES` if set, else the
/// workspace's `fixtures/`.
pub fn fixture_dir() -> PathBuf {
    std::env::var_os("SURFACE_LEDGER_FIXTURES")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"))
}
