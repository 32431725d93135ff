//! Shared helpers for the criterion benches.

use std::path::PathBuf;

/// Absolute path of a bundled fixture file.
pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

/// Parses a bundled fixture.
pub fn load_fixture(name: &str) -> eigs_core::IgsSpec {
    let text = std::fs::read_to_string(fixture(name)).expect("fixture file readable");
    eigs_core::parse_spec(&text).expect("fixture parses")
}
