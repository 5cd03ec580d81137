//! Holds the `acceptance` test target, which runs every acceptance criterion
//! against the default four-site chain and prints one PASS/FAIL line each.
//!
//! The target sits in its own package so that it runs after every other test
//! binary in the workspace.
