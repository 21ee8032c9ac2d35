//! Command-line harness for the coverage-planning toolkit.
//!
//! Every subcommand is a thin wrapper over a library function in
//! [`commands`], so integration tests can drive the exact code path the
//! binary runs without spawning processes. All outputs are plain columnar
//! text (CSV or whitespace-separated) so they can be fed straight to
//! gnuplot or pandas; floats are written with the shortest round-trip
//! representation, which makes every file byte-reproducible across runs
//! and thread counts. The only intentionally non-reproducible columns are
//! wall-clock solve times (always named `solve_ms`).

pub mod commands;
pub mod experiments;
pub mod support;
