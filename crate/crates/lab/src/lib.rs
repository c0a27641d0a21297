//! Sweep harness for the zeitlin-core laboratory: experiment configuration,
//! orchestration, rate fitting, and report emission. The CLI front end lives
//! in `main.rs`; everything here is callable from tests.

pub mod config;
pub mod emit;
pub mod sweeps;
pub mod verify;

/// Process exit codes: 0 pass, 1 threshold failure, 2 input error.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_THRESHOLD: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
