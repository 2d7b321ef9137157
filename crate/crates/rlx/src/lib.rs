//! File I/O, sweep orchestration with timing, and the self-test suite for
//! the RL extraction engine. The CLI binary `rlx` wires these together.

pub mod cli;
pub mod io;
pub mod selftest;
pub mod sweep;

pub use io::load_mesh;
pub use sweep::{run_sweep, SweepOptions, SweepResult};
