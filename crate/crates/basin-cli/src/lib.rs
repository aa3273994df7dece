//! Command-line driver for basin-core: structured run configuration,
//! deterministic CSV/JSON artifacts, and orchestration of sweeps and
//! verification batteries.

pub mod commands;
pub mod config;
pub mod io;
pub mod system;

/// Exit status of a command: 0 on success, 2 when the run completed but did
/// not converge (or a verified inequality failed), 1 on error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    NotConverged,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::NotConverged => 2,
        }
    }
}
