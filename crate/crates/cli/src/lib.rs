//! Front end for the varilab crate: argument parsing, report assembly, exit
//! codes and the acceptance battery.
//!
//! Exit codes: 0 success, 1 failing suite criteria, 2 invalid input,
//! 3 numeric failure, 4 out-of-hypothesis abort.

pub mod config;
pub mod report;
pub mod run;
pub mod suite;

pub use config::RunConfig;
pub use report::{exit_code, CliError, Report};
pub use run::{main_with_args, run, Outcome};
