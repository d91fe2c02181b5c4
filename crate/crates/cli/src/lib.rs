//! Command-line frontend for `cheq-core`: JSON group specs in, JSON reports,
//! CSV limit-set clouds and PGM margin renders out.
//!
//! Exit codes: 0 success, 1 validation, 2 parse or usage, 3 divergence,
//! 4 empty cloud.

pub mod commands;
pub mod error;
pub mod formats;
pub mod report;
pub mod specfile;

pub use commands::{run, run_from_args, Cli};
pub use error::{CliError, Failure};
pub use report::RunReport;
