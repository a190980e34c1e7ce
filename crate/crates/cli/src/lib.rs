//! Scenario runner for exact Nielsen fixed point computations: parsing,
//! execution, verification suites, and bundled fixtures. The `nielsen`
//! binary is a thin wrapper around this library.

pub mod error;
pub mod fixtures;
pub mod report;
pub mod run;
pub mod scenario;
pub mod verify;

pub use error::{CliError, Result};
pub use report::{Report, ReportBody};
pub use run::run;
pub use scenario::{parse_scenario, Scenario};
pub use verify::{run_suite, SuiteOutcome, SUITES};
