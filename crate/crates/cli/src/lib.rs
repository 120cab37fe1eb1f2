//! Command-line front end for `crackloc`: JSON configs in, CSV/PGM maps and
//! JSON reports out.

pub mod config;
pub mod output;
pub mod report;
pub mod run;

pub use config::{ConfigError, Mode, RunConfig};
pub use run::run;
