//! Scenario runner for potkit: parses JSON scenarios, runs their checks and
//! writes verdicts, margin tables and sampled fields.

pub mod assemble;
pub mod checks;
pub mod presets;
pub mod run;
pub mod scenario;

pub use run::{execute, load, write_outputs, RunOptions, RunReport, Verdicts};
pub use scenario::{Scenario, SchemaError};

/// Exit code for a scenario that violates the schema.
pub const EXIT_SCHEMA: i32 = 2;
