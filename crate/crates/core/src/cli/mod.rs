//! Subcommands behind the `mtrd` binary. Each returns a process exit code:
//! 0 success, 1 config or input error, 2 nesting violation, 3 negative verdict.

mod commands;
mod config;

pub use commands::{cmd_dpi, cmd_feasible, cmd_region, cmd_validate, CARDINALITY_CAVEAT};
pub use config::{ChannelSpec, DistortionSpec, Overrides, RunConfig, SizesSpec, SourceSpec, ValidateSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NESTING: i32 = 2;
pub const EXIT_NEGATIVE: i32 = 3;
