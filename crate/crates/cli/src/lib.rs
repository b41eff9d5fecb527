//! Command-line front end: reads a run document, then schedules, simulates,
//! explores or ranks the kernel set it describes.

pub mod commands;
pub mod error;
pub mod input;

pub use commands::{cmd_explore, cmd_rank, cmd_schedule, cmd_simulate, RunConfig};
pub use error::CliError;
pub use input::load_inputs;
