//! File formats, the model document and the command-line interface.

pub mod cli;
pub mod files;
pub mod model_file;

pub use cli::{run, SimulationSpec, EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_OK};
pub use files::{build_history, read_claims, read_counts, write_claims, write_counts, ClaimRow};
pub use model_file::{FitMeta, ModelFile, MODEL_FORMAT_VERSION};
