//! Configuration ingestion, file formats, the single-run pipeline and the
//! (Gamma1, Gamma2) sweep orchestrator around [`gp_core`].

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod sweep;

pub use config::RunConfig;
pub use error::CliError;
