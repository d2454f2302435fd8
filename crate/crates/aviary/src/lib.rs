//! File formats, configuration and the command-line pipeline around `aviary-core`.

pub mod config;
pub mod error;
pub mod export;
pub mod manifest;
pub mod pipeline;
pub mod plot;
pub mod wav;

pub use error::{AppError, Result};
