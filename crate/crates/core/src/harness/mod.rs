//! Config-driven runs and the files they produce.

pub mod config;
pub mod experiment;
pub mod output;
pub mod pipeline;

use thiserror::Error;

use crate::array::ArrayError;
use crate::channel::ChannelError;
use crate::geometry::GeometryError;
use crate::protocol::ProtocolError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("cell at (x = {x_m} m, y = {y_m} m): {source}")]
    Cell {
        x_m: f64,
        y_m: f64,
        #[source]
        source: Box<HarnessError>,
    },
    #[error("no input records: {0}")]
    EmptyInput(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Array(#[from] ArrayError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }
}
