use thiserror::Error;

use crate::geometry::ProcedureKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid angle {0:?}: expected a positive rational in degrees such as 60 or 121/2")]
    InvalidAngle(String),

    #[error("angles sum to {sum} degrees, expected exactly 180")]
    AngleSum { sum: String },

    #[error("expected three comma-separated values, got {0}")]
    Arity(usize),

    #[error("invalid side length {0:?}: expected a positive finite decimal")]
    InvalidSide(String),

    #[error("sides {0}, {1}, {2} do not form a triangle (longest side must be shorter than the other two combined)")]
    NotATriangle(f64, f64, f64),

    #[error("depth {depth} exceeds the {limit}-generation limit of {mode} mode")]
    DepthLimit {
        depth: u32,
        limit: u32,
        mode: &'static str,
    },

    #[error("{0}")]
    InvalidRun(String),

    #[error("collinear input triangle (area below degeneracy threshold)")]
    Collinear,

    #[error("{procedure} bisection produced a degenerate triangle at depth {depth} (lineage {lineage})")]
    DegenerateChild {
        procedure: ProcedureKind,
        depth: u32,
        lineage: String,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    /// True for errors caused by collapsing geometry rather than bad input.
    pub fn is_geometric(&self) -> bool {
        matches!(self, Error::Collinear | Error::DegenerateChild { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
