//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension n={n} outside the supported range 2..=32")]
    DimensionOutOfRange { n: usize },

    #[error("order k={k} is not admissible for dimension n={n}")]
    OrderOutOfRange { k: usize, n: usize },

    #[error("matrix is {rows}x{cols}, expected square of size {expected}")]
    BadShape {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("matrix is not symmetric: defect {defect:.3e} exceeds {tol:.3e}")]
    NotSymmetric { defect: f64, tol: f64 },

    #[error("point violates the ambient quadric constraint: |<x,x> - c| = {defect:.3e}")]
    OffManifold { defect: f64 },

    #[error("chart is degenerate at the evaluation point: {reason}")]
    DegenerateChart { reason: String },

    #[error("orientation reference is orthogonal to the computed normal")]
    OrientationAmbiguous,

    #[error("non-finite value produced during {context}")]
    NonFinite { context: String },

    #[error("inadmissible family parameters: {0}")]
    Inadmissible(String),

    #[error("sample set is empty")]
    EmptySampleSet,

    #[error("sample data is malformed: {0}")]
    MalformedSamples(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
