use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MedialError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),
    #[error("tet {tet} references vertex {vertex}, but only {count} vertices exist")]
    BadIndex { tet: usize, vertex: usize, count: usize },
    #[error("tet {tet} has non-positive volume {volume}")]
    InvertedTet { tet: usize, volume: f64 },
    #[error("boundary edge ({a}, {b}) is shared by {count} triangles")]
    NonManifoldEdge { a: usize, b: usize, count: usize },
    #[error("face {0:?} is shared by more than two tets")]
    NonManifoldFace([usize; 3]),
    #[error("boundary vertex {0} has a non-disk neighborhood")]
    NonManifoldVertex(usize),
    #[error("boundary has {0} connected components, expected 1")]
    MultipleComponents(usize),
    #[error("mesh has no tetrahedra")]
    EmptyMesh,
    #[error("bounding box has zero extent")]
    ZeroExtent,
    #[error("cell has no samples")]
    NoSamples,
    #[error("system is rank deficient beyond a plane (UNDER)")]
    Underdetermined,
    #[error("no pins could be placed")]
    NoPins,
    #[error("empty medial mesh")]
    EmptyMedialMesh,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, MedialError>;

impl MedialError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MedialError::Io { path: path.into(), source }
    }
}
