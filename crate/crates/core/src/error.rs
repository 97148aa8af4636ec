use crate::dom::{NodeId, NodePath};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("no such node: {0}")]
    NoSuchNode(NodeId),

    #[error("path {path} not resolvable at step {step}")]
    PathNotResolvable { path: NodePath, step: usize },

    #[error("unresolvable measurement paths: {}", join_paths(.0))]
    UnresolvableMeasurements(Vec<NodePath>),

    #[error("malformed measurement for {path}: {reason}")]
    MalformedMeasurement { path: NodePath, reason: String },

    #[error("invalid viewport: {0}")]
    InvalidViewport(String),

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("invalid style: {0}")]
    InvalidStyle(String),

    #[error("geometry missing for {0}")]
    MissingGeometry(NodePath),

    #[error("degenerate texture region")]
    DegenerateTextureRegion,

    #[error("invalid page size {w}x{h}")]
    InvalidPageSize { w: f64, h: f64 },

    #[error("revision order violated: {old} is not older than {new}")]
    RevisionOrder { old: u64, new: u64 },

    #[error("diff base revision {diff} does not match scene revision {scene}")]
    DiffBaseMismatch { diff: u64, scene: u64 },
}

fn join_paths(paths: &[NodePath]) -> String {
    paths
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}
