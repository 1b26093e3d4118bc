//! Wireframe ingest: SVG files to typed graphical entities, annotations and
//! normalized visual context.

mod annotation;
mod context;
mod model;
mod svg;

use thiserror::Error;

pub use annotation::{parse_annotation, AnnotationError};
pub use context::{compute_visual_context, page_contexts, AlignmentHint, VisualContext, ALIGNMENT_BAND_PCT};
pub use model::*;
pub use svg::{parse_svg, read_wireframe};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}:{line}:{column}: malformed XML: {message}")]
    Xml { path: String, line: u32, column: u32, message: String },
    #[error("{path}: unsupported format: {reason}")]
    UnsupportedFormat { path: String, reason: String },
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
    #[error("{path}: annotation on `{entity}`: {source}")]
    Annotation {
        path: String,
        entity: String,
        #[source]
        source: AnnotationError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl IngestError {
    pub fn is_not_found(&self) -> bool {
        matches!(self, IngestError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound)
    }
}
