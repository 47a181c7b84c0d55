//! Connectivity-preserving geometry images (CGIMs) for open genus-zero
//! triangle meshes.
//!
//! A mesh is laid out as a V-matrix: a rectangular grid of vertex ids whose
//! induced vertex set and edge set equal the mesh's. Quantizing the
//! coordinates of every cell gives an image; the image plus per-row and
//! per-column run counts reconstruct the mesh, exactly in the lossless case
//! and through pixel clustering after lossy coding.

pub mod cluster;
pub mod codec;
pub mod container;
pub mod corpus;
pub mod error;
pub mod io;
pub mod isomatrix;
pub mod level;
pub mod mesh;
pub mod metrics;
pub mod parametrize;
pub mod pipeline;

pub use error::{CodecError, IsomatrixError, MeshError, ParamError, PipelineError};
pub use level::{Edge, Level, VertexId};
pub use mesh::{validate_topology, Mesh, TopologyReport, TopologyViolation};
