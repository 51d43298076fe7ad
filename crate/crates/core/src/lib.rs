//! Detection of global reflective symmetry planes of triangle meshes.
//!
//! The pipeline renders a mesh from many viewpoints, attaches per-patch image
//! features to mesh vertices through the rasterizer's fragment records,
//! resamples the surface, and searches feature space for mirror
//! correspondences. Candidate planes are verified geometrically with a
//! Chamfer test.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod features;
pub mod geometry;
pub mod metrics;
pub mod pipeline;
pub mod render;
pub mod spatial;
pub mod symmetry;
pub mod synth;

pub use error::{Error, Result};
