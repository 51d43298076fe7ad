//! Exact spatial indexes: point k-d tree, neighbor graph and triangle BVH.

mod bvh;
mod graph;
mod kdtree;

pub use bvh::{closest_point_on_triangle, TriangleBvh};
pub use graph::NeighborGraph;
pub use kdtree::KdTree;
