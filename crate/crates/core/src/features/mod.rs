//! Patch-feature maps, backprojection onto vertices, and sampled feature clouds.

mod backproject;
mod cloud;
mod fmap;
mod synthetic;
mod vertex;

pub use backproject::{backproject, merge_view, render_contribution, Accumulator, Contribution, RenderKey};
pub use cloud::{interpolate_features, FeatureCloud};
pub use fmap::{load_feature_map, FeatureMap};
pub use synthetic::{reflection_group, synthetic_features, Isometry, SymmetricField, MAX_GROUP_ORDER};
pub use vertex::VertexFeatures;
