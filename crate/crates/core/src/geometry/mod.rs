//! Triangle meshes, planes, reflection and surface sampling.

mod io;
mod mesh;
mod plane;
mod sampling;

pub use io::{load_mesh, parse_obj, parse_off, save_obj, to_obj_string, MeshFormat};
pub use mesh::{normalize, NormalizedMesh, TriangleMesh};
pub use plane::{reflect_point, Plane};
pub use sampling::{sample_mesh, sample_surface, SurfaceSample};

pub type Vec3 = nalgebra::Vector3<f64>;
