//! Hull geometry: surface evaluation, point clouds, meshes, STL, views and
//! hydrostatics.

pub mod cloud;
pub mod hydrostatics;
pub mod mesh;
pub mod render;
pub mod section;
pub mod stl;
pub mod surface;

pub use cloud::{generate_point_cloud, PointCloud};
pub use hydrostatics::{
    displaced_volume, scale_to_displacement, wetted_surface_area, Hydrostatics,
};
pub use mesh::{generate_mesh, is_watertight, self_intersects, TriangleMesh};
pub use render::render_views;
pub use stl::{export_stl, import_stl, StlFormat};
pub use surface::{HullShape, HullSurface, WigleySurface};
