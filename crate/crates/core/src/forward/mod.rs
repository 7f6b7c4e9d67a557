//! Boundary integral solver for conductive transmission scattering.

pub mod disk;
pub mod farfield;
pub mod kernels;
pub mod mesh;
pub mod solve;

pub use disk::{disk_mode_ratios, disk_series_oracle, textbook_disk_pattern};
pub use farfield::{far_field, farfield_diff, uniform_angles, FarFieldPattern};
pub use mesh::{BoundaryMesh, MeshOptions};
pub use solve::{
    solve_scatter, solve_with_mesh_options, total_field_at, SolveResult, SolverOptions,
};
