//! Base leaf, conformal data, meshes and the curvature quantities of the
//! ambient space and of Killing cylinders.

pub mod ambient;
pub mod boundary;
pub mod distance;
pub mod field;
pub mod mesh;
pub mod recovery;

pub use ambient::{
    preset_ambient, AmbientSpace, BaseMetric, ConformalFactor, CurvatureModel, CustomFactor, Gamma,
    Mat2, Preset, PresetParams, Vec2,
};
pub use distance::distance_to_boundary;
pub use field::ScalarField;
pub use mesh::{DistanceJet, DomainMesh, DomainShape, MeshJson};
