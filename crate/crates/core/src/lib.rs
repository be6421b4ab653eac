//! Polyhedral surfaces in hyperbolic and spherical 3-space that deform while
//! every dihedral angle stays fixed, together with the measurements, volume
//! engine and tilings used to check them.
//!
//! Geometry is generic over the scalar type; the aliases below fix it to
//! `f64`.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod construction;
pub mod error;
pub mod geom;
pub mod mesh;
pub mod scalar;
pub mod sphere2d;
pub mod tilings;

pub use error::{Error, Result};
pub use geom::SpaceKind;

pub type Point = geom::Point<f64>;
pub type Vector4 = geom::Vec4<f64>;
pub type Plane = geom::GeodesicPlane<f64>;
pub type Isometry = geom::Isometry<f64>;
pub type Mesh = mesh::TriMesh<f64>;
pub type Member = construction::FamilyMember<f64>;
