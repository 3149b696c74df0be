//! Geometrically exact rod dynamics on SE(3).
//!
//! A rod is a curve of rigid cross-sections `g(z, t) ∈ SE(3)`. Its state is the
//! body velocity `W = θ_L(∂_t g)` and the strain `ξ = θ_L(∂_z g)`, both
//! sampled on a uniform grid over `[0, L]`.
//!
//! Everything is generic over the scalar type through [`Real`]; aliases for
//! `f64` and `f32` are provided below.

pub mod actuation;
pub mod dynamics;
pub mod elasticity;
pub mod error;
pub mod linalg;
pub mod rod;
pub mod scalar;
pub mod se3;
pub mod validation;

pub use error::{Error, Result};
pub use linalg::{Mat3, Mat6, Vec3};
pub use rod::{Grid, MassCoefficient, PoseField, ReferenceCurve, RodProperties, TwistField};
pub use scalar::Real;
pub use se3::{Pose, Rotation, Twist};

pub type TwistF64 = Twist<f64>;
pub type TwistF32 = Twist<f32>;
pub type PoseF64 = Pose<f64>;
pub type PoseF32 = Pose<f32>;
pub type GridF64 = Grid<f64>;
pub type GridF32 = Grid<f32>;
pub type RodPropertiesF64 = RodProperties<f64>;
pub type RodPropertiesF32 = RodProperties<f32>;
pub type StiffnessLawF64 = elasticity::StiffnessLaw<f64>;
pub type StiffnessLawF32 = elasticity::StiffnessLaw<f32>;
pub type SimStateF64 = dynamics::SimState<f64>;
pub type SimStateF32 = dynamics::SimState<f32>;
