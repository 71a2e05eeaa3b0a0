//! Computer algebra for θ-deformed spheres and quantum tori.
//!
//! The symbolic side works in the *free-with-phases* algebra: normal
//! generators z_j with z_k z_j = ρ_{jk} z_j z_k, plus an optional central
//! self-adjoint `x`. The sphere relation is never used for rewriting; it is
//! checked either against the sphere polynomial or numerically through
//! finite-dimensional representations.

pub mod actions;
pub mod algebra;
pub mod config;
pub mod cyclotomic;
pub mod error;
pub mod homs;
pub mod matrix;
pub mod param;
pub mod rep;
pub mod scalar;
pub mod suites;
pub mod winding;
pub mod zgen;


pub use actions::{apply_ru, factor_rotation, RotationAction, ScalarUnitary};
pub use algebra::{parse, print, Context, Monomial, StarPolynomial};
pub use config::Tolerances;
pub use error::{Error, Result};
pub use homs::{GeneratorMap, ValidationMode};
pub use matrix::PolyMatrix;
pub use param::ParameterMatrix;
pub use rep::{GridSpec, RationalRep, SpherePoint};
pub use scalar::{Angle, Coefficient, Scalars};
pub use suites::{SuiteConfig, SuiteReport};
pub use winding::{winding, MatrixLoop};
pub use zgen::{is_sphere_unitary, zgen};
