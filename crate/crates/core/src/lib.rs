//! Conformal invariants of space-like hypersurfaces.

pub mod catalog;
pub mod checks;
pub mod differentiation;
pub mod error;
pub mod geometry;
pub mod invariants;
pub mod jet;
pub mod lift;
pub mod linalg;
pub mod scalar;
pub mod spaceform;

pub use error::{Error, Result};
pub use scalar::Real;

pub use catalog::{build, Expected, Surface};
pub use checks::{analyze, AmbientKind, Analysis, Branch, Tolerances};
pub use differentiation::{AmbientConstraint, DerivStrategy, Immersion};
pub use invariants::PointInvariants;
pub use lift::invariants_at;
pub use linalg::Signature;
pub use spaceform::SpaceFormOptions;

pub type Jet64 = jet::Jet<f64>;
pub type Mat64 = linalg::Mat<f64>;
pub type SymTensor2f64 = linalg::SymTensor2<f64>;
pub type Immersion64 = differentiation::Immersion<f64>;
pub type Surface64 = catalog::Surface<f64>;
pub type PointInvariants64 = invariants::PointInvariants<f64>;
pub type Strategy64 = differentiation::DerivStrategy<f64>;
