//! Scherk's first surface as a superposition of helicoids: height functions,
//! identity checks, minimal-surface residuals, an area-excess energy lab and
//! mesh export.

pub mod cli;
pub mod diffops;
pub mod energy;
pub mod error;
pub mod identity;
pub mod mesh;
pub mod numeric;
pub mod surface;

pub use error::{Error, Result};
pub use surface::{BranchPolicy, GrainAngle, Gradient, Hessian, Point, Rect, Scherk};
