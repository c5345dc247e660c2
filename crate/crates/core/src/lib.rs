//! Metrics `dx² + |x|^(-2a) dθ²` on the cylinder `R × S¹`, their radial mode operators,
//! self-adjoint extensions across the singular circle `x = 0`, finite-volume heat and
//! Schrödinger evolutions, and Markov-property probes.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! `f64`, which is what the probes and the command-line driver use.

pub mod discretization;
pub mod evolution;
pub mod geometry;
pub mod linalg;
pub mod markov_probes;
pub mod quadrature;
pub mod scalar;
pub mod sturm_liouville;

pub use num_complex::{Complex, Complex64};
pub use scalar::{Field, Real};

pub type Geometry = geometry::ConeGeometry<f64>;
pub type Operator = sturm_liouville::ModeOperator<f64>;
pub type Extension = sturm_liouville::ExtensionSpec<f64>;
pub type Grid = discretization::RadialGrid<f64>;
pub type Grid32 = discretization::RadialGrid<f32>;
pub type RealModeMatrix = discretization::ModeMatrix<f64>;
pub type ComplexModeMatrix = discretization::ModeMatrix<Complex64>;
pub type RealModeState = evolution::ModeState<f64>;
pub type ComplexModeState = evolution::ModeState<Complex64>;
pub type Surface = evolution::SurfaceState<f64>;
