//! Eigenvalue approximation for Fredholm integral operators
//!
//! ```text
//! (K x)(s) = ∫₀¹ κ(s, t) x(t) dt
//! ```
//!
//! with smooth kernels, by collocation on discontinuous piecewise polynomials
//! of even degree 2r with 2r+1 equidistant nodes per subinterval, together
//! with the iterated (Sloan), modified, and iterated modified variants. A
//! Nyström oracle supplies the reference eigenpair and spectral projection;
//! [`metrics`] turns everything into convergence tables.

pub mod cli;
pub mod config;
pub mod discretization;
pub mod eigen;
pub mod error;
pub mod expr;
pub mod function;
pub mod kernel;
pub mod mesh;
pub mod metrics;
pub mod quadrature;
pub mod reference;

pub use discretization::{Discretization, EigenApproximation, Eigenfunction, Method};
pub use error::{Error, Result};
pub use function::RealFunction;
pub use kernel::Kernel;
pub use mesh::{PiecewisePolynomial, ProjectionSpace};
pub use quadrature::GaussRule;
pub use reference::{SpectralReference, Target};
