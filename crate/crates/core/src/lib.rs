//! Pseudospectral solution of `f'(t) = A f(t)` for highly non-self-adjoint
//! generators.
//!
//! Instead of expanding the initial data in true eigenvectors (which for
//! strongly non-normal operators are ill-conditioned or may not exist), the
//! data is projected by least squares onto a finite family of approximate
//! eigenvectors `u_s` with approximate eigenvalues `lambda_s`. Each coefficient
//! is then propagated by `exp(lambda_s t)`, and an a-priori bound controls the
//! distance to the true semigroup:
//!
//! ```text
//! |T_t f - G phi_t| <= |f - G phi| M e^{gamma t} + eps (1 + M + M t) |phi|_1 e^{gamma t}
//! ```
//!
//! Module map:
//!
//! - [`grid`]: uniform grids on `[0, a]`, quadrature-weighted inner products and norms.
//! - [`families`]: analytic pseudomode families, exact convection-diffusion
//!   eigenpairs and defect certification.
//! - [`transform`]: the transform `G`, Gram matrix `B`, least-squares coefficients,
//!   propagation and the kernel of the approximating semigroup.
//! - [`spectral`]: classical biorthogonal expansion `Q_N` and orthogonal
//!   eigenspace projection `P_N`.
//! - [`bounds`]: growth bounds, eigenvalue clipping and the error estimate.
//! - [`oracle`]: independent reference solutions.
//! - [`bundle`]: CSV persistence of families and reports.
//! - [`experiments`]: the reproduction runs behind the CLI.

pub mod bounds;
pub mod bundle;
pub mod error;
pub mod experiments;
pub mod families;
pub mod grid;
pub mod oracle;
pub mod spectral;
pub mod transform;

pub use bounds::GrowthBound;
pub use error::{Error, Result};
pub use families::{CutoffSpec, EigenFamily, Operator, PseudomodeFamily};
pub use grid::{Grid, NormKind, SampledFunction};
pub use transform::{Coefficients, Method, PropagationReport, Transform};

/// Complex scalar used for all sampled values.
pub type C64 = nalgebra::Complex<f64>;
