//! Mean curvature flow of star-shaped hypersurfaces written as radial graphs, with
//! numerical checks of a short-time gradient estimate for `⟨X, ν⟩⁻¹` and a lower bound
//! for the blow-up time.
//!
//! * [`geometry`]: radial graphs, curvature fields, Laplace–Beltrami operator.
//! * [`flow`]: time stepping and blow-up extrapolation.
//! * [`kernel`]: backward heat kernel, weighted integrals, Q-bound case analysis.
//! * [`estimates`]: constants, cubic barrier, gradient bound, Φ monitor, residuals.
//! * [`harness`]: experiment configuration, orchestration and output files.

pub mod error;
pub mod estimates;
pub mod flow;
pub mod geometry;
pub mod harness;
pub mod kernel;
pub mod verdict;

pub use error::{Error, Result};
pub use flow::{FlowConfig, FlowSeries, Termination};
pub use geometry::{Dim, GeometryFields, Preset, StarShape};
pub use kernel::KernelPoint;
pub use verdict::{Check, Verdict};
