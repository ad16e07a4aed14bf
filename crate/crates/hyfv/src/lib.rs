//! Hybridised finite-volume solvers for stationary advection-diffusion
//! equations on generic polygonal meshes.
//!
//! The discretisation couples one unknown per cell with one unknown per
//! face. Diffusive fluxes come from a stabilised cellwise gradient,
//! advective fluxes from upwind splitting with an optional second-order
//! correction that only uses values local to a cell. Cell unknowns can be
//! eliminated by static condensation, leaving a face-only system.
//!
//! Modules:
//! - [`mesh`]: interval and polygonal meshes, generators, geometry.
//! - [`space`]: the hybrid cell+face space, discrete gradients, norms.
//! - [`fluxes`]: local diffusive/advective flux operators and the limiter.
//! - [`assembly`]: global systems, static condensation, solvers.
//! - [`problems`]: the built-in test-problem catalog and error metrics.

pub mod algebra;
pub mod assembly;
pub mod fluxes;
pub mod linalg;
pub mod mesh;
pub mod problems;
pub mod space;

use thiserror::Error;

/// Errors emitted by mesh construction, assembly and solves.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("mesh error{}: {message}", cell.map(|c| format!(" (cell {c})")).unwrap_or_default())]
    Mesh {
        message: String,
        cell: Option<usize>,
    },
    #[error("zero pivot on cell {cell} during static condensation")]
    ZeroPivot { cell: usize },
    #[error("singular or numerically unsolvable system: {0}")]
    Singular(String),
    #[error(
        "iterative solver did not converge: residual {residual:.3e} after {iterations} iterations"
    )]
    NonConvergence { residual: f64, iterations: usize },
    #[error(
        "Picard iteration did not converge: last update {delta:.3e} after {iterations} iterations"
    )]
    PicardNonConvergence { delta: f64, iterations: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
