//! Finite-difference laboratory for obstacle-type free boundary problems on
//! uniform 2-D grids.
//!
//! The crate is organized as a pipeline:
//!
//! * [`field`]: grids, scalar fields, masks, difference stencils, field file
//!   format,
//! * [`quadrature`]: node-in-ball and interpolated circle integrals,
//! * [`potential`]: Newtonian potentials by direct summation,
//! * [`solver`]: Poisson, projected-SOR obstacle, and active-set solvers for
//!   the unsigned problem `lap u = f * chi_{u != 0}`,
//! * [`fixtures`]: analytic benchmark solutions with known zero sets,
//! * [`projection`]: projections onto homogeneous harmonic quadratics,
//! * [`diagnostics`]: density, thickness, Weiss energies, BMO and Dini
//!   diagnostics, free boundary extraction,
//! * [`pipeline`]: dyadic scale reports and thickness verdicts,
//! * [`cli`]: the `obslab` command line driver.
//!
//! The runnable programs in `examples/` are the front door: each one
//! exercises a single capability end to end and prints what it measured.

// Validation guards are written `!(x > 0.0)` so NaN fails them; the direct
// comparisons the lint suggests would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod field;
pub mod fixtures;
pub mod pipeline;
pub mod potential;
pub mod projection;
pub mod quadrature;
pub mod solver;

pub use field::{hessian_field, laplacian, read_field, write_field};
pub use field::{Grid, HessianField, Mask, Point, ScalarField};

/// Crate-wide error type. Solver failures carry enough state to inspect what
/// the iteration was doing when it gave up.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid grid geometry (too small, nonpositive spacing, ...).
    #[error("grid: {0}")]
    Grid(String),
    /// A geometric precondition failed (ball exits the grid, mismatched
    /// grids, radius below the resolution floor, ...).
    #[error("domain: {0}")]
    Domain(String),
    /// Bad run configuration (unknown key, unparsable value, ...).
    #[error("config: {0}")]
    Config(String),
    /// Not enough data to evaluate a diagnostic (too few rows, points, or
    /// radii).
    #[error("insufficient data: {0}")]
    Insufficient(String),
    /// Filesystem failure, tagged with the path involved.
    #[error("i/o on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// A field or config file that exists but does not parse.
    #[error("parse {path}: {msg}")]
    Parse { path: String, msg: String },
    /// Linear relaxation ran out of sweeps before reaching its tolerance.
    /// Carries the last iterate for post-mortems.
    #[error("linear solve stalled: residual {residual:.3e} > tol {tol:.3e} after {sweeps} sweeps")]
    LinearStall {
        residual: f64,
        tol: f64,
        sweeps: usize,
        partial: Box<ScalarField>,
    },
    /// Projected relaxation ran out of sweeps before reaching its tolerance.
    #[error("psor stalled: residual {residual:.3e} > tol {tol:.3e} after {sweeps} sweeps")]
    PsorStall {
        residual: f64,
        tol: f64,
        sweeps: usize,
        partial: Box<ScalarField>,
    },
    /// The active-set iteration hit its outer budget with the mask still
    /// moving. Carries the final iterate and the last two masks.
    #[error("mask iteration still moving after {outer} updates ({delta} nodes changed last round)")]
    MaskStalled {
        outer: usize,
        delta: usize,
        state: Box<solver::MaskFailure>,
    },
    /// The active-set iteration revisited an earlier mask.
    #[error("mask iteration cycled with period {period} at update {outer}")]
    MaskCycle {
        period: usize,
        outer: usize,
        state: Box<solver::MaskFailure>,
    },
    /// A diagnostic that needs free boundary points found none.
    #[error("no free boundary point: {0}")]
    NoFreeBoundary(String),
}

impl Error {
    /// True for the non-convergence family (used by the CLI exit mapping).
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::LinearStall { .. }
                | Error::PsorStall { .. }
                | Error::MaskStalled { .. }
                | Error::MaskCycle { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
