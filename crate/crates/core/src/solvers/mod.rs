//! Fitting algorithms: optimized DMD and sparse-mode DMD (FISTA or SR3 mode
//! updates), plus initialization and global-mode detection.

mod config;
mod fista;
mod global;
mod init;
mod optdmd;
mod sparse;
mod sr3;

pub use config::{Method, SolverConfig};
pub use fista::fista_mode_update;
pub use global::detect_global_modes;
pub use init::init_eigenvalues;
pub use optdmd::fit_optimized_dmd;
pub use sparse::fit_sparse_mode_dmd;
pub use sr3::sr3_mode_update;

use crate::error::Result;
use crate::model::{CMatrix, DmdModel, FitReport, SnapshotSet};

/// Result of one inner mode update.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeUpdate {
    pub phi_b: CMatrix,
    /// SR3 auxiliary matrix; `None` for FISTA.
    pub w: Option<CMatrix>,
    pub iterations: usize,
    pub converged: bool,
}

/// Dispatches on `config.method`.
pub fn fit(snapshots: &SnapshotSet, config: &SolverConfig) -> Result<(DmdModel, FitReport)> {
    match config.method {
        Method::OptDmd => fit_optimized_dmd(snapshots, config),
        Method::SparseFista | Method::SparseSr3 => fit_sparse_mode_dmd(snapshots, config),
    }
}

/// Relative Frobenius change `||new - old|| / ||old||`; zero when both vanish.
pub(crate) fn relative_change(new: &CMatrix, old: &CMatrix) -> f64 {
    let diff = (new - old).norm();
    let base = old.norm();
    if diff == 0.0 {
        0.0
    } else if base == 0.0 {
        f64::INFINITY
    } else {
        diff / base
    }
}

/// Objective values at or below this fraction of `||X||^2` count as an exact fit.
pub(crate) const EXACT_FIT: f64 = 1e-26;

/// Rejected steps shorter than this (relative to `1 + ||omega||`) mean the
/// iterate cannot be improved in floating point.
pub(crate) const TINY_STEP: f64 = 1e-12;
