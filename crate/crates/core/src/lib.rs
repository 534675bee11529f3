//! Sparse-mode dynamic mode decomposition.

pub mod cli;
pub mod datagen;
pub mod error;
pub mod io;
pub mod levmarq;
pub mod linalg;
pub mod model;
pub mod prox;
pub mod solvers;

pub use error::{Error, Result};
pub use model::{CMatrix, CVector, DmdModel, FitReport, SnapshotSet};
