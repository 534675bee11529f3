//! Snapshot data, fitted exponential models and model-level operations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::build_time_matrix;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Snapshot matrix (features x snapshots) paired with its sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    data: CMatrix,
    times: DVector<f64>,
}

impl SnapshotSet {
    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn times(&self) -> &DVector<f64> {
        &self.times
    }

    pub fn n_features(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_snapshots(&self) -> usize {
        self.data.ncols()
    }

    pub fn into_parts(self) -> (CMatrix, DVector<f64>) {
        (self.data, self.times)
    }
}

/// Checks the snapshot invariants and wraps the inputs.
pub fn validate_snapshots(data: CMatrix, times: DVector<f64>) -> Result<SnapshotSet> {
    if data.ncols() != times.len() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} columns but {} sample times were given",
            data.ncols(),
            times.len()
        )));
    }
    if data.ncols() < 2 {
        return Err(Error::TooFewSnapshots(data.ncols()));
    }
    if data.nrows() == 0 {
        return Err(Error::DimensionMismatch("data has no rows".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("sample times"));
    }
    if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("snapshot data"));
    }
    for k in 1..times.len() {
        if times[k] <= times[k - 1] {
            return Err(Error::NonIncreasingTimes {
                index: k,
                prev: times[k - 1],
                next: times[k],
            });
        }
    }
    Ok(SnapshotSet { data, times })
}

/// Rank-r exponential model `X ~ Phi_b T(omega)`.
///
/// The model is stored in split form (unit-norm modes and nonnegative
/// amplitudes); `phi_b` is always the product of the two, so a model read
/// back from disk reproduces the same `phi_b` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct DmdModel {
    omega: CVector,
    modes: CMatrix,
    amplitudes: DVector<f64>,
    phi_b: CMatrix,
}

impl DmdModel {
    /// Builds a model from eigenvalues and amplitude-scaled modes.
    pub fn from_phi_b(omega: CVector, phi_b: &CMatrix) -> Result<Self> {
        let (modes, amplitudes) = split_amplitudes(phi_b);
        Self::from_parts(omega, modes, amplitudes)
    }

    /// Builds a model from eigenvalues, modes and amplitudes.
    pub fn from_parts(omega: CVector, modes: CMatrix, amplitudes: DVector<f64>) -> Result<Self> {
        let r = omega.len();
        if r == 0 {
            return Err(Error::InvalidModel("rank must be at least 1".into()));
        }
        if modes.ncols() != r || amplitudes.len() != r {
            return Err(Error::InvalidModel(format!(
                "rank {} but {} mode columns and {} amplitudes",
                r,
                modes.ncols(),
                amplitudes.len()
            )));
        }
        if modes.nrows() == 0 {
            return Err(Error::InvalidModel("modes have no rows".into()));
        }
        if omega.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidModel("non-finite eigenvalue".into()));
        }
        if amplitudes.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidModel("amplitudes must be finite and nonnegative".into()));
        }
        let mut phi_b = modes.clone();
        for (j, b) in amplitudes.iter().enumerate() {
            phi_b.column_mut(j).scale_mut(*b);
        }
        if phi_b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidModel("non-finite mode entry".into()));
        }
        Ok(Self {
            omega,
            modes,
            amplitudes,
            phi_b,
        })
    }

    pub fn rank(&self) -> usize {
        self.omega.len()
    }

    pub fn n_features(&self) -> usize {
        self.phi_b.nrows()
    }

    pub fn omega(&self) -> &CVector {
        &self.omega
    }

    pub fn phi_b(&self) -> &CMatrix {
        &self.phi_b
    }

    /// Unit-norm modes (zero columns for zero-amplitude modes).
    pub fn modes(&self) -> &CMatrix {
        &self.modes
    }

    pub fn amplitudes(&self) -> &DVector<f64> {
        &self.amplitudes
    }

    /// Checks the rank bound against a data set with `m` snapshots.
    pub fn check_rank_against(&self, m: usize) -> Result<()> {
        let bound = self.n_features().min(m);
        if self.rank() > bound {
            return Err(Error::InvalidModel(format!(
                "rank {} exceeds min(n, m) = {}",
                self.rank(),
                bound
            )));
        }
        Ok(())
    }
}

/// Summary of a fit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitReport {
    /// Accepted variable-projection iterations.
    pub outer_iterations: usize,
    /// Mean number of inner mode-update iterations per mode update.
    pub avg_inner_iterations: f64,
    pub final_objective: f64,
    pub converged: bool,
    pub global_mask: Vec<bool>,
    /// Objective after every accepted outer step, starting with the initial value.
    pub objective_history: Vec<f64>,
    /// Index into `objective_history` at which each global/local mask epoch starts.
    pub mask_epochs: Vec<usize>,
    /// Number of mode updates that hit the inner iteration cap.
    pub inner_cap_hits: usize,
}

impl FitReport {
    pub fn n_global(&self) -> usize {
        self.global_mask.iter().filter(|g| **g).count()
    }
}

/// Evaluates the model at arbitrary times: entry (i, k) is
/// `sum_j phi_b[i, j] * exp(omega_j * t_k)`.
pub fn reconstruct(model: &DmdModel, times: &DVector<f64>) -> Result<CMatrix> {
    let t = build_time_matrix(model.omega(), times)?;
    Ok(model.phi_b() * t.values())
}

/// Splits amplitude-scaled modes into unit-norm columns and their norms.
pub fn split_amplitudes(phi_b: &CMatrix) -> (CMatrix, DVector<f64>) {
    let mut phi = phi_b.clone();
    let mut b = DVector::zeros(phi_b.ncols());
    for (j, mut col) in phi.column_iter_mut().enumerate() {
        let norm = col.norm();
        b[j] = norm;
        if norm > 0.0 {
            col.unscale_mut(norm);
        } else {
            col.fill(Complex64::new(0.0, 0.0));
        }
    }
    (phi, b)
}

/// Relative Frobenius error `||estimate - reference|| / ||reference||`.
pub fn relative_error(estimate: &CMatrix, reference: &CMatrix) -> Result<f64> {
    if estimate.shape() != reference.shape() {
        return Err(Error::DimensionMismatch(format!(
            "estimate is {:?} but reference is {:?}",
            estimate.shape(),
            reference.shape()
        )));
    }
    let denom = reference.norm();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((estimate - reference).norm() / denom)
}

/// Permutation that orders eigenvalues by imaginary part, ties by real part.
pub(crate) fn eigenvalue_order(omega: &CVector) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..omega.len()).collect();
    idx.sort_by(|&a, &b| {
        omega[a]
            .im
            .total_cmp(&omega[b].im)
            .then(omega[a].re.total_cmp(&omega[b].re))
    });
    idx
}
