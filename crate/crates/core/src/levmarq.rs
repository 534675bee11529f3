//! Levenberg-Marquardt pieces for the eigenvalue updates.
//!
//! Residuals are the row-major flattening of the n x m residual matrix
//! `X - Phi_b T(omega)`, i.e. entry `i * m + k` holds feature `i` at time `k`.
//! Every Jacobian column then factors as `-phi_j (x) q_j`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{build_time_matrix, time_derivative_row, TimeSvd};
use crate::model::{CMatrix, CVector};

#[derive(Debug, Clone, PartialEq)]
pub struct LmState {
    pub omega: CVector,
    pub nu: f64,
    pub objective: f64,
    pub iteration: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ConstraintSet {
    #[default]
    Unconstrained,
    ImaginaryAxis,
    LeftHalfPlane,
    Disc { center: Complex64, radius: f64 },
}

impl ConstraintSet {
    pub fn is_unconstrained(&self) -> bool {
        matches!(self, Self::Unconstrained)
    }

    fn project(&self, z: Complex64) -> Complex64 {
        match *self {
            Self::Unconstrained => z,
            Self::ImaginaryAxis => Complex64::new(0.0, z.im),
            Self::LeftHalfPlane => Complex64::new(z.re.min(0.0), z.im),
            Self::Disc { center, radius } => {
                let d = z - center;
                let a = d.norm();
                if a <= radius {
                    z
                } else {
                    center + d * (radius / a)
                }
            }
        }
    }
}

pub(crate) fn flatten_rows(r: &CMatrix) -> CVector {
    CVector::from_column_slice(r.transpose().as_slice())
}

fn check_shapes(omega: &CVector, x_cols: usize, times: &DVector<f64>) -> Result<()> {
    if omega.is_empty() {
        return Err(Error::InvalidArgument("at least one eigenvalue is required".into()));
    }
    if x_cols != times.len() {
        return Err(Error::DimensionMismatch(format!(
            "data has {x_cols} columns but {} sample times",
            times.len()
        )));
    }
    Ok(())
}

/// Variable-projection quantities at a fixed `omega`.
pub(crate) struct VarproEval {
    pub phi_b: CMatrix,
    pub residual: CMatrix,
    pub svd: TimeSvd,
}

impl VarproEval {
    pub fn new(omega: &CVector, x: &CMatrix, times: &DVector<f64>, rtol: f64) -> Result<Self> {
        check_shapes(omega, x.ncols(), times)?;
        let t = build_time_matrix(omega, times)?;
        let svd = TimeSvd::new(t.values(), rtol)?;
        let phi_b = x * &svd.pinv;
        let residual = x - &phi_b * t.values();
        if residual.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteResult("variable-projection residual"));
        }
        Ok(Self { phi_b, residual, svd })
    }

    pub fn objective(&self) -> f64 {
        self.residual.norm_squared()
    }
}

/// Jacobian with columns `-phi_j (x) q_j`, stored as its two factors.
pub(crate) struct KronJacobian {
    phi: CMatrix,
    q: CMatrix,
}

impl KronJacobian {
    /// `q_j = d_j` or, with `svd`, `q_j = (I - U U^*) d_j`.
    pub fn new(omega: &CVector, phi_b: &CMatrix, times: &DVector<f64>, svd: Option<&TimeSvd>) -> Result<Self> {
        let mut q = CMatrix::zeros(times.len(), omega.len());
        for (j, &w) in omega.iter().enumerate() {
            let d = time_derivative_row(w, times);
            let col = match svd {
                Some(s) => s.project_out(&d),
                None => d,
            };
            if col.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFiniteResult("Jacobian"));
            }
            q.set_column(j, &col);
        }
        Ok(Self {
            phi: phi_b.clone(),
            q,
        })
    }

    pub fn to_dense(&self) -> CMatrix {
        let (n, r) = self.phi.shape();
        let m = self.q.nrows();
        let mut j = CMatrix::zeros(n * m, r);
        for c in 0..r {
            for i in 0..n {
                let p = -self.phi[(i, c)];
                for k in 0..m {
                    j[(i * m + k, c)] = p * self.q[(k, c)];
                }
            }
        }
        j
    }

    /// Diagonal scaling `M_jj = ||J(:, j)||`, with dead columns set to 1.
    pub fn column_scales(&self) -> DVector<f64> {
        DVector::from_fn(self.phi.ncols(), |j, _| {
            let s = self.phi.column(j).norm() * self.q.column(j).norm();
            if s > 0.0 && s.is_finite() {
                s
            } else {
                1.0
            }
        })
    }

    pub fn gram(&self) -> CMatrix {
        let a = self.phi.adjoint() * &self.phi;
        let b = self.q.adjoint() * &self.q;
        a.component_mul(&b)
    }

    /// `J^* rho` for the flattened residual of `r`.
    pub fn adjoint_residual(&self, r: &CMatrix) -> CVector {
        let rq = r * self.q.map(|z| z.conj());
        CVector::from_fn(self.phi.ncols(), |j, _| -self.phi.column(j).dotc(&rq.column(j)))
    }

    /// Solves `(J^*J + nu^2 M^2) delta = -J^* rho`, returning `delta` and the
    /// predicted decrease `Re(delta^*(nu^2 M^2 delta - J^* rho))`.
    pub fn step(&self, r: &CMatrix, nu: f64) -> Result<(CVector, f64)> {
        let g = self.adjoint_residual(r);
        let m = self.column_scales();
        let mut a = self.gram();
        for j in 0..a.nrows() {
            a[(j, j)] += nu * nu * m[j] * m[j];
        }
        let chol = a.cholesky().ok_or(Error::RankDeficient)?;
        let delta = chol.solve(&(-&g));
        if delta.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::RankDeficient);
        }
        let denom = predicted_decrease(&delta, &g, &m, nu);
        Ok((delta, denom))
    }
}

fn predicted_decrease(delta: &CVector, g: &CVector, m: &DVector<f64>, nu: f64) -> f64 {
    delta
        .iter()
        .zip(g.iter())
        .zip(m.iter())
        .map(|((d, gj), mj)| (d.conj() * (d * (nu * nu * mj * mj) - gj)).re)
        .sum()
}

pub fn residual_varpro(omega: &CVector, x: &CMatrix, times: &DVector<f64>, rtol: f64) -> Result<CVector> {
    Ok(flatten_rows(&VarproEval::new(omega, x, times, rtol)?.residual))
}

pub(crate) fn fixed_modes_residual_matrix(
    omega: &CVector,
    phi_b: &CMatrix,
    x: &CMatrix,
    times: &DVector<f64>,
) -> Result<CMatrix> {
    check_shapes(omega, x.ncols(), times)?;
    if phi_b.shape() != (x.nrows(), omega.len()) {
        return Err(Error::DimensionMismatch(format!(
            "modes are {}x{}, expected {}x{}",
            phi_b.nrows(),
            phi_b.ncols(),
            x.nrows(),
            omega.len()
        )));
    }
    let t = build_time_matrix(omega, times)?;
    let r = x - phi_b * t.values();
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFiniteResult("residual"));
    }
    Ok(r)
}

pub fn residual_fixed_modes(omega: &CVector, phi_b: &CMatrix, x: &CMatrix, times: &DVector<f64>) -> Result<CVector> {
    Ok(flatten_rows(&fixed_modes_residual_matrix(omega, phi_b, x, times)?))
}

pub fn jacobian_varpro(omega: &CVector, x: &CMatrix, times: &DVector<f64>, rtol: f64) -> Result<CMatrix> {
    let eval = VarproEval::new(omega, x, times, rtol)?;
    Ok(KronJacobian::new(omega, &eval.phi_b, times, Some(&eval.svd))?.to_dense())
}

/// Jacobian for fixed modes; `debias_projector` (m x m) is applied to each
/// time-derivative row when present.
pub fn jacobian_fixed_modes(
    omega: &CVector,
    phi_b: &CMatrix,
    times: &DVector<f64>,
    debias_projector: Option<&CMatrix>,
) -> Result<CMatrix> {
    if phi_b.ncols() != omega.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} mode columns for {} eigenvalues",
            phi_b.ncols(),
            omega.len()
        )));
    }
    if let Some(p) = debias_projector {
        if p.shape() != (times.len(), times.len()) {
            return Err(Error::DimensionMismatch(format!(
                "projector must be {0}x{0}",
                times.len()
            )));
        }
    }
    let mut jac = KronJacobian::new(omega, phi_b, times, None)?;
    if let Some(p) = debias_projector {
        jac.q = p * &jac.q;
    }
    Ok(jac.to_dense())
}

fn dense_column_scales(j: &CMatrix) -> DVector<f64> {
    DVector::from_fn(j.ncols(), |c, _| {
        let s = j.column(c).norm();
        if s > 0.0 {
            s
        } else {
            1.0
        }
    })
}

/// Damped step minimizing `||rho + J delta||^2 + nu^2 ||M delta||^2`, solved
/// as a stacked least-squares problem by QR.
pub fn lm_step(residual: &CVector, j: &CMatrix, nu: f64) -> Result<CVector> {
    if nu.is_nan() || nu < 0.0 {
        return Err(Error::InvalidArgument(format!("damping must be nonnegative, got {nu}")));
    }
    if residual.len() != j.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "residual has length {} but the Jacobian has {} rows",
            residual.len(),
            j.nrows()
        )));
    }
    if j.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("Jacobian"));
    }
    let (rows, r) = j.shape();
    let m = dense_column_scales(j);
    let mut a = CMatrix::zeros(rows + r, r);
    a.rows_mut(0, rows).copy_from(j);
    for c in 0..r {
        a[(rows + c, c)] = Complex64::new(nu * m[c], 0.0);
    }
    let mut b = CVector::zeros(rows + r);
    b.rows_mut(0, rows).copy_from(&(-residual));

    let qr = a.qr();
    qr.q_tr_mul(&mut b);
    let rmat = qr.r();
    let diag_max = (0..r).map(|c| rmat[(c, c)].norm()).fold(0.0, f64::max);
    let tol = f64::EPSILON * (rows + r) as f64 * diag_max;
    if diag_max == 0.0 || (0..r).any(|c| rmat[(c, c)].norm() <= tol) {
        if residual.iter().all(|z| z.norm() == 0.0) {
            return Ok(CVector::zeros(r));
        }
        return Err(Error::RankDeficient);
    }
    let rhs = b.rows(0, r).into_owned();
    rmat.solve_upper_triangular(&rhs).ok_or(Error::RankDeficient)
}

/// Ratio-based damping update; returns the new damping.
pub(crate) fn ratio_damping(nu: f64, objective_old: f64, objective_new: f64, denom: f64) -> Result<f64> {
    if !(denom > 0.0) {
        return Err(Error::NonPositiveDenominator(denom));
    }
    let rho = (objective_old - objective_new) / denom;
    let factor = (1.0 - (2.0 * rho - 1.0).powi(3)).max(1.0 / 3.0);
    Ok(nu * factor)
}

pub fn damping_update_ratio(
    state: &LmState,
    delta: &CVector,
    j: &CMatrix,
    residual: &CVector,
    objective_new: f64,
) -> Result<f64> {
    if delta.len() != j.ncols() || residual.len() != j.nrows() {
        return Err(Error::DimensionMismatch("step, Jacobian and residual disagree".into()));
    }
    let g = j.adjoint() * residual;
    let m = dense_column_scales(j);
    let denom = predicted_decrease(delta, &g, &m, state.nu);
    ratio_damping(state.nu, state.objective, objective_new, denom)
}

pub fn damping_update_simple(nu: f64, accepted: bool) -> f64 {
    if accepted {
        nu / 3.0
    } else {
        nu * 2.0
    }
}

pub fn project_eigenvalues(omega: &CVector, set: &ConstraintSet) -> CVector {
    omega.map(|z| set.project(z))
}
