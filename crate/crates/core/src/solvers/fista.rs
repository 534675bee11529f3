use nalgebra::DVector;
use num_complex::Complex64;

use super::{relative_change, ModeUpdate};
use crate::error::{Error, Result};
use crate::linalg::{build_time_matrix, spectral_norm_sq};
use crate::model::{CMatrix, CVector, SnapshotSet};
use crate::prox::{masked_penalty, prox_matrix, GlobalLocalMask, RegularizerSpec};

/// Accelerated proximal gradient for
/// `min_Z 1/2 ||X - Z T(omega)||^2 + psi_GL(Z)`, warm-started at `phi0`.
pub fn fista_mode_update(
    phi0: &CMatrix,
    omega: &CVector,
    snapshots: &SnapshotSet,
    spec: &RegularizerSpec,
    mask: &GlobalLocalMask,
    inner_tol: f64,
    inner_max_iter: usize,
) -> Result<ModeUpdate> {
    fista(phi0, omega, snapshots.data(), snapshots.times(), spec, mask, inner_tol, inner_max_iter)
}

/// Gradient step `1 / ||T(omega)||_2^2`.
pub(crate) fn fista_step_size(t: &CMatrix) -> Result<f64> {
    let l = spectral_norm_sq(t)?;
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::NumericalFailure(format!("invalid Lipschitz constant {l}")));
    }
    Ok(1.0 / l)
}

struct Smooth {
    x_norm_sq: f64,
    /// `X T^*`
    b: CMatrix,
    /// `T T^*`
    g: CMatrix,
}

impl Smooth {
    /// `1/2 ||X - Z T||^2` expanded through the Gram matrices.
    fn value(&self, z: &CMatrix, zg: &CMatrix) -> f64 {
        let cross = z.dotc(&self.b).re;
        let quad = z.dotc(zg).re;
        (0.5 * (self.x_norm_sq - 2.0 * cross + quad)).max(0.0)
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn fista(
    phi0: &CMatrix,
    omega: &CVector,
    x: &CMatrix,
    times: &DVector<f64>,
    spec: &RegularizerSpec,
    mask: &GlobalLocalMask,
    inner_tol: f64,
    inner_max_iter: usize,
) -> Result<ModeUpdate> {
    if phi0.shape() != (x.nrows(), omega.len()) {
        return Err(Error::DimensionMismatch(format!(
            "initial modes are {}x{}, expected {}x{}",
            phi0.nrows(),
            phi0.ncols(),
            x.nrows(),
            omega.len()
        )));
    }
    let t = build_time_matrix(omega, times)?;
    let t = t.values();
    let gamma = fista_step_size(t)?;
    let smooth = Smooth {
        x_norm_sq: x.norm_squared(),
        b: x * t.adjoint(),
        g: t * t.adjoint(),
    };
    let objective = |z: &CMatrix| -> Result<f64> {
        let zg = z * &smooth.g;
        Ok(smooth.value(z, &zg) + masked_penalty(spec, z, mask)?)
    };

    let mut z = phi0.clone();
    let mut z_prev = z.clone();
    let mut f_z = objective(&z)?;
    let mut best = (f_z, z.clone());
    let mut tk = 1.0f64;
    for it in 1..=inner_max_iter {
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * tk * tk).sqrt());
        let momentum = (tk - 1.0) / t_next;
        let y = if momentum != 0.0 {
            &z + (&z - &z_prev) * Complex64::new(momentum, 0.0)
        } else {
            z.clone()
        };
        let grad = &y * &smooth.g - &smooth.b;
        let z_new = prox_matrix(spec, gamma, &(y - grad * Complex64::new(gamma, 0.0)), mask)?;
        let f_new = objective(&z_new)?;
        tk = if f_new > f_z { 1.0 } else { t_next };
        let change = relative_change(&z_new, &z);
        z_prev = std::mem::replace(&mut z, z_new);
        f_z = f_new;
        if f_z < best.0 {
            best = (f_z, z.clone());
        }
        if change < inner_tol {
            return Ok(ModeUpdate {
                phi_b: z,
                w: None,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(ModeUpdate {
        phi_b: best.1,
        w: None,
        iterations: inner_max_iter,
        converged: false,
    })
}
