use std::collections::HashMap;

use nalgebra::DVector;
use num_complex::Complex64;

use super::{relative_change, ModeUpdate};
use crate::error::{Error, Result};
use crate::linalg::{build_time_matrix, pinv_svd, DEFAULT_PINV_RTOL};
use crate::model::{CMatrix, CVector, SnapshotSet};
use crate::prox::{prox_matrix, GlobalLocalMask, RegularizerSpec};

/// Relaxed alternating mode update followed by a least-squares refit of each
/// row on its active set. Returns the refit modes and the auxiliary matrix.
#[allow(clippy::too_many_arguments)]
pub fn sr3_mode_update(
    phi0: &CMatrix,
    omega: &CVector,
    snapshots: &SnapshotSet,
    spec: &RegularizerSpec,
    mask: &GlobalLocalMask,
    eta: f64,
    inner_tol: f64,
    inner_max_iter: usize,
) -> Result<ModeUpdate> {
    sr3(
        phi0,
        omega,
        snapshots.data(),
        snapshots.times(),
        spec,
        mask,
        eta,
        inner_tol,
        inner_max_iter,
        DEFAULT_PINV_RTOL,
    )
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn sr3(
    phi0: &CMatrix,
    omega: &CVector,
    x: &CMatrix,
    times: &DVector<f64>,
    spec: &RegularizerSpec,
    mask: &GlobalLocalMask,
    eta: f64,
    inner_tol: f64,
    inner_max_iter: usize,
    rtol: f64,
) -> Result<ModeUpdate> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
    }
    let r = omega.len();
    if phi0.shape() != (x.nrows(), r) || mask.len() != r {
        return Err(Error::DimensionMismatch(format!(
            "initial modes are {}x{} with a mask of length {}, expected {}x{r}",
            phi0.nrows(),
            phi0.ncols(),
            mask.len(),
            x.nrows()
        )));
    }
    let t = build_time_matrix(omega, times)?.into_inner();
    let b = x * t.adjoint();
    let mut h = &t * t.adjoint();
    for j in 0..r {
        h[(j, j)] += Complex64::new(1.0 / eta, 0.0);
    }
    let chol = h
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("relaxed normal matrix is not positive definite".into()))?;
    let inv_eta = Complex64::new(1.0 / eta, 0.0);

    let mut w = phi0.clone();
    let mut iterations = inner_max_iter;
    let mut converged = false;
    for it in 1..=inner_max_iter {
        // rows solve phi (T T^* + I/eta) = x T^* + w / eta
        let rhs = &b + &w * inv_eta;
        let phi = chol.solve(&rhs.adjoint()).adjoint();
        let w_new = prox_matrix(spec, eta, &phi, mask)?;
        let change = relative_change(&w_new, &w);
        w = w_new;
        if change < inner_tol {
            iterations = it;
            converged = true;
            break;
        }
    }
    let phi_b = debias(&w, &t, x, mask, rtol)?;
    Ok(ModeUpdate {
        phi_b,
        w: Some(w),
        iterations,
        converged,
    })
}

/// Refits each row of the modes by least squares restricted to the columns
/// where `w` is nonzero, plus all global columns.
pub(crate) fn debias(w: &CMatrix, t: &CMatrix, x: &CMatrix, mask: &GlobalLocalMask, rtol: f64) -> Result<CMatrix> {
    let (n, r) = w.shape();
    let mut groups: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    for i in 0..n {
        let active: Vec<usize> = (0..r)
            .filter(|&j| mask.is_global[j] || w[(i, j)] != Complex64::new(0.0, 0.0))
            .collect();
        if active.is_empty() {
            continue;
        }
        let g = *index.entry(active.clone()).or_insert_with(|| {
            groups.push((active, Vec::new()));
            groups.len() - 1
        });
        groups[g].1.push(i);
    }

    let mut phi = CMatrix::zeros(n, r);
    for (active, rows) in &groups {
        let t_s = t.select_rows(active.iter());
        let pinv = pinv_svd(&t_s, rtol)?;
        let x_rows = x.select_rows(rows.iter());
        let fit = x_rows * pinv;
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in active.iter().enumerate() {
                phi[(i, j)] = fit[(a, b)];
            }
        }
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::test_util::*;
    use crate::model::validate_snapshots;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn instance(seed: u64, n: usize, m: usize) -> (SnapshotSet, CVector) {
        let mut r = rng(seed);
        let x = random_matrix(&mut r, n, m);
        let times = DVector::from_fn(m, |k, _| 0.3 * k as f64);
        let omega = CVector::from_vec(vec![c(-0.05, 0.9), c(0.02, -2.1), c(0.0, 3.3)]);
        (validate_snapshots(x, times).unwrap(), omega)
    }

    #[test]
    fn unregularized_fixed_point_is_least_squares() {
        let (s, omega) = instance(1, 6, 12);
        let mask = GlobalLocalMask::all_local(3);
        let out = sr3_mode_update(&CMatrix::zeros(6, 3), &omega, &s, &RegularizerSpec::none(), &mask, 1.0, 1e-14, 100_000)
            .unwrap();
        let t = build_time_matrix(&omega, s.times()).unwrap();
        let ls = s.data() * pinv_svd(t.values(), DEFAULT_PINV_RTOL).unwrap();
        let w = out.w.unwrap();
        assert!((&w - &ls).norm() / ls.norm() < 1e-8);
        assert!((&out.phi_b - &ls).norm() / ls.norm() < 1e-8);
    }

    #[test]
    fn fully_thresholded_row_is_zero() {
        let (mut s, omega) = instance(2, 4, 10);
        let (mut x, times) = s.clone().into_parts();
        x.row_mut(2).scale_mut(1e-6);
        s = validate_snapshots(x, times).unwrap();
        let mask = GlobalLocalMask::all_local(3);
        let out = sr3_mode_update(&CMatrix::zeros(4, 3), &omega, &s, &RegularizerSpec::l1(0.5), &mask, 1.0, 1e-8, 1000)
            .unwrap();
        assert!(out.w.as_ref().unwrap().row(2).iter().all(|z| *z == c(0.0, 0.0)));
        assert!(out.phi_b.row(2).iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn debiased_entries_solve_restricted_normal_equations() {
        let (s, omega) = instance(3, 8, 15);
        let mask = GlobalLocalMask {
            is_global: vec![false, true, false],
        };
        let out = sr3_mode_update(&CMatrix::zeros(8, 3), &omega, &s, &RegularizerSpec::l1(0.6), &mask, 1.0, 1e-10, 5000)
            .unwrap();
        let w = out.w.unwrap();
        let t = build_time_matrix(&omega, s.times()).unwrap().into_inner();
        let mut saw_partial = false;
        for i in 0..8 {
            let active: Vec<usize> = (0..3).filter(|&j| j == 1 || w[(i, j)] != c(0.0, 0.0)).collect();
            saw_partial |= active.len() < 3;
            // normal equations: z (T_S T_S^*) = x_i T_S^*
            let ts = t.select_rows(active.iter());
            let gram = &ts * ts.adjoint();
            let rhs = s.data().row(i) * ts.adjoint();
            let z = gram.transpose().lu().solve(&rhs.transpose()).unwrap().transpose();
            for (b, &j) in active.iter().enumerate() {
                assert!((out.phi_b[(i, j)] - z[b]).norm() < 1e-10);
            }
            for j in (0..3).filter(|j| !active.contains(j)) {
                assert_eq!(out.phi_b[(i, j)], c(0.0, 0.0));
            }
        }
        assert!(saw_partial, "instance should exercise a restricted active set");
    }

    #[test]
    fn rejects_nonpositive_eta() {
        let (s, omega) = instance(4, 3, 6);
        let mask = GlobalLocalMask::all_local(3);
        assert!(sr3_mode_update(&CMatrix::zeros(3, 3), &omega, &s, &RegularizerSpec::none(), &mask, 0.0, 1e-6, 10).is_err());
    }
}
