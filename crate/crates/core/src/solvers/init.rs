use nalgebra::linalg::Schur;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{leading_left_singular_vectors, pinv_svd, DEFAULT_PINV_RTOL};
use crate::model::{eigenvalue_order, CMatrix, CVector, SnapshotSet};

/// Initial eigenvalue guess from a one-step linear propagator fitted (in the
/// total-least-squares sense) in the span of the `p` leading POD modes (`p`
/// defaults to `r`).
pub fn init_eigenvalues(snapshots: &SnapshotSet, r: usize, p: Option<usize>) -> Result<CVector> {
    let x = snapshots.data();
    let (n, m) = x.shape();
    let p = p.unwrap_or(r);
    check_ranks(n, m, r, p)?;
    check_nonzero(x)?;
    let basis = leading_left_singular_vectors(x, p)?;
    init_from_basis(x, snapshots.times(), &basis, r)
}

fn check_ranks(n: usize, m: usize, r: usize, p: usize) -> Result<()> {
    let bound = n.min(m.saturating_sub(1));
    if r == 0 || r > bound {
        return Err(Error::InvalidArgument(format!(
            "rank {r} outside 1..={bound} for {n} features and {m} snapshots"
        )));
    }
    if p < r || p > n.min(m) {
        return Err(Error::InvalidArgument(format!(
            "projection rank {p} outside {r}..={}",
            n.min(m)
        )));
    }
    Ok(())
}

pub(crate) fn check_nonzero(x: &CMatrix) -> Result<()> {
    if x.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return Err(Error::DegenerateData("data matrix is identically zero".into()));
    }
    Ok(())
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Same as [`init_eigenvalues`] with a precomputed orthonormal basis whose
/// columns are the leading POD modes (at least `r` of them).
pub(crate) fn init_from_basis(x: &CMatrix, times: &DVector<f64>, basis: &CMatrix, r: usize) -> Result<CVector> {
    let m = x.ncols();
    let p = basis.ncols();
    let y = basis.adjoint() * x;

    let gaps: Vec<f64> = (1..m).map(|k| times[k] - times[k - 1]).collect();
    let dt = median(&gaps);
    // pairs spaced by one median step; all pairs when none match
    let mut pairs: Vec<usize> = (0..m - 1)
        .filter(|&k| (gaps[k] - dt).abs() <= 1e-8 * dt)
        .collect();
    if pairs.is_empty() {
        pairs = (0..m - 1).collect();
    }
    let k = pairs.len();
    let y1 = CMatrix::from_fn(p, k, |i, c| y[(i, pairs[c])]);
    let y2 = CMatrix::from_fn(p, k, |i, c| y[(i, pairs[c] + 1)]);
    // total least squares: restrict both sides to the leading p-dimensional
    // row space of [Y1; Y2], which removes the damping bias noise puts on a
    // plain Y2 pinv(Y1) fit
    let (y1, y2) = if k >= p {
        let stacked = CMatrix::from_fn(2 * p, k, |i, c| if i < p { y1[(i, c)] } else { y2[(i - p, c)] });
        let v = leading_left_singular_vectors(&stacked.adjoint(), p)?;
        (&y1 * &v, &y2 * &v)
    } else {
        (y1, y2)
    };
    let a = &y2 * pinv_svd(&y1, DEFAULT_PINV_RTOL)?;

    let schur = Schur::try_new(a, f64::EPSILON, 1000 + 100 * p)
        .ok_or_else(|| Error::NumericalFailure("Schur decomposition did not converge".into()))?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| Error::NumericalFailure("propagator eigenvalues unavailable".into()))?;

    // keep the r least-damped eigenvalues when p > r
    let mut idx: Vec<usize> = (0..p).collect();
    idx.sort_by(|&i, &j| eig[j].norm().total_cmp(&eig[i].norm()));
    idx.truncate(r);
    if idx.iter().any(|&i| eig[i].norm() == 0.0 || !eig[i].norm().is_finite()) {
        return Err(Error::DegenerateData(
            "propagator has a zero eigenvalue; reduce the rank".into(),
        ));
    }
    let omega = CVector::from_iterator(r, idx.iter().map(|&i| eig[i].ln() / dt));
    let order = eigenvalue_order(&omega);
    Ok(CVector::from_iterator(r, order.iter().map(|&i| omega[i])))
}
