//! Dense linear algebra used by the solvers.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{CMatrix, CVector};

/// Default relative cutoff for pseudoinverse singular values.
pub const DEFAULT_PINV_RTOL: f64 = 1e-12;

/// `T(omega)`, the r x m matrix with entries `exp(omega_j t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeMatrix(CMatrix);

impl TimeMatrix {
    pub fn values(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }
}

impl std::ops::Deref for TimeMatrix {
    type Target = CMatrix;

    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

/// POD compression operator `C` (p x n) with orthonormal rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Compression {
    matrix: CMatrix,
}

impl Compression {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.nrows()
    }

    /// Maps compressed features back to the full space (`C^*`).
    pub fn lift(&self, compressed: &CMatrix) -> CMatrix {
        self.matrix.adjoint() * compressed
    }
}

pub fn build_time_matrix(omega: &CVector, times: &DVector<f64>) -> Result<TimeMatrix> {
    let mut t = CMatrix::zeros(omega.len(), times.len());
    for (k, &tk) in times.iter().enumerate() {
        for (j, w) in omega.iter().enumerate() {
            let z = (w * tk).exp();
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFiniteResult("time matrix (exponential overflow)"));
            }
            t[(j, k)] = z;
        }
    }
    Ok(TimeMatrix(t))
}

/// Derivative of `T(omega)` with respect to `omega_j`: only row `j` is
/// nonzero, holding `t_k exp(omega_j t_k)`.
pub fn time_matrix_derivative(omega: &CVector, times: &DVector<f64>, j: usize) -> Result<CMatrix> {
    if j >= omega.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            len: omega.len(),
        });
    }
    let mut d = CMatrix::zeros(omega.len(), times.len());
    for (k, &tk) in times.iter().enumerate() {
        let z = (omega[j] * tk).exp() * tk;
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFiniteResult("time matrix derivative"));
        }
        d[(j, k)] = z;
    }
    Ok(d)
}

/// Row `j` of `dT/domega_j` as a length-m vector.
pub(crate) fn time_derivative_row(omega_j: Complex64, times: &DVector<f64>) -> CVector {
    CVector::from_iterator(times.len(), times.iter().map(|&t| (omega_j * t).exp() * t))
}

fn svd_iteration_cap(m: &CMatrix) -> usize {
    1000 + 100 * m.nrows().max(m.ncols())
}

fn checked_svd(m: &CMatrix, u: bool, v: bool) -> Result<nalgebra::SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix passed to SVD"));
    }
    m.clone()
        .try_svd(u, v, f64::EPSILON, svd_iteration_cap(m))
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))
}

/// Moore-Penrose pseudoinverse; singular values below `rtol * sigma_max` are dropped.
pub fn pinv_svd(m: &CMatrix, rtol: f64) -> Result<CMatrix> {
    if rtol.is_nan() || rtol <= 0.0 {
        return Err(Error::InvalidArgument(format!("rtol must be positive, got {rtol}")));
    }
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(CMatrix::zeros(m.ncols(), m.nrows()));
    }
    let svd = checked_svd(m, true, true)?;
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^*");
    let s_max = svd.singular_values.max();
    let mut out = CMatrix::zeros(m.ncols(), m.nrows());
    if s_max == 0.0 {
        return Ok(out);
    }
    for (l, &s) in svd.singular_values.iter().enumerate() {
        if s > rtol * s_max {
            // out += v_l (1/s) u_l^*
            let v_col = v_t.row(l).adjoint();
            out.gerc(Complex64::new(1.0 / s, 0.0), &v_col, &u.column(l), Complex64::new(1.0, 0.0));
        }
    }
    Ok(out)
}

/// Pseudoinverse of `T(omega)` together with an orthonormal basis for the
/// range of `T(omega)^T`, both from one SVD.
pub(crate) struct TimeSvd {
    pub pinv: CMatrix,
    /// m x rank, orthonormal columns spanning range(T^T).
    pub range_basis: CMatrix,
}

impl TimeSvd {
    pub fn new(t: &CMatrix, rtol: f64) -> Result<Self> {
        let svd = checked_svd(t, true, true)?;
        let u = svd.u.as_ref().expect("requested U");
        let v_t = svd.v_t.as_ref().expect("requested V^*");
        let s_max = svd.singular_values.max();
        let mut pinv = CMatrix::zeros(t.ncols(), t.nrows());
        let keep: Vec<usize> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s_max > 0.0 && s > rtol * s_max)
            .map(|(l, _)| l)
            .collect();
        let mut range_basis = CMatrix::zeros(t.ncols(), keep.len());
        for (c, &l) in keep.iter().enumerate() {
            let s = svd.singular_values[l];
            let v_col = v_t.row(l).adjoint();
            pinv.gerc(Complex64::new(1.0 / s, 0.0), &v_col, &u.column(l), Complex64::new(1.0, 0.0));
            // T = U S V^*  =>  T^T = conj(V) S U^T, so range(T^T) = span(conj(V)).
            range_basis.set_column(c, &v_t.row(l).transpose());
        }
        Ok(Self { pinv, range_basis })
    }

    /// Applies `I - U U^*` to a length-m vector.
    pub fn project_out(&self, v: &CVector) -> CVector {
        let coeffs = self.range_basis.adjoint() * v;
        v - &self.range_basis * coeffs
    }
}

/// Leading left singular vectors (n x p, orthonormal columns), computed from
/// the Gram matrix of the smaller dimension.
pub(crate) fn leading_left_singular_vectors(x: &CMatrix, p: usize) -> Result<CMatrix> {
    let (n, m) = x.shape();
    if p == 0 || p > n.min(m) {
        return Err(Error::InvalidArgument(format!(
            "compression rank {p} outside 1..={}",
            n.min(m)
        )));
    }
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix passed to POD"));
    }
    let wide = n <= m;
    let gram = if wide { x * x.adjoint() } else { x.adjoint() * x };
    let dim = gram.nrows();
    let eig = gram
        .try_symmetric_eigen(f64::EPSILON, 1000 + 100 * dim)
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0);

    let mut u = CMatrix::zeros(n, p);
    for (c, &idx) in order.iter().take(p).enumerate() {
        let lam = eig.eigenvalues[idx];
        if wide {
            u.set_column(c, &eig.eigenvectors.column(idx));
        } else if lam > top * 1e-24 && lam > 0.0 {
            let col = x * eig.eigenvectors.column(idx) / Complex64::new(lam.sqrt(), 0.0);
            u.set_column(c, &col);
        }
        // columns in the numerical null space stay zero and are filled below
    }
    orthonormalize_columns(&mut u);
    Ok(u)
}

/// Modified Gram-Schmidt (two passes); columns that collapse are replaced by
/// the first standard basis vectors that are not already spanned.
fn orthonormalize_columns(u: &mut CMatrix) {
    let (n, p) = u.shape();
    let mut next_basis = 0usize;
    for c in 0..p {
        let mut ok = false;
        let original = u.column(c).into_owned();
        let mut candidate = original.clone();
        loop {
            for _ in 0..2 {
                for prev in 0..c {
                    let q = u.column(prev).into_owned();
                    let proj = q.dotc(&candidate);
                    candidate -= q * proj;
                }
            }
            let norm = candidate.norm();
            if norm > 1e-8 * original.norm().max(1.0) && norm > 0.0 {
                candidate.unscale_mut(norm);
                ok = true;
                break;
            }
            if next_basis >= n {
                break;
            }
            candidate = CVector::zeros(n);
            candidate[next_basis] = Complex64::new(1.0, 0.0);
            next_basis += 1;
        }
        debug_assert!(ok, "could not complete orthonormal basis");
        u.set_column(c, &candidate);
    }
}

/// Projects the data onto its `p` leading POD modes.
pub fn pod_compress(x: &CMatrix, p: usize) -> Result<(Compression, CMatrix)> {
    let u = leading_left_singular_vectors(x, p)?;
    let c = u.adjoint();
    let compressed = &c * x;
    Ok((Compression { matrix: c }, compressed))
}

/// Squared spectral norm (largest singular value squared).
pub fn spectral_norm_sq(a: &CMatrix) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let svd = checked_svd(a, false, false)?;
    let s = svd.singular_values.max();
    Ok(s * s)
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}


#[cfg(test)]
mod tests {
    use super::test_util::*;
    use super::*;
    use std::f64::consts::{E, LN_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn time_matrix_examples() {
        let t = build_time_matrix(&CVector::from_element(1, c(0.0, 0.0)), &DVector::from_vec(vec![0.0, 5.0, 9.0]))
            .unwrap();
        assert!(t.iter().all(|z| *z == c(1.0, 0.0)));

        let t = build_time_matrix(&CVector::from_element(1, c(0.0, PI)), &DVector::from_vec(vec![0.0, 1.0, 2.0]))
            .unwrap();
        for (z, e) in t.iter().zip([1.0, -1.0, 1.0]) {
            assert!((z - c(e, 0.0)).norm() < 1e-14);
        }

        let t = build_time_matrix(&CVector::from_element(1, c(1.0, 0.0)), &DVector::from_vec(vec![0.0, LN_2]))
            .unwrap();
        assert!((t[(0, 1)] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn time_matrix_overflow_is_an_error() {
        let err = build_time_matrix(&CVector::from_element(1, c(800.0, 0.0)), &DVector::from_vec(vec![0.0, 1.0]))
            .unwrap_err();
        assert!(matches!(err, Error::NonFiniteResult(_)));
    }

    #[test]
    fn imaginary_eigenvalues_give_unit_modulus() {
        let mut r = rng(3);
        let omega = CVector::from_fn(4, |_, _| c(0.0, 20.0 * uniform(&mut r) - 10.0));
        let times = DVector::from_fn(30, |k, _| k as f64 * 0.37);
        let t = build_time_matrix(&omega, &times).unwrap();
        assert!(t.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn derivative_examples() {
        let d = time_matrix_derivative(&CVector::from_element(1, c(0.0, 0.0)), &DVector::from_vec(vec![0.0, 1.0, 2.0]), 0)
            .unwrap();
        for (z, e) in d.iter().zip([0.0, 1.0, 2.0]) {
            assert_eq!(*z, c(e, 0.0));
        }
        let d = time_matrix_derivative(&CVector::from_element(1, c(1.0, 0.0)), &DVector::from_vec(vec![1.0]), 0).unwrap();
        assert!((d[(0, 0)] - c(E, 0.0)).norm() < 1e-14);

        let omega = CVector::from_vec(vec![c(0.3, 1.0), c(-0.2, 4.0)]);
        let d = time_matrix_derivative(&omega, &DVector::from_vec(vec![0.0, 0.5, 1.0]), 1).unwrap();
        assert_eq!(d[(1, 0)], c(0.0, 0.0));
        assert!(d.row(0).iter().all(|z| *z == c(0.0, 0.0)));

        assert!(matches!(
            time_matrix_derivative(&omega, &DVector::from_vec(vec![0.0]), 2),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn derivative_matches_central_difference() {
        let mut r = rng(11);
        for _ in 0..20 {
            let omega = CVector::from_fn(3, |_, _| c(0.4 * uniform(&mut r) - 0.2, 6.0 * uniform(&mut r) - 3.0));
            let times = DVector::from_fn(8, |k, _| k as f64 * 0.3 + 0.1 * uniform(&mut r));
            let j = (uniform(&mut r) * 3.0) as usize % 3;
            let h = 1e-6;
            let mut plus = omega.clone();
            plus[j] += h;
            let mut minus = omega.clone();
            minus[j] -= h;
            let fd = (build_time_matrix(&plus, &times).unwrap().into_inner()
                - build_time_matrix(&minus, &times).unwrap().into_inner())
                / c(2.0 * h, 0.0);
            let d = time_matrix_derivative(&omega, &times, j).unwrap();
            assert!((&fd - &d).norm() / d.norm() < 1e-5);
        }
    }

    #[test]
    fn pinv_identity_and_zero() {
        let id = CMatrix::identity(4, 4);
        assert!((pinv_svd(&id, 1e-12).unwrap() - &id).norm() < 1e-14);
        let z = CMatrix::zeros(3, 5);
        let p = pinv_svd(&z, 1e-12).unwrap();
        assert_eq!(p.shape(), (5, 3));
        assert_eq!(p.norm(), 0.0);
    }

    #[test]
    fn pinv_satisfies_penrose_conditions() {
        let mut r = rng(5);
        for _ in 0..10 {
            let m = random_matrix(&mut r, 4, 3);
            let p = pinv_svd(&m, 1e-12).unwrap();
            assert!((&m * &p * &m - &m).norm() < 1e-10);
            assert!((&p * &m * &p - &p).norm() < 1e-10);
            let mp = &m * &p;
            let pm = &p * &m;
            assert!((mp.adjoint() - &mp).norm() < 1e-10);
            assert!((pm.adjoint() - &pm).norm() < 1e-10);
        }
    }

    #[test]
    fn pinv_rejects_bad_rtol() {
        assert!(pinv_svd(&CMatrix::identity(2, 2), 0.0).is_err());
    }

    #[test]
    fn time_svd_projector_annihilates_range() {
        let mut r = rng(9);
        let t = random_matrix(&mut r, 2, 7);
        let svd = TimeSvd::new(&t, 1e-12).unwrap();
        assert!((&svd.pinv - pinv_svd(&t, 1e-12).unwrap()).norm() < 1e-12);
        // rows of T (as columns of T^T) lie in the range
        for j in 0..2 {
            let v = t.row(j).transpose();
            assert!(svd.project_out(&v).norm() < 1e-12);
        }
    }

    #[test]
    fn pod_single_nonzero_row() {
        let mut x = CMatrix::zeros(4, 6);
        for k in 0..6 {
            x[(2, k)] = c(k as f64 - 1.0, 0.5 * k as f64);
        }
        let row_norm = x.row(2).norm();
        let (comp, y) = pod_compress(&x, 1).unwrap();
        assert_eq!(comp.rank(), 1);
        assert!((y.norm() - row_norm).abs() < 1e-10);
    }

    #[test]
    fn pod_full_rank_preserves_norm_and_is_orthonormal() {
        let mut r = rng(1);
        for (n, m) in [(5, 8), (8, 5), (6, 6)] {
            let x = random_matrix(&mut r, n, m);
            let p = n.min(m);
            let (comp, y) = pod_compress(&x, p).unwrap();
            assert!((x.norm() - y.norm()).abs() < 1e-10);
            let cc = comp.matrix() * comp.matrix().adjoint();
            assert!((cc - CMatrix::identity(p, p)).norm() < 1e-10);
        }
    }

    #[test]
    fn pod_rank_one_is_exact() {
        let mut r = rng(2);
        let u = random_matrix(&mut r, 7, 1);
        let v = random_matrix(&mut r, 9, 1);
        let x = &u * v.adjoint();
        let (comp, y) = pod_compress(&x, 1).unwrap();
        assert!((comp.lift(&y) - &x).norm() / x.norm() < 1e-10);
    }

    #[test]
    fn pod_rank_deficient_still_orthonormal() {
        let mut r = rng(4);
        let u = random_matrix(&mut r, 6, 1);
        let v = random_matrix(&mut r, 10, 1);
        let x = &u * v.adjoint();
        let (comp, _) = pod_compress(&x, 4).unwrap();
        let cc = comp.matrix() * comp.matrix().adjoint();
        assert!((cc - CMatrix::identity(4, 4)).norm() < 1e-10);
    }

    #[test]
    fn pod_rank_out_of_range() {
        let x = CMatrix::identity(3, 4);
        assert!(pod_compress(&x, 0).is_err());
        assert!(pod_compress(&x, 4).is_err());
    }

    #[test]
    fn spectral_norm_examples() {
        assert!((spectral_norm_sq(&CMatrix::identity(3, 3)).unwrap() - 1.0).abs() < 1e-14);
        let mut d = CMatrix::zeros(2, 2);
        d[(0, 0)] = c(2.0, 0.0);
        d[(1, 1)] = c(1.0, 0.0);
        assert!((spectral_norm_sq(&d).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn spectral_norm_matches_gram_eigenvalue() {
        let mut r = rng(8);
        for _ in 0..10 {
            let a = random_matrix(&mut r, 6, 4);
            let gram = a.adjoint() * &a;
            let eig = gram.symmetric_eigen();
            let lmax = eig.eigenvalues.max();
            let s = spectral_norm_sq(&a).unwrap();
            assert!((s - lmax).abs() < 1e-10 * lmax.max(1.0));
        }
    }
}
