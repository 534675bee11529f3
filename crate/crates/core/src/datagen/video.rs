use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use super::noise::add_noise;
use crate::error::{Error, Result};
use crate::linalg::build_time_matrix;
use crate::model::{validate_snapshots, CMatrix, CVector, DmdModel, SnapshotSet};

#[derive(Debug, Clone, PartialEq)]
pub struct VideoSpec {
    pub height: usize,
    pub width: usize,
    pub n_frames: usize,
    pub dt: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for VideoSpec {
    fn default() -> Self {
        Self {
            height: 50,
            width: 50,
            n_frames: 1000,
            dt: 0.01,
            noise_sigma: 0.8,
            seed: 0,
        }
    }
}

const GAUSSIAN_STD: f64 = 8.0;

/// Half-open pixel range `[0.8 len, 0.96 len)`, at least one pixel wide.
fn corner_range(len: usize) -> std::ops::Range<usize> {
    let start = ((0.8 * len as f64).floor() as usize).min(len - 1);
    let end = ((0.96 * len as f64).floor() as usize).clamp(start + 1, len);
    start..end
}

fn normalize_max(v: &mut CVector) {
    let top = v.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if top > 0.0 {
        v.unscale_mut(top);
    }
}

/// The three spatial modes (gradient, centered Gaussian, corner square),
/// flattened row-major, each scaled to unit maximum magnitude.
fn spatial_modes(h: usize, w: usize) -> CMatrix {
    let n = h * w;
    let span = (h + w).saturating_sub(2).max(1) as f64;
    let (rc, cc) = ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0);
    let (rows, cols) = (corner_range(h), corner_range(w));
    let mut grad = CVector::zeros(n);
    let mut gauss = CVector::zeros(n);
    let mut square = CVector::zeros(n);
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            grad[i] = Complex64::new((r + c) as f64 / span, 0.0);
            let d2 = (r as f64 - rc).powi(2) + (c as f64 - cc).powi(2);
            gauss[i] = Complex64::new((-d2 / (2.0 * GAUSSIAN_STD * GAUSSIAN_STD)).exp(), 0.0);
            if rows.contains(&r) && cols.contains(&c) {
                square[i] = Complex64::new(1.0, 0.0);
            }
        }
    }
    let mut modes = CMatrix::zeros(n, 3);
    for (j, mut v) in [grad, gauss, square].into_iter().enumerate() {
        normalize_max(&mut v);
        modes.set_column(j, &v);
    }
    modes
}

/// Oscillating video: a slow global gradient, a centered Gaussian and a small
/// corner square at eigenvalues `pi i`, `2 pi i`, `3 pi i`.
pub fn gen_synthetic_video(spec: &VideoSpec) -> Result<(SnapshotSet, SnapshotSet, DmdModel)> {
    if spec.height == 0 || spec.width == 0 {
        return Err(Error::InvalidArgument("frame must have at least one pixel".into()));
    }
    if !(spec.dt > 0.0 && spec.dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {}", spec.dt)));
    }
    if spec.n_frames < 2 {
        return Err(Error::TooFewSnapshots(spec.n_frames));
    }
    let modes = spatial_modes(spec.height, spec.width);
    let omega = CVector::from_vec(vec![
        Complex64::new(0.0, PI),
        Complex64::new(0.0, 2.0 * PI),
        Complex64::new(0.0, 3.0 * PI),
    ]);
    let times = DVector::from_fn(spec.n_frames, |k, _| k as f64 * spec.dt);
    let clean = &modes * build_time_matrix(&omega, &times)?.values();
    let noisy = add_noise(&clean, spec.noise_sigma, spec.seed)?;
    let truth = DmdModel::from_phi_b(omega, &modes)?;
    Ok((
        validate_snapshots(clean, times.clone())?,
        validate_snapshots(noisy, times)?,
        truth,
    ))
}
